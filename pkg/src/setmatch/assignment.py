"""Bipartite matching solvers over nonnegative weight matrices.

Three routes to an `Assignment`:

* `solve_exact` -- maximum-weight matching (each row and each column used at
  most once), Hungarian method on the column-padded matrix.
* `solve_relaxed` -- drops the multiplicity constraint on the larger side,
  which reduces to a per-column (or per-row) argmax of positive weights. Its
  objective is always an upper bound on the exact one.
* `brute_force_oracle` -- exhaustive enumeration, for testing only.

The exact solver kernel is compiled (Cython) when available and falls back
to pure Python otherwise; `MATCHING_BACKEND` records which one is active.
Set SETMATCH_BACKEND=python|compiled to force a choice.

All solvers are stateless pure functions and may run concurrently.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import InputError

_requested = os.environ.get("SETMATCH_BACKEND", "auto").lower()
if _requested in ("", "auto"):
    try:
        from . import _matching_c as _kernel

        MATCHING_BACKEND = "compiled"
    except ImportError:
        from . import _matching_py as _kernel

        MATCHING_BACKEND = "python"
elif _requested == "python":
    from . import _matching_py as _kernel

    MATCHING_BACKEND = "python"
elif _requested == "compiled":
    from . import _matching_c as _kernel

    MATCHING_BACKEND = "compiled"
else:
    raise ImportError(f"unknown SETMATCH_BACKEND value: {_requested!r}")

# brute_force_oracle refuses anything larger than this per side
MAX_ORACLE_DIM = 8


@dataclass(frozen=True)
class Assignment:
    """Selected (row, col) pairs of one matching problem and their total weight.

    Every selected pair has strictly positive weight; zero-weight edges
    contribute nothing and are dropped. `objective` is the sum of the
    selected weights, accumulated in ascending value order so that the same
    edge set always produces the bit-identical float, regardless of how the
    rows of the weight matrix were permuted.
    """

    pairs: tuple[tuple[int, int], ...]
    objective: float


def as_weight_matrix(weights) -> np.ndarray:
    """Validate and convert to a C-contiguous float64 matrix.

    Entries must be finite and nonnegative (they are post-ReLU scores), with
    at least one row and one column.
    """
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.ndim != 2:
        raise InputError(f"weight matrix must be 2-D, got ndim={w.ndim}")
    if w.shape[0] < 1 or w.shape[1] < 1:
        raise InputError(f"weight matrix must be at least 1x1, got {w.shape}")
    if not np.isfinite(w).all():
        raise InputError("weight matrix contains non-finite entries")
    if (w < 0.0).any():
        raise InputError("weight matrix contains negative entries")
    return w


def _assignment_from_pairs(w: np.ndarray, pairs: list[tuple[int, int]]) -> Assignment:
    if not pairs:
        return Assignment(pairs=(), objective=0.0)
    pairs = sorted(pairs)
    rows = np.fromiter((i for i, _ in pairs), dtype=np.intp, count=len(pairs))
    cols = np.fromiter((j for _, j in pairs), dtype=np.intp, count=len(pairs))
    objective = float(np.sort(w[rows, cols]).sum())
    return Assignment(pairs=tuple(pairs), objective=objective)


def _solve_exact_scores(w: np.ndarray) -> Assignment:
    """solve_exact without input validation (w already a valid score matrix)."""
    row_to_col = _kernel.solve_lap(w)
    pairs = [(i, int(j)) for i, j in enumerate(row_to_col) if j >= 0 and w[i, j] > 0.0]
    return _assignment_from_pairs(w, pairs)


def _solve_relaxed_scores(w: np.ndarray) -> Assignment:
    """solve_relaxed without input validation."""
    r, c = w.shape
    if r >= c:
        best_rows = np.argmax(w, axis=0)
        vals = w[best_rows, np.arange(c)]
        pairs = [(int(best_rows[j]), int(j)) for j in np.flatnonzero(vals > 0.0)]
    else:
        best_cols = np.argmax(w, axis=1)
        vals = w[np.arange(r), best_cols]
        pairs = [(int(i), int(best_cols[i])) for i in np.flatnonzero(vals > 0.0)]
    return _assignment_from_pairs(w, pairs)


def solve_exact(weights) -> Assignment:
    """Maximum-weight bipartite matching: row and column each used at most once.

    The optimum of the matching LP is integral (the constraint matrix is
    totally unimodular), so the combinatorial solver returns the LP optimum.
    """
    return _solve_exact_scores(as_weight_matrix(weights))


def solve_relaxed(weights) -> Assignment:
    """Relaxed matching: the larger side may be matched repeatedly.

    With rows >= cols the column constraint is kept, so the optimum picks,
    for each column, the row with the largest positive weight (ties broken
    toward the lowest index). With rows < cols the roles swap. The objective
    is an upper bound on `solve_exact`'s for the same matrix.
    """
    return _solve_relaxed_scores(as_weight_matrix(weights))


def brute_force_oracle(weights) -> Assignment:
    """Exhaustive maximum over all injective assignments. Testing oracle.

    Refuses matrices larger than MAX_ORACLE_DIM on either side.
    """
    w = as_weight_matrix(weights)
    r, c = w.shape
    if r > MAX_ORACLE_DIM or c > MAX_ORACLE_DIM:
        raise InputError(
            f"brute_force_oracle is limited to {MAX_ORACLE_DIM}x{MAX_ORACLE_DIM}, got {w.shape}"
        )
    best = -1.0
    best_pairs: list[tuple[int, int]] = []
    if r <= c:
        for perm in permutations(range(c), r):
            total = sum(w[i, perm[i]] for i in range(r))
            if total > best:
                best = total
                best_pairs = [(i, perm[i]) for i in range(r) if w[i, perm[i]] > 0.0]
    else:
        for perm in permutations(range(r), c):
            total = sum(w[perm[j], j] for j in range(c))
            if total > best:
                best = total
                best_pairs = [(perm[j], j) for j in range(c) if w[perm[j], j] > 0.0]
    return _assignment_from_pairs(w, best_pairs)


def pad_to_square(weights) -> np.ndarray:
    """Zero-pad the smaller dimension. Lossless for nonnegative weights:

    padded edges weigh 0, so an optimal matching on the square matrix
    restricted to the original indices is optimal for the original problem.
    """
    w = as_weight_matrix(weights)
    r, c = w.shape
    if r == c:
        return w.copy()
    n = max(r, c)
    out = np.zeros((n, n), dtype=np.float64)
    out[:r, :c] = w
    return out
