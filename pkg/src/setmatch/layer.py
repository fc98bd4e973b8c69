"""Permutation-invariant layer: match an input set against trainable hidden sets.

Forward: for each hidden set k, score every (input element, hidden element)
pair with ReLU of their inner product, solve one matching problem on the
score matrix, and emit the objective value as component k of the embedding.
Reordering the input vectors never changes the embedding, because a matching
optimum does not depend on how the rows of the score matrix are labelled.

Backward: the optimal assignment is held fixed (envelope treatment), so the
embedding component is locally linear in the hidden matrix and its gradient
is assembled directly from the selected pairs. Solvers only select pairs
with strictly positive score, which makes the ReLU subgradient mask implicit:
every selected edge sits on the active (positive) side of the kink, and the
subgradient at exactly zero is taken as zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assignment import (
    Assignment,
    _solve_exact_scores,
    _solve_relaxed_scores,
)
from .errors import InputError

MODES = ("exact", "relaxed")


@dataclass
class VectorSet:
    """One example: |X| row vectors of shared dimension, order-insensitive."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.vectors, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise InputError(f"a vector set needs shape (n>=1, d>=1), got {v.shape}")
        if not np.isfinite(v).all():
            raise InputError("vector set contains non-finite entries")
        self.vectors = v

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass
class HiddenSets:
    """The trainable hidden sets: m matrices of shape (d, cardinality_k).

    Each column is one hidden element; cardinalities may differ per set.
    """

    matrices: list[np.ndarray]

    def __post_init__(self):
        if not self.matrices:
            raise InputError("at least one hidden set is required")
        mats = [np.ascontiguousarray(h, dtype=np.float64) for h in self.matrices]
        d = mats[0].shape[0] if mats[0].ndim == 2 else -1
        for k, h in enumerate(mats):
            if h.ndim != 2 or h.shape[0] != d or h.shape[1] < 1:
                raise InputError(f"hidden set {k} has shape {h.shape}, expected ({d}, >=1)")
        self.matrices = mats

    @property
    def m(self) -> int:
        return len(self.matrices)

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def cardinalities(self) -> list[int]:
        return [h.shape[1] for h in self.matrices]


@dataclass
class SetEmbedding:
    """Layer output: one matching objective per hidden set.

    The per-set assignments are retained for the backward pass so the
    matching problems are solved once per forward.
    """

    values: np.ndarray
    assignments: list[Assignment] = field(repr=False)


def score_matrix(x: VectorSet, hidden_matrix: np.ndarray) -> np.ndarray:
    """ReLU(V @ H): the |X| x |Y_k| matrix of pairwise edge weights."""
    h = np.asarray(hidden_matrix, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] != x.dim:
        raise InputError(
            f"hidden matrix shape {h.shape} incompatible with input dimension {x.dim}"
        )
    return np.maximum(x.vectors @ h, 0.0)


def layer_forward(x: VectorSet, hidden: HiddenSets, mode: str = "exact") -> SetEmbedding:
    """Solve one matching per hidden set; component k is its objective value."""
    if mode not in MODES:
        raise InputError(f"mode must be one of {MODES}, got {mode!r}")
    if hidden.dim != x.dim:
        raise InputError(f"input dimension {x.dim} != hidden dimension {hidden.dim}")
    # score matrices are valid by construction (finite inputs, ReLU), so the
    # per-matrix input checks of the public solvers are skipped here
    solver = _solve_exact_scores if mode == "exact" else _solve_relaxed_scores
    vectors = x.vectors
    assignments = [solver(np.maximum(vectors @ h, 0.0)) for h in hidden.matrices]
    values = np.array([a.objective for a in assignments], dtype=np.float64)
    return SetEmbedding(values=values, assignments=assignments)


def layer_backward(
    x: VectorSet,
    hidden: HiddenSets,
    emb: SetEmbedding,
    upstream: np.ndarray,
) -> list[np.ndarray]:
    """Gradients of the loss with respect to each hidden matrix.

    `upstream` is dL/d(embedding values), length m. With the assignment D_k
    fixed, component k equals the sum of selected scores, so
    dL/dH_k[:, j] accumulates upstream[k] * v_i over selected pairs (i, j).
    Caller contract: `emb` must come from `layer_forward` on the same
    (x, hidden); staleness is not detected.
    """
    up = np.asarray(upstream, dtype=np.float64)
    if up.shape != (hidden.m,):
        raise InputError(f"upstream must have shape ({hidden.m},), got {up.shape}")
    if len(emb.assignments) != hidden.m:
        raise InputError("embedding does not match the hidden sets (wrong m)")
    grads = []
    for k, h in enumerate(hidden.matrices):
        grad_ct = np.zeros((h.shape[1], h.shape[0]))  # (cardinality, d)
        pairs = emb.assignments[k].pairs
        if pairs and up[k] != 0.0:
            rows = np.fromiter((i for i, _ in pairs), dtype=np.intp, count=len(pairs))
            cols = np.fromiter((j for _, j in pairs), dtype=np.intp, count=len(pairs))
            # cols can repeat in relaxed mode when |X| < |Y_k|
            np.add.at(grad_ct, cols, up[k] * x.vectors[rows])
        grads.append(np.ascontiguousarray(grad_ct.T))
    return grads
