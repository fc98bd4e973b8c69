"""Shared helpers: golden matching instance, oracles, finite differences."""

from __future__ import annotations

from itertools import permutations

import numpy as np

from setmatch.classifier import ClassifierHead, backward_head, nll_loss, predict
from setmatch.layer import HiddenSets, VectorSet, layer_backward, layer_forward

# A hand-verified 4-element / 5-element instance in 3 dimensions. With
# ReLU-inner-product edge weights the unique maximum matching selects
# (0,2), (1,1), (2,4), (3,0) with total weight 16.0528; the relaxed optimum
# (per-row argmax, since 4 rows < 5 columns) totals 16.9006.
GOLDEN_INPUT = np.array(
    [
        [1.76, 0.40, 0.97],
        [2.24, 1.86, -0.97],
        [0.95, -0.15, -0.10],
        [0.41, 0.14, 1.45],
    ]
)
GOLDEN_HIDDEN = np.array(
    [
        [0.52, 0.08, 1.62],
        [2.14, 1.72, -1.05],
        [1.55, -0.45, 0.88],
        [-0.34, -1.26, 0.24],
        [1.08, -0.21, -0.09],
    ]
).T  # columns are the hidden elements
GOLDEN_EXACT_OBJECTIVE = 16.05
GOLDEN_EXACT_PAIRS = {(0, 2), (1, 1), (2, 4), (3, 0)}
GOLDEN_RELAXED_OBJECTIVE = 16.90
GOLDEN_RELAXED_PAIRS = {(0, 1), (1, 1), (2, 1), (3, 0)}


def golden_weights() -> np.ndarray:
    return np.maximum(GOLDEN_INPUT @ GOLDEN_HIDDEN, 0.0)


def random_weights(rng, max_rows=6, max_cols=6, zero_fraction=0.3) -> np.ndarray:
    """Nonnegative random matrix with a controllable share of exact zeros."""
    r = int(rng.integers(1, max_rows + 1))
    c = int(rng.integers(1, max_cols + 1))
    w = rng.uniform(0.0, 5.0, size=(r, c))
    w[rng.random(size=(r, c)) < zero_fraction] = 0.0
    return w


def assert_assignment_valid(a, w, mode: str) -> None:
    """Multiplicity constraints, positive weights, exact objective recompute."""
    r, c = w.shape
    rows = [i for i, _ in a.pairs]
    cols = [j for _, j in a.pairs]
    if mode == "exact":
        assert len(set(rows)) == len(rows), "exact: repeated row"
        assert len(set(cols)) == len(cols), "exact: repeated column"
    elif mode == "relaxed":
        if r >= c:
            assert len(set(cols)) == len(cols), "relaxed r>=c: repeated column"
        else:
            assert len(set(rows)) == len(rows), "relaxed r<c: repeated row"
    else:
        raise AssertionError(mode)
    for i, j in a.pairs:
        assert 0 <= i < r and 0 <= j < c
        assert w[i, j] > 0.0, "selected zero-weight pair"
    if a.pairs:
        recomputed = float(np.sort(w[np.array(rows), np.array(cols)]).sum())
    else:
        recomputed = 0.0
    assert a.objective == recomputed, "objective != canonical sum of selected weights"


def enumerate_assignment_objectives(w) -> list[tuple[float, frozenset]]:
    """All injective assignments as (objective, positive-pair set). Small sizes only."""
    r, c = w.shape
    out = []
    if r <= c:
        for perm in permutations(range(c), r):
            pairs = frozenset((i, perm[i]) for i in range(r) if w[i, perm[i]] > 0.0)
            out.append((float(sum(w[i, perm[i]] for i in range(r))), pairs))
    else:
        for perm in permutations(range(r), c):
            pairs = frozenset((perm[j], j) for j in range(c) if w[perm[j], j] > 0.0)
            out.append((float(sum(w[perm[j], j] for j in range(c))), pairs))
    return out


def exact_tie_margin(w) -> float:
    """Gap between the best assignment and the best one selecting different pairs."""
    scored = enumerate_assignment_objectives(w)
    best_obj, best_pairs = max(scored, key=lambda t: t[0])
    rivals = [obj for obj, pairs in scored if pairs != best_pairs]
    if not rivals:
        return np.inf
    return best_obj - max(rivals)


def relaxed_tie_margin(w) -> float:
    """Smallest top-1 vs top-2 weight gap over the argmax axis."""
    r, c = w.shape
    axis = 0 if r >= c else 1
    if w.shape[axis] == 1:
        return np.inf
    sorted_w = np.sort(w, axis=axis)
    if axis == 0:
        top1, top2 = sorted_w[-1, :], sorted_w[-2, :]
    else:
        top1, top2 = sorted_w[:, -1], sorted_w[:, -2]
    # only columns/rows with a positive winner select a pair
    gaps = top1 - top2
    return float(gaps.min()) if gaps.size else np.inf


def central_difference(f, arr: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Elementwise central finite differences of scalar f with respect to arr."""
    grad = np.zeros_like(arr)
    flat = arr.reshape(-1)
    gflat = grad.reshape(-1)
    for idx in range(flat.size):
        orig = flat[idx]
        flat[idx] = orig + step
        up = f()
        flat[idx] = orig - step
        down = f()
        flat[idx] = orig
        gflat[idx] = (up - down) / (2.0 * step)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Norm-wise relative error with an absolute floor of 1 (the loss scale).

    Central differences carry ~1e-10 absolute noise per entry, so blocks
    whose true gradient is smaller than that can only be compared
    absolutely; the floor makes the check "relative above 1, absolute
    below", which is strictly tighter than 1e-5 relative for O(1) blocks.
    """
    na = np.linalg.norm(analytic)
    nf = np.linalg.norm(numeric)
    return float(np.linalg.norm(analytic - numeric) / max(na, nf, 1.0))


class SmallModel:
    """One example + hidden sets + head, with analytic and scalar-loss views."""

    def __init__(self, rng, mode: str, num_classes=None, hidden_fc=False):
        d = int(rng.integers(2, 4))
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, 4))
        cards = [int(rng.integers(1, 5)) for _ in range(m)]
        self.mode = mode
        self.vectors = rng.uniform(-2.0, 2.0, size=(n, d))
        self.hidden = HiddenSets([rng.uniform(-2.0, 2.0, size=(d, c)) for c in cards])
        k = num_classes or int(rng.integers(2, 4))
        if hidden_fc:
            self.head = ClassifierHead(
                weights=rng.uniform(-1.0, 1.0, size=(k, m)),
                bias=rng.uniform(-0.5, 0.5, size=k),
                hidden_weights=rng.uniform(-1.0, 1.0, size=(m, m)),
                hidden_bias=rng.uniform(-0.5, 0.5, size=m),
            )
        else:
            self.head = ClassifierHead(
                weights=rng.uniform(-1.0, 1.0, size=(k, m)),
                bias=rng.uniform(-0.5, 0.5, size=k),
            )
        self.label = int(rng.integers(0, k))

    def degenerate(self, margin: float = 1e-4) -> bool:
        """True when a score sits near the ReLU kink or a matching is near a tie."""
        for h in self.hidden.matrices:
            scores = self.vectors @ h
            if np.abs(scores).min() < margin:
                return True
            w = np.maximum(scores, 0.0)
            tie = exact_tie_margin(w) if self.mode == "exact" else relaxed_tie_margin(w)
            if tie < margin:
                return True
        return False

    def loss(self) -> float:
        emb = layer_forward(VectorSet(self.vectors), self.hidden, self.mode)
        rec = predict(emb.values, self.head, label=self.label)
        return nll_loss([rec])

    def analytic_grads(self):
        emb = layer_forward(VectorSet(self.vectors), self.hidden, self.mode)
        rec = predict(emb.values, self.head, label=self.label)
        hg = backward_head(emb.values, self.head, rec)
        layer_grads = layer_backward(VectorSet(self.vectors), self.hidden, emb, hg.d_input)
        return layer_grads, hg
