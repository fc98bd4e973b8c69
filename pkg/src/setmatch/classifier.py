"""Softmax classifier head over set embeddings, with analytic gradients.

The default head is a single affine map followed by softmax. An optional
fully-connected ReLU layer of width m can be inserted between the embedding
and the head (off by default).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InputError


@dataclass
class ClassifierHead:
    """Trainable head: weights (num_classes, m) and bias (num_classes,).

    When `hidden_weights`/`hidden_bias` are set, the input first passes
    through ReLU(hidden_weights @ x + hidden_bias).
    """

    weights: np.ndarray
    bias: np.ndarray
    hidden_weights: Optional[np.ndarray] = None
    hidden_bias: Optional[np.ndarray] = None

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        self.bias = np.ascontiguousarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise InputError(
                f"inconsistent head shapes: weights {self.weights.shape}, bias {self.bias.shape}"
            )
        if (self.hidden_weights is None) != (self.hidden_bias is None):
            raise InputError("hidden_weights and hidden_bias must be set together")
        if self.hidden_weights is not None:
            self.hidden_weights = np.ascontiguousarray(self.hidden_weights, dtype=np.float64)
            self.hidden_bias = np.ascontiguousarray(self.hidden_bias, dtype=np.float64)
            if (
                self.hidden_weights.ndim != 2
                or self.hidden_bias.shape != (self.hidden_weights.shape[0],)
                or self.weights.shape[1] != self.hidden_weights.shape[0]
            ):
                raise InputError("inconsistent hidden-layer shapes in classifier head")

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def input_dim(self) -> int:
        if self.hidden_weights is not None:
            return self.hidden_weights.shape[1]
        return self.weights.shape[1]

    def parameters(self) -> list[np.ndarray]:
        params = []
        if self.hidden_weights is not None:
            params += [self.hidden_weights, self.hidden_bias]
        params += [self.weights, self.bias]
        return params


@dataclass
class PredictionRecord:
    """Logits, probabilities, and (optionally) the true label of one example."""

    logits: np.ndarray
    probs: np.ndarray
    log_probs: np.ndarray
    label: Optional[int] = None
    hidden_act: Optional[np.ndarray] = None  # cached for the backward pass


@dataclass
class HeadGradients:
    d_weights: np.ndarray
    d_bias: np.ndarray
    d_input: np.ndarray
    d_hidden_weights: Optional[np.ndarray] = None
    d_hidden_bias: Optional[np.ndarray] = None


def predict(values: np.ndarray, head: ClassifierHead, label: Optional[int] = None) -> PredictionRecord:
    """Class probabilities softmax(W x + b), computed via a stable log-softmax."""
    x = np.asarray(values, dtype=np.float64)
    if x.shape != (head.input_dim,):
        raise InputError(f"expected embedding of shape ({head.input_dim},), got {x.shape}")
    hidden_act = None
    if head.hidden_weights is not None:
        hidden_act = np.maximum(head.hidden_weights @ x + head.hidden_bias, 0.0)
        x = hidden_act
    logits = head.weights @ x + head.bias
    shifted = logits - logits.max()
    log_probs = shifted - np.log(np.exp(shifted).sum())
    return PredictionRecord(
        logits=logits,
        probs=np.exp(log_probs),
        log_probs=log_probs,
        label=label,
        hidden_act=hidden_act,
    )


def nll_loss(records: Sequence[PredictionRecord]) -> float:
    """Summed negative log likelihood of the true labels over a batch."""
    total = 0.0
    for rec in records:
        if rec.label is None:
            raise InputError("nll_loss requires every record to carry a label")
        if not 0 <= rec.label < len(rec.probs):
            raise InputError(f"label {rec.label} out of range [0, {len(rec.probs)})")
        total -= rec.log_probs[rec.label]
    return float(total)


def backward_head(
    values: np.ndarray, head: ClassifierHead, record: PredictionRecord
) -> HeadGradients:
    """Gradients of the NLL of `record` w.r.t. head parameters and its input.

    dL/dlogits = probs - onehot(label); everything else is the chain rule
    through the affine map(s). `d_input` is the upstream vector handed to
    `layer_backward`.
    """
    if record.label is None:
        raise InputError("backward_head requires a labelled record")
    x = np.asarray(values, dtype=np.float64)
    g = record.probs.copy()
    g[record.label] -= 1.0  # dL/dlogits
    if head.hidden_weights is None:
        d_weights = np.outer(g, x)
        d_input = head.weights.T @ g
        return HeadGradients(d_weights=d_weights, d_bias=g, d_input=d_input)
    act = record.hidden_act
    if act is None:
        raise InputError("record is missing the cached hidden activation")
    d_weights = np.outer(g, act)
    d_act = head.weights.T @ g
    d_pre = d_act * (act > 0.0)
    d_hidden_weights = np.outer(d_pre, x)
    d_input = head.hidden_weights.T @ d_pre
    return HeadGradients(
        d_weights=d_weights,
        d_bias=g,
        d_input=d_input,
        d_hidden_weights=d_hidden_weights,
        d_hidden_bias=d_pre,
    )
