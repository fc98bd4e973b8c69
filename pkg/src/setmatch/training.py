"""Training loop, optimizers, evaluation, and checkpoint (de)serialization.

Runs are fully deterministic for a fixed (dataset, config): one seeded
generator drives parameter initialization, the validation split, and the
per-epoch shuffles, in that order, and gradient accumulation within a batch
is sequential.
"""

from __future__ import annotations

import copy
import json
import time
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence, Union

import numpy as np

from .classifier import ClassifierHead, backward_head, nll_loss, predict
from .data import Dataset, normalize_dataset
from .errors import DataError, InputError, NumericError
from .layer import HiddenSets, VectorSet, layer_backward, layer_forward

FORMAT_VERSION = 1


@dataclass
class TrainConfig:
    m: int = 30
    cardinality: Union[int, Sequence[int]] = 20
    mode: str = "exact"
    learning_rate: float = 0.1
    epochs: int = 200
    batch_size: int = 32
    optimizer: str = "adam"
    seed: int = 0
    val_fraction: float = 0.1
    patience: int = 20
    normalize_inputs: bool = False
    hidden_fc: bool = False

    def __post_init__(self):
        if self.m < 1:
            raise InputError("m must be >= 1")
        cards = self.resolved_cardinalities()
        if min(cards) < 1:
            raise InputError("hidden-set cardinalities must be >= 1")
        if self.learning_rate < 0:
            raise InputError("learning_rate must be >= 0")
        if self.epochs < 1:
            raise InputError("epochs must be >= 1")
        if self.batch_size < 1:
            raise InputError("batch_size must be >= 1")
        if not 0.0 <= self.val_fraction < 1.0:
            raise InputError("val_fraction must be in [0, 1)")
        if self.patience < 1:
            raise InputError("patience must be >= 1")
        if self.mode not in ("exact", "relaxed"):
            raise InputError(f"mode must be 'exact' or 'relaxed', got {self.mode!r}")
        if self.optimizer not in ("adam", "sgd"):
            raise InputError(f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}")

    def resolved_cardinalities(self) -> list[int]:
        if isinstance(self.cardinality, int):
            return [self.cardinality] * self.m
        cards = list(self.cardinality)
        if len(cards) != self.m:
            raise InputError(f"got {len(cards)} cardinalities for m={self.m}")
        return cards


@dataclass
class EpochMetrics:
    epoch: int
    train_loss: float
    train_acc: float
    val_acc: Optional[float]
    seconds: float


@dataclass
class Checkpoint:
    config: dict
    hidden: HiddenSets
    head: ClassifierHead
    epoch: int
    best_val_accuracy: Optional[float]
    dim: int
    num_classes: int
    class_names: list[str]
    format_version: int = FORMAT_VERSION


def init_params(
    config: TrainConfig, dim: int, num_classes: int, rng: np.random.Generator
) -> tuple[HiddenSets, ClassifierHead]:
    """Hidden-set entries ~ N(0, 1/sqrt(dim)); head weights and bias zero.

    The optional fully-connected layer (width m) cannot start at zero or no
    gradient would reach the hidden sets, so it gets N(0, 1/sqrt(m)) weights
    and a small positive bias (keeps its ReLU units initially active).
    """
    cards = config.resolved_cardinalities()
    scale = 1.0 / np.sqrt(dim)
    hidden = HiddenSets([rng.normal(0.0, scale, size=(dim, c)) for c in cards])
    if config.hidden_fc:
        fc_scale = 1.0 / np.sqrt(config.m)
        head = ClassifierHead(
            weights=np.zeros((num_classes, config.m)),
            bias=np.zeros(num_classes),
            hidden_weights=rng.normal(0.0, fc_scale, size=(config.m, config.m)),
            hidden_bias=np.full(config.m, 0.1),
        )
    else:
        head = ClassifierHead(
            weights=np.zeros((num_classes, config.m)), bias=np.zeros(num_classes)
        )
    return hidden, head


class AdamOptimizer:
    """Adam with bias correction (beta1=0.9, beta2=0.999, eps=1e-8)."""

    def __init__(self, params: list[np.ndarray], lr: float):
        self.lr = lr
        self.beta1 = 0.9
        self.beta2 = 0.999
        self.eps = 1e-8
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        b1t = 1.0 - self.beta1**self.t
        b2t = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


class SgdOptimizer:
    def __init__(self, params: list[np.ndarray], lr: float):
        self.lr = lr

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        for p, g in zip(params, grads):
            p -= self.lr * g


def _check_dataset(dataset: Dataset) -> None:
    if not dataset.examples:
        raise DataError("dataset is empty")
    for ex in dataset.examples:
        if ex.vectors.shape[1] != dataset.dim:
            raise DataError(f"example {ex.set_id} has dimension {ex.vectors.shape[1]}, expected {dataset.dim}")
        if ex.label is not None and not 0 <= ex.label < dataset.num_classes:
            raise DataError(f"example {ex.set_id} has label {ex.label} outside [0, {dataset.num_classes})")


def _prepare_examples(dataset: Dataset, normalize: bool) -> list[tuple[VectorSet, Optional[int]]]:
    """Validate once and wrap each example's vectors; reused across epochs."""
    work = normalize_dataset(dataset) if normalize else dataset
    return [(VectorSet(ex.vectors), ex.label) for ex in work.examples]


def _accumulate_gradients(vs, label, hidden, head, mode, grads) -> tuple[float, bool]:
    """Forward/backward one example, adding its gradients into `grads`.

    Returns (nll, hit). `grads` mirrors hidden.matrices + head.parameters().
    """
    emb = layer_forward(vs, hidden, mode)
    rec = predict(emb.values, head, label=label)
    hg = backward_head(emb.values, head, rec)
    layer_grads = layer_backward(vs, hidden, emb, hg.d_input)
    for k in range(hidden.m):
        grads[k] += layer_grads[k]
    tail = grads[hidden.m :]
    if head.hidden_weights is not None:
        tail[0] += hg.d_hidden_weights
        tail[1] += hg.d_hidden_bias
        tail[2] += hg.d_weights
        tail[3] += hg.d_bias
    else:
        tail[0] += hg.d_weights
        tail[1] += hg.d_bias
    hit = int(np.argmax(rec.probs)) == label
    return float(-rec.log_probs[label]), hit


def _accuracy_and_loss(prepared, hidden, head, mode) -> tuple[float, float]:
    correct = 0
    total_loss = 0.0
    for vs, label in prepared:
        rec = predict(layer_forward(vs, hidden, mode).values, head, label=label)
        if int(np.argmax(rec.probs)) == label:
            correct += 1
        total_loss -= rec.log_probs[label]
    n = len(prepared)
    return correct / n, total_loss / n


def train(dataset: Dataset, config: TrainConfig) -> tuple[Checkpoint, list[EpochMetrics]]:
    """Minibatch training with early stopping on the monitored accuracy.

    The monitored split is the seeded validation split when it is nonempty,
    otherwise the training set. Accuracy ties are broken by lower loss so
    that plateaus in the coarse accuracy signal do not trigger a premature
    stop. The returned checkpoint holds the best parameters seen.
    """
    _check_dataset(dataset)
    if any(ex.label is None for ex in dataset.examples):
        raise DataError("training requires every example to be labelled")
    prepared = _prepare_examples(dataset, config.normalize_inputs)

    rng = np.random.default_rng(config.seed)
    hidden, head = init_params(config, dataset.dim, dataset.num_classes, rng)
    params = hidden.matrices + head.parameters()
    opt_cls = AdamOptimizer if config.optimizer == "adam" else SgdOptimizer
    optimizer = opt_cls(params, config.learning_rate)

    n = len(prepared)
    order = rng.permutation(n)
    n_val = int(n * config.val_fraction)
    val_examples = [prepared[i] for i in order[:n_val]]
    train_examples = [prepared[i] for i in order[n_val:]]
    if not train_examples:
        raise DataError("validation split left no training examples")

    best = {"acc": -1.0, "loss": np.inf, "epoch": 0, "hidden": None, "head": None}
    lowest_loss = np.inf
    stall = 0
    metrics: list[EpochMetrics] = []

    for epoch in range(1, config.epochs + 1):
        t0 = time.perf_counter()
        perm = rng.permutation(len(train_examples))
        correct = 0
        total_loss = 0.0
        for start in range(0, len(perm), config.batch_size):
            batch = perm[start : start + config.batch_size]
            grads = [np.zeros_like(p) for p in params]
            for idx in batch:
                vs, label = train_examples[idx]
                loss, hit = _accumulate_gradients(vs, label, hidden, head, config.mode, grads)
                total_loss += loss
                correct += hit
            optimizer.step(params, grads)

        train_loss = total_loss / len(train_examples)
        train_acc = correct / len(train_examples)
        if not np.isfinite(train_loss):
            raise NumericError(f"non-finite training loss at epoch {epoch}")

        if val_examples:
            monitored_acc, monitored_loss = _accuracy_and_loss(
                val_examples, hidden, head, config.mode
            )
            val_acc: Optional[float] = monitored_acc
        else:
            monitored_acc, monitored_loss = train_acc, train_loss
            val_acc = None
        metrics.append(
            EpochMetrics(epoch, train_loss, train_acc, val_acc, time.perf_counter() - t0)
        )

        improved = monitored_acc > best["acc"] or (
            monitored_acc == best["acc"] and monitored_loss < best["loss"] - 1e-12
        )
        if improved:
            best.update(
                acc=monitored_acc,
                loss=monitored_loss,
                epoch=epoch,
                hidden=copy.deepcopy(hidden),
                head=copy.deepcopy(head),
            )
        # keep training while the loss still makes progress, even through
        # accuracy plateaus; `best` only tracks accuracy improvements
        if monitored_loss < lowest_loss - 1e-12:
            lowest_loss = monitored_loss
            stall = 0
        elif improved:
            stall = 0
        else:
            stall += 1
            if stall >= config.patience:
                break

    checkpoint = Checkpoint(
        config=asdict(config),
        hidden=best["hidden"],
        head=best["head"],
        epoch=best["epoch"],
        best_val_accuracy=best["acc"] if val_examples else None,
        dim=dataset.dim,
        num_classes=dataset.num_classes,
        class_names=list(dataset.class_names),
    )
    return checkpoint, metrics


def evaluate(dataset: Dataset, checkpoint: Checkpoint) -> tuple[float, float]:
    """Accuracy and mean NLL of the checkpointed model on a labelled dataset."""
    _check_dataset(dataset)
    if dataset.dim != checkpoint.dim:
        raise DataError(
            f"data dimension {dataset.dim} != checkpoint dimension {checkpoint.dim}"
        )
    if any(ex.label is None for ex in dataset.examples):
        raise DataError("evaluate requires every example to be labelled")
    prepared = _prepare_examples(dataset, bool(checkpoint.config.get("normalize_inputs")))
    mode = checkpoint.config.get("mode", "exact")
    return _accuracy_and_loss(prepared, checkpoint.hidden, checkpoint.head, mode)


def predict_dataset(dataset: Dataset, checkpoint: Checkpoint) -> list[tuple[str, str, float]]:
    """(id, predicted class name, max probability) per example; labels unused."""
    if dataset.dim != checkpoint.dim:
        raise DataError(
            f"data dimension {dataset.dim} != checkpoint dimension {checkpoint.dim}"
        )
    prepared = _prepare_examples(dataset, bool(checkpoint.config.get("normalize_inputs")))
    mode = checkpoint.config.get("mode", "exact")
    out = []
    for (vs, _), ex in zip(prepared, dataset.examples):
        emb = layer_forward(vs, checkpoint.hidden, mode)
        rec = predict(emb.values, checkpoint.head)
        cls = int(np.argmax(rec.probs))
        out.append((ex.set_id, checkpoint.class_names[cls], float(rec.probs[cls])))
    return out


def timed_epoch_seconds(dataset: Dataset, config: TrainConfig, warmup: int = 1) -> float:
    """Wall-clock seconds of one training epoch, after `warmup` untimed epochs.

    No validation pass and no metric bookkeeping: this isolates the
    forward/backward/step cost that the runtime benchmarks compare.
    """
    _check_dataset(dataset)
    rng = np.random.default_rng(config.seed)
    hidden, head = init_params(config, dataset.dim, dataset.num_classes, rng)
    params = hidden.matrices + head.parameters()
    opt_cls = AdamOptimizer if config.optimizer == "adam" else SgdOptimizer
    optimizer = opt_cls(params, config.learning_rate)
    prepared = _prepare_examples(dataset, config.normalize_inputs)

    def one_epoch() -> None:
        perm = rng.permutation(len(prepared))
        for start in range(0, len(perm), config.batch_size):
            grads = [np.zeros_like(p) for p in params]
            for idx in perm[start : start + config.batch_size]:
                vs, label = prepared[idx]
                _accumulate_gradients(vs, label, hidden, head, config.mode, grads)
            optimizer.step(params, grads)

    for _ in range(warmup):
        one_epoch()
    t0 = time.perf_counter()
    one_epoch()
    return time.perf_counter() - t0


def _array_doc(arr: np.ndarray) -> dict:
    return {"shape": list(arr.shape), "values": arr.tolist()}


def _array_from_doc(doc: dict, name: str) -> np.ndarray:
    arr = np.asarray(doc["values"], dtype=np.float64)
    if list(arr.shape) != list(doc["shape"]):
        raise DataError(f"checkpoint field {name}: shape {arr.shape} != declared {doc['shape']}")
    return arr


def save_checkpoint(checkpoint: Checkpoint, path) -> None:
    """Serialize to a self-describing JSON document (exact float64 round-trip)."""
    doc = {
        "format_version": checkpoint.format_version,
        "config": checkpoint.config,
        "dim": checkpoint.dim,
        "num_classes": checkpoint.num_classes,
        "class_names": checkpoint.class_names,
        "epoch": checkpoint.epoch,
        "best_val_accuracy": checkpoint.best_val_accuracy,
        "hidden_sets": [_array_doc(h) for h in checkpoint.hidden.matrices],
        "head": {
            "weights": _array_doc(checkpoint.head.weights),
            "bias": _array_doc(checkpoint.head.bias),
            "hidden_weights": None
            if checkpoint.head.hidden_weights is None
            else _array_doc(checkpoint.head.hidden_weights),
            "hidden_bias": None
            if checkpoint.head.hidden_bias is None
            else _array_doc(checkpoint.head.hidden_bias),
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_checkpoint(path) -> Checkpoint:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not a valid checkpoint document ({exc.msg})") from exc
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported format_version {version!r}")
    head_doc = doc["head"]
    head = ClassifierHead(
        weights=_array_from_doc(head_doc["weights"], "head.weights"),
        bias=_array_from_doc(head_doc["bias"], "head.bias"),
        hidden_weights=None
        if head_doc.get("hidden_weights") is None
        else _array_from_doc(head_doc["hidden_weights"], "head.hidden_weights"),
        hidden_bias=None
        if head_doc.get("hidden_bias") is None
        else _array_from_doc(head_doc["hidden_bias"], "head.hidden_bias"),
    )
    hidden = HiddenSets(
        [_array_from_doc(h, f"hidden_sets[{k}]") for k, h in enumerate(doc["hidden_sets"])]
    )
    return Checkpoint(
        config=doc["config"],
        hidden=hidden,
        head=head,
        epoch=doc["epoch"],
        best_val_accuracy=doc["best_val_accuracy"],
        dim=doc["dim"],
        num_classes=doc["num_classes"],
        class_names=list(doc["class_names"]),
        format_version=version,
    )
