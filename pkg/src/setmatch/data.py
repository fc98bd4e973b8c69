"""Dataset ingestion and synthesis.

File formats (all UTF-8 text):

* Set file: one JSON object per line with fields `id` (string), `label`
  (string; may be omitted for prediction inputs) and `vectors` (list of
  equal-length lists of floats).
* Embedding table: header line `vocab_size dim`, then one `token v1 .. vd`
  row per line (word2vec text format).
* Stopwords: one token per line.
"""

from __future__ import annotations

import json
import string
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DataError, InputError


@dataclass
class LabeledSet:
    """One example: a set of vectors, a class index, and an opaque id."""

    set_id: str
    vectors: np.ndarray
    label: Optional[int]


@dataclass
class Dataset:
    examples: list[LabeledSet]
    dim: int
    num_classes: int
    class_names: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.examples)

    def labels(self) -> list[int]:
        return [ex.label for ex in self.examples]


@dataclass
class EmbeddingTable:
    """token -> vector lookup of a fixed dimension."""

    dim: int
    vectors: dict[str, np.ndarray]

    @property
    def size(self) -> int:
        return len(self.vectors)


def load_set_file(
    path,
    class_names: Optional[Sequence[str]] = None,
    allow_unlabeled: bool = False,
) -> Dataset:
    """Parse a set file into a Dataset.

    With `class_names` given (e.g. from a checkpoint), labels must come from
    that list; otherwise the sorted distinct labels in the file define the
    classes. The vector dimension is inferred from the first example and
    enforced on every later line.
    """
    records = []
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict) or "vectors" not in obj:
                raise DataError(f"{path}: line {lineno}: expected an object with 'vectors'")
            vecs = obj["vectors"]
            if not vecs:
                raise DataError(f"{path}: line {lineno}: empty vector set")
            lengths = {len(v) for v in vecs}
            if len(lengths) != 1:
                raise DataError(
                    f"{path}: line {lineno}: ragged vector lengths {sorted(lengths)}"
                )
            d = lengths.pop()
            if dim is None:
                dim = d
            elif d != dim:
                raise DataError(
                    f"{path}: line {lineno}: dimension {d} != {dim} of first example"
                )
            arr = np.asarray(vecs, dtype=np.float64)
            if not np.isfinite(arr).all():
                raise DataError(f"{path}: line {lineno}: non-finite vector entry")
            label = obj.get("label")
            if label is None and not allow_unlabeled:
                raise DataError(f"{path}: line {lineno}: missing label")
            set_id = str(obj.get("id", f"line-{lineno}"))
            records.append((set_id, arr, None if label is None else str(label)))
    if not records:
        raise DataError(f"{path}: no examples")

    if class_names is None:
        names = sorted({lab for _, _, lab in records if lab is not None})
    else:
        names = list(class_names)
    index = {name: i for i, name in enumerate(names)}
    examples = []
    for set_id, arr, lab in records:
        if lab is None:
            examples.append(LabeledSet(set_id, arr, None))
        else:
            if lab not in index:
                raise DataError(f"{path}: unknown label {lab!r} (classes: {names})")
            examples.append(LabeledSet(set_id, arr, index[lab]))
    return Dataset(examples=examples, dim=dim, num_classes=len(names), class_names=names)


def write_set_file(dataset: Dataset, path) -> None:
    """Inverse of load_set_file, up to float formatting."""
    with open(path, "w", encoding="utf-8") as fh:
        for ex in dataset.examples:
            obj = {"id": ex.set_id, "vectors": ex.vectors.tolist()}
            if ex.label is not None:
                obj["label"] = dataset.class_names[ex.label]
            fh.write(json.dumps(obj) + "\n")


def load_embeddings(path) -> EmbeddingTable:
    """Parse a text embedding table; duplicate tokens keep the first entry."""
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: header must be 'vocab_size dim'")
        try:
            declared, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise DataError(f"{path}: header must be 'vocab_size dim'") from exc
        rows = 0
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if len(values) != dim:
                raise DataError(
                    f"{path}: line {lineno}: expected {dim} values for {token!r}, got {len(values)}"
                )
            rows += 1
            if token in vectors:
                warnings.warn(f"{path}: duplicate token {token!r}, keeping first")
                continue
            vectors[token] = np.array([float(v) for v in values])
    if rows != declared:
        raise DataError(f"{path}: header declares {declared} tokens, file has {rows}")
    return EmbeddingTable(dim=dim, vectors=vectors)


def load_stopwords(path) -> set[str]:
    with open(path, encoding="utf-8") as fh:
        return {line.strip() for line in fh if line.strip()}


_PUNCT_TABLE = str.maketrans({ch: " " for ch in string.punctuation})


def tokenize(text: str) -> list[str]:
    """Lowercase, replace punctuation with spaces, split on whitespace."""
    return text.lower().translate(_PUNCT_TABLE).split()


def vectorize_documents(
    docs: Sequence[tuple[str, str]],
    table: EmbeddingTable,
    stopwords: Optional[set[str]] = None,
    keep_duplicates: bool = False,
) -> Dataset:
    """Turn (text, label) documents into sets of word vectors.

    Stopwords and out-of-vocabulary tokens are dropped. By default each
    distinct term contributes one vector (set semantics) and terms are
    sorted, so the output is independent of token order within a document;
    `keep_duplicates` switches to bag semantics in document order. Documents
    left empty are dropped with a warning.
    """
    if not docs:
        raise InputError("vectorize_documents requires at least one document")
    stop = stopwords or set()
    examples = []
    dropped = []
    labels = sorted({str(label) for _, label in docs})
    index = {name: i for i, name in enumerate(labels)}
    for n, (text, label) in enumerate(docs):
        tokens = [t for t in tokenize(text) if t not in stop and t in table.vectors]
        if not keep_duplicates:
            tokens = sorted(set(tokens))
        doc_id = f"doc-{n:04d}"
        if not tokens:
            dropped.append(doc_id)
            continue
        vecs = np.stack([table.vectors[t] for t in tokens])
        examples.append(LabeledSet(doc_id, vecs, index[str(label)]))
    if dropped:
        warnings.warn(f"dropped {len(dropped)} empty documents: {', '.join(dropped)}")
    if not examples:
        raise DataError("all documents became empty after filtering")
    return Dataset(
        examples=examples, dim=table.dim, num_classes=len(labels), class_names=labels
    )


def synthetic_toy() -> Dataset:
    """Four two-element planar sets that defeat sum/mean pooling.

    Every set has centroid (0, 0) and element sum (0, 0), so architectures
    that aggregate by averaging or summing cannot tell them apart, while
    matching against hidden sets can.
    """
    coords = [
        [(1.0, 0.0), (-1.0, 0.0)],
        [(0.0, 1.0), (0.0, -1.0)],
        [(2.0, 0.0), (-2.0, 0.0)],
        [(0.0, 2.0), (0.0, -2.0)],
    ]
    names = [f"c{i}" for i in range(4)]
    examples = [
        LabeledSet(f"toy-{i}", np.array(pts, dtype=np.float64), i)
        for i, pts in enumerate(coords)
    ]
    return Dataset(examples=examples, dim=2, num_classes=4, class_names=names)


def synthetic_bench(
    n_examples: int,
    set_card: int,
    dim: int,
    num_classes: int = 2,
    seed: int = 0,
    shift: float = 1.0,
) -> Dataset:
    """Gaussian sets with a class-dependent mean shift along one axis."""
    if min(n_examples, set_card, dim, num_classes) < 1:
        raise InputError("synthetic_bench requires all counts >= 1")
    rng = np.random.default_rng(seed)
    names = [f"c{i}" for i in range(num_classes)]
    examples = []
    for n in range(n_examples):
        label = n % num_classes
        vecs = rng.normal(size=(set_card, dim))
        vecs[:, label % dim] += shift
        examples.append(LabeledSet(f"bench-{n:05d}", vecs, label))
    return Dataset(examples=examples, dim=dim, num_classes=num_classes, class_names=names)


def normalize_dataset(dataset: Dataset) -> Dataset:
    """Copy with every vector scaled to unit L2 norm (zero vectors kept)."""
    examples = []
    for ex in dataset.examples:
        norms = np.linalg.norm(ex.vectors, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        examples.append(LabeledSet(ex.set_id, ex.vectors / norms, ex.label))
    return Dataset(
        examples=examples,
        dim=dataset.dim,
        num_classes=dataset.num_classes,
        class_names=list(dataset.class_names),
    )
