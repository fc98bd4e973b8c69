"""Learning fixed-size representations of vector sets via bipartite matching.

An input set of d-dimensional vectors is compared against m trainable
"hidden sets"; the m matching objectives form a permutation-invariant
embedding that feeds a softmax classifier. The matching can be solved
exactly (Hungarian method) or through a cheaper relaxation whose objective
upper-bounds the exact one.
"""

from .assignment import (
    MATCHING_BACKEND,
    Assignment,
    brute_force_oracle,
    pad_to_square,
    solve_exact,
    solve_relaxed,
)
from .classifier import ClassifierHead, PredictionRecord, backward_head, nll_loss, predict
from .data import (
    Dataset,
    EmbeddingTable,
    LabeledSet,
    load_embeddings,
    load_set_file,
    synthetic_bench,
    synthetic_toy,
    vectorize_documents,
    write_set_file,
)
from .errors import DataError, InputError, NumericError
from .layer import HiddenSets, SetEmbedding, VectorSet, layer_backward, layer_forward, score_matrix
from .training import (
    Checkpoint,
    TrainConfig,
    evaluate,
    init_params,
    load_checkpoint,
    save_checkpoint,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "MATCHING_BACKEND",
    "Assignment",
    "brute_force_oracle",
    "pad_to_square",
    "solve_exact",
    "solve_relaxed",
    "ClassifierHead",
    "PredictionRecord",
    "backward_head",
    "nll_loss",
    "predict",
    "Dataset",
    "EmbeddingTable",
    "LabeledSet",
    "load_embeddings",
    "load_set_file",
    "synthetic_bench",
    "synthetic_toy",
    "vectorize_documents",
    "write_set_file",
    "DataError",
    "InputError",
    "NumericError",
    "HiddenSets",
    "SetEmbedding",
    "VectorSet",
    "layer_backward",
    "layer_forward",
    "score_matrix",
    "Checkpoint",
    "TrainConfig",
    "evaluate",
    "init_params",
    "load_checkpoint",
    "save_checkpoint",
    "train",
    "__version__",
]
