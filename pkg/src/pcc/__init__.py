"""Classification by un-centered PCA of class-encoded feature vectors."""
from .datasets import LabeledDataset, load_idx, load_table, prepare_split
from .encoding import EncodingSpec, encode_dataset, encode_instance
from .errors import (
    ChecksumError,
    ConvergenceError,
    DataFormatError,
    DomainError,
    NumericalError,
    PccError,
    PreconditionError,
    ShapeError,
)
from .experiments import InputSetKind, evaluate, grid_search, run_multi
from .linalg import BACKEND
from .model import PccModel, fit, load_model, predict_batch, predict_class, save_model

__all__ = [
    "BACKEND", "ChecksumError", "ConvergenceError", "DataFormatError", "DomainError",
    "EncodingSpec", "InputSetKind", "LabeledDataset", "NumericalError", "PccError",
    "PccModel", "PreconditionError", "ShapeError", "encode_dataset", "encode_instance",
    "evaluate", "fit", "grid_search", "load_idx", "load_model", "load_table",
    "predict_batch", "predict_class", "prepare_split", "run_multi", "save_model",
]
