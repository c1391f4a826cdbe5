"""Quaternion and octonion knowledge graph embeddings."""

from hyperkge._core import (
    DataError,
    Dataset,
    EmbeddingTable,
    NumericError,
    OctonionVector,
    QuaternionVector,
    RankReport,
    TrainResult,
    Triple,
    UsageError,
    add_reciprocals,
    conjugate,
    evaluate,
    hamilton_product,
    inner,
    load_checkpoint,
    load_dir,
    norm,
    normalize,
    octonion_product,
    parameter_count,
    save_checkpoint,
    train,
)

__all__ = [
    "DataError",
    "Dataset",
    "EmbeddingTable",
    "NumericError",
    "OctonionVector",
    "QuaternionVector",
    "RankReport",
    "TrainResult",
    "Triple",
    "UsageError",
    "add_reciprocals",
    "conjugate",
    "evaluate",
    "hamilton_product",
    "inner",
    "load_checkpoint",
    "load_dir",
    "norm",
    "normalize",
    "octonion_product",
    "parameter_count",
    "save_checkpoint",
    "train",
]
