"""Causal DAG learning with a graph autoencoder under a smooth acyclicity constraint."""

from .acyclicity import grad_h, h
from .linalg import hadamard, matexp, matmul
from .metrics import BinaryGraph, GraphMetrics, aggregate, is_dag, shd, threshold, tpr
from .model import ArchConfig, GaeParams, backward, encode, forward, init_params, loss, message_pass
from .optimizer import TrainConfig, TrainingDiverged, TrainReport, adam_step, inner_solve, train
from .synth import (
    Dataset,
    GraphSpec,
    SemSpec,
    random_dag,
    sample_gim,
    sample_linear,
    sample_pnl,
    sample_vector,
)

__version__ = "0.1.0"

__all__ = [
    "ArchConfig",
    "BinaryGraph",
    "Dataset",
    "GaeParams",
    "GraphMetrics",
    "GraphSpec",
    "SemSpec",
    "TrainConfig",
    "TrainReport",
    "TrainingDiverged",
    "adam_step",
    "aggregate",
    "backward",
    "encode",
    "forward",
    "grad_h",
    "h",
    "hadamard",
    "init_params",
    "inner_solve",
    "is_dag",
    "loss",
    "matexp",
    "matmul",
    "message_pass",
    "random_dag",
    "sample_gim",
    "sample_linear",
    "sample_pnl",
    "sample_vector",
    "shd",
    "threshold",
    "tpr",
    "train",
]
