"""Federated training simulator driven by a precomputed client/slot schedule."""

from .data import Dataset, FlTask, build_task, dirichlet_partition, load_mnist, make_synthetic_task, read_idx, write_idx
from .models import MLP1, SoftmaxRegression, make_model
from .training import (
    FlConfig,
    RoundRecord,
    TrainingRun,
    evaluate,
    fedavg_aggregate,
    local_update,
    run_training,
    ufedavg_aggregate,
)

__all__ = [
    "Dataset", "FlTask", "build_task", "dirichlet_partition", "load_mnist", "make_synthetic_task",
    "read_idx", "write_idx", "MLP1", "SoftmaxRegression", "make_model", "FlConfig", "RoundRecord",
    "TrainingRun", "evaluate", "fedavg_aggregate", "local_update", "run_training", "ufedavg_aggregate",
]
