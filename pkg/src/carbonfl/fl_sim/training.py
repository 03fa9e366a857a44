"""Local SGD, FedAvg / U-FedAvg aggregation and the scheduled training loop."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..ci_traces import CarbonCostMatrix
from ..errors import (
    EmptyActiveSet,
    EmptyTestSet,
    NonFiniteLoss,
    ScheduleCostMismatch,
    ZeroFrequencyActive,
)
from ..metrics import frequencies
from ..scheduler import ScheduleMatrix, round_cost
from .data import Dataset, FlTask

DEFAULT_ETA = 10 ** -1.5


@dataclass(frozen=True)
class FlConfig:
    tau: int = 5
    eta: float = DEFAULT_ETA
    batch_size: int = 128
    seed: int = 0
    dirichlet_beta: float = 0.5

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        if self.eta < 0 or not math.isfinite(self.eta):
            raise ValueError("eta must be finite and >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.dirichlet_beta <= 0:
            raise ValueError("dirichlet_beta must be > 0")


def local_update(model, theta: np.ndarray, partition: Dataset, config: FlConfig, round_index: int,
                 client_id: int) -> np.ndarray:
    """Run ``tau`` minibatch SGD steps from ``theta``; return ``theta - theta_after``.

    Minibatches are drawn without replacement from a per-epoch permutation,
    reshuffled when exhausted; the stream is keyed on (seed, round, client).
    """
    rng = np.random.default_rng([config.seed, round_index, client_id])
    n = len(partition)
    batch = min(config.batch_size, n)
    local = theta.copy()
    order = rng.permutation(n)
    pos = 0
    for _ in range(config.tau):
        if pos >= n:
            order, pos = rng.permutation(n), 0
        idx = order[pos:pos + batch]
        pos += batch
        loss, grad = model.loss_and_grad(local, partition.X[idx], partition.y[idx])
        if not math.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise NonFiniteLoss(f"client {client_id}, round {round_index}: loss={loss}")
        local = local - config.eta * grad
    return theta - local


def fedavg_aggregate(deltas: Sequence[np.ndarray]) -> np.ndarray:
    if len(deltas) == 0:
        raise EmptyActiveSet("no active clients to aggregate")
    return np.sum(np.stack(deltas), axis=0) / len(deltas)


def ufedavg_aggregate(deltas: Sequence[np.ndarray], active: Sequence[int], pi, K: int) -> np.ndarray:
    """``(1/K) * sum_{c in active} delta_c / pi_c``; inactive clients contribute nothing."""
    pi = np.asarray(pi, dtype=np.float64)
    if len(deltas) != len(active):
        raise ValueError("one delta per active client is required")
    if len(deltas) == 0:
        raise EmptyActiveSet("no active clients to aggregate")
    weights = pi[list(active)]
    if np.any(weights <= 0):
        bad = [int(c) for c, p in zip(active, weights) if p <= 0]
        raise ZeroFrequencyActive(f"active clients {bad} have zero recorded selection frequency")
    return np.sum(np.stack(deltas) / weights[:, None], axis=0) / K


def evaluate(model, theta: np.ndarray, test: Dataset) -> tuple[float, float]:
    """Accuracy (argmax match) and mean cross-entropy on ``test``."""
    if len(test) == 0:
        raise EmptyTestSet("test set is empty")
    logits = model.logits(theta, test.X)
    acc = float(np.mean(np.argmax(logits, axis=1) == test.y))
    return acc, model.loss(theta, test.X, test.y)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    active_count: int
    cum_kg: float
    test_acc: float
    test_loss: float
    update_norm: float


@dataclass
class TrainingRun:
    records: list[RoundRecord] = field(default_factory=list)
    theta: np.ndarray | None = None
    pi: np.ndarray | None = None

    @property
    def total_kg(self) -> float:
        return self.records[-1].cum_kg if self.records else 0.0

    @property
    def final_accuracy(self) -> float:
        return self.records[-1].test_acc if self.records else float("nan")

    def write_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("round", "active_count", "cum_kg", "test_acc", "test_loss"))
            for r in self.records:
                writer.writerow((r.round, r.active_count, repr(r.cum_kg), repr(r.test_acc), repr(r.test_loss)))


def run_training(task: FlTask, schedule: ScheduleMatrix, costs, config: FlConfig,
                 aggregation: str = "unbiased", theta0: np.ndarray | None = None) -> TrainingRun:
    """Execute a precomputed schedule for rounds ``1..T+s`` (or the whole horizon).

    ``aggregation="unbiased"`` applies U-FedAvg with frequencies taken from the
    pre-fine-tuning rounds and plain FedAvg inside the fine-tuning window;
    ``"fedavg"`` uses FedAvg in every round (the no-slack baseline).
    Rounds with nobody selected leave the model unchanged.
    """
    if aggregation not in ("unbiased", "fedavg"):
        raise ValueError(f"unknown aggregation {aggregation!r}")
    g = costs.costs if isinstance(costs, CarbonCostMatrix) else np.asarray(costs, dtype=np.float64)
    a = schedule.a
    K = task.num_clients
    if a.shape[0] != K or g.shape[0] != K or g.shape[1] < schedule.end:
        raise ScheduleCostMismatch(
            f"schedule {a.shape}, costs {g.shape} and task with {K} clients are inconsistent"
        )
    model = task.model
    theta = model.init(np.random.default_rng(config.seed)) if theta0 is None else np.array(theta0, dtype=np.float64)
    pre_end = schedule.pre_finetune_end
    pi = frequencies(a[:, :pre_end]) if pre_end > 0 else np.ones(K)
    window = schedule.finetune_window or range(0)

    run = TrainingRun(pi=pi)
    cum = 0.0
    for t in range(schedule.end):
        active = [int(c) for c in np.flatnonzero(a[:, t])]
        cum += round_cost(g, a, t)
        norm = 0.0
        if active:
            deltas = [local_update(model, theta, task.partitions[c], config, t, c) for c in active]
            if t in window or aggregation == "fedavg":
                delta = fedavg_aggregate(deltas)
            else:
                delta = ufedavg_aggregate(deltas, active, pi, K)
            theta = theta - delta
            if not np.all(np.isfinite(theta)):
                raise NonFiniteLoss(f"round {t}: model parameters diverged")
            norm = float(np.linalg.norm(delta))
        acc, loss = evaluate(model, theta, task.test)
        if not math.isfinite(loss):
            raise NonFiniteLoss(f"round {t}: test loss is {loss}")
        run.records.append(RoundRecord(t + 1, len(active), cum, acc, loss, norm))
    run.theta = theta
    return run
