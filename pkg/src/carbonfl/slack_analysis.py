"""Prospective CO2e savings from slack time, per client and with client selection.

Slot and client indices are 0-based. Ties always go to the lowest index.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .ci_traces import CarbonCostMatrix
from .errors import BadN, OffsetOutOfRange, WindowTooShort, ZeroBaseline


@dataclass(frozen=True)
class SlackReport:
    client_id: int | None
    t_sl: int
    chosen_slots: tuple[int, ...]
    baseline_kg: float
    optimized_kg: float

    @property
    def savings_fraction(self) -> float:
        return 1.0 - self.optimized_kg / self.baseline_kg


@dataclass(frozen=True)
class SelectionReport:
    N: int
    fixed_set: tuple[int, ...]
    slack_set: tuple[int, ...]
    fixed_kg: float
    slack_kg: float

    @property
    def savings_fraction(self) -> float:
        return 1.0 - self.slack_kg / self.fixed_kg


def _matrix(costs) -> np.ndarray:
    if isinstance(costs, CarbonCostMatrix):
        return costs.costs
    return np.asarray(costs, dtype=np.float64)


def best_slots_single(row, T: int, t_sl: int) -> tuple[int, ...]:
    """The ``T`` cheapest slots among the first ``T + t_sl`` (sorted)."""
    row = np.asarray(row, dtype=np.float64)
    if T < 1 or t_sl < 0 or T + t_sl > row.shape[0]:
        raise WindowTooShort(f"need 1 <= T and T + t_sl <= {row.shape[0]}, got T={T}, t_sl={t_sl}")
    order = np.argsort(row[:T + t_sl], kind="stable")
    return tuple(sorted(int(i) for i in order[:T]))


def _optimized_sums(mat: np.ndarray, T: int, t_sl: int) -> np.ndarray:
    if T < 1 or t_sl < 0 or T + t_sl > mat.shape[1]:
        raise WindowTooShort(f"need 1 <= T and T + t_sl <= {mat.shape[1]}, got T={T}, t_sl={t_sl}")
    # sort is order-independent for the sum of the T smallest, but keep the summation
    # order identical to best_slots_single (ascending slot index) for bitwise agreement
    window = mat[:, :T + t_sl]
    order = np.sort(np.argsort(window, axis=1, kind="stable")[:, :T], axis=1)
    return np.array([window[c, order[c]].sum() for c in range(mat.shape[0])])


def savings_single(row, T: int, t_sl: int, client_id: int | None = None) -> SlackReport:
    row = np.asarray(row, dtype=np.float64)
    slots = best_slots_single(row, T, t_sl)
    baseline = float(row[:T].sum())
    if baseline <= 0:
        raise ZeroBaseline("first-T carbon cost is zero; savings undefined")
    return SlackReport(client_id, t_sl, slots, baseline, float(row[list(slots)].sum()))


def _select(sums: np.ndarray, N: int) -> tuple[int, ...]:
    if not 1 <= N <= sums.shape[0]:
        raise BadN(f"N must be in [1, {sums.shape[0]}], got {N}")
    return tuple(sorted(int(c) for c in np.argsort(sums, kind="stable")[:N]))


def select_clients_fixed(costs, N: int, T: int) -> tuple[int, ...]:
    mat = _matrix(costs)
    if T < 1 or T > mat.shape[1]:
        raise WindowTooShort(f"T={T} outside horizon {mat.shape[1]}")
    return _select(mat[:, :T].sum(axis=1), N)


def select_clients_slack(costs, N: int, T: int, t_sl: int) -> tuple[int, ...]:
    return _select(_optimized_sums(_matrix(costs), T, t_sl), N)


def savings_multi(costs, N: int, T: int, t_sl: int) -> SelectionReport:
    mat = _matrix(costs)
    return _multi_from_sums(mat[:, :T].sum(axis=1), _optimized_sums(mat, T, t_sl), N)


def _multi_from_sums(fixed_sums: np.ndarray, slack_sums: np.ndarray, N: int) -> SelectionReport:
    fixed_set = _select(fixed_sums, N)
    slack_set = _select(slack_sums, N)
    fixed_kg = float(fixed_sums[list(fixed_set)].sum())
    if fixed_kg <= 0:
        raise ZeroBaseline("selected clients have zero first-T cost; savings undefined")
    return SelectionReport(N, fixed_set, slack_set, fixed_kg, float(slack_sums[list(slack_set)].sum()))


def draw_offsets(horizon: int, T: int, max_t_sl: int, n: int, seed: int) -> list[int]:
    """Training start offsets drawn uniformly without replacement from the valid range."""
    valid = horizon - (T + max_t_sl) + 1
    if valid < 1:
        raise OffsetOutOfRange(f"window T + t_sl = {T + max_t_sl} exceeds horizon {horizon}")
    n = min(n, valid)
    rng = np.random.default_rng(seed)
    return sorted(int(o) for o in rng.choice(valid, size=n, replace=False))


@dataclass(frozen=True)
class SlackSweep:
    """Savings averaged over start offsets; rows follow ``t_sl_values``."""

    T: int
    t_sl_values: tuple[int, ...]
    offsets: tuple[int, ...]
    per_client: np.ndarray  # (len(t_sl_values), K) mean savings_single
    per_n: np.ndarray  # (len(t_sl_values), K) mean savings_multi for N = 1..K

    def client_order(self) -> list[int]:
        """Clients sorted by savings at the largest slack, best first."""
        last = self.per_client[int(np.argmax(self.t_sl_values))]
        return [int(c) for c in np.argsort(-last, kind="stable")]

    def rows(self) -> list[tuple[str, str, float]]:
        out = []
        for i, t_sl in enumerate(self.t_sl_values):
            for c in range(self.per_client.shape[1]):
                out.append(("savings_single", f"client={c};t_sl={t_sl}", float(self.per_client[i, c])))
            for n in range(self.per_n.shape[1]):
                out.append(("savings_multi", f"N={n + 1};t_sl={t_sl}", float(self.per_n[i, n])))
        return out


def sweep_slack(costs, T: int, t_sl_values: Sequence[int], start_offsets: Sequence[int]) -> SlackSweep:
    mat = _matrix(costs)
    if not start_offsets:
        raise OffsetOutOfRange("at least one start offset is required")
    t_sl_values = tuple(int(v) for v in t_sl_values)
    longest = T + max(t_sl_values)
    for off in start_offsets:
        if off < 0 or off + longest > mat.shape[1]:
            raise OffsetOutOfRange(f"offset {off} + window {longest} exceeds horizon {mat.shape[1]}")
    K = mat.shape[0]
    per_client = np.zeros((len(t_sl_values), K))
    per_n = np.zeros((len(t_sl_values), K))
    for off in start_offsets:
        window = mat[:, off:off + longest]
        fixed_sums = window[:, :T].sum(axis=1)
        if np.any(fixed_sums <= 0):
            raise ZeroBaseline(f"offset {off}: a client has zero first-T cost")
        for i, t_sl in enumerate(t_sl_values):
            slack_sums = _optimized_sums(window, T, t_sl)
            per_client[i] += 1.0 - slack_sums / fixed_sums
            for n in range(1, K + 1):
                per_n[i, n - 1] += _multi_from_sums(fixed_sums, slack_sums, n).savings_fraction
    per_client /= len(start_offsets)
    per_n /= len(start_offsets)
    return SlackSweep(T, t_sl_values, tuple(int(o) for o in start_offsets), per_client, per_n)


def write_report(rows, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("metric", "param", "value"))
        for metric, param, value in rows:
            writer.writerow((metric, param, repr(float(value))))
