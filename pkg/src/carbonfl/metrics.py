"""Selection frequency, heterogeneity and participation-correlation statistics.

Also generates Markov-correlated participation matrices for ablations.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MetricsError, ZeroFrequency
from .scheduler import ScheduleMatrix


@dataclass(frozen=True)
class SelectionStats:
    pi: np.ndarray
    rho_h: float  # nan when some client is never selected
    tv: float
    rounds: int

    def rows(self) -> list[tuple[str, str, float]]:
        out = [("pi", str(c), float(p)) for c, p in enumerate(self.pi)]
        out += [("rho_h", "all", float(self.rho_h)), ("tv", "all", float(self.tv))]
        return out


def _horizon_columns(a, horizon: str) -> np.ndarray:
    if isinstance(a, ScheduleMatrix):
        if horizon == "pre_finetune":
            return a.a[:, :a.pre_finetune_end]
        if horizon == "full":
            return a.a[:, :a.end]
        raise ValueError(f"horizon must be 'pre_finetune' or 'full', got {horizon!r}")
    return np.asarray(a)


def frequencies(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=np.float64).mean(axis=1)


def heterogeneity(pi: np.ndarray) -> float:
    pi = np.asarray(pi, dtype=np.float64)
    if np.any(pi <= 0):
        return float("nan")
    return float(np.mean((1.0 - pi) / pi))


def tv_from_uniform(pi: np.ndarray) -> float:
    pi = np.asarray(pi, dtype=np.float64)
    total = pi.sum()
    if total <= 0:
        raise MetricsError("all selection frequencies are zero; distance undefined")
    return float(0.5 * np.abs(1.0 / pi.size - pi / total).sum())


def selection_stats(a, horizon: str = "pre_finetune", strict: bool = True) -> SelectionStats:
    """Frequencies over the chosen horizon, heterogeneity and TV distance to uniform.

    For a plain array ``horizon`` is ignored and every column counts. With
    ``strict`` a never-selected client raises :class:`ZeroFrequency` carrying
    the partial stats; otherwise ``rho_h`` is nan.
    """
    cols = _horizon_columns(a, horizon)
    if cols.ndim != 2 or cols.shape[1] == 0:
        raise MetricsError("frequency horizon is empty")
    pi = frequencies(cols)
    stats = SelectionStats(pi, heterogeneity(pi), tv_from_uniform(pi), cols.shape[1])
    if strict and np.any(pi == 0):
        zero = [int(c) for c in np.flatnonzero(pi == 0)]
        raise ZeroFrequency(f"clients {zero} never selected; heterogeneity undefined", stats=stats)
    return stats


# ---------------------------------------------------------------------------
# Markov participation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParticipationChain:
    """Per-client two-state chains, optionally coupled through a shared latent chain.

    ``p01`` is the inactive->active switching probability, ``p10`` the reverse.
    Each client is tied to the shared latent chain with probability
    ``coupling`` (drawn once per generated matrix) and then copies the latent
    state in every round; untied clients run their own chain. Tied clients
    are active and inactive together, which is the spatial correlation.
    """

    p01: np.ndarray
    p10: np.ndarray
    coupling: float = 0.0
    latent_p01: float = 0.05
    latent_p10: float = 0.05

    def __post_init__(self):
        p01 = np.atleast_1d(np.asarray(self.p01, dtype=np.float64))
        p10 = np.atleast_1d(np.asarray(self.p10, dtype=np.float64))
        p01, p10 = np.broadcast_arrays(p01, p10)
        for name, p in (("p01", p01), ("p10", p10), ("latent", np.array([self.latent_p01, self.latent_p10]))):
            if np.any((p < 0) | (p > 1)):
                raise ValueError(f"{name} probabilities must lie in [0, 1]")
        if np.any(p01 + p10 == 0) or self.latent_p01 + self.latent_p10 == 0:
            raise ValueError("a chain with p01 = p10 = 0 never mixes")
        if not 0 <= self.coupling <= 1:
            raise ValueError("coupling must lie in [0, 1]")
        object.__setattr__(self, "p01", p01.copy())
        object.__setattr__(self, "p10", p10.copy())

    @classmethod
    def homogeneous(cls, K: int, lambda2: float, activity: float = 0.5, **kw) -> "ParticipationChain":
        """Identical chains with stationary activity ``activity`` and second eigenvalue ``lambda2``."""
        mix = 1.0 - lambda2
        return cls(np.full(K, activity * mix), np.full(K, (1.0 - activity) * mix), **kw)

    @property
    def num_clients(self) -> int:
        return self.p01.size

    @property
    def lambda2(self) -> np.ndarray:
        return 1.0 - self.p01 - self.p10

    @property
    def stationary(self) -> np.ndarray:
        return self.p01 / (self.p01 + self.p10)


def _stream(seed: int, key: int) -> np.random.Generator:
    # counter-based stream per (seed, key): parallel generation matches sequential
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, key])))


def _run_chain(p01: float, p10: float, rounds: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(rounds + 1)
    state = int(u[0] < p01 / (p01 + p10))
    out = np.empty(rounds, dtype=np.int8)
    for t in range(rounds):
        out[t] = state
        if state:
            state = 0 if u[t + 1] < p10 else 1
        else:
            state = 1 if u[t + 1] < p01 else 0
    return out


def mc_generate_schedule(chain: ParticipationChain, rounds: int, seed: int) -> np.ndarray:
    """Sample a (clients x rounds) participation matrix; deterministic in ``seed``."""
    K = chain.num_clients
    a = np.empty((K, rounds), dtype=np.int8)
    latent = None
    if chain.coupling > 0:
        latent = _run_chain(chain.latent_p01, chain.latent_p10, rounds, _stream(seed, K))
    for c in range(K):
        rng = _stream(seed, c)
        tied = latent is not None and rng.random() < chain.coupling
        a[c] = latent if tied else _run_chain(float(chain.p01[c]), float(chain.p10[c]), rounds, rng)
    return a


@dataclass(frozen=True)
class CorrelationEstimate:
    rho_t: float
    rho_ts: float
    per_client: np.ndarray
    degenerate: tuple[int, ...]


def _second_eigen_modulus(P: np.ndarray) -> float:
    if P.shape[0] < 2:
        return 0.0
    mods = np.sort(np.abs(np.linalg.eigvals(P)))[::-1]
    return float(mods[1])


def lumped_transition_matrix(a: np.ndarray) -> np.ndarray:
    """Empirical transition matrix of the active-client count, restricted to states left at least once."""
    counts = np.asarray(a, dtype=np.int64).sum(axis=0)
    K = a.shape[0]
    trans = np.zeros((K + 1, K + 1))
    np.add.at(trans, (counts[:-1], counts[1:]), 1.0)
    visited = np.flatnonzero(trans.sum(axis=1) > 0)
    sub = trans[np.ix_(visited, visited)]
    rows = sub.sum(axis=1, keepdims=True)
    # transitions into states never left (only the final one) are dropped
    return np.divide(sub, rows, out=np.zeros_like(sub), where=rows > 0)


def estimate_correlation(a) -> CorrelationEstimate:
    """Per-client temporal correlation and the lumped temporal-spatial correlation.

    Per client, ``|1 - p01 - p10|`` from add-one-smoothed transition counts;
    constant rows are flagged and counted as 1.
    """
    a = np.asarray(a.a if isinstance(a, ScheduleMatrix) else a, dtype=np.int64)
    if a.ndim != 2 or a.shape[1] < 2:
        raise MetricsError("need at least two rounds to estimate transitions")
    prev, nxt = a[:, :-1], a[:, 1:]
    n01 = ((prev == 0) & (nxt == 1)).sum(axis=1)
    n00 = ((prev == 0) & (nxt == 0)).sum(axis=1)
    n10 = ((prev == 1) & (nxt == 0)).sum(axis=1)
    n11 = ((prev == 1) & (nxt == 1)).sum(axis=1)
    p01 = (n01 + 1) / (n00 + n01 + 2)
    p10 = (n10 + 1) / (n10 + n11 + 2)
    lam = np.abs(1.0 - p01 - p10)
    degenerate = tuple(int(c) for c in np.flatnonzero(a.min(axis=1) == a.max(axis=1)))
    lam[list(degenerate)] = 1.0
    rho_ts = _second_eigen_modulus(lumped_transition_matrix(a))
    return CorrelationEstimate(float(lam.mean()), rho_ts, lam, degenerate)


def write_stats_csv(rows, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("stat", "client", "value"))
        for stat, client, value in rows:
            writer.writerow((stat, client, repr(float(value))))
