"""Alpha-fair carbon-budgeted client/slot allocation, with an optional fine-tuning window.

The allocation maximises ``sum_c (sum_t (g_max - g[c, t]) * a[c, t]) ** alpha``
subject to ``sum g[c, t] * a[c, t] <= budget``. When fine-tuning is enabled, a
block of ``t_ft`` all-ones columns ending at column ``T + s`` is forced and every
later column is zero.

Column indices are 0-based; the fine-tuning end ``s`` is a count (``1..t_sl``),
so the window occupies columns ``T + s - t_ft .. T + s - 1``.
"""

from __future__ import annotations

import csv
import heapq
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .ci_traces import CarbonCostMatrix
from .errors import (
    BadAlpha,
    BadConfig,
    DimensionMismatch,
    InstanceTooLarge,
    NoFeasiblePlacement,
    SchemaError,
)

BUDGET_TOL = 1e-9
# admission slack kept below BUDGET_TOL so re-summing in another order stays feasible
_ADMIT_TOL = 5e-10
_TIE_RTOL = 1e-10
MAX_EXACT_VARS = 24
SOLVERS = ("exact", "greedy", "auto")


@dataclass(frozen=True)
class ScheduleConfig:
    T: int
    t_sl: int = 0
    t_ft: int = 0
    alpha: float = 1.0
    budget_kg: float = 0.0
    solver: str = "auto"
    partial_enumeration: bool = False

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise BadAlpha(f"alpha must be in (0, 1], got {self.alpha}")
        if self.T < 0 or self.t_sl < 0 or self.t_ft < 0:
            raise BadConfig("T, t_sl and t_ft must be non-negative")
        if self.budget_kg < 0 or not math.isfinite(self.budget_kg):
            raise BadConfig(f"budget_kg must be finite and >= 0, got {self.budget_kg}")
        if self.solver not in SOLVERS:
            raise BadConfig(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.t_ft > 0 and (self.t_ft > self.T + self.t_sl or self.t_sl < self.t_ft):
            raise BadConfig(f"fine-tuning needs t_ft <= t_sl (got t_ft={self.t_ft}, t_sl={self.t_sl})")

    @property
    def horizon(self) -> int:
        return self.T + self.t_sl

    @classmethod
    def from_dict(cls, doc: dict) -> "ScheduleConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise BadConfig(f"unknown schedule config fields: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_json(cls, path: str | Path) -> "ScheduleConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ScheduleMatrix:
    a: np.ndarray
    total_kg: float
    objective: float
    T: int
    s: int | None = None
    t_ft: int = 0

    def __post_init__(self):
        a = np.array(self.a, dtype=np.int8)
        if a.ndim != 2 or not np.isin(a, (0, 1)).all():
            raise DimensionMismatch("schedule must be a binary (clients x slots) matrix")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def num_clients(self) -> int:
        return self.a.shape[0]

    @property
    def horizon(self) -> int:
        return self.a.shape[1]

    @property
    def end(self) -> int:
        """Number of rounds executed: ``T + s`` with fine-tuning, else the full horizon."""
        return self.horizon if self.s is None else self.T + self.s

    @property
    def finetune_window(self) -> range | None:
        if self.s is None or self.t_ft == 0:
            return None
        return range(self.T + self.s - self.t_ft, self.T + self.s)

    @property
    def pre_finetune_end(self) -> int:
        window = self.finetune_window
        return self.end if window is None else window.start


def _utility(u, alpha: float):
    u = np.asarray(u, dtype=np.float64)
    return np.where(u > 0, np.power(np.maximum(u, 0.0), alpha), 0.0)


def _h(u: float, alpha: float) -> float:
    return u ** alpha if u > 0 else 0.0


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha <= 1:
        raise BadAlpha(f"alpha must be in (0, 1], got {alpha}")


def _cost_array(costs) -> np.ndarray:
    return costs.costs if isinstance(costs, CarbonCostMatrix) else np.asarray(costs, dtype=np.float64)


def objective_value(a, costs, alpha: float, g_max: float | None = None) -> float:
    """Alpha-fair utility of a binary allocation; clients with zero utility contribute 0."""
    _check_alpha(alpha)
    g = _cost_array(costs)
    a = np.asarray(a)
    if a.shape != g.shape:
        raise DimensionMismatch(f"schedule shape {a.shape} != cost shape {g.shape}")
    if g.size == 0:
        return 0.0
    g_max = float(g.max()) if g_max is None else g_max
    per_client = ((g_max - g) * a).sum(axis=1)
    return float(_utility(per_client, alpha).sum())


def round_cost(costs: np.ndarray, a: np.ndarray, t: int) -> float:
    return float(np.dot(costs[:, t], a[:, t].astype(np.float64)))


def cost_trajectory(a, costs) -> np.ndarray:
    """Cumulative kg after each round, summed round by round in column order."""
    g = _cost_array(costs)
    a = np.asarray(a)
    if a.shape[0] != g.shape[0] or a.shape[1] > g.shape[1]:
        raise DimensionMismatch(f"schedule shape {a.shape} incompatible with costs {g.shape}")
    out = np.empty(a.shape[1])
    total = 0.0
    for t in range(a.shape[1]):
        total += round_cost(g, a, t)
        out[t] = total
    return out


def schedule_total(a, costs) -> float:
    traj = cost_trajectory(a, costs)
    return float(traj[-1]) if traj.size else 0.0


# ---------------------------------------------------------------------------
# exact solver
# ---------------------------------------------------------------------------

def _client_segments(w: np.ndarray, g: np.ndarray) -> tuple[float, list[tuple[float, float, float]]]:
    """Free weight (zero-cost items) and ratio-sorted (ratio, weight, cost) segments."""
    free = float(w[(g <= 0) & (w > 0)].sum())
    segs = [(wi / gi, wi, gi) for wi, gi in zip(w.tolist(), g.tolist()) if gi > 0 and wi > 0]
    segs.sort(key=lambda x: -x[0])
    return free, segs


def _relaxation_bound(clients: list[tuple[float, list]], budget: float, alpha: float) -> float:
    """Upper bound on max sum_c h(u0_c + sum w x) s.t. sum g x <= budget, x in [0,1].

    ``clients`` holds ``(u0, segments)``. For alpha = 1 this is the fractional
    knapsack; otherwise the Lagrangian dual is minimised over the multiplier by
    bisection (every multiplier yields a valid bound).
    """
    if alpha == 1.0:
        base = sum(u0 for u0, _ in clients)
        segs = sorted((s for _, ss in clients for s in ss), key=lambda x: -x[0])
        rem = budget
        for r, w, g in segs:
            if g <= rem:
                base += w
                rem -= g
            else:
                base += r * rem
                break
        return base

    def hprime(u: float) -> float:
        return math.inf if u <= 0 else alpha * u ** (alpha - 1.0)

    inv = 1.0 / (1.0 - alpha)

    def dual(lam: float) -> tuple[float, float]:
        value = lam * budget
        spend = 0.0
        for u0, segs in clients:
            u, b = u0, 0.0
            for r, w, g in segs:
                if r * hprime(u) <= lam:
                    break
                u_end = u + w
                if r * hprime(u_end) >= lam:
                    u, b = u_end, b + g
                    continue
                u_star = (alpha * r / lam) ** inv
                b += (u_star - u) / r
                u = u_star
                break
            value += _h(u, alpha) - lam * b
            spend += b
        return value, spend

    lo, hi = -40.0, 40.0  # log10 bracket for the multiplier
    best, spend = dual(10.0 ** lo)
    if spend <= budget:
        return best
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        value, spend = dual(10.0 ** mid)
        best = min(best, value)
        if spend > budget:
            lo = mid
        else:
            hi = mid
    return best


def _solve_exact(W: np.ndarray, G: np.ndarray, budget: float, alpha: float, base: np.ndarray) -> np.ndarray:
    K, n = W.shape
    if K * n > MAX_EXACT_VARS:
        raise InstanceTooLarge(f"{K * n} binary variables exceed the exact-solver cap of {MAX_EXACT_VARS}")
    w = W.ravel().tolist()
    g = G.ravel().tolist()
    N = K * n
    limit = budget + _ADMIT_TOL
    # suffix data per item position: (free weight, segments) of the current client's remaining items
    suffix = [_client_segments(W[i // n, i % n:], G[i // n, i % n:]) if n else (0.0, []) for i in range(N)]
    whole = [_client_segments(W[c], G[c]) for c in range(K)]
    suffix_cost = [float(G[i // n, i % n:].sum()) + float(G[i // n + 1:].sum()) for i in range(N)] + [0.0]
    suffix_weight = [float(W[i // n, i % n:].sum()) for i in range(N)]

    u = [float(x) for x in base]
    chosen = [0] * N
    best = {"obj": -math.inf, "x": None}

    def tol(v: float) -> float:
        return _TIE_RTOL * max(1.0, abs(v))

    def record(obj: float, x: list[int]) -> None:
        if best["x"] is None or obj > best["obj"] + tol(best["obj"]):
            best["obj"], best["x"] = obj, list(x)

    def leaf_value() -> float:
        return sum(_h(x, alpha) for x in u)

    def visit(i: int, spent: float) -> None:
        if i == N:
            record(leaf_value(), chosen)
            return
        c = i // n
        fixed = sum(_h(u[j], alpha) for j in range(c))
        # every remaining item fits: taking all is optimal and lexicographically preferred
        if spent + suffix_cost[i] <= limit:
            saved = u[:]
            for j in range(i, N):
                chosen[j] = 1
                u[j // n] += w[j]
            record(leaf_value(), chosen)
            for j in range(i, N):
                chosen[j] = 0
            u[:] = saved
            return
        if best["x"] is not None:
            trivial = fixed + _h(u[c] + suffix_weight[i], alpha)
            trivial += sum(_h(u[j] + float(W[j].sum()), alpha) for j in range(c + 1, K))
            if trivial <= best["obj"] + 0.5 * tol(best["obj"]):
                return
            free, segs = suffix[i]
            rel = [(u[c] + free, segs)] + [(u[j] + whole[j][0], whole[j][1]) for j in range(c + 1, K)]
            bound = fixed + _relaxation_bound(rel, limit - spent, alpha)
            if bound <= best["obj"] + 0.5 * tol(best["obj"]):
                return
        if spent + g[i] <= limit:
            chosen[i] = 1
            u[c] += w[i]
            visit(i + 1, spent + g[i])
            u[c] -= w[i]
            chosen[i] = 0
        visit(i + 1, spent)

    visit(0, 0.0)
    return np.array(best["x"], dtype=np.int8).reshape(K, n)


# ---------------------------------------------------------------------------
# greedy solver
# ---------------------------------------------------------------------------

def _gain(u: float, w: float, alpha: float) -> float:
    if alpha == 1.0:
        return w
    return _h(u + w, alpha) - _h(u, alpha)


def _ratio(gain: float, cost: float) -> float:
    if cost > 0:
        return gain / cost
    return math.inf if gain > 0 else 0.0


def _lazy_greedy(W, G, budget, alpha, base, seed_items=()) -> np.ndarray:
    """Cost-benefit greedy with lazy re-evaluation; ties go to the lowest flat index."""
    K, n = W.shape
    w = W.ravel().tolist()
    g = G.ravel().tolist()
    u = [float(x) for x in base]
    version = [0] * K
    chosen = np.zeros(K * n, dtype=np.int8)
    spent = 0.0
    limit = budget + _ADMIT_TOL
    for i in seed_items:
        chosen[i] = 1
        u[i // n] += w[i]
        spent += g[i]
    heap = [(-_ratio(_gain(u[i // n], w[i], alpha), g[i]), i, version[i // n])
            for i in range(K * n) if not chosen[i]]
    heapq.heapify(heap)
    while heap:
        neg, i, ver = heapq.heappop(heap)
        if spent + g[i] > limit:
            continue
        c = i // n
        if ver != version[c]:
            heapq.heappush(heap, (-_ratio(_gain(u[c], w[i], alpha), g[i]), i, version[c]))
            continue
        chosen[i] = 1
        u[c] += w[i]
        spent += g[i]
        version[c] += 1
    return chosen.reshape(K, n)


def _residual_objective(x: np.ndarray, W: np.ndarray, base: np.ndarray, alpha: float) -> float:
    return float(_utility(base + (W * x).sum(axis=1), alpha).sum())


def _solve_greedy(W, G, budget, alpha, base, partial_enumeration=False) -> np.ndarray:
    K, n = W.shape
    limit = budget + _ADMIT_TOL
    best = _lazy_greedy(W, G, budget, alpha, base)
    best_obj = _residual_objective(best, W, base, alpha)

    def consider(x):
        nonlocal best, best_obj
        obj = _residual_objective(x, W, base, alpha)
        if obj > best_obj + _TIE_RTOL * max(1.0, abs(best_obj)):
            best, best_obj = x, obj

    # best single item
    gains = [(_gain(float(base[i // n]), float(W.flat[i]), alpha), -i) for i in range(K * n) if G.flat[i] <= limit]
    if gains:
        _, neg_i = max(gains)
        single = np.zeros(K * n, dtype=np.int8)
        single[-neg_i] = 1
        consider(single.reshape(K, n))

    if partial_enumeration:
        items = range(K * n)
        for size in (1, 2):
            for combo in itertools.combinations(items, size):
                if sum(G.flat[i] for i in combo) <= limit:
                    x = np.zeros(K * n, dtype=np.int8)
                    x[list(combo)] = 1
                    consider(x.reshape(K, n))
        for combo in itertools.combinations(items, 3):
            if sum(G.flat[i] for i in combo) <= limit:
                consider(_lazy_greedy(W, G, budget, alpha, base, seed_items=combo))
    return best


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

def _prepare(costs, config: ScheduleConfig) -> np.ndarray:
    g = _cost_array(costs)
    H = config.horizon
    if g.shape[1] < H:
        raise DimensionMismatch(f"cost matrix has {g.shape[1]} slots, config needs T + t_sl = {H}")
    return g[:, :H]


def _dispatch(solver: str, W, G, budget, alpha, base, partial_enumeration=False) -> np.ndarray:
    if solver == "auto":
        solver = "exact" if W.size <= MAX_EXACT_VARS else "greedy"
    if W.shape[1] == 0:
        return np.zeros(W.shape, dtype=np.int8)
    if solver == "exact":
        return _solve_exact(W, G, budget, alpha, base)
    return _solve_greedy(W, G, budget, alpha, base, partial_enumeration)


def _solve_plain(g: np.ndarray, config: ScheduleConfig, solver: str) -> ScheduleMatrix:
    g_max = float(g.max()) if g.size else 0.0
    W = g_max - g
    a = _dispatch(solver, W, g, config.budget_kg, config.alpha, np.zeros(g.shape[0]), config.partial_enumeration)
    return ScheduleMatrix(a, schedule_total(a, g), objective_value(a, g, config.alpha), T=config.T)


def solve_alpha_fair_exact(costs, config: ScheduleConfig) -> ScheduleMatrix:
    g = _prepare(costs, config)
    if g.size > MAX_EXACT_VARS:
        raise InstanceTooLarge(f"{g.size} binary variables exceed the exact-solver cap of {MAX_EXACT_VARS}")
    return _solve_plain(g, config, "exact")


def solve_alpha_fair_greedy(costs, config: ScheduleConfig) -> ScheduleMatrix:
    return _solve_plain(_prepare(costs, config), config, "greedy")


def solve_alpha_fair(costs, config: ScheduleConfig) -> ScheduleMatrix:
    """Plain allocation over ``T + t_sl`` slots with the configured solver."""
    return _solve_plain(_prepare(costs, config), config, config.solver)


def solve_with_finetuning(costs, config: ScheduleConfig, s_values: Iterable[int] | None = None) -> ScheduleMatrix:
    """Jointly choose the allocation and the fine-tuning end ``s``.

    ``s_values`` restricts the placements tried (default ``1..t_sl``); pass a
    single value to pin the window, as in a fixed-``s`` sweep cell.
    """
    g = _prepare(costs, config)
    if config.t_ft == 0:
        return _solve_plain(g, config, config.solver)
    K = g.shape[0]
    g_max = float(g.max())
    W = g_max - g
    T, t_ft = config.T, config.t_ft
    candidates = range(1, config.t_sl + 1) if s_values is None else sorted(set(int(s) for s in s_values))
    best: ScheduleMatrix | None = None
    for s in candidates:
        if not 1 <= s <= config.t_sl:
            raise BadConfig(f"s={s} outside 1..{config.t_sl}")
        start, end = T + s - t_ft, T + s
        if start < 0:
            continue
        window_cost = float(g[:, start:end].sum())
        if window_cost > config.budget_kg + _ADMIT_TOL:
            continue
        base = W[:, start:end].sum(axis=1)
        residual = _dispatch(config.solver, W[:, :start], g[:, :start], config.budget_kg - window_cost,
                             config.alpha, base, config.partial_enumeration)
        a = np.zeros(g.shape, dtype=np.int8)
        a[:, :start] = residual
        a[:, start:end] = 1
        obj = objective_value(a, g, config.alpha)
        if best is None or obj > best.objective + _TIE_RTOL * max(1.0, abs(best.objective)):
            best = ScheduleMatrix(a, schedule_total(a, g), obj, T=T, s=s, t_ft=t_ft)
    if best is None:
        raise NoFeasiblePlacement(
            f"no fine-tuning window of {t_ft} rounds for K={K} clients fits budget {config.budget_kg} kg"
        )
    return best


def solve(costs, config: ScheduleConfig, s_values: Iterable[int] | None = None) -> ScheduleMatrix:
    if config.t_ft > 0:
        return solve_with_finetuning(costs, config, s_values)
    return solve_alpha_fair(costs, config)


def full_budget_reference(costs, T: int) -> float:
    """Carbon cost of selecting every client in each of the first ``T`` rounds."""
    g = _cost_array(costs)
    if T > g.shape[1]:
        raise DimensionMismatch(f"T={T} exceeds cost horizon {g.shape[1]}")
    return schedule_total(np.ones((g.shape[0], T), dtype=np.int8), g[:, :T])


def no_slack_baseline(costs, budget_kg: float, alpha: float = 1.0, max_rounds: int | None = None) -> ScheduleMatrix:
    """Select every client from round 1 on; stop before the first round that would overshoot."""
    g = _cost_array(costs)
    limit = g.shape[1] if max_rounds is None else min(max_rounds, g.shape[1])
    a = np.zeros(g.shape, dtype=np.int8)
    total = 0.0
    for t in range(limit):
        col = float(g[:, t].sum())
        if total + col > budget_kg + _ADMIT_TOL:
            break
        a[:, t] = 1
        total += col
    return ScheduleMatrix(a, schedule_total(a, g), objective_value(a, g, alpha), T=int(a.any(axis=0).sum()))


def rounds_executed(schedule: ScheduleMatrix) -> int:
    return int(schedule.a.any(axis=0).sum())


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def write_schedule_csv(schedule: ScheduleMatrix, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["client"] + [str(t + 1) for t in range(schedule.horizon)])
        for c in range(schedule.num_clients):
            writer.writerow([str(c)] + [str(int(v)) for v in schedule.a[c]])
        fh.write(f"# s={'none' if schedule.s is None else schedule.s}\n")
        fh.write(f"# T={schedule.T}\n")
        fh.write(f"# t_ft={schedule.t_ft}\n")
        fh.write(f"# total_kg={schedule.total_kg!r}\n")
        fh.write(f"# objective={schedule.objective!r}\n")


def read_schedule_csv(path: str | Path) -> ScheduleMatrix:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"schedule file not found: {path}")
    rows, meta = [], {}
    with path.open(newline="") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value.strip()
            else:
                rows.append(line.split(","))
    if not rows or rows[0][0] != "client":
        raise SchemaError(f"{path}: missing 'client,...' header")
    try:
        a = np.array([[int(v) for v in r[1:]] for r in rows[1:]], dtype=np.int8)
        s = None if meta.get("s", "none") == "none" else int(meta["s"])
        return ScheduleMatrix(
            a,
            total_kg=float(meta["total_kg"]),
            objective=float(meta["objective"]),
            T=int(meta.get("T", a.shape[1])),
            s=s,
            t_ft=int(meta.get("t_ft", 0)),
        )
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"{path}: malformed schedule ({exc})") from None
