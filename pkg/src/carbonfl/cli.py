"""Command-line entry point: ``carbonfl {analyze-slack,schedule,simulate,sweep,report}``.

Every run is driven by one JSON config (see ``DEFAULT_CONFIG``); command-line
flags override individual fields and the fully resolved config is written to
``<out-dir>/config.json``. The only environment input is ``CARBONFL_WORKERS``,
the sweep worker-pool size, which never changes the output bytes.

Exit codes: 0 success, 2 bad config/usage, 3 missing file, 4 data errors,
5 scheduling errors, 6 infeasible fine-tuning placement, 7 statistics errors,
8 simulation errors.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .ci_traces import CarbonCostMatrix, carbon_cost_matrix, load_ci_traces, profiles_for_regions, sample_ci_path
from .errors import EXIT_FILE_NOT_FOUND, CarbonFLError, ConfigError, NoFeasiblePlacement
from .fl_sim import FlConfig, build_task, load_mnist, make_synthetic_task, run_training
from .scheduler import (
    ScheduleConfig,
    ScheduleMatrix,
    full_budget_reference,
    no_slack_baseline,
    read_schedule_csv,
    rounds_executed,
    solve,
    write_schedule_csv,
)
from .slack_analysis import draw_offsets, savings_multi, sweep_slack, write_report
from .svg import heatmap, line_chart, write_svg

WORKERS_ENV = "CARBONFL_WORKERS"
INFEASIBLE = "---"

DEFAULT_CONFIG: dict = {
    "ci": {"file": None, "regions": None, "start": None, "offset": 0, "gap_policy": "reject"},
    "clients": {"power_kw": 1.0},
    "schedule": {
        "kind": "carbon_aware",  # or "baseline" (no-slack, full participation)
        "T": 50,
        "t_sl": 50,
        "t_ft": 0,
        "alpha": 1.0,
        "budget_kg": None,
        "budget_pct": 20.0,  # used when budget_kg is null
        "solver": "auto",
        "partial_enumeration": False,
        "s": None,  # pin the fine-tuning end; null lets the solver choose
    },
    "fl": {
        "tau": 5,
        "eta": 10 ** -1.5,
        "batch_size": 128,
        "dirichlet_beta": 0.5,
        "arch": "softmax_regression",
        "data": {
            "kind": "synthetic",
            "num_classes": 10,
            "feature_dim": 20,
            "samples_per_class": 300,
            "separation": 6.0,
            "feature_scale": 0.1,
            "seed": 0,
        },
    },
    "seeds": [0],
    "sweep": {"budgets_pct": [10.0, 20.0], "budgets_kg": [], "alphas": [1.0], "t_ft": [0], "s": []},
    "analysis": {"T": 100, "t_sl_values": [0, 24, 48, 96, 236], "num_offsets": 1, "offset_seed": 0},
}

# sections whose keys are free-form (validated where they are used)
_OPEN_SECTIONS = {("fl", "data")}


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

def _merge(base: dict, override: dict, path: tuple = ()) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base and path not in _OPEN_SECTIONS:
            where = ".".join(path + (key,))
            raise ConfigError(f"unknown config field {where!r}")
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            out[key] = _merge(base[key], value, path + (key,))
        else:
            out[key] = value
    return out


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return _merge(DEFAULT_CONFIG, doc)


_OVERRIDES = {
    # argparse dest -> config path
    "ci_file": ("ci", "file"),
    "solver": ("schedule", "solver"),
    "T": ("schedule", "T"),
    "t_sl": ("schedule", "t_sl"),
    "t_ft": ("schedule", "t_ft"),
    "alpha": ("schedule", "alpha"),
    "budget_kg": ("schedule", "budget_kg"),
    "budget_pct": ("schedule", "budget_pct"),
    "s": ("schedule", "s"),
    "analysis_T": ("analysis", "T"),
    "analysis_t_sl": ("analysis", "t_sl_values"),
}


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = load_config(args.config)
    for dest, (section, key) in _OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            cfg[section][key] = value
    if getattr(args, "budget_pct", None) is not None and getattr(args, "budget_kg", None) is None:
        cfg["schedule"]["budget_kg"] = None
    if getattr(args, "baseline", False):
        cfg["schedule"]["kind"] = "baseline"
    if args.seed is not None:
        cfg["seeds"] = [args.seed]
    if not cfg["seeds"]:
        raise ConfigError("at least one seed is required")
    return cfg


def _write_config(cfg: dict, out_dir: Path) -> None:
    (out_dir / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# shared builders
# ---------------------------------------------------------------------------

def load_costs(cfg: dict) -> CarbonCostMatrix:
    """Carbon costs for every configured region, starting at ``ci.offset``."""
    ci = cfg["ci"]
    path = ci["file"] if ci["file"] is not None else sample_ci_path()
    traces = load_ci_traces(path, regions=ci["regions"], start=ci["start"], gap_policy=ci["gap_policy"])
    offset = int(ci["offset"])
    if offset:
        traces = traces.window(offset, traces.hours - offset)
    profiles = profiles_for_regions(traces.regions, cfg["clients"]["power_kw"])
    return carbon_cost_matrix(traces, profiles)


def _schedule_window(costs: CarbonCostMatrix, sched: dict) -> CarbonCostMatrix:
    return costs.window(0, int(sched["T"]) + int(sched["t_sl"]))


def resolve_budget(costs, sched: dict) -> float:
    if sched["budget_kg"] is not None:
        return float(sched["budget_kg"])
    if sched["budget_pct"] is None:
        raise ConfigError("set schedule.budget_kg or schedule.budget_pct")
    return float(sched["budget_pct"]) / 100.0 * full_budget_reference(costs, int(sched["T"]))


def schedule_config(sched: dict, budget_kg: float) -> ScheduleConfig:
    return ScheduleConfig(
        T=int(sched["T"]), t_sl=int(sched["t_sl"]), t_ft=int(sched["t_ft"]), alpha=float(sched["alpha"]),
        budget_kg=budget_kg, solver=sched["solver"], partial_enumeration=bool(sched["partial_enumeration"]),
    )


def build_schedule(costs: CarbonCostMatrix, sched: dict, budget_kg: float) -> ScheduleMatrix:
    window = _schedule_window(costs, sched)
    if sched["kind"] == "baseline":
        return no_slack_baseline(window, budget_kg, alpha=float(sched["alpha"]), max_rounds=int(sched["T"]))
    if sched["kind"] != "carbon_aware":
        raise ConfigError(f"schedule.kind must be 'carbon_aware' or 'baseline', got {sched['kind']!r}")
    s_values = None if sched["s"] is None else [int(sched["s"])]
    return solve(window, schedule_config(sched, budget_kg), s_values)


def load_datasets(fl: dict):
    data = dict(fl["data"])
    kind = data.pop("kind", "synthetic")
    if kind == "synthetic":
        seed = data.pop("seed", 0)
        try:
            return make_synthetic_task(seed=seed, **data)
        except TypeError as exc:
            raise ConfigError(f"fl.data: {exc}") from None
    if kind == "mnist":
        try:
            train = load_mnist(data["train_images"], data["train_labels"])
            test = load_mnist(data["test_images"], data["test_labels"])
        except KeyError as exc:
            raise ConfigError(f"fl.data: mnist needs {exc.args[0]}") from None
        return train, test
    raise ConfigError(f"fl.data.kind must be 'synthetic' or 'mnist', got {kind!r}")


def fl_config(fl: dict, seed: int) -> FlConfig:
    return FlConfig(tau=int(fl["tau"]), eta=float(fl["eta"]), batch_size=int(fl["batch_size"]), seed=int(seed),
                    dirichlet_beta=float(fl["dirichlet_beta"]))


def train_seeds(cfg: dict, schedule: ScheduleMatrix, costs, out_dir: Path, datasets=None) -> list[float]:
    """Train once per seed; write ``seed=<s>.csv`` and return final accuracies."""
    fl = cfg["fl"]
    train, test = load_datasets(fl) if datasets is None else datasets
    aggregation = "fedavg" if cfg["schedule"]["kind"] == "baseline" else "unbiased"
    accs = []
    for seed in cfg["seeds"]:
        conf = fl_config(fl, seed)
        task = build_task(train, test, schedule.num_clients, conf.dirichlet_beta, int(seed), fl["arch"])
        run = run_training(task, schedule, costs, conf, aggregation=aggregation)
        run.write_csv(out_dir / f"seed={seed}.csv")
        accs.append(run.final_accuracy)
    return accs


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_analyze_slack(args) -> int:
    cfg = resolve_config(args)
    out = _out_dir(args)
    costs = load_costs(cfg)
    an = cfg["analysis"]
    T = int(an["T"])
    t_sl_values = [int(v) for v in (an["t_sl_values"] if isinstance(an["t_sl_values"], list) else [an["t_sl_values"]])]
    if int(an["num_offsets"]) <= 1:
        offsets = [0]
    else:
        offsets = draw_offsets(costs.horizon, T, max(t_sl_values), int(an["num_offsets"]), int(an["offset_seed"]))
    result = sweep_slack(costs, T, t_sl_values, offsets)
    regions = [p.region for p in costs.clients]
    last = int(np.argmax(result.t_sl_values))

    with (out / "slack_per_client.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("client", "region", "T", "t_sl", "savings_fraction"))
        for c, region in enumerate(regions):
            writer.writerow((c, region, T, result.t_sl_values[last], repr(float(result.per_client[last, c]))))
    write_report(result.rows(), out / "slack_report.csv")

    with (out / "slack_heatmap.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["client", "region"] + [f"t_sl={v}" for v in result.t_sl_values])
        for c in result.client_order():
            writer.writerow([c, regions[c]] + [repr(float(v)) for v in result.per_client[:, c]])
    with (out / "selection_savings.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["N"] + [f"t_sl={v}" for v in result.t_sl_values])
        for n in range(result.per_n.shape[1]):
            writer.writerow([n + 1] + [repr(float(v)) for v in result.per_n[:, n]])
    # selected client sets at the largest slack, first offset
    window = costs.costs[:, offsets[0]:offsets[0] + T + max(t_sl_values)]
    with (out / "selection_sets.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("N", "fixed_set", "slack_set", "fixed_kg", "slack_kg"))
        for n in range(1, costs.num_clients + 1):
            rep = savings_multi(window, n, T, max(t_sl_values))
            writer.writerow((n, " ".join(map(str, rep.fixed_set)), " ".join(map(str, rep.slack_set)),
                             repr(rep.fixed_kg), repr(rep.slack_kg)))
    _write_config(cfg, out)
    return 0


def cmd_schedule(args) -> int:
    cfg = resolve_config(args)
    out = _out_dir(args)
    costs = load_costs(cfg)
    window = _schedule_window(costs, cfg["schedule"])
    schedule = build_schedule(costs, cfg["schedule"], resolve_budget(window, cfg["schedule"]))
    write_schedule_csv(schedule, out / "schedule.csv")
    _write_config(cfg, out)
    return 0


def cmd_simulate(args) -> int:
    cfg = resolve_config(args)
    out = _out_dir(args)
    costs = load_costs(cfg)
    window = _schedule_window(costs, cfg["schedule"])
    if args.schedule is not None:
        schedule = read_schedule_csv(args.schedule)
        window = costs.window(0, schedule.horizon)
    else:
        schedule = build_schedule(costs, cfg["schedule"], resolve_budget(window, cfg["schedule"]))
    write_schedule_csv(schedule, out / "schedule.csv")
    train_seeds(cfg, schedule, window, out)
    _write_config(cfg, out)
    return 0


# -- sweep -------------------------------------------------------------------

def _budget_label(kind: str, value: float) -> str:
    return f"{value:g}pct" if kind == "pct" else f"{value:g}kg"


def sweep_cells(cfg: dict, reference_kg: float) -> list[dict]:
    """The grid in deterministic order: per budget, the baseline then (alpha, t_ft, s)."""
    sw = cfg["sweep"]
    budgets = [("pct", float(p)) for p in sw["budgets_pct"]] + [("kg", float(k)) for k in sw["budgets_kg"]]
    if not budgets:
        raise ConfigError("sweep needs at least one budget")
    cells, seen = [], set()
    for kind, value in budgets:
        kg = value / 100.0 * reference_kg if kind == "pct" else value
        label = _budget_label(kind, value)
        pct = value if kind == "pct" else 100.0 * value / reference_kg
        base = {"budget_label": label, "budget_kg": kg, "budget_pct": pct}
        cells.append({**base, "id": f"k={label}_baseline", "kind": "baseline", "alpha": None, "t_ft": 0, "s": None})
        for alpha in sw["alphas"]:
            for t_ft in sw["t_ft"]:
                s_list = [None] if int(t_ft) == 0 or not sw["s"] else [int(s) for s in sw["s"]]
                for s in s_list:
                    s_tag = "none" if int(t_ft) == 0 else ("opt" if s is None else str(s))
                    cell_id = f"k={label}_alpha={float(alpha):g}_tft={int(t_ft)}_s={s_tag}"
                    cells.append({**base, "id": cell_id, "kind": "carbon_aware", "alpha": float(alpha),
                                  "t_ft": int(t_ft), "s": s})
    for cell in cells:
        if cell["id"] in seen:
            raise ConfigError(f"duplicate sweep point {cell['id']!r}")
        seen.add(cell["id"])
    return cells


def run_cell(cell: dict, cfg: dict, costs: CarbonCostMatrix, out_dir: str) -> dict:
    """Solve and train one grid point; all files go to ``<out_dir>/cells/<id>/``."""
    cell_dir = Path(out_dir) / "cells" / cell["id"]
    cell_dir.mkdir(parents=True, exist_ok=True)
    local = copy.deepcopy(cfg)
    sched = local["schedule"]
    sched.update(kind=cell["kind"], budget_kg=cell["budget_kg"], t_ft=cell["t_ft"], s=cell["s"])
    if cell["alpha"] is not None:
        sched["alpha"] = cell["alpha"]
    result = {"status": "ok", "rounds": None, "total_kg": None, "accs": []}
    try:
        schedule = build_schedule(costs, sched, cell["budget_kg"])
        write_schedule_csv(schedule, cell_dir / "schedule.csv")
        result["rounds"] = rounds_executed(schedule)
        result["total_kg"] = schedule.total_kg
        result["accs"] = train_seeds(local, schedule, _schedule_window(costs, sched), cell_dir)
    except NoFeasiblePlacement:
        result["status"] = "infeasible"
    except CarbonFLError as exc:
        result["status"] = f"error:{type(exc).__name__}"
    return result


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def _fmt_float(v) -> str:
    return INFEASIBLE if v is None else repr(float(v))


def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    out = _out_dir(args)
    costs = load_costs(cfg)
    window = _schedule_window(costs, cfg["schedule"])
    reference = full_budget_reference(window, int(cfg["schedule"]["T"]))
    cells = sweep_cells(cfg, reference)
    workers = _workers()
    if workers == 1:
        results = [run_cell(c, cfg, costs, str(out)) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_cell, cells, [cfg] * len(cells), [costs] * len(cells),
                                    [str(out)] * len(cells)))

    with (out / "summary.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("cell", "kind", "budget_kg", "budget_pct", "alpha", "t_ft", "s", "status", "rounds",
                         "total_kg", "mean_acc", "std_acc"))
        for cell, res in zip(cells, results):
            ok = res["status"] == "ok"
            accs = np.array(res["accs"]) if ok else None
            writer.writerow((
                cell["id"], cell["kind"], repr(cell["budget_kg"]), repr(cell["budget_pct"]),
                "" if cell["alpha"] is None else repr(cell["alpha"]), cell["t_ft"],
                "" if cell["s"] is None else cell["s"],
                res["status"] if res["status"] != "infeasible" else INFEASIBLE,
                INFEASIBLE if res["rounds"] is None else res["rounds"],
                _fmt_float(res["total_kg"]),
                _fmt_float(accs.mean()) if ok else INFEASIBLE,
                _fmt_float(accs.std()) if ok else INFEASIBLE,
            ))
    _write_table(cells, results, out / "table.csv")
    (out / "reference.txt").write_text(f"full_budget_reference_kg={reference!r}\n")
    _write_config(cfg, out)
    return 0


def _cell_text(res: dict) -> str:
    if res["status"] == "infeasible":
        return INFEASIBLE
    if res["status"] != "ok":
        return res["status"]
    accs = np.array(res["accs"])
    return f"{accs.mean():.4f} ({accs.std():.4f})"


def _write_table(cells: list[dict], results: list[dict], path: Path) -> None:
    """Wide layout: one row per (budget, alpha, t_ft) with the baseline and one column per s."""
    s_labels: list[str] = []
    rows: dict[tuple, dict] = {}
    baseline: dict[str, tuple] = {}
    for cell, res in zip(cells, results):
        if cell["kind"] == "baseline":
            baseline[cell["budget_label"]] = (res["rounds"], _cell_text(res))
            continue
        s_label = "s=" + cell["id"].rsplit("_s=", 1)[1]
        if s_label not in s_labels:
            s_labels.append(s_label)
        key = (cell["budget_label"], cell["budget_kg"], cell["budget_pct"], cell["alpha"], cell["t_ft"])
        rows.setdefault(key, {})[s_label] = _cell_text(res)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["budget_kg", "budget_pct", "baseline_T", "baseline_acc", "alpha", "t_ft"] + s_labels)
        for (label, kg, pct, alpha, t_ft), by_s in rows.items():
            rounds, acc = baseline[label]
            writer.writerow([f"{kg:.4f}", f"{pct:.2f}", INFEASIBLE if rounds is None else rounds, acc,
                             f"{alpha:g}", t_ft] + [by_s.get(s, "") for s in s_labels])


# -- report ------------------------------------------------------------------

def _read_rows(path: Path) -> list[dict]:
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


def _num(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return float("nan")


def _training_chart(run_dir: Path, title: str) -> str | None:
    series = {}
    for f in sorted(run_dir.glob("seed=*.csv")):
        rows = _read_rows(f)
        series[f.stem] = ([int(r["round"]) for r in rows], [_num(r["test_acc"]) for r in rows])
    if not series:
        return None
    return line_chart(series, title, xlabel="round", ylabel="test accuracy")


def cmd_report(args) -> int:
    src = Path(args.input) if args.input is not None else Path(args.out_dir)
    if not src.is_dir():
        raise FileNotFoundError(f"report input directory not found: {src}")
    out = _out_dir(args)
    written = 0
    chart = _training_chart(src, "test accuracy")
    if chart:
        write_svg(chart, out / "accuracy.svg")
        written += 1
    cells_dir = src / "cells"
    if cells_dir.is_dir():
        for cell in sorted(p for p in cells_dir.iterdir() if p.is_dir()):
            chart = _training_chart(cell, cell.name)
            if chart:
                write_svg(chart, out / f"accuracy_{cell.name}.svg")
                written += 1
    if (src / "slack_heatmap.csv").is_file():
        rows = _read_rows(src / "slack_heatmap.csv")
        cols = [k for k in rows[0] if k.startswith("t_sl=")]
        values = [[_num(r[c]) for c in cols] for r in rows]
        write_svg(heatmap(values, [f"{r['client']} {r['region']}" for r in rows], cols, "slack savings"),
                  out / "slack_heatmap.svg")
        written += 1
    if (src / "summary.csv").is_file():
        rows = [r for r in _read_rows(src / "summary.csv")]
        budgets = list(dict.fromkeys(r["cell"].split("_", 1)[0] for r in rows))
        variants = list(dict.fromkeys(r["cell"].split("_", 1)[1] for r in rows))
        grid = {(r["cell"].split("_", 1)[0], r["cell"].split("_", 1)[1]): _num(r["mean_acc"]) for r in rows}
        values = [[grid.get((b, v), float("nan")) for v in variants] for b in budgets]
        write_svg(heatmap(values, budgets, variants, "mean final accuracy"), out / "sweep_heatmap.svg")
        written += 1
    if written == 0:
        raise FileNotFoundError(f"nothing to render in {src}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ci-file", help="CI trace CSV (default: bundled sample)")
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--seed", type=int, help="single seed; replaces the config seed list")
    p.add_argument("--out-dir", default="carbonfl_out", help="output directory")
    p.add_argument("--solver", choices=("exact", "greedy", "auto"))


def _schedule_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--T", type=int, dest="T")
    p.add_argument("--t-sl", type=int, dest="t_sl")
    p.add_argument("--t-ft", type=int, dest="t_ft")
    p.add_argument("--alpha", type=float)
    p.add_argument("--budget-kg", type=float, dest="budget_kg")
    p.add_argument("--budget-pct", type=float, dest="budget_pct", help="percent of the full-budget reference")
    p.add_argument("--s", type=int, dest="s", help="pin the fine-tuning end time")
    p.add_argument("--baseline", action="store_true", help="no-slack full-participation baseline")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="carbonfl", description="Carbon-aware federated learning scheduling.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze-slack", help="per-client and selection savings from slack time")
    _common(p)
    p.add_argument("--T", type=int, dest="analysis_T")
    p.add_argument("--t-sl", type=int, nargs="+", dest="analysis_t_sl")
    p.set_defaults(func=cmd_analyze_slack)

    p = sub.add_parser("schedule", help="solve one allocation and write schedule.csv")
    _common(p)
    _schedule_flags(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("simulate", help="train on a schedule for every seed")
    _common(p)
    _schedule_flags(p)
    p.add_argument("--schedule", help="existing schedule CSV (skips solving)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help=f"budget x alpha x t_ft x s grid; pool size from ${WORKERS_ENV}")
    _common(p)
    _schedule_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="render SVG charts from an output directory")
    _common(p)
    p.add_argument("--input", help="directory to render (default: --out-dir)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CarbonFLError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: FileNotFound: {exc}", file=sys.stderr)
        return EXIT_FILE_NOT_FOUND


if __name__ == "__main__":
    sys.exit(main())
