from __future__ import annotations

import csv
from datetime import datetime, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carbonfl.ci_traces import (
    SAMPLE_START,
    CarbonCostMatrix,
    CiTraceSet,
    ClientProfile,
    carbon_cost_matrix,
    load_ci_traces,
    make_sample_traces,
    profiles_for_regions,
    sample_ci_path,
    write_ci_traces,
)
from carbonfl.errors import GapError, HorizonTooLong, SchemaError, UnknownRegion

from conftest import hour, write_csv


def test_constant_trace(tmp_path):
    path = write_csv(tmp_path / "fr.csv", [(hour(h), "FR", 0.05) for h in range(24)])
    traces = load_ci_traces(path, hours=24)
    assert traces.regions == ("FR",)
    assert traces.hours == 24
    assert np.all(traces.values == 0.05)
    assert traces.start == datetime(2022, 1, 1, tzinfo=timezone.utc)


def test_rows_in_any_order(tmp_path):
    rows = [(hour(h), r, 0.1 * h + (r == "B")) for h in range(5) for r in ("A", "B")]
    path = write_csv(tmp_path / "x.csv", rows[::-1])
    traces = load_ci_traces(path, regions=["A", "B"])
    assert np.allclose(traces.series("A"), 0.1 * np.arange(5))
    assert np.allclose(traces.series("B"), 0.1 * np.arange(5) + 1)


def test_unknown_region(tmp_path):
    path = write_csv(tmp_path / "fr.csv", [(hour(h), "FR", 0.05) for h in range(3)])
    with pytest.raises(UnknownRegion):
        load_ci_traces(path, regions=["ZZ"])
    with pytest.raises(UnknownRegion):
        load_ci_traces(path).series("ZZ")


def test_forward_fill_gap(tmp_path):
    rows = [(hour(h), "DE", 0.3 + 0.01 * h) for h in range(24) if h != 7]
    path = write_csv(tmp_path / "de.csv", rows)
    with pytest.raises(GapError):
        load_ci_traces(path, hours=24)
    traces = load_ci_traces(path, hours=24, gap_policy="forward_fill")
    assert traces.filled_count == 1
    assert traces.series("DE")[7] == traces.series("DE")[6]


def test_forward_fill_needs_prior_value(tmp_path):
    path = write_csv(tmp_path / "de.csv", [(hour(h), "DE", 0.3) for h in range(1, 5)])
    with pytest.raises(GapError):
        load_ci_traces(path, start=hour(0), hours=5, gap_policy="forward_fill")


@pytest.mark.parametrize(
    "content",
    [
        "time,region,ci\n2022-01-01T00:00:00Z,FR,0.1\n",
        "timestamp,region,ci_kg_per_kwh\n2022-01-01T00:00:00Z,FR\n",
        "timestamp,region,ci_kg_per_kwh\n2022-01-01T00:00:00Z,FR,abc\n",
        "timestamp,region,ci_kg_per_kwh\n2022-01-01T00:00:00Z,FR,-0.1\n",
        "timestamp,region,ci_kg_per_kwh\n2022-01-01T00:00:00Z,FR,nan\n",
        "timestamp,region,ci_kg_per_kwh\n2022-01-01T00:30:00Z,FR,0.1\n",
        "timestamp,region,ci_kg_per_kwh\n2022-01-01T00:00:00Z,FR,0.1\n2022-01-01T00:00:00Z,FR,0.2\n",
        "timestamp,region,ci_kg_per_kwh\n",
    ],
)
def test_schema_errors(tmp_path, content):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(SchemaError):
        load_ci_traces(path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_ci_traces(tmp_path / "absent.csv")


def test_trace_set_invariants():
    with pytest.raises(SchemaError):
        CiTraceSet(("A", "A"), SAMPLE_START, np.zeros((2, 3)))
    with pytest.raises(SchemaError):
        CiTraceSet(("A",), SAMPLE_START, np.array([[0.1, -1.0]]))
    traces = CiTraceSet(("A",), SAMPLE_START, np.array([[0.1, 0.2]]))
    with pytest.raises(ValueError):
        traces.values[0, 0] = 5.0


def test_cost_matrix_examples():
    unit = CiTraceSet(("X",), SAMPLE_START, np.full((1, 4), 0.05))
    m = carbon_cost_matrix(unit, [ClientProfile(0, "X", 1.0)])
    assert np.all(m.costs == 0.05) and m.g_max == 0.05

    two = CiTraceSet(("X",), SAMPLE_START, np.array([[0.1, 0.3]]))
    m = carbon_cost_matrix(two, [ClientProfile(0, "X", 2.0)])
    assert np.allclose(m.costs, [[0.2, 0.6]]) and m.g_max == pytest.approx(0.6)


def test_cost_matrix_errors():
    traces = CiTraceSet(("X",), SAMPLE_START, np.full((1, 4), 0.05))
    with pytest.raises(HorizonTooLong):
        carbon_cost_matrix(traces, [ClientProfile(0, "X", 1.0)], horizon=5)
    with pytest.raises(UnknownRegion):
        carbon_cost_matrix(traces, [ClientProfile(0, "Y", 1.0)])
    with pytest.raises(ValueError):
        ClientProfile(0, "X", 0.0)


def test_fixture_matrix_matches_independent_product(fixture_costs):
    # recompute straight from the CSV text
    ci = {}
    with sample_ci_path().open() as fh:
        for row in csv.DictReader(fh):
            ci.setdefault(row["region"], {})[row["timestamp"]] = float(row["ci_kg_per_kwh"])
    regions = list(ci)
    assert len(regions) == 7
    expected = np.array([[1.0 * ci[r][k] for k in sorted(ci[r])] for r in regions])
    assert fixture_costs.costs.shape == (7, 336)
    assert np.array_equal(fixture_costs.costs, expected)
    assert fixture_costs.g_max == expected.max()


def test_fixture_regenerates_byte_identically(tmp_path):
    write_ci_traces(make_sample_traces(), tmp_path / "regen.csv")
    assert (tmp_path / "regen.csv").read_bytes() == sample_ci_path().read_bytes()


def test_power_linearity(fixture_traces):
    one = carbon_cost_matrix(fixture_traces, profiles_for_regions(fixture_traces.regions, 1.5))
    two = carbon_cost_matrix(fixture_traces, profiles_for_regions(fixture_traces.regions, 3.0))
    assert np.array_equal(2 * one.costs, two.costs)


def test_window(fixture_costs, fixture_traces):
    w = fixture_costs.window(10, 20)
    assert np.array_equal(w.costs, fixture_costs.costs[:, 10:30])
    assert fixture_traces.window(5, 3).start == fixture_traces.start.replace(hour=5)
    with pytest.raises(HorizonTooLong):
        fixture_costs.window(330, 10)


def test_g_max_consistency(fixture_costs):
    assert (fixture_costs.costs <= fixture_costs.g_max).all()
    assert (fixture_costs.costs == fixture_costs.g_max).any()
    with pytest.raises(Exception):
        CarbonCostMatrix(np.array([[0.1, -0.2]]), (ClientProfile(0, "X", 1.0),))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.lists(st.integers(0, 2_000_000), min_size=1, max_size=30).map(lambda v: [x / 1e6 for x in v]),
        min_size=1,
        max_size=4,
    )
)
def test_round_trip_property(tmp_path_factory, rows):
    width = min(len(r) for r in rows)
    values = np.array([r[:width] for r in rows])
    traces = CiTraceSet(tuple(f"R{i}" for i in range(len(rows))), SAMPLE_START, values)
    path = tmp_path_factory.mktemp("rt") / "t.csv"
    write_ci_traces(traces, path)
    back = load_ci_traces(path)
    assert back.regions == traces.regions
    assert np.array_equal(back.values, traces.values)
