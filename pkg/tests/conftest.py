from __future__ import annotations

import numpy as np
import pytest

from carbonfl.ci_traces import carbon_cost_matrix, load_ci_traces, profiles_for_regions, sample_ci_path


@pytest.fixture(scope="session")
def fixture_traces():
    return load_ci_traces(sample_ci_path())


@pytest.fixture(scope="session")
def fixture_costs(fixture_traces):
    return carbon_cost_matrix(fixture_traces, profiles_for_regions(fixture_traces.regions))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_csv(path, rows, header="timestamp,region,ci_kg_per_kwh"):
    path.write_text(header + "\n" + "".join(f"{ts},{r},{v}\n" for ts, r, v in rows))
    return path


def hour(h: int, day: int = 1) -> str:
    return f"2022-01-{day:02d}T{h:02d}:00:00Z"


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
