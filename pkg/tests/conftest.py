import numpy as np
import pytest

from evtrisk.fixtures import fixture_path, load_fixture
from evtrisk.ingest import ReturnSeries, log_returns


@pytest.fixture(scope="session")
def fixture_csv():
    return fixture_path()


@pytest.fixture(scope="session")
def fixture_returns():
    return log_returns(load_fixture())


def month_starts(first_year, n_months):
    months = np.datetime64(f"{first_year}-01", "M") + np.arange(n_months)
    return months


def returns_with_monthly_maxima(maxima, first_year=1985, days_per_month=20, floor=-50.0):
    """Daily returns whose calendar-month maxima are exactly ``maxima``.

    Every month gets ``days_per_month`` weekday-agnostic days; one day
    carries the maximum, the rest sit far below at ``floor``.
    """
    dates, values = [], []
    for j, (month, peak) in enumerate(zip(month_starts(first_year, len(maxima)), maxima)):
        days = month.astype("datetime64[D]") + np.arange(days_per_month)
        vals = np.full(days_per_month, floor)
        vals[j % days_per_month] = peak
        dates.append(days)
        values.append(vals)
    return ReturnSeries(np.concatenate(dates), np.concatenate(values), "EMBED")


def write_returns_csv(series, path):
    from evtrisk.ingest import write_csv

    write_csv(series, path)
    return path


_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test body calls ``criterion(n, text)``."""
    holder = {}

    def record(number, text):
        holder["key"] = (number, request.node.name)
        holder["text"] = text

    yield record
    if "key" in holder:
        _CRITERIA[holder["key"]] = holder["text"]


def pytest_runtest_makereport(item, call):
    if call.when == "call" and "criterion" in item.fixturenames:
        item.user_properties.append(("passed", call.excinfo is None))


def pytest_terminal_summary(terminalreporter):
    reports = terminalreporter.stats.get("passed", []) + terminalreporter.stats.get("failed", [])
    status = {}
    for rep in reports:
        if rep.when == "call":
            status[rep.nodeid.split("::")[-1]] = rep.outcome
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (number, name), text in sorted(_CRITERIA.items()):
        outcome = "PASS" if status.get(name) == "passed" else "FAIL"
        terminalreporter.write_line(f"[{outcome}] criterion {number}: {text}  ({name})")
