from __future__ import annotations

import functools
from pathlib import Path

import pytest

from gstep.milp.build import build
from gstep.model import load_system
from gstep.scenarios import scenarios_for
from gstep.solver.backends import solve

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
TOYS = ("toy1", "toy2", "toy3")
BIG = ("isone", "pjm")
ALL = TOYS + BIG

# desk-scale fixtures are solved with HiGHS on one representative day per
# epoch; the toys use the built-in branch-and-bound on their own scenarios
TIGHT_GAP = 1e-7


def system_path(name: str) -> Path:
    return FIXTURES / name / "system.yaml"


@functools.lru_cache(maxsize=None)
def system(name: str):
    return load_system(system_path(name))


@functools.lru_cache(maxsize=None)
def scenarios(name: str, k: int = 1):
    return scenarios_for(system(name), k=k, seed=0)


def modes(name: str) -> tuple[str, ...]:
    return ("SO", "MO", "MO-OPOI") if system(name).opoi is not None else ("SO", "MO")


@functools.lru_cache(maxsize=None)
def instance(name: str, mode: str = "SO", scc: float | None = None):
    return build(system(name), scenarios(name), mode, scc=scc)


def backend(name: str) -> str:
    return "builtin" if name in TOYS else "highs"


@functools.lru_cache(maxsize=None)
def solved(name: str, mode: str = "SO", gap: float = 1e-4, scc: float | None = None):
    """(instance, solution), cached for the whole session."""
    inst = instance(name, mode, scc)
    return inst, solve(inst, backend(name), gap=gap)


def tight(name: str, mode: str):
    """Near-exact optimum used by the envelope and dominance checks.

    A default-gap solve that already closed to ``TIGHT_GAP`` is reused.
    """
    if name in TOYS:
        return solved(name, mode, 0.0)
    inst, sol = solved(name, mode)
    if sol.status == "optimal" and sol.gap <= TIGHT_GAP:
        return inst, sol
    return solved(name, mode, TIGHT_GAP)


@pytest.fixture
def tmp_out(tmp_path):
    return tmp_path / "out"


# ---------------------------------------------------------------- acceptance summary

_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when == "teardown" or (rep.when == "setup" and rep.passed):
        return
    n, title = mark.args
    slot = _CRITERIA.setdefault(n, [title, True])
    slot[1] = slot[1] and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {title}")
