import math
from pathlib import Path

import pytest

from gstep.accounting import breakdown
from gstep.report import COLUMNS, TABLES, _fmt, build_tables, read_csv, render_plots, write_tables

from conftest import TOYS, solved


@pytest.fixture(scope="module")
def toy2_tables():
    inst, sol = solved("toy2", "MO")
    return inst, sol, build_tables(inst, sol, breakdown(inst, sol))


@pytest.mark.parametrize("name", TOYS)
def test_energy_balance_closes(name):
    inst, sol = solved(name, "MO" if name != "toy1" else "SO")
    tables = build_tables(inst, sol, breakdown(inst, sol))
    for r in tables["energy_balance"]:
        assert abs(r["residual_mwh"]) <= 1e-6 * max(1.0, r["demand_mwh"])


def test_capacity_rows_sum(toy2_tables):
    inst, sol, t = toy2_tables
    for r in t["capacity"]:
        assert r["total_mw"] == r["existing_mw"] + r["new_mw"]
    ctx = inst.context
    y = ctx.model.config.epochs
    existing = sum(u.generator.p_max for u in ctx.units if not u.new and ctx.unit_available(u, y))
    assert sum(r["existing_mw"] for r in t["capacity"] if r["epoch"] == y) == pytest.approx(existing)


def test_cost_total_row(toy2_tables):
    inst, sol, t = toy2_tables
    rows = t["costs"]
    assert rows[-1]["epoch"] == "total"
    assert rows[-1]["social"] == pytest.approx(sum(r["social"] for r in rows[:-1]))
    assert rows[-1]["social"] == pytest.approx(sol.objective, rel=1e-9)


def test_generation_shares(toy2_tables):
    _, _, t = toy2_tables
    for y in {r["epoch"] for r in t["generation"]}:
        assert math.fsum(r["share"] for r in t["generation"] if r["epoch"] == y) == pytest.approx(1.0)


def test_write_tables_and_plots(toy2_tables, tmp_path):
    _, _, t = toy2_tables
    digests = write_tables(tmp_path, t)
    assert set(digests) == set(TABLES)
    for name in TABLES:
        rows = read_csv(tmp_path / f"{name}.csv")
        assert len(rows) == len(t[name])
        with open(tmp_path / f"{name}.csv") as fh:
            assert fh.readline().strip().split(",") == COLUMNS[name]
    again = write_tables(tmp_path, t)
    assert again == digests
    pngs = render_plots(tmp_path, t, "toy2 MO")
    assert len(pngs) == 4
    for p in pngs:
        assert str(p).endswith(".png") and (tmp_path / "plots" / Path(p).name).is_file()


@pytest.mark.parametrize("v,s", [(0.0, "0.0"), (-0.0, "0.0"), (0.1, "0.1"), (1e20, "1e+20"), (3, "3"),
                                 (True, "True"), ("x", "x")])
def test_number_format(v, s):
    assert _fmt(v) == s
