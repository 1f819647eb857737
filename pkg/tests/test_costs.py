from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gstep import costs
from gstep.accounting import breakdown
from gstep.costs import (EpochDispatch, EpochStructure, annualized_investment, crf, discount_factor,
                         externality_cost, offshore_cable_cost, onshore_line_cost, operation_cost,
                         operation_weight)

from conftest import instance, solved, system

ONE_YEAR = EpochStructure(1, 1)


def _crf_exact(r: Fraction, n: int) -> Fraction:
    g = (1 + r) ** n
    return r * g / (g - 1)


@pytest.mark.parametrize("r", [0.01, 0.05, 0.2])
def test_crf_one_period(r):
    assert crf(r, 1) == pytest.approx(1 + r, rel=1e-15)


@pytest.mark.parametrize("n,expect", [(20, 0.080243), (30, 0.065051)])
def test_crf_values(n, expect):
    assert crf(0.05, n) == pytest.approx(expect, abs=1e-6)
    assert crf(0.05, n) == pytest.approx(float(_crf_exact(Fraction(1, 20), n)), rel=1e-14)


def test_crf_rejects_zero_rate():
    with pytest.raises(ValueError):
        crf(0.0, 10)


def test_discount_factor():
    assert discount_factor(1, 20, 0.05) == 1.0
    assert discount_factor(21, 20, 0.05) == 0.0
    assert discount_factor(6, 20, 0.05) == pytest.approx(0.783526, abs=1e-6)


def test_zero_builds():
    es = EpochStructure(4, 5)
    assert not annualized_investment([0, 0, 0, 0], 1e6, 20, 0.05, es).any()


def test_single_build_one_year():
    ic = annualized_investment([1.0], 1.0, 20, 0.05, ONE_YEAR)
    assert ic[0] == pytest.approx(crf(0.05, 20), rel=1e-15)


def test_two_epochs_against_annual_ledger():
    es = EpochStructure(2, 5)
    got = annualized_investment([100.0, 0.0], 1e6, 20, 0.05, es)
    ledger = [0.0, 0.0]
    for t in range(1, 11):  # calendar year offsets
        gamma = 1 / 1.05 ** (t - 1) if t <= 20 else 0.0
        ledger[(t - 1) // 5] += crf(0.05, 20) * gamma * 100 * 1e6
    np.testing.assert_allclose(got, ledger, rtol=1e-12)


def test_build_in_second_epoch_discounted_from_its_first_year():
    es = EpochStructure(2, 5)
    got = annualized_investment([0.0, 1.0], 1.0, 20, 0.05, es)
    assert got[0] == 0.0
    assert got[1] == pytest.approx(crf(0.05, 20) * sum(1 / 1.05 ** k for k in range(5)))


def test_lifetime_cuts_off_payments():
    es = EpochStructure(3, 5)
    got = annualized_investment([1.0, 0.0, 0.0], 1.0, 7, 0.05, es)
    ann = crf(0.05, 7)
    assert got[1] == pytest.approx(ann * sum(1 / 1.05 ** (t - 1) for t in (6, 7)))
    assert got[2] == 0.0


def _dispatch(**kw):
    d = EpochDispatch(epoch=1, weights=np.array([365.0]))
    for k, v in kw.items():
        setattr(d, k, v)
    return d


def test_operation_cost_zero():
    assert operation_cost(_dispatch(), 0.05, ONE_YEAR) == 0.0


def test_operation_cost_variable_term():
    p = np.zeros((1, 24))
    p[0, 5] = 100.0
    d = _dispatch(generation={"G": p}, var_cost={"G": 34.48})
    es = EpochStructure(1, 5)
    expect = 365 * 100 * 34.48 * sum(1 / 1.05 ** k for k in range(5))
    assert operation_cost(d, 0.05, es) == pytest.approx(expect, rel=1e-12)


def test_operation_cost_unserved_penalty():
    u = np.zeros((1, 24))
    u[0, 3] = 5.0
    d = EpochDispatch(epoch=1, weights=np.array([1.0]), unserved={"Z": u}, pen_under=5000.0)
    assert costs.annual_operation_cost(d) == 25_000.0


def test_operation_cost_flex_charges_both_directions():
    f = np.zeros((1, 24))
    f[0, 0], f[0, 1] = 10.0, -10.0
    d = EpochDispatch(epoch=1, weights=np.array([1.0]), flex={("Z", "b"): f}, flex_price={"b": 100.0})
    assert costs.annual_operation_cost(d) == 2000.0


def test_externality_renewables_free():
    gen = {"W": np.full((1, 24), 50.0)}
    assert externality_cost(gen, {"W": {}}, 190.0, np.array([365.0]), 0.05, 1, ONE_YEAR) == 0.0


def test_externality_air_quality_rate():
    gen = {"G": np.array([[1.0] + [0.0] * 23])}
    ann = costs.annual_externalities(gen, {"G": {"air_quality": 15.42}}, 51.0, np.array([1.0]))
    assert ann.local_cost == pytest.approx(15.42) and ann.co2_cost == 0.0


def test_externality_carbon_price():
    gen = {"G": np.array([[1.0] + [0.0] * 23])}
    ann = costs.annual_externalities(gen, {"G": {"co2": 0.4}}, 190.0, np.array([1.0]))
    assert ann.co2_cost == pytest.approx(76.0) and ann.co2_tons == pytest.approx(0.4)


def test_externality_missing_rate():
    with pytest.raises(ValueError, match="no externality rates"):
        costs.annual_externalities({"G": np.ones((1, 2))}, {}, 51.0, np.array([1.0]))


@pytest.mark.parametrize("kind,length,expect", [
    ("HVAC-400", 0.0, 40.13), ("HVDC-1400", 100.0, 716.21), ("HVDC-2200", 0.0, 687.44),
    ("HVDC-1400", 0.0, 448.58),
])
def test_offshore_cables(kind, length, expect):
    assert offshore_cable_cost(length, kind) == pytest.approx(expect, abs=1e-9)


def test_offshore_cable_unknown_type():
    with pytest.raises(ValueError):
        offshore_cable_cost(10.0, "HVDC-9000")


@pytest.mark.parametrize("mw,mi,rate,expect", [
    (0.0, 50.0, 3888.5, 0.0), (1000.0, 50.0, 3888.5, 194_425_000.0), (1000.0, 50.0, 1499.85, 74_992_500.0),
])
def test_onshore_lines(mw, mi, rate, expect):
    assert onshore_line_cost(mw, mi, rate) == expect


def test_line_type_costs_agree_with_cable_curves():
    m = system("toy3")
    for t in m.line_types:
        for l in (0.0, 12.5, 80.0):
            assert t.cost(l) == pytest.approx(offshore_cable_cost(l, t.id) * 1e6, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(costs.OFFSHORE_CABLES)), st.floats(0, 500), st.floats(0, 500))
def test_cable_cost_monotone(kind, a, b):
    lo, hi = sorted((a, b))
    assert offshore_cable_cost(lo, kind) <= offshore_cable_cost(hi, kind)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 1e3), min_size=3, max_size=3), st.integers(0, 2), st.floats(0, 100))
def test_investment_monotone_in_capacity(builds, j, extra):
    es = EpochStructure(3, 5)
    more = list(builds)
    more[j] += extra
    a = annualized_investment(builds, 1e5, 25, 0.05, es)
    b = annualized_investment(more, 1e5, 25, 0.05, es)
    assert np.all(b >= a - 1e-9 * np.abs(a).max(initial=1.0))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.001, 0.2), st.integers(1, 6), st.integers(1, 10))
def test_operation_weight_is_yearly_sum(r, y, L):
    es = EpochStructure(6, L)
    expect = sum(discount_factor(t, 10 ** 6, r) for t in es.years(y))
    assert operation_weight(y, r, es) == pytest.approx(expect, rel=1e-12)


@pytest.mark.parametrize("name", ["toy1", "toy2", "toy3"])
def test_objective_linear_in_omega(name):
    """Same decisions priced under SO and MO differ by exactly the externality cost."""
    inst_so, sol = solved(name, "SO")
    inst_mo = instance(name, "MO")
    bd = breakdown(inst_so, sol)
    diff = inst_mo.objective(sol.values) - inst_so.objective(sol.values)
    assert diff == pytest.approx(bd.externality, rel=1e-9)
    assert inst_mo.objective(sol.values) == pytest.approx(bd.hard_cost + bd.externality, rel=1e-9)


@pytest.mark.parametrize("name", ["toy2", "toy3"])
def test_breakdown_parts_sum(name):
    inst, sol = solved(name, "MO")
    bd = breakdown(inst, sol)
    bd.check()
    assert bd.social_cost == pytest.approx(sum(r["social"] for r in bd.rows()), rel=1e-12)
