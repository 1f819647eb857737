"""Turn a solved plan into per-epoch dispatch records and a cost breakdown.

The breakdown is computed with the functions in :mod:`gstep.costs` from the
solution values alone, not from the objective vector, so agreement between
``breakdown(...).total(omega)`` and the solver objective is a real check.
"""
from __future__ import annotations

import numpy as np

from . import costs
from .costs import CostBreakdown, EpochDispatch
from .milp.build import BuildContext
from .milp.instance import MilpInstance, PlanSolution


class AccountingMismatch(AssertionError):
    pass


def _unit_grid(instance, x, ctx, y, uid) -> np.ndarray:
    days = ctx.days(y)
    return np.array([[x[instance.column("p_g", y, e, h, uid)] for h in range(ctx.hours)]
                     for e in range(len(days))]).reshape(len(days), ctx.hours)


def _zone_grid(instance, x, ctx, y, sym, zone, *tail) -> np.ndarray:
    days = ctx.days(y)
    return np.array([[x[instance.column(sym, y, zone, e, h, *tail)] for h in range(ctx.hours)]
                     for e in range(len(days))]).reshape(len(days), ctx.hours)


def new_capacity(instance: MilpInstance, x: np.ndarray, zone: str, tech: str, y: int) -> float:
    """Cumulative new capacity of ``tech`` in ``zone`` available in epoch ``y``."""
    ctx: BuildContext = instance.context
    k = ctx.model.tech(tech)
    return sum(x[instance.column("P_g", n, zone, tech)] * ctx.cap_avail(n, y, k.lifetime_years)
               for n in range(1, y + 1))


def storage_capacity(instance: MilpInstance, x: np.ndarray, zone: str, y: int) -> tuple[float, float]:
    """(power MW, energy MWh) of storage available in ``zone`` in epoch ``y``."""
    ctx: BuildContext = instance.context
    st = ctx.model.storage
    p = sum(x[instance.column("P_s", n, zone)] * ctx.cap_avail(n, y, st.lifetime_years) for n in range(1, y + 1))
    e = sum(x[instance.column("E_s", n, zone)] * ctx.storage_energy_factor(n, y) for n in range(1, y + 1))
    return float(p), float(e)


def epoch_dispatch(instance: MilpInstance, solution: PlanSolution, y: int) -> EpochDispatch:
    ctx: BuildContext = instance.context
    m = ctx.model
    cfg = m.config
    x = solution.values
    d = EpochDispatch(epoch=y, weights=np.array([day.weight for day in ctx.days(y)], dtype=float),
                      delta_h=cfg.delta_h, pen_under=cfg.pen_under, pen_over=cfg.pen_over)
    for u in ctx.units:
        d.generation[u.id] = _unit_grid(instance, x, ctx, y, u.id)
        d.var_cost[u.id] = u.var_cost(y)
        d.rates[u.id] = u.rates
        d.unit_zone[u.id] = u.zone
        d.unit_tech[u.id] = u.tech
        d.fixed_cost[u.id] = u.fixed_cost(y)
        if u.new:
            d.capacity[u.id] = new_capacity(instance, x, u.zone, u.option.id, y)
        else:
            d.capacity[u.id] = u.generator.p_max if ctx.unit_available(u, y) else 0.0
    for z in m.zones:
        if ctx.intermittent_units_at(z.id):
            d.curtailed[z.id] = _zone_grid(instance, x, ctx, y, "psi_p", z.id)
    for s in ctx.demand_zones:
        d.unserved[s] = _zone_grid(instance, x, ctx, y, "psi_m", s)
        if m.demand_blocks and cfg.flex_fraction > 0:
            for b in m.demand_blocks:
                d.flex[(s, b.id)] = (_zone_grid(instance, x, ctx, y, "dd_p", s, b.id)
                                     + _zone_grid(instance, x, ctx, y, "dd_m", s, b.id))
                d.flex_price[b.id] = b.willingness_to_pay
    if ctx.storage_zones:
        d.storage_fixed_cost = m.storage.fixed_om[y - 1]
        for s in ctx.storage_zones:
            d.storage_power[s] = storage_capacity(instance, x, s, y)[0]
    for p in ctx.rps_regions():
        if p.enforcement == "soft" and y >= p.target_epoch:
            d.shortfall[p.id] = float(x[instance.column("rho", y, p.id)])
            d.shortfall_price[p.id] = p.penalty
    return d


def breakdown(instance: MilpInstance, solution: PlanSolution) -> CostBreakdown:
    """Discounted cost components per epoch plus physical totals."""
    ctx: BuildContext = instance.context
    m = ctx.model
    cfg = m.config
    r, es, Y, L = cfg.discount_rate, ctx.es, cfg.epochs, cfg.years_per_epoch
    x = solution.values
    ic_g = np.zeros(Y)
    for u in ctx.units:
        if u.new:
            k = u.option
            builds = [max(x[instance.column("P_g", n, u.zone, k.id)], 0.0) for n in range(1, Y + 1)]
            ic_g += costs.annualized_investment(builds, k.capex, k.lifetime_years, r, es)
    ic_s = np.zeros(Y)
    if ctx.storage_zones:
        st = m.storage
        for s in ctx.storage_zones:
            pw = [max(x[instance.column("P_s", n, s)], 0.0) for n in range(1, Y + 1)]
            en = [max(x[instance.column("E_s", n, s)], 0.0) for n in range(1, Y + 1)]
            ic_s += costs.annualized_investment(pw, st.power_capex, st.lifetime_years, r, es)
            ic_s += costs.annualized_investment(en, st.energy_capex, st.lifetime_years, r, es)
    ic_l = np.zeros(Y)
    for l, c in ctx.pairs:
        builds = [round(x[instance.column("i_l", l, c, n)]) for n in range(1, Y + 1)]
        if any(builds):
            ic_l += costs.annualized_investment(builds, ctx.pair_cost(l, c),
                                                m.line_type(c).lifetime_years, r, es)
    oc, ec, co2, ec_co2, ec_loc = (np.zeros(Y) for _ in range(5))
    energy: dict[int, dict[str, float]] = {}
    local: dict[int, dict[str, float]] = {}
    for y in ctx.epochs:
        d = epoch_dispatch(instance, solution, y)
        opw = ctx.op_weight(y)
        oc[y - 1] = costs.operation_cost(d, r, es)
        ann = costs.annual_externalities(d.generation, d.rates, ctx.scc, d.weights, d.delta_h, d.unit_zone)
        ec[y - 1] = ann.total * opw
        ec_co2[y - 1] = ann.co2_cost * opw
        ec_loc[y - 1] = ann.local_cost * opw
        co2[y - 1] = ann.co2_tons * L
        by_tech: dict[str, float] = {}
        for u, p in d.generation.items():
            by_tech[d.unit_tech[u]] = by_tech.get(d.unit_tech[u], 0.0) + d.energy(p) * L
        energy[y] = by_tech
        local[y] = {z: v * L for z, v in ann.local_by_zone.items()}
    return CostBreakdown(Y, ic_g, ic_l, ic_s, oc, ec, energy, co2, local, ec_co2, ec_loc)


def check_objective(instance: MilpInstance, solution: PlanSolution, bd: CostBreakdown | None = None,
                    rel: float = 1e-6) -> float:
    """Relative difference between the breakdown total and the solver objective."""
    ctx: BuildContext = instance.context
    bd = bd or breakdown(instance, solution)
    total = bd.total(ctx.omega)
    diff = abs(total - solution.objective) / max(1.0, abs(solution.objective))
    if diff > rel:
        raise AccountingMismatch(f"cost breakdown {total!r} differs from objective "
                                 f"{solution.objective!r} (relative {diff:.3g})")
    return diff
