"""Assemble the expansion-planning MILP from a system and its scenario set.

Variable symbols (indices in brackets):

=========  ==========================  ==========================================
symbol     index                       meaning
=========  ==========================  ==========================================
P_g        n, zone, tech               new generation capacity built in epoch n
P_s, E_s   n, zone                     new storage power / energy built in epoch n
i_l        line, type, n               line investment decision (binary)
z_l        line, type, y               line availability (binary)
p_g        y, e, h, unit               dispatch
r_g        y, e, h, unit               reserve from dispatchable units
psi_p/m    y, zone, e, h               over-supply (curtailment) / unserved load
dd_p/m     y, zone, e, h, block        upward / downward demand shift
p_ch/dis   y, zone, e, h               storage charge / discharge
soc, r_s   y, zone, e, h               storage state of charge / reserve
theta      y, zone, e, h               voltage angle (rad)
f          y, line, e, h               flow on existing lines (MW)
f_c        y, line, type, e, h         flow on candidate (line, type) pairs
rho        y, region                   renewable-standard shortfall (MWh/yr)
=========  ==========================  ==========================================

Every row carries a family tag (``balance``, ``ramp_up``, ``rps`` ...);
:func:`expected_row_counts` gives each family's size from set sizes alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import costs
from ..model import AC, CANDIDATE, OFFSHORE, ONSHORE, Generator, ModelError, SystemModel, \
    TechnologyOption, apply_opoi
from ..scenarios import ScenarioDay, ScenarioSet
from .instance import BINARY, InstanceBuilder, MilpInstance

MODES = ("SO", "MO", "MO-OPOI")


class StructuralInfeasibility(ModelError):
    """The instance cannot be feasible, detected before solving."""


@dataclass(frozen=True)
class Unit:
    id: str
    zone: str
    tech: str
    dispatchable: bool
    new: bool
    profile: str | None
    generator: Generator | None = None
    option: TechnologyOption | None = None

    def var_cost(self, y: int) -> float:
        return self.option.var_om[y - 1] if self.new else self.generator.var_cost

    def fixed_cost(self, y: int) -> float:
        return self.option.fixed_om[y - 1] if self.new else self.generator.fixed_cost

    @property
    def rates(self) -> dict[str, float]:
        return dict(self.option.externality_rates if self.new else self.generator.externality_rates)


@dataclass
class BuildContext:
    """Everything downstream consumers need to interpret an instance."""

    model: SystemModel
    scenarios: ScenarioSet
    mode: str
    x5: bool
    omega: float
    scc: float
    es: costs.EpochStructure
    units: list[Unit]
    pairs: list[tuple[str, str]]
    storage_zones: list[str]
    demand_zones: list[str]
    angle_zones: list[str]
    big_m: float
    merge: dict[str, tuple[str, ...]] = field(default_factory=dict)
    orig_generators: tuple = ()

    @property
    def epochs(self) -> range:
        return range(1, self.model.config.epochs + 1)

    def days(self, y: int) -> list[ScenarioDay]:
        return self.scenarios.days(y)

    @property
    def hours(self) -> int:
        return self.scenarios.hours

    def op_weight(self, y: int) -> float:
        return costs.operation_weight(y, self.model.config.discount_rate, self.es)

    def load(self, day: ScenarioDay, zone: str) -> np.ndarray:
        v = day.load.get(zone)
        return np.zeros(day.hours) if v is None else np.asarray(v, dtype=float)

    def cf(self, day: ScenarioDay, kind: str, zone: str) -> np.ndarray:
        tab = day.profiles.get(kind, {})
        if zone in tab:
            return np.asarray(tab[zone], dtype=float)
        parts = [p for p in self.merge.get(zone, ()) if p in tab]
        if parts:
            caps = [sum(g.p_max for g in self.orig_generators if g.zone == p and g.profile == kind) or 1.0
                    for p in parts]
            w = np.array(caps) / sum(caps)
            return sum(wi * np.asarray(tab[p], dtype=float) for wi, p in zip(w, parts))
        return day.capacity_factor(kind, zone)

    def unit_available(self, u: Unit, y: int) -> bool:
        if u.new:
            return True
        z = self.model.zone(u.zone)
        if z.online_epoch is not None and z.online_epoch > y:
            return False
        return u.generator.available(y)

    def cap_avail(self, n: int, y: int, lifetime: int) -> float:
        return costs.capacity_available(n, y, lifetime, self.es)

    def storage_energy_factor(self, n: int, y: int) -> float:
        s = self.model.storage
        a = self.cap_avail(n, y, s.lifetime_years)
        return a * (1.0 - s.degradation) ** (self.es.years_per_epoch * (y - n))

    def line_capacity(self, line_id: str, type_id: str) -> float:
        return self.model.line_type(type_id).capacity

    def pair_current(self, line_id: str, type_id: str) -> str:
        return self.model.line_current(self.model.line(line_id), type_id)

    def pair_cost(self, line_id: str, type_id: str) -> float:
        return self.model.line_type(type_id).cost(self.model.line(line_id).length)

    def incident_pairs(self, zone: str) -> list[tuple[str, str]]:
        out = []
        for l, c in self.pairs:
            line = self.model.line(l)
            if zone in (line.from_zone, line.to_zone):
                out.append((l, c))
        return out

    def export_rows_needed(self, zone: str) -> bool:
        return not any(zone in (l.from_zone, l.to_zone) for l in self.model.existing_lines)

    def rps_regions(self):
        return [p for p in self.model.policy_regions if p.rps_target > 0]

    def intermittent_units_at(self, zone: str) -> list[Unit]:
        return [u for u in self.units if u.zone == zone and not u.dispatchable]

    def new_intermittent_zones(self) -> list[str]:
        return sorted({u.zone for u in self.units if u.new and not u.dispatchable},
                      key=self._zone_order)

    def _zone_order(self, z: str) -> int:
        return [q.id for q in self.model.zones].index(z)


def make_units(model: SystemModel) -> list[Unit]:
    units = [Unit(g.id, g.zone, g.tech, g.dispatchable, False, g.profile, generator=g)
             for g in model.generators]
    for k in model.tech_options:
        for z in k.buildable_zones:
            units.append(Unit(k.unit_id(z), z, k.id, k.dispatchable, True, k.profile, option=k))
    return units


def make_context(model: SystemModel, scenarios: ScenarioSet, mode: str = "SO", x5: bool = False,
                 scc: float | None = None) -> BuildContext:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    orig_gens = model.generators
    merge = {}
    if mode == "MO-OPOI":
        merge = dict(model.opoi.merge) if model.opoi else {}
        model = apply_opoi(model)
    cfg = model.config
    if sorted(scenarios.epochs) != list(range(1, cfg.epochs + 1)):
        raise ValueError(f"scenario epochs {sorted(scenarios.epochs)} do not match the "
                         f"{cfg.epochs} configured epochs")
    if not x5 and any(d.kind == "extreme" for ds in scenarios.epochs.values() for d in ds):
        scenarios = scenarios.without_extremes()

    for z in model.offshore:
        inc = [l for l in model.lines if z.id in (l.from_zone, l.to_zone)]
        if not inc:
            raise StructuralInfeasibility(
                f"offshore zone {z.id} has no candidate export line; the export "
                f"availability requirement cannot be met")

    pairs = [(l.id, c) for l in model.candidates for c in l.allowed_types]
    ac_zones = set()
    for l in model.existing_lines:
        if l.current == AC:
            ac_zones.update((l.from_zone, l.to_zone))
    for l, c in pairs:
        if model.line_current(model.line(l), c) == AC:
            line = model.line(l)
            ac_zones.update((line.from_zone, line.to_zone))
    zone_ids = [z.id for z in model.zones]
    demand = [z.id for z in model.onshore]
    omega = 0.0 if mode == "SO" else cfg.externality_weight
    ctx = BuildContext(
        model=model, scenarios=scenarios, mode=mode, x5=x5, omega=omega,
        scc=cfg.scc if scc is None else float(scc),
        es=costs.EpochStructure(cfg.epochs, cfg.years_per_epoch),
        units=make_units(model), pairs=pairs, storage_zones=model.storage_zones(),
        demand_zones=demand, angle_zones=[z for z in zone_ids if z in ac_zones],
        big_m=_big_m(model, pairs), merge=merge, orig_generators=orig_gens,
    )
    return ctx


def _big_m(model: SystemModel, pairs) -> float:
    if model.config.big_m is not None:
        return model.config.big_m
    bs = [model.line(l).susceptance or 0.0 for l, c in pairs
          if model.line_current(model.line(l), c) == AC]
    return 2 * math.pi * max(bs, default=1.0) * 1.1


def line_big_m(ctx: "BuildContext", line) -> float:
    """Disjunctive constant for one AC candidate.

    Angles live in [-pi, pi], so ``2*pi*b`` bounds the DC-flow term of an
    unbuilt line; the per-line value keeps the relaxation tighter than a
    system-wide constant.  A configured ``big_m`` overrides it.
    """
    if ctx.model.config.big_m is not None:
        return ctx.model.config.big_m
    return 2 * math.pi * line.susceptance * 1.1


def unit_rate(u: Unit, scc: float) -> float:
    """Externality $/MWh of a unit: CO2 t/MWh times scc plus local damages."""
    return sum(v * scc if k == costs.CO2 else v for k, v in u.rates.items())


def build(model: SystemModel, scenarios: ScenarioSet, mode: str = "SO", x5: bool = False,
          scc: float | None = None) -> MilpInstance:
    """Build the planning MILP for ``mode`` (SO, MO or MO-OPOI)."""
    ctx = make_context(model, scenarios, mode, x5, scc)
    m = ctx.model
    cfg = m.config
    r = cfg.discount_rate
    es = ctx.es
    Y = cfg.epochs
    H = ctx.hours
    dh = cfg.delta_h
    B = InstanceBuilder(f"{m.name}-{mode}{'-X5' if x5 else ''}")
    zones = [z.id for z in m.zones]

    # ---- investment variables
    for u in ctx.units:
        if not u.new:
            continue
        k = u.option
        for n in range(1, Y + 1):
            cost = k.capex[n - 1] * sum(costs.investment_weight(n, y, k.lifetime_years, r, es)
                                        for y in range(n, Y + 1))
            cost += sum(ctx.cap_avail(n, y, k.lifetime_years) * k.fixed_om[y - 1] * ctx.op_weight(y)
                        for y in range(n, Y + 1))
            B.var("P_g", (n, u.zone, k.id), 0.0, np.inf if k.max_build is None else k.max_build,
                  cost=cost)
    st = m.storage
    for s in ctx.storage_zones:
        for n in range(1, Y + 1):
            iw = sum(costs.investment_weight(n, y, st.lifetime_years, r, es) for y in range(n, Y + 1))
            fom = sum(ctx.cap_avail(n, y, st.lifetime_years) * st.fixed_om[y - 1] * ctx.op_weight(y)
                      for y in range(n, Y + 1))
            B.var("P_s", (n, s), 0.0, np.inf if st.max_power is None else st.max_power,
                  cost=st.power_capex[n - 1] * iw + fom)
            B.var("E_s", (n, s), 0.0, np.inf, cost=st.energy_capex[n - 1] * iw)
            B.row([(B.col("E_s", n, s), 1.0), (B.col("P_s", n, s), -st.duration_hours)],
                  "E", 0.0, "storage_ratio", f"storage_ratio[{n},{s}]")
    for l, c in ctx.pairs:
        lt = m.line_type(c)
        lc = ctx.pair_cost(l, c)
        for n in range(1, Y + 1):
            iw = sum(costs.investment_weight(n, y, lt.lifetime_years, r, es) for y in range(n, Y + 1))
            B.var("i_l", (l, c, n), kind=BINARY, cost=lc * iw)
        for y in range(1, Y + 1):
            B.var("z_l", (l, c, y), kind=BINARY)
    # availability is the sum of investments made at least build_delay epochs earlier
    for l, c in ctx.pairs:
        for y in range(1, Y + 1):
            terms = [(B.col("z_l", l, c, y), 1.0)]
            terms += [(B.col("i_l", l, c, n), -1.0) for n in range(1, y - cfg.build_delay + 1)]
            B.row(terms, "E", 0.0, "line_availability", f"line_availability[{l},{c},{y}]")
    # at most one investment per candidate line over types and epochs
    for line in m.candidates:
        terms = [(B.col("i_l", line.id, c, n), 1.0) for c in line.allowed_types for n in range(1, Y + 1)]
        B.row(terms, "L", 1.0, "line_once", f"line_once[{line.id}]")
    # every online offshore zone keeps at least one available export line
    for z in m.offshore:
        if not ctx.export_rows_needed(z.id):
            continue
        inc = ctx.incident_pairs(z.id)
        for y in range(z.online_epoch, Y + 1):
            B.row([(B.col("z_l", l, c, y), 1.0) for l, c in inc], "G", 1.0, "export",
                  f"export[{z.id},{y}]")

    # existing fixed O&M is a constant
    for u in ctx.units:
        if not u.new:
            for y in range(1, Y + 1):
                if ctx.unit_available(u, y):
                    B.offset += u.generator.fixed_cost * u.generator.p_max * ctx.op_weight(y)

    blocks = list(m.demand_blocks)
    phi = cfg.flex_fraction if blocks else 0.0
    new_int_zones = set(ctx.new_intermittent_zones())

    for y in range(1, Y + 1):
        opw = ctx.op_weight(y)
        avail_units = [u for u in ctx.units if ctx.unit_available(u, y)]
        for e, day in enumerate(ctx.days(y)):
            w = day.weight * dh * opw
            loads = {s: ctx.load(day, s) for s in zones}
            cfs = {u.id: ctx.cf(day, u.profile, u.zone) for u in ctx.units if not u.dispatchable}
            for h in range(H):
                _hour(B, ctx, y, e, h, day, w, opw, loads, cfs, avail_units, blocks, phi,
                      new_int_zones)
            # daily neutrality of shifted demand
            if phi > 0:
                for s in ctx.demand_zones:
                    terms = []
                    for h in range(H):
                        for b in blocks:
                            terms.append((B.col("dd_p", y, s, e, h, b.id), 1.0))
                            terms.append((B.col("dd_m", y, s, e, h, b.id), -1.0))
                    B.row(terms, "E", 0.0, "flex_neutral", f"flex_neutral[{y},{s},{e}]")
            # storage terminal pin
            for s in ctx.storage_zones:
                terms = [(B.col("soc", y, s, e, H - 1), 1.0)]
                terms += [(B.col("E_s", n, s), -st.soc_init * ctx.storage_energy_factor(n, y))
                          for n in range(1, y + 1)]
                B.row(terms, "E", 0.0, "soc_terminal", f"soc_terminal[{y},{s},{e}]")

        # renewable standard per region
        for p in ctx.rps_regions():
            if y < p.target_epoch:
                continue
            rz = [z.id for z in m.onshore if z.region == p.id]
            terms = []
            rhs = 0.0
            for e, day in enumerate(ctx.days(y)):
                w = day.weight * dh
                for s in rz:
                    rhs += p.rps_target * w * float(ctx.load(day, s).sum())
                for h in range(H):
                    for s in rz:
                        for u in ctx.intermittent_units_at(s):
                            if ctx.unit_available(u, y):
                                terms.append((B.col("p_g", y, e, h, u.id), w))
                        for line, sign in _offshore_lines_into(m, s):
                            if line.status == CANDIDATE:
                                for c in line.allowed_types:
                                    terms.append((B.col("f_c", y, line.id, c, e, h), sign * w))
                            else:
                                terms.append((B.col("f", y, line.id, e, h), sign * w))
            if p.enforcement == "soft":
                j = B.var("rho", (y, p.id), cost=p.penalty * opw)
                terms.append((j, 1.0))
            B.row(terms, "G", rhs, "rps", f"rps[{y},{p.id}]")

    return B.finish(context=ctx)


def _offshore_lines_into(m: SystemModel, s: str):
    """Offshore-locale lines touching onshore zone ``s`` with the sign of import into ``s``."""
    out = []
    for line in m.lines:
        if line.locale != OFFSHORE:
            continue
        if line.to_zone == s and m.zone(line.from_zone).kind != ONSHORE:
            out.append((line, 1.0))
        elif line.from_zone == s and m.zone(line.to_zone).kind != ONSHORE:
            out.append((line, -1.0))
    return out


def _hour(B: InstanceBuilder, ctx: BuildContext, y, e, h, day, w, opw, loads, cfs, avail_units,
          blocks, phi, new_int_zones):
    m = ctx.model
    cfg = m.config
    Y = cfg.epochs
    dh = cfg.delta_h
    st = m.storage
    idx = (y, e, h)
    bal: dict[str, list] = {z.id: [] for z in m.zones}
    int_terms: dict[str, list] = {}
    int_fixed: dict[str, float] = {}
    reserve = []
    res_int = []

    for u in ctx.units:
        on = ctx.unit_available(u, y)
        if u.dispatchable:
            if u.new:
                k = u.option
                caps = [(B.col("P_g", n, u.zone, k.id), ctx.cap_avail(n, y, k.lifetime_years))
                        for n in range(1, y + 1)]
                j = B.var("p_g", idx + (u.id,),
                          cost=w * (u.var_cost(y) + ctx.omega * unit_rate(u, ctx.scc)))
                rj = B.var("r_g", idx + (u.id,))
                B.row([(j, 1.0)] + [(c, -a) for c, a in caps], "L", 0.0, "gen_cap",
                      f"gen_cap[{y},{e},{h},{u.id}]")
                rf = k.ramp_fraction
                B.row([(rj, 1.0)] + [(c, -a * rf * cfg.delta_h_reserve) for c, a in caps], "L", 0.0,
                      "reserve_cap", f"reserve_cap[{y},{e},{h},{u.id}]")
                if h > 0:
                    jp = B.col("p_g", y, e, h - 1, u.id)
                    rp = B.col("r_g", y, e, h - 1, u.id)
                    B.row([(j, 1.0), (rj, 1.0), (jp, -1.0)] + [(c, -a * rf) for c, a in caps],
                          "L", 0.0, "ramp_up", f"ramp_up[{y},{e},{h},{u.id}]")
                    B.row([(j, 1.0), (jp, -1.0), (rp, -1.0)] + [(c, a * rf) for c, a in caps],
                          "G", 0.0, "ramp_down", f"ramp_down[{y},{e},{h},{u.id}]")
            else:
                g = u.generator
                lo, hi = (g.p_min, g.p_max) if on else (0.0, 0.0)
                rr = g.ramp_rate
                j = B.var("p_g", idx + (u.id,), lo, hi,
                          cost=w * (u.var_cost(y) + ctx.omega * unit_rate(u, ctx.scc)))
                rj = B.var("r_g", idx + (u.id,), 0.0, rr * cfg.delta_h_reserve if on else 0.0)
                if on and h > 0:
                    jp = B.col("p_g", y, e, h - 1, u.id)
                    rp = B.col("r_g", y, e, h - 1, u.id)
                    B.row([(j, 1.0), (rj, 1.0), (jp, -1.0)], "L", rr, "ramp_up",
                          f"ramp_up[{y},{e},{h},{u.id}]")
                    B.row([(j, 1.0), (jp, -1.0), (rp, -1.0)], "G", -rr, "ramp_down",
                          f"ramp_down[{y},{e},{h},{u.id}]")
            reserve.append((rj, 1.0))
        else:
            cf = float(cfs[u.id][h])
            if u.new:
                k = u.option
                j = B.var("p_g", idx + (u.id,),
                          cost=w * (u.var_cost(y) + ctx.omega * unit_rate(u, ctx.scc)))
                B.row([(j, 1.0)] + [(B.col("P_g", n, u.zone, k.id), -cf * ctx.cap_avail(n, y, k.lifetime_years))
                                    for n in range(1, y + 1)],
                      "E", 0.0, "gen_cap", f"gen_cap[{y},{e},{h},{u.id}]")
            else:
                out = u.generator.p_max * cf if on else 0.0
                j = B.var("p_g", idx + (u.id,), out, out,
                          cost=w * (u.var_cost(y) + ctx.omega * unit_rate(u, ctx.scc)))
                int_fixed[u.zone] = int_fixed.get(u.zone, 0.0) + out
            int_terms.setdefault(u.zone, []).append((j, 1.0))
            res_int.append((j, 1.0))
        bal[u.zone].append((j, 1.0))

    # curtailment and unserved load
    for s in [z.id for z in m.zones]:
        if s in int_terms:
            if s in new_int_zones:
                jp = B.var("psi_p", (y, s, e, h), cost=w * cfg.pen_over)
                B.row([(jp, 1.0)] + [(j, -cfg.curtail_fraction) for j, _ in int_terms[s]], "L", 0.0,
                      "curtail_cap", f"curtail_cap[{y},{s},{e},{h}]")
            else:
                jp = B.var("psi_p", (y, s, e, h), 0.0, cfg.curtail_fraction * int_fixed.get(s, 0.0),
                           cost=w * cfg.pen_over)
            bal[s].append((jp, -1.0))
    for s in ctx.demand_zones:
        D = float(loads[s][h])
        jm = B.var("psi_m", (y, s, e, h), cost=w * cfg.pen_under)
        bal[s].append((jm, 1.0))
        flex = []
        if phi > 0:
            for b in blocks:
                cap = b.share * phi * D
                up = B.var("dd_p", (y, s, e, h, b.id), 0.0, cap, cost=w * b.willingness_to_pay)
                dn = B.var("dd_m", (y, s, e, h, b.id), 0.0, cap, cost=w * b.willingness_to_pay)
                flex += [(up, 1.0), (dn, -1.0)]
            B.row([(j, 1.0) for j, _ in flex], "L", phi * D, "flex_cap", f"flex_cap[{y},{s},{e},{h}]")
        # unserved load cannot exceed shifted demand
        B.row([(jm, 1.0)] + [(j, -sg) for j, sg in flex], "L", D, "unserved_cap", f"unserved_cap[{y},{s},{e},{h}]")
        bal[s] += [(j, -sg) for j, sg in flex]

    # storage
    res_storage = []
    for s in ctx.storage_zones:
        pc = B.var("p_ch", (y, s, e, h))
        pd = B.var("p_dis", (y, s, e, h))
        so = B.var("soc", (y, s, e, h))
        rs = B.var("r_s", (y, s, e, h))
        Pbar = [(B.col("P_s", n, s), ctx.cap_avail(n, y, st.lifetime_years)) for n in range(1, y + 1)]
        Ebar = [(B.col("E_s", n, s), ctx.storage_energy_factor(n, y)) for n in range(1, y + 1)]
        prev = ([(B.col("soc", y, s, e, h - 1), -1.0)] if h > 0
                else [(c, -st.soc_init * a) for c, a in Ebar])
        B.row([(so, 1.0), (pc, -st.eta_ch * dh), (pd, dh / st.eta_dis)] + prev, "E", 0.0, "soc",
              f"soc[{y},{s},{e},{h}]")
        B.row([(pc, 1.0)] + [(c, -a) for c, a in Pbar], "L", 0.0, "storage_power",
              f"storage_power_ch[{y},{s},{e},{h}]")
        B.row([(pd, 1.0)] + [(c, -a) for c, a in Pbar], "L", 0.0, "storage_power",
              f"storage_power_dis[{y},{s},{e},{h}]")
        B.row([(rs, 1.0), (pd, 1.0), (pc, -1.0)] + [(c, -a) for c, a in Pbar], "L", 0.0, "storage_reserve_power",
              f"storage_reserve_power[{y},{s},{e},{h}]")
        k = cfg.delta_h_reserve * dh
        B.row([(rs, k), (pc, -k), (so, -st.eta_dis)] + [(c, st.eta_dis * st.dod * a) for c, a in Ebar],
              "L", 0.0, "storage_reserve_energy", f"storage_reserve_energy[{y},{s},{e},{h}]")
        B.row([(so, 1.0)] + [(c, -a) for c, a in Ebar], "L", 0.0, "soc_bounds",
              f"soc_bounds_max[{y},{s},{e},{h}]")
        B.row([(so, 1.0)] + [(c, -st.dod * a) for c, a in Ebar], "G", 0.0, "soc_bounds",
              f"soc_bounds_min[{y},{s},{e},{h}]")
        bal[s] += [(pc, -1.0), (pd, 1.0)]
        res_storage.append((rs, 1.0))

    # network
    for s in ctx.angle_zones:
        B.var("theta", (y, s, e, h), -math.pi, math.pi)
    for line in m.existing_lines:
        cap = line.existing_capacity
        f = B.var("f", (y, line.id, e, h), -cap, cap)
        if line.current == AC:
            b = line.susceptance
            B.row([(f, 1.0), (B.col("theta", y, line.from_zone, e, h), -b),
                   (B.col("theta", y, line.to_zone, e, h), b)], "E", 0.0, "dc_flow",
                  f"dc_flow[{y},{line.id},{e},{h}]")
        bal[line.from_zone].append((f, -1.0))
        bal[line.to_zone].append((f, 1.0))
    for l, c in ctx.pairs:
        line = m.line(l)
        cap = ctx.line_capacity(l, c)
        f = B.var("f_c", (y, l, c, e, h), -cap, cap)
        z = B.col("z_l", l, c, y)
        B.row([(f, 1.0), (z, -cap)], "L", 0.0, "candidate_limit", f"candidate_limit_up[{y},{l},{c},{e},{h}]")
        B.row([(f, -1.0), (z, -cap)], "L", 0.0, "candidate_limit", f"candidate_limit_dn[{y},{l},{c},{e},{h}]")
        if ctx.pair_current(l, c) == AC:
            b = line.susceptance
            M = line_big_m(ctx, line)
            tf = B.col("theta", y, line.from_zone, e, h)
            tt = B.col("theta", y, line.to_zone, e, h)
            B.row([(f, 1.0), (tf, -b), (tt, b), (z, M)], "L", M, "candidate_dc_flow",
                  f"candidate_dc_flow_up[{y},{l},{c},{e},{h}]")
            B.row([(f, -1.0), (tf, b), (tt, -b), (z, M)], "L", M, "candidate_dc_flow",
                  f"candidate_dc_flow_dn[{y},{l},{c},{e},{h}]")
        bal[line.from_zone].append((f, -1.0))
        bal[line.to_zone].append((f, 1.0))

    # nodal balance
    for z in m.zones:
        s = z.id
        D = float(loads[s][h]) if s in ctx.demand_zones else 0.0
        B.row(bal[s], "E", D, "balance", f"balance[{y},{s},{e},{h}]")

    # reserve requirement
    a_l, a_i = cfg.reserve_load_fraction, cfg.reserve_intermittent_fraction
    if cfg.reserve_scope == "system":
        D_tot = sum(float(loads[s][h]) for s in ctx.demand_zones)
        B.row(reserve + res_storage + [(j, -a_i) for j, _ in res_int], "G", a_l * D_tot, "reserve_req",
              f"reserve_req[{y},{e},{h}]")
    else:
        for z in m.zones:
            s = z.id
            terms = [(j, 1.0) for (j, _), u in zip(reserve, [u for u in ctx.units if u.dispatchable])
                     if u.zone == s]
            terms += [(B.col("r_s", y, s, e, h), 1.0)] if s in ctx.storage_zones else []
            terms += [(B.col("p_g", y, e, h, u.id), -a_i) for u in ctx.intermittent_units_at(s)]
            D = float(loads[s][h]) if s in ctx.demand_zones else 0.0
            B.row(terms, "G", a_l * D, "reserve_req", f"reserve_req[{y},{s},{e},{h}]")


def expected_row_counts(ctx: BuildContext) -> dict[str, int]:
    """Row count per family as a function of set sizes only."""
    m = ctx.model
    cfg = m.config
    Y = cfg.epochs
    H = ctx.hours
    E = {y: len(ctx.days(y)) for y in ctx.epochs}
    S = len(m.zones)
    Sd = len(ctx.demand_zones)
    Ss = len(ctx.storage_zones)
    flex = Sd if (m.demand_blocks and cfg.flex_fraction > 0) else 0
    new_d = sum(1 for u in ctx.units if u.new and u.dispatchable)
    new_all = sum(1 for u in ctx.units if u.new)
    disp_on = {y: sum(1 for u in ctx.units if u.dispatchable and ctx.unit_available(u, y)) for y in ctx.epochs}
    ac_pairs = sum(1 for l, c in ctx.pairs if ctx.pair_current(l, c) == AC)
    ac_exist = sum(1 for l in m.existing_lines if l.current == AC)
    slots = {y: E[y] * H for y in ctx.epochs}
    tot = sum(slots.values())
    out = {
        "ramp_up": sum(disp_on[y] * E[y] * (H - 1) for y in ctx.epochs),
        "reserve_cap": new_d * tot,
        "gen_cap": new_all * tot,
        "flex_cap": flex * tot,
        "flex_neutral": flex * sum(E.values()),
        "balance": S * tot,
        "unserved_cap": Sd * tot,
        "curtail_cap": len(ctx.new_intermittent_zones()) * tot,
        "reserve_req": tot * (1 if cfg.reserve_scope == "system" else S),
        "soc": Ss * tot,
        "soc_terminal": Ss * sum(E.values()),
        "storage_power": 2 * Ss * tot,
        "storage_reserve_power": Ss * tot,
        "storage_reserve_energy": Ss * tot,
        "soc_bounds": 2 * Ss * tot,
        "storage_ratio": Ss * Y,
        "dc_flow": ac_exist * tot,
        "line_availability": len(ctx.pairs) * Y,
        "line_once": len(m.candidates),
        "candidate_dc_flow": 2 * ac_pairs * tot,
        "candidate_limit": 2 * len(ctx.pairs) * tot,
        "export": sum(Y - z.online_epoch + 1 for z in m.offshore if ctx.export_rows_needed(z.id)),
        "rps": sum(Y - p.target_epoch + 1 for p in ctx.rps_regions()),
    }
    out["ramp_down"] = out["ramp_up"]
    return {k: v for k, v in sorted(out.items()) if v}


def expected_binary_count(ctx: BuildContext) -> int:
    """Investment and availability binaries: two per candidate (line, type) pair and epoch."""
    return 2 * len(ctx.pairs) * ctx.model.config.epochs
