"""Post-solve replay of a plan against the un-linearised operating rules.

Nothing here reads the constraint matrix: every check recomputes the
physics from the system data and the solution values, so it doubles as an
independent oracle for the builder.  Hourly residuals are in MW or MWh;
the renewable-standard residual is relative to the regional requirement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..model import AC, CANDIDATE
from .build import BuildContext, _offshore_lines_into
from .instance import MilpInstance, PlanSolution

CHECKS = ("integrality", "investment", "generation", "balance", "curtailment", "reserve",
          "storage", "soc", "flow", "flex", "rps", "export")


class ReplayError(AssertionError):
    pass


@dataclass
class ReplayReport:
    tol: float
    residuals: dict[str, float] = field(default_factory=lambda: {c: 0.0 for c in CHECKS})
    worst: dict[str, str] = field(default_factory=dict)

    def add(self, check: str, residual: float, where: str) -> None:
        r = max(float(residual), 0.0)
        if r > self.residuals[check]:
            self.residuals[check] = r
            self.worst[check] = where

    @property
    def failures(self) -> list[str]:
        return [f"{c}: residual {self.residuals[c]:.3g} at {self.worst.get(c, '?')}"
                for c in CHECKS if self.residuals[c] > self.tol]

    @property
    def ok(self) -> bool:
        return not self.failures

    def raise_if_failed(self) -> None:
        if not self.ok:
            raise ReplayError("; ".join(self.failures))


def replay(instance: MilpInstance, solution: PlanSolution, tol: float = 1e-6) -> ReplayReport:
    """Check ``solution`` against the operating rules of the instance's system."""
    ctx: BuildContext = instance.context
    if ctx is None:
        raise ValueError("instance carries no build context; replay needs a built instance")
    if solution.values is None:
        raise ValueError(f"solution has no values (status {solution.status})")
    x = solution.values
    rep = ReplayReport(tol)

    def v(sym, *idx) -> float:
        return float(x[instance.column(sym, *idx)])

    m = ctx.model
    cfg = m.config
    Y, H, dh = cfg.epochs, ctx.hours, cfg.delta_h
    st = m.storage

    # integrality and investment logic
    for j in np.flatnonzero(instance.binary_mask):
        rep.add("integrality", abs(x[j] - round(x[j])), instance.variables[j].name)
    for l, c in ctx.pairs:
        for y in ctx.epochs:
            built = sum(v("i_l", l, c, n) for n in range(1, y - cfg.build_delay + 1))
            rep.add("investment", abs(v("z_l", l, c, y) - built), f"z_l[{l},{c},{y}]")
    for line in m.candidates:
        tot = sum(v("i_l", line.id, c, n) for c in line.allowed_types for n in ctx.epochs)
        rep.add("investment", tot - 1.0, f"line {line.id} built {tot:g} times")

    def new_cap(zone, tech, lifetime, y):
        return sum(v("P_g", n, zone, tech) * ctx.cap_avail(n, y, lifetime) for n in range(1, y + 1))

    phi = cfg.flex_fraction if m.demand_blocks else 0.0
    for y in ctx.epochs:
        for e, day in enumerate(ctx.days(y)):
            loads = {z.id: ctx.load(day, z.id) for z in m.zones}
            soc_prev = {s: st.soc_init * _e_cap(ctx, v, s, y) for s in ctx.storage_zones}
            net_shift = {s: 0.0 for s in ctx.demand_zones}
            for h in range(H):
                where = f"epoch {y} day {e} hour {h}"
                inj = {z.id: 0.0 for z in m.zones}
                intermittent = {z.id: 0.0 for z in m.zones}
                r_total = 0.0
                r_zone = {z.id: 0.0 for z in m.zones}
                for u in ctx.units:
                    p = v("p_g", y, e, h, u.id)
                    on = ctx.unit_available(u, y)
                    inj[u.zone] += p
                    if u.dispatchable:
                        r = v("r_g", y, e, h, u.id)
                        r_total += r
                        r_zone[u.zone] += r
                        if u.new:
                            k = u.option
                            cap = new_cap(u.zone, k.id, k.lifetime_years, y)
                            rr = k.ramp_fraction * cap
                            rep.add("generation", p - cap, f"{u.id} {where}")
                            rep.add("reserve", r - rr * cfg.delta_h_reserve, f"{u.id} {where}")
                        else:
                            g = u.generator
                            lo, hi = (g.p_min, g.p_max) if on else (0.0, 0.0)
                            rr = g.ramp_rate if on else 0.0
                            rep.add("generation", max(lo - p, p - hi), f"{u.id} {where}")
                            rep.add("reserve", r - rr * cfg.delta_h_reserve, f"{u.id} {where}")
                        rep.add("generation", -p, f"{u.id} {where}")
                        rep.add("reserve", -r, f"{u.id} {where}")
                        if h > 0 and (u.new or on):
                            pp = v("p_g", y, e, h - 1, u.id)
                            rp = v("r_g", y, e, h - 1, u.id)
                            rep.add("generation", p + r - pp - rr, f"ramp up {u.id} {where}")
                            rep.add("generation", -rr - (p - pp - rp), f"ramp down {u.id} {where}")
                    else:
                        cf = float(ctx.cf(day, u.profile, u.zone)[h])
                        if u.new:
                            avail = cf * new_cap(u.zone, u.option.id, u.option.lifetime_years, y)
                        else:
                            avail = u.generator.p_max * cf if on else 0.0
                        rep.add("generation", abs(p - avail), f"{u.id} {where}")
                        intermittent[u.zone] += p
                # curtailment and unserved load
                for z in m.zones:
                    s = z.id
                    if ctx.intermittent_units_at(s):
                        pp = v("psi_p", y, s, e, h)
                        inj[s] -= pp
                        rep.add("curtailment", pp - cfg.curtail_fraction * intermittent[s], f"{s} {where}")
                        rep.add("curtailment", -pp, f"{s} {where}")
                for s in ctx.demand_zones:
                    D = float(loads[s][h])
                    shift = 0.0
                    if phi > 0:
                        gross = 0.0
                        for b in m.demand_blocks:
                            up, dn = v("dd_p", y, s, e, h, b.id), v("dd_m", y, s, e, h, b.id)
                            cap = b.share * phi * D
                            rep.add("flex", max(-up, -dn, up - cap, dn - cap), f"{s}/{b.id} {where}")
                            shift += up - dn
                            gross += up + dn
                        rep.add("flex", abs(shift) - phi * D, f"{s} {where}")
                        rep.add("flex", gross - phi * D, f"{s} {where}")
                    net_shift[s] += shift
                    um = v("psi_m", y, s, e, h)
                    rep.add("curtailment", max(-um, um - (D + shift)), f"unserved {s} {where}")
                    inj[s] += um - shift - D
                # storage
                for s in ctx.storage_zones:
                    pc, pd = v("p_ch", y, s, e, h), v("p_dis", y, s, e, h)
                    so, rs = v("soc", y, s, e, h), v("r_s", y, s, e, h)
                    P = sum(v("P_s", n, s) * ctx.cap_avail(n, y, st.lifetime_years) for n in range(1, y + 1))
                    E = _e_cap(ctx, v, s, y)
                    rep.add("soc", abs(so - (soc_prev[s] + st.eta_ch * pc * dh - pd * dh / st.eta_dis)),
                            f"{s} {where}")
                    rep.add("soc", max(so - E, st.dod * E - so), f"window {s} {where}")
                    rep.add("storage", max(-pc, -pd, -rs, pc - P, pd - P, rs + pd - pc - P), f"{s} {where}")
                    k = cfg.delta_h_reserve * dh
                    rep.add("storage", k * (rs - pc) - st.eta_dis * (so - st.dod * E), f"reserve energy {s} {where}")
                    soc_prev[s] = so
                    inj[s] += pd - pc
                    r_total += rs
                    r_zone[s] += rs
                # network
                ang = {z: v("theta", y, z, e, h) for z in ctx.angle_zones}
                for a in ang.values():
                    rep.add("flow", abs(a) - math.pi, where)
                for line in m.existing_lines:
                    f = v("f", y, line.id, e, h)
                    rep.add("flow", abs(f) - line.existing_capacity, f"{line.id} {where}")
                    if line.current == AC:
                        rep.add("flow", abs(f - line.susceptance * (ang[line.from_zone] - ang[line.to_zone])),
                                f"{line.id} angle {where}")
                    inj[line.from_zone] -= f
                    inj[line.to_zone] += f
                for l, c in ctx.pairs:
                    line = m.line(l)
                    f = v("f_c", y, l, c, e, h)
                    zl = round(v("z_l", l, c, y))
                    rep.add("flow", abs(f) - ctx.line_capacity(l, c) * zl, f"{l}/{c} {where}")
                    if zl and ctx.pair_current(l, c) == AC:
                        rep.add("flow", abs(f - line.susceptance * (ang[line.from_zone] - ang[line.to_zone])),
                                f"{l}/{c} angle {where}")
                    inj[line.from_zone] -= f
                    inj[line.to_zone] += f
                for z in m.zones:
                    rep.add("balance", abs(inj[z.id]), f"{z.id} {where}")
                # reserve requirement
                a_l, a_i = cfg.reserve_load_fraction, cfg.reserve_intermittent_fraction
                if cfg.reserve_scope == "system":
                    need = a_l * sum(float(loads[s][h]) for s in ctx.demand_zones) + a_i * sum(intermittent.values())
                    rep.add("reserve", need - r_total, where)
                else:
                    for z in m.zones:
                        D = float(loads[z.id][h]) if z.id in ctx.demand_zones else 0.0
                        rep.add("reserve", a_l * D + a_i * intermittent[z.id] - r_zone[z.id], f"{z.id} {where}")
            for s in ctx.storage_zones:
                rep.add("soc", abs(soc_prev[s] - st.soc_init * _e_cap(ctx, v, s, y)),
                        f"terminal {s} epoch {y} day {e}")
            for s, tot in net_shift.items():
                rep.add("flex", abs(tot), f"daily neutrality {s} epoch {y} day {e}")

        # renewable standard
        for p in ctx.rps_regions():
            if y < p.target_epoch:
                continue
            zones = [z.id for z in m.onshore if z.region == p.id]
            need = got = 0.0
            for e, day in enumerate(ctx.days(y)):
                w = day.weight * dh
                for s in zones:
                    need += p.rps_target * w * float(ctx.load(day, s).sum())
                    for h in range(H):
                        for u in ctx.intermittent_units_at(s):
                            got += w * v("p_g", y, e, h, u.id)
                        for line, sign in _offshore_lines_into(m, s):
                            if line.status == CANDIDATE:
                                got += sign * w * sum(v("f_c", y, line.id, c, e, h) for c in line.allowed_types)
                            else:
                                got += sign * w * v("f", y, line.id, e, h)
            short = v("rho", y, p.id) if p.enforcement == "soft" else 0.0
            rep.add("rps", (need - got - short) / max(1.0, need), f"{p.id} epoch {y}")
            rep.add("rps", -short / max(1.0, need), f"{p.id} epoch {y}")

    # export availability
    for z in m.offshore:
        if not ctx.export_rows_needed(z.id):
            continue
        for y in range(z.online_epoch, Y + 1):
            n_avail = sum(round(v("z_l", l, c, y)) for l, c in ctx.incident_pairs(z.id))
            rep.add("export", 1.0 - n_avail, f"{z.id} epoch {y}")
    return rep


def _e_cap(ctx: BuildContext, v, s: str, y: int) -> float:
    return sum(v("E_s", n, s) * ctx.storage_energy_factor(n, y) for n in range(1, y + 1))


def available_exports(instance: MilpInstance, solution: PlanSolution) -> dict[str, dict[int, list[str]]]:
    """Available export lines per offshore zone and epoch, as ``line/type`` labels."""
    ctx: BuildContext = instance.context
    out: dict[str, dict[int, list[str]]] = {}
    for z in ctx.model.offshore:
        out[z.id] = {}
        for y in ctx.epochs:
            out[z.id][y] = [f"{l}/{c}" for l, c in ctx.incident_pairs(z.id)
                            if solution.value(instance, "z_l", l, c, y) > 0.5]
    return out
