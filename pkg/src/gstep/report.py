"""Result tables (CSV) and figures (PNG) for a solved study.

Tables are plain CSV with floats written by ``repr``, so a rerun of the
same build reproduces them byte for byte.  Figures are rendered from the
tables only.
"""
from __future__ import annotations

import csv
import hashlib
from pathlib import Path

import numpy as np

from .accounting import epoch_dispatch, new_capacity, storage_capacity
from .costs import CostBreakdown
from .milp.build import BuildContext
from .milp.instance import MilpInstance, PlanSolution

TABLES = ("costs", "topology", "capacity", "storage", "generation", "energy_balance", "emissions",
          "emissions_by_zone")

MMT = 1e6  # tonnes per million metric tonnes


def topology_rows(instance: MilpInstance, sol: PlanSolution) -> list[dict]:
    """Built candidate lines with their build epoch."""
    ctx: BuildContext = instance.context
    m = ctx.model
    rows = []
    for l, c in ctx.pairs:
        line = m.line(l)
        for n in ctx.epochs:
            if sol.value(instance, "i_l", l, c, n) > 0.5:
                rows.append({"line": l, "type": c, "from_zone": line.from_zone, "to_zone": line.to_zone,
                             "locale": line.locale, "current": ctx.pair_current(l, c),
                             "capacity_mw": ctx.line_capacity(l, c), "length_mi": line.length,
                             "build_epoch": n, "cost_usd": ctx.pair_cost(l, c)})
    return rows


def capacity_rows(instance: MilpInstance, sol: PlanSolution) -> list[dict]:
    """Available generating capacity per epoch, zone and technology (MW)."""
    ctx: BuildContext = instance.context
    x = sol.values
    acc: dict[tuple, list[float]] = {}
    for y in ctx.epochs:
        for u in ctx.units:
            key = (y, u.zone, u.tech)
            slot = acc.setdefault(key, [0.0, 0.0])
            if u.new:
                slot[1] += new_capacity(instance, x, u.zone, u.option.id, y)
            elif ctx.unit_available(u, y):
                slot[0] += u.generator.p_max
    return [{"epoch": y, "zone": z, "tech": t, "existing_mw": a, "new_mw": b, "total_mw": a + b}
            for (y, z, t), (a, b) in sorted(acc.items(), key=lambda kv: (kv[0][0], _order(ctx, kv[0][1]), kv[0][2]))
            if a or b]


def _order(ctx: BuildContext, zone: str) -> int:
    return [z.id for z in ctx.model.zones].index(zone)


def storage_rows(instance: MilpInstance, sol: PlanSolution) -> list[dict]:
    ctx: BuildContext = instance.context
    rows = []
    for y in ctx.epochs:
        for s in ctx.storage_zones:
            p, e = storage_capacity(instance, sol.values, s, y)
            if p or e:
                rows.append({"epoch": y, "zone": s, "power_mw": p, "energy_mwh": e})
    return rows


def generation_rows(bd: CostBreakdown, years_per_epoch: int) -> list[dict]:
    """Annual energy per technology and epoch (MWh/yr)."""
    rows = []
    for y in sorted(bd.energy_by_tech):
        tot = sum(bd.energy_by_tech[y].values())
        for tech, mwh in sorted(bd.energy_by_tech[y].items()):
            if mwh:
                ann = mwh / years_per_epoch
                rows.append({"epoch": y, "tech": tech, "mwh_per_year": ann,
                             "share": mwh / tot if tot else 0.0})
    return rows


def energy_balance_rows(instance: MilpInstance, sol: PlanSolution) -> list[dict]:
    """Annual system energy balance; flows are lossless so they cancel across zones."""
    ctx: BuildContext = instance.context
    x = sol.values
    rows = []
    for y in ctx.epochs:
        d = epoch_dispatch(instance, sol, y)
        demand = sum(d.energy(np.array([ctx.load(day, s) for day in ctx.days(y)]))
                     for s in ctx.demand_zones)
        gen = sum(d.energy(p) for p in d.generation.values())
        curt = sum(d.energy(v) for v in d.curtailed.values())
        unserved = sum(d.energy(v) for v in d.unserved.values())
        ch = dis = shift = 0.0
        for e, day in enumerate(ctx.days(y)):
            w = day.weight * d.delta_h
            for h in range(ctx.hours):
                for s in ctx.storage_zones:
                    ch += w * x[instance.column("p_ch", y, s, e, h)]
                    dis += w * x[instance.column("p_dis", y, s, e, h)]
                if d.flex:
                    for s in ctx.demand_zones:
                        for b in ctx.model.demand_blocks:
                            shift += w * (x[instance.column("dd_p", y, s, e, h, b.id)]
                                          - x[instance.column("dd_m", y, s, e, h, b.id)])
        residual = gen - curt + unserved + dis - ch - demand - shift
        rows.append({"epoch": y, "demand_mwh": demand, "generation_mwh": gen, "curtailed_mwh": curt,
                     "unserved_mwh": unserved, "storage_charge_mwh": ch, "storage_discharge_mwh": dis,
                     "net_shift_mwh": shift, "residual_mwh": residual})
    return rows


def emissions_rows(bd: CostBreakdown) -> list[dict]:
    return [{"epoch": y + 1, "co2_mmt": float(bd.co2_tons[y]) / MMT, "co2_cost_usd": float(bd.ec_co2[y]),
             "air_quality_cost_usd": float(bd.ec_local[y])} for y in range(bd.epochs)]


def emissions_zone_rows(bd: CostBreakdown) -> list[dict]:
    """Undiscounted air-quality damages per zone over each epoch ($)."""
    return [{"epoch": y, "zone": z, "air_quality_usd": v}
            for y in sorted(bd.local_damage_by_zone)
            for z, v in sorted(bd.local_damage_by_zone[y].items())]


def cost_rows(bd: CostBreakdown) -> list[dict]:
    rows = bd.rows()
    total = {"epoch": "total"}
    for k in rows[0] if rows else ():
        if k != "epoch":
            total[k] = sum(r[k] for r in rows)
    return rows + [total]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "0.0" if v == 0 else repr(v)
    return str(v)


COLUMNS = {
    "costs": ["epoch", "ic_gen", "ic_line", "ic_storage", "oc", "ec", "hard", "social"],
    "topology": ["line", "type", "from_zone", "to_zone", "locale", "current", "capacity_mw", "length_mi",
                 "build_epoch", "cost_usd"],
    "capacity": ["epoch", "zone", "tech", "existing_mw", "new_mw", "total_mw"],
    "storage": ["epoch", "zone", "power_mw", "energy_mwh"],
    "generation": ["epoch", "tech", "mwh_per_year", "share"],
    "energy_balance": ["epoch", "demand_mwh", "generation_mwh", "curtailed_mwh", "unserved_mwh",
                       "storage_charge_mwh", "storage_discharge_mwh", "net_shift_mwh", "residual_mwh"],
    "emissions": ["epoch", "co2_mmt", "co2_cost_usd", "air_quality_cost_usd"],
    "emissions_by_zone": ["epoch", "zone", "air_quality_usd"],
}


def write_csv(path: str | Path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c, "")) for c in columns])


def read_csv(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def build_tables(instance: MilpInstance, sol: PlanSolution, bd: CostBreakdown) -> dict[str, list[dict]]:
    L = instance.context.model.config.years_per_epoch
    return {
        "costs": cost_rows(bd),
        "topology": topology_rows(instance, sol),
        "capacity": capacity_rows(instance, sol),
        "storage": storage_rows(instance, sol),
        "generation": generation_rows(bd, L),
        "energy_balance": energy_balance_rows(instance, sol),
        "emissions": emissions_rows(bd),
        "emissions_by_zone": emissions_zone_rows(bd),
    }


def write_tables(outdir: str | Path, tables: dict[str, list[dict]]) -> dict[str, str]:
    """Write every table; returns ``{name: sha256}`` of the files."""
    out = Path(outdir)
    digests = {}
    for name in TABLES:
        p = out / f"{name}.csv"
        write_csv(p, tables[name], COLUMNS[name])
        digests[name] = hashlib.sha256(p.read_bytes()).hexdigest()
    return digests


# ---------------------------------------------------------------- figures

def render_plots(outdir: str | Path, tables: dict[str, list[dict]], title: str = "") -> list[str]:
    """Capacity, generation, cost and emissions figures as PNG files."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(outdir) / "plots"
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def stacked(ax, rows, key, value, epochs):
        cats = sorted({r[key] for r in rows})
        bottom = np.zeros(len(epochs))
        for cat in cats:
            vals = np.array([sum(float(r[value]) for r in rows if r[key] == cat and r["epoch"] == y)
                             for y in epochs])
            ax.bar([str(y) for y in epochs], vals, bottom=bottom, label=cat)
            bottom += vals
        if cats:
            ax.legend(fontsize=7, ncol=2)
        ax.set_xlabel("epoch")

    epochs = [r["epoch"] for r in tables["emissions"]]
    specs = [
        ("capacity", lambda ax: stacked(ax, tables["capacity"], "tech", "total_mw", epochs), "MW available"),
        ("generation", lambda ax: stacked(ax, tables["generation"], "tech", "mwh_per_year", epochs), "MWh per year"),
        ("costs", lambda ax: _cost_bars(ax, tables["costs"]), "discounted $"),
        ("emissions", lambda ax: ax.bar([str(r["epoch"]) for r in tables["emissions"]],
                                        [r["co2_mmt"] for r in tables["emissions"]]), "CO2 per epoch (MMT)"),
    ]
    for name, draw, ylabel in specs:
        fig, ax = plt.subplots(figsize=(6, 4))
        draw(ax)
        ax.set_ylabel(ylabel)
        ax.set_title(f"{title} {name}".strip())
        fig.tight_layout()
        p = out / f"{name}.png"
        fig.savefig(p, dpi=100, metadata={"Software": None})
        plt.close(fig)
        written.append(str(p))
    return written


def _cost_bars(ax, rows):
    rows = [r for r in rows if r["epoch"] != "total"]
    labels = [str(r["epoch"]) for r in rows]
    bottom = np.zeros(len(rows))
    for key in ("ic_gen", "ic_line", "ic_storage", "oc", "ec"):
        vals = np.array([r[key] for r in rows])
        ax.bar(labels, vals, bottom=bottom, label=key)
        bottom += vals
    ax.legend(fontsize=7)
    ax.set_xlabel("epoch")
