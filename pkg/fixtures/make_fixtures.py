"""Regenerate the fixture systems under fixtures/.

    python3 fixtures/make_fixtures.py

toy1..toy3 are hand-sized systems with their own scenario files.  The
ISO-NE- and PJM-shaped systems use the published project list, RPS table,
technology costs and line-cost rates; everything else in them (loads, unit
fleets, capacity factors, distances, susceptances) is SYNTHETIC fill-in
generated here from a fixed seed.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import yaml

HERE = Path(__file__).resolve().parent

WP = [383.0, 575.0, 1149.0, 5000.0]
BLOCKS = [{"id": f"b{i + 1}", "willingness_to_pay": w, "share": 0.25} for i, w in enumerate(WP)]

# technology costs by epoch
NG_CT = {"capex": [853045.52, 791643.79, 766425.22, 746688.95], "fixed_om": [21000.0] * 4,
         "var_om": [34.48, 39.29, 40.13, 40.50]}
NG_CCS = {"capex": [2209365.98, 2059151.02, 1917707.74, 1759817.57],
          "fixed_om": [62000.0, 61000.0, 60000.0, 60000.0], "var_om": [27.29, 29.46, 28.59, 28.54]}
WIND = {"capex": [1308400.0, 1052400.0, 921500.0, 874000.0],
        "fixed_om": [40165.0, 38365.75, 36905.13, 35444.50], "var_om": [0.0] * 4}
SOLAR = {"capex": [1073834.12, 843632.15, 731460.46, 697975.63],
         "fixed_om": [16983.15, 15020.43, 14521.95, 14029.36], "var_om": [0.0] * 4}
BATTERY = {"energy_capex": [254835.78, 178968.64, 151709.97, 141861.83],
           "power_capex": [236365.10, 252067.20, 254746.03, 238220.32],
           "fixed_om": [25375.77, 21819.24, 20421.28, 19023.33]}

# local air-quality damages ($/MWh) by technology; CO2 intensities (t/MWh) are synthetic
DAMAGE = {"gas_ccgt": 15.42, "gas_gt": 26.22, "gas_steam": 29.41, "coal": 60.38, "oil": 133.70}
CO2_RATE = {"gas_ccgt": 0.37, "gas_gt": 0.55, "gas_steam": 0.52, "coal": 1.0, "oil": 0.78}

HVAC_400 = {"id": "HVAC-400", "capacity": 400.0, "cost_model": "quadratic",
            "coefficients": [0.0229, 1.5093, 40.13], "current": "AC", "lifetime_years": 40}
HVDC_1400 = {"id": "HVDC-1400", "capacity": 1400.0, "cost_model": "affine",
             "coefficients": [2.6763, 448.58], "current": "DC", "lifetime_years": 40}
HVDC_2200 = {"id": "HVDC-2200", "capacity": 2200.0, "cost_model": "affine",
             "coefficients": [3.5421, 687.44], "current": "DC", "lifetime_years": 40}


def _rates(tech: str) -> dict:
    return {"co2": CO2_RATE[tech], "air_quality": DAMAGE[tech]}


def _tech(tid: str, costs: dict, epochs: int, **kw) -> dict:
    out = {"id": tid}
    for k, v in costs.items():
        out[k] = list(v[:epochs])
    out.update(kw)
    return out


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def _dump(path: Path, data: dict, header: str = "") -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    data = _plain(data)
    text = yaml.safe_dump(data, sort_keys=False, default_flow_style=None, width=110)
    path.write_text(header + text, encoding="utf-8")


def _scen(path: Path, epochs: dict, tau: int = 365) -> None:
    data = {"format": "gstep-scenarios/1", "k": 0, "seed": None, "tau": tau, "extremes": False,
            "epochs": epochs}
    path.write_text(json.dumps(data, indent=1), encoding="utf-8")


def toy1() -> None:
    d = HERE / "toy1"
    _dump(d / "system.yaml", {
        "name": "toy1",
        "config": {"epochs": 1, "years_per_epoch": 5, "hours_per_day": 24, "flex_fraction": 0.0},
        "zones": [{"id": "Z"}],
        "generators": [{"id": "G1", "zone": "Z", "tech": "gas_ccgt", "p_max": 200.0, "ramp": 120.0,
                        "var_cost": 30.0, "fixed_cost": 10000.0, "externality_rates": _rates("gas_ccgt")}],
        "scenarios": "scenarios.json",
    })
    h = np.arange(24)
    load = (110 + 35 * np.sin((h - 8) / 24 * 2 * np.pi)).round(3).tolist()
    _scen(d / "scenarios.json", {"1": [{"id": "d1", "kind": "normal", "weight": 365, "source_day": 1,
                                        "cluster": 0, "load": {"Z": load}, "profiles": {}}]})


def toy2() -> None:
    d = HERE / "toy2"
    E = 2
    _dump(d / "system.yaml", {
        "name": "toy2",
        "config": {"epochs": E, "years_per_epoch": 5, "hours_per_day": 6},
        "zones": [{"id": "A"}, {"id": "B"}],
        "line_types": [{"id": "UPG-AB", "capacity": 150.0, "cost_model": "per_mw_mile",
                        "coefficients": [3888.5], "current": "AC", "lifetime_years": 40}],
        "lines": [
            {"id": "AB", "from_zone": "A", "to_zone": "B", "susceptance": 300.0, "length": 50.0,
             "existing_capacity": 150.0},
            {"id": "AB-upg", "from_zone": "A", "to_zone": "B", "status": "candidate",
             "susceptance": 300.0, "length": 50.0, "allowed_types": ["UPG-AB"]},
        ],
        "generators": [
            {"id": "A_gas", "zone": "A", "tech": "gas_ccgt", "p_max": 300.0, "ramp": 150.0,
             "var_cost": 25.0, "fixed_cost": 15000.0, "externality_rates": _rates("gas_ccgt")},
            {"id": "B_ct", "zone": "B", "tech": "gas_gt", "p_max": 120.0, "ramp": 120.0,
             "var_cost": 80.0, "fixed_cost": 9000.0, "externality_rates": _rates("gas_gt")},
            {"id": "A_pv", "zone": "A", "tech": "solar", "dispatchable": False, "p_max": 120.0,
             "profile": "solar"},
        ],
        "technologies": [
            _tech("NG-CT", NG_CT, E, lifetime_years=30, buildable_zones=["B"],
                  externality_rates=_rates("gas_gt")),
            _tech("Solar", SOLAR, E, lifetime_years=30, buildable_zones=["A"], dispatchable=False,
                  profile="solar"),
        ],
        "storage": {"power_capex": BATTERY["power_capex"][:E], "energy_capex": BATTERY["energy_capex"][:E],
                    "fixed_om": BATTERY["fixed_om"][:E], "eta_ch": 0.86, "eta_dis": 0.86, "dod": 0.2,
                    "degradation": 0.06, "duration_hours": 4.0, "soc_init": 0.5, "lifetime_years": 15},
        "demand_blocks": BLOCKS,
        "scenarios": "scenarios.json",
    })
    la = [[150, 180, 230, 250, 220, 170], [140, 160, 200, 215, 190, 150], [190, 230, 280, 300, 270, 210]]
    lb = [[260, 300, 380, 400, 350, 280], [240, 270, 330, 350, 310, 250], [300, 360, 430, 460, 410, 330]]
    pv = [[0.0, 0.3, 0.7, 0.8, 0.4, 0.0], [0.0, 0.2, 0.5, 0.6, 0.3, 0.0], [0.0, 0.05, 0.15, 0.2, 0.1, 0.0]]
    days = [("n1", "normal", 199, 0), ("n2", "normal", 165, 1), ("x1", "extreme", 1, 0)]
    epochs = {}
    for y in range(1, E + 1):
        g = 1.0 + 0.08 * (y - 1)
        epochs[str(y)] = [
            {"id": f"e{y}-{i}", "kind": kind, "weight": w, "source_day": k + 1, "cluster": c,
             "load": {"A": [round(v * g, 3) for v in la[k]], "B": [round(v * g, 3) for v in lb[k]]},
             "profiles": {"solar": {"A": pv[k], "B": pv[k]}}}
            for k, (i, kind, w, c) in enumerate(days)
        ]
    _scen(d / "scenarios.json", epochs)


def toy3() -> None:
    """Two onshore zones, one offshore zone online in epoch 2, 2 x 2 export options."""
    d = HERE / "toy3"
    E = 2
    _dump(d / "system.yaml", {
        "name": "toy3",
        "config": {"epochs": E, "years_per_epoch": 5, "hours_per_day": 4},
        "zones": [{"id": "A", "region": "R1"}, {"id": "B"},
                  {"id": "W", "kind": "offshore", "online_epoch": 2}],
        "line_types": [HVAC_400, HVDC_1400],
        "lines": [
            {"id": "AB", "from_zone": "A", "to_zone": "B", "susceptance": 500.0, "length": 50.0,
             "existing_capacity": 300.0},
            {"id": "WA", "from_zone": "W", "to_zone": "A", "status": "candidate", "locale": "offshore",
             "susceptance": 400.0, "length": 20.0, "allowed_types": ["HVAC-400", "HVDC-1400"]},
            {"id": "WB", "from_zone": "W", "to_zone": "B", "status": "candidate", "locale": "offshore",
             "susceptance": 400.0, "length": 40.0, "allowed_types": ["HVAC-400", "HVDC-1400"]},
        ],
        "generators": [
            {"id": "A_coal", "zone": "A", "tech": "coal", "p_max": 400.0, "ramp": 200.0,
             "var_cost": 22.0, "fixed_cost": 40000.0, "externality_rates": _rates("coal")},
            {"id": "B_ccgt", "zone": "B", "tech": "gas_ccgt", "p_max": 500.0, "ramp": 250.0,
             "var_cost": 35.0, "fixed_cost": 20000.0, "externality_rates": _rates("gas_ccgt")},
            {"id": "B_gt", "zone": "B", "tech": "gas_gt", "p_max": 200.0, "ramp": 200.0,
             "var_cost": 70.0, "fixed_cost": 9000.0, "externality_rates": _rates("gas_gt")},
            {"id": "A_wind", "zone": "A", "tech": "wind", "dispatchable": False, "p_max": 100.0,
             "profile": "wind"},
            {"id": "W_osw", "zone": "W", "tech": "offshore_wind", "dispatchable": False, "p_max": 400.0,
             "profile": "offshore"},
        ],
        "technologies": [
            _tech("NG-CT", NG_CT, E, lifetime_years=30, buildable_zones=["A", "B"],
                  externality_rates=_rates("gas_gt")),
            _tech("Wind", WIND, E, lifetime_years=25, buildable_zones=["B"], dispatchable=False,
                  profile="wind"),
        ],
        "demand_blocks": BLOCKS,
        "policy_regions": [{"id": "R1", "rps_target": 0.2, "target_epoch": 2, "enforcement": "soft",
                            "penalty": 100.0}],
        "opoi": {"poi_zones": ["A", "B"], "distances": {"W": {"A": 20.0, "B": 40.0}},
                 "line_types": ["HVAC-400", "HVDC-1400"], "susceptance": 400.0},
        "scenarios": "scenarios.json",
    })
    la = [[300, 420, 520, 380], [260, 350, 430, 310]]
    lb = [[350, 480, 600, 420], [300, 400, 500, 360]]
    wind = [[0.5, 0.3, 0.2, 0.6], [0.2, 0.1, 0.15, 0.3]]
    osw = [[0.7, 0.5, 0.4, 0.8], [0.3, 0.2, 0.35, 0.5]]
    weights = [200, 165]
    epochs = {}
    for y in range(1, E + 1):
        g = 1.0 + 0.1 * (y - 1)
        epochs[str(y)] = [
            {"id": f"e{y}-n{k + 1}", "kind": "normal", "weight": weights[k], "source_day": k + 1,
             "cluster": k,
             "load": {"A": [round(v * g, 3) for v in la[k]], "B": [round(v * g, 3) for v in lb[k]]},
             "profiles": {"wind": {"A": wind[k], "B": wind[k]}, "offshore": {"W": osw[k]}}}
            for k in range(2)
        ]
    _scen(d / "scenarios.json", epochs)


# ---------------------------------------------------------------- ISO-NE / PJM shaped

SYNTHETIC_NOTE = (
    "# SYNTHETIC FILL-IN: loads, unit fleets, capacity factors, distances and\n"
    "# susceptances are generated by fixtures/make_fixtures.py (fixed seed) and are\n"
    "# not real system data.  Offshore projects, RPS targets, technology costs and\n"
    "# line-cost rates follow published values.\n"
)

ISONE_ZONES = {  # zone: (state/region, peak MW)
    "ME": ("ME", 2100.0), "NH": ("NH", 2600.0), "VT": ("VT", 1100.0), "CT": ("CT", 7200.0),
    "RI": ("RI", 1900.0), "SEMA": ("MA", 3700.0), "WCMA": ("MA", 4100.0), "NEMA": ("MA", 6200.0),
}
ISONE_RPS = {"ME": (2030, 0.80), "NH": (2025, 0.252), "VT": (2032, 0.75), "MA": (2030, 0.80),
             "CT": (2030, 0.48), "RI": (2035, 0.385)}
ISONE_CORRIDORS = [  # synthetic corridor set
    ("ME", "NH", 1900.0, 90.0), ("NH", "VT", 1200.0, 70.0), ("NH", "NEMA", 2800.0, 60.0),
    ("VT", "WCMA", 1000.0, 80.0), ("WCMA", "NEMA", 3000.0, 70.0), ("WCMA", "CT", 2800.0, 60.0),
    ("CT", "RI", 1500.0, 50.0), ("RI", "SEMA", 2500.0, 30.0), ("SEMA", "NEMA", 2400.0, 40.0),
    ("WCMA", "RI", 1200.0, 60.0),
]
# project: (online year, MW, fixed-POI zones)
ISONE_OSW = {
    "REV_CT": (2024, 304.0, ["CT"]), "REV_RI": (2024, 400.0, ["RI"]),
    "VINE": (2024, 800.0, ["SEMA"]), "PKCTY": (2025, 800.0, ["SEMA"]),
    "COMW": (2027, 1232.0, ["SEMA"]), "MFLR1": (2025, 804.0, ["SEMA"]),
    "MFLR2": (2025, 400.0, ["SEMA"]),
}
ISONE_POIS = ["ME", "NH", "NEMA", "CT", "RI", "SEMA"]
# desk-scale POI search: each hub's own landing(s) plus one alternative
ISONE_OPOI = {"REV": ["CT", "RI", "SEMA"], "VINE": ["SEMA", "RI"], "PKCTY": ["SEMA", "NEMA"],
              "COMW": ["SEMA", "NEMA"], "MFLR1": ["SEMA", "NEMA"], "MFLR2": ["SEMA", "RI"]}
# synthetic distances (miles) from each hub to each candidate POI
ISONE_DIST = {
    "REV": {"ME": 190.0, "NH": 140.0, "NEMA": 95.0, "CT": 60.0, "RI": 30.0, "SEMA": 45.0},
    "REV_CT": {"CT": 60.0}, "REV_RI": {"RI": 30.0},
    "VINE": {"ME": 180.0, "NH": 130.0, "NEMA": 80.0, "CT": 95.0, "RI": 55.0, "SEMA": 35.0},
    "PKCTY": {"ME": 185.0, "NH": 135.0, "NEMA": 85.0, "CT": 100.0, "RI": 60.0, "SEMA": 40.0},
    "COMW": {"ME": 190.0, "NH": 140.0, "NEMA": 90.0, "CT": 105.0, "RI": 65.0, "SEMA": 45.0},
    "MFLR1": {"ME": 175.0, "NH": 125.0, "NEMA": 75.0, "CT": 110.0, "RI": 70.0, "SEMA": 38.0},
    "MFLR2": {"ME": 178.0, "NH": 128.0, "NEMA": 78.0, "CT": 112.0, "RI": 72.0, "SEMA": 40.0},
}


# the ISO-NE and PJM fixtures plan 2023-2042 in two ten-year epochs (desk scale)
EPOCHS, EPOCH_YEARS = 2, 10
COST_YEARS = (2023, 2028, 2033, 2038)  # years of the per-epoch cost tables above


def _epoch_of(year: int, start: int = 2023) -> int:
    return max(1, min(EPOCHS, (year - start) // EPOCH_YEARS + 1))


def _pick(values) -> list:
    """Cost-table entries for the first year of each planning epoch."""
    return [values[COST_YEARS.index(2023 + EPOCH_YEARS * n)] for n in range(EPOCHS)]


def _tech_by_year(tid: str, costs: dict, **kw) -> dict:
    out = {"id": tid, **{k: _pick(v) for k, v in costs.items()}}
    out.update(kw)
    return out


def _synthetic_year(rng, zones: dict, offshore: list[str]):
    hours = 8760
    t = np.arange(hours)
    day = t // 24
    hod = t % 24
    season = 0.82 + 0.12 * np.cos(2 * np.pi * (day - 200) / 365) ** 2
    daily = 0.78 + 0.22 * np.sin(np.pi * np.clip(hod - 6, 0, 16) / 16)
    load = {}
    for z, (_, peak) in zones.items():
        noise = 1 + 0.04 * rng.standard_normal(365)[day]
        load[z] = np.round(peak * season * daily * noise, 3)
    solar = np.clip(np.sin(np.pi * (hod - 6) / 13), 0, None) * (0.7 + 0.3 * np.cos(2 * np.pi * (day - 172) / 365))
    solar = {z: np.round(np.clip(solar * (0.85 + 0.3 * rng.random(365)[day]), 0, 1), 4) for z in zones}

    def ar_wind(mean, n):
        x = np.zeros(hours)
        eps = rng.standard_normal(hours)
        for i in range(1, hours):
            x[i] = 0.97 * x[i - 1] + 0.25 * eps[i]
        return np.round(np.clip(mean + 0.18 * x, 0, 1), 4)

    wind = {z: ar_wind(0.33, hours) for z in zones}
    osw = {z: ar_wind(0.45, hours) for z in offshore}
    return load, solar, wind, osw


def _write_csv(path: Path, cols: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(cols)
    arr = np.column_stack([cols[c] for c in names])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for row in arr:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def isone() -> None:
    d = HERE / "isone"
    rng = np.random.default_rng(20230)
    load, solar, wind, osw = _synthetic_year(rng, ISONE_ZONES, list(ISONE_OSW) + ["REV"])
    osw["REV"] = np.round((304 * osw["REV_CT"] + 400 * osw["REV_RI"]) / 704, 6)
    _write_csv(d / "load.csv", load)
    _write_csv(d / "solar.csv", solar)
    _write_csv(d / "wind.csv", wind)
    _write_csv(d / "offshore.csv", osw)

    gens = []
    fleet = rng.random((len(ISONE_ZONES), 4))
    for (z, (_, peak)), f in zip(ISONE_ZONES.items(), fleet):
        gens.append({"id": f"{z}_ccgt", "zone": z, "tech": "gas_ccgt", "p_max": round(0.55 * peak, 1),
                     "ramp": round(0.3 * peak, 1), "var_cost": round(30 + 8 * f[0], 2),
                     "fixed_cost": 20000.0, "externality_rates": _rates("gas_ccgt")})
        gens.append({"id": f"{z}_gt", "zone": z, "tech": "gas_gt", "p_max": round(0.25 * peak, 1),
                     "ramp": round(0.25 * peak, 1), "var_cost": round(60 + 15 * f[1], 2),
                     "fixed_cost": 9000.0, "externality_rates": _rates("gas_gt")})
        if z in ("CT", "NEMA", "NH"):
            gens.append({"id": f"{z}_nuc", "zone": z, "tech": "nuclear", "p_max": round(0.3 * peak, 1),
                         "p_min": round(0.2 * peak, 1), "ramp": round(0.05 * peak, 1), "var_cost": 9.0,
                         "fixed_cost": 120000.0, "externality_rates": {"co2": 0.0}})
        if z in ("CT", "SEMA", "WCMA"):
            gens.append({"id": f"{z}_oil", "zone": z, "tech": "oil", "p_max": round(0.08 * peak, 1),
                         "ramp": round(0.08 * peak, 1), "var_cost": 150.0, "fixed_cost": 5000.0,
                         "externality_rates": _rates("oil"), "retire_epoch": _epoch_of(2033)})
        gens.append({"id": f"{z}_wind", "zone": z, "tech": "wind", "dispatchable": False,
                     "p_max": round(80 + 400 * f[2], 1), "profile": "wind"})
        gens.append({"id": f"{z}_pv", "zone": z, "tech": "solar", "dispatchable": False,
                     "p_max": round(100 + 500 * f[3], 1), "profile": "solar"})
    for p, (year, mw, _) in ISONE_OSW.items():
        gens.append({"id": f"{p}_osw", "zone": p, "tech": "offshore_wind", "dispatchable": False,
                     "p_max": mw, "profile": "offshore"})

    line_types = [HVAC_400, HVDC_1400, HVDC_2200]
    lines = []
    for a, b, cap, dist in ISONE_CORRIDORS:
        bpu = round(40000.0 / dist, 1)
        lines.append({"id": f"{a}-{b}", "from_zone": a, "to_zone": b, "susceptance": bpu,
                      "length": dist, "existing_capacity": cap})
    for a, b, cap, dist in ISONE_CORRIDORS:
        if (a, b) in (("SEMA", "NEMA"), ("RI", "SEMA"), ("WCMA", "CT")):
            tid = f"UPG-{a}-{b}"
            line_types.append({"id": tid, "capacity": cap, "cost_model": "per_mw_mile",
                               "coefficients": [3888.5], "current": "AC", "lifetime_years": 40})
            lines.append({"id": f"{a}-{b}-upg", "from_zone": a, "to_zone": b, "status": "candidate",
                          "susceptance": round(40000.0 / dist, 1), "length": dist, "allowed_types": [tid]})
    # no ISO-NE farm exceeds 1400 MW, so the 2200 MW bipole is left out of the candidate set
    osw_types = ["HVAC-400", "HVDC-1400"]
    for p, (year, mw, pois) in ISONE_OSW.items():
        for poi in pois:
            dist = ISONE_DIST[p][poi]
            lines.append({"id": f"{p}-{poi}", "from_zone": p, "to_zone": poi, "status": "candidate",
                          "locale": "offshore", "susceptance": round(20000.0 / dist, 1), "length": dist,
                          "allowed_types": osw_types})

    regions = sorted({s for s, _ in ISONE_ZONES.values()})
    policy = [{"id": s, "rps_target": ISONE_RPS[s][1], "target_epoch": _epoch_of(ISONE_RPS[s][0]),
               "enforcement": "soft", "penalty": 300.0} for s in regions]
    onshore = list(ISONE_ZONES)
    base = {
        "config": {"epochs": EPOCHS, "years_per_epoch": EPOCH_YEARS, "start_year": 2023, "base_year": 2022,
                   "load_growth": 0.023, "scc": 51.0},
        "line_types": line_types,
        "generators": gens,
        "technologies": [
            _tech_by_year("NG-CT", NG_CT, lifetime_years=30, buildable_zones=onshore,
                  externality_rates=_rates("gas_gt")),
            _tech_by_year("NG-CC-CCS", NG_CCS, lifetime_years=30, buildable_zones=["CT", "NEMA", "SEMA"],
                  externality_rates={"co2": 0.04, "air_quality": DAMAGE["gas_ccgt"]}),
            _tech_by_year("Wind", WIND, lifetime_years=25, buildable_zones=["ME", "NH", "VT"],
                  dispatchable=False, profile="wind"),
            _tech_by_year("Solar", SOLAR, lifetime_years=30, buildable_zones=onshore, dispatchable=False,
                  profile="solar"),
        ],
        "storage": {"power_capex": _pick(BATTERY["power_capex"]), "energy_capex": _pick(BATTERY["energy_capex"]),
                    "fixed_om": _pick(BATTERY["fixed_om"]), "eta_ch": 0.86, "eta_dis": 0.86, "dod": 0.2,
                    "degradation": 0.06, "duration_hours": 4.0, "soc_init": 0.5, "lifetime_years": 15,
                    "buildable_zones": ["CT", "NEMA", "SEMA"]},
        "demand_blocks": BLOCKS,
        "policy_regions": policy,
        "timeseries": {"load": "load.csv",
                       "profiles": {"wind": "wind.csv", "solar": "solar.csv", "offshore": "offshore.csv"}},
    }
    zones = [{"id": z, "region": s} for z, (s, _) in ISONE_ZONES.items()]
    zones += [{"id": p, "kind": "offshore", "online_epoch": _epoch_of(y)} for p, (y, _, _) in ISONE_OSW.items()]
    fixed = {"name": "isone", **{"config": base["config"]}, "zones": zones, "lines": lines, **{
        k: v for k, v in base.items() if k != "config"}}
    fixed["opoi"] = {"poi_zones": sorted({q for qs in ISONE_OPOI.values() for q in qs}),
                     "distances": {p: {q: ISONE_DIST[p][q] for q in qs} for p, qs in ISONE_OPOI.items()},
                     "merge": {"REV": ["REV_CT", "REV_RI"]}, "line_types": osw_types,
                     "susceptance": 400.0}
    _dump(d / "system.yaml", fixed, SYNTHETIC_NOTE)

    # single-REV variant: one offshore zone per project
    zones1 = [z for z in zones if z["id"] not in ("REV_CT", "REV_RI")]
    zones1.insert(len(ISONE_ZONES), {"id": "REV", "kind": "offshore", "online_epoch": _epoch_of(2024)})
    lines1 = [l for l in lines if not l["id"].startswith("REV_")]
    for poi in ("CT", "RI"):
        dist = ISONE_DIST["REV"][poi]
        lines1.append({"id": f"REV-{poi}", "from_zone": "REV", "to_zone": poi, "status": "candidate",
                       "locale": "offshore", "susceptance": round(20000.0 / dist, 1), "length": dist,
                       "allowed_types": osw_types})
    gens1 = [g for g in gens if not g["id"].startswith("REV_")]
    gens1.append({"id": "REV_osw", "zone": "REV", "tech": "offshore_wind", "dispatchable": False,
                  "p_max": 704.0, "profile": "offshore"})
    single = dict(fixed, name="isone-single-rev", zones=zones1, lines=lines1, generators=gens1)
    single["opoi"] = dict(fixed["opoi"], merge={})
    _dump(d / "system_single_rev.yaml", single, SYNTHETIC_NOTE)
    (d / "SYNTHETIC.md").write_text(
        "# ISO-NE-shaped fixture\n\n" + SYNTHETIC_NOTE.replace("# ", "").replace("#", "") +
        "\n`system.yaml` splits Revolution Wind into REV_CT (304 MW) and REV_RI (400 MW) for the\n"
        "fixed point-of-interconnection studies; `system_single_rev.yaml` keeps one REV zone\n"
        "(704 MW), which is how the POI-optimising mode sees it.\n", encoding="utf-8")


PJM_ZONES = {"NJ": ("NJ", 9000.0), "DE": ("DE", 2500.0), "MD": ("MD", 6000.0), "VA": ("VA", 11000.0),
             "PA": ("PA", 12000.0)}
PJM_OSW = {"OCW": (2026, 1100.0, ["NJ"]), "ATL": (2027, 1500.0, ["NJ"]),
           "SKP": (2026, 966.0, ["DE"]), "CVOW": (2026, 2600.0, ["VA"])}


def pjm() -> None:
    d = HERE / "pjm"
    rng = np.random.default_rng(20231)
    load, solar, wind, osw = _synthetic_year(rng, PJM_ZONES, list(PJM_OSW))
    _write_csv(d / "load.csv", load)
    _write_csv(d / "solar.csv", solar)
    _write_csv(d / "wind.csv", wind)
    _write_csv(d / "offshore.csv", osw)
    gens = []
    for z, (_, peak) in PJM_ZONES.items():
        gens.append({"id": f"{z}_ccgt", "zone": z, "tech": "gas_ccgt", "p_max": round(0.6 * peak, 1),
                     "ramp": round(0.3 * peak, 1), "var_cost": 32.0, "fixed_cost": 20000.0,
                     "externality_rates": _rates("gas_ccgt")})
        gens.append({"id": f"{z}_coal", "zone": z, "tech": "coal", "p_max": round(0.3 * peak, 1),
                     "ramp": round(0.1 * peak, 1), "var_cost": 24.0, "fixed_cost": 45000.0,
                     "externality_rates": _rates("coal"), "retire_epoch": _epoch_of(2033)})
        gens.append({"id": f"{z}_gt", "zone": z, "tech": "gas_gt", "p_max": round(0.2 * peak, 1),
                     "ramp": round(0.2 * peak, 1), "var_cost": 70.0, "fixed_cost": 9000.0,
                     "externality_rates": _rates("gas_gt")})
        gens.append({"id": f"{z}_pv", "zone": z, "tech": "solar", "dispatchable": False,
                     "p_max": round(0.05 * peak, 1), "profile": "solar"})
    for p, (y, mw, _) in PJM_OSW.items():
        gens.append({"id": f"{p}_osw", "zone": p, "tech": "offshore_wind", "dispatchable": False,
                     "p_max": mw, "profile": "offshore"})
    corridors = [("NJ", "PA", 5000.0, 80.0), ("DE", "MD", 2500.0, 60.0), ("MD", "VA", 4000.0, 70.0),
                 ("MD", "PA", 3500.0, 90.0), ("NJ", "DE", 1500.0, 70.0)]
    line_types = [HVAC_400, HVDC_1400, HVDC_2200]
    lines = [{"id": f"{a}-{b}", "from_zone": a, "to_zone": b, "susceptance": round(40000.0 / L, 1),
              "length": L, "existing_capacity": c} for a, b, c, L in corridors]
    for a, b, c, L in corridors[:2]:
        tid = f"UPG-{a}-{b}"
        line_types.append({"id": tid, "capacity": c, "cost_model": "per_mw_mile",
                           "coefficients": [1499.85], "current": "AC", "lifetime_years": 40})
        lines.append({"id": f"{a}-{b}-upg", "from_zone": a, "to_zone": b, "status": "candidate",
                      "susceptance": round(40000.0 / L, 1), "length": L, "allowed_types": [tid]})
    dist = {"OCW": {"NJ": 25.0, "DE": 60.0}, "ATL": {"NJ": 30.0, "DE": 70.0},
            "SKP": {"DE": 25.0, "MD": 45.0}, "CVOW": {"VA": 35.0, "MD": 90.0}}
    osw_types = ["HVAC-400", "HVDC-1400", "HVDC-2200"]
    for p, (y, mw, pois) in PJM_OSW.items():
        for poi in pois:
            L = dist[p][poi]
            lines.append({"id": f"{p}-{poi}", "from_zone": p, "to_zone": poi, "status": "candidate",
                          "locale": "offshore", "susceptance": round(20000.0 / L, 1), "length": L,
                          "allowed_types": osw_types})
    onshore = list(PJM_ZONES)
    system = {
        "name": "pjm",
        "config": {"epochs": EPOCHS, "years_per_epoch": EPOCH_YEARS, "start_year": 2023, "base_year": 2022,
                   "load_growth": 0.015, "scc": 51.0},
        "zones": [{"id": z, "region": "NJ"} if z == "NJ" else {"id": z} for z in PJM_ZONES]
        + [{"id": p, "kind": "offshore", "online_epoch": _epoch_of(y)} for p, (y, _, _) in PJM_OSW.items()],
        "line_types": line_types,
        "lines": lines,
        "generators": gens,
        "technologies": [
            _tech_by_year("NG-CT", NG_CT, lifetime_years=30, buildable_zones=onshore,
                  externality_rates=_rates("gas_gt")),
            _tech_by_year("Solar", SOLAR, lifetime_years=30, buildable_zones=onshore, dispatchable=False,
                  profile="solar"),
        ],
        "storage": {"power_capex": _pick(BATTERY["power_capex"]), "energy_capex": _pick(BATTERY["energy_capex"]),
                    "fixed_om": _pick(BATTERY["fixed_om"]), "buildable_zones": ["NJ", "VA"]},
        "demand_blocks": BLOCKS,
        "policy_regions": [{"id": "NJ", "rps_target": 0.35, "target_epoch": 2, "enforcement": "soft",
                            "penalty": 300.0}],
        "opoi": {"poi_zones": ["NJ", "DE", "MD", "VA"], "distances": dist, "line_types": osw_types,
                 "susceptance": 400.0},
        "timeseries": {"load": "load.csv",
                       "profiles": {"wind": "wind.csv", "solar": "solar.csv", "offshore": "offshore.csv"}},
    }
    _dump(d / "system.yaml", system, SYNTHETIC_NOTE)
    (d / "SYNTHETIC.md").write_text("# PJM-shaped fixture\n\n" + SYNTHETIC_NOTE.replace("# ", "").replace("#", ""),
                                    encoding="utf-8")


if __name__ == "__main__":
    toy1()
    toy2()
    toy3()
    isone()
    pjm()
