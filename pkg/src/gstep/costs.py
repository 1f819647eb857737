"""Discounting, annualisation and cost/externality accounting.

Conventions used throughout (all costs in dollars):

* an epoch ``y`` covers year offsets ``(y-1)L+1 .. yL`` where ``L`` is the
  epoch length; investments land in the epoch's first year;
* investment cost in epoch ``y`` of a build made in epoch ``n`` is
  ``CRF * sum_{t in years(y)} gamma_{t - a_n + 1}`` times the build cost,
  with ``a_n`` the first year of epoch ``n``;
* annual operating and externality terms are discounted year by year over
  the epoch: ``sum_{t in years(y)} (1+r)^-(t-1)`` times the annual amount.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

CO2 = "co2"

# calibrated offshore cable cost curves, million $ for length in miles
OFFSHORE_CABLES = {
    "HVAC-400": {"capacity": 400.0, "cost_model": "quadratic", "coefficients": (0.0229, 1.5093, 40.13), "current": "AC"},
    "HVDC-1400": {"capacity": 1400.0, "cost_model": "affine", "coefficients": (2.6763, 448.58), "current": "DC"},
    "HVDC-2200": {"capacity": 2200.0, "cost_model": "affine", "coefficients": (3.5421, 687.44), "current": "DC"},
}

ONSHORE_RATE_ISONE = 3888.5  # $/MW-mile
ONSHORE_RATE_PJM = 1499.85


def crf(r: float, n: int) -> float:
    """Capital recovery factor ``r(1+r)^n / ((1+r)^n - 1)``."""
    if r <= 0:
        raise ValueError("crf needs r > 0 (use 1/n for the zero-rate limit)")
    if n < 1:
        raise ValueError("crf needs n >= 1")
    g = (1.0 + r) ** n
    return r * g / (g - 1.0)


def available(n: int, lifetime: int) -> float:
    return 1.0 if 1 <= n <= lifetime else 0.0


def discount_factor(n: int, lifetime: int, r: float) -> float:
    """``1/(1+r)^(n-1)`` while the asset is within its lifetime, else 0."""
    if n < 1:
        raise ValueError("year offset starts at 1")
    return available(n, lifetime) / (1.0 + r) ** (n - 1)


@dataclass(frozen=True)
class EpochStructure:
    epochs: int
    years_per_epoch: int

    def years(self, y: int) -> range:
        a = (y - 1) * self.years_per_epoch + 1
        return range(a, a + self.years_per_epoch)

    def first_year(self, y: int) -> int:
        return (y - 1) * self.years_per_epoch + 1


def investment_weight(n: int, y: int, lifetime: int, r: float, es: EpochStructure) -> float:
    """Discounted annuity factor charged in epoch ``y`` per dollar built in epoch ``n``."""
    if n > y:
        return 0.0
    a = es.first_year(n)
    return crf(r, lifetime) * sum(discount_factor(t - a + 1, lifetime, r) for t in es.years(y))


def capacity_available(n: int, y: int, lifetime: int, es: EpochStructure) -> float:
    """Lifetime indicator for capacity built in epoch ``n`` seen from epoch ``y``.

    Capacity counts in ``y`` when it is alive at the start of that epoch.
    """
    if n > y:
        return 0.0
    return available(es.first_year(y) - es.first_year(n) + 1, lifetime)


def operation_weight(y: int, r: float, es: EpochStructure) -> float:
    """Year-by-year discounting over epoch ``y`` for an annual amount."""
    return float(sum(1.0 / (1.0 + r) ** (t - 1) for t in es.years(y)))


def annualized_investment(builds: Sequence[float], unit_cost, lifetime: int, r: float,
                          es: EpochStructure) -> np.ndarray:
    """Discounted investment cost per epoch for builds made in each epoch.

    ``unit_cost`` is a scalar or one cost per build epoch.
    """
    builds = np.asarray(builds, dtype=float)
    if np.any(builds < 0):
        raise ValueError("builds must be non-negative")
    cost = np.broadcast_to(np.asarray(unit_cost, dtype=float), builds.shape)
    out = np.zeros(es.epochs)
    for y in range(1, es.epochs + 1):
        for n in range(1, min(y, len(builds)) + 1):
            if builds[n - 1]:
                out[y - 1] += investment_weight(n, y, lifetime, r, es) * cost[n - 1] * builds[n - 1]
    return out


def offshore_cable_cost(length: float, line_type: str) -> float:
    """Calibrated offshore export system cost in million $."""
    if length < 0:
        raise ValueError("length must be non-negative")
    try:
        spec = OFFSHORE_CABLES[line_type]
    except KeyError:
        raise ValueError(f"unknown offshore cable type {line_type!r}") from None
    k = spec["coefficients"]
    if spec["cost_model"] == "quadratic":
        return k[0] * length**2 + k[1] * length + k[2]
    return k[0] * length + k[1]


def onshore_line_cost(capacity: float, length: float, rate: float) -> float:
    """Onshore reinforcement cost in $: capacity (MW) x length (mi) x rate ($/MW-mile)."""
    if min(capacity, length, rate) < 0:
        raise ValueError("arguments must be non-negative")
    return capacity * length * rate


# ---------------------------------------------------------------- operations

@dataclass
class EpochDispatch:
    """Operating outcome of one epoch on its representative days.

    Hourly arrays have shape ``(days, hours)`` and are MW; ``weights`` are
    day counts per year.  Unit metadata (costs, rates) travels with the
    dispatch so accounting does not need the optimisation model.
    """

    epoch: int
    weights: np.ndarray
    delta_h: float = 1.0
    generation: dict[str, np.ndarray] = field(default_factory=dict)
    var_cost: dict[str, float] = field(default_factory=dict)
    rates: dict[str, Mapping[str, float] | None] = field(default_factory=dict)
    unit_zone: dict[str, str] = field(default_factory=dict)
    unit_tech: dict[str, str] = field(default_factory=dict)
    capacity: dict[str, float] = field(default_factory=dict)
    fixed_cost: dict[str, float] = field(default_factory=dict)
    unserved: dict[str, np.ndarray] = field(default_factory=dict)
    curtailed: dict[str, np.ndarray] = field(default_factory=dict)
    flex: dict[tuple[str, str], np.ndarray] = field(default_factory=dict)
    flex_price: dict[str, float] = field(default_factory=dict)
    storage_power: dict[str, float] = field(default_factory=dict)
    storage_fixed_cost: float = 0.0
    shortfall: dict[str, float] = field(default_factory=dict)
    shortfall_price: dict[str, float] = field(default_factory=dict)
    pen_under: float = 0.0
    pen_over: float = 0.0

    def energy(self, series: np.ndarray) -> float:
        """Annual MWh of a (days, hours) MW series."""
        return float(self.weights @ np.asarray(series).sum(axis=1)) * self.delta_h


def annual_operation_cost(d: EpochDispatch) -> float:
    fixed = sum(d.fixed_cost.get(u, 0.0) * cap for u, cap in d.capacity.items())
    fixed += d.storage_fixed_cost * sum(d.storage_power.values())
    var = sum(d.var_cost.get(u, 0.0) * d.energy(p) for u, p in d.generation.items())
    pen = sum(d.pen_under * d.energy(v) for v in d.unserved.values())
    pen += sum(d.pen_over * d.energy(v) for v in d.curtailed.values())
    flex = sum(d.flex_price[b] * d.energy(np.abs(v)) for (_, b), v in d.flex.items())
    policy = sum(d.shortfall_price.get(j, 0.0) * v for j, v in d.shortfall.items())
    return fixed + var + pen + flex + policy


def operation_cost(dispatch: EpochDispatch, r: float, es: EpochStructure) -> float:
    """Discounted epoch operating cost: fixed O&M, variable cost, penalties,
    flexibility payments and policy non-compliance."""
    return annual_operation_cost(dispatch) * operation_weight(dispatch.epoch, r, es)


@dataclass
class Externalities:
    """Annual physical and monetised externality totals."""

    co2_tons: float = 0.0
    co2_cost: float = 0.0
    local_cost: float = 0.0
    local_by_zone: dict[str, float] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return self.co2_cost + self.local_cost


def annual_externalities(generation: Mapping[str, np.ndarray], rates: Mapping[str, Mapping[str, float] | None],
                         scc: float, weights: np.ndarray, delta_h: float = 1.0,
                         zones: Mapping[str, str] | None = None) -> Externalities:
    """``co2`` rates are t/MWh priced at ``scc``; other rates are $/MWh damages."""
    out = Externalities()
    w = np.asarray(weights, dtype=float)
    for u, p in generation.items():
        mwh = float(w @ np.asarray(p).sum(axis=1)) * delta_h
        if mwh == 0.0:
            continue
        rr = rates.get(u)
        if rr is None:
            raise ValueError(f"no externality rates for dispatched unit {u}")
        for key, v in rr.items():
            if key == CO2:
                out.co2_tons += v * mwh
                out.co2_cost += v * mwh * scc
            else:
                out.local_cost += v * mwh
                if zones is not None:
                    z = zones.get(u, "?")
                    out.local_by_zone[z] = out.local_by_zone.get(z, 0.0) + v * mwh
    return out


def externality_cost(generation: Mapping[str, np.ndarray], rates: Mapping[str, Mapping[str, float] | None],
                     scc: float, weights: np.ndarray, r: float, epoch: int, es: EpochStructure,
                     delta_h: float = 1.0) -> float:
    """Discounted epoch externality cost."""
    ann = annual_externalities(generation, rates, scc, weights, delta_h)
    return ann.total * operation_weight(epoch, r, es)


# ---------------------------------------------------------------- breakdown

COST_COLUMNS = ("ic_gen", "ic_line", "ic_storage", "oc", "ec")


@dataclass
class CostBreakdown:
    """Discounted cost components per epoch plus undiscounted physical totals.

    Physical totals are per epoch (annual amounts times the epoch length).
    """

    epochs: int
    ic_gen: np.ndarray
    ic_line: np.ndarray
    ic_storage: np.ndarray
    oc: np.ndarray
    ec: np.ndarray
    energy_by_tech: dict[int, dict[str, float]] = field(default_factory=dict)
    co2_tons: np.ndarray | None = None
    local_damage_by_zone: dict[int, dict[str, float]] = field(default_factory=dict)
    ec_co2: np.ndarray | None = None
    ec_local: np.ndarray | None = None

    @property
    def hard_cost(self) -> float:
        return float(self.ic_gen.sum() + self.ic_line.sum() + self.ic_storage.sum() + self.oc.sum())

    @property
    def externality(self) -> float:
        return float(self.ec.sum())

    def total(self, omega: float) -> float:
        return self.hard_cost + omega * self.externality

    @property
    def social_cost(self) -> float:
        return self.total(1.0)

    def rows(self) -> list[dict]:
        out = []
        for y in range(self.epochs):
            row = {"epoch": y + 1}
            for c in COST_COLUMNS:
                row[c] = float(getattr(self, c)[y])
            row["hard"] = row["ic_gen"] + row["ic_line"] + row["ic_storage"] + row["oc"]
            row["social"] = row["hard"] + row["ec"]
            out.append(row)
        return out

    def check(self, rel: float = 1e-6) -> None:
        for c in COST_COLUMNS:
            if np.any(getattr(self, c) < -rel * max(1.0, self.social_cost)):
                raise ValueError(f"negative cost component {c}")
        parts = sum(float(getattr(self, c).sum()) for c in COST_COLUMNS)
        if abs(parts - self.social_cost) > rel * max(1.0, abs(parts)):
            raise ValueError("cost total does not equal the sum of its parts")
