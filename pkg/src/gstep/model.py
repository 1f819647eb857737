"""Planning-problem data model: zones, lines, units, storage, policies and config.

A system is described by one YAML file plus optional CSV time series; see
``docs/format.md`` for the field-by-field schema.  Objects are frozen
dataclasses; :func:`load_system` validates everything before returning.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import math
import types
import typing
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

ONSHORE = "onshore"
OFFSHORE = "offshore"
AC = "AC"
DC = "DC"
EXISTING = "existing"
CANDIDATE = "candidate"


class ModelError(Exception):
    """Base class for system-description errors."""


class SystemFormatError(ModelError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        self.message = message
        where = ""
        if path:
            where += f"{path}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)


class DanglingReferenceError(ModelError):
    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class InvariantViolation(ModelError):
    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


@dataclass(frozen=True)
class Violation:
    entity: str
    rule: str
    detail: str = ""

    def __str__(self) -> str:
        s = f"{self.entity}: {self.rule}"
        return f"{s} ({self.detail})" if self.detail else s


@dataclass(frozen=True)
class Zone:
    id: str
    kind: str = ONSHORE
    online_epoch: int | None = None
    region: str | None = None


@dataclass(frozen=True)
class LineType:
    """Discrete build option for candidate lines.

    ``cost_model`` selects how ``coefficients`` are read:

    * ``fixed``: ``(M$,)`` per line
    * ``per_mw_mile``: ``($/MW-mile,)`` times capacity and length
    * ``affine``: ``(slope, intercept)`` in M$ per mile and M$
    * ``quadratic``: ``(a, b, c)`` for ``a l^2 + b l + c`` in M$
    """

    id: str
    capacity: float
    cost_model: str = "fixed"
    coefficients: tuple[float, ...] = (0.0,)
    current: str | None = None
    lifetime_years: int = 40

    def cost(self, length: float) -> float:
        """Investment cost in dollars for a line of ``length`` miles."""
        k = self.coefficients
        if self.cost_model == "fixed":
            return k[0] * 1e6
        if self.cost_model == "per_mw_mile":
            return self.capacity * length * k[0]
        if self.cost_model == "affine":
            return (k[0] * length + k[1]) * 1e6
        if self.cost_model == "quadratic":
            return (k[0] * length**2 + k[1] * length + k[2]) * 1e6
        raise ValueError(f"unknown cost model {self.cost_model!r}")


COST_MODEL_ARITY = {"fixed": 1, "per_mw_mile": 1, "affine": 2, "quadratic": 3}


@dataclass(frozen=True)
class Line:
    id: str
    from_zone: str
    to_zone: str
    current: str = AC
    status: str = EXISTING
    locale: str = ONSHORE
    susceptance: float | None = None
    length: float = 0.0
    allowed_types: tuple[str, ...] = ()
    existing_capacity: float | None = None


@dataclass(frozen=True)
class Generator:
    """Existing unit.  New capacity comes from :class:`TechnologyOption`."""

    id: str
    zone: str
    tech: str
    dispatchable: bool = True
    status: str = EXISTING
    p_min: float = 0.0
    p_max: float = 0.0
    ramp: float | None = None
    var_cost: float = 0.0
    fixed_cost: float = 0.0
    externality_rates: dict[str, float] = field(default_factory=dict)
    profile: str | None = None
    online_epoch: int = 1
    retire_epoch: int | None = None

    @property
    def ramp_rate(self) -> float:
        return self.p_max if self.ramp is None else self.ramp

    def available(self, epoch: int) -> bool:
        return self.online_epoch <= epoch and (self.retire_epoch is None or epoch < self.retire_epoch)


@dataclass(frozen=True)
class TechnologyOption:
    id: str
    capex: tuple[float, ...]
    fixed_om: tuple[float, ...]
    var_om: tuple[float, ...]
    lifetime_years: int = 30
    buildable_zones: tuple[str, ...] = ()
    dispatchable: bool = True
    profile: str | None = None
    ramp_fraction: float = 1.0
    externality_rates: dict[str, float] = field(default_factory=dict)
    max_build: float | None = None

    def unit_id(self, zone: str) -> str:
        return f"new:{self.id}@{zone}"


@dataclass(frozen=True)
class StorageSpec:
    power_capex: tuple[float, ...]
    energy_capex: tuple[float, ...]
    fixed_om: tuple[float, ...]
    eta_ch: float = 0.86
    eta_dis: float = 0.86
    dod: float = 0.2
    degradation: float = 0.06
    duration_hours: float = 4.0
    soc_init: float = 0.5
    lifetime_years: int = 15
    buildable_zones: tuple[str, ...] | None = None
    max_power: float | None = None


@dataclass(frozen=True)
class DemandBlock:
    id: str
    willingness_to_pay: float
    share: float


@dataclass(frozen=True)
class PolicyRegion:
    id: str
    rps_target: float = 0.0
    target_epoch: int = 1
    enforcement: str = "strict"
    penalty: float = 0.0


@dataclass(frozen=True)
class PlanningConfig:
    epochs: int = 4
    years_per_epoch: int = 5
    start_year: int = 2023
    base_year: int = 2022
    discount_rate: float = 0.05
    tau: int = 365
    hours_per_day: int = 24
    pen_under: float = 5000.0
    pen_over: float = 0.0
    flex_fraction: float = 0.1
    curtail_fraction: float = 0.5
    reserve_load_fraction: float = 0.03
    reserve_intermittent_fraction: float = 0.05
    reserve_scope: str = "system"
    delta_h: float = 1.0
    delta_h_reserve: float = 1.0 / 6.0
    build_delay: int = 0
    externality_weight: float = 1.0
    scc: float = 51.0
    big_m: float | None = None
    mip_gap: float = 1e-4
    load_growth: float = 0.0

    def epoch_years(self, epoch: int) -> list[int]:
        """1-based year offsets covered by ``epoch`` (1-based)."""
        a = (epoch - 1) * self.years_per_epoch + 1
        return list(range(a, a + self.years_per_epoch))

    def final_calendar_year(self, epoch: int) -> int:
        return self.start_year + epoch * self.years_per_epoch - 1


@dataclass(frozen=True)
class OpoiSpec:
    """Point-of-interconnection optimisation: merged zones and extra candidates."""

    poi_zones: tuple[str, ...] = ()
    distances: dict[str, dict[str, float]] = field(default_factory=dict)
    merge: dict[str, tuple[str, ...]] = field(default_factory=dict)
    line_types: tuple[str, ...] = ()
    susceptance: float | None = None


@dataclass(frozen=True, eq=False)
class HourlyTable:
    columns: tuple[str, ...]
    values: np.ndarray

    def __eq__(self, other):
        return (isinstance(other, HourlyTable) and self.columns == other.columns
                and self.values.shape == other.values.shape
                and bool(np.array_equal(self.values, other.values)))

    def __hash__(self):
        return hash(self.columns)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def has(self, name: str) -> bool:
        return name in self.columns


@dataclass(frozen=True)
class TimeSeries:
    """Source-year hourly data.  ``files`` keeps the CSV names used on disk."""

    load: HourlyTable
    profiles: dict[str, HourlyTable] = field(default_factory=dict)
    files: dict[str, str] = field(default_factory=dict, compare=False)

    @property
    def hours(self) -> int:
        return self.load.values.shape[0]


@dataclass(frozen=True)
class SystemModel:
    name: str
    config: PlanningConfig
    zones: tuple[Zone, ...]
    lines: tuple[Line, ...] = ()
    line_types: tuple[LineType, ...] = ()
    generators: tuple[Generator, ...] = ()
    tech_options: tuple[TechnologyOption, ...] = ()
    storage: StorageSpec | None = None
    demand_blocks: tuple[DemandBlock, ...] = ()
    policy_regions: tuple[PolicyRegion, ...] = ()
    opoi: OpoiSpec | None = None
    timeseries: TimeSeries | None = None
    scenarios: str | None = None
    source: Path | None = field(default=None, compare=False, repr=False)

    def zone(self, zid: str) -> Zone:
        return self._by_id("zones")[zid]

    def line(self, lid: str) -> Line:
        return self._by_id("lines")[lid]

    def line_type(self, cid: str) -> LineType:
        return self._by_id("line_types")[cid]

    def tech(self, kid: str) -> TechnologyOption:
        return self._by_id("tech_options")[kid]

    def generator(self, gid: str) -> Generator:
        return self._by_id("generators")[gid]

    def _by_id(self, attr: str) -> dict:
        cache = self.__dict__.setdefault("_cache", {})
        if attr not in cache:
            cache[attr] = {o.id: o for o in getattr(self, attr)}
        return cache[attr]

    @property
    def onshore(self) -> list[Zone]:
        return [z for z in self.zones if z.kind == ONSHORE]

    @property
    def offshore(self) -> list[Zone]:
        return [z for z in self.zones if z.kind == OFFSHORE]

    @property
    def candidates(self) -> list[Line]:
        return [l for l in self.lines if l.status == CANDIDATE]

    @property
    def existing_lines(self) -> list[Line]:
        return [l for l in self.lines if l.status == EXISTING]

    def line_current(self, line: Line, type_id: str | None = None) -> str:
        if type_id is not None:
            t = self.line_type(type_id)
            if t.current:
                return t.current
        return line.current

    def storage_zones(self) -> list[str]:
        if self.storage is None:
            return []
        if self.storage.buildable_zones is None:
            return [z.id for z in self.onshore]
        return list(self.storage.buildable_zones)

    def big_m(self) -> float:
        if self.config.big_m is not None:
            return self.config.big_m
        return default_big_m(self)

    def content_hash(self) -> str:
        """Stable digest of the system content, used to match study outputs."""
        h = hashlib.sha256()
        h.update(yaml.safe_dump(_to_plain(self, include_ts=False), sort_keys=True).encode())
        if self.timeseries is not None:
            for tab in [self.timeseries.load, *[self.timeseries.profiles[k]
                                                 for k in sorted(self.timeseries.profiles)]]:
                h.update(",".join(tab.columns).encode())
                h.update(np.ascontiguousarray(tab.values, dtype=float).tobytes())
        return h.hexdigest()[:16]


def default_big_m(model: SystemModel) -> float:
    bs = [l.susceptance for l in model.candidates
          if l.susceptance and any(model.line_current(l, c) == AC for c in l.allowed_types)]
    if model.opoi is not None and model.opoi.susceptance:
        bs.append(model.opoi.susceptance)
    return 2 * math.pi * max(bs, default=1.0) * 1.1


# ---------------------------------------------------------------- validation

def validate_system(model: SystemModel) -> list[Violation]:
    """Return every invariant violation; an empty list means the model is valid."""
    out: list[Violation] = []
    cfg = model.config
    Y = cfg.epochs
    add = out.append

    for attr in ("zones", "lines", "line_types", "generators", "tech_options",
                 "demand_blocks", "policy_regions"):
        seen = set()
        for o in getattr(model, attr):
            if o.id in seen:
                add(Violation(f"{attr}:{o.id}", "duplicate id"))
            seen.add(o.id)

    zones = {z.id: z for z in model.zones}
    regions = {p.id for p in model.policy_regions}
    types = {t.id: t for t in model.line_types}

    # config
    if Y < 1 or cfg.years_per_epoch < 1:
        add(Violation("config", "epochs out of range"))
    for f in ("discount_rate", "flex_fraction", "curtail_fraction", "reserve_load_fraction",
              "reserve_intermittent_fraction", "delta_h_reserve", "mip_gap"):
        v = getattr(cfg, f)
        if not 0.0 <= v <= 1.0:
            add(Violation("config", f"{f} out of range", f"{v}"))
    if cfg.discount_rate <= 0:
        add(Violation("config", "discount_rate must be positive"))
    if cfg.tau < 1 or cfg.hours_per_day < 1 or cfg.delta_h <= 0:
        add(Violation("config", "time resolution out of range"))
    if cfg.reserve_scope not in ("system", "zone"):
        add(Violation("config", "unknown reserve scope", cfg.reserve_scope))
    if cfg.build_delay < 0 or cfg.build_delay >= Y:
        add(Violation("config", "build delay out of range"))
    if min(cfg.pen_under, cfg.pen_over, cfg.scc, cfg.externality_weight) < 0:
        add(Violation("config", "negative price"))
    if cfg.big_m is not None:
        need = default_big_m(model) / 1.1
        if cfg.big_m <= need:
            add(Violation("config", "big_m too small", f"{cfg.big_m} <= {need:.6g}"))

    # zones
    if not any(z.kind == ONSHORE for z in model.zones):
        add(Violation("system", "no onshore zone"))
    for z in model.zones:
        e = f"zone:{z.id}"
        if z.kind not in (ONSHORE, OFFSHORE):
            add(Violation(e, "unknown zone kind", z.kind))
        elif z.kind == ONSHORE:
            if z.online_epoch is not None:
                add(Violation(e, "onshore zone with online epoch"))
        else:
            if z.online_epoch is None or not 1 <= z.online_epoch <= Y:
                add(Violation(e, "offshore online epoch out of range"))
            if z.region is not None:
                add(Violation(e, "region on offshore zone"))
        if z.region is not None and z.region not in regions:
            add(Violation(e, "dangling reference", f"region {z.region}"))

    # line types
    for t in model.line_types:
        e = f"line_type:{t.id}"
        if not t.capacity > 0:
            add(Violation(e, "capacity must be positive"))
        if t.cost_model not in COST_MODEL_ARITY:
            add(Violation(e, "unknown cost model", t.cost_model))
            continue
        if len(t.coefficients) != COST_MODEL_ARITY[t.cost_model]:
            add(Violation(e, "wrong number of cost coefficients"))
            continue
        if not _cost_nonnegative(t):
            add(Violation(e, "negative cost for some length"))
        if t.current not in (None, AC, DC):
            add(Violation(e, "unknown current", str(t.current)))
        if t.lifetime_years < 1:
            add(Violation(e, "lifetime out of range"))

    # lines
    for l in model.lines:
        e = f"line:{l.id}"
        for zid in (l.from_zone, l.to_zone):
            if zid not in zones:
                add(Violation(e, "dangling reference", f"zone {zid}"))
        if l.from_zone == l.to_zone:
            add(Violation(e, "line endpoints coincide"))
        if l.current not in (AC, DC):
            add(Violation(e, "unknown current", l.current))
        if l.status not in (EXISTING, CANDIDATE):
            add(Violation(e, "unknown status", l.status))
        if l.locale not in (ONSHORE, OFFSHORE):
            add(Violation(e, "unknown locale", l.locale))
        if l.length < 0:
            add(Violation(e, "negative length"))
        if l.current == DC and l.susceptance is not None:
            add(Violation(e, "susceptance on DC line"))
        if l.status == EXISTING:
            if not (l.existing_capacity or 0) > 0:
                add(Violation(e, "existing line without positive capacity"))
            if l.current == AC and not (l.susceptance or 0) > 0:
                add(Violation(e, "AC line without positive susceptance"))
        elif l.status == CANDIDATE:
            if not l.allowed_types:
                add(Violation(e, "candidate without line types"))
            for c in l.allowed_types:
                if c not in types:
                    add(Violation(e, "dangling reference", f"line type {c}"))
                elif model.line_current(l, c) == AC and not (l.susceptance or 0) > 0:
                    add(Violation(e, "AC candidate without positive susceptance", c))

    # generators
    profiles = model.timeseries.profiles if model.timeseries else None
    for g in model.generators:
        e = f"generator:{g.id}"
        if g.zone not in zones:
            add(Violation(e, "dangling reference", f"zone {g.zone}"))
        if g.status != EXISTING:
            add(Violation(e, "only existing units may be listed", g.status))
        if not 0 <= g.p_min <= g.p_max:
            add(Violation(e, "capacity limits out of order"))
        if g.ramp is not None and g.ramp < 0:
            add(Violation(e, "negative ramp"))
        if g.var_cost < 0 or g.fixed_cost < 0:
            add(Violation(e, "negative cost"))
        if any(v < 0 for v in g.externality_rates.values()):
            add(Violation(e, "negative externality rate"))
        if not g.dispatchable:
            if not g.profile:
                add(Violation(e, "intermittent unit without profile"))
            if g.p_min != 0:
                add(Violation(e, "intermittent unit with positive minimum"))
        if g.profile and profiles is not None:
            tab = profiles.get(g.profile)
            if tab is None or not tab.has(g.zone):
                add(Violation(e, "dangling reference", f"profile {g.profile}/{g.zone}"))
        if g.online_epoch < 1 or (g.retire_epoch is not None and g.retire_epoch <= g.online_epoch):
            add(Violation(e, "availability epochs out of order"))

    # technologies
    for k in model.tech_options:
        e = f"tech:{k.id}"
        for f in ("capex", "fixed_om", "var_om"):
            s = getattr(k, f)
            if len(s) != Y:
                add(Violation(e, "cost series length", f"{f} has {len(s)} entries, need {Y}"))
            if any(v < 0 for v in s):
                add(Violation(e, "negative cost", f))
        if k.lifetime_years < 1:
            add(Violation(e, "lifetime out of range"))
        for zid in k.buildable_zones:
            if zid not in zones:
                add(Violation(e, "dangling reference", f"zone {zid}"))
        if not k.dispatchable and not k.profile:
            add(Violation(e, "intermittent technology without profile"))
        if k.profile and profiles is not None:
            tab = profiles.get(k.profile)
            missing = [z for z in k.buildable_zones if tab is None or not tab.has(z)]
            if missing:
                add(Violation(e, "dangling reference", f"profile {k.profile}/{missing[0]}"))
        if not 0 <= k.ramp_fraction <= 1:
            add(Violation(e, "ramp fraction out of range"))
        if any(v < 0 for v in k.externality_rates.values()):
            add(Violation(e, "negative externality rate"))

    # storage
    s = model.storage
    if s is not None:
        e = "storage"
        if not (0 < s.eta_ch <= 1 and 0 < s.eta_dis <= 1):
            add(Violation(e, "efficiency out of range"))
        if not 0 <= s.dod < 1:
            add(Violation(e, "dod out of range", f"{s.dod}"))
        if not 0 <= s.degradation < 1:
            add(Violation(e, "degradation out of range"))
        if not s.duration_hours > 0:
            add(Violation(e, "duration out of range"))
        if not s.dod <= s.soc_init <= 1:
            add(Violation(e, "initial state of charge out of range"))
        if s.lifetime_years < 1:
            add(Violation(e, "lifetime out of range"))
        for f in ("power_capex", "energy_capex", "fixed_om"):
            if len(getattr(s, f)) != Y:
                add(Violation(e, "cost series length", f))
        for zid in s.buildable_zones or ():
            if zid not in zones:
                add(Violation(e, "dangling reference", f"zone {zid}"))

    # demand blocks
    if model.demand_blocks:
        if abs(sum(b.share for b in model.demand_blocks) - 1.0) > 1e-9:
            add(Violation("demand_blocks", "shares do not sum to 1"))
        for b in model.demand_blocks:
            if b.willingness_to_pay < 0 or b.share < 0:
                add(Violation(f"demand_block:{b.id}", "negative value"))

    # policies
    for p in model.policy_regions:
        e = f"policy:{p.id}"
        if not 0 <= p.rps_target <= 1:
            add(Violation(e, "rps out of range"))
        if not 1 <= p.target_epoch <= Y:
            add(Violation(e, "target epoch out of range"))
        if p.enforcement not in ("strict", "soft"):
            add(Violation(e, "unknown enforcement", p.enforcement))
        if p.penalty < 0:
            add(Violation(e, "negative penalty"))

    # offshore reachability over candidate and existing lines
    adj: dict[str, set[str]] = {z: set() for z in zones}
    has_candidate: dict[str, bool] = {z: False for z in zones}
    for l in model.lines:
        if l.from_zone in zones and l.to_zone in zones:
            adj[l.from_zone].add(l.to_zone)
            adj[l.to_zone].add(l.from_zone)
            if l.status == CANDIDATE:
                has_candidate[l.from_zone] = has_candidate[l.to_zone] = True
    existing_incident = {z: False for z in zones}
    for l in model.existing_lines:
        for zid in (l.from_zone, l.to_zone):
            if zid in zones:
                existing_incident[zid] = True
    for z in model.zones:
        if z.kind != OFFSHORE:
            continue
        if not (has_candidate[z.id] or existing_incident[z.id]) or not _reaches_onshore(z.id, adj, zones):
            add(Violation(f"zone:{z.id}", "offshore unreachable"))

    # opoi
    if model.opoi is not None:
        o = model.opoi
        for zid in o.poi_zones:
            if zid not in zones or zones[zid].kind != ONSHORE:
                add(Violation("opoi", "dangling reference", f"poi {zid}"))
        for c in o.line_types:
            if c not in types:
                add(Violation("opoi", "dangling reference", f"line type {c}"))
        for new, parts in o.merge.items():
            for zid in parts:
                if zid not in zones:
                    add(Violation("opoi", "dangling reference", f"zone {zid}"))
        merged = {p for parts in o.merge.values() for p in parts}
        for zid, row in o.distances.items():
            if zid not in zones and zid not in o.merge:
                add(Violation("opoi", "dangling reference", f"zone {zid}"))
            for poi, d in row.items():
                if poi not in o.poi_zones:
                    add(Violation("opoi", "dangling reference", f"poi {poi}"))
                if d < 0:
                    add(Violation("opoi", "negative length"))
        for z in model.offshore:
            key = z.id
            if key in merged:
                key = next(n for n, parts in o.merge.items() if z.id in parts)
            if key not in o.distances:
                add(Violation("opoi", "missing distances", key))
        if any(model.line_current(Line("x", "a", "b"), c) == AC for c in o.line_types) and not (o.susceptance or 0) > 0:
            add(Violation("opoi", "AC candidate without positive susceptance"))

    # time series
    ts = model.timeseries
    if ts is not None:
        H = cfg.tau * cfg.hours_per_day
        for kind, tab in [("load", ts.load), *ts.profiles.items()]:
            if tab.values.shape[0] != H:
                add(Violation(f"timeseries:{kind}", "row count", f"{tab.values.shape[0]} != {H}"))
            if not np.all(np.isfinite(tab.values)):
                add(Violation(f"timeseries:{kind}", "non-finite value"))
            if kind != "load" and np.any((tab.values < 0) | (tab.values > 1)):
                add(Violation(f"timeseries:{kind}", "capacity factor out of range"))
        for z in model.onshore:
            if not ts.load.has(z.id):
                add(Violation(f"zone:{z.id}", "dangling reference", "no load column"))
        if np.any(ts.load.values < 0):
            add(Violation("timeseries:load", "negative load"))
    return out


def _reaches_onshore(start: str, adj: dict[str, set[str]], zones: dict[str, Zone]) -> bool:
    seen = {start}
    q = deque([start])
    while q:
        u = q.popleft()
        if zones[u].kind == ONSHORE:
            return True
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                q.append(v)
    return False


def _cost_nonnegative(t: LineType) -> bool:
    k = t.coefficients
    if t.cost_model in ("fixed", "per_mw_mile"):
        return k[0] >= 0
    if t.cost_model == "affine":
        slope, icpt = k
        return icpt >= 0 and slope >= 0
    a, b, c = k
    if c < 0 or a < 0:
        return False
    if b >= 0 or a == 0:
        return b >= 0
    # minimum of the parabola at l = -b / 2a > 0
    return c - b * b / (4 * a) >= 0


_REFERENCE_RULES = {"dangling reference"}


def check_system(model: SystemModel) -> SystemModel:
    """Raise on the first class of problems found; return the model otherwise."""
    vs = validate_system(model)
    dangling = [v for v in vs if v.rule in _REFERENCE_RULES]
    if dangling:
        raise DanglingReferenceError(dangling)
    if vs:
        raise InvariantViolation(vs)
    return model


# ---------------------------------------------------------------- YAML I/O

class _Map(dict):
    line: int | None = None


class _LineLoader(yaml.SafeLoader):
    def construct_mapping(self, node, deep=False):
        m = _Map(super().construct_mapping(node, deep=True))
        m.line = node.start_mark.line + 1
        return m


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG,
                            _LineLoader.construct_mapping)


_SECTION_TYPES = {
    "zones": Zone,
    "lines": Line,
    "line_types": LineType,
    "generators": Generator,
    "technologies": TechnologyOption,
    "demand_blocks": DemandBlock,
    "policy_regions": PolicyRegion,
}
_FIELD_FOR_SECTION = {"technologies": "tech_options"}
_TOP_KEYS = {"name", "config", "storage", "opoi", "timeseries", "scenarios", *_SECTION_TYPES}


def _coerce(value: Any, tp: Any, where: str, line: int | None):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin in (typing.Union, types.UnionType):
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _coerce(value, inner[0], where, line)
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SystemFormatError(f"{where}: expected a number, got {value!r}", line)
        return float(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SystemFormatError(f"{where}: expected an integer, got {value!r}", line)
        return int(value)
    if tp is str:
        if not isinstance(value, (str, int)) or isinstance(value, bool):
            raise SystemFormatError(f"{where}: expected a string, got {value!r}", line)
        return str(value)
    if tp is bool:
        if not isinstance(value, bool):
            raise SystemFormatError(f"{where}: expected true/false, got {value!r}", line)
        return value
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise SystemFormatError(f"{where}: expected a list, got {value!r}", line)
        return tuple(_coerce(v, args[0], f"{where}[{i}]", line) for i, v in enumerate(value))
    if origin is dict:
        if not isinstance(value, dict):
            raise SystemFormatError(f"{where}: expected a mapping, got {value!r}", line)
        return {str(k): _coerce(v, args[1], f"{where}.{k}", getattr(value, "line", line))
                for k, v in value.items()}
    raise TypeError(f"unsupported field type {tp!r}")


def _build(cls, raw: Any, where: str, line: int | None = None):
    if not isinstance(raw, dict):
        raise SystemFormatError(f"{where}: expected a mapping", line)
    line = getattr(raw, "line", line)
    hints = typing.get_type_hints(cls)
    fields = {f.name: f for f in dataclasses.fields(cls) if f.name != "source"}
    unknown = set(raw) - set(fields)
    if unknown:
        raise SystemFormatError(f"{where}: unknown field {sorted(unknown)[0]!r}", line)
    kwargs = {}
    for name, f in fields.items():
        if name in raw:
            kwargs[name] = _coerce(raw[name], hints[name], f"{where}.{name}", line)
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            raise SystemFormatError(f"{where}: missing field {name!r}", line)
    return cls(**kwargs)


def read_hourly_csv(path: Path) -> HourlyTable:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SystemFormatError("empty CSV (header row is mandatory)", path=str(path))
    header = tuple(h.strip() for h in rows[0])
    data = []
    for i, r in enumerate(rows[1:], start=2):
        if not r:
            continue
        if len(r) != len(header):
            raise SystemFormatError(f"expected {len(header)} fields", i, str(path))
        try:
            data.append([float(v) for v in r])
        except ValueError as exc:
            raise SystemFormatError(str(exc), i, str(path)) from None
    return HourlyTable(header, np.array(data, dtype=float).reshape(len(data), len(header)))


def write_hourly_csv(path: Path, table: HourlyTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.values:
            w.writerow([repr(float(v)) for v in row])


def parse_system(text: str, base: Path | None = None, path: str | None = None) -> SystemModel:
    """Parse a system description from YAML text; CSV paths resolve against ``base``."""
    try:
        raw = yaml.load(text, Loader=_LineLoader)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise SystemFormatError(f"YAML syntax: {exc.problem}", line, path) from None
    if not isinstance(raw, dict):
        raise SystemFormatError("top level must be a mapping", 1, path)
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise SystemFormatError(f"unknown section {sorted(unknown)[0]!r}", raw.line, path)
    try:
        kw: dict[str, Any] = {"name": str(raw.get("name", "system"))}
        kw["config"] = _build(PlanningConfig, raw.get("config") or _Map(), "config")
        for key, cls in _SECTION_TYPES.items():
            items = raw.get(key) or []
            if not isinstance(items, list):
                raise SystemFormatError(f"{key}: expected a list", raw.line)
            objs = []
            for i, item in enumerate(items):
                ident = item.get("id", i) if isinstance(item, dict) else i
                objs.append(_build(cls, item, f"{key}[{ident}]"))
            kw[_FIELD_FOR_SECTION.get(key, key)] = tuple(objs)
        if raw.get("storage") is not None:
            kw["storage"] = _build(StorageSpec, raw["storage"], "storage")
        if raw.get("opoi") is not None:
            kw["opoi"] = _build(OpoiSpec, raw["opoi"], "opoi")
        if raw.get("scenarios") is not None:
            kw["scenarios"] = str(raw["scenarios"])
        ts = raw.get("timeseries")
        if ts is not None:
            kw["timeseries"] = _load_timeseries(ts, base or Path("."))
    except SystemFormatError as exc:
        if path and exc.path is None:
            raise SystemFormatError(exc.message, exc.line, path) from None
        raise
    return SystemModel(**kw, source=Path(path) if path else None)


def _load_timeseries(spec: Any, base: Path) -> TimeSeries:
    if not isinstance(spec, dict) or "load" not in spec:
        raise SystemFormatError("timeseries: expected mapping with a 'load' file",
                                getattr(spec, "line", None))
    files = {"load": str(spec["load"])}
    load = read_hourly_csv(base / spec["load"])
    profiles = {}
    for kind, fname in (spec.get("profiles") or {}).items():
        files[f"profile:{kind}"] = str(fname)
        profiles[str(kind)] = read_hourly_csv(base / fname)
    return TimeSeries(load, profiles, files)


def load_system(path: str | Path) -> SystemModel:
    """Read, parse and validate a system file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SystemFormatError(f"cannot read: {exc.strerror}", path=str(path)) from None
    model = parse_system(text, path.parent, str(path))
    return check_system(model)


def _plain(obj: Any) -> Any:
    if dataclasses.is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, (tuple, list)):
        return [_plain(v) for v in obj]
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _to_plain(model: SystemModel, include_ts: bool = True) -> dict:
    out: dict[str, Any] = {"name": model.name, "config": _plain(model.config)}
    for key in _SECTION_TYPES:
        out[key] = _plain(getattr(model, _FIELD_FOR_SECTION.get(key, key)))
    if model.storage is not None:
        out["storage"] = _plain(model.storage)
    if model.opoi is not None:
        out["opoi"] = _plain(model.opoi)
    if model.scenarios is not None:
        out["scenarios"] = model.scenarios
    return out


def dump_system(model: SystemModel) -> str:
    data = _to_plain(model)
    if model.timeseries is not None:
        data["timeseries"] = _timeseries_files(model.timeseries)
    buf = io.StringIO()
    yaml.safe_dump(data, buf, sort_keys=False, default_flow_style=None, width=100)
    return buf.getvalue()


def _timeseries_files(ts: TimeSeries) -> dict:
    files = {"load": ts.files.get("load", "load.csv"), "profiles": {}}
    for kind in ts.profiles:
        files["profiles"][kind] = ts.files.get(f"profile:{kind}", f"{kind}.csv")
    return files


def save_system(model: SystemModel, path: str | Path) -> Path:
    """Write the YAML file and any time-series CSVs next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_system(model), encoding="utf-8")
    if model.timeseries is not None:
        files = _timeseries_files(model.timeseries)
        write_hourly_csv(path.parent / files["load"], model.timeseries.load)
        for kind, fname in files["profiles"].items():
            write_hourly_csv(path.parent / fname, model.timeseries.profiles[kind])
    return path


# ---------------------------------------------------------------- transforms

def replace(model: SystemModel, **changes) -> SystemModel:
    return dataclasses.replace(model, **changes)


def apply_opoi(model: SystemModel) -> SystemModel:
    """Merge split-offtake zones and expand export candidates to every POI.

    Existing candidates between an offshore zone and an onshore zone are
    dropped for merged zones and kept otherwise; one new candidate per
    (offshore zone, POI) is added when not already present.
    """
    o = model.opoi
    if o is None:
        raise ModelError("OPOI mode requires an 'opoi' section in the system file")
    part_of = {p: new for new, parts in o.merge.items() for p in parts}
    zones = []
    for z in model.zones:
        if z.id in part_of:
            new = part_of[z.id]
            if new not in [q.id for q in zones]:
                parts = [model.zone(p) for p in o.merge[new]]
                zones.append(Zone(new, OFFSHORE, min(p.online_epoch for p in parts), None))
        else:
            zones.append(z)
    kinds = {z.id: z.kind for z in zones}

    lines = []
    seen_pairs = set()
    for l in model.lines:
        a, b = part_of.get(l.from_zone, l.from_zone), part_of.get(l.to_zone, l.to_zone)
        if a == b:
            continue
        if (l.from_zone in part_of or l.to_zone in part_of) and l.status == CANDIDATE \
                and {kinds[a], kinds[b]} == {OFFSHORE, ONSHORE}:
            continue
        lines.append(dataclasses.replace(l, from_zone=a, to_zone=b))
        if l.status == CANDIDATE:
            seen_pairs.add(frozenset((a, b)))
    for z in zones:
        if z.kind != OFFSHORE:
            continue
        for poi in o.poi_zones:
            if frozenset((z.id, poi)) in seen_pairs:
                continue
            dist = o.distances.get(z.id, {}).get(poi)
            if dist is None:
                continue
            ac = any(model.line_current(Line("x", "a", "b"), c) == AC for c in o.line_types)
            lines.append(Line(
                id=f"opoi:{z.id}-{poi}", from_zone=z.id, to_zone=poi, current=AC if ac else DC,
                status=CANDIDATE, locale=OFFSHORE, susceptance=o.susceptance if ac else None,
                length=float(dist), allowed_types=tuple(o.line_types)))
            seen_pairs.add(frozenset((z.id, poi)))

    gens = tuple(dataclasses.replace(g, zone=part_of.get(g.zone, g.zone)) for g in model.generators)
    techs = tuple(dataclasses.replace(k, buildable_zones=tuple(dict.fromkeys(
        part_of.get(z, z) for z in k.buildable_zones))) for k in model.tech_options)
    ts = model.timeseries
    if ts is not None and part_of:
        ts = _merge_timeseries(ts, o.merge, gens, model.generators)
    return dataclasses.replace(model, zones=tuple(zones), lines=tuple(lines), generators=gens,
                               tech_options=techs, timeseries=ts)


def _merge_timeseries(ts: TimeSeries, merge, new_gens, old_gens) -> TimeSeries:
    """Merged zones take a capacity-weighted profile of their parts."""
    profiles = {}
    for kind, tab in ts.profiles.items():
        cols = list(tab.columns)
        vals = [tab.values[:, i] for i in range(len(cols))]
        for new, parts in merge.items():
            present = [p for p in parts if p in cols]
            if not present:
                continue
            caps = [sum(g.p_max for g in old_gens if g.zone == p and g.profile == kind) or 1.0
                    for p in present]
            w = np.array(caps) / sum(caps)
            merged = sum(wi * tab.column(p) for wi, p in zip(w, present))
            keep = [i for i, c in enumerate(cols) if c not in present]
            cols = [cols[i] for i in keep] + [new]
            vals = [vals[i] for i in keep] + [merged]
        profiles[kind] = HourlyTable(tuple(cols), np.column_stack(vals))
    return TimeSeries(ts.load, profiles, ts.files)
