"""Representative-day reduction of a source year.

Days are compared on their normalized net load (load minus existing onshore
intermittent output), clustered with k-means, and each cluster contributes
the member nearest its centroid (normal day) and optionally the farthest
member (extreme day, weight 1).  Selected days keep their actual hourly
rows.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import SystemModel


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DailyVector:
    """Net load of one day: zone-major, ``values[z * 24 + h]``."""

    day_index: int
    values: np.ndarray

    def __eq__(self, other):
        return (isinstance(other, DailyVector) and self.day_index == other.day_index
                and np.array_equal(self.values, other.values))


@dataclass
class ScenarioDay:
    id: str
    kind: str  # normal | extreme
    weight: float
    source_day: int
    cluster: int
    load: dict[str, np.ndarray]
    profiles: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)

    @property
    def hours(self) -> int:
        return len(next(iter(self.load.values())))

    def capacity_factor(self, kind: str, zone: str) -> np.ndarray:
        try:
            return self.profiles[kind][zone]
        except KeyError:
            raise ScenarioError(f"day {self.id}: no {kind!r} profile for zone {zone}") from None


@dataclass
class ScenarioSet:
    """Representative days for every epoch (1-based keys)."""

    epochs: dict[int, list[ScenarioDay]]
    k: int = 0
    seed: int | None = None
    tau: int = 365
    extremes: bool = False

    def days(self, epoch: int) -> list[ScenarioDay]:
        return self.epochs[epoch]

    @property
    def hours(self) -> int:
        return next(iter(self.epochs.values()))[0].hours

    def total_weight(self, epoch: int) -> float:
        return float(sum(d.weight for d in self.epochs[epoch]))

    def without_extremes(self) -> "ScenarioSet":
        """Fold every extreme day's weight back into its cluster's normal day."""
        out = {}
        for y, days in self.epochs.items():
            normals = {d.cluster: d for d in days if d.kind == "normal"}
            kept = []
            for d in days:
                if d.kind == "normal":
                    extra = sum(x.weight for x in days if x.kind == "extreme" and x.cluster == d.cluster)
                    kept.append(ScenarioDay(d.id, d.kind, d.weight + extra, d.source_day,
                                            d.cluster, d.load, d.profiles))
                elif d.cluster not in normals:
                    raise ScenarioError(f"extreme day {d.id} has no normal day in its cluster")
            out[y] = kept
        return ScenarioSet(out, self.k, self.seed, self.tau, False)

    def check(self, zones: list[str] | None = None) -> None:
        for y, days in self.epochs.items():
            if not days:
                raise ScenarioError(f"epoch {y} has no days")
            if abs(self.total_weight(y) - self.tau) > 1e-9:
                raise ScenarioError(f"epoch {y}: weights sum to {self.total_weight(y)}, not {self.tau}")
            H = days[0].hours
            for d in days:
                if d.kind == "extreme" and d.weight != 1:
                    raise ScenarioError(f"extreme day {d.id} must have weight 1")
                if d.kind == "normal" and d.weight < 1:
                    raise ScenarioError(f"normal day {d.id} has weight below 1")
                for z, v in d.load.items():
                    if len(v) != H or not np.all(np.isfinite(v)):
                        raise ScenarioError(f"day {d.id}: bad load row for {z}")
                for kind, tab in d.profiles.items():
                    for z, v in tab.items():
                        if len(v) != H or np.any((v < 0) | (v > 1)):
                            raise ScenarioError(f"day {d.id}: bad {kind} profile for {z}")
                if zones is not None:
                    missing = [z for z in zones if z not in d.load]
                    if missing:
                        raise ScenarioError(f"day {d.id}: no load for zone {missing[0]}")


# ---------------------------------------------------------------- clustering

def compute_net_load(load: np.ndarray, renewables: np.ndarray, hours_per_day: int = 24) -> list[DailyVector]:
    """Per-day vectors of ``load - renewables`` scaled by the year's max ``|.|``.

    Both inputs are ``hours x zones`` arrays.
    """
    load = np.asarray(load, dtype=float)
    ren = np.asarray(renewables, dtype=float)
    if load.shape != ren.shape:
        raise ScenarioError(f"shape mismatch: load {load.shape} vs renewables {ren.shape}")
    if load.ndim != 2 or load.shape[0] % hours_per_day:
        raise ScenarioError("series must be hours x zones with whole days")
    if not (np.all(np.isfinite(load)) and np.all(np.isfinite(ren))):
        raise ScenarioError("non-finite value in input series")
    net = load - ren
    peak = float(np.abs(net).max()) if net.size else 0.0
    if peak > 0:
        net = net / peak
    days = net.shape[0] // hours_per_day
    z = net.shape[1]
    # (day, hour, zone) -> (day, zone, hour) -> flat zone-major
    cube = net.reshape(days, hours_per_day, z).transpose(0, 2, 1).reshape(days, z * hours_per_day)
    return [DailyVector(d + 1, cube[d].copy()) for d in range(days)]


@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    iterations: int

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)


def _as_matrix(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        return np.atleast_2d(vectors).astype(float)
    return np.array([v.values for v in vectors], dtype=float)


def _sqdist(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def kmeans(vectors, k: int, seed: int | None = 0, max_iter: int = 500) -> KMeansResult:
    """Lloyd's algorithm with k-means++ seeding, iterated to an assignment fixed point."""
    X = _as_matrix(vectors)
    n = len(X)
    distinct = len(np.unique(X, axis=0)) if n else 0
    if not 1 <= k <= distinct:
        raise ScenarioError(f"k={k} out of range (1..{distinct} distinct vectors)")
    rng = np.random.default_rng(seed)

    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        p = d2 / d2.sum()
        idx = rng.choice(n, p=p)
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    C = np.array(centers)

    labels = np.full(n, -1)
    for it in range(1, max_iter + 1):
        new = np.argmin(_sqdist(X, C), axis=1)
        # reseed empty clusters with the point farthest from its centroid
        for c in range(k):
            if not np.any(new == c):
                own = ((X - C[new]) ** 2).sum(axis=1)
                for j in np.argsort(-own, kind="stable"):
                    if np.sum(new == new[j]) > 1:
                        new[j] = c
                        break
        if np.array_equal(new, labels):
            return KMeansResult(labels, C, it)
        labels = new
        C = np.array([X[labels == c].mean(axis=0) for c in range(k)])
    return KMeansResult(labels, C, max_iter)


@dataclass(frozen=True)
class Selection:
    cluster: int
    day_index: int  # 1-based
    kind: str
    weight: int


def extract_representative_days(result: KMeansResult, vectors, extremes: bool = True) -> list[Selection]:
    """Nearest member per cluster (normal) and farthest member (extreme).

    Ties go to the smallest day index.  The normal day carries the cluster
    size, less one when an extreme day is split off.
    """
    X = _as_matrix(vectors)
    if isinstance(vectors, np.ndarray):
        index = np.arange(1, len(X) + 1)
    else:
        index = np.array([v.day_index for v in vectors])
    out = []
    for c in range(len(result.centroids)):
        mem = result.members(c)
        if len(mem) == 0:
            raise ScenarioError(f"cluster {c} is empty")
        order = np.argsort(index[mem], kind="stable")
        mem = mem[order]
        dist = np.sqrt(((X[mem] - result.centroids[c]) ** 2).sum(axis=1))
        near = int(np.argmin(dist))
        if extremes and len(mem) > 1:
            rest = np.delete(np.arange(len(mem)), near)
            far = int(rest[np.argmax(dist[rest])])
            out.append(Selection(c, int(index[mem[near]]), "normal", len(mem) - 1))
            out.append(Selection(c, int(index[mem[far]]), "extreme", 1))
        else:
            out.append(Selection(c, int(index[mem[near]]), "normal", len(mem)))
    return out


# ---------------------------------------------------------------- pipeline

def growth_factor(model: SystemModel, epoch: int) -> float:
    cfg = model.config
    return (1.0 + cfg.load_growth) ** (cfg.final_calendar_year(epoch) - cfg.base_year)


def onshore_renewables(model: SystemModel) -> np.ndarray:
    """Existing onshore intermittent output per hour and onshore zone."""
    ts = model.timeseries
    zones = [z.id for z in model.onshore]
    out = np.zeros((ts.hours, len(zones)))
    for g in model.generators:
        if g.dispatchable or g.zone not in zones:
            continue
        out[:, zones.index(g.zone)] += g.p_max * ts.profiles[g.profile].column(g.zone)
    return out


def build_scenarios(model: SystemModel, k: int = 5, seed: int = 0, extremes: bool = False) -> ScenarioSet:
    """Cluster each epoch's growth-scaled source year into representative days."""
    ts = model.timeseries
    if ts is None:
        raise ScenarioError("system has no time series to cluster")
    cfg = model.config
    Hd = cfg.hours_per_day
    zones = [z.id for z in model.onshore]
    base_load = np.column_stack([ts.load.column(z) for z in zones])
    ren = onshore_renewables(model)
    all_load_zones = list(ts.load.columns)
    epochs = {}
    for y in range(1, cfg.epochs + 1):
        g = growth_factor(model, y)
        vectors = compute_net_load(base_load * g, ren, Hd)
        res = kmeans(vectors, k, seed)
        days = []
        for sel in extract_representative_days(res, vectors, extremes):
            rows = slice((sel.day_index - 1) * Hd, sel.day_index * Hd)
            load = {z: ts.load.column(z)[rows] * g for z in all_load_zones}
            profiles = {kind: {c: tab.values[rows, i].copy() for i, c in enumerate(tab.columns)}
                        for kind, tab in ts.profiles.items()}
            tag = "n" if sel.kind == "normal" else "x"
            days.append(ScenarioDay(f"e{y}-{tag}{sel.cluster + 1}", sel.kind, float(sel.weight),
                                    sel.day_index, sel.cluster, load, profiles))
        epochs[y] = days
    out = ScenarioSet(epochs, k, seed, cfg.tau, extremes)
    out.check(zones)
    return out


# ---------------------------------------------------------------- JSON I/O

def scenarios_to_dict(s: ScenarioSet) -> dict:
    return {
        "format": "gstep-scenarios/1",
        "k": s.k,
        "seed": s.seed,
        "tau": s.tau,
        "extremes": s.extremes,
        "epochs": {
            str(y): [
                {
                    "id": d.id, "kind": d.kind, "weight": d.weight, "source_day": d.source_day,
                    "cluster": d.cluster,
                    "load": {z: [float(v) for v in a] for z, a in d.load.items()},
                    "profiles": {k: {z: [float(v) for v in a] for z, a in t.items()}
                                 for k, t in d.profiles.items()},
                }
                for d in days
            ]
            for y, days in s.epochs.items()
        },
    }


def scenarios_from_dict(data: dict) -> ScenarioSet:
    try:
        epochs = {}
        for y, days in data["epochs"].items():
            epochs[int(y)] = [
                ScenarioDay(
                    str(d["id"]), d.get("kind", "normal"), float(d["weight"]),
                    int(d.get("source_day", 0)), int(d.get("cluster", i)),
                    {z: np.asarray(a, dtype=float) for z, a in d["load"].items()},
                    {k: {z: np.asarray(a, dtype=float) for z, a in t.items()}
                     for k, t in d.get("profiles", {}).items()},
                )
                for i, d in enumerate(days)
            ]
        out = ScenarioSet(epochs, int(data.get("k", 0)), data.get("seed"),
                          int(data.get("tau", 365)), bool(data.get("extremes", False)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario file: {exc}") from None
    out.check()
    return out


def save_scenarios(s: ScenarioSet, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(scenarios_to_dict(s), indent=1), encoding="utf-8")
    return path


def load_scenarios(path: str | Path) -> ScenarioSet:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return scenarios_from_dict(data)


def scenarios_for(model: SystemModel, k: int = 5, seed: int = 0, extremes: bool = False,
                  path: str | Path | None = None) -> ScenarioSet:
    """Scenario source resolution: explicit file, the system's own file, or clustering."""
    if path is None and model.scenarios is not None:
        base = model.source.parent if model.source else Path(".")
        path = base / model.scenarios
    if path is not None:
        s = load_scenarios(path)
        if not extremes and any(d.kind == "extreme" for ds in s.epochs.values() for d in ds):
            s = s.without_extremes()
        s.check([z.id for z in model.onshore])
        return s
    return build_scenarios(model, k, seed, extremes)

