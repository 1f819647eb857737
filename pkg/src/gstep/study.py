"""Study configuration, end-to-end runs and cross-run comparison."""
from __future__ import annotations

import hashlib
import json
import math
import platform
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .accounting import breakdown, check_objective
from .milp.build import MODES, build
from .milp.replay import available_exports, replay
from .model import load_system
from .report import TABLES, build_tables, read_csv, render_plots, write_csv, write_tables
from .scenarios import build_scenarios, save_scenarios, scenarios_for
from .solver.backends import BACKENDS, solve, write_solution

SCENARIO_SOURCES = ("auto", "cluster")
MANIFEST = "manifest.json"
FORMAT = "gstep-study/1"


class ConfigError(ValueError):
    """Invalid study configuration (a usage error)."""


class IncompatibleStudies(ValueError):
    pass


class StudyError(RuntimeError):
    pass


@dataclass
class StudyConfig:
    """Everything a study run depends on.

    ``scenarios`` is ``auto`` (the system's own scenario file if it names
    one, else clustering), ``cluster`` or the path of a scenario file.
    """

    system: str
    out: str
    mode: str = "SO"
    scenarios: str = "auto"
    x5: bool = False
    scc: float | None = None
    mip_gap: float = 1e-4
    seed: int = 0
    k: int = 5
    backend: str = "builtin"
    time_limit: float | None = None
    node_limit: int | None = None
    plots: bool = True

    def validate(self) -> "StudyConfig":
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}; expected one of {', '.join(BACKENDS)}")
        if not Path(self.system).is_file():
            raise ConfigError(f"system file not found: {self.system}")
        if self.scenarios not in SCENARIO_SOURCES and not Path(self.scenarios).is_file():
            raise ConfigError(f"scenario file not found: {self.scenarios}")
        if not (isinstance(self.mip_gap, (int, float)) and 0 <= self.mip_gap < 1):
            raise ConfigError(f"mip_gap must be in [0, 1), got {self.mip_gap!r}")
        if self.scc is not None and (not math.isfinite(self.scc) or self.scc < 0):
            raise ConfigError(f"scc must be a non-negative number, got {self.scc!r}")
        if not isinstance(self.k, int) or self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k!r}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ConfigError("time_limit must be positive")
        if self.node_limit is not None and self.node_limit < 1:
            raise ConfigError("node_limit must be at least 1")
        if self.x5 and self.scenarios not in SCENARIO_SOURCES:
            from .scenarios import load_scenarios
            s = load_scenarios(self.scenarios)
            if not any(d.kind == "extreme" for ds in s.epochs.values() for d in ds):
                raise ConfigError("x5 needs extreme days but the scenario file has none")
        return self

    @property
    def label(self) -> str:
        return self.mode + ("-X5" if self.x5 else "") + ("" if self.scc is None else f"-EM{self.scc:g}")

    @classmethod
    def from_dict(cls, data: dict, base: Path | None = None) -> "StudyConfig":
        """Build from a run-config mapping; relative paths resolve against ``base``."""
        if not isinstance(data, dict):
            raise ConfigError("run config must be a mapping")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown run-config keys: {', '.join(unknown)}")
        for key in ("system", "out"):
            if key not in data:
                raise ConfigError(f"run config is missing {key!r}")
        d = dict(data)
        if base is not None:
            for key in ("system", "out"):
                d[key] = str((base / d[key]))
            if d.get("scenarios", "auto") not in SCENARIO_SOURCES:
                d["scenarios"] = str(base / d["scenarios"])
        for key, tp in (("mip_gap", float), ("scc", float), ("time_limit", float)):
            if d.get(key) is not None:
                try:
                    d[key] = tp(d[key])
                except (TypeError, ValueError):
                    raise ConfigError(f"{key} must be a number, got {d[key]!r}") from None
        return cls(**d)


def load_run_config(path: str | Path) -> StudyConfig:
    """Read a YAML run config, or the ``config`` block of a study manifest."""
    p = Path(path)
    try:
        raw = yaml.safe_load(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read run config: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: {exc}") from None
    if isinstance(raw, dict) and raw.get("format") == FORMAT:
        return StudyConfig.from_dict(raw["config"])
    return StudyConfig.from_dict(raw, base=p.parent)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _scenarios(cfg: StudyConfig, model):
    if cfg.scenarios == "cluster":
        return build_scenarios(model, cfg.k, cfg.seed, cfg.x5)
    path = None if cfg.scenarios == "auto" else cfg.scenarios
    return scenarios_for(model, cfg.k, cfg.seed, cfg.x5, path=path)


def prepare(cfg: StudyConfig):
    """Load the system and scenarios and build the instance for ``cfg``."""
    cfg.validate()
    model = load_system(cfg.system)
    if cfg.mode == "MO-OPOI" and model.opoi is None:
        raise ConfigError("mode MO-OPOI needs an opoi section in the system file")
    scen = _scenarios(cfg, model)
    return model, scen, build(model, scen, cfg.mode, cfg.x5, cfg.scc)


def run_study(cfg: StudyConfig) -> Path:
    """Solve one study and write its artifacts to ``cfg.out``."""
    model, scen, inst = prepare(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    err = out / "error.json"
    if err.exists():
        err.unlink()
    save_scenarios(scen, out / "scenarios.json")
    sol = solve(inst, cfg.backend, cfg.mip_gap, cfg.node_limit, cfg.time_limit)
    if sol.status in ("infeasible", "unbounded"):
        raise StudyError(f"model is {sol.status}")
    write_solution(out / "solution.sol", inst, sol)
    rep = replay(inst, sol)
    rep.raise_if_failed()
    bd = breakdown(inst, sol)
    check_objective(inst, sol, bd)
    tables = build_tables(inst, sol, bd)
    digests = write_tables(out, tables)
    plots = render_plots(out, tables, cfg.label) if cfg.plots else []
    ctx = inst.context
    manifest = {
        "format": FORMAT,
        "config": {**asdict(cfg), "system": str(Path(cfg.system).resolve()), "out": str(out.resolve()),
                   "scenarios": cfg.scenarios if cfg.scenarios in SCENARIO_SOURCES
                   else str(Path(cfg.scenarios).resolve())},
        "label": cfg.label,
        "system": {"name": model.name, "content_hash": model.content_hash(),
                   "solved_hash": ctx.model.content_hash()},
        "scenarios": {"k": scen.k, "seed": scen.seed, "extremes": scen.extremes,
                      "days_per_epoch": {str(y): len(d) for y, d in scen.epochs.items()},
                      "sha256": _sha256(out / "scenarios.json")},
        "parameters": {"omega": ctx.omega, "scc": ctx.scc, "discount_rate": model.config.discount_rate,
                       "epochs": model.config.epochs, "years_per_epoch": model.config.years_per_epoch},
        "instance": {"name": inst.name, "rows": inst.n_rows, "columns": inst.n_vars,
                     "binaries": inst.n_binary, "families": inst.family_counts()},
        "solver": {"backend": cfg.backend, "solver": sol.solver, "status": sol.status,
                   "objective": sol.objective, "bound": sol.bound, "gap": sol.gap, "nodes": sol.nodes,
                   "lp_iterations": sol.lp_iterations, "seconds": sol.seconds},
        "summary": {"hard_cost": bd.hard_cost, "externality_cost": bd.externality,
                    "social_cost": bd.social_cost, "co2_mmt": float(np.sum(bd.co2_tons)) / 1e6,
                    "lines_built": len(tables["topology"])},
        "replay": {"tolerance": rep.tol, "residuals": rep.residuals},
        "exports": available_exports(inst, sol),
        "tables": {f"{n}.csv": digests[n] for n in TABLES},
        "plots": [str(Path(p).relative_to(out)) for p in plots],
        "versions": {"gstep": __version__, "python": platform.python_version(), "numpy": np.__version__},
    }
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n", encoding="utf-8")
    return out


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def read_manifest(d: str | Path) -> dict:
    p = Path(d) / MANIFEST
    if not p.is_file():
        raise FileNotFoundError(f"no {MANIFEST} in {d}")
    return json.loads(p.read_text(encoding="utf-8"))


# ---------------------------------------------------------------- comparison

COMPARE_COLUMNS = ["study", "label", "metric", "value", "baseline", "delta"]


def _metrics(d: Path) -> dict[str, float]:
    man = read_manifest(d)
    out = {k: float(v) for k, v in man["summary"].items()}
    for r in read_csv(d / "costs.csv"):
        if r["epoch"] == "total":
            for k in ("ic_gen", "ic_line", "ic_storage", "oc", "ec"):
                out[f"cost:{k}"] = float(r[k])
    cap: dict[str, float] = {}
    rows = read_csv(d / "capacity.csv")
    last = max((int(r["epoch"]) for r in rows), default=0)
    for r in rows:
        if int(r["epoch"]) == last:
            cap[r["tech"]] = cap.get(r["tech"], 0.0) + float(r["total_mw"])
    for tech, v in sorted(cap.items()):
        out[f"capacity_mw:{tech}"] = v
    for r in read_csv(d / "emissions.csv"):
        out[f"co2_mmt:epoch{r['epoch']}"] = float(r["co2_mmt"])
    return out


def compare_studies(dirs: list[str | Path], out: str | Path | None = None) -> list[dict]:
    """Deltas of every metric against the SO study (else the first one)."""
    if not dirs:
        raise ValueError("nothing to compare")
    mans = [read_manifest(d) for d in dirs]
    hashes = {m["system"]["content_hash"] for m in mans}
    if len(hashes) > 1:
        detail = ", ".join(f"{d}={m['system']['content_hash']}" for d, m in zip(dirs, mans))
        raise IncompatibleStudies(f"studies were run on different systems: {detail}")
    base_i = next((i for i, m in enumerate(mans) if m["config"]["mode"] == "SO"), 0)
    metrics = [_metrics(Path(d)) for d in dirs]
    base = metrics[base_i]
    keys = sorted(set().union(*metrics))
    rows = []
    for d, man, met in zip(dirs, mans, metrics):
        for k in keys:
            v, b = met.get(k, 0.0), base.get(k, 0.0)
            rows.append({"study": str(d), "label": man["label"], "metric": k, "value": v, "baseline": b,
                         "delta": v - b})
    if out is not None:
        write_csv(out, rows, COMPARE_COLUMNS)
    return rows
