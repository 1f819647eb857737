"""``gstep`` command line: run, compare, cluster, export-mps.

Failures print a one-line JSON error record to stderr (and write it to
``error.json`` in the output directory when there is one) and exit with

* 2 for usage and configuration errors,
* 3 for malformed or inconsistent input data,
* 4 when the model has no acceptable solution (infeasible, structurally
  infeasible, limit without incumbent),
* 1 for anything else.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from . import __version__
from .milp.build import MODES, StructuralInfeasibility
from .milp.mps import write_mps
from .model import ModelError, load_system
from .scenarios import ScenarioError, build_scenarios, save_scenarios
from .solver.backends import BACKENDS, BackendUnavailable, MalformedSolutionError
from .solver.bnb import SolverLimitError
from .study import (ConfigError, IncompatibleStudies, StudyConfig, StudyError, compare_studies,
                    load_run_config, prepare, run_study)

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_INPUT, EXIT_SOLVE = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit({"error": "UsageError", "message": message, "exit_code": EXIT_USAGE}, None)
        sys.exit(EXIT_USAGE)


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (StructuralInfeasibility, SolverLimitError, StudyError)):
        return EXIT_SOLVE
    if isinstance(exc, ConfigError):
        return EXIT_USAGE
    if isinstance(exc, (ModelError, ScenarioError, IncompatibleStudies, MalformedSolutionError,
                        FileNotFoundError)):
        return EXIT_INPUT
    return EXIT_ERROR


def _emit(record: dict, outdir: str | Path | None) -> None:
    line = json.dumps(record, sort_keys=True)
    print(line, file=sys.stderr)
    if outdir is not None:
        try:
            Path(outdir).mkdir(parents=True, exist_ok=True)
            (Path(outdir) / "error.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n",
                                                     encoding="utf-8")
        except OSError:
            pass


def _study_args(p: argparse.ArgumentParser, out_help: str) -> None:
    p.add_argument("--config", help="YAML run config or a study manifest.json")
    p.add_argument("--system", help="system YAML file")
    p.add_argument("--out", help=out_help)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--scenarios", help="auto, cluster, or a scenario JSON file")
    p.add_argument("--x5", action="store_true", default=None, help="keep extreme days")
    p.add_argument("--scc", type=float, help="social cost of carbon, $/t")
    p.add_argument("--mip-gap", type=float, dest="mip_gap")
    p.add_argument("--seed", type=int)
    p.add_argument("--k", type=int, help="clusters per epoch")
    p.add_argument("--backend", choices=BACKENDS)
    p.add_argument("--time-limit", type=float, dest="time_limit")
    p.add_argument("--node-limit", type=int, dest="node_limit")


def _config(args) -> StudyConfig:
    names = [f.name for f in fields(StudyConfig)]
    given = {k: getattr(args, k) for k in names if getattr(args, k, None) is not None}
    if getattr(args, "no_plots", False):
        given["plots"] = False
    if args.config:
        base = load_run_config(args.config)
        data = {k: getattr(base, k) for k in names}
        data.update(given)
        return StudyConfig(**data)
    missing = [k for k in ("system", "out") if k not in given]
    if missing:
        raise ConfigError("missing " + " and ".join(f"--{k}" for k in missing) + " (or --config)")
    return StudyConfig(**given)


def cmd_run(args) -> int:
    cfg = _config(args)
    args._outdir = cfg.out
    out = run_study(cfg)
    man = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    s = man["solver"]
    print(f"{man['label']}: {s['status']} objective {s['objective']:.6e} gap {s['gap']:.2e} -> {out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    rows = compare_studies(args.dirs, args.out)
    if args.out is None:
        for r in rows:
            if r["delta"]:
                print(f"{r['label']:>16} {r['metric']:<28} {r['delta']:+.6e}")
    else:
        print(f"{len(rows)} rows -> {args.out}")
    return EXIT_OK


def cmd_cluster(args) -> int:
    if args.k < 1:
        raise ConfigError("k must be a positive integer")
    model = load_system(args.system)
    s = build_scenarios(model, args.k, args.seed, args.extremes)
    save_scenarios(s, args.out)
    for y, days in sorted(s.epochs.items()):
        print(f"epoch {y}: {len(days)} days, weights " + " ".join(f"{d.weight:g}" for d in days))
    return EXIT_OK


def cmd_export_mps(args) -> int:
    cfg = _config(args)
    _, _, inst = prepare(cfg)
    write_mps(inst, cfg.out)
    print(f"{inst.name}: {inst.n_rows} rows, {inst.n_vars} columns ({inst.n_binary} binary) -> {cfg.out}")
    return EXIT_OK


def parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gstep", description="Generation, storage and transmission expansion planning.")
    ap.add_argument("--version", action="version", version=f"gstep {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="solve a study and write its tables")
    _study_args(p, "output directory")
    p.add_argument("--no-plots", action="store_true", help="skip the PNG figures")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="deltas across study directories, SO as baseline")
    p.add_argument("dirs", nargs="+")
    p.add_argument("--out", help="comparison CSV (printed when omitted)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("cluster", help="build representative days")
    p.add_argument("--system", required=True)
    p.add_argument("--out", required=True, help="scenario JSON file")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--extremes", action="store_true")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("export-mps", help="write the study MILP as MPS")
    _study_args(p, "MPS file")
    p.set_defaults(func=cmd_export_mps)
    return ap


def main(argv: list[str] | None = None) -> int:
    try:
        args = parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    args._outdir = None
    try:
        return args.func(args)
    except Exception as exc:  # every failure becomes an error record
        code = _exit_code(exc)
        outdir = args._outdir if args.command == "run" else None
        _emit({"error": type(exc).__name__, "message": str(exc), "exit_code": code,
               "command": args.command}, outdir)
        return code


if __name__ == "__main__":
    sys.exit(main())
