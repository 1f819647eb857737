"""Solver backends and the plain-text solution file.

Three backends share one contract, returning a :class:`PlanSolution` for a
:class:`MilpInstance`:

``builtin``
    the in-process branch-and-bound (:func:`gstep.solver.bnb.solve_milp`);
``highs``
    writes the instance as MPS, reads it back with our own parser, solves it
    with HiGHS through :func:`scipy.optimize.milp`, writes a solution file
    and parses that, so it exercises the same file round trip an external
    solver goes through;
``command``
    runs the command line in ``$GSTEP_SOLVER``.  ``{mps}``, ``{sol}``,
    ``{gap}`` and ``{time_limit}`` are substituted; without ``{mps}`` the two
    paths are appended.  The command must write a solution file in the
    format below.

Solution file::

    # gstep-solution/1
    # status optimal
    # objective 1234.5
    # bound 1234.4
    x_name value
    ...

Names are either the structured variable names (``p_g[1,0,3,G1]``) or the
positional MPS column names (``C0000001``).  Continuous variables missing
from the file are zero; a missing binary makes the file malformed.
"""
from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import time
from pathlib import Path

import numpy as np

from ..milp.instance import MilpInstance, PlanSolution, relative_gap
from ..milp.mps import col_name, read_mps, write_mps
from . import tolerances as tol
from .bnb import SolverLimitError, solve_milp

BACKENDS = ("builtin", "highs", "command")
ENV_VAR = "GSTEP_SOLVER"
STATUSES = ("optimal", "gap-feasible", "limit", "infeasible", "unbounded")
HEADER = "# gstep-solution/1"


class BackendUnavailable(RuntimeError):
    pass


class MalformedSolutionError(ValueError):
    pass


def write_solution(path: str | Path, instance: MilpInstance, sol: PlanSolution,
                   positional: bool = False) -> None:
    """Write ``sol``; ``positional`` uses MPS column names instead of structured ones."""
    lines = [HEADER, f"# status {sol.status}"]
    for key in ("objective", "bound", "gap", "seconds"):
        v = getattr(sol, key)
        if v == v:  # skip NaN
            lines.append(f"# {key} {float(v)!r}")
    lines += [f"# solver {sol.solver}", f"# nodes {sol.nodes}", f"# lp_iterations {sol.lp_iterations}"]
    if sol.values is not None:
        for j, (v, x) in enumerate(zip(instance.variables, sol.values)):
            lines.append(f"{col_name(j) if positional else v.name} {float(x)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_solution(path: str | Path, instance: MilpInstance, *, text: str | None = None) -> PlanSolution:
    """Parse a solution file against ``instance``.

    The objective is recomputed from the values; the bound is taken from
    the file when present and the gap recomputed from both.
    """
    if text is None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise MalformedSolutionError(f"cannot read solution file: {exc}") from None
    head: dict[str, str] = {}
    vals: dict[int, float] = {}
    by_name = {v.name: j for j, v in enumerate(instance.variables)}
    for ln, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s:
            continue
        if s.startswith("#"):
            parts = s[1:].split(None, 1)
            if len(parts) == 2:
                head[parts[0]] = parts[1].strip()
            continue
        try:
            name, val = s.rsplit(None, 1)
            x = float(val)
        except ValueError:
            raise MalformedSolutionError(f"line {ln}: expected 'name value', got {raw!r}") from None
        j = by_name.get(name)
        if j is None and len(name) == 8 and name[0] == "C" and name[1:].isdigit():
            j = int(name[1:]) - 1
            if not 0 <= j < instance.n_vars:
                j = None
        if j is None:
            raise MalformedSolutionError(f"line {ln}: unknown variable {name!r}")
        if j in vals:
            raise MalformedSolutionError(f"line {ln}: duplicate value for {name!r}")
        if not np.isfinite(x):
            raise MalformedSolutionError(f"line {ln}: non-finite value for {name!r}")
        vals[j] = x
    status = head.get("status")
    if status not in STATUSES:
        raise MalformedSolutionError(f"missing or unknown status {status!r}")
    meta = dict(solver=head.get("solver", "external"), nodes=int(float(head.get("nodes", 0))),
                lp_iterations=int(float(head.get("lp_iterations", 0))),
                seconds=float(head.get("seconds", "nan")))
    if status in ("infeasible", "unbounded"):
        return PlanSolution(status, **meta)
    if not vals:
        if status == "limit":
            raise SolverLimitError("solver stopped at a limit without a feasible solution")
        raise MalformedSolutionError(f"status {status} but no variable values")
    x = np.zeros(instance.n_vars)
    for j, v in vals.items():
        x[j] = v
    binaries = np.flatnonzero(instance.binary_mask)
    missing = [instance.variables[j].name for j in binaries if j not in vals]
    if missing:
        raise MalformedSolutionError(f"no value for binary {missing[0]}"
                                     + (f" and {len(missing) - 1} more" if len(missing) > 1 else ""))
    frac = np.abs(x[binaries] - np.round(x[binaries]))
    if len(frac) and frac.max() > tol.INTEGRALITY:
        j = binaries[int(frac.argmax())]
        raise MalformedSolutionError(f"binary {instance.variables[j].name} = {x[j]!r} is not integral")
    x[binaries] = np.round(x[binaries])
    obj = instance.objective(x)
    bound = float(head["bound"]) if "bound" in head else float("nan")
    gap = relative_gap(obj, bound) if bound == bound else float("nan")
    return PlanSolution(status, x, obj, bound, gap, **meta)


# ---------------------------------------------------------------- HiGHS via scipy

def solve_mps_with_highs(mps_path: str | Path, sol_path: str | Path, gap: float = 1e-4,
                         time_limit: float | None = None, node_limit: int | None = None) -> str:
    """Solve an MPS file with HiGHS and write a solution file; returns the status."""
    from scipy.optimize import LinearConstraint, Bounds, milp

    inst = read_mps(mps_path)
    t0 = time.perf_counter()
    lo = np.full(inst.n_rows, -np.inf)
    hi = np.full(inst.n_rows, np.inf)
    s = inst.senses
    lo[s != "L"] = inst.rhs[s != "L"]
    hi[s != "G"] = inst.rhs[s != "G"]
    opts = {"mip_rel_gap": gap}
    if time_limit is not None:
        opts["time_limit"] = float(time_limit)
    if node_limit is not None:
        opts["node_limit"] = int(node_limit)
    cons = [LinearConstraint(inst.A, lo, hi)] if inst.n_rows else []
    res = milp(inst.c, constraints=cons, bounds=Bounds(inst.lo, inst.hi),
               integrality=inst.binary_mask.astype(int), options=opts)
    elapsed = time.perf_counter() - t0
    if res.status == 2:
        status = "infeasible"
    elif res.status == 3:
        status = "unbounded"
    elif res.x is None:
        status = "limit"
    else:
        obj = inst.objective(res.x)
        bound = getattr(res, "mip_dual_bound", None)
        bound = obj if bound is None or not np.isfinite(bound) else float(bound) + inst.obj_offset
        g = relative_gap(obj, min(bound, obj))
        if res.status == 0:
            status = "optimal" if g <= tol.OPTIMALITY else "gap-feasible"
        else:
            status = "gap-feasible" if g <= gap else "limit"
    sol = PlanSolution(status, solver="highs", seconds=elapsed,
                       nodes=int(getattr(res, "mip_node_count", 0) or 0))
    if res.x is not None and status not in ("infeasible", "unbounded"):
        sol.values = np.asarray(res.x, dtype=float)
        sol.objective = inst.objective(sol.values)
        sol.bound = min(bound, sol.objective)
        sol.gap = relative_gap(sol.objective, sol.bound)
    write_solution(sol_path, inst, sol, positional=True)
    return status


def _highs(instance: MilpInstance, gap, node_limit, time_limit, workdir) -> PlanSolution:
    with _workspace(workdir) as d:
        mps, sol = Path(d) / "model.mps", Path(d) / "model.sol"
        write_mps(instance, mps)
        solve_mps_with_highs(mps, sol, gap, time_limit, node_limit)
        out = read_solution(sol, instance)
    out.solver = "highs"
    return out


def _command(instance: MilpInstance, gap, node_limit, time_limit, workdir) -> PlanSolution:
    cmd = os.environ.get(ENV_VAR)
    if not cmd:
        raise BackendUnavailable(f"set {ENV_VAR} to the external solver command line")
    with _workspace(workdir) as d:
        mps, sol = Path(d) / "model.mps", Path(d) / "model.sol"
        write_mps(instance, mps)
        subst = {"mps": str(mps), "sol": str(sol), "gap": repr(gap),
                 "time_limit": "" if time_limit is None else repr(float(time_limit))}
        if "{mps}" in cmd:
            argv = [a.format(**subst) for a in shlex.split(cmd)]
        else:
            argv = shlex.split(cmd) + [str(mps), str(sol)]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=None)
        except FileNotFoundError:
            raise BackendUnavailable(f"solver command not found: {argv[0]}") from None
        if proc.returncode != 0:
            raise BackendUnavailable(f"solver command exited with {proc.returncode}: "
                                     f"{proc.stderr.strip()[-500:]}")
        if not sol.exists():
            raise MalformedSolutionError("solver command did not write a solution file")
        out = read_solution(sol, instance)
    if out.solver == "external":
        out.solver = Path(argv[0]).name
    return out


class _workspace:
    def __init__(self, workdir):
        self.workdir = workdir
        self._tmp = None

    def __enter__(self) -> str:
        if self.workdir is not None:
            Path(self.workdir).mkdir(parents=True, exist_ok=True)
            return str(self.workdir)
        self._tmp = tempfile.TemporaryDirectory(prefix="gstep-")
        return self._tmp.name

    def __exit__(self, *exc):
        if self._tmp is not None:
            self._tmp.cleanup()


def solve(instance: MilpInstance, backend: str = "builtin", gap: float = 1e-4,
          node_limit: int | None = None, time_limit: float | None = None,
          workdir: str | Path | None = None) -> PlanSolution:
    """Solve with the named backend; ``workdir`` keeps the exchanged files."""
    if gap < 0:
        raise ValueError("gap must be non-negative")
    if backend == "builtin":
        return solve_milp(instance, gap=gap, node_limit=node_limit, time_limit=time_limit)
    if backend == "highs":
        return _highs(instance, gap, node_limit, time_limit, workdir)
    if backend == "command":
        return _command(instance, gap, node_limit, time_limit, workdir)
    raise ValueError(f"unknown backend {backend!r}; expected one of {', '.join(BACKENDS)}")
