"""LP-based branch-and-bound for MILPs with binary variables.

Node selection plunges depth-first from each node toward the rounded
direction of the branching variable and falls back to best-bound when a
plunge ends.  Children are re-optimised from their parent's basis with the
dual simplex.  The reported bound is the smallest LP bound over open nodes,
so it never decreases.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..milp.instance import MilpInstance, PlanSolution, relative_gap
from . import tolerances as tol
from .lp import LpBasis, solve_lp

log = logging.getLogger(__name__)


class SolverLimitError(RuntimeError):
    """A node or time limit was reached before any feasible solution was found."""


@dataclass(order=True)
class _Node:
    bound: float
    seq: int
    fixings: dict = field(compare=False)
    basis: LpBasis | None = field(compare=False, default=None)
    depth: int = field(compare=False, default=0)


def _bounds(base_lo, base_hi, fixings):
    lo = base_lo.copy()
    hi = base_hi.copy()
    for j, v in fixings.items():
        lo[j] = hi[j] = v
    return lo, hi


def solve_milp(
    instance: MilpInstance,
    gap: float = 1e-4,
    node_limit: int | None = None,
    time_limit: float | None = None,
) -> PlanSolution:
    """Solve ``instance`` to relative gap ``gap``.

    Status is ``optimal`` when the tree closes (or the gap is zero),
    ``gap-feasible`` when search stops with ``0 < gap <= gap``, ``limit``
    when a limit is hit with an incumbent, else ``infeasible`` or
    ``unbounded``.  A limit without incumbent raises :class:`SolverLimitError`.
    """
    t0 = time.perf_counter()
    c, A, senses, b = instance.c, instance.A, instance.senses, instance.rhs
    base_lo, base_hi = instance.lo, instance.hi
    binaries = np.flatnonzero(instance.binary_mask)
    seq = itertools.count()

    inc_x: np.ndarray | None = None
    inc_obj = np.inf
    nodes = 0
    iters = 0
    trace: list[float] = []
    heap: list[_Node] = []
    current: _Node | None = _Node(-np.inf, next(seq), {}, None, 0)
    limit_hit = False

    def global_bound() -> float:
        cands = [n.bound for n in heap[:1]]
        if current is not None:
            cands.append(current.bound)
        return min(cands) if cands else inc_obj

    def finish(status: str) -> PlanSolution:
        elapsed = time.perf_counter() - t0
        if inc_x is None:
            return PlanSolution(status, nodes=nodes, lp_iterations=iters,
                                seconds=elapsed, bound_trace=trace)
        obj = inc_obj + instance.obj_offset
        bnd = min(global_bound(), inc_obj) + instance.obj_offset
        g = relative_gap(obj, bnd)
        if status == "closed":
            status = "optimal" if g <= tol.OPTIMALITY else "gap-feasible"
        return PlanSolution(status, inc_x, obj, bnd, g, "builtin", nodes, iters,
                            elapsed, trace)

    while True:
        if current is None:
            while heap and heap[0].bound >= inc_obj - _prune_tol(inc_obj):
                heapq.heappop(heap)
            if not heap:
                break
            current = heapq.heappop(heap)
        trace.append(global_bound())
        if inc_x is not None:
            gb = global_bound()
            if relative_gap(inc_obj + instance.obj_offset, gb + instance.obj_offset) <= gap:
                break
        if (node_limit is not None and nodes >= node_limit) or (
            time_limit is not None and time.perf_counter() - t0 > time_limit
        ):
            limit_hit = True
            break

        node = current
        lo, hi = _bounds(base_lo, base_hi, node.fixings)
        res = solve_lp(c, A, senses, b, lo, hi, basis=node.basis)
        nodes += 1
        iters += res.iterations
        if res.status == "unbounded":
            if nodes == 1:
                return PlanSolution("unbounded", nodes=nodes, lp_iterations=iters,
                                    seconds=time.perf_counter() - t0)
            current = None
            continue
        if res.status != "optimal":
            if res.status == "iteration_limit":
                log.warning("node LP hit the iteration limit; node dropped")
            current = None
            continue
        bound = max(res.objective, node.bound)
        node.bound = bound
        if bound >= inc_obj - _prune_tol(inc_obj):
            current = None
            continue

        xb = res.x[binaries]
        frac = np.minimum(xb - np.floor(xb), np.ceil(xb) - xb)
        open_ = frac > tol.INTEGRALITY
        if not open_.any():
            x = res.x.copy()
            if len(binaries):
                fixed = dict(node.fixings)
                for j in binaries:
                    fixed[int(j)] = float(round(x[j]))
                plo, phi = _bounds(base_lo, base_hi, fixed)
                pol = solve_lp(c, A, senses, b, plo, phi, basis=res.basis)
                iters += pol.iterations
                if pol.status == "optimal":
                    x = pol.x
                    obj = pol.objective
                else:
                    x[binaries] = np.round(x[binaries])
                    obj = float(c @ x)
            else:
                obj = res.objective
            if obj < inc_obj:
                inc_obj, inc_x = obj, x
                log.debug("incumbent %.6g at node %d", obj + instance.obj_offset, nodes)
            current = None
            continue

        # most fractional, smallest index on ties
        k = int(np.argmax(np.where(open_, frac, -1.0)))
        j = int(binaries[k])
        val = res.x[j]
        up_first = val - np.floor(val) >= 0.5
        kids = []
        for v in (1.0, 0.0) if up_first else (0.0, 1.0):
            fx = dict(node.fixings)
            fx[j] = v
            kids.append(_Node(bound, next(seq), fx, res.basis, node.depth + 1))
        heapq.heappush(heap, kids[1])
        current = kids[0]

    if limit_hit:
        if inc_x is None:
            raise SolverLimitError(
                f"limit reached after {nodes} nodes without a feasible solution")
        return finish("limit")
    if inc_x is None:
        return PlanSolution("infeasible", nodes=nodes, lp_iterations=iters,
                            seconds=time.perf_counter() - t0, bound_trace=trace)
    return finish("closed")


def _prune_tol(inc: float) -> float:
    if not np.isfinite(inc):
        return 0.0
    return 1e-9 * max(1.0, abs(inc))
