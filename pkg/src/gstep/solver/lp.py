"""Bounded-variable revised simplex.

Problems are given as ``min c'x  s.t.  A x (<=|>=|=) b,  lo <= x <= hi`` with
``A`` sparse.  Every row gets a slack column (``A x + s = b``) whose bounds
encode the row sense, so the slack basis is always a valid starting point.
Primal infeasibility is removed by a composite phase 1 (minimise the sum of
bound violations of the basic variables), which also lets the primal method
start from any basis.  A dual simplex re-optimises from a dual-feasible basis
after bound changes (branch-and-bound children).

The basis is held as a sparse LU factorisation plus an eta file (product
form of the inverse), refactorised every ``REFACTOR_EVERY`` pivots.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import tolerances as tol

log = logging.getLogger(__name__)

AT_LOWER, AT_UPPER, AT_ZERO, BASIC = 0, 1, 2, 3

REFACTOR_EVERY = 64
STALL_LIMIT = 30


class LpNumericalError(RuntimeError):
    """The basis became singular and could not be repaired."""


@dataclass
class LpBasis:
    """Basic column per row position plus a status code for every column.

    Columns ``0..n-1`` are structural, ``n..n+m-1`` are row slacks.
    """

    head: np.ndarray
    status: np.ndarray

    def copy(self) -> "LpBasis":
        return LpBasis(self.head.copy(), self.status.copy())


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded | iteration_limit
    x: np.ndarray | None = None
    objective: float = float("nan")
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    iterations: int = 0
    basis: LpBasis | None = None
    slacks: np.ndarray | None = field(default=None, repr=False)


def _pow2(v: np.ndarray) -> np.ndarray:
    return np.exp2(np.round(np.log2(v)))


def _equilibrate(A: sp.csr_matrix, passes: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Geometric-mean row/column scale factors, rounded to powers of two."""
    m, n = A.shape
    r = np.ones(m)
    s = np.ones(n)
    absA = abs(A).tocsr()
    for _ in range(passes):
        M = sp.diags(r) @ absA @ sp.diags(s)
        M = M.tocsr()
        rmax = np.zeros(m)
        rmin = np.full(m, np.inf)
        nz_rows = np.diff(M.indptr) > 0
        if M.nnz:
            rmax[nz_rows] = np.maximum.reduceat(M.data, M.indptr[:-1][nz_rows])
            rmin[nz_rows] = np.minimum.reduceat(M.data, M.indptr[:-1][nz_rows])
        fr = np.ones(m)
        fr[nz_rows] = 1.0 / np.sqrt(rmax[nz_rows] * rmin[nz_rows])
        r *= _pow2(fr)
        M = (sp.diags(r) @ absA @ sp.diags(s)).tocsc()
        cmax = np.zeros(n)
        cmin = np.full(n, np.inf)
        nz_cols = np.diff(M.indptr) > 0
        if M.nnz:
            cmax[nz_cols] = np.maximum.reduceat(M.data, M.indptr[:-1][nz_cols])
            cmin[nz_cols] = np.minimum.reduceat(M.data, M.indptr[:-1][nz_cols])
        fc = np.ones(n)
        fc[nz_cols] = 1.0 / np.sqrt(cmax[nz_cols] * cmin[nz_cols])
        s *= _pow2(fc)
    return r, s


class _Simplex:
    """Working state of one (scaled) LP: columns are structurals then slacks."""

    def __init__(self, c, A: sp.csc_matrix, b, lo, hi):
        self.m, self.n = A.shape
        self.N = self.n + self.m
        self.A = A
        self.AT = A.T.tocsr()
        self.b = b
        self.c = c
        self.lo = lo
        self.hi = hi
        self.x = np.zeros(self.N)
        self.status = np.empty(self.N, dtype=np.int8)
        self.head = np.arange(self.n, self.N)
        self.lu = None
        self.etas: list[tuple[int, np.ndarray]] = []
        self.iterations = 0
        self._since_refactor = 0

    # -- basis bookkeeping -------------------------------------------------
    def _place_nonbasic(self, j: int) -> None:
        if np.isfinite(self.lo[j]):
            self.status[j], self.x[j] = AT_LOWER, self.lo[j]
        elif np.isfinite(self.hi[j]):
            self.status[j], self.x[j] = AT_UPPER, self.hi[j]
        else:
            self.status[j], self.x[j] = AT_ZERO, 0.0

    def cold_start(self) -> None:
        for j in range(self.n):
            self._place_nonbasic(j)
        self.head = np.arange(self.n, self.N)
        self.status[self.n:] = BASIC
        self.refactor()

    def warm_start(self, basis: LpBasis) -> None:
        self.head = basis.head.copy()
        self.status[:] = basis.status
        for j in np.flatnonzero(self.status != BASIC):
            st = self.status[j]
            if st == AT_LOWER and np.isfinite(self.lo[j]):
                self.x[j] = self.lo[j]
            elif st == AT_UPPER and np.isfinite(self.hi[j]):
                self.x[j] = self.hi[j]
            else:
                self._place_nonbasic(j)
        self.refactor()

    def column(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        if j < self.n:
            sl = slice(self.A.indptr[j], self.A.indptr[j + 1])
            return self.A.indices[sl], self.A.data[sl]
        return np.array([j - self.n]), np.array([1.0])

    def refactor(self) -> None:
        rows, cols, vals = [], [], []
        for k, j in enumerate(self.head):
            r, v = self.column(j)
            rows.append(r)
            vals.append(v)
            cols.append(np.full(len(r), k))
        B = sp.csc_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.m, self.m),
        )
        try:
            self.lu = splu(B)
        except RuntimeError as exc:
            raise LpNumericalError("singular basis") from exc
        self.etas = []
        self._since_refactor = 0
        self._recompute_basic()
        if not np.all(np.isfinite(self.x[self.head])):
            raise LpNumericalError("non-finite basic solution")

    def _recompute_basic(self) -> None:
        xs = self.x.copy()
        xs[self.head] = 0.0
        r = self.b - (self.A @ xs[: self.n] + xs[self.n:])
        self.x[self.head] = self._solve(r)

    def _solve(self, v: np.ndarray) -> np.ndarray:
        """B^-1 v through the LU factor and the eta file."""
        v = self.lu.solve(v) if self.m else v
        for p, w in self.etas:
            vp = v[p] / w[p]
            v -= vp * w
            v[p] = vp
        return v

    def _solve_t(self, u: np.ndarray) -> np.ndarray:
        """u' B^-1 (row vector) through the eta file in reverse and the LU factor."""
        u = u.astype(float, copy=True)
        for p, w in reversed(self.etas):
            u[p] += (u[p] - u @ w) / w[p]
        return self.lu.solve(u, trans="T") if self.m else u

    def _ftran(self, j: int) -> np.ndarray:
        rows, vals = self.column(j)
        a = np.zeros(self.m)
        a[rows] = vals
        return self._solve(a)

    def _row_times_A(self, v: np.ndarray) -> np.ndarray:
        return np.concatenate([self.AT @ v, v])

    def _pricing(self, cost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y = self._solve_t(cost[self.head])
        d = cost - self._row_times_A(y)
        d[self.head] = 0.0
        return y, d

    def _basis_row(self, p: int) -> np.ndarray:
        e = np.zeros(self.m)
        e[p] = 1.0
        return self._solve_t(e)

    def _pivot(self, p: int, q: int, w: np.ndarray) -> None:
        self.etas.append((p, w))
        self.head[p] = q
        self.status[q] = BASIC
        self._since_refactor += 1
        self.iterations += 1
        if self._since_refactor >= REFACTOR_EVERY:
            self.refactor()

    def _leave(self, j: int, at_upper: bool) -> None:
        if at_upper and self.hi[j] > self.lo[j]:
            self.status[j], self.x[j] = AT_UPPER, self.hi[j]
        else:
            self.status[j], self.x[j] = AT_LOWER, self.lo[j]

    # -- primal ------------------------------------------------------------
    def _entering(self, d: np.ndarray, bland: bool) -> tuple[int | None, int]:
        st = self.status
        movable = self.hi > self.lo
        up = ((st == AT_LOWER) & movable & (d < -tol.OPTIMALITY)) | (
            (st == AT_ZERO) & (d < -tol.OPTIMALITY)
        )
        down = ((st == AT_UPPER) & (d > tol.OPTIMALITY)) | (
            (st == AT_ZERO) & (d > tol.OPTIMALITY)
        )
        elig = up | down
        if not elig.any():
            return None, 0
        if bland:
            q = int(np.flatnonzero(elig)[0])
        else:
            score = np.where(elig, np.abs(d), 0.0)
            q = int(np.argmax(score))
        return q, (1 if up[q] else -1)

    def primal(self, max_iter: int) -> str:
        bland = False
        stall = 0
        while True:
            if self.iterations >= max_iter:
                return "iteration_limit"
            head = self.head
            xB, loB, hiB = self.x[head], self.lo[head], self.hi[head]
            below = xB < loB - tol.FEASIBILITY
            above = xB > hiB + tol.FEASIBILITY
            phase1 = bool(below.any() or above.any())
            if phase1:
                cost = np.zeros(self.N)
                cost[head[below]] = -1.0
                cost[head[above]] = 1.0
            else:
                cost = self.c
            _, d = self._pricing(cost)
            q, direction = self._entering(d, bland)
            if q is None:
                return "infeasible" if phase1 else "optimal"
            w = self._ftran(q)
            g = direction * w

            # xB(t) = xB - t*g ; find the target bound each basic variable runs into
            dec = g > tol.PIVOT
            inc = g < -tol.PIVOT
            target = np.full(self.m, np.nan)
            if phase1:
                inside = ~above & ~below
                to_upper = (dec & above) | (inc & inside)
                target[dec & above] = hiB[dec & above]
                target[dec & inside] = loB[dec & inside]
                target[inc & below] = loB[inc & below]
                target[inc & inside] = hiB[inc & inside]
            else:
                to_upper = inc
                target[dec] = loB[dec]
                target[inc] = hiB[inc]
            cand = np.isfinite(target)
            flip = self.hi[q] - self.lo[q] if self.status[q] != AT_ZERO else np.inf
            if not cand.any():
                if not np.isfinite(flip):
                    if phase1:
                        raise LpNumericalError("unbounded phase-1 direction")
                    return "unbounded"
                self._flip(q, direction, flip, g)
                stall = 0 if flip > 1e-12 else stall + 1
                bland = bland and stall > 0
                continue
            idx = np.flatnonzero(cand)
            gi = g[idx]
            exact = (xB[idx] - target[idx]) / gi
            exact = np.maximum(exact, 0.0)
            if bland:
                tmin = exact.min()
                ties = idx[exact <= tmin + 1e-12]
                p = int(ties[np.argmin(head[ties])])
                step = float(max((xB[p] - target[p]) / g[p], 0.0))
            else:
                relaxed = (xB[idx] - target[idx] + np.sign(gi) * tol.FEASIBILITY) / gi
                tmax = relaxed.min()
                ok = exact <= tmax
                k = np.flatnonzero(ok)[np.argmax(np.abs(gi[ok]))]
                p = int(idx[k])
                step = float(exact[k])
            if flip <= step:
                self._flip(q, direction, flip, g)
                step = flip
            else:
                leaving = int(head[p])
                at_upper = bool(to_upper[p])
                self.x[q] += direction * step
                self.x[head] -= step * g
                self._leave(leaving, at_upper)
                self._pivot(p, q, w)
            if step <= 1e-12:
                stall += 1
                if stall > STALL_LIMIT:
                    bland = True
            else:
                stall = 0
                bland = False

    def _flip(self, q: int, direction: int, flip: float, g: np.ndarray) -> None:
        self.x[self.head] -= flip * g
        if direction > 0:
            self.status[q], self.x[q] = AT_UPPER, self.hi[q]
        else:
            self.status[q], self.x[q] = AT_LOWER, self.lo[q]
        self.iterations += 1

    # -- dual --------------------------------------------------------------
    def dual_feasible(self) -> bool:
        _, d = self._pricing(self.c)
        st = self.status
        bad = ((st == AT_LOWER) & (self.hi > self.lo) & (d < -tol.OPTIMALITY)) | (
            (st == AT_UPPER) & (d > tol.OPTIMALITY)
        ) | ((st == AT_ZERO) & (np.abs(d) > tol.OPTIMALITY))
        return not bad.any()

    def dual(self, max_iter: int) -> str:
        while True:
            if self.iterations >= max_iter:
                return "iteration_limit"
            head = self.head
            xB, loB, hiB = self.x[head], self.lo[head], self.hi[head]
            viol = np.maximum(loB - xB, xB - hiB)
            p = int(np.argmax(viol))
            if viol[p] <= tol.FEASIBILITY:
                return "primal_feasible"
            below = xB[p] < loB[p]
            _, d = self._pricing(self.c)
            alpha = self._row_times_A(self._basis_row(p))
            alpha[head] = 0.0
            st = self.status
            movable = self.hi > self.lo
            can_up = ((st == AT_LOWER) & movable) | (st == AT_ZERO)
            can_down = (st == AT_UPPER) | (st == AT_ZERO)
            if below:
                elig = (can_up & (alpha < -tol.PIVOT)) | (can_down & (alpha > tol.PIVOT))
            else:
                elig = (can_up & (alpha > tol.PIVOT)) | (can_down & (alpha < -tol.PIVOT))
            if not elig.any():
                return "infeasible"
            idx = np.flatnonzero(elig)
            a = np.abs(alpha[idx])
            dj = np.abs(d[idx])
            tmax = ((dj + tol.OPTIMALITY) / a).min()
            ok = dj / a <= tmax
            q = int(idx[ok][np.argmax(a[ok])])
            w = self._ftran(q)
            if abs(w[p]) < tol.PIVOT:
                self.refactor()
                continue
            target = loB[p] if below else hiB[p]
            dx = (xB[p] - target) / w[p]
            leaving = int(head[p])
            self.x[q] += dx
            self.x[head] -= dx * w
            self._leave(leaving, not below)
            self._pivot(p, q, w)

    def basis(self) -> LpBasis:
        return LpBasis(self.head.copy(), self.status.copy())


def _slack_bounds(senses: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = len(senses)
    lo = np.zeros(m)
    hi = np.zeros(m)
    hi[senses == "L"] = np.inf
    lo[senses == "G"] = -np.inf
    return lo, hi


def solve_lp(
    c,
    A,
    senses,
    b,
    lo,
    hi,
    basis: LpBasis | None = None,
    max_iter: int | None = None,
    scale: bool = True,
) -> LpResult:
    """Minimise ``c'x`` over ``{x : A x (sense) b, lo <= x <= hi}``.

    ``senses`` holds one of ``'L'``, ``'G'``, ``'E'`` per row.  ``basis`` is an
    optional starting basis from a previous solve of a problem with the same
    matrix; it is re-optimised with the dual simplex when dual feasible.

    Returns an :class:`LpResult`; ``duals`` are row multipliers ``y`` and
    ``reduced_costs`` are ``c - A'y`` for the structural columns.
    """
    c = np.asarray(c, dtype=float)
    A = sp.csr_matrix(A, dtype=float)
    senses = np.asarray(senses)
    b = np.asarray(b, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    m, n = A.shape
    if np.any(lo > hi + tol.FEASIBILITY):
        return LpResult("infeasible")
    for arr in (c, b, A.data):
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite coefficient in LP data")

    if m == 0:
        # bounds only: each column sits at whichever bound its cost prefers
        if np.any((c < 0) & np.isinf(hi)) or np.any((c > 0) & np.isinf(lo)):
            return LpResult("unbounded")
        x = np.where(c < 0, hi, np.where(c > 0, lo, np.clip(0.0, lo, hi)))
        return LpResult("optimal", x, float(c @ x), np.zeros(0), c.copy(), 0, None, np.zeros(0))

    if scale and m and n and A.nnz:
        r, s = _equilibrate(A)
    else:
        r, s = np.ones(m), np.ones(n)
    As = (sp.diags(r) @ A @ sp.diags(s)).tocsc()
    cs = c * s
    cmax = float(np.abs(cs).max()) if n else 1.0
    cmax = cmax if cmax > 0 else 1.0
    slo, shi = _slack_bounds(senses)
    full_c = np.concatenate([cs / cmax, np.zeros(m)])
    full_lo = np.concatenate([lo / s, slo])
    full_hi = np.concatenate([hi / s, shi])
    sx = _Simplex(full_c, As, b * r, full_lo, full_hi)
    max_iter = max_iter or max(20000, 50 * (m + n))

    status = None
    if basis is not None and len(basis.head) == m and len(basis.status) == n + m:
        try:
            sx.warm_start(basis)
            if sx.dual_feasible():
                st = sx.dual(max_iter)
                if st == "infeasible":
                    status = "infeasible"
                elif st == "primal_feasible":
                    status = sx.primal(max_iter)
            else:
                status = sx.primal(max_iter)
        except LpNumericalError:
            log.debug("warm start failed; cold start")
            status = None
        if status == "iteration_limit":
            status = None
    if status is None:
        sx.iterations = 0
        sx.cold_start()
        status = sx.primal(max_iter)
    if status == "optimal":
        # clean residual drift before reporting
        sx.refactor()
        if np.any(sx.x[sx.head] < sx.lo[sx.head] - tol.FEASIBILITY) or np.any(
            sx.x[sx.head] > sx.hi[sx.head] + tol.FEASIBILITY
        ):
            status = sx.primal(max_iter + sx.iterations)
    res = LpResult(status, iterations=sx.iterations, basis=sx.basis())
    if status != "optimal":
        return res
    y, d = sx._pricing(sx.c)
    x = sx.x[:n] * s
    x = np.clip(x, lo, hi)
    res.x = x
    res.slacks = sx.x[n:] / r
    res.objective = float(c @ x)
    res.duals = y * r * cmax
    res.reduced_costs = d[:n] / s * cmax
    return res
