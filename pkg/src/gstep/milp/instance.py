"""Sparse MILP container shared by the builder, the solvers and the MPS codec."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np
import scipy.sparse as sp

CONTINUOUS = "continuous"
BINARY = "binary"


@dataclass(frozen=True)
class Variable:
    symbol: str
    index: tuple
    kind: str = CONTINUOUS
    lo: float = 0.0
    hi: float = np.inf

    @property
    def name(self) -> str:
        return var_name(self.symbol, self.index)


def var_name(symbol: str, index: Iterable) -> str:
    return f"{symbol}[{','.join(str(i) for i in index)}]"


@dataclass
class MilpInstance:
    """``min c'x + offset  s.t.  A x (sense) rhs, lo <= x <= hi``.

    ``row_family`` tags each row with the constraint family it implements
    (for example ``"balance"`` for nodal balance); ``context`` carries whatever
    the builder wants downstream consumers (replay, reporting) to see.
    """

    name: str
    variables: list[Variable]
    c: np.ndarray
    A: sp.csr_matrix
    senses: np.ndarray
    rhs: np.ndarray
    row_names: list[str]
    row_family: list[str]
    obj_offset: float = 0.0
    context: Any = field(default=None, repr=False, compare=False)
    _index: dict | None = field(default=None, repr=False, compare=False)

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_rows(self) -> int:
        return len(self.rhs)

    @property
    def lo(self) -> np.ndarray:
        return np.array([v.lo for v in self.variables], dtype=float)

    @property
    def hi(self) -> np.ndarray:
        return np.array([v.hi for v in self.variables], dtype=float)

    @property
    def binary_mask(self) -> np.ndarray:
        return np.array([v.kind == BINARY for v in self.variables], dtype=bool)

    @property
    def n_binary(self) -> int:
        return int(self.binary_mask.sum())

    def column(self, symbol: str, *index) -> int:
        if self._index is None:
            self._index = {(v.symbol, v.index): j for j, v in enumerate(self.variables)}
        return self._index[(symbol, tuple(index))]

    def has(self, symbol: str, *index) -> bool:
        try:
            self.column(symbol, *index)
        except KeyError:
            return False
        return True

    def columns_of(self, symbol: str) -> list[int]:
        return [j for j, v in enumerate(self.variables) if v.symbol == symbol]

    def family_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for f in self.row_family:
            out[f] = out.get(f, 0) + 1
        return out

    def objective(self, x: np.ndarray) -> float:
        return float(self.c @ x + self.obj_offset)

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x

    def max_violation(self, x: np.ndarray) -> float:
        """Largest row or bound violation of ``x`` (absolute units)."""
        act = self.A @ x
        v = np.zeros(len(act))
        L = self.senses == "L"
        G = self.senses == "G"
        E = self.senses == "E"
        v[L] = act[L] - self.rhs[L]
        v[G] = self.rhs[G] - act[G]
        v[E] = np.abs(act[E] - self.rhs[E])
        worst = float(v.max()) if len(v) else 0.0
        if self.n_vars:
            worst = max(worst, float(np.max(self.lo - x)), float(np.max(x - self.hi)))
        return max(worst, 0.0)

    def validate(self) -> None:
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.A.data))
                and np.all(np.isfinite(self.rhs))):
            raise ValueError(f"instance {self.name!r} has non-finite coefficients")
        if self.A.shape != (self.n_rows, self.n_vars):
            raise ValueError("matrix shape does not match rows/variables")
        if len(self.row_family) != self.n_rows or any(not f for f in self.row_family):
            raise ValueError("row family metadata must cover every row")
        for v in self.variables:
            if v.kind == BINARY and (v.lo < 0 or v.hi > 1):
                raise ValueError(f"binary {v.name} has bounds outside [0, 1]")


class InstanceBuilder:
    """Incremental assembly of a :class:`MilpInstance`."""

    def __init__(self, name: str):
        self.name = name
        self.variables: list[Variable] = []
        self.cost: list[float] = []
        self._cols: dict[tuple, int] = {}
        self._ri: list[int] = []
        self._ci: list[int] = []
        self._vals: list[float] = []
        self.senses: list[str] = []
        self.rhs: list[float] = []
        self.row_names: list[str] = []
        self.row_family: list[str] = []
        self.offset = 0.0

    def var(self, symbol: str, index: tuple, lo: float = 0.0, hi: float = np.inf,
            kind: str = CONTINUOUS, cost: float = 0.0) -> int:
        key = (symbol, tuple(index))
        if key in self._cols:
            raise KeyError(f"duplicate variable {var_name(symbol, index)}")
        if kind == BINARY:
            lo, hi = max(lo, 0.0), min(hi, 1.0)
        j = len(self.variables)
        self.variables.append(Variable(symbol, tuple(index), kind, float(lo), float(hi)))
        self.cost.append(float(cost))
        self._cols[key] = j
        return j

    def col(self, symbol: str, *index) -> int:
        return self._cols[(symbol, tuple(index))]

    def get(self, symbol: str, *index) -> int | None:
        return self._cols.get((symbol, tuple(index)))

    def add_cost(self, j: int, amount: float) -> None:
        self.cost[j] += float(amount)

    def row(self, terms, sense: str, rhs: float, family: str, name: str) -> int:
        """``terms`` is an iterable of ``(column, coefficient)`` pairs."""
        i = len(self.rhs)
        for j, a in terms:
            if a != 0.0:
                self._ri.append(i)
                self._ci.append(j)
                self._vals.append(float(a))
        self.senses.append(sense)
        self.rhs.append(float(rhs))
        self.row_names.append(name)
        self.row_family.append(family)
        return i

    def finish(self, context: Any = None) -> MilpInstance:
        m, n = len(self.rhs), len(self.variables)
        A = sp.csr_matrix((self._vals, (self._ri, self._ci)), shape=(m, n))
        A.sum_duplicates()
        A.eliminate_zeros()
        inst = MilpInstance(
            name=self.name,
            variables=list(self.variables),
            c=np.array(self.cost, dtype=float),
            A=A,
            senses=np.array(self.senses, dtype="<U1"),
            rhs=np.array(self.rhs, dtype=float),
            row_names=list(self.row_names),
            row_family=list(self.row_family),
            obj_offset=self.offset,
            context=context,
        )
        inst.validate()
        return inst


@dataclass
class PlanSolution:
    """Solver output for a :class:`MilpInstance`.

    ``gap`` is ``(objective - bound) / max(1, |objective|)``.
    """

    status: str  # optimal | gap-feasible | limit | infeasible | unbounded
    values: np.ndarray | None = None
    objective: float = float("nan")
    bound: float = float("nan")
    gap: float = float("nan")
    solver: str = "builtin"
    nodes: int = 0
    lp_iterations: int = 0
    seconds: float = 0.0
    bound_trace: list[float] = field(default_factory=list, repr=False)

    @property
    def has_solution(self) -> bool:
        return self.values is not None

    def value(self, instance: MilpInstance, symbol: str, *index) -> float:
        return float(self.values[instance.column(symbol, *index)])


def relative_gap(objective: float, bound: float) -> float:
    return max(objective - bound, 0.0) / max(1.0, abs(objective))
