"""Sparse linear-program container and solver front end.

Problems are built column by column and row by row, then handed to a backend.
Two backends ship:

* ``"highs"`` -- the HiGHS dual simplex bundled with SciPy (default, used for
  year-long horizons with ~10^5 columns);
* ``"native"`` -- the dense bounded-variable primal simplex in
  :mod:`h2plan.simplex`, dependency-free apart from numpy and intended for
  small problems and cross-checks.

Any callable ``backend(problem) -> LpSolution`` can be registered with
:func:`register_backend`.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InvalidBounds, LpError, SolverFailure, UnknownVariable

FEASIBILITY_TOL = 1e-6
PIVOT_TOL = 1e-9


class Sense(str, enum.Enum):
    LE = "<="
    EQ = "="
    GE = ">="

    @classmethod
    def parse(cls, value) -> "Sense":
        if isinstance(value, Sense):
            return value
        aliases = {"<=": cls.LE, "=<": cls.LE, "le": cls.LE, "=": cls.EQ, "==": cls.EQ,
                   "eq": cls.EQ, ">=": cls.GE, "=>": cls.GE, "ge": cls.GE}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown constraint sense {value!r}") from None


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LpSolution:
    status: Status
    values: np.ndarray
    objective_value: float
    backend: str = ""
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class LpProblem:
    """Minimisation LP: ``min c.x  s.t.  rows (<=,=,>=) rhs,  lb <= x <= ub``.

    Rows are stored as COO chunks so that whole blocks (one row per hour) can be
    appended with a single call to :meth:`add_rows`.
    """

    def __init__(self, name: str = "lp"):
        self.name = name
        self._lb: list[np.ndarray] = []
        self._ub: list[np.ndarray] = []
        self._names: list[tuple[int, int, str]] = []  # (first id, count, base name)
        self.n_vars = 0
        self._rows: list[np.ndarray] = []
        self._cols: list[np.ndarray] = []
        self._vals: list[np.ndarray] = []
        self._sense: list[np.ndarray] = []
        self._rhs: list[np.ndarray] = []
        self.n_rows = 0
        self._objective: np.ndarray | None = None
        self._cache: dict = {}

    # -- columns -------------------------------------------------------------

    def add_variable(self, lower: float = 0.0, upper: float = math.inf, name: str | None = None) -> int:
        return int(self.add_variables(1, lower, upper, name=name)[0])

    def add_variables(self, n: int, lower=0.0, upper=math.inf, name: str | None = None) -> np.ndarray:
        """Append ``n`` columns; ``lower``/``upper`` may be scalars or length-``n`` arrays."""
        n = int(n)
        if n < 0:
            raise ValueError("n must be non-negative")
        lb = np.broadcast_to(np.asarray(lower, dtype=float), (n,)).copy()
        ub = np.broadcast_to(np.asarray(upper, dtype=float), (n,)).copy()
        bad = np.isnan(lb) | np.isnan(ub) | (lb > ub) | (lb == math.inf) | (ub == -math.inf)
        if bad.any():
            i = int(np.argmax(bad))
            raise InvalidBounds(f"invalid bounds [{lb[i]}, {ub[i]}] for new variable {self.n_vars + i}")
        first = self.n_vars
        self._lb.append(lb)
        self._ub.append(ub)
        if name is not None:
            self._names.append((first, n, name))
        self.n_vars += n
        self._cache.clear()
        return np.arange(first, first + n)

    def set_bounds(self, ids, lower, upper) -> None:
        ids = self._check_ids(np.atleast_1d(np.asarray(ids)))
        lb, ub = self.bounds()
        new_lb = lb.copy()
        new_ub = ub.copy()
        new_lb[ids] = lower
        new_ub[ids] = upper
        if (new_lb[ids] > new_ub[ids]).any() or np.isnan(new_lb[ids]).any() or np.isnan(new_ub[ids]).any():
            raise InvalidBounds("lower bound exceeds upper bound")
        self._lb, self._ub = [new_lb], [new_ub]
        self._cache.clear()

    # -- rows ----------------------------------------------------------------

    def add_constraint(self, terms: Iterable[tuple[int, float]], sense, rhs: float) -> int:
        terms = list(terms)
        cols = np.array([int(j) for j, _ in terms], dtype=np.int64)
        vals = np.array([float(a) for _, a in terms], dtype=float)
        self._check_ids(cols)
        row = self.n_rows
        self._append(np.full(len(cols), row, dtype=np.int64), cols, vals, [Sense.parse(sense)], [float(rhs)])
        return row

    def add_rows(self, cols, coefs, sense, rhs) -> np.ndarray:
        """Append a block of ``k`` rows with the same number of terms each.

        ``cols`` and ``coefs`` have shape ``(k, terms)``; ``sense`` is one sense for
        the block; ``rhs`` is a scalar or length-``k`` array. Returns the row ids.
        """
        cols = np.atleast_2d(np.asarray(cols, dtype=np.int64))
        coefs = np.broadcast_to(np.asarray(coefs, dtype=float), cols.shape)
        k = cols.shape[0]
        self._check_ids(cols.ravel())
        first = self.n_rows
        rows = np.repeat(np.arange(first, first + k), cols.shape[1])
        rhs = np.broadcast_to(np.asarray(rhs, dtype=float), (k,))
        self._append(rows, cols.ravel(), coefs.ravel(), [Sense.parse(sense)] * k, rhs)
        return np.arange(first, first + k)

    def _append(self, rows, cols, vals, senses, rhs):
        if not np.all(np.isfinite(vals)) or not np.all(np.isfinite(rhs)):
            raise LpError("constraint coefficients and right-hand sides must be finite")
        self._rows.append(rows)
        self._cols.append(cols)
        self._vals.append(vals)
        self._sense.append(np.array([s.value for s in senses], dtype=object))
        self._rhs.append(np.asarray(rhs, dtype=float).copy())
        self.n_rows += len(senses)
        self._cache.clear()

    # -- objective -----------------------------------------------------------

    def set_objective(self, terms, direction: str = "minimize") -> None:
        """Replace the objective. ``terms`` is ``[(id, coef), ...]`` or ``(ids, coefs)`` arrays."""
        if direction not in ("minimize", "min"):
            raise ValueError("only minimisation is supported; negate the coefficients to maximise")
        if isinstance(terms, tuple) and len(terms) == 2 and isinstance(terms[0], np.ndarray):
            ids, coefs = terms
        else:
            terms = list(terms)
            ids = np.array([int(j) for j, _ in terms], dtype=np.int64)
            coefs = np.array([float(a) for _, a in terms], dtype=float)
        ids = self._check_ids(np.asarray(ids, dtype=np.int64))
        c = np.zeros(self.n_vars)
        np.add.at(c, ids, np.asarray(coefs, dtype=float))
        self._objective = c
        self._cache.clear()

    # -- accessors -----------------------------------------------------------

    @property
    def has_objective(self) -> bool:
        return self._objective is not None

    def objective(self) -> np.ndarray:
        if self._objective is None:
            raise LpError("objective has not been set")
        c = self._objective
        if len(c) < self.n_vars:  # columns added after set_objective carry zero cost
            c = np.concatenate([c, np.zeros(self.n_vars - len(c))])
        return c

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if "bounds" not in self._cache:
            lb = np.concatenate(self._lb) if self._lb else np.zeros(0)
            ub = np.concatenate(self._ub) if self._ub else np.zeros(0)
            self._cache["bounds"] = (lb, ub)
        return self._cache["bounds"]

    def matrix(self) -> sp.csr_matrix:
        if "A" not in self._cache:
            if self._rows:
                rows = np.concatenate(self._rows)
                cols = np.concatenate(self._cols)
                vals = np.concatenate(self._vals)
            else:
                rows = cols = np.zeros(0, dtype=np.int64)
                vals = np.zeros(0)
            A = sp.coo_matrix((vals, (rows, cols)), shape=(self.n_rows, self.n_vars)).tocsr()
            A.sum_duplicates()
            self._cache["A"] = A
        return self._cache["A"]

    def senses(self) -> np.ndarray:
        return np.concatenate(self._sense) if self._sense else np.zeros(0, dtype=object)

    def rhs(self) -> np.ndarray:
        return np.concatenate(self._rhs) if self._rhs else np.zeros(0)

    def variable_name(self, j: int) -> str:
        for first, n, base in self._names:
            if first <= j < first + n:
                return base if n == 1 else f"{base}_{j - first}"
        return f"x{j}"

    def _check_ids(self, ids: np.ndarray) -> np.ndarray:
        if ids.size and (ids.min() < 0 or ids.max() >= self.n_vars):
            bad = ids[(ids < 0) | (ids >= self.n_vars)][0]
            raise UnknownVariable(f"variable id {bad} not in problem with {self.n_vars} variables")
        return ids

    def residuals(self, x: np.ndarray) -> np.ndarray:
        """Signed constraint violation per row (0 when satisfied)."""
        act = self.matrix() @ x
        b = self.rhs()
        s = self.senses()
        viol = np.zeros(self.n_rows)
        le = s == Sense.LE.value
        ge = s == Sense.GE.value
        eq = s == Sense.EQ.value
        viol[le] = np.maximum(act[le] - b[le], 0.0)
        viol[ge] = np.maximum(b[ge] - act[ge], 0.0)
        viol[eq] = np.abs(act[eq] - b[eq])
        return viol


# --- backends ------------------------------------------------------------------

Backend = Callable[[LpProblem], LpSolution]
_BACKENDS: dict[str, Backend] = {}


def register_backend(name: str, fn: Backend) -> None:
    _BACKENDS[name] = fn


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def default_backend() -> str:
    return os.environ.get("H2PLAN_SOLVER", "highs")


def solve(problem: LpProblem, backend: str | None = None) -> LpSolution:
    """Solve ``problem``; the result status is one of :class:`Status`."""
    if not problem.has_objective:
        raise LpError("objective has not been set")
    name = backend or default_backend()
    try:
        fn = _BACKENDS[name]
    except KeyError:
        raise LpError(f"unknown LP backend {name!r}; available: {available_backends()}") from None
    return fn(problem)


def _clip(problem: LpProblem, x: np.ndarray) -> np.ndarray:
    lb, ub = problem.bounds()
    return np.minimum(np.maximum(x, lb), ub)


def _solve_highs(problem: LpProblem) -> LpSolution:
    from scipy.optimize import linprog

    c = problem.objective()
    lb, ub = problem.bounds()
    n = problem.n_vars
    if n == 0:
        feasible = not np.any(problem.residuals(np.zeros(0)) > FEASIBILITY_TOL)
        return LpSolution(Status.OPTIMAL if feasible else Status.INFEASIBLE, np.zeros(0), 0.0, "highs")
    A = problem.matrix()
    s = problem.senses()
    b = problem.rhs()
    le = s == Sense.LE.value
    ge = s == Sense.GE.value
    eq = s == Sense.EQ.value
    A_ub = sp.vstack([A[le], -A[ge]]).tocsr() if (le.any() or ge.any()) else None
    b_ub = np.concatenate([b[le], -b[ge]]) if A_ub is not None else None
    A_eq = A[eq] if eq.any() else None
    b_eq = b[eq] if eq.any() else None
    bounds = np.column_stack([lb, ub])
    options = {"primal_feasibility_tolerance": 1e-9, "dual_feasibility_tolerance": 1e-9, "presolve": True}
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                  method="highs-ds", options=options)
    if res.status == 0:
        x = _clip(problem, np.asarray(res.x, dtype=float))
        return LpSolution(Status.OPTIMAL, x, float(c @ x), "highs", int(getattr(res, "nit", 0) or 0))
    if res.status == 2:
        return LpSolution(Status.INFEASIBLE, np.full(n, np.nan), math.nan, "highs")
    if res.status == 3:
        # presolve cannot always tell unbounded from infeasible; settle it without presolve
        options["presolve"] = False
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                      method="highs-ds", options=options)
        if res.status == 2:
            return LpSolution(Status.INFEASIBLE, np.full(n, np.nan), math.nan, "highs")
        return LpSolution(Status.UNBOUNDED, np.full(n, np.nan), -math.inf, "highs")
    raise SolverFailure(f"HiGHS stopped with status {res.status}: {res.message}")


def _solve_native(problem: LpProblem) -> LpSolution:
    from .simplex import bounded_simplex

    A = problem.matrix().toarray()
    lb, ub = problem.bounds()
    s = problem.senses()
    b = problem.rhs()
    row_lo = np.where(s == Sense.LE.value, -math.inf, b)
    row_hi = np.where(s == Sense.GE.value, math.inf, b)
    c = problem.objective()
    status, x, iters = bounded_simplex(c, A, row_lo, row_hi, lb, ub)
    if status == "optimal":
        x = _clip(problem, x)
        return LpSolution(Status.OPTIMAL, x, float(c @ x), "native", iters)
    if status == "infeasible":
        return LpSolution(Status.INFEASIBLE, np.full(problem.n_vars, np.nan), math.nan, "native", iters)
    return LpSolution(Status.UNBOUNDED, np.full(problem.n_vars, np.nan), -math.inf, "native", iters)


register_backend("highs", _solve_highs)
register_backend("native", _solve_native)


# --- LP text dump ----------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def lp_text(problem: LpProblem) -> str:
    """Render ``problem`` in CPLEX-style LP text.

    Grammar (one item per line)::

        \\ <comment>
        Minimize
         obj: <coef> <var> [+|- <coef> <var>]...
        Subject To
         c<i>: <terms> (<=|=|>=) <rhs>
        Bounds
         <lb> <= <var> <= <ub>     (-inf / +inf for missing bounds, "<var> free" when both)
        End

    Coefficients are written with ``repr`` so the text round-trips exactly.
    """
    c = problem.objective()
    lb, ub = problem.bounds()
    A = problem.matrix()
    s = problem.senses()
    b = problem.rhs()
    name = problem.variable_name

    def terms(idx: Sequence[int], coefs: Sequence[float]) -> str:
        parts = []
        for j, a in zip(idx, coefs):
            sign = "-" if a < 0 else "+"
            parts.append(f"{sign} {_fmt(abs(a))} {name(int(j))}")
        if not parts:
            return "0"
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else text

    lines = [f"\\ {problem.name}", "Minimize"]
    nz = np.flatnonzero(c)
    lines.append(f" obj: {terms(nz, c[nz])}")
    lines.append("Subject To")
    for i in range(problem.n_rows):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        lines.append(f" c{i}: {terms(A.indices[lo:hi], A.data[lo:hi])} {s[i]} {_fmt(b[i])}")
    lines.append("Bounds")
    for j in range(problem.n_vars):
        if np.isinf(lb[j]) and np.isinf(ub[j]):
            lines.append(f" {name(j)} free")
        else:
            lo = "-inf" if np.isinf(lb[j]) else _fmt(lb[j])
            hi = "+inf" if np.isinf(ub[j]) else _fmt(ub[j])
            lines.append(f" {lo} <= {name(j)} <= {hi}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp(problem: LpProblem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(lp_text(problem))
