"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Meant for the small lifetime programs of this package (a few hundred rows),
not as a general-purpose solver.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from gsmsim.errors import SolverError

ZERO_TOL = 1e-12
PIVOT_TOL = 1e-10
COST_TOL = 1e-9
FEAS_TOL = 1e-9
MAX_ITER = 100_000


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass
class LpSolution:
    status: LpStatus
    objective_value: float = math.nan
    variable_values: dict[str, float] = field(default_factory=dict)
    duals: dict[str, float] = field(default_factory=dict)
    iterations: int = 0


class _Tableau:
    def __init__(self, A: np.ndarray, b: np.ndarray, basis: list[int], n_art_start: int):
        m, n = A.shape
        self.T = np.zeros((m + 1, n + 1))
        self.T[:m, :n] = A
        self.T[:m, n] = b
        self.basis = basis
        self.n_art_start = n_art_start
        self.iterations = 0

    @property
    def m(self) -> int:
        return self.T.shape[0] - 1

    def set_objective(self, c: np.ndarray) -> None:
        """Load reduced costs ``c - c_B B^-1 A`` for a maximisation objective."""
        n = self.T.shape[1] - 1
        row = np.zeros(n + 1)
        row[:n] = c
        for i, j in enumerate(self.basis):
            if c[j] != 0.0:
                row -= c[j] * self.T[i]
        self.T[-1] = row

    def pivot(self, r: int, c: int) -> None:
        T = self.T
        p = T[r, c]
        if abs(p) < PIVOT_TOL:
            raise SolverError(f"pivot element {p:.3e} at row {r}, column {c} is numerically zero")
        T[r] /= p
        col = T[:, c].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, c] = 0.0
        T[r, c] = 1.0
        self.basis[r] = c
        self.iterations += 1

    def iterate(self, allow_art: bool) -> bool:
        """Run to optimality; return False if the objective is unbounded."""
        T = self.T
        limit = T.shape[1] - 1 if allow_art else self.n_art_start
        while True:
            if self.iterations > MAX_ITER:
                raise SolverError(f"simplex did not converge in {MAX_ITER} pivots")
            d = T[-1, :limit]
            entering = np.flatnonzero(d > COST_TOL)
            if entering.size == 0:
                return True
            c = int(entering[0])
            col = T[:-1, c]
            rows = np.flatnonzero(col > ZERO_TOL)
            if rows.size == 0:
                return False
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(min(tied, key=lambda i: self.basis[i]))
            self.pivot(r, c)


def solve_standard(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, A_ge=None, b_ge=None):
    """Maximise ``c @ x`` over ``x >= 0`` with the given row blocks.

    Returns ``(status, x, objective, duals, iterations)`` where ``duals``
    follow the row order ub, eq, ge.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    blocks = []
    for A, b, sense in ((A_ub, b_ub, "<="), (A_eq, b_eq, "="), (A_ge, b_ge, ">=")):
        if A is None or len(A) == 0:
            continue
        A = np.asarray(A, dtype=float).reshape(-1, n)
        b = np.asarray(b, dtype=float).reshape(-1)
        blocks.extend((A[i], b[i], sense) for i in range(A.shape[0]))
    m = len(blocks)

    rows = np.zeros((m, n))
    rhs = np.zeros(m)
    sign = np.ones(m)
    senses = []
    for i, (a, bi, sense) in enumerate(blocks):
        if bi < 0:
            a, bi, sign[i] = -a, -bi, -1.0
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
        rows[i], rhs[i] = a, bi
        senses.append(sense)

    # structural | one slack or surplus per inequality | one unit column per row.
    # Unit columns are the phase-one artificials of >= and = rows; they never
    # re-enter in phase two and their reduced costs give the duals.
    n_unit_start = n + sum(s != "=" for s in senses)
    A = np.zeros((m, n_unit_start + m))
    A[:, :n] = rows
    A[:, n_unit_start:] = np.eye(m)
    basis = []
    art_cols = set()
    k = n
    for i, sense in enumerate(senses):
        if sense == "<=":
            A[i, k] = 1.0
            basis.append(k)
            k += 1
            continue
        if sense == ">=":
            A[i, k] = -1.0
            k += 1
        basis.append(n_unit_start + i)
        art_cols.add(n_unit_start + i)

    tab = _Tableau(A, rhs, basis, n_unit_start)
    if art_cols:
        phase1 = np.zeros(A.shape[1])
        phase1[sorted(art_cols)] = -1.0
        tab.set_objective(phase1)
        tab.iterate(allow_art=True)
        infeas = sum(tab.T[i, -1] for i, j in enumerate(tab.basis) if j in art_cols)
        if infeas > FEAS_TOL * max(1.0, float(np.abs(rhs).max(initial=0.0))):
            return "infeasible", None, math.nan, None, tab.iterations
        for i, j in enumerate(tab.basis):
            if j in art_cols:
                cand = np.flatnonzero(np.abs(tab.T[i, :n_unit_start]) > PIVOT_TOL)
                if cand.size:
                    tab.pivot(i, int(cand[0]))
                # otherwise the row is redundant and its artificial stays basic at zero

    cost = np.zeros(A.shape[1])
    cost[:n] = c
    tab.set_objective(cost)
    if not tab.iterate(allow_art=False):
        return "unbounded", None, math.inf, None, tab.iterations

    x = np.zeros(A.shape[1])
    for i, j in enumerate(tab.basis):
        x[j] = tab.T[i, -1]
    duals = -tab.T[-1, n_unit_start:n_unit_start + m] * sign
    return "optimal", x[:n], float(c @ x[:n]), duals, tab.iterations
