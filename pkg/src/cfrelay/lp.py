"""Small dense linear programs for rate-vector feasibility and max-min rates."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

RESIDUAL_TOL = 1e-9


class LPError(RuntimeError):
    pass


class UnboundedLP(LPError):
    """Objective unbounded: the constraint assembly is malformed."""


@dataclass
class LinearProgram:
    """maximize ``objective @ v`` subject to ``rows[k] @ v (<= | >=) bounds[k]``.

    ``lower[j]`` is a lower bound for variable j, or ``None`` for a free variable.
    A zero objective makes this a pure feasibility problem.
    """

    objective: np.ndarray
    rows: list[np.ndarray] = field(default_factory=list)
    bounds: list[float] = field(default_factory=list)
    senses: list[str] = field(default_factory=list)
    lower: list[float | None] | None = None

    @property
    def num_vars(self) -> int:
        return int(np.asarray(self.objective).size)

    def add(self, row, sense: str, bound: float) -> None:
        if sense not in ("<=", ">="):
            raise ValueError(f"sense must be '<=' or '>=', got {sense!r}")
        row = np.asarray(row, dtype=float)
        if row.shape != (self.num_vars,) or not np.all(np.isfinite(row)) or not np.isfinite(bound):
            raise ValueError("constraint row must be finite with one coefficient per variable")
        self.rows.append(row)
        self.bounds.append(float(bound))
        self.senses.append(sense)

    def lower_bounds(self) -> list[float | None]:
        return list(self.lower) if self.lower is not None else [0.0] * self.num_vars

    def as_upper_form(self) -> tuple[np.ndarray, np.ndarray]:
        """All constraints as ``A v <= b`` (variable bounds included)."""
        a, b = [], []
        for row, bound, sense in zip(self.rows, self.bounds, self.senses):
            sgn = 1.0 if sense == "<=" else -1.0
            a.append(sgn * row)
            b.append(sgn * bound)
        for j, lo in enumerate(self.lower_bounds()):
            if lo is not None:
                e = np.zeros(self.num_vars)
                e[j] = -1.0
                a.append(e)
                b.append(-lo)
        if not a:
            return np.zeros((0, self.num_vars)), np.zeros(0)
        return np.array(a), np.array(b)

    def residual(self, v) -> float:
        """Largest constraint violation at ``v`` (0 when feasible)."""
        a, b = self.as_upper_form()
        if a.shape[0] == 0:
            return 0.0
        return float(max(0.0, np.max(a @ np.asarray(v, dtype=float) - b)))


@dataclass
class LPResult:
    feasible: bool
    optimum: float | None = None
    witness: np.ndarray | None = None
    residual: float | None = None


def solve_lp(lp: LinearProgram) -> LPResult:
    a, b = lp.as_upper_form()
    bnds = [(lo, None) for lo in lp.lower_bounds()]
    c = -np.asarray(lp.objective, dtype=float)
    nrows = len(lp.rows)
    res = linprog(c, A_ub=a[:nrows] if nrows else None, b_ub=b[:nrows] if nrows else None,
                  bounds=bnds, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10, "presolve": True})
    if res.status == 2:
        return LPResult(False)
    if res.status == 3:
        raise UnboundedLP("linear program is unbounded")
    if res.status != 0:
        raise LPError(f"LP solver failed: {res.message}")
    v = np.asarray(res.x, dtype=float)
    v = _polish(lp, v)
    r = lp.residual(v)
    if r > RESIDUAL_TOL:
        raise LPError(f"LP witness violates constraints by {r:.3g}")
    return LPResult(True, float(np.dot(lp.objective, v)), v, r)


def _polish(lp: LinearProgram, v: np.ndarray) -> np.ndarray:
    """Re-solve the active constraints exactly when that tightens the residual."""
    a, b = lp.as_upper_form()
    if a.shape[0] == 0:
        return v
    slack = b - a @ v
    active = np.abs(slack) <= 1e-7
    if not np.any(active):
        return v
    sol, *_ = np.linalg.lstsq(a[active], b[active], rcond=None)
    # keep coordinates the active set does not pin down
    if np.linalg.matrix_rank(a[active]) < lp.num_vars:
        return v
    if lp.residual(sol) <= lp.residual(v) and abs(np.dot(lp.objective, sol - v)) <= 1e-7:
        return sol
    return v
