"""Bounded-variable LP solver with basis extraction.

A revised primal simplex over ``min c.x  s.t.  row_lower <= R x <= row_upper,
col_lower <= x <= col_upper``.  Slacks turn the rows into equalities, the
basis inverse is kept explicitly (dense; desk-scale problems), and the
optimal basis is exposed so that the translated simplicial cone spanned by
the active constraints at the vertex can be read off: the cone rows are the
active constraint normals, its rays the columns of minus their inverse.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

FEAS_TOL = 1e-7
COST_TOL = 1e-7
PIVOT_TOL = 1e-9
RESIDUAL_LIMIT = 1e-6
REFACTOR_EVERY = 100

BASIC, AT_LOWER, AT_UPPER, FREE = 0, 1, 2, 3


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpNumericalError(RuntimeError):
    """Solution failed the post-solve residual check."""


@dataclass(frozen=True)
class LpModel:
    objective: np.ndarray
    row_coeffs: np.ndarray
    row_lower: np.ndarray
    row_upper: np.ndarray
    col_lower: np.ndarray
    col_upper: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.objective, dtype=float)
        n = c.shape[0]
        rows = np.asarray(self.row_coeffs, dtype=float).reshape(-1, n)
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "row_coeffs", rows)
        for name in ("row_lower", "row_upper", "col_lower", "col_upper"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.row_lower.shape[0] != rows.shape[0] or self.row_upper.shape[0] != rows.shape[0]:
            raise ValueError("row bound lengths do not match the row count")
        if self.col_lower.shape[0] != n or self.col_upper.shape[0] != n:
            raise ValueError("column bound lengths do not match the objective")
        if np.any(self.col_lower > self.col_upper) or np.any(self.row_lower > self.row_upper):
            raise ValueError("crossing bounds")

    @property
    def num_cols(self) -> int:
        return self.objective.shape[0]

    @property
    def num_rows(self) -> int:
        return self.row_coeffs.shape[0]

    def with_rows(self, coeffs: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> "LpModel":
        """A copy with extra rows appended (used for cutting planes)."""
        coeffs = np.asarray(coeffs, dtype=float).reshape(-1, self.num_cols)
        return LpModel(
            self.objective,
            np.vstack([self.row_coeffs, coeffs]),
            np.concatenate([self.row_lower, np.asarray(lower, dtype=float)]),
            np.concatenate([self.row_upper, np.asarray(upper, dtype=float)]),
            self.col_lower,
            self.col_upper,
        )

    def with_col_bounds(self, lower: np.ndarray, upper: np.ndarray) -> "LpModel":
        return LpModel(self.objective, self.row_coeffs, self.row_lower, self.row_upper,
                       lower, upper)


@dataclass(frozen=True)
class LpBasisSolution:
    status: LpStatus
    zbar: np.ndarray | None
    objective_value: float
    col_status: np.ndarray | None
    row_status: np.ndarray | None
    iterations: int
    model: LpModel


@dataclass(frozen=True)
class SimplicialCone:
    """Cone ``{z : rowmat (z - vertex) <= 0}`` with rays ``-rowmat^{-1}``."""

    vertex: np.ndarray
    rays: np.ndarray  # column j is the j-th extreme ray
    rowmat: np.ndarray

    @property
    def dim(self) -> int:
        return self.vertex.shape[0]

    def contains(self, z: np.ndarray, tol: float = FEAS_TOL) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.all((z - self.vertex) @ self.rowmat.T <= tol, axis=-1)

    def points(self, steps: np.ndarray) -> np.ndarray:
        """Vertex plus ``rays @ steps`` for a batch of nonnegative steps."""
        steps = np.asarray(steps, dtype=float)
        return self.vertex + steps @ self.rays.T


class _Tableau:
    """Mutable simplex state over the slack formulation ``[R, -I] w = 0``."""

    def __init__(self, model: LpModel):
        self.model = model
        n, m = model.num_cols, model.num_rows
        self.n, self.m = n, m
        self.cols = np.hstack([model.row_coeffs, -np.eye(m)]) if m else np.zeros((0, n))
        self.lower = np.concatenate([model.col_lower, model.row_lower])
        self.upper = np.concatenate([model.col_upper, model.row_upper])
        self.cost = np.concatenate([model.objective, np.zeros(m)])
        self.status = np.empty(n + m, dtype=np.int64)
        for j in range(n + m):
            lo, hi = self.lower[j], self.upper[j]
            if np.isfinite(lo) and (not np.isfinite(hi) or abs(lo) <= abs(hi)):
                self.status[j] = AT_LOWER
            elif np.isfinite(hi):
                self.status[j] = AT_UPPER
            else:
                self.status[j] = FREE
        self.basis = list(range(n, n + m))
        self.status[n:] = BASIC
        self.binv = -np.eye(m)  # initial basis columns are the negated identity
        self.pivots = 0
        self.refresh_values()

    # -- linear algebra -------------------------------------------------

    def refactorize(self) -> None:
        if self.m:
            self.binv = np.linalg.inv(self.cols[:, self.basis])

    def refresh_values(self) -> None:
        self.values = np.empty(self.n + self.m)
        nonbasic = [j for j in range(self.n + self.m) if self.status[j] != BASIC]
        for j in nonbasic:
            self.values[j] = self._rest_value(j)
        if self.m:
            rhs = -self.cols[:, nonbasic] @ self.values[nonbasic]
            self.values[self.basis] = self.binv @ rhs

    def _rest_value(self, j: int) -> float:
        s = self.status[j]
        if s == AT_LOWER:
            return self.lower[j]
        if s == AT_UPPER:
            return self.upper[j]
        return 0.0

    # -- pricing --------------------------------------------------------

    def infeasibility(self) -> float:
        vb = self.values[self.basis]
        return float(
            np.sum(np.maximum(self.lower[self.basis] - vb, 0.0))
            + np.sum(np.maximum(vb - self.upper[self.basis], 0.0))
        )

    def phase1_cost(self) -> np.ndarray:
        vb = self.values[self.basis]
        c = np.zeros(self.m)
        c[vb > self.upper[self.basis] + FEAS_TOL] = 1.0
        c[vb < self.lower[self.basis] - FEAS_TOL] = -1.0
        return c

    def reduced_costs(self, basic_cost: np.ndarray, nonbasic_cost: np.ndarray) -> np.ndarray:
        y = basic_cost @ self.binv if self.m else np.zeros(0)
        return nonbasic_cost - (y @ self.cols if self.m else 0.0)

    def pick_entering(self, d: np.ndarray, bland: bool) -> tuple[int, int] | None:
        best, best_score = None, COST_TOL
        for j in range(self.n + self.m):
            s = self.status[j]
            if s == BASIC:
                continue
            if s in (AT_LOWER, FREE) and d[j] < -best_score:
                cand = (j, +1)
            elif s in (AT_UPPER, FREE) and d[j] > best_score:
                cand = (j, -1)
            else:
                continue
            if bland:
                return cand
            best, best_score = cand, abs(d[j])
        return best

    # -- pivoting -------------------------------------------------------

    def _blocking_target(self, pos: int, rate: float, phase1: bool) -> tuple[float, int] | None:
        b = self.basis[pos]
        val, lo, hi = self.values[b], self.lower[b], self.upper[b]
        if rate > 0.0:
            if phase1 and val > hi + FEAS_TOL:
                return None  # worsens an already-violated bound; priced in, not blocking
            if phase1 and val < lo - FEAS_TOL:
                target, hit = lo, AT_LOWER
            else:
                target, hit = hi, AT_UPPER
        else:
            if phase1 and val < lo - FEAS_TOL:
                return None
            if phase1 and val > hi + FEAS_TOL:
                target, hit = hi, AT_UPPER
            else:
                target, hit = lo, AT_LOWER
        if not np.isfinite(target):
            return None
        return target, hit

    def ratio_test(self, j: int, delta: int, phase1: bool) -> tuple[float, int | None, int]:
        """Two-pass (Harris) ratio test for entering variable j.

        Pass one bounds the step with bound targets relaxed by the
        feasibility tolerance; pass two picks the largest pivot among the
        blockers inside that window.  Degenerate tiny-rate blockers then
        overshoot their bound by at most the tolerance instead of forcing
        a destabilizing pivot on a near-zero element.
        """
        w = self.binv @ self.cols[:, j] if self.m else np.zeros(0)
        self._w = w
        rates = -delta * w
        t_max = np.inf
        for pos in range(self.m):
            rate = rates[pos]
            if abs(rate) <= PIVOT_TOL:
                continue
            hit = self._blocking_target(pos, rate, phase1)
            if hit is None:
                continue
            target, _ = hit
            val = self.values[self.basis[pos]]
            relaxed = (target - val + np.copysign(FEAS_TOL, rate)) / rate
            t_max = min(t_max, max(relaxed, 0.0))
        leave_pos, leave_status, best_rate, t_star = None, AT_LOWER, 0.0, t_max
        for pos in range(self.m):
            rate = rates[pos]
            if abs(rate) <= PIVOT_TOL:
                continue
            hit = self._blocking_target(pos, rate, phase1)
            if hit is None:
                continue
            target, hit_status = hit
            val = self.values[self.basis[pos]]
            t = max((target - val) / rate, 0.0)
            if t <= t_max + PIVOT_TOL and abs(rate) > best_rate:
                leave_pos, leave_status, best_rate, t_star = pos, hit_status, abs(rate), t
        flip = self.upper[j] - self.lower[j]
        if self.status[j] != FREE and np.isfinite(flip):
            if leave_pos is None or flip < t_star - PIVOT_TOL:
                if flip < t_max + PIVOT_TOL:
                    return flip, None, self.status[j]
        if leave_pos is None:
            return t_max, None, AT_LOWER
        return t_star, leave_pos, leave_status

    def apply_step(self, j: int, delta: int, t: float, leave_pos: int | None,
                   leave_status: int) -> None:
        w = self._w
        if t > 0.0:
            self.values[self.basis] -= t * delta * w
            self.values[j] += delta * t
        if leave_pos is None:
            # bound flip, basis unchanged
            self.status[j] = AT_UPPER if self.status[j] == AT_LOWER else AT_LOWER
            self.values[j] = self._rest_value(j)
            return
        leaving = self.basis[leave_pos]
        self.status[leaving] = leave_status
        self.values[leaving] = self._rest_value(leaving)
        self.basis[leave_pos] = j
        self.status[j] = BASIC
        # rank-1 update of the basis inverse
        piv = w[leave_pos]
        eta = -w / piv
        eta[leave_pos] = 1.0 / piv
        row = self.binv[leave_pos, :].copy()
        self.binv += np.outer(eta, row)
        self.binv[leave_pos, :] = eta[leave_pos] * row
        self.pivots += 1
        if self.pivots % REFACTOR_EVERY == 0:
            self.refactorize()
            self.refresh_values()


def solve(model: LpModel, max_iter: int | None = None) -> LpBasisSolution:
    """Two-phase bounded-variable simplex; returns a basic optimal solution.

    Dantzig pricing with a switch to Bland's rule after a stall of
    ``10 * (rows + cols)`` non-improving iterations to break degeneracy.
    """
    tab = _Tableau(model)
    total = model.num_rows + model.num_cols
    if max_iter is None:
        max_iter = 2000 + 200 * total
    stall_limit = 10 * total
    iters = 0

    for phase in (1, 2):
        stall = 0
        last_obj = np.inf
        while True:
            if iters > max_iter:
                raise LpNumericalError("simplex iteration limit reached")
            if phase == 1:
                infeas = tab.infeasibility()
                if infeas <= FEAS_TOL:
                    break
                basic_cost = tab.phase1_cost()
                d = tab.reduced_costs(basic_cost, np.zeros(tab.n + tab.m))
                obj = infeas
            else:
                basic_cost = tab.cost[tab.basis]
                d = tab.reduced_costs(basic_cost, tab.cost)
                obj = float(tab.cost @ tab.values[: tab.n + tab.m])
            entering = tab.pick_entering(d, bland=stall > stall_limit)
            if entering is None:
                if phase == 1:
                    return LpBasisSolution(LpStatus.INFEASIBLE, None, np.inf, None, None,
                                           iters, model)
                break
            j, delta = entering
            t, leave_pos, leave_status = tab.ratio_test(j, delta, phase1=(phase == 1))
            if not np.isfinite(t):
                if phase == 1:
                    raise LpNumericalError("unbounded phase-1 direction")
                return LpBasisSolution(LpStatus.UNBOUNDED, None, -np.inf, None, None,
                                       iters, model)
            tab.apply_step(j, delta, t, leave_pos, leave_status)
            iters += 1
            stall = stall + 1 if obj >= last_obj - 1e-12 else 0
            last_obj = obj

    tab.refactorize()
    tab.refresh_values()
    x = tab.values[: tab.n].copy()
    _check_solution(model, x)
    col_status = tab.status[: tab.n].copy()
    row_status = tab.status[tab.n :].copy()
    value = float(model.objective @ x)
    return LpBasisSolution(LpStatus.OPTIMAL, x, value, col_status, row_status, iters, model)


def _check_solution(model: LpModel, x: np.ndarray) -> None:
    col_scale = RESIDUAL_LIMIT * np.maximum(
        1.0,
        np.maximum(np.abs(np.where(np.isfinite(model.col_lower), model.col_lower, 0.0)),
                   np.abs(np.where(np.isfinite(model.col_upper), model.col_upper, 0.0))),
    )
    if np.any(x < model.col_lower - col_scale) or np.any(x > model.col_upper + col_scale):
        raise LpNumericalError("column bounds violated beyond tolerance")
    if model.num_rows:
        act = model.row_coeffs @ x
        row_scale = RESIDUAL_LIMIT * np.maximum(
            1.0, np.abs(model.row_coeffs) @ np.abs(x)
        )
        if np.any(act < model.row_lower - row_scale) or np.any(act > model.row_upper + row_scale):
            raise LpNumericalError("row activity violated beyond tolerance")


def extract_cone(solution: LpBasisSolution) -> SimplicialCone:
    """Simplicial cone of the active constraints at a basic optimal vertex.

    Every nonbasic variable pins one constraint: a structural column pins
    its bound, a slack pins its row.  Their normals are linearly independent
    (the complementary basis is nonsingular), and every feasible point of
    the LP satisfies them, so the cone contains the feasible region even at
    degenerate vertices.
    """
    if solution.status is not LpStatus.OPTIMAL:
        raise ValueError("cone extraction needs an optimal basic solution")
    model = solution.model
    n = model.num_cols
    rows = []
    for j in range(n):
        s = solution.col_status[j]
        if s == BASIC:
            continue
        if s == FREE:
            raise ValueError("free nonbasic variable: solution is not a vertex")
        e = np.zeros(n)
        e[j] = -1.0 if s == AT_LOWER else 1.0
        rows.append(e)
    for i in range(model.num_rows):
        s = solution.row_status[i]
        if s == BASIC:
            continue
        if s == FREE:
            raise ValueError("free nonbasic slack: solution is not a vertex")
        sign = -1.0 if s == AT_LOWER else 1.0
        rows.append(sign * model.row_coeffs[i])
    B = np.array(rows).reshape(n, n)
    rays = -np.linalg.inv(B)
    return SimplicialCone(solution.zbar.copy(), rays, B)
