"""Spatial branch-and-bound for signomial programs.

Each node holds a sub-box of the lifted variables; its LP relaxation keeps
the linear rows, box bounds, tangent rows for term sides that are convex,
and the cutting planes collected along the node's ancestry (cuts separated
from a node's relaxation use that node's bounds and therefore stay valid
only inside its subtree).  Four cut settings mirror the usual experiment
matrix: no cuts, outer-approximation cuts, intersection cuts, or both.
Incumbents come from feasibility-checked LP points only; branching splits
the x-variable contributing most to the worst term violation.
"""

from __future__ import annotations

import enum
import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from . import envelope, icuts, lp
from .dcc import ConvexityClass, DccForm, Sense, classify, term_form
from .freesets import Membership, build_free_set, linearize_power, membership
from .icuts import Cut, CutOrigin, TrivialCutError
from .model import Box, ExtendedForm, SignomialProgram, lift

FEAS_TOL = 1e-6
MIN_BRANCH_WIDTH = 1e-6
BRANCH_CLAMP = 0.2


class Mode(enum.Enum):
    DISABLE = "disable"
    OC = "oc"
    IC = "ic"
    OIC = "oic"

    @property
    def wants_ic(self) -> bool:
        return self in (Mode.IC, Mode.OIC)

    @property
    def wants_oc(self) -> bool:
        return self in (Mode.OC, Mode.OIC)


class Unbranchable(RuntimeError):
    """All candidate branching widths are below tolerance."""


@dataclass(frozen=True)
class Settings:
    mode: Mode = Mode.DISABLE
    max_cut_rounds_per_node: int = 5
    cut_violation_min: float = 1e-5
    time_limit: float | None = None
    gap_tol: float = 1e-4
    node_limit: int = 100_000
    seed: int = 0
    keep_cut_trace: bool = False

    def __post_init__(self) -> None:
        if self.gap_tol <= 0.0:
            raise ValueError("gap tolerance must be positive")
        if self.cut_violation_min < 1e-6:
            raise ValueError("cut violation threshold must be at least 1e-6")


@dataclass
class Node:
    box: Box
    lp_bound: float
    depth: int
    order: int
    cuts: tuple[Cut, ...] = ()
    pool: frozenset = frozenset()


@dataclass(frozen=True)
class SolveReport:
    status: str
    best_bound: float
    incumbent_value: float
    incumbent_point: np.ndarray | None
    node_count: int
    wall_time: float
    rel_gap: float
    cuts_added: dict[str, int]
    root_bound_initial: float
    root_bound_after_cuts: float

    def as_dict(self) -> dict:
        point = None if self.incumbent_point is None else [float(v) for v in self.incumbent_point]
        return {
            "status": self.status,
            "best_bound": self.best_bound,
            "incumbent_value": self.incumbent_value,
            "incumbent_point": point,
            "node_count": self.node_count,
            "wall_time": self.wall_time,
            "rel_gap": self.rel_gap,
            "cuts_added": dict(self.cuts_added),
            "root_bound_initial": self.root_bound_initial,
            "root_bound_after_cuts": self.root_bound_after_cuts,
        }


def relative_gap(incumbent: float, bound: float) -> float:
    if not (np.isfinite(incumbent) and np.isfinite(bound)):
        return np.inf
    return max(incumbent - bound, 0.0) / max(1e-9, abs(incumbent))


def _beta_side_is_linear(form: DccForm) -> bool:
    # The member constraint psi_beta(u) <= psi_gamma(v) is a convex set
    # exactly when the beta side is constant or one linear coordinate.
    return form.h == 0 or (form.h == 1 and abs(form.beta[0] - 1.0) <= 1e-12)


def _tangent_row(form: DccForm, point: np.ndarray, dim: int) -> tuple[np.ndarray, float]:
    vbar = np.maximum(point[list(form.v_index)], 1e-6)
    lin = linearize_power(form.gamma, vbar)
    coeffs = np.zeros(dim)
    for pos, j in enumerate(form.u_index):
        coeffs[j] = form.beta[pos]  # beta side is linear here
    coeffs[list(form.v_index)] -= lin.coeffs
    return coeffs, float(lin.constant) - (1.0 if form.h == 0 else 0.0)


def _condition_cut(cut: Cut, box: Box) -> Cut | None:
    """Rescale a cut to unit max-coefficient and drop negligible entries.

    Dropped coefficients are compensated by relaxing the right-hand side
    with their worst contribution over the node box, so validity survives
    on the node's subtree.  Entries with infinite worst contribution are
    kept.  Conditioning exists purely to keep the node LPs well scaled.
    """
    a = cut.coeffs.copy()
    rhs = cut.rhs
    scale = float(np.abs(a).max())
    if scale <= 0.0 or not np.isfinite(scale):
        return None
    tiny = (np.abs(a) <= 1e-12 * scale) & (a != 0.0)
    if tiny.any():
        worst = np.where(a > 0.0, a * box.upper, a * box.lower)
        safe = tiny & np.isfinite(worst)
        rhs -= float(worst[safe].sum())
        a[safe] = 0.0
    return Cut(a / scale, rhs / scale, cut.origin, cut.violation_at_source / scale)


def _cut_key(coeffs: np.ndarray, rhs: float) -> tuple:
    scale = float(np.abs(coeffs).max())
    if scale <= 0.0:
        return ("zero",)
    quant = np.round(coeffs / scale / 1e-9).astype(np.int64)
    return (int(round(rhs / scale / 1e-9)),) + tuple(int(q) for q in quant)


def build_root_relaxation(ext: ExtendedForm, settings: Settings) -> lp.LpModel:
    """Root LP: linear rows, lifted bounds, and tangents of convex term sides.

    For every term side whose set is convex (beta block linear), three
    tangent rows are added: at the box center and at two seeded random box
    points.  Tangents of the concave gamma side overestimate it on the whole
    orthant, so these rows are valid at every node.
    """
    base = ext.base
    dim = ext.dim
    rng = np.random.default_rng(settings.seed)
    objective = np.concatenate([base.c, np.zeros(base.k)])
    rows = [np.hstack([base.A, base.Bmat])] if base.m else []
    lower = [np.full(base.m, -np.inf)] if base.m else []
    upper = [base.d] if base.m else []
    finite = np.all(np.isfinite(ext.zbounds.upper))
    points = [ext.zbounds.center() if finite else np.minimum(ext.zbounds.lower + 1.0,
                                                             ext.zbounds.upper)]
    if finite:
        points += [ext.zbounds.sample(rng, 1)[0] for _ in range(2)]
    seen = set()
    extra, extra_rhs = [], []
    for i in range(base.k):
        for sense in (Sense.HYPO, Sense.EPI):
            form = term_form(ext, i, sense)
            if not _beta_side_is_linear(form):
                continue
            for point in points:
                coeffs, rhs = _tangent_row(form, point, dim)
                key = _cut_key(coeffs, rhs)
                if key in seen:
                    continue
                seen.add(key)
                extra.append(coeffs)
                extra_rhs.append(rhs)
    if extra:
        rows.append(np.array(extra))
        lower.append(np.full(len(extra), -np.inf))
        upper.append(np.array(extra_rhs))
    row_coeffs = np.vstack(rows) if rows else np.zeros((0, dim))
    return lp.LpModel(
        objective,
        row_coeffs,
        np.concatenate(lower) if lower else np.zeros(0),
        np.concatenate(upper) if upper else np.zeros(0),
        ext.zbounds.lower,
        ext.zbounds.upper,
    )


class BranchAndBound:
    """Best-bound search over boxes of the extended formulation."""

    def __init__(self, program: SignomialProgram, settings: Settings):
        self.settings = settings
        self.ext = lift(program)
        if settings.mode.wants_oc and self.ext.unbounded_terms:
            raise ValueError(
                "outer-approximation cuts need finite lifted bounds; "
                f"terms {self.ext.unbounded_terms} are unbounded"
            )
        self.base_model = build_root_relaxation(self.ext, settings)
        self.forms = {
            (i, sense): term_form(self.ext, i, sense)
            for i in range(program.k)
            for sense in (Sense.EPI, Sense.HYPO)
        }
        self.cuts_added = {CutOrigin.INTERSECTION.value: 0, CutOrigin.OUTER_APPROX.value: 0}
        self.cut_trace: list[tuple[Cut, Box]] = []
        self.incumbent_value = np.inf
        self.incumbent_point: np.ndarray | None = None
        self._order = 0
        self._last_first_bound = np.inf

    # -- node LP ---------------------------------------------------------

    def node_model(self, node: Node) -> lp.LpModel:
        model = self.base_model.with_col_bounds(node.box.lower, node.box.upper)
        if node.cuts:
            coeffs = np.array([c.coeffs for c in node.cuts])
            rhs = np.array([c.rhs for c in node.cuts])
            model = model.with_rows(coeffs, np.full(len(node.cuts), -np.inf), rhs)
        return model

    # -- separation -------------------------------------------------------

    def _separate_ic(self, sol: lp.LpBasisSolution, form: DccForm) -> Cut | None:
        zbar = sol.zbar
        cert = build_free_set(form, zbar[list(form.v_index)], lifted_dim=self.ext.dim)
        if membership(cert, zbar) is not Membership.INTERIOR:
            return None
        try:
            cone = lp.extract_cone(sol)
            return icuts.build_cut(cone, cert)
        except (TrivialCutError, ValueError, np.linalg.LinAlgError):
            return None

    def _separate_oc(self, zbar: np.ndarray, form: DccForm, box: Box) -> Cut | None:
        u_idx, v_idx = list(form.u_index), list(form.v_index)
        ubox = Box(box.lower[u_idx], box.upper[u_idx])
        vbox = Box(box.lower[v_idx], box.upper[v_idx])
        if np.any(ubox.width() <= 0.0):
            return None
        try:
            return envelope.oa_cut(form, zbar, ubox, vbox, ambient_dim=self.ext.dim)
        except (ValueError, lp.LpNumericalError):
            return None

    def cut_loop(self, node: Node) -> tuple[lp.LpBasisSolution, list[Cut]]:
        """Alternate LP solves and separation rounds at one node.

        Stops when the LP is infeasible, no term is violated, the round
        limit is reached, or no separator produces a cut clearing the
        violation threshold.  The node's bound and cut list are updated in
        place; cuts are deduplicated against the whole ancestry.
        """
        settings = self.settings
        added: list[Cut] = []
        sol = lp.solve(self.node_model(node))
        self._last_first_bound = (
            sol.objective_value if sol.status is lp.LpStatus.OPTIMAL else np.inf
        )
        for _ in range(settings.max_cut_rounds_per_node):
            if sol.status is not lp.LpStatus.OPTIMAL:
                return sol, added
            node.lp_bound = max(node.lp_bound, sol.objective_value)
            picked = icuts.select_violated_term(self.ext, sol.zbar, FEAS_TOL)
            if picked is None or settings.mode is Mode.DISABLE:
                return sol, added
            term, sense = picked
            form = self.forms[(term, sense)]
            fresh: list[Cut] = []
            if settings.mode.wants_ic:
                cut = self._separate_ic(sol, form)
                if cut is not None:
                    fresh.append(cut)
            if settings.mode.wants_oc:
                cut = self._separate_oc(sol.zbar, form, node.box)
                if cut is not None:
                    fresh.append(cut)
            kept = []
            pool = set(node.pool)
            for raw in fresh:
                cut = _condition_cut(raw, node.box)
                if cut is None or float(cut.violation(sol.zbar)) < settings.cut_violation_min:
                    continue
                key = _cut_key(cut.coeffs, cut.rhs)
                if key in pool:
                    continue
                pool.add(key)
                kept.append(cut)
            if not kept:
                return sol, added
            added.extend(kept)
            node.cuts = node.cuts + tuple(kept)
            node.pool = frozenset(pool)
            for cut in kept:
                self.cuts_added[cut.origin.value] += 1
                if settings.keep_cut_trace:
                    self.cut_trace.append((cut, node.box))
            sol = lp.solve(self.node_model(node))
        if sol.status is lp.LpStatus.OPTIMAL:
            node.lp_bound = max(node.lp_bound, sol.objective_value)
        return sol, added

    # -- branching ---------------------------------------------------------

    def branch(self, node: Node, zbar: np.ndarray) -> tuple[Node, Node]:
        """Split on the x-variable weighted heaviest in the worst term."""
        picked = icuts.select_violated_term(self.ext, zbar, 0.0)
        if picked is None:
            raise Unbranchable("no violated term at the relaxation point")
        term, _ = picked
        alpha = self.ext.base.terms[term]
        lo, hi = node.box.lower, node.box.upper
        best_j, best_score = None, 0.0
        for j, a in zip(alpha.indices, alpha.exponents):
            width = hi[j] - lo[j]
            if width < MIN_BRANCH_WIDTH:
                continue
            score = abs(a) * width
            if score > best_score:
                best_j, best_score = j, score
        if best_j is None:
            raise Unbranchable("all candidate widths below tolerance")
        j = best_j
        split = float(np.clip(zbar[j], lo[j] + BRANCH_CLAMP * (hi[j] - lo[j]),
                              hi[j] - BRANCH_CLAMP * (hi[j] - lo[j])))
        children = []
        for side in (0, 1):
            xlo, xhi = lo[: self.ext.base.n].copy(), hi[: self.ext.base.n].copy()
            if side == 0:
                xhi[j] = split
            else:
                xlo[j] = split
            child_box = self._lift_box(Box(xlo, xhi), node.box)
            self._order += 1
            children.append(
                Node(child_box, node.lp_bound, node.depth + 1, self._order, node.cuts, node.pool)
            )
        return children[0], children[1]

    def _lift_box(self, xbox: Box, parent: Box) -> Box:
        """Recompute y-intervals on a child x-box, kept inside the parent's."""
        sub = lift(
            SignomialProgram(
                self.ext.base.n, self.ext.base.k, 0,
                self.ext.base.c, np.zeros((0, self.ext.base.n)),
                np.zeros((0, self.ext.base.k)), np.zeros(0),
                self.ext.base.terms, xbox,
            )
        )
        lo = np.maximum(sub.zbounds.lower, parent.lower)
        hi = np.minimum(sub.zbounds.upper, parent.upper)
        return Box(lo, np.maximum(hi, lo))

    # -- incumbents ----------------------------------------------------------

    def _try_incumbent(self, zbar: np.ndarray, row_tol: float = 1e-8) -> None:
        base = self.ext.base
        x = zbar[: base.n]
        g = base.term_values(x)
        y = zbar[base.n :]
        scale = np.maximum(1.0, np.abs(g))
        zproj = np.concatenate([x, g])
        rows_ok = True
        if base.m:
            act = base.A @ x + base.Bmat @ g
            rows_ok = bool(np.all(act <= base.d + row_tol * np.maximum(1.0, np.abs(base.d))))
        in_root = bool(self.ext.zbounds.contains(zproj, 1e-7))
        value = float(base.c @ x)
        if rows_ok and in_root and value < self.incumbent_value - 1e-12:
            self.incumbent_value = value
            self.incumbent_point = zproj
            return
        if np.all(np.abs(y - g) <= FEAS_TOL * scale) and value < self.incumbent_value - 1e-12:
            self.incumbent_value = value
            self.incumbent_point = zbar.copy()

    # -- main loop -------------------------------------------------------------

    def solve(self) -> SolveReport:
        settings = self.settings
        start = time.perf_counter()
        root = Node(
            Box(self.ext.zbounds.lower.copy(), self.ext.zbounds.upper.copy()),
            -np.inf, 0, 0,
        )
        heap: list[tuple[float, int, int, Node]] = []
        heapq.heappush(heap, (-np.inf, 0, 0, root))
        node_count = 0
        status = "optimal"
        best_bound = -np.inf
        root_initial = np.nan
        root_after = np.nan

        while heap:
            bound, _, _, node = heapq.heappop(heap)
            # the heap minimum is a valid global lower bound (possibly stale-low)
            best_bound = bound
            if relative_gap(self.incumbent_value, bound) <= settings.gap_tol:
                break
            if node_count >= settings.node_limit:
                status = "node_limit"
                break
            elapsed = time.perf_counter() - start
            if settings.time_limit is not None and elapsed > settings.time_limit:
                status = "time_limit"
                break
            node_count += 1
            sol, _ = self.cut_loop(node)
            if node.order == 0:
                root_initial = self._last_first_bound
                root_after = node.lp_bound if sol.status is lp.LpStatus.OPTIMAL else np.inf
            if sol.status is not lp.LpStatus.OPTIMAL:
                continue  # infeasible node
            self._try_incumbent(sol.zbar)
            margin = 0.5 * settings.gap_tol * max(1e-9, abs(self.incumbent_value))
            if node.lp_bound >= self.incumbent_value - margin:
                continue
            if icuts.select_violated_term(self.ext, sol.zbar, FEAS_TOL) is None:
                continue  # relaxation point feasible: node solved
            try:
                left, right = self.branch(node, sol.zbar)
            except Unbranchable:
                self._try_incumbent(sol.zbar, row_tol=1e-6)
                continue
            for child in (left, right):
                heapq.heappush(heap, (child.lp_bound, -child.depth, child.order, child))
        else:
            best_bound = self.incumbent_value if np.isfinite(self.incumbent_value) else -np.inf
            status = "optimal" if np.isfinite(self.incumbent_value) else "infeasible"

        wall = time.perf_counter() - start
        if not np.isfinite(self.incumbent_value) and status == "optimal":
            status = "infeasible"
        return SolveReport(
            status=status,
            best_bound=float(best_bound),
            incumbent_value=float(self.incumbent_value),
            incumbent_point=self.incumbent_point,
            node_count=node_count,
            wall_time=wall,
            rel_gap=relative_gap(self.incumbent_value, best_bound),
            cuts_added=dict(self.cuts_added),
            root_bound_initial=float(root_initial),
            root_bound_after_cuts=float(root_after),
        )


def solve(program: SignomialProgram, settings: Settings | None = None) -> SolveReport:
    """Solve a signomial program to the settings' gap tolerance."""
    return BranchAndBound(program, settings or Settings()).solve()
