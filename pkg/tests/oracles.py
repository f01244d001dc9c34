"""Independent reference computations used across the test suite.

Everything here deliberately avoids the library's own solution paths:
finite differences instead of gradient formulas, corner enumeration
instead of interval rules, rational vertex enumeration instead of the
simplex, direct LPs over corner values instead of closed forms, and an
adaptive grid search instead of branch and bound.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product

import numpy as np


def finite_difference_gradient(func, x, step=1e-6):
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for j in range(x.size):
        up = x.copy()
        dn = x.copy()
        up[j] += step
        dn[j] -= step
        grad[j] = (func(up) - func(dn)) / (2.0 * step)
    return grad


def corner_range(exponent_map: dict[int, float], lower, upper, dim: int):
    """Exact monomial range over a box by evaluating every corner."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    best_lo, best_hi = np.inf, -np.inf
    for bits in product((0, 1), repeat=dim):
        point = np.where(np.array(bits, dtype=bool), upper, lower)
        value = 1.0
        for j, a in exponent_map.items():
            if point[j] == 0.0 and a < 0.0:
                value = np.inf
                break
            value *= float(point[j]) ** a if point[j] > 0.0 else (0.0 if a > 0.0 else 1.0)
        best_lo = min(best_lo, value)
        best_hi = max(best_hi, value)
    return best_lo, best_hi


def repeated_multiplication(base: float, integer_power: int) -> float:
    out = 1.0
    for _ in range(abs(integer_power)):
        out *= base
    return out if integer_power >= 0 else 1.0 / out


# -- exact LP oracle ---------------------------------------------------------


def _fraction(x) -> Fraction:
    return Fraction(float(x)).limit_denominator(10**12)


def _solve_square(rows, rhs, n):
    aug = [list(rows[i]) + [rhs[i]] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col]
        aug[col] = [v / inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


def lp_vertex_enumeration(c, A, b, lower, upper):
    """Exact optimum of ``min c.x  s.t. A x <= b, lower <= x <= upper``.

    Enumerates all square active subsets in rational arithmetic; intended
    for tiny instances only.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    cons = [([_fraction(v) for v in A[i]], _fraction(b[i])) for i in range(m)]
    for j in range(n):
        row = [Fraction(0)] * n
        row[j] = Fraction(-1)
        cons.append((row, _fraction(-lower[j])))
        row2 = [Fraction(0)] * n
        row2[j] = Fraction(1)
        cons.append((row2, _fraction(upper[j])))
    cF = [_fraction(v) for v in c]
    best = None
    for combo in combinations(range(len(cons)), n):
        x = _solve_square([cons[i][0] for i in combo], [cons[i][1] for i in combo], n)
        if x is None:
            continue
        if all(sum(a * xi for a, xi in zip(row, x)) <= rhs for row, rhs in cons):
            val = sum(ci * xi for ci, xi in zip(cF, x))
            if best is None or val < best:
                best = val
    return None if best is None else float(best)


def envelope_by_vertex_lp(corner_points, corner_values, at_point):
    """Envelope value as the optimal convex combination of corner values.

    Solves ``min sum(lam * f)  s.t. sum(lam * q) = at_point, sum(lam) = 1``
    by exact enumeration of basic feasible subsets; independent of the
    facet LP used by the library.
    """
    corner_points = np.asarray(corner_points, dtype=float)
    corner_values = np.asarray(corner_values, dtype=float)
    count, dim = corner_points.shape
    size = dim + 1
    target = [ _fraction(v) for v in at_point ] + [Fraction(1)]
    cols = [[_fraction(corner_points[q, j]) for j in range(dim)] + [Fraction(1)]
            for q in range(count)]
    best = None
    for combo in combinations(range(count), size):
        rows = [[cols[q][r] for q in combo] for r in range(size)]
        lam = _solve_square(rows, target, size)
        if lam is None or any(l < 0 for l in lam):
            continue
        val = sum(_fraction(corner_values[q]) * l for q, l in zip(combo, lam))
        if best is None or val < best:
            best = val
    return None if best is None else float(best)


# -- grid search oracle ------------------------------------------------------


def _grid_points(lo, hi, levels):
    axes = [np.linspace(lo[j], hi[j], levels) for j in range(lo.size)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _local_slopes(field: np.ndarray, shape: tuple[int, ...], steps: np.ndarray) -> np.ndarray:
    """Per-point max adjacent difference quotient of a gridded field."""
    grid = field.reshape(shape)
    out = np.zeros(shape)
    for axis, step in enumerate(steps):
        diffs = np.abs(np.diff(grid, axis=axis)) / step
        pad_lo = [slice(None)] * len(shape)
        pad_hi = [slice(None)] * len(shape)
        pad_lo[axis] = slice(0, -1)
        pad_hi[axis] = slice(1, None)
        np.maximum(out[tuple(pad_lo)], diffs, out=out[tuple(pad_lo)])
        np.maximum(out[tuple(pad_hi)], diffs, out=out[tuple(pad_hi)])
    return out.ravel()


def grid_minimize(program, seed=0):
    """Adaptive grid search for ``min c.x`` over the nonlinear rows.

    A full coarse grid seeds per-point Lipschitz estimates of the worst
    constraint violation; refinement keeps every cell that could still hold
    a better feasible point (objective band plus violation band scaled by
    the local slope and cell diameter).  Retention ranks cells both by
    objective and by closeness to feasibility so boundary optima survive
    the cell cap.  A dense sampling pass polishes the best cells.
    Returns ``(value, point)`` with value ``inf`` if nothing feasible found.
    """
    rng = np.random.default_rng(seed)
    lo0, hi0 = program.bounds.lower.copy(), program.bounds.upper.copy()
    n = program.n
    width0 = hi0 - lo0

    def evaluate(points):
        g = program.term_values(points)
        act = points @ program.A.T + g @ program.Bmat.T if program.m else np.zeros((len(points), 0))
        viol = np.max(act - program.d, axis=-1) if program.m else np.zeros(len(points))
        return points @ program.c, viol

    levels0 = {1: 4001, 2: 201, 3: 61}.get(n, 41)
    points = _grid_points(lo0, hi0, levels0)
    vals, viol = evaluate(points)
    step0 = width0 / (levels0 - 1)
    slopes = _local_slopes(viol, (levels0,) * n, step0)
    obj_rate = float(np.abs(program.c).sum())
    cap = 1500

    best_val, best_x = np.inf, None
    boxes = [(points, vals, viol, np.tile(step0, (len(points), 1)), slopes)]
    for _ in range(9):
        pts = np.concatenate([b[0] for b in boxes])
        vals = np.concatenate([b[1] for b in boxes])
        viol = np.concatenate([b[2] for b in boxes])
        steps = np.concatenate([b[3] for b in boxes])
        slopes = np.concatenate([b[4] for b in boxes])
        diam = np.linalg.norm(steps, axis=-1)
        feas = viol <= 1e-9
        if feas.any():
            idx = int(np.argmin(np.where(feas, vals, np.inf)))
            if vals[idx] < best_val:
                best_val, best_x = float(vals[idx]), pts[idx].copy()
        maybe_feasible = viol <= 6.0 * slopes * diam + 1e-9
        promising = vals <= (best_val if np.isfinite(best_val) else np.inf) + obj_rate * diam
        keep = maybe_feasible & promising
        if not keep.any():
            break
        keep_idx = np.nonzero(keep)[0]
        by_val = keep_idx[np.argsort(vals[keep_idx])][:cap]
        by_viol = keep_idx[np.argsort(viol[keep_idx])][:cap]
        kept = np.unique(np.concatenate([by_val, by_viol]))
        new_boxes = []
        for i in kept:
            c_lo = np.maximum(pts[i] - steps[i], lo0)
            c_hi = np.minimum(pts[i] + steps[i], hi0)
            sub = _grid_points(c_lo, c_hi, 5)
            sv, sviol = evaluate(sub)
            substep = np.maximum((c_hi - c_lo) / 4.0, 1e-15)
            sub_slope = _local_slopes(sviol, (5,) * n, substep)
            # inherit a fraction of the parent's slope: a cell can look flat
            # while hiding curvature just outside its sample points
            sub_slope = np.maximum(sub_slope, 0.25 * slopes[i])
            new_boxes.append((sub, sv, sviol, np.tile(substep, (len(sub), 1)), sub_slope))
        boxes = new_boxes
        if max(float(b[3].max() / width0.max()) for b in boxes) < 2e-7:
            break

    # dense random polish in the best surviving cells
    if boxes:
        pts = np.concatenate([b[0] for b in boxes])
        vals = np.concatenate([b[1] for b in boxes])
        steps = np.concatenate([b[3] for b in boxes])
        order = np.argsort(vals)[:50]
        for i in order:
            c_lo = np.maximum(pts[i] - 3 * steps[i], lo0)
            c_hi = np.minimum(pts[i] + 3 * steps[i], hi0)
            sample = rng.uniform(c_lo, c_hi, size=(4000, n))
            sv, sviol = evaluate(sample)
            feas = sviol <= 1e-9
            if feas.any():
                j = int(np.argmin(np.where(feas, sv, np.inf)))
                if sv[j] < best_val:
                    best_val, best_x = float(sv[j]), sample[j].copy()
    # global random cross-check so a dropped basin still surfaces
    sample = rng.uniform(lo0, hi0, size=(100_000, n))
    sv, sviol = evaluate(sample)
    feas = sviol <= 1e-9
    if feas.any():
        j = int(np.argmin(np.where(feas, sv, np.inf)))
        if sv[j] < best_val:
            best_val, best_x = float(sv[j]), sample[j].copy()

    # random local descent: boundary optima sit between grid points, so
    # shrink a sampling ball around the best point until it stalls
    if best_x is not None:
        radius = width0 / 8.0
        while float(radius.max() / width0.max()) > 1e-9:
            shots = best_x + rng.uniform(-radius, radius, size=(3000, n))
            np.clip(shots, lo0, hi0, out=shots)
            sv, sviol = evaluate(shots)
            feas = sviol <= 1e-9
            improved = False
            if feas.any():
                j = int(np.argmin(np.where(feas, sv, np.inf)))
                if sv[j] < best_val - 1e-15:
                    best_val, best_x = float(sv[j]), shots[j].copy()
                    improved = True
            if not improved:
                radius = radius / 3.0
    return best_val, best_x
