"""Intersection cuts from a free-set certificate and a simplicial cone.

Along each extreme ray of the cone, the step length is the largest move
that stays inside the free set (capped where the ray would leave the
nonnegative orthant on the u-coordinates).  With the cone rows ``B_j`` and
step lengths ``eta_j`` the cut is

    sum_j B_j (z - zbar) / eta_j <= -1,

with ``1/inf = 0``.  It is valid for the term set intersected with the
cone and cuts the cone vertex off with violation exactly 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .freesets import FreeSetCertificate
from .lp import SimplicialCone
from .model import ExtendedForm

BISECT_TOL = 1e-9
BISECT_MAX_ITER = 200
EXACT_HIT_TOL = 1e-13
PROBE_CAP = 2.0**60


class CutOrigin(enum.Enum):
    INTERSECTION = "intersection"
    OUTER_APPROX = "outer_approx"


class TrivialCutError(RuntimeError):
    """Every step length is infinite: the free set swallows the cone."""


@dataclass(frozen=True)
class Cut:
    """Sparse valid inequality ``coeffs . z <= rhs`` in the extended space."""

    coeffs: np.ndarray
    rhs: float
    origin: CutOrigin
    violation_at_source: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        if not np.all(np.isfinite(self.coeffs)) or not np.isfinite(self.rhs):
            raise ValueError("cut has non-finite data")

    def violation(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return z @ self.coeffs - self.rhs


@dataclass(frozen=True)
class StepLengths:
    eta_star: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "eta_star", np.asarray(self.eta_star, dtype=float))
        if np.any(self.eta_star <= 0.0):
            raise ValueError("step lengths must be positive (possibly infinite)")


def select_violated_term(
    ext: ExtendedForm, zbar: np.ndarray, tol: float = 1e-6
) -> tuple[int, "Sense"] | None:
    """Most violated lifted term at ``zbar``, or None when all fit.

    The sense picks the side of the graph that excludes the point: EPI when
    the term value exceeds the lifted variable, HYPO otherwise.
    """
    from .dcc import Sense

    x, y = ext.split(np.asarray(zbar, dtype=float))
    g = ext.base.term_values(x)
    residuals = np.abs(y - g)
    if residuals.size == 0 or float(residuals.max()) <= tol:
        return None
    i = int(np.argmax(residuals))
    return i, (Sense.EPI if g[i] > y[i] else Sense.HYPO)


def step_length(cert: FreeSetCertificate, zbar: np.ndarray, ray: np.ndarray) -> float:
    """Largest eta with ``zbar + eta * ray`` inside the free set.

    The restriction of phi along the ray is concave with a positive value
    at 0, so it has at most one downward zero; bisection brackets it after
    a geometric probe.  The step is capped where a u-coordinate would turn
    negative, and is ``inf`` when phi stays positive without a cap.
    """
    zbar = np.asarray(zbar, dtype=float)
    ray = np.asarray(ray, dtype=float)
    u_idx = list(cert.form.u_index)
    u0, ru = zbar[u_idx], ray[u_idx]

    def tau(eta: float) -> float:
        return float(cert.phi(zbar + eta * ray))

    if tau(0.0) <= 0.0:
        raise ValueError("cone vertex is not interior to the free set")
    falling = ru < -1e-15
    if np.any(u0[falling] <= 0.0):
        raise ValueError("vertex sits on the u-orthant boundary along this ray")
    eta_bar = float(np.min(u0[falling] / -ru[falling])) if np.any(falling) else np.inf

    # geometric probe for a sign change, capped by the orthant exit
    lo, hi = 0.0, np.nan
    probe = 1.0
    while probe <= PROBE_CAP:
        eta = min(probe, eta_bar)
        t = tau(eta)
        if abs(t) <= EXACT_HIT_TOL:
            return eta
        if t < 0.0:
            hi = eta
            break
        lo = eta
        if eta >= eta_bar:
            return eta_bar
        probe *= 2.0
    else:
        if np.isinf(eta_bar):
            return np.inf
        t = tau(eta_bar)
        if t >= -EXACT_HIT_TOL:
            return eta_bar
        lo, hi = lo, eta_bar

    for _ in range(BISECT_MAX_ITER):
        if hi - lo <= BISECT_TOL:
            break
        mid = 0.5 * (lo + hi)
        t = tau(mid)
        if abs(t) <= EXACT_HIT_TOL:
            return mid
        if t > 0.0:
            lo = mid
        else:
            hi = mid
    return lo if lo > 0.0 else 0.5 * (lo + hi)


def compute_step_lengths(cone: SimplicialCone, cert: FreeSetCertificate) -> StepLengths:
    return StepLengths(
        np.array([step_length(cert, cone.vertex, cone.rays[:, j]) for j in range(cone.dim)])
    )


def build_cut(cone: SimplicialCone, cert: FreeSetCertificate,
              steps: StepLengths | None = None) -> Cut:
    """Assemble the intersection cut; infinite steps contribute nothing."""
    if steps is None:
        steps = compute_step_lengths(cone, cert)
    eta = steps.eta_star
    if np.all(np.isinf(eta)):
        raise TrivialCutError("free set contains the whole cone")
    inv = np.where(np.isinf(eta), 0.0, 1.0 / eta)
    coeffs = inv @ cone.rowmat
    rhs = float(coeffs @ cone.vertex) - 1.0
    return Cut(coeffs, rhs, CutOrigin.INTERSECTION, 1.0)
