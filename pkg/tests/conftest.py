"""Shared generators for randomized property tests.

Random term-set forms are produced through the public reformulation path
from random exponent vectors; the cone/sample helpers construct separation
scenarios with a guaranteed supply of member points inside the cone.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from signocut.dcc import DccForm, Sense, dcc_form
from signocut.freesets import FreeSetCertificate, build_free_set
from signocut.lp import SimplicialCone
from signocut.model import ExponentVector, power_value


def random_exponent_vector(rng: np.random.Generator, n_neg: int, n_pos: int) -> ExponentVector:
    entries = {}
    for j in range(n_neg):
        entries[j] = -float(rng.uniform(0.3, 2.5))
    for j in range(n_neg, n_neg + n_pos):
        entries[j] = float(rng.uniform(0.3, 2.5))
    return ExponentVector.from_map(entries)


def random_form(rng: np.random.Generator, case: str | None = None) -> DccForm:
    """Random normalized form with both sides nonempty.

    ``case='beta'`` forces the beta side to carry the unit norm (degree-1
    homogeneous), ``case='gamma'`` forces the gamma side, strictly.
    """
    for _ in range(200):
        n_neg = int(rng.integers(0, 3))
        n_pos = int(rng.integers(1, 3))
        alpha = random_exponent_vector(rng, n_neg, n_pos)
        sense = Sense.HYPO if rng.random() < 0.5 else Sense.EPI
        form = dcc_form(alpha, sense, n_neg + n_pos)
        if form.h == 0 or form.ell == 0:
            continue
        beta_unit = abs(form.beta_norm() - 1.0) <= 1e-12
        gamma_unit = abs(form.gamma_norm() - 1.0) <= 1e-12
        if case == "beta" and not beta_unit:
            continue
        if case == "gamma" and (not gamma_unit or beta_unit):
            continue
        return form
    raise AssertionError("failed to draw a form with the requested shape")


@dataclass
class SeparationScenario:
    form: DccForm
    cert: FreeSetCertificate
    zbar: np.ndarray
    cone: SimplicialCone
    members: np.ndarray  # points of the term set inside the cone


def _random_cone(rng: np.random.Generator, zbar: np.ndarray, h: int) -> SimplicialCone | None:
    dim = zbar.size
    rays = np.empty((dim, dim))
    for j in range(dim):
        direction = rng.normal(size=dim)
        direction[:h] -= 0.4  # bias u down, v up: toward the member set
        direction[h:] += 0.4
        rays[:, j] = direction / np.linalg.norm(direction)
    if abs(np.linalg.det(rays)) < 1e-3:
        return None
    return SimplicialCone(zbar.copy(), rays, -np.linalg.inv(rays))


def make_scenario(
    rng: np.random.Generator, case: str | None = None, want_members: int = 10_000
) -> SeparationScenario:
    """Random (form, certificate, infeasible vertex, cone, member sample)."""
    for _ in range(60):
        form = random_form(rng, case)
        h, ell = form.h, form.ell
        vbar = rng.uniform(0.5, 2.0, ell)
        uhat = rng.uniform(0.5, 2.0, h)
        # scale the u block so the point sits strictly outside the set
        target = float(power_value(form.gamma, vbar)) * rng.uniform(1.3, 3.0)
        rho = (target / float(power_value(form.beta, uhat))) ** (1.0 / form.beta_norm())
        zbar = np.empty(h + ell)
        zbar[list(form.u_index)] = rho * uhat
        zbar[list(form.v_index)] = vbar
        cert = build_free_set(form, vbar)
        cone = _random_cone(rng, zbar, h)
        if cone is None:
            continue
        members = []
        found = 0
        for _ in range(40):
            steps = rng.exponential(scale=1.0, size=(50_000, zbar.size))
            pts = cone.points(steps)
            ok = np.all(pts >= 0.0, axis=1)
            pts = pts[ok]
            if pts.size == 0:
                continue
            inside = form.residual(pts) <= 0.0
            pts = pts[inside]
            if len(pts):
                members.append(pts)
                found += len(pts)
            if found >= want_members:
                break
        if found >= want_members:
            allpts = np.concatenate(members)[:want_members]
            return SeparationScenario(form, cert, zbar, cone, allpts)
    raise AssertionError("failed to build a separation scenario")


def _embed(form: DccForm, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    z = np.empty(form.h + form.ell)
    z[list(form.u_index)] = u
    z[list(form.v_index)] = v
    return z


def boundary_point(form: DccForm, u: np.ndarray, v_dir: np.ndarray) -> np.ndarray:
    """Scale ``v_dir`` so that (u, v) sits exactly on the member boundary."""
    scale = (
        float(power_value(form.beta, u)) / float(power_value(form.gamma, v_dir))
    ) ** (1.0 / form.gamma_norm())
    return _embed(form, u, scale * v_dir)


def boundary_point_u(form: DccForm, u_dir: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Scale ``u_dir`` so that (u, v) sits exactly on the member boundary."""
    scale = (
        float(power_value(form.gamma, v)) / float(power_value(form.beta, u_dir))
    ) ** (1.0 / form.beta_norm())
    return _embed(form, scale * u_dir, v)


def nonconvexity_witnesses(
    form: DccForm, rng: np.random.Generator
) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
    """Constructive curvature probes for a normalized nonconvex form.

    Returns two pairs of boundary points: the first lies in the member set
    with its midpoint strictly outside, the second lies in the reversed set
    with its midpoint strictly inside.  Multi-coordinate blocks use
    non-proportional pairs (strict concavity transverse to rays); single
    coordinates use proportional pairs (degree mismatch between the sides).
    """
    c = float(rng.uniform(1.6, 2.4))
    if form.h >= 2:
        v = rng.uniform(0.5, 2.0, form.ell)
        u1 = rng.uniform(0.5, 2.0, form.h)
        u2 = rng.uniform(0.5, 2.0, form.h)
        u2[0] *= 2.5  # break proportionality
        set_pair = (boundary_point_u(form, u1, v), boundary_point_u(form, u2, v))
    else:
        v = rng.uniform(0.5, 2.0, form.ell)
        u1 = rng.uniform(0.5, 2.0, form.h)
        z1 = boundary_point(form, u1, v)
        z2 = boundary_point(form, u1 * c ** (form.gamma_norm() / form.beta_norm()), c * v)
        set_pair = (z1, z2)
    if form.ell >= 2:
        u = rng.uniform(0.5, 2.0, form.h)
        v1 = rng.uniform(0.5, 2.0, form.ell)
        v2 = rng.uniform(0.5, 2.0, form.ell)
        v2[0] *= 2.5
        rev_pair = (boundary_point(form, u, v1), boundary_point(form, u, v2))
    else:
        u = rng.uniform(0.5, 2.0, form.h)
        v1 = rng.uniform(0.5, 2.0, form.ell)
        z1 = boundary_point(form, u, v1)
        z2 = boundary_point(form, c ** (1.0 / form.beta_norm()) * u, v1)
        rev_pair = (z1, z2)
    return set_pair, rev_pair


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
