"""Convex envelopes of concave power products over boxes, and OA cuts.

A concave function's convex envelope over a polytope is pinned down by its
vertex values, so over a box the envelope value at a point is the optimum
of a small LP over the 2**h corners; the optimal affine minorant is a facet
candidate.  Power products with positive exponents are supermodular, and
for h = 2 supermodularity yields the envelope in closed form from the two
triangles splitting the unit square.  Replacing the beta side of a term set
by its envelope gives a convex outer approximation; linearizing its gamma
side yields outer-approximation cuts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .dcc import DccForm
from .freesets import linearize_power
from .icuts import Cut, CutOrigin
from .model import Box, power_value

VALUE_TOL = 1e-9
SUPERMODULAR_TOL = 1e-12


class SupermodularityError(ValueError):
    """Corner values fail the increasing-difference precondition."""


@dataclass(frozen=True)
class Facet:
    """Affine underestimator ``u -> a . u + b`` of the envelope."""

    a: np.ndarray
    b: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))

    def __call__(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.a.size == 0:
            return np.full(u.shape[:-1], self.b) if u.ndim > 1 else np.float64(self.b)
        return u @ self.a + self.b


@dataclass(frozen=True)
class UnitScaling:
    """Affine change of variables between a box and the unit cube."""

    box: Box

    def forward(self, u: np.ndarray) -> np.ndarray:
        return (np.asarray(u, dtype=float) - self.box.lower) / self.box.width()

    def backward(self, w: np.ndarray) -> np.ndarray:
        return self.box.lower + np.asarray(w, dtype=float) * self.box.width()

    def facet_to_box(self, facet: Facet) -> Facet:
        """Rewrite a unit-cube facet in the original box coordinates."""
        a = facet.a / self.box.width()
        return Facet(a, facet.b - float(a @ self.box.lower))


@dataclass(frozen=True)
class EnvelopeModel:
    """Corner data of a power product over a box."""

    beta: np.ndarray
    box: Box
    vertices: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float))
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def h(self) -> int:
        return self.beta.size

    def psi(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return power_value(self.beta, u if self.h else u.reshape(u.shape[:-1] + (0,)))


def make_envelope_model(beta: np.ndarray, box: Box) -> EnvelopeModel:
    """Enumerate corners and their values; caps at 20 dimensions."""
    beta = np.asarray(beta, dtype=float)
    if beta.size != box.dim:
        raise ValueError("beta length must match the box dimension")
    if beta.size > 20:
        raise ValueError("envelope models are capped at 20 variables")
    if np.any(beta <= 0.0) or beta.sum() > 1.0 + 1e-9:
        raise ValueError("beta must be positive with 1-norm at most 1")
    if np.any(box.lower < 0.0):
        raise ValueError("envelope boxes live in the nonnegative orthant")
    corners = box.corners()
    return EnvelopeModel(beta, box, corners, power_value(beta, corners))


def _facet_lp(model: EnvelopeModel, ubar: np.ndarray) -> lp.LpModel:
    # Bounds on (a, b) keep the LP bounded without cutting off any facet:
    # facet slopes are corner-difference quotients, and the offset is a facet
    # value minus slopes times coordinates.
    side = model.box.width()
    if np.any(side <= 0.0):
        raise ValueError("degenerate box side; reduce the dimension first")
    spread = float(model.values.max() - model.values.min())
    a_bound = 10.0 * spread / side if model.h else np.zeros(0)
    a_bound = np.maximum(a_bound, 1e-12)
    reach = np.maximum(np.abs(model.box.lower), np.abs(model.box.upper))
    b_bound = 10.0 * max(1.0, float(np.abs(model.values).max())) + float(a_bound @ reach)
    objective = -np.concatenate([ubar, [1.0]])
    rows = np.hstack([model.vertices, np.ones((model.vertices.shape[0], 1))])
    return lp.LpModel(
        objective,
        rows,
        np.full(rows.shape[0], -np.inf),
        model.values,
        np.concatenate([-a_bound, [-b_bound]]),
        np.concatenate([a_bound, [b_bound]]),
    )


def envelope_value(model: EnvelopeModel, ubar: np.ndarray) -> tuple[float, Facet]:
    """Envelope value at ``ubar`` and an attaining affine underestimator."""
    ubar = np.asarray(ubar, dtype=float)
    if not model.box.contains(ubar):
        raise ValueError("evaluation point lies outside the box")
    sol = lp.solve(_facet_lp(model, ubar))
    if sol.status is not lp.LpStatus.OPTIMAL:
        raise lp.LpNumericalError(f"facet LP ended {sol.status.value}")
    facet = Facet(sol.zbar[:-1], float(sol.zbar[-1]))
    return float(facet(ubar)), facet


def check_supermodular(values: np.ndarray, tol: float = VALUE_TOL) -> bool:
    """Exhaustive increasing-difference check over the Boolean cube.

    ``values[mask]`` is the function value at the corner whose coordinate j
    equals bit j of ``mask``.  All (w1 <= w2, d) combinations are enumerated
    through submasks, 4**h triples in total; capped at h = 10.
    """
    values = np.asarray(values, dtype=float)
    count = values.shape[0]
    h = count.bit_length() - 1
    if 2**h != count:
        raise ValueError("values must have length 2**h")
    if h > 10:
        raise ValueError("exhaustive check capped at 10 dimensions")
    slack = tol * max(1.0, float(np.abs(values).max()))
    full = count - 1
    for w2 in range(count):
        w1 = w2
        while True:
            free = full & ~w2
            d = free
            while True:
                if values[w1 | d] - values[w1] > values[w2 | d] - values[w2] + slack:
                    return False
                if d == 0:
                    break
                d = (d - 1) & free
            if w1 == 0:
                break
            w1 = (w1 - 1) & w2
    return True


def bivariate_envelope(
    f00: float, f10: float, f01: float, f11: float, w: np.ndarray
) -> tuple[float, Facet]:
    """Closed-form envelope of a supermodular function on the unit square.

    The two triangles ``w1 + w2 <= 1`` and ``w1 + w2 >= 1`` carry the two
    supported affine pieces; the envelope is their maximum.  Ties on the
    shared diagonal report the lower-triangle facet.
    """
    if f11 + f00 < f10 + f01 - SUPERMODULAR_TOL * max(1.0, abs(f00), abs(f11)):
        raise SupermodularityError("corner values are not supermodular")
    w = np.asarray(w, dtype=float)
    lower_tri = Facet(np.array([f10 - f00, f01 - f00]), f00)
    upper_tri = Facet(np.array([f11 - f01, f11 - f10]), f01 + f10 - f11)
    v1, v2 = float(lower_tri(w)), float(upper_tri(w))
    if v1 >= v2:
        return v1, lower_tri
    return v2, upper_tri


def bivariate_envelope_on_box(
    model: EnvelopeModel, ubar: np.ndarray
) -> tuple[float, Facet]:
    """Closed-form path for h = 2 models, reported in box coordinates."""
    if model.h != 2:
        raise ValueError("closed form only covers two variables")
    scaling = UnitScaling(model.box)
    f00, f10, f01, f11 = model.values
    value, facet = bivariate_envelope(f00, f10, f01, f11, scaling.forward(ubar))
    return value, scaling.facet_to_box(facet)


def oa_cut(
    form: DccForm,
    zbar: np.ndarray,
    ubox: Box,
    vbox: Box,
    ambient_dim: int | None = None,
    tol: float = VALUE_TOL,
) -> Cut | None:
    """Outer-approximation cut at ``zbar``, or None when none is violated.

    The point is inside the convex outer approximation exactly when the
    beta-side envelope value does not exceed the gamma side; otherwise the
    inequality ``facet(u) <= psi_gamma(v)`` is valid and its linearization
    at the clamped v-part of ``zbar`` separates the point.
    """
    zbar = np.asarray(zbar, dtype=float)
    if not (np.all(np.isfinite(ubox.upper)) and np.all(np.isfinite(vbox.upper))):
        raise ValueError("outer-approximation cuts need finite boxes")
    if ambient_dim is None:
        ambient_dim = zbar.shape[0]
    u_idx, v_idx = list(form.u_index), list(form.v_index)
    ubar = np.clip(zbar[u_idx], ubox.lower, ubox.upper)
    vbar = np.maximum(zbar[v_idx], 1e-6)
    model = make_envelope_model(form.beta, ubox)
    value, facet = envelope_value(model, ubar)
    gap = value - float(power_value(form.gamma, vbar))
    if gap <= tol:
        return None
    lin = linearize_power(form.gamma, vbar)
    coeffs = np.zeros(ambient_dim)
    coeffs[u_idx] = facet.a
    coeffs[v_idx] -= lin.coeffs
    return Cut(coeffs, lin.constant - facet.b, CutOrigin.OUTER_APPROX, gap)
