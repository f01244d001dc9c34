"""Signomial-term-free sets by reverse linearization, and their lifting.

Reversing the normalized constraint ``psi_beta(u) <= psi_gamma(v)`` and
replacing the gamma side by its tangent at a positive point ``vbar`` gives

    C = { z : psi_beta(u) - lin(v) >= 0 },

whose interior contains no point of the term set: on ``v >= 0`` the tangent
overestimates the concave ``psi_gamma``, so any interior point of C has
``psi_beta(u) > lin(v) >= psi_gamma(v)``.  When the form is normalized the
set is maximal in the nonnegative orthant, which is witnessed constructively
by ``maximality_witness``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dcc import DccForm
from .model import DomainError, power_value

VBAR_FLOOR = 1e-6
MEMBERSHIP_TOL = 1e-9


class Membership(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


@dataclass(frozen=True)
class AffineFunction:
    """``v -> constant + coeffs . v`` over the v-coordinates."""

    coeffs: np.ndarray
    constant: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if self.coeffs.size == 0:
            return np.full(v.shape[:-1], self.constant) if v.ndim > 1 else np.float64(self.constant)
        return self.constant + v @ self.coeffs


def linearize_power(gamma: np.ndarray, vbar: np.ndarray) -> AffineFunction:
    """Tangent of ``psi_gamma`` at ``vbar > 0``; overestimates it on v >= 0."""
    gamma = np.asarray(gamma, dtype=float)
    vbar = np.asarray(vbar, dtype=float)
    if gamma.size == 0:
        return AffineFunction(np.zeros(0), 1.0)
    if np.any(vbar <= 0.0):
        raise DomainError("linearization point must be strictly positive")
    value = float(power_value(gamma, vbar))
    coeffs = gamma * value / vbar
    return AffineFunction(coeffs, value - float(coeffs @ vbar))


@dataclass(frozen=True)
class FreeSetCertificate:
    """A term-free set: the beta side kept, the gamma side linearized.

    The membership function is ``phi(z) = psi_beta(z[u]) - lin(z[v])``;
    ``lifted_dim`` is the ambient dimension the index maps live in (the
    orthogonal lifting is constant on every other coordinate).
    """

    form: DccForm
    vbar: np.ndarray
    lin: AffineFunction
    lifted_dim: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "vbar", np.asarray(self.vbar, dtype=float))
        needed = max(self.form.u_index + self.form.v_index, default=-1) + 1
        if self.lifted_dim < needed:
            raise IndexError("index maps exceed the ambient dimension")
        if np.any(self.vbar <= 0.0):
            raise ValueError("vbar must be strictly positive")

    def phi(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return self.form.psi_u(z) - self.lin(z[..., list(self.form.v_index)])


def build_free_set(form: DccForm, vbar: np.ndarray, lifted_dim: int | None = None) -> FreeSetCertificate:
    """Certificate for the reverse-linearized set at ``vbar``.

    ``vbar`` is clamped componentwise to at least ``VBAR_FLOOR``: relaxation
    values can sit at zero while the construction needs a strictly positive
    linearization point.
    """
    vbar = np.maximum(np.asarray(vbar, dtype=float), VBAR_FLOOR)
    if vbar.shape != (form.ell,):
        raise ValueError("vbar length must match the gamma block")
    if lifted_dim is None:
        lifted_dim = max(form.u_index + form.v_index, default=-1) + 1
    return FreeSetCertificate(form, vbar, linearize_power(form.gamma, vbar), lifted_dim)


def membership(cert: FreeSetCertificate, z: np.ndarray, tol: float = MEMBERSHIP_TOL) -> Membership:
    """Classify a point against the free set boundary ``phi = 0``."""
    value = float(cert.phi(z))
    if value > tol:
        return Membership.INTERIOR
    if value < -tol:
        return Membership.EXTERIOR
    return Membership.BOUNDARY


def orthogonal_lift(cert: FreeSetCertificate, ambient_dim: int) -> FreeSetCertificate:
    """Lift to a larger space; membership ignores the new coordinates."""
    needed = max(cert.form.u_index + cert.form.v_index, default=-1) + 1
    if ambient_dim < needed:
        raise IndexError("ambient dimension too small for the index maps")
    return FreeSetCertificate(cert.form, cert.vbar, cert.lin, ambient_dim)


def maximality_witness(
    cert: FreeSetCertificate, ubreve: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Exposing point proving the free set cannot be enlarged.

    With ``rho = psi_gamma(vbar) / psi_beta(ubreve)``: if the beta side is
    homogeneous of degree 1 the witness is ``(rho * ubreve, vbar)``, else the
    gamma side is and it is ``(ubreve, vbar / rho)``.  The witness lies on
    the boundary of both the free set and the reversed term set, and the
    tangent inequality at ``(ubreve, vbar)`` is tight there.
    """
    form = cert.form
    if not form.is_normalized(1e-9):
        raise ValueError("witness construction needs a normalized form")
    ubreve = np.asarray(ubreve, dtype=float)
    if np.any(ubreve <= 0.0):
        raise ValueError("ubreve must be strictly positive")
    fu = float(power_value(form.beta, ubreve))
    if fu == 0.0:
        raise ZeroDivisionError("psi_beta vanishes at ubreve")
    rho = float(power_value(form.gamma, cert.vbar)) / fu
    if abs(form.beta_norm() - 1.0) <= 1e-9:
        return rho * ubreve, cert.vbar.copy()
    return ubreve.copy(), cert.vbar / rho


def witness_residuals(
    cert: FreeSetCertificate, ubreve: np.ndarray, uprime: np.ndarray, vprime: np.ndarray
) -> tuple[float, float, float]:
    """The three defining equalities of the witness, as residuals.

    In order: tangents of both sides agree at the witness; the witness is on
    the free-set boundary; the witness is on the reversed-set boundary.
    """
    form = cert.form
    lin_beta = linearize_power(form.beta, np.asarray(ubreve, dtype=float))
    fu = float(power_value(form.beta, uprime))
    gv = float(power_value(form.gamma, vprime))
    lin_u = float(lin_beta(np.asarray(uprime, dtype=float)))
    lin_v = float(cert.lin(np.asarray(vprime, dtype=float)))
    return lin_u - lin_v, fu - lin_v, fu - gv
