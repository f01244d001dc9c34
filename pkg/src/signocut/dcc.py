"""Normalized difference-of-concave reformulation of signomial term sets.

The epigraph or hypograph of a term ``t <=> x**alpha`` is rewritten so that
both sides become power products with strictly positive exponents,

    psi_beta(u) <= psi_gamma(v),

and then both exponent blocks are scaled by a common positive ``eta`` so
that ``max(||beta||_1, ||gamma||_1) = 1``.  At that scaling both sides are
concave over the nonnegative orthant and at least one side is positive
homogeneous of degree 1, which is what makes the derived free sets maximal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model import ExponentVector, ExtendedForm, power_value

NORM_TOL = 1e-12


class Sense(enum.Enum):
    """Which side of the graph ``t = x**alpha`` the set keeps."""

    EPI = "epi"  # t >= x**alpha
    HYPO = "hypo"  # t <= x**alpha


class ConvexityClass(enum.Enum):
    CONVEX = "convex"
    REVERSE_CONVEX = "reverse_convex"
    NONCONVEX = "nonconvex"


@dataclass(frozen=True)
class DccForm:
    """One signomial term set in normalized difference-of-concave form.

    ``u_index`` and ``v_index`` name the ambient coordinates carrying u and
    v; the lifted variable appears in exactly one of them (``t_index``).
    The member constraint reads ``psi_beta(z[u_index]) <= psi_gamma(z[v_index])``.
    """

    sense: Sense
    beta: np.ndarray
    u_index: tuple[int, ...]
    gamma: np.ndarray
    v_index: tuple[int, ...]
    eta: float
    t_index: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float))
        object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=float))
        if np.any(self.beta <= 0.0) or np.any(self.gamma <= 0.0):
            raise ValueError("exponent blocks must be strictly positive")
        if len(self.u_index) != self.beta.size or len(self.v_index) != self.gamma.size:
            raise ValueError("index maps must match exponent block sizes")
        if set(self.u_index) & set(self.v_index):
            raise ValueError("u and v coordinates must be disjoint")
        t_sides = (self.t_index in self.u_index) + (self.t_index in self.v_index)
        if t_sides != 1:
            raise ValueError("lifted variable must appear on exactly one side")

    @property
    def h(self) -> int:
        return self.beta.size

    @property
    def ell(self) -> int:
        return self.gamma.size

    def beta_norm(self) -> float:
        return float(self.beta.sum())

    def gamma_norm(self) -> float:
        return float(self.gamma.sum())

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(max(self.beta_norm(), self.gamma_norm()) - 1.0) <= tol

    def psi_u(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return power_value(self.beta, z[..., list(self.u_index)])

    def psi_v(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return power_value(self.gamma, z[..., list(self.v_index)])

    def residual(self, z: np.ndarray) -> np.ndarray:
        """psi_beta(u) - psi_gamma(v); nonpositive on the term set."""
        return self.psi_u(z) - self.psi_v(z)


def reduce_and_split(
    alpha: ExponentVector, sense: Sense, t_index: int
) -> tuple[np.ndarray, tuple[int, ...], np.ndarray, tuple[int, ...]]:
    """Split ``t <=> x**alpha`` into positive-exponent blocks.

    The negative exponents move across the inequality next to t, so the
    HYPO case reads ``t * x_neg**(-alpha_neg) <= x_pos**alpha_pos`` and
    already has the "<=" orientation; the EPI case is the same inequality
    with the two sides swapped.  Returns ``(beta', u_index, gamma', v_index)``
    for the oriented constraint ``psi_beta'(u) <= psi_gamma'(v)``.
    """
    if not alpha.indices:
        raise ValueError("term has no nonzero exponents")
    if t_index in alpha.indices:
        raise ValueError("lifted variable collides with a term variable")
    neg = [(j, -a) for j, a in zip(alpha.indices, alpha.exponents) if a < 0.0]
    pos = [(j, a) for j, a in zip(alpha.indices, alpha.exponents) if a > 0.0]
    t_block = np.array([1.0] + [a for _, a in neg])
    t_side = (t_index,) + tuple(j for j, _ in neg)
    p_block = np.array([a for _, a in pos])
    p_side = tuple(j for j, _ in pos)
    if sense is Sense.HYPO:
        return t_block, t_side, p_block, p_side
    return p_block, p_side, t_block, t_side


def normalize(
    beta_raw: np.ndarray,
    u_index: tuple[int, ...],
    gamma_raw: np.ndarray,
    v_index: tuple[int, ...],
    sense: Sense,
    t_index: int,
) -> DccForm:
    """Scale both exponent blocks so that ``max(||beta||_1, ||gamma||_1) = 1``."""
    beta_raw = np.asarray(beta_raw, dtype=float)
    gamma_raw = np.asarray(gamma_raw, dtype=float)
    top = max(beta_raw.sum(), gamma_raw.sum())
    if top <= 0.0:
        raise ValueError("cannot normalize two empty exponent blocks")
    eta = 1.0 / top
    return DccForm(sense, eta * beta_raw, u_index, eta * gamma_raw, v_index, eta, t_index)


def dcc_form(alpha: ExponentVector, sense: Sense, t_index: int) -> DccForm:
    """Reduce, split, and normalize in one step."""
    return normalize(*reduce_and_split(alpha, sense, t_index), sense, t_index)


def term_form(ext: ExtendedForm, term: int, sense: Sense) -> DccForm:
    """Normalized form of term ``term`` of an extended formulation, indexed
    in the ambient z = (x, y) coordinates."""
    return dcc_form(ext.base.terms[term], sense, ext.base.n + term)


def _is_unit(block: np.ndarray, tol: float) -> bool:
    return block.size == 1 and abs(block[0] - 1.0) <= tol


def classify(form: DccForm, tol: float = NORM_TOL) -> ConvexityClass:
    """Pattern classification of the term set from its normalized form.

    Reverse-convex when the gamma side is trivial (empty or one linear
    coordinate); convex in the mirrored situation.  Everything else is
    nonconvex.  Halfspaces match both patterns and report reverse-convex.
    """
    if not form.is_normalized(1e-9):
        raise ValueError("classify expects a normalized form")
    if form.ell == 0 and abs(form.beta_norm() - 1.0) <= tol:
        return ConvexityClass.REVERSE_CONVEX
    if _is_unit(form.gamma, tol) and form.beta_norm() <= 1.0 + tol:
        return ConvexityClass.REVERSE_CONVEX
    if form.h == 0 and abs(form.gamma_norm() - 1.0) <= tol:
        return ConvexityClass.CONVEX
    if _is_unit(form.beta, tol) and form.gamma_norm() <= 1.0 + tol:
        return ConvexityClass.CONVEX
    return ConvexityClass.NONCONVEX
