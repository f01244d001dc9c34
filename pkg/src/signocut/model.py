"""Signomial programs, term evaluation, and the extended (lifted) formulation.

A signomial term is a monomial ``x**alpha`` with real (possibly negative)
exponents over positive variables.  A signomial program minimizes a linear
objective subject to rows that mix the variables x with the term values
``g(x)``.  Lifting introduces one variable per term (``y_i = g_i(x)``) so
that all nonconvexity is concentrated in the term equations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """A term or gradient was evaluated outside its domain."""


class UnboundedIntervalError(ValueError):
    """Interval evaluation of a term produced an unbounded enclosure."""


# Largest exponent argument that does not overflow a float64.
_EXP_MAX = 709.0


@dataclass(frozen=True)
class ExponentVector:
    """Sparse exponent vector of a signomial term.

    Zero exponents are never stored; ``indices`` are strictly increasing
    variable positions and ``exponents`` the matching nonzero powers.
    """

    indices: tuple[int, ...]
    exponents: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.exponents):
            raise ValueError("indices and exponents differ in length")
        if any(e == 0.0 for e in self.exponents):
            raise ValueError("zero exponents must be dropped")
        if any(i < 0 for i in self.indices):
            raise ValueError("negative variable index")
        if list(self.indices) != sorted(set(self.indices)):
            raise ValueError("indices must be strictly increasing")

    @staticmethod
    def from_dense(values) -> "ExponentVector":
        """Build from a dense iterable, dropping zero entries."""
        idx = []
        expo = []
        for j, a in enumerate(values):
            if a != 0.0:
                idx.append(j)
                expo.append(float(a))
        return ExponentVector(tuple(idx), tuple(expo))

    @staticmethod
    def from_map(entries: dict[int, float]) -> "ExponentVector":
        items = sorted((j, float(a)) for j, a in entries.items() if a != 0.0)
        return ExponentVector(tuple(j for j, _ in items), tuple(a for _, a in items))

    def max_index(self) -> int:
        return max(self.indices) if self.indices else -1

    def as_map(self) -> dict[int, float]:
        return dict(zip(self.indices, self.exponents))


def power_value(exponents: np.ndarray, points: np.ndarray) -> np.ndarray:
    """``prod(points**exponents)`` along the last axis, in log space.

    ``points`` must be nonnegative; zeros are only legal under positive
    exponents (then the product is 0).  Overflow yields ``+inf`` rather
    than raising.  Empty exponent vectors give the empty product 1.
    """
    exponents = np.asarray(exponents, dtype=float)
    points = np.asarray(points, dtype=float)
    if exponents.size == 0:
        return np.ones(points.shape[:-1]) if points.ndim > 1 else np.float64(1.0)
    if np.any(points < 0.0):
        raise DomainError("negative argument to a signomial term")
    zero = points == 0.0
    if np.any(zero & (exponents < 0.0)):
        raise DomainError("zero argument under a negative exponent")
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        logs = np.where(zero, 0.0, np.log(np.where(zero, 1.0, points)))
        s = logs @ exponents
        out = np.where(s > _EXP_MAX, np.inf, np.exp(np.minimum(s, _EXP_MAX)))
    annihilated = np.any(zero & (exponents > 0.0), axis=-1)
    out = np.where(annihilated, 0.0, out)
    return out if out.ndim else np.float64(out)


def eval_term(alpha: ExponentVector, x: np.ndarray) -> np.ndarray:
    """Evaluate ``x**alpha``.  ``x`` may carry leading batch axes."""
    x = np.asarray(x, dtype=float)
    if alpha.max_index() >= x.shape[-1]:
        raise IndexError("term references a variable beyond len(x)")
    return power_value(np.array(alpha.exponents), x[..., list(alpha.indices)])


def grad_term(alpha: ExponentVector, x: np.ndarray) -> np.ndarray:
    """Gradient of ``x**alpha``; component j is ``alpha_j * value / x_j``.

    Requires ``x > 0`` on the support of alpha.
    """
    x = np.asarray(x, dtype=float)
    idx = list(alpha.indices)
    if np.any(x[..., idx] <= 0.0):
        raise DomainError("gradient needs strictly positive support values")
    value = eval_term(alpha, x)
    grad = np.zeros_like(x)
    grad[..., idx] = np.array(alpha.exponents) * value[..., None] / x[..., idx]
    return grad


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``lower <= z <= upper`` (arrays are not mutated)."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if lo.shape != hi.shape:
            raise ValueError("bound shapes differ")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, z: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.all((z >= self.lower - tol) & (z <= self.upper + tol), axis=-1)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(count, self.dim))

    def corners(self) -> np.ndarray:
        """All 2**dim corners, row-ordered by binary counting."""
        if self.dim > 20:
            raise ValueError("corner enumeration capped at 20 dimensions")
        bits = ((np.arange(2**self.dim)[:, None] >> np.arange(self.dim)) & 1).astype(float)
        return self.lower + bits * (self.upper - self.lower)


@dataclass(frozen=True)
class SignomialProgram:
    """Natural-form instance: ``min c.x  s.t.  A x + B g(x) <= d``, x in bounds."""

    n: int
    k: int
    m: int
    c: np.ndarray
    A: np.ndarray
    Bmat: np.ndarray
    d: np.ndarray
    terms: tuple[ExponentVector, ...] = field(default_factory=tuple)
    bounds: Box = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float).reshape(self.m, self.n))
        object.__setattr__(self, "Bmat", np.asarray(self.Bmat, dtype=float).reshape(self.m, self.k))
        object.__setattr__(self, "d", np.asarray(self.d, dtype=float))
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.c.shape != (self.n,):
            raise ValueError("objective length must equal n")
        if self.d.shape != (self.m,):
            raise ValueError("rhs length must equal m")
        if len(self.terms) != self.k:
            raise ValueError("term count must equal k")
        for t in self.terms:
            if t.max_index() >= self.n:
                raise ValueError("term references variable outside [n]")
        if self.bounds is None or self.bounds.dim != self.n:
            raise ValueError("bounds must cover exactly the n variables")
        if np.any(self.bounds.lower < 0.0):
            raise ValueError("signomial program variables must be nonnegative")

    def term_values(self, x: np.ndarray) -> np.ndarray:
        """g(x) for a single point or a batch (last axis is the variables)."""
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape[:-1] + (self.k,))
        for i, t in enumerate(self.terms):
            out[..., i] = eval_term(t, x)
        return out


@dataclass(frozen=True)
class ExtendedForm:
    """Lifted formulation over ``z = (x, y)`` with interval bounds on y.

    ``unbounded_terms`` flags term indices whose y-interval is unbounded
    (zero lower bound under a negative exponent); such instances cannot be
    boxed for outer-approximation cuts.
    """

    base: SignomialProgram
    zbounds: Box
    unbounded_terms: tuple[int, ...] = ()

    @property
    def dim(self) -> int:
        return self.base.n + self.base.k

    def split(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=float)
        return z[..., : self.base.n], z[..., self.base.n :]


def term_interval(alpha: ExponentVector, box: Box) -> tuple[float, float]:
    """Exact range of ``x**alpha`` over a nonnegative box.

    Monomials are monotone per coordinate, so the extrema sit at the corner
    picked sign-by-sign; this is tighter than generic interval arithmetic.
    """
    lo_point = np.array(box.lower, dtype=float)
    hi_point = np.array(box.upper, dtype=float)
    at_min = lo_point.copy()
    at_max = hi_point.copy()
    for j, a in zip(alpha.indices, alpha.exponents):
        if a < 0.0:
            at_min[j], at_max[j] = hi_point[j], lo_point[j]
            if lo_point[j] == 0.0:
                raise UnboundedIntervalError(
                    f"variable {j} has zero lower bound under exponent {a}"
                )
    return float(eval_term(alpha, at_min)), float(eval_term(alpha, at_max))


def lift(program: SignomialProgram) -> ExtendedForm:
    """Build the extended form; y-bounds are the interval hull of each term.

    Unbounded y-intervals (zero lower bound under a negative exponent) are
    recorded in ``unbounded_terms`` with an infinite upper bound rather than
    silently truncated.
    """
    if not np.all(np.isfinite(program.bounds.lower)) or not np.all(
        np.isfinite(program.bounds.upper)
    ):
        raise ValueError("lift requires finite x-bounds")
    ylo = np.empty(program.k)
    yhi = np.empty(program.k)
    flagged = []
    for i, t in enumerate(program.terms):
        try:
            ylo[i], yhi[i] = term_interval(t, program.bounds)
        except UnboundedIntervalError:
            neg = [j for j, a in zip(t.indices, t.exponents) if a < 0.0]
            at_min = np.where(np.isin(np.arange(program.n), neg), program.bounds.upper,
                              program.bounds.lower)
            ylo[i] = float(eval_term(t, at_min))
            yhi[i] = np.inf
            flagged.append(i)
    zlo = np.concatenate([program.bounds.lower, ylo])
    zhi = np.concatenate([program.bounds.upper, yhi])
    return ExtendedForm(program, Box(zlo, zhi), tuple(flagged))
