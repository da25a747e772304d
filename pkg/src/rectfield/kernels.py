"""Closed-form covariance kernels for the self-similar field families.

Every kernel K(s, t) here describes a centered Gaussian field on the
positive orthant that is coordinate-wise self-similar with Hurst vector H:

    K(a o s, a o t) = (prod_k a_k^{2 H_k}) K(s, t),   a in (0, inf)^N,

vanishes whenever a coordinate of s or t is zero, and satisfies
K(t, t) = prod_k t_k^{2 H_k}.  The families differ in how much stationarity
their rectangular increments retain, recorded as ``claimed_class`` on the
kernel and cross-checked numerically by :mod:`rectfield.increments`.

The general strictly-stationary-increment family is a mixture over sign
vectors e in {-1,+1}^N with weights gamma_e (nonnegative, symmetric under
e -> -e, summing to one).  Its covariance is the real part of

    sum_e gamma_e  prod_j  P(H_j, t_j, s_j, e_j)

where the per-coordinate factor P is, away from H = 1/2,

    (1/2) [ (t^{2H} + s^{2H} - |t-s|^{2H})
            + i e tan(pi H) (-t^{2H} + s^{2H} + sgn(t-s)|t-s|^{2H}) ]

and, at H = 1/2,

    min(t, s) + (i e / pi) (t log t - s log s - (t-s) log|t-s|),

with the conventions 0 log 0 := 0 and sgn(0) := 0.  Uniform weights
gamma_e = 2^{-N} collapse the mixture to the fractional Brownian sheet.
"""

from __future__ import annotations

import enum
import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

import numpy as np

__all__ = [
    "StationarityClass",
    "WeightValidationError",
    "StrictWeights",
    "validate_weights",
    "strict2d_weights",
    "FBS",
    "StrictGeneral",
    "Strict2D",
    "MildTheta",
    "YHalf",
    "ZHalf",
    "MovingPair",
    "FieldSpec",
    "CovKernel",
    "make_kernel",
    "cov_fbs",
    "cov_strict_general",
    "cov_strict_2d",
    "cov_mild_theta",
    "cov_y_half",
    "cov_z_half",
]


class StationarityClass(enum.Enum):
    STRICT_WIDE = "strict_wide"
    MILD_ONLY = "mild_only"
    NONE = "none"


def validate_hurst(values) -> tuple[float, ...]:
    out = tuple(float(v) for v in np.atleast_1d(values))
    if len(out) < 1:
        raise ValueError("Hurst vector must have at least one component")
    for v in out:
        if not 0.0 < v < 1.0:
            raise ValueError(f"Hurst index must lie in (0,1), got {v!r}")
    return out


def _as_point(p, n=None) -> tuple[float, ...]:
    pt = tuple(float(v) for v in np.atleast_1d(p))
    if n is not None and len(pt) != n:
        raise ValueError(f"point has dimension {len(pt)}, expected {n}")
    if any(v < 0.0 for v in pt):
        raise ValueError(f"points must lie in the positive orthant, got {pt}")
    return pt


# --------------------------------------------------------------------------
# Weights for the strictly-stationary mixture
# --------------------------------------------------------------------------

class WeightValidationError(ValueError):
    """Carries every violated weight constraint, one message per violation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def _sign_vectors(n):
    return list(itertools.product((1, -1), repeat=n))


@dataclass(frozen=True)
class StrictWeights:
    """Normalized mixture weights gamma_e, one per sign vector e in {-1,+1}^N."""

    gamma_by_sign: Mapping[tuple, float]

    def __post_init__(self):
        gam = {tuple(int(x) for x in k): float(v)
               for k, v in self.gamma_by_sign.items()}
        n = len(next(iter(gam)))
        violations = []
        expected = set(_sign_vectors(n))
        if set(gam) != expected:
            violations.append(f"need all {2**n} sign vectors of length {n}")
        else:
            for e, v in gam.items():
                if v < 0.0:
                    violations.append(f"gamma{e} = {v:g} is negative")
                neg = tuple(-x for x in e)
                if abs(v - gam[neg]) > 1e-12:
                    violations.append(f"gamma{e} != gamma{neg}")
            total = sum(gam.values())
            if abs(total - 1.0) > 1e-10:
                violations.append(f"weights sum to {total!r}, expected 1")
        if violations:
            raise WeightValidationError(violations)
        object.__setattr__(self, "gamma_by_sign", gam)

    @property
    def n(self) -> int:
        return len(next(iter(self.gamma_by_sign)))

    @classmethod
    def uniform(cls, n: int) -> "StrictWeights":
        return cls({e: 2.0**-n for e in _sign_vectors(n)})

    def items(self):
        return self.gamma_by_sign.items()


def _spectral_mass(H) -> float:
    """prod_j Gamma(1+2H_j) sin(pi H_j) / pi, the required raw-weight total."""
    return math.prod(math.gamma(1 + 2 * h) * math.sin(math.pi * h) / math.pi
                     for h in H)


def validate_weights(raw_K: Mapping, H) -> StrictWeights:
    """Check raw spectral weights K_e and return them normalized.

    Raw weights must be nonnegative, symmetric under e -> -e, and sum to
    prod_j Gamma(1+2H_j) sin(pi H_j)/pi (within 1e-10); the normalized
    weights gamma_e = K_e / total then sum to one.  All violated
    constraints are reported together.
    """
    H = validate_hurst(H)
    K = {tuple(int(x) for x in k): float(v) for k, v in raw_K.items()}
    n = len(H)
    violations = []
    if set(K) != set(_sign_vectors(n)):
        raise WeightValidationError(
            [f"need all {2**n} sign vectors of length {n}"])
    for e, v in K.items():
        if v < 0.0:
            violations.append(f"K{e} = {v:g} is negative")
        neg = tuple(-x for x in e)
        if abs(v - K[neg]) > 1e-12 * max(1.0, abs(v)):
            violations.append(f"K{e} != K{neg} (symmetry)")
    mass = _spectral_mass(H)
    total = sum(K.values())
    if abs(total - mass) > 1e-10 * max(1.0, mass):
        violations.append(f"sum of K_e is {total!r}, expected {mass!r}")
    if violations:
        raise WeightValidationError(violations)
    return StrictWeights({e: v / mass for e, v in K.items()})


def strict2d_weights(gamma: float) -> StrictWeights:
    """Two-dimensional weights realizing coupling gamma = -sum_e gamma_e e1 e2."""
    if not -1.0 <= gamma <= 1.0:
        raise ValueError(f"coupling gamma must lie in [-1,1], got {gamma!r}")
    a = (1.0 - gamma) / 4.0   # e1 e2 = +1 pair
    b = (1.0 + gamma) / 4.0   # e1 e2 = -1 pair
    return StrictWeights({(1, 1): a, (-1, -1): a, (1, -1): b, (-1, 1): b})


# --------------------------------------------------------------------------
# Scalar building blocks
# --------------------------------------------------------------------------

def _tlogt(x: float) -> float:
    """x log x with the boundary convention 0 log 0 := 0."""
    return x * math.log(x) if x > 0.0 else 0.0


def _log_bracket(t: float, s: float) -> float:
    """t log t - s log s - (t-s) log|t-s|, each term with 0 log 0 := 0."""
    d = t - s
    tail = d * math.log(abs(d)) if d != 0.0 else 0.0
    return _tlogt(t) - _tlogt(s) - tail


def _sym_bracket(h: float, t: float, s: float) -> float:
    """t^{2H} + s^{2H} - |t-s|^{2H}."""
    e = 2.0 * h
    return t**e + s**e - abs(t - s)**e


def _skew_bracket(h: float, t: float, s: float) -> float:
    """-t^{2H} + s^{2H} + sgn(t-s)|t-s|^{2H} with sgn(0) := 0."""
    e = 2.0 * h
    d = t - s
    tail = math.copysign(abs(d)**e, d) if d != 0.0 else 0.0
    return -(t**e) + s**e + tail


def _strict_factor(h: float, t: float, s: float, e: int) -> complex:
    """Normalized per-coordinate mixture factor P(H, t, s, e)."""
    if h == 0.5:
        return complex(min(t, s), e * _log_bracket(t, s) / math.pi)
    return 0.5 * complex(_sym_bracket(h, t, s),
                         e * math.tan(math.pi * h) * _skew_bracket(h, t, s))


# --------------------------------------------------------------------------
# Covariance functions
# --------------------------------------------------------------------------

def cov_fbs(H, s, t) -> float:
    """Fractional Brownian sheet: 2^{-N} prod_k (t^{2H}+s^{2H}-|t-s|^{2H})."""
    H = validate_hurst(H)
    s = _as_point(s, len(H))
    t = _as_point(t, len(H))
    out = 2.0 ** -len(H)
    for h, sk, tk in zip(H, s, t):
        out *= _sym_bracket(h, tk, sk)
    return out


def cov_strict_general(H, weights: StrictWeights, s, t,
                       imag_tol: float = 1e-10) -> float:
    """Mixture covariance sum_e gamma_e prod_j P(H_j, t_j, s_j, e_j).

    The weight symmetry gamma_e = gamma_{-e} makes the imaginary parts of
    opposite sign vectors cancel; a residual beyond ``imag_tol`` (relative
    to the diagonal scale) indicates corrupted weights and raises.
    """
    H = validate_hurst(H)
    if weights.n != len(H):
        raise ValueError(f"weights are {weights.n}-dimensional, H is {len(H)}")
    s = _as_point(s, len(H))
    t = _as_point(t, len(H))
    total = 0.0 + 0.0j
    for e, gam in weights.items():
        if gam == 0.0:
            continue
        prod = complex(gam)
        for j, ej in enumerate(e):
            prod *= _strict_factor(H[j], t[j], s[j], ej)
        total += prod
    scale = max(math.prod(tk**(2 * h) for h, tk in zip(H, t)),
                math.prod(sk**(2 * h) for h, sk in zip(H, s)), 1.0)
    if abs(total.imag) > imag_tol * scale:
        raise WeightValidationError(
            [f"covariance has non-vanishing imaginary part {total.imag:g}"])
    return total.real


def cov_strict_2d(h1: float, h2: float, gamma: float, s, t) -> float:
    """Two-dimensional strictly-stationary-increment covariance.

    Dispatches on which Hurst components equal 1/2 and evaluates the
    corresponding closed form directly (product of symmetric brackets plus
    gamma times the product of the skew brackets, with min/log brackets
    replacing power brackets at H = 1/2).
    """
    (h1, h2) = validate_hurst((h1, h2))
    if not -1.0 <= gamma <= 1.0:
        raise ValueError(f"coupling gamma must lie in [-1,1], got {gamma!r}")
    s = _as_point(s, 2)
    t = _as_point(t, 2)
    if h1 != 0.5 and h2 != 0.5:
        sym = _sym_bracket(h1, t[0], s[0]) * _sym_bracket(h2, t[1], s[1])
        skew = (math.tan(math.pi * h1) * _skew_bracket(h1, t[0], s[0])
                * math.tan(math.pi * h2) * _skew_bracket(h2, t[1], s[1]))
        return 0.25 * sym + 0.25 * gamma * skew
    if h1 == 0.5 and h2 == 0.5:
        return (min(t[0], s[0]) * min(t[1], s[1])
                + gamma / math.pi**2
                * _log_bracket(t[0], s[0]) * _log_bracket(t[1], s[1]))
    # exactly one component at 1/2; orient so it is the first
    if h1 == 0.5:
        (m_t, m_s), (p_t, p_s), hp = (t[0], s[0]), (t[1], s[1]), h2
    else:
        (m_t, m_s), (p_t, p_s), hp = (t[1], s[1]), (t[0], s[0]), h1
    return (0.5 * min(m_t, m_s) * _sym_bracket(hp, p_t, p_s)
            + gamma * math.tan(math.pi * hp) / (2 * math.pi)
            * _log_bracket(m_t, m_s) * _skew_bracket(hp, p_t, p_s))


def cov_mild_theta(h1: float, h2: float, theta: float, s, t) -> float:
    """Sheet covariance modulated by a separable mild-stationary correction.

    (1/4) prod_i (t^{2H}+s^{2H}-|t-s|^{2H}) times
    1 + (theta/4) prod_i (t_i^{2H}-s_i^{2H}) / max(s_i,t_i)^{2H}.
    """
    (h1, h2) = validate_hurst((h1, h2))
    _warn_theta(theta)
    s = _as_point(s, 2)
    t = _as_point(t, 2)
    base, corr = 0.25, 1.0
    for h, sk, tk in zip((h1, h2), s, t):
        m = max(sk, tk)
        if m == 0.0:
            return 0.0
        base *= _sym_bracket(h, tk, sk)
        corr *= (tk**(2 * h) - sk**(2 * h)) / m**(2 * h)
    return base * (1.0 + 0.25 * theta * corr)


def cov_y_half(theta: float, s, t) -> float:
    """Brownian-sheet covariance with the mild correction at H = (1/2, 1/2)."""
    _warn_theta(theta)
    s = _as_point(s, 2)
    t = _as_point(t, 2)
    mins = min(t[0], s[0]) * min(t[1], s[1])
    if mins == 0.0 and (max(t[0], s[0]) == 0.0 or max(t[1], s[1]) == 0.0):
        return 0.0
    corr = ((t[0] - s[0]) / max(t[0], s[0])) * ((t[1] - s[1]) / max(t[1], s[1]))
    return mins * (1.0 + 0.25 * theta * corr)


def cov_z_half(gamma: float, s, t) -> float:
    """Brownian-sheet covariance plus the log-bracket coupling at H = (1/2, 1/2)."""
    if not -1.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [-1,1], got {gamma!r}")
    if gamma <= 0.0:
        warnings.warn(
            f"gamma={gamma:g} is outside (0,1], where dependence of disjoint "
            "increments is guaranteed positive", stacklevel=2)
    s = _as_point(s, 2)
    t = _as_point(t, 2)
    return (min(t[0], s[0]) * min(t[1], s[1])
            + gamma / math.pi**2
            * _log_bracket(t[0], s[0]) * _log_bracket(t[1], s[1]))


def _warn_theta(theta: float):
    if not -1.0 <= theta <= 1.0:
        warnings.warn(
            f"theta={theta:g} outside [-1,1]: positive semidefiniteness is not "
            "guaranteed, run the numerical eigenvalue check", stacklevel=3)


# --------------------------------------------------------------------------
# Field specifications
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FBS:
    """Fractional Brownian sheet with Hurst vector H."""

    H: tuple

    family = "fbs"

    def __post_init__(self):
        object.__setattr__(self, "H", validate_hurst(self.H))

    @property
    def hurst(self):
        return self.H

    @property
    def claimed_class(self):
        return StationarityClass.STRICT_WIDE


@dataclass(frozen=True)
class StrictGeneral:
    """General strictly-stationary-increment mixture with explicit weights."""

    H: tuple
    weights: StrictWeights

    family = "strict"

    def __post_init__(self):
        object.__setattr__(self, "H", validate_hurst(self.H))
        if self.weights.n != len(self.H):
            raise ValueError("weights dimension does not match Hurst vector")

    @property
    def hurst(self):
        return self.H

    @property
    def claimed_class(self):
        return StationarityClass.STRICT_WIDE


@dataclass(frozen=True)
class Strict2D:
    """Two-dimensional strict family parameterized by coupling gamma."""

    h1: float
    h2: float
    gamma: float

    family = "strict2d"

    def __post_init__(self):
        validate_hurst((self.h1, self.h2))
        if not -1.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [-1,1], got {self.gamma!r}")

    @property
    def hurst(self):
        return (self.h1, self.h2)

    @property
    def claimed_class(self):
        return StationarityClass.STRICT_WIDE


@dataclass(frozen=True)
class MildTheta:
    """Mild-stationary family with separable correction strength theta."""

    h1: float
    h2: float
    theta: float

    family = "mildtheta"

    def __post_init__(self):
        validate_hurst((self.h1, self.h2))

    @property
    def hurst(self):
        return (self.h1, self.h2)

    @property
    def claimed_class(self):
        if self.theta == 0.0:
            return StationarityClass.STRICT_WIDE
        return StationarityClass.MILD_ONLY


@dataclass(frozen=True)
class YHalf:
    """Mild family at H = (1/2, 1/2)."""

    theta: float

    family = "yhalf"

    @property
    def hurst(self):
        return (0.5, 0.5)

    @property
    def claimed_class(self):
        if self.theta == 0.0:
            return StationarityClass.STRICT_WIDE
        return StationarityClass.MILD_ONLY


@dataclass(frozen=True)
class ZHalf:
    """Strict family at H = (1/2, 1/2) with log-bracket coupling gamma."""

    gamma: float

    family = "zhalf"

    def __post_init__(self):
        if not -1.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [-1,1], got {self.gamma!r}")

    @property
    def hurst(self):
        return (0.5, 0.5)

    @property
    def claimed_class(self):
        return StationarityClass.STRICT_WIDE


def moving_constraint_residual(h1, h2, d0, d1) -> float:
    """Residual of the moving-average normalization constraint.

    d0^2 + 2 d0 d1 sin(pi H1) sin(pi H2) + d1^2 - 1 away from H = 1/2;
    at H1 = H2 = 1/2 the kernels are orthogonal and the constraint is
    d0^2 + d1^2 - 1.
    """
    if h1 == 0.5 and h2 == 0.5:
        return d0 * d0 + d1 * d1 - 1.0
    return (d0 * d0 + 2.0 * d0 * d1 * math.sin(math.pi * h1)
            * math.sin(math.pi * h2) + d1 * d1 - 1.0)


@dataclass(frozen=True)
class MovingPair:
    """Two-sided moving-average pair (d0: causal part, d1: anticausal part).

    No closed-form covariance; evaluation happens through quadrature of the
    kernel inner products (see :mod:`rectfield.movingavg`).  Requires both
    Hurst components away from 1/2, or both exactly 1/2.
    """

    h1: float
    h2: float
    d0: float
    d1: float

    family = "movingpair"

    def __post_init__(self):
        validate_hurst((self.h1, self.h2))
        half = (self.h1 == 0.5, self.h2 == 0.5)
        if any(half) and not all(half):
            raise ValueError(
                "MovingPair needs both Hurst components at 1/2 or neither")
        res = moving_constraint_residual(self.h1, self.h2, self.d0, self.d1)
        if abs(res) > 1e-12:
            raise ValueError(
                f"(d0, d1) violate the normalization constraint: residual {res:g}")

    @property
    def hurst(self):
        return (self.h1, self.h2)

    @property
    def claimed_class(self):
        return StationarityClass.STRICT_WIDE


FieldSpec = Union[FBS, StrictGeneral, Strict2D, MildTheta, YHalf, ZHalf, MovingPair]


# --------------------------------------------------------------------------
# Kernel objects
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CovKernel:
    """An evaluable covariance with its family metadata."""

    spec: FieldSpec
    claimed_class: StationarityClass
    evaluate: Callable[..., float]

    def __call__(self, s, t) -> float:
        return self.evaluate(s, t)

    @property
    def hurst(self):
        return self.spec.hurst

    @property
    def n(self) -> int:
        return len(self.spec.hurst)


def make_kernel(spec: FieldSpec) -> CovKernel:
    """Build the evaluable covariance kernel for a field specification."""
    if isinstance(spec, FBS):
        ev = lambda s, t: cov_fbs(spec.H, s, t)
    elif isinstance(spec, StrictGeneral):
        ev = lambda s, t: cov_strict_general(spec.H, spec.weights, s, t)
    elif isinstance(spec, Strict2D):
        ev = lambda s, t: cov_strict_2d(spec.h1, spec.h2, spec.gamma, s, t)
    elif isinstance(spec, MildTheta):
        ev = lambda s, t: cov_mild_theta(spec.h1, spec.h2, spec.theta, s, t)
    elif isinstance(spec, YHalf):
        ev = lambda s, t: cov_y_half(spec.theta, s, t)
    elif isinstance(spec, ZHalf):
        ev = lambda s, t: cov_z_half(spec.gamma, s, t)
    elif isinstance(spec, MovingPair):
        from . import movingavg  # deferred: movingavg depends on this module
        ev = lambda s, t: movingavg.cov_moving_pair(spec, s, t)
    else:
        raise TypeError(f"unknown field specification {type(spec).__name__}")
    return CovKernel(spec=spec, claimed_class=spec.claimed_class, evaluate=ev)
