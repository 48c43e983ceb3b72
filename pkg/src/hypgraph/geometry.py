"""Hyperbolic-plane computations for the native disk representation.

Points are stored by their distance to the boundary circle, ``t = R - r``.
All array functions broadcast and are safe for radii up to a few hundred
length units; large hyperbolic cosines are handled in the log domain.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

TWO_PI = 2.0 * math.pi
EDGE_TOL = 1e-9
CLAMP_TOL = 1e-12
_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class PolarPoint:
    """A point of the disk as (t, theta); theta is reduced into [0, 2*pi)."""

    t: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.theta)):
            raise DomainError(f"non-finite coordinates ({self.t}, {self.theta})")
        if self.t < 0:
            raise DomainError(f"t must be >= 0, got {self.t}")
        object.__setattr__(self, "theta", reduce_angle(self.theta))

    def radius(self, R: float) -> float:
        return R - self.t


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the Poissonized model; ``R`` is always derived."""

    alpha: float
    nu: float
    n: float
    seed: int = 0

    def __post_init__(self):
        for name in ("alpha", "nu", "n"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v}")
        if self.alpha <= 0.5:
            raise ParameterError(f"alpha must exceed 1/2, got {self.alpha}")
        if self.nu <= 0 or self.n <= 0:
            raise ParameterError("nu and n must be positive")
        if self.R <= 0:
            raise ParameterError(f"R = 2 log(n/nu) must be > 0 (n={self.n}, nu={self.nu})")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError("seed must fit in 64 unsigned bits")
        if self.alpha <= 1:
            warnings.warn(
                f"alpha={self.alpha} is not subcritical; layer and cover analyses will refuse it",
                stacklevel=2,
            )

    @property
    def R(self) -> float:
        return 2.0 * math.log(self.n / self.nu)

    @property
    def t_max(self) -> float:
        return self.R / (2.0 * self.alpha)

    def require_subcritical(self):
        if self.alpha <= 1:
            raise DomainError(f"analysis requires alpha > 1, got {self.alpha}")

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "nu": self.nu, "n": self.n, "R": self.R, "seed": int(self.seed)}


def reduce_angle(theta):
    """Reduce angles into [0, 2*pi), guarding the rounding case that lands on 2*pi."""
    out = np.mod(theta, TWO_PI)
    out = np.where(out >= TWO_PI, 0.0, out)
    if np.ndim(out) == 0:
        return float(out)
    return out


def circular_distance(a, b):
    d = np.abs(np.mod(np.asarray(a, dtype=float) - b, TWO_PI))
    return np.minimum(d, TWO_PI - d)


def log_sinh(x):
    """log(sinh(x)) for x >= 0 without overflow; -inf at 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return x + np.log(-np.expm1(-2.0 * x)) - _LOG2


def _asinh_exp(lx):
    # asinh(exp(lx)) evaluated stably for any lx
    lx = np.asarray(lx, dtype=float)
    big = lx > 0
    safe_big = np.where(big, lx, 0.0)
    safe_small = np.where(big, 0.0, lx)
    return np.where(
        big,
        safe_big + np.log1p(np.sqrt(1.0 + np.exp(-2.0 * safe_big))),
        np.arcsinh(np.exp(safe_small)),
    )


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DomainError("non-finite coordinate in input")


def distance_from_radii(r1, r2, dtheta):
    """Hyperbolic distance between points at radii r1, r2 separated by angle dtheta.

    Uses ``sinh^2(d/2) = sinh^2((r1-r2)/2) + sinh r1 sinh r2 sin^2(dtheta/2)``,
    which is the cosine law rewritten without cancellation, and evaluates it in
    the log domain.
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    dtheta = np.asarray(dtheta, dtype=float)
    with np.errstate(divide="ignore"):
        a = 2.0 * log_sinh(np.abs(r1 - r2) / 2.0)
        b = log_sinh(r1) + log_sinh(r2) + 2.0 * np.log(np.abs(np.sin(dtheta / 2.0)))
    log_q = np.logaddexp(a, b)
    d = 2.0 * _asinh_exp(log_q / 2.0)
    return np.where(np.isneginf(log_q), 0.0, d)


def distance_arrays(t1, theta1, t2, theta2, R):
    """Vectorized distance between points given as (t, theta) arrays."""
    _check_finite(t1, theta1, t2, theta2)
    return distance_from_radii(R - np.asarray(t1, dtype=float), R - np.asarray(t2, dtype=float),
                               np.asarray(theta1, dtype=float) - theta2)


def hyperbolic_distance(u: PolarPoint, v: PolarPoint, R: float) -> float:
    _check_finite(u.t, u.theta, v.t, v.theta, R)
    if R <= 0:
        raise DomainError(f"R must be positive, got {R}")
    return float(distance_arrays(u.t, u.theta, v.t, v.theta, R))


def within_radius(t1, theta1, t2, theta2, R, tol=EDGE_TOL):
    """Edge predicate: distance at most R (closed, with absolute tolerance)."""
    return distance_arrays(t1, theta1, t2, theta2, R) <= R + tol


def connection_angle_exact(d1, d2, R):
    """Largest angle at which points at origin-distances d1, d2 are within distance R.

    A point at the origin (d = 0) connects to anything at distance <= R, so the
    angle is pi there. Works elementwise on arrays.
    """
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    _check_finite(d1, d2, R)
    if np.any(d1 < 0) or np.any(d2 < 0):
        raise DomainError("radii must be non-negative")
    delta = np.abs(d1 - d2)
    lsR = log_sinh(R / 2.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.exp(2.0 * (log_sinh(delta / 2.0) - lsR))
        log_num = 2.0 * lsR + np.log1p(-np.minimum(ratio, 1.0))
        log_den = log_sinh(d1) + log_sinh(d2)
        x = np.exp(log_num - log_den)
    x = np.where(np.isneginf(log_den), np.inf, x)
    x = np.where(delta > R, 0.0, x)
    # rounding noise near the domain edges
    x = np.where((x < 0) & (x > -CLAMP_TOL), 0.0, x)
    theta = 2.0 * np.arcsin(np.sqrt(np.clip(x, 0.0, 1.0)))
    if theta.ndim == 0:
        return float(theta)
    return theta


def connection_angle_approx(t1, t2, R):
    """Leading-order connection angle ``2 exp(-(R - t1 - t2)/2)``.

    Only the zone and cover constructions use this; edges always use the exact
    rule.
    """
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if np.any(t1 < 0) or np.any(t2 < 0):
        raise DomainError("t values must be non-negative")
    if np.any(t1 + t2 > R):
        raise DomainError("approximation needs t1 + t2 <= R")
    out = 2.0 * np.exp(-(R - t1 - t2) / 2.0)
    if out.ndim == 0:
        return float(out)
    return out


def ball_measure(rho, params: ModelParams, approx: bool = False):
    """Probability mass of the origin-centred ball of radius rho under the radial law.

    The exact value is ``(cosh(alpha rho) - 1) / (cosh(alpha R) - 1)``; with
    ``approx=True`` the leading asymptotic ``exp(-alpha (R - rho))`` is returned.
    """
    R = params.R
    a = params.alpha
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(rho > R):
        raise DomainError(f"rho must lie in [0, R={R}]")
    if approx:
        out = np.exp(-a * (R - rho))
    else:
        with np.errstate(divide="ignore"):
            out = np.exp(2.0 * (log_sinh(a * rho / 2.0) - log_sinh(a * R / 2.0)))
    if out.ndim == 0:
        return float(out)
    return out


def annulus_measure(t_lo, t_hi, params: ModelParams):
    """Probability mass of {t_lo <= t < t_hi}."""
    R = params.R
    return ball_measure(R - np.asarray(t_lo, dtype=float), params) - ball_measure(
        R - np.asarray(t_hi, dtype=float), params
    )


def radial_cdf(r, params: ModelParams):
    """CDF of the radius; equal to the ball measure."""
    return ball_measure(np.clip(r, 0.0, params.R), params)
