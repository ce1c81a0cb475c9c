"""Convex analysis of a free energy: inverse slope, Legendre transform, rate function."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceFailure
from .scaling import ScalingExponent

__all__ = [
    "LegendrePoint",
    "RateFunction",
    "SlopeReport",
    "inverse_lambda_prime",
    "legendre",
    "legendre_second",
    "asymptotic_slope",
    "rate_function",
]

MAX_ITER = 200


def inverse_lambda_prime(model, m, rtol=1e-12, max_iter=MAX_ITER):
    """Solve lambda'(eta) = m for eta in (-xi, xi).

    lambda' is odd and strictly increasing, so the search runs on |m| with a
    bracket [0, xi(1 - 2^-k)] grown until it contains the root, then tightened
    by Illinois-modified false position with bisection as a safeguard.
    """
    m = float(m)
    if m == 0.0:
        return 0.0
    target = abs(m)
    f = model.lam_prime
    xi = model.xi
    lo, f_lo = 0.0, -target
    hi = None
    iters = 0
    k = 1
    while hi is None:
        if iters >= max_iter:
            raise ConvergenceFailure(f"could not bracket lambda'(eta) = {target!r}")
        cand = xi * (1.0 - 2.0 ** -k) if math.isfinite(xi) else 2.0 ** (k - 1)
        if math.isfinite(xi) and cand >= xi:
            raise ConvergenceFailure(
                f"lambda' stays below {target!r} up to the last float before xi={xi!r}"
            )
        val = f(cand) - target
        iters += 1
        if val >= 0.0:
            hi, f_hi = cand, val
        else:
            lo, f_lo = cand, val
        k += 1
        if val == 0.0:
            return math.copysign(cand, m)

    side = 0
    since_halving = 0
    width = hi - lo
    while iters < max_iter:
        if f_hi - f_lo > 0:
            x = hi - f_hi * (hi - lo) / (f_hi - f_lo)
        else:
            x = 0.5 * (lo + hi)
        if not lo < x < hi or since_halving >= 3:
            x = 0.5 * (lo + hi)
            since_halving = 0
        val = f(x) - target
        iters += 1
        if abs(val) <= rtol * target:
            return math.copysign(x, m)
        if val < 0.0:
            lo, f_lo = x, val
            if side == -1:
                f_hi *= 0.5
            side = -1
        else:
            hi, f_hi = x, val
            if side == 1:
                f_lo *= 0.5
            side = 1
        if hi - lo <= 0.5 * width:
            width = hi - lo
            since_halving = 0
        else:
            since_halving += 1
        if hi - lo <= 2.0 * math.ulp(hi):
            return math.copysign(lo if -f_lo < f_hi else hi, m)
    raise ConvergenceFailure(f"root search for lambda'(eta) = {target!r} hit {max_iter} iterations")


class LegendrePoint(NamedTuple):
    x: float
    value: float
    maximizer: float


def legendre(model, x) -> LegendrePoint:
    """J(x) = sup_eta {eta x - lambda(eta)}, attained where lambda'(eta) = x."""
    x = float(x)
    eta = inverse_lambda_prime(model, x)
    value = eta * x - model.lam(eta)
    return LegendrePoint(x, max(value, 0.0), eta)


def legendre_second(model, b) -> float:
    """J''(b) = 1 / lambda''((lambda')^{-1}(b))."""
    eta = inverse_lambda_prime(model, b)
    return 1.0 / model.lam_second(eta)


class SlopeReport(NamedTuple):
    slope: float
    ratios: tuple
    nondecreasing: bool


def asymptotic_slope(model, m_grid) -> SlopeReport:
    """J(m)/m at the largest grid point, plus the whole ratio sequence.

    The ratio increases to xi; no extrapolation is attempted.
    """
    grid = np.asarray(m_grid, dtype=float)
    if grid.size < 2 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("m_grid must be an increasing sequence of positive reals")
    ratios = tuple(legendre(model, m).value / m for m in grid)
    mono = all(b >= a - 1e-12 for a, b in zip(ratios[:-1], ratios[1:]))
    return SlopeReport(ratios[-1], ratios, mono)


@dataclass(frozen=True)
class RateFunction:
    """I(x) = xi |x|^alpha."""

    xi: float
    alpha: float

    def __call__(self, x):
        out = self.xi * np.abs(np.asarray(x, dtype=float)) ** self.alpha
        return float(out) if np.ndim(x) == 0 else out


def rate_function(xi, alpha) -> RateFunction:
    xi = float(xi)
    if not (math.isfinite(xi) and xi > 0):
        raise ValueError(f"xi must be finite and positive, got {xi!r}")
    return RateFunction(xi, float(ScalingExponent(alpha)))
