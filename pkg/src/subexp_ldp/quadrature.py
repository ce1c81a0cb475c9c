"""Adaptive quadrature wrappers.

QUADPACK (via ``scipy.integrate.quad``) does the per-panel work; this module
adds the panel splitting needed for integrands with an integrable spike at
zero and a slowly decaying exponential tail.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

from .errors import QuadratureFailure

EPSABS = 1e-10
EPSREL = 1e-9
# Truncation: the log-integrand must drop this far below the running total.
_TAIL_DROP = math.log(1e-16)


def integrate_interval(f, a, b, epsabs=EPSABS, epsrel=EPSREL, limit=200):
    """Integral of ``f`` over [a, b] with a failure check on the error estimate."""
    if b <= a:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err, info = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel,
                                          limit=limit, full_output=1)[:3]
    if not math.isfinite(value):
        raise QuadratureFailure(f"non-finite integral on [{a}, {b}]")
    if err > 50.0 * max(epsabs, epsrel * abs(value)):
        raise QuadratureFailure(
            f"quadrature on [{a}, {b}] stalled: value={value:.6g} error={err:.3g}"
        )
    return value


def integrate_split(f, a, b, epsabs=EPSABS, epsrel=EPSREL):
    """Integral over [a, b], splitting at 0 to isolate a possible singularity there."""
    if a < 0.0 < b:
        return (integrate_interval(f, a, 0.0, epsabs, epsrel)
                + integrate_interval(f, 0.0, b, epsabs, epsrel))
    return integrate_interval(f, a, b, epsabs, epsrel)


def half_line_panels(log_envelope, cap, first=1.0):
    """Panel edges 0 < first < 2*first < ... covering the mass of exp(log_envelope).

    Stops once the envelope, times the current panel edge, has fallen 16 decades
    below the largest value seen.  Raises QuadratureFailure when ``cap`` is reached
    first, which signals a tail too heavy to truncate (eta at or past xi).
    """
    edges = [0.0]
    b = first
    peak = -math.inf
    while True:
        edges.append(b)
        lv = float(log_envelope(b))
        peak = max(peak, lv + math.log(b))
        if lv + math.log(b) < peak + _TAIL_DROP and b > 4 * first:
            return edges
        if b >= cap:
            raise QuadratureFailure(
                f"integrand tail has not decayed below 1e-16 by the cap {cap:.3g}"
            )
        b = min(2.0 * b, cap)


def integrate_panels(f, edges, epsabs=1e-14, epsrel=1e-11):
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate_interval(f, a, b, epsabs=epsabs, epsrel=epsrel)
    return total


def gauss_legendre_masses(log_f, knots, order=16):
    """Integrals of exp(log_f) over consecutive knot intervals (vectorised)."""
    x, w = np.polynomial.legendre.leggauss(order)
    a = knots[:-1, None]
    b = knots[1:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (b + a)
    with np.errstate(over="ignore", under="ignore"):
        vals = np.exp(log_f(nodes))
    return 0.5 * (b[:, 0] - a[:, 0]) * (vals @ w)
