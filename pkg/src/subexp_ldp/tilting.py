"""Single-variable subexponential tilt mu_eta(dy) = exp(eta phi_alpha(y) - lambda(eta)) mu(dy).

Samplers work in the scaled coordinate u = phi_alpha(y), where the tilt is an
ordinary exponential tilt.  For the exponential, Gaussian and symmetrized
Gamma power laws the tilted scaled variable is a two-sided mixture with
closed-form pieces; other laws go through a tabulated inverse CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .convex import inverse_lambda_prime
from .errors import DomainError, GenericSamplerFailure
from .quadrature import gauss_legendre_masses, integrate_interval
from .scaling import (
    PowerOf,
    ScalingExponent,
    StandardGaussian,
    SymmetrizedGamma,
    TwoSidedExponential,
    phi,
)

__all__ = ["TiltedLaw", "tilted_law", "optimal_tilt", "sample_tilted", "log_weight"]

_KNOTS = 4096
_MASS_DROP = 40.0  # log-density drop (relative to the peak) that ends the table


def _exact_kind(base, alpha):
    if not isinstance(base, PowerOf):
        return None
    b, p = base.base, base.p
    if isinstance(b, (TwoSidedExponential, SymmetrizedGamma)) and math.isclose(alpha * p, 1.0, rel_tol=1e-12):
        return "gamma"
    if isinstance(b, StandardGaussian) and math.isclose(alpha * p, 2.0, rel_tol=1e-12):
        return "gauss"
    return None


class _InverseCdfTable:
    """Inverse CDF of a density exp(logh(u)) on the real line.

    Knots cover the region where logh is within ``_MASS_DROP`` of its peak,
    with extra knots packed around 0 (where scaled densities can blow up).
    The tails beyond the table are completed by exponentials whose rates are
    fitted to logh at the last knots.
    """

    def __init__(self, logh):
        probe = np.concatenate([-np.geomspace(1e6, 1e-6, 1200), np.geomspace(1e-6, 1e6, 1200)])
        with np.errstate(all="ignore"):
            lp = logh(probe)
        lp = np.where(np.isfinite(lp) & (np.abs(probe) > 1e-4), lp, -np.inf)
        peak = float(np.max(lp))
        if not math.isfinite(peak):
            raise GenericSamplerFailure("tilted density vanishes on the probe grid")
        keep = np.nonzero(lp >= peak - _MASS_DROP)[0]
        lo_i = max(keep[0] - 1, 0)
        hi_i = min(keep[-1] + 1, probe.size - 1)
        u_lo, u_hi = float(probe[lo_i]), float(probe[hi_i])
        if u_lo >= 0 or u_hi <= 0:
            raise GenericSamplerFailure("tilted mass is not bracketed around zero")
        width = u_hi - u_lo
        near0 = np.geomspace(width * 1e-10, width / _KNOTS, 128)
        knots = np.unique(np.concatenate([
            np.linspace(u_lo, u_hi, _KNOTS - 2 * near0.size), -near0, near0, [0.0],
        ]))

        def shifted(u):
            with np.errstate(all="ignore"):
                return logh(u) - peak

        masses = gauss_legendre_masses(shifted, knots)
        # intervals touching 0 may hold an integrable spike: use adaptive quadrature there
        zi = int(np.searchsorted(knots, 0.0))
        for j in (zi - 1, zi):
            a, b = knots[j], knots[j + 1]
            masses[j] = integrate_interval(lambda t: math.exp(float(shifted(t))), a, b,
                                           epsabs=1e-15, epsrel=1e-10)
        if np.any(~np.isfinite(masses)) or np.any(masses < 0):
            raise GenericSamplerFailure("non-finite mass in inverse-CDF table")

        self.rate_lo = self._edge_rate(shifted, u_lo, +1.0, width)
        self.rate_hi = self._edge_rate(shifted, u_hi, -1.0, width)
        tail_lo = math.exp(float(shifted(u_lo))) / self.rate_lo
        tail_hi = math.exp(float(shifted(u_hi))) / self.rate_hi
        cum = np.concatenate([[0.0], np.cumsum(masses)]) + tail_lo
        total = cum[-1] + tail_hi
        cdf = cum / total
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        self.knots = knots[keep]
        self.cdf = cdf[keep]
        self.u_lo, self.u_hi = float(self.knots[0]), float(self.knots[-1])
        self.p_lo, self.p_hi = float(self.cdf[0]), float(1.0 - self.cdf[-1])
        self.log_total = peak + math.log(total)
        self._interp = PchipInterpolator(self.cdf, self.knots, extrapolate=False)

    @staticmethod
    def _edge_rate(shifted, u, direction, width):
        step = width * 1e-3
        rate = (float(shifted(u + direction * step)) - float(shifted(u))) / step
        if not rate > 0:
            raise GenericSamplerFailure(f"tilted density does not decay beyond u={u:.6g}")
        return rate

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        out = np.empty_like(v)
        low = v < self.cdf[0]
        high = v > self.cdf[-1]
        mid = ~(low | high)
        out[mid] = self._interp(v[mid])
        out[low] = self.u_lo + np.log(v[low] / self.p_lo) / self.rate_lo
        out[high] = self.u_hi - np.log((1.0 - v[high]) / self.p_hi) / self.rate_hi
        if not np.all(np.isfinite(out)):
            raise GenericSamplerFailure("uniform draw fell outside the inverse-CDF table")
        return out


@dataclass(frozen=True)
class TiltedLaw:
    """Law of X_eta: the base law reweighted by exp(eta phi_alpha(y) - lambda(eta))."""

    base: object
    alpha: float
    eta: float
    log_normalizer: float
    _table: object = field(default=None, repr=False, compare=False)

    @property
    def exact(self):
        return _exact_kind(self.base, self.alpha) is not None

    def log_density(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            return self.eta * phi(self.alpha, y) - self.log_normalizer + self.base.logpdf(y)

    def density(self, y):
        with np.errstate(all="ignore"):
            out = np.exp(self.log_density(y))
        return float(out) if np.ndim(y) == 0 else out

    def sample_scaled(self, rng, size):
        """Draws (x, u) with u = phi_alpha(x); u is exact, not recomputed from x."""
        kind = None if self._table is not None else _exact_kind(self.base, self.alpha)
        eta = self.eta
        if kind == "gamma":
            b = self.base.base
            k = b.shape if isinstance(b, SymmetrizedGamma) else 1.0
            # side weights proportional to (1 -+ eta)^{-k}, in log space
            la, lb = -k * math.log1p(-eta), -k * math.log1p(eta)
            w_pos = 1.0 / (1.0 + math.exp(lb - la))
            pos = rng.random(size) < w_pos
            g = rng.standard_gamma(k, size) if k != 1.0 else rng.standard_exponential(size)
            u = np.where(pos, g / (1.0 - eta), -g / (1.0 + eta))
            return phi(self.base.p, u), u
        if kind == "gauss":
            la, lb = -0.5 * math.log1p(-2.0 * eta), -0.5 * math.log1p(2.0 * eta)
            w_pos = 1.0 / (1.0 + math.exp(lb - la))
            pos = rng.random(size) < w_pos
            h = np.abs(rng.standard_normal(size))
            g = np.where(pos, h / math.sqrt(1.0 - 2.0 * eta), -h / math.sqrt(1.0 + 2.0 * eta))
            return phi(self.base.p, g), g * np.abs(g)
        if self._table is None:
            raise GenericSamplerFailure("no inverse-CDF table attached to this tilted law")
        u = self._table(rng.random(size) + 2.0 ** -54)
        return phi(1.0 / self.alpha, u), u

    def sample(self, rng, size):
        return self.sample_scaled(rng, size)[0]


def _scaled_log_density(base, alpha):
    inv = 1.0 / alpha
    log_jac = math.log(inv)

    def logg(u):
        u = np.asarray(u, dtype=float)
        a = np.abs(u)
        with np.errstate(all="ignore"):
            return np.asarray(base.logpdf(phi(inv, u)), dtype=float) + log_jac + (inv - 1.0) * np.log(a)

    return logg


def tilted_law(dist, model, eta, generic=False) -> TiltedLaw:
    """Tilted law of ``dist`` whose normaliser comes from the paired free energy.

    ``generic=True`` forces the tabulated inverse-CDF sampler even when a
    closed-form sampler exists (used to cross-check the two).
    """
    eta = float(eta)
    if not abs(eta) < model.xi:
        raise DomainError(f"eta={eta!r} outside (-xi, xi) with xi={model.xi!r}")
    alpha = float(ScalingExponent(model.alpha))
    lam = model.lam(eta)
    table = None
    if generic or _exact_kind(dist, alpha) is None:
        logg = _scaled_log_density(dist, alpha)
        table = _InverseCdfTable(lambda u: eta * u + logg(u))
    return TiltedLaw(dist, alpha, eta, lam, table)


def optimal_tilt(model, n, x) -> float:
    """eta_n = (lambda')^{-1}((n x)^alpha), which makes phi_alpha(X_eta) average (n x)^alpha."""
    if n < 1 or not x > 0:
        raise ValueError("need n >= 1 and x > 0")
    return inverse_lambda_prime(model, (n * float(x)) ** float(model.alpha))


def sample_tilted(law: TiltedLaw, rng_stream, size=None):
    if size is None:
        return float(law.sample(rng_stream, 1)[0])
    return law.sample(rng_stream, size)


def log_weight(law: TiltedLaw, y):
    """log d(mu)/d(mu_eta) at y, i.e. -eta phi_alpha(y) + lambda(eta)."""
    out = -law.eta * np.asarray(phi(law.alpha, y)) + law.log_normalizer
    return float(out) if np.ndim(y) == 0 else out
