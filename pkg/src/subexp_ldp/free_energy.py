"""Scaled free energies lambda(eta) = log E[exp(eta * phi_alpha(X))].

Analytic models cover the two worked examples (and symmetrized Gamma powers);
:func:`numeric_model` handles any symmetric law with a log-density by
quadrature in the scaled coordinate u = phi_alpha(x).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, QuadratureFailure, UndefinedAtZero
from .quadrature import half_line_panels, integrate_panels
from .scaling import (
    PowerOf,
    ScalingExponent,
    StandardGaussian,
    SymmetrizedGamma,
    TwoSidedExponential,
    power_transform,
)

__all__ = [
    "FreeEnergyModel",
    "CallableModel",
    "ExpPowerModel",
    "GaussPowerModel",
    "SymGammaPowerModel",
    "NumericModel",
    "exp_power_model",
    "gauss_power_model",
    "sym_gamma_power_model",
    "numeric_model",
    "relative_variance",
]

_LOG2 = math.log(2.0)


def _out(values, like):
    return float(values) if np.ndim(like) == 0 else values


class FreeEnergyModel:
    """Base class: domain bookkeeping and the public evaluators.

    Subclasses implement ``_lam``, ``_lam_prime`` and ``_lam_second`` on
    float arrays already known to lie inside (-xi, xi).
    """

    name = "free-energy"

    def __init__(self, alpha, xi, dist=None):
        self._alpha = ScalingExponent(alpha)
        self._xi = float(xi)
        if not self._xi >= 0:
            raise ValueError(f"xi must be non-negative, got {xi!r}")
        self._dist = dist

    @property
    def alpha(self):
        return self._alpha

    @property
    def xi(self):
        return self._xi

    @property
    def dist(self):
        """The law this free energy was built from, when known."""
        return self._dist

    def in_domain(self, eta):
        return bool(np.all(np.abs(np.asarray(eta, dtype=float)) < self._xi))

    def _checked(self, eta):
        arr = np.asarray(eta, dtype=float)
        if not np.all(np.abs(arr) < self._xi):
            bad = arr[np.abs(arr) >= self._xi] if arr.ndim else arr
            raise DomainError(
                f"eta={np.ravel(bad)[0]!r} is outside the open domain (-xi, xi) with xi={self._xi!r}"
            )
        return arr

    def lam(self, eta):
        arr = self._checked(eta)
        return _out(self._lam(arr), eta)

    def lam_prime(self, eta):
        arr = self._checked(eta)
        return _out(self._lam_prime(arr), eta)

    def lam_second(self, eta):
        arr = self._checked(eta)
        return _out(self._lam_second(arr), eta)

    def relative_variance(self, eta):
        return relative_variance(self, eta)

    def __repr__(self):
        return f"{type(self).__name__}(alpha={float(self.alpha)!r}, xi={self.xi!r})"


class CallableModel(FreeEnergyModel):
    """Free energy given by user callables (used for synthetic fixtures)."""

    def __init__(self, alpha, xi, lam, lam_prime, lam_second, name="callable", dist=None):
        super().__init__(alpha, xi, dist)
        self._f = (lam, lam_prime, lam_second)
        self.name = name

    def _lam(self, eta):
        return np.asarray(self._f[0](eta), dtype=float)

    def _lam_prime(self, eta):
        return np.asarray(self._f[1](eta), dtype=float)

    def _lam_second(self, eta):
        return np.asarray(self._f[2](eta), dtype=float)


class ExpPowerModel(FreeEnergyModel):
    """X = phi_p(Y) with Y two-sided exponential, alpha = 1/p, lambda = -log(1 - eta^2)."""

    name = "exp-power"

    def __init__(self, p):
        if not p > 1:
            raise ValueError(f"exp-power model needs p > 1, got {p!r}")
        self.p = float(p)
        super().__init__(1.0 / self.p, 1.0, power_transform(TwoSidedExponential(), self.p))

    def _lam(self, eta):
        return -np.log1p(-eta * eta)

    def _lam_prime(self, eta):
        return 2.0 * eta / (1.0 - eta * eta)

    def _lam_second(self, eta):
        q = 1.0 - eta * eta
        return 2.0 * (1.0 + eta * eta) / (q * q)


class GaussPowerModel(FreeEnergyModel):
    """Z = phi_p(G) with G standard Gaussian, alpha = 2/p.

    With f(eta) = (1+2eta)^{-1/2} + (1-2eta)^{-1/2}, lambda = log f - log 2.
    """

    name = "gauss-power"

    def __init__(self, p):
        if not p > 2:
            raise ValueError(f"gauss-power model needs p > 2, got {p!r}")
        self.p = float(p)
        super().__init__(2.0 / self.p, 0.5, power_transform(StandardGaussian(), self.p))

    @staticmethod
    def _f(eta):
        a = 1.0 + 2.0 * eta
        b = 1.0 - 2.0 * eta
        f0 = a ** -0.5 + b ** -0.5
        f1 = -(a ** -1.5) + b ** -1.5
        f2 = 3.0 * (a ** -2.5 + b ** -2.5)
        return f0, f1, f2

    def _lam(self, eta):
        f0, _, _ = self._f(eta)
        return np.log(f0) - _LOG2

    def _lam_prime(self, eta):
        f0, f1, _ = self._f(eta)
        return f1 / f0

    def _lam_second(self, eta):
        f0, f1, f2 = self._f(eta)
        r = f1 / f0
        return f2 / f0 - r * r


class SymGammaPowerModel(FreeEnergyModel):
    """X = phi_p(eps * Gamma(k)), alpha = 1/p.

    lambda = log(((1-eta)^{-k} + (1+eta)^{-k}) / 2); k = 1 is the exp-power model.
    """

    name = "sym-gamma"

    def __init__(self, p, shape):
        if not p > 1:
            raise ValueError(f"sym-gamma model needs p > 1, got {p!r}")
        if not shape > 0:
            raise ValueError(f"gamma shape must be positive, got {shape!r}")
        self.p = float(p)
        self.shape = float(shape)
        super().__init__(1.0 / self.p, 1.0, power_transform(SymmetrizedGamma(self.shape), self.p))

    def _parts(self, eta):
        k = self.shape
        lo = np.log1p(-eta)
        hi = np.log1p(eta)
        # normalised side weights: wa + wb = 1
        la, lb = -k * lo, -k * hi
        top = np.maximum(la, lb)
        ea, eb = np.exp(la - top), np.exp(lb - top)
        norm = ea + eb
        return top + np.log(norm) - _LOG2, ea / norm, eb / norm

    def _lam(self, eta):
        return self._parts(eta)[0]

    def _lam_prime(self, eta):
        _, wa, wb = self._parts(eta)
        return self.shape * (wa / (1.0 - eta) - wb / (1.0 + eta))

    def _lam_second(self, eta):
        _, wa, wb = self._parts(eta)
        k = self.shape
        m = k * (wa / (1.0 - eta) - wb / (1.0 + eta))
        second = k * (k + 1.0) * (wa / (1.0 - eta) ** 2 + wb / (1.0 + eta) ** 2)
        return second - m * m


class NumericModel(FreeEnergyModel):
    """Quadrature-backed free energy for an arbitrary symmetric law.

    Integrals are taken over u = phi_alpha(x) >= 0, folding the negative half
    by symmetry, so that lambda is exactly even.  The scaled density
    g(u) = f(u^{1/alpha}) u^{1/alpha - 1} / alpha is integrated in log space
    with a running shift so that large tilts do not overflow.
    """

    name = "numeric"

    def __init__(self, dist, alpha, xi=None, x_cap=1e8):
        alpha = ScalingExponent(alpha)
        self.x_cap = float(x_cap)
        self.u_cap = float(self.x_cap ** float(alpha))
        self._inv = 1.0 / float(alpha)
        self._log_jac = math.log(self._inv)
        self._cache = {}
        super().__init__(alpha, 0.0, dist)
        if xi is None:
            xi = self._estimate_xi()
        self._xi = float(xi)

    def log_scaled_density(self, u):
        """log density of phi_alpha(X) at u (u > 0 for meaningful values)."""
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (np.asarray(self._dist.logpdf(u ** self._inv), dtype=float)
                   + self._log_jac + (self._inv - 1.0) * np.log(u))
        return out

    def _log_scaled_tail(self, u):
        if self._dist.has_closed_tail:
            return np.asarray(self._dist.log_tail(np.asarray(u, dtype=float) ** self._inv), dtype=float)
        return self.log_scaled_density(u)

    def _estimate_xi(self):
        # eta < xi iff exp(eta u) P(U >= u) decreases across the far window;
        # the switch point is the decay slope of the scaled tail there.
        cap = self.u_cap
        lt = self._log_scaled_tail(np.array([cap / 4.0, cap / 2.0, cap]))
        near = -(lt[1] - lt[0]) / (cap / 4.0)
        far = -(lt[2] - lt[1]) / (cap / 2.0)
        if not np.isfinite(far) or far <= 0.0:
            return 0.0
        if far > 1.05 * near:
            return math.inf
        if far < near / 1.05:
            return 0.0
        return float(far)

    def _moments(self, a):
        """(log Z, mean, variance) of phi_alpha(X) tilted by a >= 0."""
        hit = self._cache.get(a)
        if hit is not None:
            return hit
        L = self.log_scaled_density
        probe = np.geomspace(1e-3, self.u_cap, 256)
        shift = float(np.max(a * probe + L(probe)))
        if not math.isfinite(shift):
            raise QuadratureFailure("scaled density is not finite on the probe grid")

        def env(u):
            return a * u + float(L(u)) - shift

        edges = half_line_panels(env, self.u_cap)

        def plus(u):
            return math.exp(a * u + float(L(u)) - shift)

        def minus(u):
            return math.exp(-a * u + float(L(u)) - shift)

        z = integrate_panels(lambda u: plus(u) + minus(u), edges)
        m = integrate_panels(lambda u: u * (plus(u) - minus(u)), edges) / z
        v = integrate_panels(
            lambda u: (u - m) ** 2 * plus(u) + (u + m) ** 2 * minus(u), edges) / z
        out = (shift + math.log(z), m, v)
        self._cache[a] = out
        return out

    def _eval(self, eta, index):
        flat = np.atleast_1d(eta).astype(float)
        res = np.empty_like(flat)
        for i, e in enumerate(flat):
            mom = self._moments(abs(float(e)))
            val = mom[index]
            res[i] = -val if (index == 1 and e < 0) else val
        return res.reshape(np.shape(eta))

    def _lam(self, eta):
        return self._eval(eta, 0)

    def _lam_prime(self, eta):
        return self._eval(eta, 1)

    def _lam_second(self, eta):
        return self._eval(eta, 2)

    def tilted_mean(self, eta):
        """Mean of phi_alpha under the tilted law (identical to lam_prime here)."""
        return self.lam_prime(eta)


def exp_power_model(p: float) -> ExpPowerModel:
    return ExpPowerModel(p)


def gauss_power_model(p: float) -> GaussPowerModel:
    return GaussPowerModel(p)


def sym_gamma_power_model(p: float, shape: float) -> SymGammaPowerModel:
    return SymGammaPowerModel(p, shape)


def numeric_model(dist, alpha, xi=None, x_cap=1e8) -> NumericModel:
    """Free energy of ``dist`` at exponent ``alpha`` by quadrature.

    ``xi`` is estimated from the decay of the scaled tail unless given.
    """
    return NumericModel(dist, alpha, xi=xi, x_cap=x_cap)


def relative_variance(model: FreeEnergyModel, eta) -> float:
    """V(eta) = lambda''(eta) / lambda'(eta)**2 on 0 < |eta| < xi."""
    eta = float(eta)
    if eta == 0.0:
        raise UndefinedAtZero("relative variance is undefined at eta = 0 (lambda'(0) = 0)")
    d1 = model.lam_prime(eta)
    return model.lam_second(eta) / (d1 * d1)


def analytic_model_for(dist):
    """The closed-form free energy paired with ``dist`` at its natural exponent, if any."""
    if isinstance(dist, PowerOf):
        base, p = dist.base, dist.p
        if isinstance(base, TwoSidedExponential) and p > 1:
            return ExpPowerModel(p)
        if isinstance(base, StandardGaussian) and p > 2:
            return GaussPowerModel(p)
        if isinstance(base, SymmetrizedGamma) and p > 1:
            return SymGammaPowerModel(p, base.shape)
    return None


def natural_alpha(dist):
    """Exponent at which ``dist`` has a non-trivial scaled free energy, or None."""
    if isinstance(dist, PowerOf):
        if isinstance(dist.base, (TwoSidedExponential, SymmetrizedGamma)) and dist.p > 1:
            return 1.0 / dist.p
        if isinstance(dist.base, StandardGaussian) and dist.p > 2:
            return 2.0 / dist.p
    return None

