"""Scaling functions and the catalog of symmetric base laws.

Every law here is symmetric about zero, atomless, and has finite absolute
moments of all orders.  Laws are immutable; randomness comes from a
``numpy.random.Generator`` passed in by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import UnsupportedTail

__all__ = [
    "ScalingExponent",
    "phi",
    "phi_inverse",
    "DistributionModel",
    "TwoSidedExponential",
    "StandardGaussian",
    "SymmetrizedGamma",
    "PowerOf",
    "power_transform",
    "sample",
    "tail",
    "survival",
    "make_stream",
]

_LOG2 = math.log(2.0)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class ScalingExponent(float):
    """A float restricted to the open interval (0, 1)."""

    def __new__(cls, alpha):
        value = float(alpha)
        if not 0.0 < value < 1.0:
            raise ValueError(f"scaling exponent must lie in (0, 1), got {alpha!r}")
        return super().__new__(cls, value)


def _as_output(values, like):
    if np.ndim(like) == 0:
        return float(values)
    return values


def phi(alpha, x):
    """Signed power ``sign(x) * |x|**alpha`` (zero maps to zero)."""
    arr = np.asarray(x, dtype=float)
    out = np.sign(arr) * np.abs(arr) ** float(alpha)
    return _as_output(out, x)


def phi_inverse(alpha, y):
    """Inverse of :func:`phi` for the same exponent."""
    return phi(1.0 / float(alpha), y)


def make_stream(seed) -> np.random.Generator:
    """PCG64 generator; ``seed`` may be an int or a ``SeedSequence``."""
    return np.random.Generator(np.random.PCG64(seed))


def _symmetric_uniform(rng, size):
    # Midpoints of the 2**-53 lattice: strictly inside (0, 1) and symmetric about 1/2.
    return rng.random(size) + 2.0 ** -54


def _random_sign(rng, size):
    return np.where(rng.random(size) < 0.5, -1.0, 1.0)


class DistributionModel:
    """Interface shared by all symmetric laws."""

    has_closed_tail = True

    def logpdf(self, x):
        raise NotImplementedError

    def density(self, x):
        with np.errstate(over="ignore"):
            return _as_output(np.exp(np.asarray(self.logpdf(x), dtype=float)), x)

    def tail(self, z):
        """P(X >= z) for z >= 0."""
        raise NotImplementedError

    def log_tail(self, z):
        with np.errstate(divide="ignore"):
            return _as_output(np.log(np.asarray(self.tail(z), dtype=float)), z)

    def sample(self, rng, size):
        raise NotImplementedError

    def abs_moment(self, j):
        """E|X|**j."""
        raise NotImplementedError


@dataclass(frozen=True)
class TwoSidedExponential(DistributionModel):
    """Density exp(-|y|)/2."""

    def logpdf(self, x):
        return _as_output(-np.abs(np.asarray(x, dtype=float)) - _LOG2, x)

    def tail(self, z):
        return _as_output(0.5 * np.exp(-np.asarray(z, dtype=float)), z)

    def log_tail(self, z):
        return _as_output(-np.asarray(z, dtype=float) - _LOG2, z)

    def sample(self, rng, size):
        # inverse CDF
        u = _symmetric_uniform(rng, size)
        lower = u < 0.5
        with np.errstate(divide="ignore"):
            return np.where(lower, np.log(2.0 * u), -np.log(2.0 * (1.0 - u)))

    def abs_moment(self, j):
        return math.gamma(j + 1.0)


@dataclass(frozen=True)
class StandardGaussian(DistributionModel):
    def logpdf(self, x):
        arr = np.asarray(x, dtype=float)
        return _as_output(-0.5 * arr * arr - _HALF_LOG_2PI, x)

    def tail(self, z):
        return _as_output(special.ndtr(-np.asarray(z, dtype=float)), z)

    def log_tail(self, z):
        return _as_output(special.log_ndtr(-np.asarray(z, dtype=float)), z)

    def sample(self, rng, size):
        # numpy's ziggurat method
        return rng.standard_normal(size)

    def abs_moment(self, j):
        return 2.0 ** (j / 2.0) * math.gamma((j + 1.0) / 2.0) / math.sqrt(math.pi)


@dataclass(frozen=True)
class SymmetrizedGamma(DistributionModel):
    """``eps * Gamma(shape, 1)`` with an independent fair sign ``eps``."""

    shape: float = 2.0

    def __post_init__(self):
        if not self.shape > 0:
            raise ValueError(f"gamma shape must be positive, got {self.shape!r}")

    @property
    def has_closed_tail(self):
        return float(self.shape).is_integer()

    def logpdf(self, x):
        a = np.abs(np.asarray(x, dtype=float))
        k = float(self.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            if k == 1.0:
                out = -a
            else:
                out = (k - 1.0) * np.log(a) - a
        return _as_output(out - math.lgamma(k) - _LOG2, x)

    def _require_integer(self):
        if not self.has_closed_tail:
            raise UnsupportedTail(
                f"no closed-form tail for SymmetrizedGamma(shape={self.shape}); use Monte Carlo"
            )

    def tail(self, z):
        self._require_integer()
        return _as_output(0.5 * special.gammaincc(self.shape, np.asarray(z, dtype=float)), z)

    def log_tail(self, z):
        self._require_integer()
        # log of e^{-z} sum_{j<k} z^j / j!, stable for large z
        k = int(self.shape)
        zz = np.atleast_1d(np.asarray(z, dtype=float))
        j = np.arange(k, dtype=float)
        with np.errstate(divide="ignore"):
            terms = j[None, :] * np.log(zz[:, None]) - special.gammaln(j + 1.0)[None, :]
        terms[:, 0] = 0.0
        out = special.logsumexp(terms, axis=1) - zz - _LOG2
        return _as_output(out if np.ndim(z) else out[0], z)

    def sample(self, rng, size):
        # numpy's Marsaglia-Tsang accept-reject
        g = rng.standard_gamma(self.shape, size)
        return _random_sign(rng, size) * g

    def abs_moment(self, j):
        return math.exp(math.lgamma(self.shape + j) - math.lgamma(self.shape))


@dataclass(frozen=True)
class PowerOf(DistributionModel):
    """Law of ``phi(p, Y)`` where ``Y`` follows ``base``."""

    base: DistributionModel
    p: float

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError(f"power must be positive, got {self.p!r}")

    @property
    def has_closed_tail(self):
        return self.base.has_closed_tail

    def logpdf(self, x):
        arr = np.asarray(x, dtype=float)
        a = np.abs(arr)
        inv = 1.0 / self.p
        with np.errstate(divide="ignore", invalid="ignore"):
            jac = math.log(inv) + (inv - 1.0) * np.log(a)
            out = np.asarray(self.base.logpdf(phi(inv, arr)), dtype=float) + jac
        # the density at 0 is +inf for p > 1 (integrable singularity)
        out = np.where(a == 0.0, np.inf if self.p > 1 else out, out)
        return _as_output(out, x)

    def tail(self, z):
        return self.base.tail(phi(1.0 / self.p, z))

    def log_tail(self, z):
        return self.base.log_tail(phi(1.0 / self.p, z))

    def sample(self, rng, size):
        return phi(self.p, self.base.sample(rng, size))

    def abs_moment(self, j):
        return self.base.abs_moment(j * self.p)


def power_transform(base: DistributionModel, p: float) -> DistributionModel:
    """Law of ``phi(p, Y)``; nested powers collapse since phi_q o phi_p = phi_{pq}."""
    if not p > 0:
        raise ValueError(f"power must be positive, got {p!r}")
    if p == 1:
        return base
    if isinstance(base, PowerOf):
        return power_transform(base.base, base.p * p)
    return PowerOf(base, float(p))


def sample(model: DistributionModel, rng_stream: np.random.Generator, count: int) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be at least 1")
    return model.sample(rng_stream, count)


def tail(model: DistributionModel, z):
    """Exact P(X >= z) for z >= 0."""
    if np.any(np.asarray(z) < 0):
        raise ValueError("tail is defined for z >= 0; use survival() for signed arguments")
    return model.tail(z)


def survival(model: DistributionModel, z):
    """P(X >= z) for any real z, using symmetry for negative arguments."""
    arr = np.asarray(z, dtype=float)
    t = np.asarray(model.tail(np.abs(arr)), dtype=float)
    return _as_output(np.where(arr >= 0, t, 1.0 - t), z)
