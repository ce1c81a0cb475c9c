"""Rare-event estimators for P(S_n >= x) and P(S_n in (x - delta, x + delta)).

S_n is the empirical mean of n i.i.d. draws.  Three estimators share one
replication engine:

* naive Monte Carlo;
* the one-variable subexponential Esscher tilt: X_1 is drawn from the tilted
  law at eta_n = (lambda')^{-1}((n x)^alpha), X_2..X_n from the base law, and
  each replication carries the weight exp(-eta_n phi_alpha(X_1) + lambda(eta_n));
* the shift baseline X_1 -> X_1 + n x with a density-ratio weight.

Replications are cut into fixed-size blocks, each with its own child of
``SeedSequence(seed)``.  Block sums are added in block order, so results are
bit-identical for any thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .free_energy import analytic_model_for, natural_alpha, numeric_model
from .quadrature import integrate_split
from .scaling import make_stream, survival
from .serialize import csv_cell, to_json
from .tilting import optimal_tilt, tilted_law
from .errors import DomainError, UnsupportedTail

__all__ = [
    "EventSpec",
    "EstimatorResult",
    "ESTIMATOR_CSV_HEADER",
    "naive_mc",
    "esscher_is",
    "shift_is",
    "rate_sweep",
    "SweepPoint",
    "big_jump_diagnostics",
    "BigJumpReport",
    "subexp_tchebychev_bound",
    "symmetrized_tchebychev_bound",
    "ibp_identity_check",
    "IbpCheck",
]

TAIL = "tail"
BALL = "ball"
NAIVE, ESSCHER, SHIFT = "naive", "esscher", "shift"

ESTIMATOR_CSV_HEADER = ("method,n,x,shape,delta,replications,seed,estimate,std_error,"
                        "ess,tilt_eta,empirical_rate")

_BLOCK_ELEMENTS = 1 << 20
_LOG_WEIGHT_CAP = math.log(1e300)
# diagnostic constant: "big jump" means one summand >= 0.8 n x
BIG_JUMP_FRACTION = 0.8


@dataclass(frozen=True)
class EventSpec:
    n: int
    x: float
    shape: str = TAIL
    delta: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not self.x > 0:
            raise ValueError(f"x must be positive, got {self.x!r}")
        if self.shape not in (TAIL, BALL):
            raise ValueError(f"shape must be 'tail' or 'ball', got {self.shape!r}")
        if self.shape == BALL:
            if self.delta is None or not 0 < self.delta < self.x:
                raise ValueError("a ball event needs 0 < delta < x")

    def indicator(self, mean):
        if self.shape == TAIL:
            return mean >= self.x
        return np.abs(mean - self.x) < self.delta


@dataclass(frozen=True)
class EstimatorResult:
    estimate: float
    standard_error: float
    replications: int
    effective_sample_size: float | None
    empirical_rate: float
    method: str
    tilt_eta: float | None
    seed: int
    event: EventSpec
    excluded: int = 0

    @property
    def rate_is_infinite(self):
        """True when no replication hit the event (estimate 0)."""
        return math.isinf(self.empirical_rate)

    @property
    def relative_error(self):
        return self.standard_error / self.estimate if self.estimate > 0 else math.inf

    def csv_row(self):
        ev = self.event
        cells = [self.method, ev.n, float(ev.x), ev.shape, ev.delta, self.replications, self.seed,
                 self.estimate, self.standard_error, self.effective_sample_size, self.tilt_eta,
                 self.empirical_rate]
        return ",".join(csv_cell(c) for c in cells)

    def to_dict(self):
        d = asdict(self)
        d["event"] = asdict(self.event)
        return d

    def to_json(self):
        return to_json(self.to_dict())


def _empirical_rate(estimate, n, alpha):
    if estimate <= 0:
        return math.inf
    return -math.log(estimate) / n ** alpha


def _resolve_alpha(dist, alpha):
    if alpha is not None:
        return float(alpha)
    nat = natural_alpha(dist)
    return 1.0 if nat is None else nat


def _run_blocks(block_fn, replications, n, seed, threads):
    """Sum the per-block arrays returned by ``block_fn(rng, size)`` in block order."""
    if replications < 1:
        raise ValueError("replications must be positive")
    size = max(1, min(replications, _BLOCK_ELEMENTS // max(n, 1)))
    sizes = [size] * (replications // size)
    if replications % size:
        sizes.append(replications % size)
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    def work(i):
        return np.asarray(block_fn(make_stream(children[i]), sizes[i]), dtype=float)

    threads = threads or os.cpu_count() or 1
    if threads == 1 or len(sizes) == 1:
        parts = [work(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, range(len(sizes))))
    total = np.zeros_like(parts[0])
    for part in parts:
        total = total + part
    return total


def _base_sum(dist, rng, size, count):
    if count == 0:
        return np.zeros(size)
    return dist.sample(rng, (size, count)).sum(axis=1)


def _weighted_result(sums, replications, event, method, seed, alpha, eta=None, excluded=0):
    s1, s2 = float(sums[0]), float(sums[1])
    used = replications - excluded
    if used <= 0:
        est, se, ess = 0.0, 0.0, 0.0
    else:
        est = s1 / used
        var = (s2 - s1 * s1 / used) / (used - 1) if used > 1 else 0.0
        se = math.sqrt(max(var, 0.0) / used)
        ess = s1 * s1 / s2 if s2 > 0 else 0.0
    return EstimatorResult(
        estimate=est, standard_error=se, replications=replications,
        effective_sample_size=ess, empirical_rate=_empirical_rate(est, event.n, alpha),
        method=method, tilt_eta=eta, seed=seed, event=event, excluded=excluded,
    )


def naive_mc(dist, event: EventSpec, replications: int, seed: int, alpha=None,
             threads=1) -> EstimatorResult:
    """Frequency of the event over i.i.d. replications of (X_1..X_n)."""
    if replications < 1000:
        raise ValueError("naive Monte Carlo needs at least 10^3 replications")
    a = _resolve_alpha(dist, alpha)

    def block(rng, size):
        mean = _base_sum(dist, rng, size, event.n) / event.n
        return [np.count_nonzero(event.indicator(mean))]

    hits = float(_run_blocks(block, replications, event.n, seed, threads)[0])
    p = hits / replications
    se = math.sqrt(p * (1.0 - p) / replications)
    return EstimatorResult(
        estimate=p, standard_error=se, replications=replications,
        effective_sample_size=None, empirical_rate=_empirical_rate(p, event.n, a),
        method=NAIVE, tilt_eta=None, seed=seed, event=event,
    )


def _paired_model(dist, fe):
    if fe is not None:
        return fe
    fe = analytic_model_for(dist)
    if fe is None:
        alpha = natural_alpha(dist)
        if alpha is None:
            raise ValueError("no free energy given and none can be inferred for this law")
        fe = numeric_model(dist, alpha)
    return fe


def esscher_is(dist, fe, event: EventSpec, replications: int, seed: int, eta=None,
               threads=1) -> EstimatorResult:
    """Importance sampling with X_1 alone drawn from the tilted law.

    ``eta`` overrides the optimal tilt (``eta=0`` reproduces naive sampling).
    """
    fe = _paired_model(dist, fe)
    if eta is None:
        eta = optimal_tilt(fe, event.n, event.x)
    law = tilted_law(dist, fe, eta)
    n = event.n

    def block(rng, size):
        x1, u1 = law.sample_scaled(rng, size)
        mean = (x1 + _base_sum(dist, rng, size, n - 1)) / n
        hit = event.indicator(mean)
        with np.errstate(over="ignore"):
            h = np.where(hit, np.exp(-law.eta * u1 + law.log_normalizer), 0.0)
        return [h.sum(), (h * h).sum()]

    sums = _run_blocks(block, replications, n, seed, threads)
    return _weighted_result(sums, replications, event, ESSCHER, seed, float(fe.alpha), eta=float(eta))


def shift_is(dist, event: EventSpec, replications: int, seed: int, shift=None, alpha=None,
             threads=1) -> EstimatorResult:
    """Importance sampling with X_1 replaced by X_1 + n x.

    Replications whose density ratio exceeds 1e300 are excluded and counted
    in ``excluded``.
    """
    a = _resolve_alpha(dist, alpha)
    n = event.n
    c = float(n * event.x if shift is None else shift)

    def block(rng, size):
        x = dist.sample(rng, size)
        xt = x + c
        mean = (xt + _base_sum(dist, rng, size, n - 1)) / n
        hit = event.indicator(mean)
        with np.errstate(all="ignore"):
            lw = np.asarray(dist.logpdf(xt), dtype=float) - np.asarray(dist.logpdf(x), dtype=float)
        lw = np.where(np.isnan(lw), -np.inf, lw)
        over = lw > _LOG_WEIGHT_CAP
        with np.errstate(over="ignore"):
            h = np.where(hit & ~over, np.exp(np.minimum(lw, _LOG_WEIGHT_CAP)), 0.0)
        return [h.sum(), (h * h).sum(), np.count_nonzero(over)]

    sums = _run_blocks(block, replications, n, seed, threads)
    return _weighted_result(sums, replications, event, SHIFT, seed, a, excluded=int(sums[2]))


class SweepPoint(NamedTuple):
    n: int
    estimate: float
    empirical_rate: float
    std_error: float


def rate_sweep(dist, fe, x, n_grid, replications, seed, threads=1):
    """Esscher estimates of P(S_n >= x) along ``n_grid``; compare rates with xi x^alpha."""
    ns = [int(n) for n in n_grid]
    if not ns:
        raise ValueError("n_grid must be non-empty")
    out = []
    for n in ns:
        r = esscher_is(dist, fe, EventSpec(n, x), replications, seed, threads=threads)
        out.append(SweepPoint(n, r.estimate, r.empirical_rate, r.standard_error))
    return out


@dataclass(frozen=True)
class BigJumpReport:
    a1: float
    a2: float
    a2_std_error: float
    conditional_max_fraction: float
    a1_closed_form: bool

    def __iter__(self):
        return iter((self.a1, self.a2, self.conditional_max_fraction))


def big_jump_diagnostics(dist, event: EventSpec, replications, seed, fe=None,
                         threads=1) -> BigJumpReport:
    """Split P(S_n >= x) into A1 = P(max X_i >= n x) and A2 = P(max < n x, S_n >= x).

    A1 uses the closed-form tail when there is one.  A2 and the fraction
    P(max X_i >= 0.8 n x | S_n >= x) come from Esscher-weighted replications.
    """
    if event.shape != TAIL:
        raise ValueError("big-jump diagnostics apply to tail events")
    n, x = event.n, event.x
    level = n * x
    closed = dist.has_closed_tail
    if closed:
        t = float(dist.tail(level))
        a1 = -math.expm1(n * math.log1p(-t))
    else:
        def max_block(rng, size):
            return [np.count_nonzero(dist.sample(rng, (size, n)).max(axis=1) >= level)]

        a1 = float(_run_blocks(max_block, replications, n, seed, threads)[0]) / replications

    fe = _paired_model(dist, fe)
    law = tilted_law(dist, fe, optimal_tilt(fe, n, x))

    def block(rng, size):
        x1, u1 = law.sample_scaled(rng, size)
        rest = dist.sample(rng, (size, n - 1)) if n > 1 else np.zeros((size, 0))
        total = x1 + rest.sum(axis=1)
        big = np.maximum(x1, rest.max(axis=1)) if n > 1 else x1
        hit = total / n >= x
        with np.errstate(over="ignore"):
            w = np.exp(-law.eta * u1 + law.log_normalizer)
        h2 = np.where(hit & (big < level), w, 0.0)
        hit_w = np.where(hit, w, 0.0)
        jump_w = np.where(hit & (big >= BIG_JUMP_FRACTION * level), w, 0.0)
        return [h2.sum(), (h2 * h2).sum(), hit_w.sum(), jump_w.sum()]

    sums = _run_blocks(block, replications, n, seed, threads)
    a2 = float(sums[0]) / replications
    var = (float(sums[1]) - float(sums[0]) ** 2 / replications) / max(replications - 1, 1)
    frac = float(sums[3]) / float(sums[2]) if sums[2] > 0 else math.nan
    return BigJumpReport(a1, a2, math.sqrt(max(var, 0.0) / replications), frac, closed)


def subexp_tchebychev_bound(fe, eta, z) -> float:
    """P(X >= z) <= exp(-eta z^alpha + lambda(eta)) for 0 < eta < xi."""
    eta = float(eta)
    if not 0 < eta < fe.xi:
        raise DomainError(f"need 0 < eta < xi={fe.xi!r}, got {eta!r}")
    return math.exp(-eta * float(z) ** float(fe.alpha) + fe.lam(eta))


def symmetrized_tchebychev_bound(fe, k, a, eta) -> float:
    """Two-sided Chernoff bound on P(|Z - EZ| > a) for Z = phi_alpha(X_eta).

    Returns max(E exp(k(Z - EZ - a)), E exp(k(-Z + EZ - a))), both written
    through lambda: exp(-k(lambda'(eta) + a) + lambda(eta + k) - lambda(eta))
    and exp(k(lambda'(eta) - a) + lambda(eta - k) - lambda(eta)).
    """
    k, a, eta = float(k), float(a), float(eta)
    if not k > 0:
        raise ValueError("k must be positive")
    if not (abs(eta + k) < fe.xi and abs(eta - k) < fe.xi):
        raise DomainError(f"eta +- k must stay inside (-xi, xi) with xi={fe.xi!r}")
    lam, d1 = fe.lam(eta), fe.lam_prime(eta)
    upper = -k * (d1 + a) + fe.lam(eta + k) - lam
    lower = k * (d1 - a) + fe.lam(eta - k) - lam
    return math.exp(max(upper, lower))


class IbpCheck(NamedTuple):
    lhs: float
    rhs: float
    abs_diff: float


def _survival_fn(dist):
    try:
        survival(dist, 0.0)
        return lambda z: float(survival(dist, z))
    except UnsupportedTail:
        half = 0.5

        def by_quadrature(z):
            # P(X >= z) = 1/2 - int_0^z f for z >= 0 (symmetry); mirrored below 0
            inner = integrate_split(lambda t: float(dist.density(t)), 0.0, abs(z))
            return half - inner if z >= 0 else half + inner

        return by_quadrature


def ibp_identity_check(dist, a, r1, r2) -> IbpCheck:
    """Both sides of E[e^{aX} 1{r1 <= X <= r2}] = a int e^{az} P(X >= z) dz + boundary terms."""
    a, r1, r2 = float(a), float(r1), float(r2)
    if not a > 0 or not r2 > r1:
        raise ValueError("need a > 0 and r2 > r1")
    lhs = integrate_split(lambda t: math.exp(a * t) * float(dist.density(t)), r1, r2)
    surv = _survival_fn(dist)
    body = integrate_split(lambda z: math.exp(a * z) * surv(z), r1, r2)
    rhs = a * body + math.exp(a * r1) * surv(r1) - math.exp(a * r2) * surv(r2)
    return IbpCheck(lhs, rhs, abs(lhs - rhs))

