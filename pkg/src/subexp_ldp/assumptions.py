"""Numerical check of second-order essential smoothness for a free energy.

The check samples lambda', lambda'' and V = lambda''/lambda'^2 on a grid that
approaches xi geometrically.  A passing report is evidence, not proof: the
condition quantifies over every sequence tending to xi, and a finite grid can
only fail to find a counterexample.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .convex import inverse_lambda_prime
from .errors import DomainError, QuadratureFailure
from .serialize import to_json

__all__ = ["CheckConfig", "AssumptionReport", "RefinedCondition", "check", "refined_condition"]

SUPPORTED = "numerically supported"
UNVERIFIED = "unverified"
INFINITE = "infinite domain: LDP at this scale is trivial"


@dataclass(frozen=True)
class CheckConfig:
    """Grid and tolerance settings for :func:`check`.

    The grid is eta_k = xi (1 - d_k) with d_k geometric from ``approach_start``
    down to ``approach_end``.
    """

    points: int = 64
    approach_start: float = 1e-3
    approach_end: float = 1e-6
    steepness_threshold: float = 1e5
    omega_margin: float = 0.05
    slack: float = 1e-9
    min_monotone_points: int = 16

    def __post_init__(self):
        if self.points < 2:
            raise ValueError("need at least two grid points")
        if not 2 <= self.min_monotone_points <= self.points:
            raise ValueError("min_monotone_points must lie in [2, points]")
        if not 0 < self.approach_end < self.approach_start < 1:
            raise ValueError("require 0 < approach_end < approach_start < 1")


@dataclass
class AssumptionReport:
    xi: float
    domain_nontrivial_bounded: bool
    steepness_ok: bool
    steepness_sequence: list
    xi0: float
    omega: float
    lambda_second_nondecreasing: bool
    V_nonincreasing: bool
    grid: list
    label: str = SUPPORTED

    @property
    def all_ok(self):
        return (self.domain_nontrivial_bounded and self.steepness_ok
                and self.lambda_second_nondecreasing and self.V_nonincreasing)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return to_json(self.to_dict())


def _nondecreasing_from(values, slack):
    """Flags f[i] = values[i:] is non-decreasing (relative slack)."""
    n = len(values)
    ok = [True] * n
    for i in range(n - 2, -1, -1):
        a, b = values[i], values[i + 1]
        ok[i] = ok[i + 1] and b >= a - slack * max(1.0, abs(a))
    return ok


def check(model, config: CheckConfig | None = None) -> AssumptionReport:
    """Evaluate the three conditions (bounded domain, steepness, bounded V)."""
    cfg = config or CheckConfig()
    xi = model.xi
    if xi == 0:
        raise DomainError("xi = 0: the scaled free energy is finite only at eta = 0")
    if not math.isfinite(xi):
        return AssumptionReport(
            xi=xi, domain_nontrivial_bounded=False, steepness_ok=False,
            steepness_sequence=[], xi0=math.nan, omega=math.nan,
            lambda_second_nondecreasing=False, V_nonincreasing=False,
            grid=[], label=INFINITE,
        )

    dist = np.geomspace(cfg.approach_start, cfg.approach_end, cfg.points)
    grid, d1, d2 = [], [], []
    for d in dist:
        eta = xi * (1.0 - d)
        try:
            p, s = model.lam_prime(eta), model.lam_second(eta)
        except (QuadratureFailure, DomainError):
            # the grid stops where evaluation stops; steepness is then judged on what remains
            break
        grid.append(float(eta))
        d1.append(float(p))
        d2.append(float(s))
    if len(grid) < 2:
        raise QuadratureFailure("free energy could not be evaluated near xi")

    V = [s / (p * p) for p, s in zip(d1, d2)]
    increasing = all(b > a for a, b in zip(d1[:-1], d1[1:]))
    steep = increasing and len(grid) == cfg.points and d1[-1] > cfg.steepness_threshold

    second_up = _nondecreasing_from(d2, cfg.slack)
    v_down = _nondecreasing_from([-v for v in V], cfg.slack)
    # a monotone stretch of one or two points says nothing; demand a minimum run
    last_start = len(grid) - cfg.min_monotone_points
    start = next((i for i in range(last_start + 1) if second_up[i] and v_down[i]), None)
    if start is not None:
        xi0 = grid[start]
        omega = (1.0 + cfg.omega_margin) * max(V[start:])
        label = SUPPORTED
        l2_ok = v_ok = True
    else:
        upper = [v for eta, v in zip(grid, V) if eta >= 0.5 * xi]
        xi0 = grid[0]
        omega = (1.0 + cfg.omega_margin) * max(upper)
        label = UNVERIFIED
        l2_ok, v_ok = second_up[0], v_down[0]

    return AssumptionReport(
        xi=xi,
        domain_nontrivial_bounded=0 < xi < math.inf,
        steepness_ok=steep,
        steepness_sequence=d1,
        xi0=xi0,
        omega=omega,
        lambda_second_nondecreasing=l2_ok,
        V_nonincreasing=v_ok,
        grid=grid,
        label=label,
    )


@dataclass
class RefinedCondition:
    ratios: list = field(default_factory=list)
    decaying: bool = False


def refined_condition(model, x, n_grid) -> RefinedCondition:
    """Ratios V(eta_n)/n^alpha with eta_n = (lambda')^{-1}((n x)^alpha)."""
    ns = [int(n) for n in n_grid]
    if not ns:
        raise ValueError("n_grid must be non-empty")
    a = float(model.alpha)
    out = []
    for n in ns:
        eta = inverse_lambda_prime(model, (n * float(x)) ** a)
        out.append((n, model.relative_variance(eta) / n ** a))
    decaying = len(out) > 1 and out[-1][1] < 0.5 * out[0][1]
    return RefinedCondition(out, decaying)
