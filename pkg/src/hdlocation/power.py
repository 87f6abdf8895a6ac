"""Local asymptotic power of the three tests and the regime comparison.

Shift magnitudes are the Mahalanobis distance Delta^2, the Euclidean
Delta_I^2 and the Sigma-weighted Delta_Sigma^2 of mu - mu0. Under local
alternatives (shifts of order n^{-1/4}) each test's power tends to
Phi(sqrt(n) * delta - z(alpha)) for a test-specific noncentrality delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .distributions import normal_cdf, normal_quantile
from .location_tests import TestKind, _check_domain, sigma_rho

POWER_TOL = 1e-12


@dataclass(frozen=True)
class ShiftProfile:
    delta2: float
    delta2_I: float
    delta2_Sigma: float

    @property
    def ratio(self):
        return self.delta2 / self.delta2_I

    def is_null(self):
        return self.delta2 == 0 and self.delta2_I == 0 and self.delta2_Sigma == 0


class Regime(str, Enum):
    WEIGHTED_BEST = "WeightedBest"
    DEMPSTER_BEST = "DempsterBest"
    HOTELLING_BEST = "HotellingBest"


@dataclass
class RegimeReport:
    ratio: float
    lower: float
    upper: float
    regime: Regime
    powers: dict
    notes: list = field(default_factory=list)


def shift_profile(mu, mu0, model):
    mu = np.asarray(mu, dtype=float)
    mu0 = np.broadcast_to(np.asarray(mu0, dtype=float), mu.shape)
    if mu.shape != (model.p,):
        raise ValueError(f"shift must have length {model.p}, got shape {mu.shape}")
    d = mu - mu0
    sigma = model.covariance()
    delta2 = float(d @ np.linalg.solve(sigma, d)) if np.any(d) else 0.0
    return ShiftProfile(delta2, float(d @ d), float(d @ sigma @ d))


def flat_shift(p, n):
    """Alternative mean with every coordinate equal to 2 / (n^{1/4} sqrt(p))."""
    return np.full(p, 2.0 / (n**0.25 * math.sqrt(p)))


def omega0_ratio(c, a2):
    """Delta^2 / Delta_I^2 at which Hotelling and Dempster have equal power."""
    if not 0 <= c < 1:
        raise ValueError(f"c must lie in [0, 1), got {c!r}")
    if not a2 > 0:
        raise ValueError(f"a2 must be positive, got {a2!r}")
    return 1.0 / math.sqrt((1 - c) * a2)


def noncentrality(kind, profile, c, a1, a2, rho=None):
    """Per-sqrt(n) noncentrality delta such that power -> Phi(sqrt(n) delta - z)."""
    _check_domain(c=c, a1=a1, a2=a2)
    kind = TestKind(kind)
    d2, dI = profile.delta2, profile.delta2_I
    if rho is not None:
        if kind is not TestKind.WEIGHTED:
            raise ValueError("a fixed weight only applies to the weighted test")
        _check_domain(rho=rho)
        return float((rho * d2 / (1 - c) + (1 - rho) * dI / (a1 * c)) / sigma_rho(rho, c, a1, a2))
    if kind is TestKind.HOTELLING:
        return math.sqrt(1 - c) * d2 / math.sqrt(2 * c)
    if kind is TestKind.DEMPSTER:
        return dI / math.sqrt(2 * c * a2)
    return ((math.sqrt(a2 * (1 - c)) * d2 + dI)
            / (2 * math.sqrt(((1 - c) ** 0.5 * a1 * a2**0.5 + a2) * c)))


def asymptotic_power(kind, profile, n, c, a1, a2, alpha, rho=None):
    """Limit of the rejection probability.

    ``kind`` is one of the :class:`TestKind` values; passing ``rho`` with
    ``kind="weighted"`` gives the power of T(rho) at that fixed weight.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    z = float(normal_quantile(alpha))
    return float(normal_cdf(math.sqrt(n) * noncentrality(kind, profile, c, a1, a2, rho) - z))


def c1_interval(c, a1, a2):
    """Endpoints of the ratio interval where the weighted test is best.

    Returns ``(lower, upper, swapped)``; ``swapped`` is True when the raw
    endpoints came out in reverse order. That needs a1^2 (1 - c) > a2, which no
    real covariance matrix satisfies since a2 >= a1^2.
    """
    _check_domain(c=c, a1=a1, a2=a2)
    g = math.sqrt(2) * math.sqrt(1 + a1 * math.sqrt((1 - c) / a2)) - 1
    base = math.sqrt(a2 * (1 - c))
    lo, hi = g / base, 1 / (g * base)
    if lo > hi:
        return hi, lo, True
    return lo, hi, False


def classify_regime(profile, n, c, a1, a2, alpha):
    """Which test has the highest local asymptotic power for this shift."""
    if profile.delta2_I <= 0 or profile.delta2 <= 0:
        raise ValueError("regime classification needs a non-null shift")
    lower, upper, swapped = c1_interval(c, a1, a2)
    notes = []
    if swapped:
        notes.append("interval endpoints were reversed and have been sorted")
    ratio = profile.ratio
    powers = {k.value: asymptotic_power(k, profile, n, c, a1, a2, alpha) for k in TestKind}
    if lower <= ratio <= upper:
        regime = Regime.WEIGHTED_BEST
    elif ratio < lower:
        regime = Regime.DEMPSTER_BEST
    else:
        regime = Regime.HOTELLING_BEST
    if swapped and regime is Regime.WEIGHTED_BEST:
        # between reversed endpoints the weighted test is beaten by both others
        h, d = powers[TestKind.HOTELLING.value], powers[TestKind.DEMPSTER.value]
        regime = Regime.HOTELLING_BEST if h >= d else Regime.DEMPSTER_BEST
        notes.append("weighted test has the lowest power at this ratio")
    else:
        _check_ordering(regime, powers)
    return RegimeReport(ratio, lower, upper, regime, powers, notes)


def _check_ordering(regime, powers):
    h, d, w = (powers[k.value] for k in (TestKind.HOTELLING, TestKind.DEMPSTER, TestKind.WEIGHTED))
    tol = POWER_TOL
    if regime is Regime.WEIGHTED_BEST:
        ok = w >= max(h, d) - tol
    elif regime is Regime.DEMPSTER_BEST:
        ok = d >= w - tol and w >= h - tol
    else:
        ok = h >= w - tol and w >= d - tol
    if not ok:
        raise ArithmeticError(f"regime {regime.value} disagrees with powers {powers}")

