"""Normal and F distribution helpers used to calibrate the tests.

Thin wrappers over :mod:`scipy.special` with argument checking. Quantiles are
*upper* tail points: ``normal_quantile(0.05) == 1.6448536...``.
"""

import numpy as np
from scipy import special


def _check_level(alpha):
    a = np.asarray(alpha, dtype=float)
    if np.any(~((a > 0) & (a < 1))):
        raise ValueError(f"level must lie in (0, 1), got {alpha!r}")
    return a


def normal_cdf(x):
    return special.ndtr(x)


def normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)


def normal_quantile(alpha):
    """Upper 100*alpha percentile z(alpha) of N(0, 1)."""
    a = _check_level(alpha)
    return -special.ndtri(a)


def f_quantile(alpha, d1, d2):
    """Upper 100*alpha percentile of F(d1, d2).

    Computed from the inverse regularized incomplete beta function: if
    ``x = I^{-1}_{1-alpha}(d1/2, d2/2)`` then the threshold is
    ``d2 x / (d1 (1 - x))``.
    """
    a = _check_level(alpha)
    if np.any(np.asarray(d1) < 1) or np.any(np.asarray(d2) < 1):
        raise ValueError(f"degrees of freedom must be >= 1, got ({d1}, {d2})")
    x = special.betaincinv(0.5 * np.asarray(d1, float), 0.5 * np.asarray(d2, float), 1.0 - a)
    return d2 * x / (d1 * (1.0 - x))
