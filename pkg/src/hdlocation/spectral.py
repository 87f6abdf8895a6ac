"""Normalized trace parameters a_i = tr(Sigma^i) / p and their estimators.

All four estimators are unbiased combinations of products of tr S^k. The
one for a_4 comes from inverting the fourth-order Wishart moment identities

    E[p_lambda(W)] = sum_mu M_{lambda, mu}(n) p_mu(Sigma),   W = n S ~ W_p(n, Sigma),

over the five partitions of 4 (tr W^4, tr W^3 tr W, (tr W^2)^2,
tr W^2 (tr W)^2, (tr W)^4). The first row of M(n)^{-1} gives

    tr Sigma^4 ~ [ n(n^2+n+2) tr W^4 - 4(n^2+n+2) tr W^3 tr W
                   - (2n^2+3n-6) (tr W^2)^2 + 2(5n+6) tr W^2 (tr W)^2
                   - (5n+6)/n (tr W)^4 ] / [(n-3)(n-2)(n-1)(n+1)(n+2)(n+4)(n+6)].

:func:`wishart_moment_matrix` exposes M(n) so that the inversion can be
checked against an independent enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gauss import SigmaKind

# Partitions of 4 indexing rows/columns of the moment matrix.
PARTITIONS_4 = ((4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1))

# Floor applied to a_2 (and a_3 where it is raised to a power) inside square
# roots only; stored estimates are never clamped.
A_FLOOR = 1e-12


@dataclass(frozen=True)
class SpectralEstimates:
    a1_hat: float
    a2_hat: float
    a3_hat: float
    a4_hat: float
    c_hat: float
    p: int
    n: int


def wishart_moment_matrix(n):
    """M(n) with E[p_lambda(W)] = M @ p_mu(Sigma) over :data:`PARTITIONS_4`."""
    n = float(n)
    return np.array([
        [n * (n**3 + 6 * n**2 + 21 * n + 20), 4 * n * (n**2 + 3 * n + 4),
         n * (2 * n**2 + 5 * n + 5), 6 * n * (n + 1), n],
        [6 * n * (n**2 + 3 * n + 4), n * (n**3 + 3 * n**2 + 16 * n + 12),
         6 * n * (n + 1), 3 * n * (n**2 + n + 2), n**2],
        [4 * n * (2 * n**2 + 5 * n + 5), 16 * n * (n + 1),
         n * (n + 1) * (n**2 + n + 4), 2 * n * (n**2 + n + 4), n**2],
        [24 * n * (n + 1), 8 * n * (n**2 + n + 2), 2 * n * (n**2 + n + 4),
         n**2 * (n**2 + n + 10), n**3],
        [48 * n, 32 * n**2, 12 * n**2, 12 * n**3, n**4],
    ])


def _check_n(n):
    if n < 5:
        bad = [f"(n - {k}) = {n - k}" for k in (1, 2, 3) if n - k <= 0]
        detail = ", ".join(bad) if bad else f"(n - 4) = {n - 4}"
        raise ValueError(f"trace estimators need n >= 5; got n = {n} with non-positive factor {detail}")


def estimates_from_traces(traces, p, n):
    """Vectorized a_1..a_4 estimates from (tr S, tr S^2, tr S^3, tr S^4)."""
    _check_n(n)
    t1, t2, t3, t4 = (np.asarray(t, dtype=float) for t in traces)
    a1 = t1 / p
    a2 = n**2 / (p * (n + 2) * (n - 1)) * (t2 - t1**2 / n)
    a3 = n**2 / ((n + 4) * (n + 2) * (n - 1) * (n - 2) * p) * (
        n**2 * t3 - 3 * n * t2 * t1 + 2 * t1**3)
    denom = (n - 3) * (n - 2) * (n - 1) * (n + 1) * (n + 2) * (n + 4) * (n + 6)
    k = n**2 + n + 2
    a4 = n**4 / (p * denom) * (
        n * k * t4
        - 4 * k * t3 * t1
        - (2 * n**2 + 3 * n - 6) * t2**2
        + 2 * (5 * n + 6) * t2 * t1**2
        - (5 * n + 6) / n * t1**4
    )
    return a1, a2, a3, a4


def estimate_a(summary):
    """Plug-in estimates of a_1..a_4 and c = p/n from a :class:`SampleSummary`."""
    p, n = summary.p, summary.n
    a1, a2, a3, a4 = estimates_from_traces(summary.trace_powers, p, n)
    return SpectralEstimates(float(a1), float(a2), float(a3), float(a4), p / n, p, n)


def _ar1_a2(p, eta):
    k = np.arange(1, p)
    return 1.0 + 2.0 / p * np.sum((p - k) * eta ** (2 * k))


def population_a(model):
    """Exact (a_1, a_2, a_3, a_4) for a covariance model."""
    p = model.p
    if model.kind is SigmaKind.IDENTITY:
        return (1.0, 1.0, 1.0, 1.0)
    sigma = model.covariance()
    s2 = sigma @ sigma
    a3 = float(np.sum(s2 * sigma)) / p
    a4 = float(np.sum(s2 * s2)) / p
    if model.kind is SigmaKind.AR1:
        return (1.0, float(_ar1_a2(p, model.eta)), a3, a4)
    return (float(np.trace(sigma)) / p, float(np.trace(s2)) / p, a3, a4)
