"""Brute-force oracles for the closed forms used elsewhere in the package.

None of these functions call the code they are meant to check: the weight
grid search evaluates its own objective, the quadratic-form checks work on raw
normal draws, and the Wishart moment table is enumerated from Wick pairings
instead of being typed in.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import bisect

from .gauss import stream, summarize_batch
from .location_tests import TestKind, batch_statistics, edgeworth_null_cdf


@dataclass
class MomentCheckReport:
    identity: str
    closed_form: float
    empirical: float
    se: float
    passed: bool


def _diag(A, p=None):
    A = np.asarray(A, dtype=float)
    if A.ndim == 2:
        if np.any(A - np.diag(np.diag(A))):
            raise ValueError("moment identities are only checked for diagonal matrices")
        A = np.diag(A)
    if A.ndim != 1 or (p is not None and A.shape != (p,)):
        raise ValueError("expected diagonal matrices of a common size")
    return A


def quadratic_moment_closed_forms(A1, A2, A3):
    """Closed forms of E[z'A1z], E[z'A1z z'A2z], E[z'A1z z'A2z z'A3z]."""
    d1 = _diag(A1)
    d2, d3 = _diag(A2, d1.size), _diag(A3, d1.size)
    t1, t2, t3 = d1.sum(), d2.sum(), d3.sum()
    t12, t13, t23 = (d1 * d2).sum(), (d1 * d3).sum(), (d2 * d3).sum()
    t123 = (d1 * d2 * d3).sum()
    return (
        t1,
        2 * t12 + t1 * t2,
        t1 * t2 * t3 + 2 * t3 * t12 + 2 * t2 * t13 + 2 * t1 * t23 + 8 * t123,
    )


def mc_quadratic_moments(A1, A2, A3, r=10**6, seed=0, chunk=100_000):
    """Monte Carlo check of the three quadratic-form moment identities.

    Returns one :class:`MomentCheckReport` per identity; an identity passes
    when the closed form lies within four standard errors of the MC mean.
    """
    d1 = _diag(A1)
    d2, d3 = _diag(A2, d1.size), _diag(A3, d1.size)
    if r < 2:
        raise ValueError("need at least two replications")
    closed = quadratic_moment_closed_forms(d1, d2, d3)
    s = np.zeros(3)
    ss = np.zeros(3)
    done = 0
    while done < r:
        m = min(chunk, r - done)
        z2 = stream(seed, done).standard_normal((m, d1.size)) ** 2
        q1, q2, q3 = z2 @ d1, z2 @ d2, z2 @ d3
        vals = np.stack([q1, q1 * q2, q1 * q2 * q3])
        s += vals.sum(axis=1)
        ss += (vals * vals).sum(axis=1)
        done += m
    mean = s / r
    var = np.maximum(ss / r - mean**2, 0.0) * r / (r - 1)
    se = np.sqrt(var / r)
    out = []
    for name, cf, emp, e in zip(("i", "ii", "iii"), closed, mean, se):
        out.append(MomentCheckReport(name, float(cf), float(emp), float(e),
                                     bool(abs(cf - emp) <= 4 * e)))
    return out


def clt_condition(omega):
    """tr(Omega^4) / (tr(Omega^2))^2 for a diagonal Omega (or its diagonal)."""
    d = _diag(omega)
    t2 = np.sum(d**2)
    if t2 == 0:
        raise ValueError("Omega must be non-zero")
    return float(np.sum(d**4) / t2**2)


def weight_objective(rho, c, a1, a2):
    """Per-Delta^2 noncentrality of T(rho) on the region where T^2 and D_n tie."""
    rho = np.asarray(rho, dtype=float)
    num = rho / (1 - c) + (1 - rho) * np.sqrt(a2 * (1 - c)) / (a1 * c)
    den = np.sqrt(2 * rho**2 * c / (1 - c) ** 3 + 2 * (1 - rho) ** 2 * a2 / (a1**2 * c)
                  + 4 * rho * (1 - rho) / (1 - c))
    return num / den


def grid_search_weight(c, a1, a2, grid_step=1e-6):
    """Argmax of :func:`weight_objective` over an evenly spaced grid on [0, 1]."""
    if not 0 < grid_step <= 1e-4:
        raise ValueError(f"grid_step must lie in (0, 1e-4], got {grid_step!r}")
    grid = np.linspace(0.0, 1.0, int(round(1 / grid_step)) + 1)
    return float(grid[np.argmax(weight_objective(grid, c, a1, a2))])


def null_weighted_draws(p, N, model, r, seed):
    """r draws of the standardized weighted statistic under H0 (adaptive weight, mean zero)."""
    if not p < N - 1:
        raise ValueError(f"need p < n = N - 1, got p = {p}, N = {N}")
    if model.p != p:
        raise ValueError(f"model dimension {model.p} does not match p = {p}")
    values = []
    chunk = 250
    for start in range(0, r, chunk):
        stop = min(start + chunk, r)
        z = np.stack([stream(seed, i).standard_normal((N, p)) for i in range(start, stop)])
        bs, _ = summarize_batch(model.colour(z))
        std, _ = batch_statistics(bs, [0.05], [TestKind.WEIGHTED])[TestKind.WEIGHTED]
        values.append(std)
    return np.concatenate(values)


def empirical_null_cdf(p, N, model, r, seed, x_points):
    """Empirical CDF of the standardized weighted statistic under H0 at ``x_points``."""
    values = np.sort(null_weighted_draws(p, N, model, r, seed))
    x = np.asarray(x_points, dtype=float)
    return np.searchsorted(values, x, side="right") / values.size


def edgeworth_quantile(alpha, rho, c, a1, a2, a3, n, lo=-10.0, hi=10.0):
    """Upper alpha point of the one-term Edgeworth CDF, found by bisection."""
    def g(x):
        return float(edgeworth_null_cdf(x, rho, c, a1, a2, a3, n)) - (1 - alpha)
    return bisect(g, lo, hi, xtol=1e-12)


# Wishart moments by Wick pairings ------------------------------------------------
#
# W = sum_{t=1}^n x_t x_t' with x_t ~ N(0, Sigma). A product of traces of W is a
# sum over pairings of the 2m "half-edges" (row/column index slots) of the m
# copies of W; each pairing contributes n^(number of sample-index cycles) times
# a product of tr Sigma^k over the trace cycles it induces.


def _pairings(items):
    if not items:
        yield []
        return
    a = items[0]
    for i in range(1, len(items)):
        for rest in _pairings(items[1:i] + items[i + 1:]):
            yield [(a, items[i])] + rest


def _cycle_lengths(size, first, second):
    seen = [False] * size
    lengths = []
    for s in range(size):
        if seen[s]:
            continue
        k, cur, use_first = 0, s, True
        while True:
            seen[cur] = True
            cur = first[cur] if use_first else second[cur]
            if not use_first:
                k += 1
            use_first = not use_first
            if cur == s and use_first:
                break
            seen[cur] = True
        lengths.append(k)
    return lengths


@lru_cache(maxsize=None)
def wishart_moment_polynomials(lam):
    """E[prod_k tr W^{lam_k}] as {mu: {power of n: integer coefficient}}.

    ``mu`` is a partition (descending tuple) standing for prod tr Sigma^{mu_j}.
    """
    lam = tuple(lam)
    m = sum(lam)
    sample_link, trace_link = {}, {}
    e = 0
    for k in lam:
        ws = list(range(e, e + k))
        for w in ws:
            sample_link[2 * w], sample_link[2 * w + 1] = 2 * w + 1, 2 * w
        for i, w in enumerate(ws):
            nxt = ws[(i + 1) % k]
            trace_link[2 * w + 1], trace_link[2 * nxt] = 2 * nxt, 2 * w + 1
        e += k
    table = defaultdict(lambda: defaultdict(int))
    for pairing in _pairings(list(range(2 * m))):
        match = {}
        for a, b in pairing:
            match[a], match[b] = b, a
        ncyc = len(_cycle_lengths(2 * m, sample_link, match))
        mu = tuple(sorted(_cycle_lengths(2 * m, trace_link, match), reverse=True))
        table[mu][ncyc] += 1
    return {mu: dict(c) for mu, c in table.items()}


def wishart_moment_table(n, partitions):
    """Numeric matrix M with E[p_lam(W)] = sum_mu M[lam, mu] p_mu(Sigma)."""
    partitions = [tuple(q) for q in partitions]
    M = np.zeros((len(partitions), len(partitions)))
    for i, lam in enumerate(partitions):
        for mu, coeffs in wishart_moment_polynomials(lam).items():
            M[i, partitions.index(mu)] = sum(v * float(n) ** k for k, v in coeffs.items())
    return M
