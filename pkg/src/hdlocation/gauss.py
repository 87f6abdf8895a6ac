"""Multivariate normal sampling and sufficient statistics.

Random streams
--------------
Every draw comes from a Philox-4x64 counter-based generator keyed by a
:class:`numpy.random.SeedSequence` built from integer keys, e.g.
``stream(seed, cell, replicate)``. Streams for different keys are
statistically independent and can be created in any order, which is what lets
the simulation harness spread replications across processes while staying
bit-reproducible. Normal variates use numpy's ziggurat sampler
(``Generator.standard_normal``).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ModelError


class SigmaKind(str, Enum):
    IDENTITY = "identity"
    AR1 = "ar1"
    DENSE = "dense"


@dataclass(frozen=True, eq=False)
class SigmaModel:
    """Population covariance of the data-generating distribution.

    Use the constructors :meth:`identity`, :meth:`ar1` and :meth:`dense`
    rather than the raw initializer.
    """

    kind: SigmaKind
    p: int
    eta: float = 0.0
    matrix: np.ndarray | None = None
    _chol: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ModelError(f"dimension must be a positive integer, got {self.p!r}")
        if self.kind is SigmaKind.AR1 and not -1.0 < self.eta < 1.0:
            raise ModelError(f"AR(1) correlation must lie in (-1, 1), got {self.eta!r}")
        if self.kind is SigmaKind.DENSE:
            m = np.asarray(self.matrix, dtype=float)
            if m.shape != (self.p, self.p):
                raise ModelError(f"dense covariance must be {self.p}x{self.p}, got {m.shape}")
            scale = max(np.max(np.abs(m)), np.finfo(float).tiny)
            if np.max(np.abs(m - m.T)) > 1e-12 * scale:
                raise ModelError("dense covariance is not symmetric")
            try:
                chol = np.linalg.cholesky(m)
            except np.linalg.LinAlgError:
                raise ModelError("dense covariance is not positive definite") from None
            if not np.all(np.diag(chol) > 0):
                raise ModelError("dense covariance is not positive definite")
            object.__setattr__(self, "matrix", m)
            object.__setattr__(self, "_chol", chol)

    @classmethod
    def identity(cls, p):
        return cls(SigmaKind.IDENTITY, int(p))

    @classmethod
    def ar1(cls, p, eta):
        """Sigma = (eta^|i-j|)."""
        return cls(SigmaKind.AR1, int(p), eta=float(eta))

    @classmethod
    def dense(cls, matrix):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2:
            raise ModelError("dense covariance must be a 2-D array")
        return cls(SigmaKind.DENSE, m.shape[0], matrix=m)

    def covariance(self):
        if self.kind is SigmaKind.IDENTITY:
            return np.eye(self.p)
        if self.kind is SigmaKind.AR1:
            idx = np.arange(self.p)
            return self.eta ** np.abs(idx[:, None] - idx[None, :]).astype(float)
        return self.matrix.copy()

    def colour(self, z):
        """Map i.i.d. N(0, 1) rows ``z[..., N, p]`` to rows with covariance Sigma."""
        z = np.asarray(z, dtype=float)
        if self.kind is SigmaKind.IDENTITY or (self.kind is SigmaKind.AR1 and self.eta == 0.0):
            return z.copy()
        if self.kind is SigmaKind.AR1:
            # x_1 = z_1, x_k = eta x_{k-1} + sqrt(1 - eta^2) z_k
            x = np.empty_like(z)
            s = np.sqrt(1.0 - self.eta * self.eta)
            x[..., 0] = z[..., 0]
            for k in range(1, self.p):
                x[..., k] = self.eta * x[..., k - 1] + s * z[..., k]
            return x
        return z @ self._chol.T


def stream(seed, *key):
    """Independent generator for ``(seed, *key)``; all parts non-negative ints."""
    entropy = [int(seed), *(int(k) for k in key)]
    if any(e < 0 for e in entropy):
        raise ValueError(f"stream keys must be non-negative integers, got {entropy}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _as_generator(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(seed)


def sample(model, mu, N, seed):
    """Draw an N x p matrix of i.i.d. N_p(mu, Sigma) rows.

    ``seed`` is either an integer (mapped through :func:`stream`) or a ready
    :class:`numpy.random.Generator`.
    """
    if int(N) != N or N < 2:
        raise ValueError(f"sample size must be an integer >= 2, got {N!r}")
    mu = _shift_vector(mu, model.p)
    z = _as_generator(seed).standard_normal((int(N), model.p))
    return model.colour(z) + mu


def _shift_vector(mu, p):
    if mu is None:
        return np.zeros(p)
    mu = np.asarray(mu, dtype=float)
    if mu.ndim == 0:
        return np.full(p, float(mu))
    if mu.shape != (p,):
        raise ValueError(f"mean vector must have length {p}, got shape {mu.shape}")
    return mu


def trace_powers(S, kmax=4):
    """tr S, tr S^2, ..., tr S^kmax for symmetric S (batched over leading axes)."""
    if kmax not in (1, 2, 3, 4):
        raise ValueError(f"kmax must be one of 1..4, got {kmax!r}")
    S = np.asarray(S, dtype=float)
    out = [np.trace(S, axis1=-2, axis2=-1)]
    if kmax >= 2:
        S2 = S @ S
        out.append(np.trace(S2, axis1=-2, axis2=-1))
    # S and S^2 are symmetric, so tr(S^2 S) and tr(S^2 S^2) are elementwise sums
    if kmax >= 3:
        out.append(np.sum(S2 * S, axis=(-2, -1)))
    if kmax >= 4:
        out.append(np.sum(S2 * S2, axis=(-2, -1)))
    return tuple(out)


@dataclass
class SampleSummary:
    """Sufficient statistics of one dataset relative to a reference mean."""

    p: int
    N: int
    n: int
    mean: np.ndarray
    cov: np.ndarray
    trace_powers: tuple
    q_identity: float
    q_inverse: float | None
    notes: list = field(default_factory=list)


@dataclass
class BatchSummary:
    """Stacked statistics for B datasets of identical shape.

    ``q_inverse`` holds NaN where S was not positive definite (or p >= N).
    """

    p: int
    N: int
    n: int
    mean: np.ndarray  # (B, p)
    traces: tuple  # four arrays of shape (B,)
    q_identity: np.ndarray
    q_inverse: np.ndarray


def _check_data(X):
    X = np.asarray(X, dtype=float)
    if X.ndim < 2:
        raise ValueError("data must be an N x p matrix")
    if X.shape[-2] < 2:
        raise ValueError(f"need at least two observations, got N = {X.shape[-2]}")
    if not np.all(np.isfinite(X)):
        raise ValueError("data contain non-finite values")
    return X


def _spd_quadratic(S, d):
    """d' S^{-1} d via Cholesky; NaN where S is not numerically SPD."""
    B = S.shape[0]
    out = np.full(B, np.nan)
    try:
        L = np.linalg.cholesky(S)
        ok = np.ones(B, dtype=bool)
    except np.linalg.LinAlgError:
        L = np.zeros_like(S)
        ok = np.zeros(B, dtype=bool)
        for b in range(B):
            try:
                L[b] = np.linalg.cholesky(S[b])
                ok[b] = True
            except np.linalg.LinAlgError:
                pass
    ok &= np.all(np.diagonal(L, axis1=1, axis2=2) > 0, axis=1)
    if np.any(ok):
        y = np.linalg.solve(L[ok], d[ok][..., None])[..., 0]
        out[ok] = np.sum(y * y, axis=1)
    return out


def summarize_batch(X, mu0=None):
    """Summaries of a stack of datasets ``X[B, N, p]``."""
    X = _check_data(X)
    if X.ndim == 2:
        X = X[None]
    B, N, p = X.shape
    n = N - 1
    mu0 = _shift_vector(mu0, p)
    mean = X.mean(axis=1)
    Xc = X - mean[:, None, :]
    S = np.swapaxes(Xc, 1, 2) @ Xc / n
    d = mean - mu0
    q_identity = N * np.sum(d * d, axis=1)
    if p < N:
        q_inverse = N * _spd_quadratic(S, d)
    else:
        q_inverse = np.full(B, np.nan)
    return BatchSummary(p, N, n, mean, trace_powers(S, 4), q_identity, q_inverse), S


def summarize(data, mu0=None):
    """Reduce an N x p data matrix to a :class:`SampleSummary`."""
    X = _check_data(data)
    if X.ndim != 2:
        raise ValueError("summarize expects a single N x p matrix")
    bs, S = summarize_batch(X, mu0)
    notes = []
    q_inv = float(bs.q_inverse[0])
    if bs.p >= bs.N:
        notes.append(f"p = {bs.p} >= N = {bs.N}: S is singular, T^2 undefined")
        q_inv = None
    elif np.isnan(q_inv):
        notes.append("S is numerically singular: T^2 undefined")
        q_inv = None
    return SampleSummary(
        p=bs.p,
        N=bs.N,
        n=bs.n,
        mean=bs.mean[0],
        cov=S[0],
        trace_powers=tuple(float(t[0]) for t in bs.traces),
        q_identity=float(bs.q_identity[0]),
        q_inverse=q_inv,
        notes=notes,
    )


class CSVFormatError(ValueError):
    def __init__(self, path, line, message):
        self.path, self.line = path, line
        super().__init__(f"{path}, line {line}: {message}")


def read_csv(path, header=False):
    """Read a numeric N x p matrix; one observation per row."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if header and lineno == 1:
                continue
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise CSVFormatError(path, lineno, f"non-numeric field in {row!r}") from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise CSVFormatError(path, lineno, f"expected {width} columns, found {len(values)}")
            rows.append(values)
    if not rows:
        raise CSVFormatError(path, 1, "no data rows")
    return np.array(rows)


def write_csv(path, X, header=False):
    X = np.asarray(X, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"x{j + 1}" for j in range(X.shape[1])])
        for row in X:
            w.writerow([repr(float(v)) for v in row])
