"""Monte Carlo rejection rates over (eta, p, N, alpha) grids.

Each replicate of a cell draws its data from its own stream
``stream(seed, p, N, eta_code, replicate)``, so the counts a worker returns
depend only on which replicates it was handed. Replicates are processed in
fixed-size chunks, each chunk returns integer reject counts, and the counts are
summed. The result is therefore identical for any number of workers.

Within a replicate all enabled tests see the same dataset.
"""

from __future__ import annotations

import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import SpecValidationError
from .gauss import SigmaModel, stream, summarize_batch
from .location_tests import CriticalMode, TestKind, batch_statistics
from .power import flat_shift

CHUNK = 250
MU_MODES = ("null", "flat_shift", "custom")
CSV_COLUMNS = ("eta", "p", "N", "alpha", "test", "rate", "mc_se", "rejects", "r", "seed")
TEST_LABELS = {"hotelling": "T2", "dempster": "Dn", "weighted": "T(rho)"}


def default_sample_sizes(p):
    """N = 40 i + p for i = 1, ..., 10."""
    return [40 * i + p for i in range(1, 11)]


@dataclass
class ExperimentSpec:
    p: int
    N_list: list
    etas: list = field(default_factory=lambda: [0.2, 0.4, 0.6])
    alphas: list = field(default_factory=lambda: [0.01, 0.05, 0.10])
    replications: int = 10_000
    seed: int = 0
    mu_mode: str = "null"
    mu: list | None = None
    tests: list = field(default_factory=lambda: [k.value for k in TestKind])
    critical_mode: str = "cf"

    def problems(self):
        out = []

        def is_int(v):
            return isinstance(v, (int, np.integer)) and not isinstance(v, bool)

        def is_num(v):
            return isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)

        if not is_int(self.p) or self.p < 1:
            out.append(f"p: must be a positive integer, got {self.p!r}")
        p_ok = is_int(self.p) and self.p >= 1
        if not isinstance(self.N_list, (list, tuple)) or not self.N_list:
            out.append("N_list: must be a non-empty list")
        else:
            for i, N in enumerate(self.N_list):
                if not is_int(N):
                    out.append(f"N_list[{i}]: must be an integer, got {N!r}")
                elif p_ok and not N > self.p:
                    out.append(f"N_list[{i}]: N = {N} must exceed p = {self.p}")
                elif p_ok and N == self.p + 1 and "weighted" in list(self.tests or []):
                    out.append(f"N_list[{i}]: the weighted test needs N > p + 1 = {self.p + 1}")
                elif N < 6:
                    out.append(f"N_list[{i}]: N = {N} is below the minimum of 6")
        if not isinstance(self.etas, (list, tuple)) or not self.etas:
            out.append("etas: must be a non-empty list")
        else:
            for i, e in enumerate(self.etas):
                if not is_num(e) or not -1 < e < 1:
                    out.append(f"etas[{i}]: must lie in (-1, 1), got {e!r}")
        if not isinstance(self.alphas, (list, tuple)) or not self.alphas:
            out.append("alphas: must be a non-empty list")
        else:
            for i, a in enumerate(self.alphas):
                if not is_num(a) or not 0 < a < 1:
                    out.append(f"alphas[{i}]: must lie in (0, 1), got {a!r}")
        if not is_int(self.replications) or self.replications < 1:
            out.append(f"replications: must be a positive integer, got {self.replications!r}")
        if not is_int(self.seed) or self.seed < 0:
            out.append(f"seed: must be a non-negative integer, got {self.seed!r}")
        if self.mu_mode not in MU_MODES:
            out.append(f"mu_mode: must be one of {', '.join(MU_MODES)}, got {self.mu_mode!r}")
        elif self.mu_mode == "custom":
            if not isinstance(self.mu, (list, tuple)):
                out.append("mu: required as a list when mu_mode is custom")
            else:
                if p_ok and len(self.mu) != self.p:
                    out.append(f"mu: has length {len(self.mu)}, expected p = {self.p}")
                for i, v in enumerate(self.mu):
                    if not is_num(v) or not math.isfinite(v):
                        out.append(f"mu[{i}]: must be a finite number, got {v!r}")
        elif self.mu is not None:
            out.append(f"mu: only allowed when mu_mode is custom, not {self.mu_mode!r}")
        valid_tests = [k.value for k in TestKind]
        if not isinstance(self.tests, (list, tuple)) or not self.tests:
            out.append("tests: must be a non-empty list")
        else:
            for i, t in enumerate(self.tests):
                if t not in valid_tests:
                    out.append(f"tests[{i}]: unknown test {t!r}")
            if len(set(map(str, self.tests))) != len(self.tests):
                out.append("tests: duplicate entries")
        if self.critical_mode not in [m.value for m in CriticalMode]:
            out.append(f"critical_mode: must be 'normal' or 'cf', got {self.critical_mode!r}")
        return out

    def validate(self):
        problems = self.problems()
        if problems:
            raise SpecValidationError(problems)
        return self

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise SpecValidationError(["<root>: spec must be a JSON object"])
        known = {f for f in cls.__dataclass_fields__}
        problems = [f"{k}: unknown key" for k in data if k not in known]
        missing = [k for k in ("p", "N_list") if k not in data]
        problems += [f"{k}: required key missing" for k in missing]
        if problems:
            raise SpecValidationError(problems)
        return cls(**data).validate()

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecValidationError([f"<root>: invalid JSON ({exc})"]) from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ResultRow:
    eta: float
    p: int
    N: int
    alpha: float
    test: str
    rejects: int
    r: int
    seed: int

    @property
    def rate(self):
        return self.rejects / self.r

    @property
    def mc_se(self):
        return mc_se(self.rate, self.r)


def _fmt(x):
    return repr(float(x))


@dataclass
class ResultTable:
    rows: list
    metadata: dict = field(default_factory=dict)

    def select(self, **where):
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in where.items())]

    def rate(self, eta, N, alpha, test):
        (row,) = self.select(eta=eta, N=N, alpha=alpha, test=TestKind(test).value)
        return row.rate

    def to_csv(self):
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for r in self.rows:
            buf.write(",".join([_fmt(r.eta), str(r.p), str(r.N), _fmt(r.alpha), r.test,
                                _fmt(r.rate), _fmt(r.mc_se), str(r.rejects), str(r.r),
                                str(r.seed)]) + "\n")
        return buf.getvalue()

    def to_markdown(self, eta, p):
        """Rates for one (eta, p) pair: tests as rows within alpha blocks, N as columns."""
        rows = self.select(eta=eta, p=p)
        Ns = sorted({r.N for r in rows})
        alphas = sorted({r.alpha for r in rows})
        tests = [k.value for k in TestKind if any(r.test == k.value for r in rows)]
        cells = {(r.alpha, r.test, r.N): r.rate for r in rows}
        head = ["alpha", "test"] + [f"N={N}" for N in Ns]
        body = []
        for a in alphas:
            for j, t in enumerate(tests):
                label = f"{a:g}" if j == 0 else ""
                body.append([label, TEST_LABELS[t]] + [f"{cells[(a, t, N)]:.3f}" for N in Ns])
        widths = [max(len(line[i]) for line in [head] + body) for i in range(len(head))]

        def line(cols):
            return "| " + " | ".join(c.ljust(w) for c, w in zip(cols, widths)) + " |"

        out = [f"eta = {eta:g}, p = {p}", "", line(head),
               "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
        out += [line(b) for b in body]
        return "\n".join(out) + "\n"


def mc_se(rate, replications):
    """Binomial standard error sqrt(rate (1 - rate) / r)."""
    if not 0 <= rate <= 1:
        raise ValueError(f"rate must lie in [0, 1], got {rate!r}")
    if replications < 1:
        raise ValueError(f"replications must be >= 1, got {replications!r}")
    return math.sqrt(rate * (1 - rate) / replications)


def eta_code(eta):
    return int(round((float(eta) + 1.0) * 1e6))


def _count_chunk(task):
    """Reject counts[len(tests), len(alphas)] for replicates [start, stop) of one cell."""
    p, N, eta, mu, alphas, tests, critical_mode, seed, start, stop = task
    model = SigmaModel.ar1(p, eta)
    key = (p, N, eta_code(eta))
    z = np.stack([stream(seed, *key, i).standard_normal((N, p)) for i in range(start, stop)])
    X = model.colour(z)
    if mu is not None:
        X += np.asarray(mu)
    bs, _ = summarize_batch(X)
    stats = batch_statistics(bs, alphas, tests, critical_mode)
    counts = np.zeros((len(tests), len(alphas)), dtype=np.int64)
    for i, t in enumerate(tests):
        std, crit = stats[TestKind(t)]
        counts[i] = np.sum(std[None, :] >= crit, axis=1)
    return counts


def _cell_mean(spec, p, N):
    if spec.mu_mode == "null":
        return None
    if spec.mu_mode == "flat_shift":
        return flat_shift(p, N - 1)
    return np.asarray(spec.mu, dtype=float)


def run_experiment(spec, workers=1):
    """Rejection rates for every (eta, N, alpha, test) cell of ``spec``."""
    spec.validate()
    t0 = time.perf_counter()
    tests = [TestKind(t).value for t in spec.tests]
    alphas = [float(a) for a in spec.alphas]
    cells = [(float(eta), int(N)) for eta in spec.etas for N in spec.N_list]
    tasks, owners = [], []
    for ci, (eta, N) in enumerate(cells):
        mu = _cell_mean(spec, spec.p, N)
        for start in range(0, spec.replications, CHUNK):
            stop = min(start + CHUNK, spec.replications)
            tasks.append((spec.p, N, eta, mu, alphas, tests, spec.critical_mode,
                          spec.seed, start, stop))
            owners.append(ci)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_count_chunk, tasks))
    else:
        results = [_count_chunk(t) for t in tasks]
    totals = [np.zeros((len(tests), len(alphas)), dtype=np.int64) for _ in cells]
    for ci, counts in zip(owners, results):
        totals[ci] += counts
    rows = []
    for (eta, N), tot in zip(cells, totals):
        for ai, a in enumerate(alphas):
            for ti, t in enumerate(tests):
                rows.append(ResultRow(eta, spec.p, N, a, t, int(tot[ti, ai]),
                                      spec.replications, spec.seed))
    meta = {"spec": spec.to_dict(), "seed": spec.seed,
            "wall_time": time.perf_counter() - t0, "workers": workers}
    return ResultTable(rows, meta)


def run_asl(spec, workers=1):
    """Attained significance levels; ``spec.mu_mode`` must be "null"."""
    if spec.mu_mode != "null":
        raise SpecValidationError([f"mu_mode: run_asl needs 'null', got {spec.mu_mode!r}"])
    return run_experiment(spec, workers)


def run_power(spec, workers=1):
    """Empirical powers; ``spec.mu_mode`` must be "flat_shift" or "custom"."""
    if spec.mu_mode not in ("flat_shift", "custom"):
        raise SpecValidationError(
            [f"mu_mode: run_power needs 'flat_shift' or 'custom', got {spec.mu_mode!r}"])
    return run_experiment(spec, workers)
