"""Short-interval prime counts and prime-gap conjecture scans."""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .sieve import default_sieve
from .weighted_sums import WeightParams, bound_envelope, nlogn_source, normalized_W


@dataclass(frozen=True)
class ScanRecord:
    x: int
    interval_count: int
    predicted: float
    ratio: float
    envelope_lo: float
    envelope_hi: float


def interval_scan(lam, xs, c=1.0, sieve=None):
    """Count primes in (x, floor(x + x^lam)] against x^lam / log x."""
    sieve = sieve or default_sieve()
    lo_env, hi_env = bound_envelope(WeightParams(lam, c))
    out = []
    for x in xs:
        x = int(x)
        if x < 2:
            raise ValueError(f"scan points must be >= 2, got {x}")
        top = int(math.floor(x + x**lam))
        n = sieve.count_interval(x, top)
        pred = x**lam / math.log(x)
        out.append(ScanRecord(x, int(n), pred, n / pred, lo_env, hi_env))
    return out


# -- conjecture checkers -----------------------------------------------------


class Conjecture(enum.Enum):
    LEGENDRE = "legendre"
    SIERPINSKI = "sierpinski"
    BROCARD = "brocard"
    ANDRICA = "andrica"
    OPPERMANN = "oppermann"


@dataclass
class ConjectureReport:
    """Outcome of one scan.

    ``min_margin`` is the tightest slack seen: the smallest prime count for
    the counting conjectures, the largest sqrt gap for Andrica. ``witness``
    is where it occurs.
    """

    conjecture: Conjecture
    range_checked: tuple
    counterexamples: list = field(default_factory=list)
    min_margin: float = math.inf
    witness: tuple = ()

    @property
    def ok(self):
        return not self.counterexamples


def _pi(sieve, xs):
    return sieve.pi_many(np.asarray(xs, dtype=np.int64))


def check_legendre(n_max, min_primes=2, sieve=None):
    """At least ``min_primes`` primes in (n^2, (n+1)^2) for 1 <= n <= n_max."""
    sieve = sieve or default_sieve()
    n = np.arange(1, n_max + 1, dtype=np.int64)
    counts = _pi(sieve, (n + 1) ** 2) - _pi(sieve, n**2)
    bad = np.flatnonzero(counts < min_primes)
    i = int(np.argmin(counts))
    return ConjectureReport(
        Conjecture.LEGENDRE,
        (1, n_max),
        [(int(n[j]), int(counts[j])) for j in bad],
        int(counts[i]),
        (int(n[i]),),
    )


def check_sierpinski(n_max, sieve=None):
    """Every row [(k-1)n+1, kn], k = 1..n, of the n x n table holds a prime."""
    sieve = sieve or default_sieve()
    bad = []
    best, where = math.inf, ()
    for n in range(2, n_max + 1):
        ends = _pi(sieve, np.arange(0, n * n + 1, n, dtype=np.int64))
        rows = np.diff(ends)
        for k in np.flatnonzero(rows == 0):
            bad.append((n, int(k) + 1))
        k = int(np.argmin(rows))
        if rows[k] < best:
            best, where = int(rows[k]), (n, k + 1)
    return ConjectureReport(Conjecture.SIERPINSKI, (2, n_max), bad, best, where)


def check_brocard(n_max, start=2, sieve=None):
    """At least four primes between p_n^2 and p_{n+1}^2 for start <= n <= n_max."""
    sieve = sieve or default_sieve()
    bound = max(30, int(n_max * (math.log(n_max + 2) + math.log(math.log(n_max + 3)) + 3)))
    p = sieve.primes_array(2, bound)
    while len(p) < n_max + 1:
        bound *= 2
        p = sieve.primes_array(2, bound)
    p = p[: n_max + 1]
    idx = np.arange(start, n_max + 1)  # 1-based prime index
    counts = _pi(sieve, p[idx] ** 2) - _pi(sieve, p[idx - 1] ** 2)
    bad = np.flatnonzero(counts < 4)
    i = int(np.argmin(counts))
    return ConjectureReport(
        Conjecture.BROCARD,
        (start, n_max),
        [(int(idx[j]), int(p[idx[j] - 1]), int(p[idx[j]]), int(counts[j])) for j in bad],
        int(counts[i]),
        (int(idx[i]), int(p[idx[i] - 1]), int(p[idx[i]])),
    )


def check_andrica(p_max, sieve=None):
    """sqrt(p_{n+1}) - sqrt(p_n) < 1 for consecutive primes below p_max."""
    sieve = sieve or default_sieve()
    p = sieve.primes_array(2, int(p_max))
    r = np.sqrt(p.astype(np.float64))
    d = np.diff(r)
    bad = np.flatnonzero(d >= 1.0)
    i = int(np.argmax(d))
    return ConjectureReport(
        Conjecture.ANDRICA,
        (2, int(p_max)),
        [(int(p[j]), int(p[j + 1]), float(d[j])) for j in bad],
        float(d[i]),
        (int(p[i]), int(p[i + 1])),
    )


def check_oppermann(n_max, sieve=None):
    """A prime in (n^2 - n, n^2) and in (n^2, n^2 + n) for 2 <= n <= n_max."""
    sieve = sieve or default_sieve()
    n = np.arange(2, n_max + 1, dtype=np.int64)
    sq = n * n
    at = _pi(sieve, sq)
    left = _pi(sieve, sq - 1) - _pi(sieve, sq - n)
    right = _pi(sieve, sq + n - 1) - at
    both = np.minimum(left, right)
    bad = np.flatnonzero(both < 1)
    i = int(np.argmin(both))
    return ConjectureReport(
        Conjecture.OPPERMANN,
        (2, n_max),
        [(int(n[j]), int(left[j]), int(right[j])) for j in bad],
        int(both[i]),
        (int(n[i]),),
    )


DEFAULT_RANGES = {
    Conjecture.LEGENDRE: 10**4,
    Conjecture.SIERPINSKI: 2000,
    Conjecture.BROCARD: 10**3,
    Conjecture.ANDRICA: 10**7,
    Conjecture.OPPERMANN: 10**4,
}

CHECKERS = {
    Conjecture.LEGENDRE: check_legendre,
    Conjecture.SIERPINSKI: check_sierpinski,
    Conjecture.BROCARD: check_brocard,
    Conjecture.ANDRICA: check_andrica,
    Conjecture.OPPERMANN: check_oppermann,
}


def run_conjecture(name, bound=None, sieve=None, **kw):
    conj = Conjecture(name) if not isinstance(name, Conjecture) else name
    return CHECKERS[conj](bound or DEFAULT_RANGES[conj], sieve=sieve, **kw)


# -- gap statistics ----------------------------------------------------------------


ERDOS_EDGES = np.append(np.arange(0.0, 3.0 + 1e-9, 0.25), np.inf)


@dataclass
class GapHistogram:
    edges: np.ndarray
    counts: np.ndarray


def normalized_gaps(p_max, sieve=None):
    """(p_{n+1} - p_n) / log p_n over consecutive primes up to p_max."""
    sieve = sieve or default_sieve()
    p = sieve.primes_array(2, int(p_max) + 1).astype(np.float64)
    return np.diff(p) / np.log(p[:-1])


def erdos_gap_histogram(p_max, edges=None, sieve=None):
    edges = ERDOS_EDGES if edges is None else np.asarray(edges, dtype=np.float64)
    g = normalized_gaps(p_max, sieve)
    counts, _ = np.histogram(g, bins=edges)
    return GapHistogram(edges, counts.astype(np.int64))


@dataclass(frozen=True)
class ToyRecord:
    n: int
    x: float
    ratio: float
    gap_ratio: float


def toy_sequence_scan(lam, c, n_max, points=None):
    """normalized_W of floor(n log n) at x_n = n log n and the gap ratio there."""
    params = WeightParams(lam, c)
    src = nlogn_source(n_max + 1)
    if points is None:
        points = [10**k for k in range(2, int(math.log10(n_max)) + 1)]
    out = []
    for n in points:
        if not 2 <= n <= n_max:
            raise ValueError(f"sequence index {n} outside [2, {n_max}]")
        x = n * math.log(n)
        x1 = (n + 1) * math.log(n + 1)
        ratio = normalized_W(params, src, x).ratio if x >= 2 else float("nan")
        out.append(ToyRecord(int(n), x, ratio, (x1 - x) / math.log(x)))
    return out


# -- analytic probes -----------------------------------------------------------


@dataclass
class ViolationReport:
    points: int
    violations: list
    max_ratio: float


def selberg_probe(n_grid=100, lo=2.0, hi=1e7, constant=2.0, sieve=None):
    """pi(x + y) - pi(x) <= S y / log y over a geometric n x n grid."""
    sieve = sieve or default_sieve()
    g = np.unique(np.floor(np.geomspace(lo, hi, n_grid)).astype(np.int64))
    X, Y = np.meshgrid(g, g, indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    counts = _pi(sieve, X + Y) - _pi(sieve, X)
    bound = constant * Y / np.log(Y.astype(np.float64))
    bad = np.flatnonzero(counts > bound)
    return ViolationReport(
        int(X.size),
        [(int(X[i]), int(Y[i]), int(counts[i])) for i in bad],
        float(np.max(counts / bound)),
    )


def chebyshev_probe(x_max=10**8, points=1000, sieve=None):
    """theta(x) <= log(4) x at ``points`` geometric samples in [2, x_max]."""
    sieve = sieve or default_sieve()
    xs = np.unique(np.floor(np.geomspace(2, x_max, points)).astype(np.int64))
    th = np.asarray(sieve.theta_many(xs), dtype=np.float64)
    lim = math.log(4.0) * xs
    bad = np.flatnonzero(th > lim)
    return ViolationReport(
        int(xs.size), [(int(xs[i]), float(th[i])) for i in bad], float(np.max(th / lim))
    )
