"""Weight function w, its cumulative sum W and related closed forms.

Everything cumulative is reported as the ratio ``W(x) / exp(c x^(1-lam))``
and computed in log space; raw W overflows once ``c x^(1-lam)`` passes ~709.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .accumulate import Neumaier, block_sum
from .sieve import default_sieve

EXP_MAX = 709.782712893384  # log(float max)
EXP_FLOOR = -745.0  # exp() is exactly 0.0 below this


@dataclass(frozen=True)
class WeightParams:
    lam: float
    c: float

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam}")
        if not self.c > 0.0:
            raise ValueError(f"c must be positive, got {self.c}")

    @property
    def alpha(self):
        """1 - lambda."""
        return 1.0 - self.lam

    @property
    def c_max(self):
        return 2.0 / (1.0 - self.lam)

    def require_step2(self):
        """Reject c >= 2/(1-lam), the range where the integral criterion is not claimed."""
        if not self.c < self.c_max:
            raise ValueError(
                f"c={self.c} must be below 2/(1-lambda)={self.c_max} for this operation"
            )
        return self


def weight(params, x):
    """w(x) = c(1-lam) log(x) exp(c x^(1-lam)) / x^lam."""
    if x <= 0:
        raise ValueError(f"weight needs x > 0, got {x}")
    expo = params.c * x**params.alpha
    if expo > EXP_MAX:
        raise OverflowError(f"exp({expo}) overflows; use log_weight")
    return params.c * params.alpha * math.log(x) * math.exp(expo) / x**params.lam


def log_weight(params, x):
    if x <= 1:
        raise ValueError(f"log_weight needs x > 1, got {x}")
    lx = math.log(x)
    return (
        math.log(params.c * params.alpha)
        + math.log(lx)
        + params.c * x**params.alpha
        - params.lam * lx
    )


def _log_weight_shifted(params, a, x):
    """log w(a) - c x^(1-lam), vectorised over ``a`` (all > 1)."""
    a = np.asarray(a, dtype=np.float64)
    la = np.log(a)
    return (
        math.log(params.c * params.alpha)
        + np.log(la)
        - params.lam * la
        + params.c * (a**params.alpha - float(x) ** params.alpha)
    )


def dlog_weight(params, x):
    """Derivative of log w: 1/(x log x) + c(1-lam) x^-lam - lam/x."""
    return 1.0 / (x * math.log(x)) + params.c * params.alpha * x**-params.lam - params.lam / x


def increasing_threshold(params, samples=4000):
    """Smallest x0 > 1 with w increasing on [x0, inf).

    Found by bisection on the sign of x * (log w)'(x); for x above
    (lam / (c(1-lam)))^(1/(1-lam)) the sign is always positive.
    """

    def g(x):
        return 1.0 / math.log(x) + params.c * params.alpha * x**params.alpha - params.lam

    hi = max(math.e, (params.lam / (params.c * params.alpha)) ** (1.0 / params.alpha))
    grid = np.exp(np.linspace(math.log1p(1e-9), math.log(hi), samples))
    vals = np.array([g(t) for t in grid])
    bad = np.flatnonzero(vals <= 0)
    if bad.size == 0:
        return 1.0
    a, b = grid[bad[-1]], grid[min(bad[-1] + 1, samples - 1)]
    for _ in range(200):
        m = 0.5 * (a + b)
        if g(m) <= 0:
            a = m
        else:
            b = m
        if b - a <= 1e-14 * b:
            break
    return b


def substitution_g(params, x):
    """g(x) = [1 + (1-lam) x]^(1/(1-lam)); maps [0, inf) onto [1, inf)."""
    if x < 0:
        raise ValueError(f"g is defined for x >= 0, got {x}")
    return (1.0 + params.alpha * x) ** (1.0 / params.alpha)


def substitution_g_inverse(params, t):
    if t < 1:
        raise ValueError(f"g^-1 is defined for t >= 1, got {t}")
    return (t**params.alpha - 1.0) / params.alpha


def weight_integral(params, x):
    """Closed form of the integral of w(t)/log t over [2, x]."""
    if x < 2:
        raise ValueError(f"weight_integral needs x >= 2, got {x}")
    expo = params.c * x**params.alpha
    if expo > EXP_MAX:
        raise OverflowError(f"exp({expo}) overflows")
    return math.exp(expo) - math.exp(params.c * 2.0**params.alpha)


def bound_envelope(params):
    """(liminf, limsup) envelope for the normalised short-interval count."""
    k = params.c * params.alpha
    return -math.expm1(-k) / k, math.expm1(k) / k


# -- sequence sources ------------------------------------------------------


class PrimeSource:
    """The primes, served by a :class:`~pgl.sieve.Sieve`."""

    name = "primes"

    def __init__(self, sieve=None):
        self.sieve = sieve or default_sieve()

    def chunks(self, lo, hi):
        yield from self.sieve.prime_chunks(int(lo), int(hi))

    def count_below(self, a):
        return self.sieve.pi(int(a) - 1) if a > 2 else 0


class ArraySource:
    """An explicit strictly increasing sequence of positive integers."""

    name = "array"

    def __init__(self, values, name=None):
        v = np.asarray(values, dtype=np.int64)
        if v.ndim != 1:
            raise ValueError("sequence must be one-dimensional")
        if v.size and (v[0] < 1 or np.any(np.diff(v) <= 0)):
            raise ValueError("sequence must be strictly increasing positive integers")
        self.values = v
        if name:
            self.name = name

    def chunks(self, lo, hi, step=1 << 20):
        v = self.values
        a = int(np.searchsorted(v, lo, side="left"))
        b = int(np.searchsorted(v, hi, side="left"))
        for i in range(a, b, step):
            yield v[i : min(i + step, b)]

    def count_below(self, a):
        return int(np.searchsorted(self.values, a, side="left"))


def nlogn_values(n_max):
    """floor(n log n) for n = 2..n_max (strictly increasing from n = 2)."""
    n = np.arange(2, n_max + 1, dtype=np.float64)
    return np.floor(n * np.log(n)).astype(np.int64)


def nlogn_source(n_max):
    return ArraySource(nlogn_values(n_max), name="nlogn")


# -- normalised cumulative sum ----------------------------------------------


@dataclass
class NormalizedSum:
    x: float
    ratio: float
    terms_used: int
    max_term_log: float
    dropped: int = 0
    dropped_bound: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def log_W(self):
        """log W(x); finite even where W itself would overflow."""
        if self.ratio == 0.0:
            return -math.inf
        return math.log(self.ratio) + self.extra.get("scale", 0.0)


def _skip_below(params, x):
    """Elements below the returned value contribute exp(< -745) and are dropped."""
    scale = params.c * float(x) ** params.alpha
    target = scale + EXP_FLOOR
    x0 = max(increasing_threshold(params), 2.0)
    grid = np.exp(np.linspace(math.log(2.0), math.log(max(x0, 2.0)) + 1e-12, 256))
    head = max(log_weight(params, t) for t in grid)
    # keep a margin for the sampled maximum on the non-monotone stretch
    if head > target - 5.0 or x <= x0:
        return 2
    lo, hi = x0, float(x)
    if log_weight(params, hi) < target:
        return int(x) + 1
    for _ in range(200):
        m = 0.5 * (lo + hi)
        if log_weight(params, m) < target:
            lo = m
        else:
            hi = m
        if hi - lo < 0.5:
            break
    return max(2, int(math.floor(lo)))


def normalized_W(params, source, x):
    """W_A(x) / exp(c x^(1-lam)) for the sequence ``source``, in log space.

    Terms below exp(-745) are dropped; their number and the bound
    ``count * exp(-745)`` are reported.
    """
    if x < 2:
        raise ValueError(f"normalized_W needs x >= 2, got {x}")
    start = _skip_below(params, x)
    acc = Neumaier()
    used = 0
    dropped = source.count_below(start) if start > 2 else 0
    max_log = -math.inf
    for chunk in source.chunks(max(start, 2), int(math.floor(x)) + 1):
        chunk = chunk[chunk > 1]  # w(1) = 0
        if chunk.size == 0:
            continue
        e = _log_weight_shifted(params, chunk, x)
        keep = e >= EXP_FLOOR
        dropped += int(chunk.size - np.count_nonzero(keep))
        if not keep.any():
            continue
        e = e[keep]
        max_log = max(max_log, float(e.max()))
        acc.add(block_sum(np.exp(e)))
        used += int(e.size)
    return NormalizedSum(
        x=float(x),
        ratio=acc.value,
        terms_used=used,
        max_term_log=max_log,
        dropped=dropped,
        dropped_bound=dropped * math.exp(EXP_FLOOR),
        extra={"scale": params.c * float(x) ** params.alpha},
    )


def ratio_profile(params, source, xs):
    """normalized_W at each x; the maximum ratio is the empirical K."""
    return [normalized_W(params, source, x) for x in xs]


def salat_znam_ratio(omega, x, sieve=None):
    """sum_{p<=x} p^omega divided by x^(1+omega) / ((1+omega) log x)."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    if x < 2:
        raise ValueError("x must be at least 2")
    sieve = sieve or default_sieve()
    lx = math.log(x)
    acc = Neumaier()
    for chunk in sieve.prime_chunks(2, int(math.floor(x)) + 1):
        # p^w / x^(1+w), never overflows
        acc.add(block_sum(np.exp(omega * np.log(chunk) - (1.0 + omega) * lx)))
    return acc.value * (1.0 + omega) * lx
