"""Numeric probes of the short-interval limit lemmas and inequality windows.

Limits are sampled along a geometric ladder and the deviation from the
claimed value is recorded; nothing here asserts a limit is reached.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericError
from .weighted_sums import WeightParams

LADDER_31 = (1e3, 1e6, 1e9)
LADDER_INTEGRAL = (1e4, 1e6, 1e8)
TEST_VALUES = (0.5, 1.0, 1.5, 1.9)


@dataclass
class LimitProbe:
    lemma: str
    params: dict
    sample_points: tuple
    values: tuple
    target: float
    deviations: tuple = field(init=False)

    def __post_init__(self):
        xs = tuple(float(x) for x in self.sample_points)
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("sample ladder must be strictly increasing")
        self.sample_points = xs
        self.values = tuple(float(v) for v in self.values)
        self.deviations = tuple(abs(v - self.target) for v in self.values)
        if not all(math.isfinite(d) for d in self.deviations):
            raise NumericError(f"non-finite deviation in {self.lemma}", {"values": self.values})

    @property
    def strictly_decreasing(self):
        d = self.deviations
        return all(b < a for a, b in zip(d, d[1:]))

    def rows(self):
        """(lemma, params, x, value, target, deviation) per ladder point."""
        ps = ";".join(f"{k}={v}" for k, v in self.params.items())
        return [
            (self.lemma, ps, x, v, self.target, d)
            for x, v, d in zip(self.sample_points, self.values, self.deviations)
        ]


def power_shift(x, eps, lam):
    """(x + eps x^lam)^(1-lam) - x^(1-lam) without cancellation."""
    a = 1.0 - lam
    if x == 0:
        return 0.0
    r = eps * x ** (lam - 1.0)
    if r <= -1.0:
        raise DomainError(f"x + eps x^lam must be positive (x={x}, eps={eps})")
    return x**a * math.expm1(a * math.log1p(r))


def lemma31_probe(epsilon, lam, ladder=LADDER_31):
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    vals = [power_shift(x, epsilon, lam) for x in ladder]
    return LimitProbe(
        "3.1", {"epsilon": epsilon, "lambda": lam}, tuple(ladder), vals, epsilon * (1.0 - lam)
    )


def _scaled_weight_integral(params, lo, hi, x):
    """int_lo^hi w(t) dt / exp(c x^(1-lam)), integrand kept in log space."""
    if hi <= lo:
        return 0.0
    a = params.alpha
    xa = x**a
    k = math.log(params.c * a)

    def f(r):
        t = lo + (hi - lo) * r
        lt = math.log(t)
        # c (t^a - x^a), formed relative to x
        d = params.c * xa * math.expm1(a * math.log1p((t - x) / x))
        return math.exp(k + math.log(lt) - params.lam * lt + d)

    val, err = integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200)
    if err > 1e-9 * max(abs(val), 1e-300):
        raise NumericError("window quadrature did not converge", {"x": x, "error": err})
    return val * (hi - lo)


def lemma_integral_probes(scale, params, ladder=LADDER_INTEGRAL):
    """Probes of the two window-integral limits.

    With u = scale * x^lam / log x the first window is [x, x + u], target
    scale * c(1-lam); the second is [x + x^lam - u, x + x^lam], target
    scale * c(1-lam) exp(c(1-lam)).
    """
    lam = params.lam
    k = params.c * params.alpha
    up, down = [], []
    for x in ladder:
        u = scale * x**lam / math.log(x)
        top = x + x**lam
        if x + u <= 1.0 or top - u <= 1.0:
            raise DomainError(f"window leaves (1, inf) at x={x}")
        up.append(math.copysign(_scaled_weight_integral(params, *sorted((x, x + u)), x), u))
        down.append(math.copysign(_scaled_weight_integral(params, *sorted((top - u, top)), x), u))
    p = {"alpha": scale, "lambda": lam, "c": params.c}
    return (
        LimitProbe("3.2", p, tuple(ladder), up, scale * k),
        LimitProbe("3.3", p, tuple(ladder), down, scale * k * math.exp(k)),
    )


# -- inequality windows -------------------------------------------------------


def _series(coef, x, terms=40):
    """sum_{k>=1} coef^k x^(k-1) / (k+1)!."""
    total = 0.0
    term = coef / 2.0
    for k in range(1, terms):
        total += term
        term *= coef * x / (k + 2)
        if abs(term) < 1e-18 * abs(total):
            break
    return total


def b_margin(b, x):
    """(1-x)/(1+x) - (1 - (1-e^{-bx})/(bx))/x; positive iff the b inequality holds."""
    if b * x < 1.0:
        lhs = -_series(-b, x)
    else:
        lhs = (1.0 + math.expm1(-b * x) / (b * x)) / x
    return (1.0 - x) / (1.0 + x) - lhs


def d_margin(d, x):
    """1 - ((e^{dx}-1)/(dx) - 1)/x; positive iff the d inequality holds."""
    if d * x < 1.0:
        lhs = _series(d, x)
    else:
        lhs = (math.expm1(d * x) / (d * x) - 1.0) / x
    return 1.0 - lhs


def lemma_b_d_window(value, which="b", samples=64, iters=80):
    """Largest delta (by bisection) with the inequality true at 64 points in (0, delta)."""
    if not 0.0 < value < 2.0:
        raise ValueError("argument must lie in (0, 2)")
    margin = {"b": b_margin, "d": d_margin}[which]
    k = np.arange(1, samples + 1) / (samples + 1.0)

    def holds(delta):
        return all(margin(value, float(delta * t)) > 0.0 for t in k)

    lo, hi = 0.0, 1.0
    while holds(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            return lo
    for _ in range(iters):
        m = 0.5 * (lo + hi)
        if holds(m):
            lo = m
        else:
            hi = m
    # step back from the crossing so the margin is not a rounding artefact
    return lo * (1.0 - 1e-9)


# -- monotone bracket functions ----------------------------------------------


def h1(x, eps, lam):
    return power_shift(x, eps, lam)


def h2(x, eps, lam):
    """x^(1-lam) - (x - eps x^lam)^(1-lam) on {0} u [eps^(1/(1-lam)), inf)."""
    a = 1.0 - lam
    if x == 0:
        return 0.0
    if x < eps ** (1.0 / a) * (1.0 - 1e-15):
        raise DomainError(f"x={x} outside the domain of h2")
    r = eps * x ** (lam - 1.0)
    if r >= 1.0:
        return x**a
    return -(x**a) * math.expm1(a * math.log1p(-r))


@dataclass
class HProbeReport:
    epsilon: float
    lam: float
    x_grid: tuple
    h1: tuple
    h2: tuple
    bound: float
    h1_increasing: bool
    h1_below: bool
    h2_decreasing: bool
    h2_above: bool

    @property
    def ok(self):
        return self.h1_increasing and self.h1_below and self.h2_decreasing and self.h2_above


def lemma_h_probes(epsilon, lam, x_grid=None):
    """h1 increasing below eps(1-lam) and h2 decreasing above it on a grid.

    The default grid is geometric from 1e-3 (h1) or the left edge of the h2
    domain up to 1e6. An explicit grid is used for both; 0 is allowed and
    skipped for h2.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    bound = epsilon * (1.0 - lam)
    edge = epsilon ** (1.0 / (1.0 - lam))
    if x_grid is None:
        g1 = np.concatenate(([0.0], np.geomspace(1e-3, 1e6, 200)))
        g2 = np.geomspace(edge, max(1e6, 1e3 * edge), 200)
    else:
        g1 = np.asarray(sorted(x_grid), dtype=np.float64)
        bad = [x for x in g1 if x != 0 and x < edge]
        if bad:
            raise DomainError(f"grid point {bad[0]} outside the domain of h2 (edge {edge})")
        g2 = g1[g1 > 0]
    v1 = np.array([h1(float(x), epsilon, lam) for x in g1])
    v2 = np.array([h2(float(x), epsilon, lam) for x in g2])
    return HProbeReport(
        epsilon,
        lam,
        tuple(g1),
        tuple(v1),
        tuple(v2),
        bound,
        bool(np.all(np.diff(v1) > 0)),
        bool(np.all(v1 < bound)),
        bool(np.all(np.diff(v2) < 0)),
        bool(np.all(v2 > bound)),
    )


def all_probes(params=None):
    """The default probe set: three limit lemmas on their ladders."""
    params = params or WeightParams(0.5, 1.0)
    out = [lemma31_probe(1.0, params.lam)]
    out.extend(lemma_integral_probes(1.0, params))
    return out
