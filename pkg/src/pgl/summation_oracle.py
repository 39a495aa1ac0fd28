"""Partial-summation oracle for prime sums.

For smooth f, sum_{p<=x} f(p) equals

    int_2^x f(t)/log t dt + eps(x) f(x) - int_2^x eps(t) f'(t) dt,

with eps = pi - li and li(x) = int_2^x dt/log t. The right-hand side only
needs pi at the breakpoints, so it checks any direct prime sum independently
of how that sum was accumulated.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .accumulate import block_sum
from .errors import NumericError
from .sieve import default_sieve

LOG2 = math.log(2.0)
EXACT_SPLIT_MAX = 10**5
BINS_ABOVE_SPLIT = 10**6


@dataclass(frozen=True)
class EpsilonRecord:
    x: float
    li: float
    epsilon: float
    rh_ratio: float


def li(x, rtol=1e-9):
    """Offset logarithmic integral, int_2^x dt/log t.

    Integrated as int_{log 2}^{log x} e^u/u du, which removes the steep
    region near t = 2.
    """
    if x < 2:
        raise ValueError(f"li needs x >= 2, got {x}")
    if x == 2:
        return 0.0
    val, err = integrate.quad(
        lambda u: math.exp(u) / u, LOG2, math.log(x), epsabs=0.0, epsrel=1e-12, limit=200
    )
    if err > rtol * max(1.0, abs(val)):
        raise NumericError("li quadrature did not converge", {"x": x, "value": val, "error": err})
    return val


def epsilon_profile(xs, sieve=None):
    sieve = sieve or default_sieve()
    out = []
    for x in xs:
        if x < 2:
            raise ValueError(f"epsilon_profile needs x >= 2, got {x}")
        L = li(x)
        eps = sieve.pi(int(math.floor(x))) - L
        out.append(EpsilonRecord(float(x), L, eps, abs(eps) / (math.sqrt(x) * math.log(x))))
    return out


def _gl(n):
    return np.polynomial.legendre.leggauss(n)


def _inv_log(t):
    return 1.0 / np.log(t)


def _li_nodes(a, b, nodes, li_a, xi, wi):
    """li at each GL node of every piece [a_k, b_k], given li(a_k)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    t = mid[:, None] + half[:, None] * xi[None, :]
    # inner rule on [a_k, t_ki]
    h2 = 0.5 * (t - a[:, None])
    tt = a[:, None, None] + h2[:, :, None] * (1.0 + xi[None, None, :])
    inner = np.sum(wi[None, None, :] * _inv_log(tt), axis=2) * h2
    return t, li_a[:, None] + inner


def eps_fprime_integral(fprime, x, sieve=None, nodes=12, exact_split_max=EXACT_SPLIT_MAX):
    """int_2^x eps(t) f'(t) dt.

    Up to ``exact_split_max`` the range is split at every prime, so pi is
    constant on each piece and Gauss-Legendre is exact to rounding for the
    smooth remainder. Above, bins of width x/10^6 use the midpoint rule.
    """
    sieve = sieve or default_sieve()
    xi, wi = _gl(nodes)
    if x <= exact_split_max:
        p = sieve.primes_array(2, int(math.floor(x)) + 1).astype(np.float64)
        edges = np.concatenate((p, [float(x)]))
        a, b = edges[:-1], edges[1:]
        keep = b > a
        counts = np.arange(1, len(p) + 1, dtype=np.float64)
        a, b, counts = a[keep], b[keep], counts[keep]
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        t = mid[:, None] + half[:, None] * xi[None, :]
        piece_li = half * np.sum(wi[None, :] * _inv_log(t), axis=1)
        li_a = np.concatenate(([0.0], np.cumsum(piece_li)[:-1]))
        t, li_t = _li_nodes(a, b, nodes, li_a, xi, wi)
        eps_t = counts[:, None] - li_t
        vals = half[:, None] * wi[None, :] * eps_t * fprime(t)
        return block_sum(vals.ravel())
    nb = BINS_ABOVE_SPLIT
    edges = np.linspace(2.0, float(x), nb + 1)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    t = mid[:, None] + half[:, None] * xi[None, :]
    piece_li = half * np.sum(wi[None, :] * _inv_log(t), axis=1)
    li_a = np.concatenate(([0.0], np.cumsum(piece_li)[:-1]))
    # li at the midpoint: left edge plus the first half of the bin
    hq = 0.5 * (mid - a)
    tq = a[:, None] + hq[:, None] * (1.0 + xi[None, :])
    li_mid = li_a + hq * np.sum(wi[None, :] * _inv_log(tq), axis=1)
    pi_mid = sieve.pi_many(np.floor(mid).astype(np.int64)).astype(np.float64)
    vals = (pi_mid - li_mid) * fprime(mid) * (b - a)
    return block_sum(vals)


def rs_rhs(f, fprime, x, sieve=None, rtol=1e-8, exact_split_max=EXACT_SPLIT_MAX):
    """Right-hand side of the partial-summation identity at x.

    ``f`` and ``fprime`` must accept numpy arrays.
    """
    if x < 2:
        raise ValueError(f"rs_rhs needs x >= 2, got {x}")
    sieve = sieve or default_sieve()
    # int_2^x f(t)/log t dt, with t = e^u
    first, err = integrate.quad(
        lambda u: float(f(np.array([math.exp(u)]))[0]) * math.exp(u) / u,
        LOG2,
        math.log(x),
        epsabs=0.0,
        epsrel=rtol * 1e-2,
        limit=2000,
    )
    if err > rtol * max(1e-300, abs(first)):
        raise NumericError(
            "first integral did not converge", {"x": x, "value": first, "error": err}
        )
    eps_x = sieve.pi(int(math.floor(x))) - li(x)
    fx = float(f(np.array([float(x)]))[0])
    second = eps_fprime_integral(fprime, x, sieve, exact_split_max=exact_split_max)
    return first + eps_x * fx - second


def direct_sum(f, x, sieve=None):
    """sum_{p<=x} f(p), accumulated per segment."""
    sieve = sieve or default_sieve()
    total = []
    for chunk in sieve.prime_chunks(2, int(math.floor(x)) + 1):
        total.append(block_sum(f(chunk.astype(np.float64))))
    return math.fsum(total)


# -- ready-made test functions -----------------------------------------------


def const_one():
    return (lambda t: np.ones_like(np.asarray(t, dtype=np.float64)),
            lambda t: np.zeros_like(np.asarray(t, dtype=np.float64)))


def log_fn():
    return np.log, lambda t: 1.0 / np.asarray(t, dtype=np.float64)


def power_fn(omega):
    return (lambda t: np.asarray(t, dtype=np.float64) ** omega,
            lambda t: omega * np.asarray(t, dtype=np.float64) ** (omega - 1.0))


def scaled_weight_fn(params, x):
    """w(t) / exp(c x^(1-lam)) and its derivative, overflow free for t <= x."""
    scale = params.c * float(x) ** params.alpha
    k = math.log(params.c * params.alpha)

    def f(t):
        t = np.asarray(t, dtype=np.float64)
        lt = np.log(t)
        return np.exp(k + np.log(lt) - params.lam * lt + params.c * t**params.alpha - scale)

    def fp(t):
        t = np.asarray(t, dtype=np.float64)
        lt = np.log(t)
        dlog = 1.0 / (t * lt) + params.c * params.alpha * t**-params.lam - params.lam / t
        return f(t) * dlog

    return f, fp
