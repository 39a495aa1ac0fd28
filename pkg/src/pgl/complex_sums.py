"""Complex prime sums Phi, Psi, Xi, tau, T and the transform identities linking them.

Terms, with a = 1 - lam:

    Phi(s) = sum log p / p^s
    Psi(s) = sum log p / (p^lam exp(s (p^a - 1) / a))
    Xi(s)  = sum a log p / (p^lam exp(s (p^a - 1)))
    tau(s) = sum a log p / (p^lam exp(s p^a))
    T(s)   = sum a log p / (p^(2 - lam) exp(s p^a))

Every term is ``log p * g(p) * phase`` with g real, positive and decreasing.
Partial summation against theta with theta(t) < 1.01624 t bounds the tail
beyond P by ``C int_P^inf g + max(0, C P - theta(P)) g(P)``.
"""

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .accumulate import ComplexNeumaier, complex_block_sum
from .errors import CapacityError, DomainError, NumericError
from .sieve import default_sieve
from .special import exp_integral_E1, gamma_complex
from .weighted_sums import WeightParams, log_weight, substitution_g_inverse

THETA_CONST = 1.01624
IDENTITY_CUTOFF = 10**7
MELLIN_CUTOFF = 10**5


class Tag(enum.Enum):
    PHI = "phi"
    PSI = "psi"
    XI = "xi"
    TAU = "tau"
    T = "T"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        for t in cls:
            if t.value.lower() == str(name).lower():
                return t
        raise ValueError(f"unknown function tag {name!r}")


@dataclass
class ComplexSumResult:
    value: complex
    tail_bound: float
    cutoff: int
    tag: Tag = None
    s: complex = 0j
    terms: int = 0


def _check_domain(tag, s):
    if tag is Tag.PHI:
        if not s.real > 1.0:
            raise DomainError(f"Phi needs Re(s) > 1, got {s}")
    elif not s.real > 0.0:
        raise DomainError(f"{tag.value} needs Re(s) > 0, got {s}")


def _log_terms(tag, lam, s, p):
    """Complex log of each term at primes ``p`` (float array)."""
    a = 1.0 - lam
    lp = np.log(p)
    llp = np.log(lp)
    if tag is Tag.PHI:
        return llp - s * lp
    em1 = np.expm1(a * lp)  # p^a - 1
    if tag is Tag.PSI:
        return llp - lam * lp - s * (em1 / a)
    if tag is Tag.XI:
        return math.log(a) + llp - lam * lp - s * em1
    pa = np.exp(a * lp)
    if tag is Tag.TAU:
        return math.log(a) + llp - lam * lp - s * pa
    return math.log(a) + llp - (2.0 - lam) * lp - s * pa


def _log_majorant(tag, lam, sigma, P):
    """(log g(P), log int_P^inf g) for the decreasing majorant g."""
    a = 1.0 - lam
    lP = np.log(P)
    if tag is Tag.PHI:
        return -sigma * lP, (1.0 - sigma) * lP - math.log(sigma - 1.0)
    U = np.exp(a * lP)
    if tag is Tag.PSI:
        e = -sigma * np.expm1(a * lP) / a
        return -lam * lP + e, e - math.log(sigma)
    if tag is Tag.XI:
        e = -sigma * np.expm1(a * lP)
        return math.log(a) - lam * lP + e, e - math.log(sigma)
    if tag is Tag.TAU:
        return math.log(a) - lam * lP - sigma * U, -sigma * U - math.log(sigma)
    # T: int_P^inf g = int_U^inf u^-2 e^(-sigma u) du <= U^-2 e^(-sigma U) / sigma
    return math.log(a) - (2.0 - lam) * lP - sigma * U, -2.0 * a * lP - sigma * U - math.log(sigma)


def tail_bound(tag, lam, sigma, P, theta_P):
    """Bound on sum_{p > P} |term_p| given theta(P)."""
    P = np.asarray(P, dtype=np.float64)
    lg, lG = _log_majorant(tag, lam, sigma, P)
    slack = np.maximum(0.0, THETA_CONST * P - np.asarray(theta_P) * (1.0 - 1e-12))
    return THETA_CONST * np.exp(lG) + slack * np.exp(lg)


def required_cutoff(tag, lam, s, tol):
    """Lower estimate of the cutoff the tail bound needs (theta(P) taken as P)."""
    tag = Tag.parse(tag)
    s = complex(s)
    _check_domain(tag, s)

    def est(P):
        return float(tail_bound(tag, lam, s.real, P, P))

    lo = 2.0
    if est(lo) <= tol:
        return 2
    hi = 4.0
    while est(hi) > tol:
        lo, hi = hi, hi * hi
        if hi > 1e300:
            return math.inf
    for _ in range(200):
        m = math.sqrt(lo * hi)
        if est(m) > tol:
            lo = m
        else:
            hi = m
        if hi / lo < 1.0 + 1e-9:
            break
    return int(math.ceil(hi))


def _lam(params, tag):
    if tag is Tag.PHI:
        return 0.5 if params is None else params.lam
    if params is None:
        raise ValueError(f"{tag.value} needs WeightParams")
    return params.lam


def evaluate(tag, params, s, tol=1e-10, sieve=None, max_cutoff=None):
    """Sum the tag's terms up to the first prime where the tail bound is <= tol."""
    tag = Tag.parse(tag)
    s = complex(s)
    _check_domain(tag, s)
    if not tol > 0:
        raise ValueError("tol must be positive")
    sieve = sieve or default_sieve()
    lam = _lam(params, tag)
    budget = sieve.limit if max_cutoff is None else min(max_cutoff, sieve.limit)
    need = required_cutoff(tag, lam, s, tol)
    if need > budget:
        raise CapacityError(
            f"{tag.value}({s}) to tol {tol:g} needs primes up to ~{need:.3g}, budget {budget}",
            required=need,
        )
    flip = s.imag < 0
    sw = s.conjugate() if flip else s
    acc = ComplexNeumaier()
    theta = 0.0
    n = 0
    for chunk in sieve.prime_chunks(2, budget + 1):
        pf = chunk.astype(np.float64)
        th = theta + np.cumsum(np.log(pf))
        bounds = tail_bound(tag, lam, s.real, pf, th)
        hit = np.flatnonzero(bounds <= tol)
        stop = int(hit[0]) + 1 if hit.size else len(pf)
        terms = np.exp(_log_terms(tag, lam, sw, pf[:stop]))
        acc.add(complex_block_sum(terms))
        n += stop
        if hit.size:
            val = acc.value
            return ComplexSumResult(
                val.conjugate() if flip else val,
                float(bounds[stop - 1]),
                int(chunk[stop - 1]),
                tag,
                s,
                n,
            )
        theta = float(th[-1])
    raise CapacityError(
        f"{tag.value}({s}) tail still above {tol:g} at the budget {budget}", required=need
    )


def partial_sum(tag, params, s, cutoff, sieve=None):
    """Sum over p <= cutoff, with the certified bound on what was left out."""
    tag = Tag.parse(tag)
    s = complex(s)
    _check_domain(tag, s)
    sieve = sieve or default_sieve()
    lam = _lam(params, tag)
    flip = s.imag < 0
    sw = s.conjugate() if flip else s
    acc = ComplexNeumaier()
    n = 0
    for chunk in sieve.prime_chunks(2, int(cutoff) + 1):
        acc.add(complex_block_sum(np.exp(_log_terms(tag, lam, sw, chunk.astype(np.float64)))))
        n += len(chunk)
    val = acc.value
    tb = float(tail_bound(tag, lam, s.real, float(cutoff), sieve.theta(int(cutoff))))
    return ComplexSumResult(val.conjugate() if flip else val, tb, int(cutoff), tag, s, n)


# -- termwise identities ---------------------------------------------------------


@dataclass
class IdentityResult:
    name: str
    residual: float
    bound: float
    cutoff: int
    lhs: complex
    rhs: complex
    tails: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.residual <= self.bound


def _shared_cutoff(reqs, max_cutoff, sieve):
    need = max(required_cutoff(*r) for r in reqs)
    cap = min(max_cutoff, sieve.limit)
    return int(min(max(need, 3), cap))


def identity_xi_psi(params, s, tol=1e-10, sieve=None, max_cutoff=IDENTITY_CUTOFF):
    """|Xi(s) - (1-lam) Psi((1-lam) s)| over a shared prime range."""
    sieve = sieve or default_sieve()
    s = complex(s)
    a = params.alpha
    P = _shared_cutoff(
        [(Tag.XI, params.lam, s, tol), (Tag.PSI, params.lam, a * s, tol)], max_cutoff, sieve
    )
    xi = partial_sum(Tag.XI, params, s, P, sieve)
    psi = partial_sum(Tag.PSI, params, a * s, P, sieve)
    rhs = a * psi.value
    return IdentityResult(
        "xi_psi",
        abs(xi.value - rhs),
        2.0 * tol,
        P,
        xi.value,
        rhs,
        {"xi": xi.tail_bound, "psi": psi.tail_bound},
    )


def identity_xi_tau(params, s, tol=1e-10, sieve=None, max_cutoff=IDENTITY_CUTOFF):
    """|Xi(s) - exp(s) tau(s)| over a shared prime range."""
    sieve = sieve or default_sieve()
    s = complex(s)
    P = _shared_cutoff(
        [(Tag.XI, params.lam, s, tol), (Tag.TAU, params.lam, s, tol)], max_cutoff, sieve
    )
    xi = partial_sum(Tag.XI, params, s, P, sieve)
    tau = partial_sum(Tag.TAU, params, s, P, sieve)
    es = cmath.exp(s)
    rhs = es * tau.value
    return IdentityResult(
        "xi_tau",
        abs(xi.value - rhs),
        (1.0 + abs(es)) * tol,
        P,
        xi.value,
        rhs,
        {"xi": xi.tail_bound, "tau": tau.tail_bound},
    )


@dataclass
class SecondDifferenceResult:
    residual: float
    residual_half: float
    ratio: float
    bound: float
    cutoff: int
    h: float

    @property
    def ok(self):
        return self.residual <= self.bound


def _second_difference(params, s, h, P, sieve):
    vals = [partial_sum(Tag.T, params, s + k * h, P, sieve) for k in (-1, 0, 1)]
    tau = partial_sum(Tag.TAU, params, s, P, sieve)
    fd = (vals[0].value - 2.0 * vals[1].value + vals[2].value) / (h * h)
    tails = 4.0 * vals[0].tail_bound / (h * h) + tau.tail_bound
    return abs(fd - tau.value), tails


def identity_tau_Tpp(params, s, h=1e-3, tol=1e-10, sieve=None, max_cutoff=IDENTITY_CUTOFF):
    """Central second difference of T against tau, at step h and h/2.

    ``ratio`` is residual(h) / residual(h/2), about 4 for a second-order
    error. ``bound`` is C h^2 + 6 tol / h^2 with C fitted from the two
    steps.
    """
    sieve = sieve or default_sieve()
    s = complex(s)
    if not s.real > 2 * h > 0:
        raise DomainError("need Re(s) > 2h > 0")
    if h < 1e-6:
        raise NumericError("step too small: cancellation dominates", {"h": h})
    P = _shared_cutoff(
        [(Tag.TAU, params.lam, s, tol), (Tag.T, params.lam, s - h, tol * h * h)],
        max_cutoff,
        sieve,
    )
    r1, t1 = _second_difference(params, s, h, P, sieve)
    r2, _ = _second_difference(params, s, h / 2, P, sieve)
    ratio = r1 / r2 if r2 > 0 else math.inf
    C = max(r1, 4.0 * r2) / (h * h)
    return SecondDifferenceResult(
        r1, r2, ratio, C * h * h + 6.0 * tol / (h * h) + t1, P, h
    )


# -- Laplace transform -------------------------------------------------------------


@dataclass
class LaplaceResult:
    lhs: complex
    rhs: complex
    residual: float
    x_max: float
    max_ratio: float
    truncation_bound: float


def laplace_integrand(params, x, sieve=None):
    """W(g(x)) / exp(c g(x)^(1-lam)) - 1 at a single x >= 0."""
    sieve = sieve or default_sieve()
    t = (1.0 + params.alpha * x) ** (1.0 / params.alpha)
    if t < 2.0:
        return -1.0
    p = sieve.primes_array(2, int(math.floor(t)) + 1).astype(np.float64)
    lw = np.array([log_weight(params, v) for v in p])
    logW = float(np.logaddexp.reduce(lw))
    return math.exp(logW - params.c * (1.0 + params.alpha * x)) - 1.0


def laplace_lhs(params, s, tol=1e-8, sieve=None, ratio_cap=2.0, nodes=10):
    """Numerical Laplace transform of the normalised-W integrand.

    The x range is split wherever g(x) crosses a prime, so the integrand is
    smooth on each piece; truncation at x_max costs at most
    (ratio_cap + 1) exp(-Re(s) x_max) / Re(s).
    """
    params.require_step2()
    sieve = sieve or default_sieve()
    s = complex(s)
    if not s.real > 0:
        raise DomainError("Laplace transform needs Re(s) > 0")
    sigma = s.real
    a = params.alpha
    xi, wi = np.polynomial.legendre.leggauss(nodes)
    for _ in range(4):
        x_max = math.log((ratio_cap + 1.0) / (sigma * tol)) / sigma
        t_max = (1.0 + a * x_max) ** (1.0 / a)
        top = int(math.floor(t_max)) + 1
        p = sieve.primes_array(2, top).astype(np.float64) if top > 2 else np.zeros(0)
        q = np.expm1(a * np.log(p)) / a  # g^-1(p)
        lp = np.log(p)
        lw = math.log(params.c * a) + np.log(lp) + params.c * np.exp(a * lp) - params.lam * lp
        logW = np.logaddexp.accumulate(lw)
        edges = np.concatenate(([0.0], q, [x_max]))
        logWp = np.concatenate(([-np.inf], logW))
        lo, hi = edges[:-1], edges[1:]
        keep = hi > lo
        lo, hi, logWp = lo[keep], hi[keep], logWp[keep]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        acc = ComplexNeumaier()
        max_ratio = 0.0
        step = 1 << 16
        for i in range(0, len(lo), step):
            sl = slice(i, i + step)
            xs = mid[sl, None] + half[sl, None] * xi[None, :]
            ratio = np.exp(logWp[sl, None] - params.c * (1.0 + a * xs))
            max_ratio = max(max_ratio, float(ratio.max()))
            vals = (ratio - 1.0) * np.exp(-s * xs) * (half[sl, None] * wi[None, :])
            acc.add(complex_block_sum(vals.ravel()))
        if max_ratio <= ratio_cap:
            break
        ratio_cap = 1.5 * max_ratio
    trunc = (ratio_cap + 1.0) * math.exp(-sigma * x_max) / sigma
    return acc.value, x_max, max_ratio, trunc


def laplace_rhs(params, s, tol=1e-10, sieve=None):
    """c(1-lam) / (c(1-lam) + s) Psi(s) - 1/s."""
    s = complex(s)
    k = params.c * params.alpha
    psi = evaluate(Tag.PSI, params, s, tol, sieve)
    return k / (k + s) * psi.value - 1.0 / s


def laplace_check(params, s, tol=1e-8, sieve=None):
    lhs, x_max, mr, trunc = laplace_lhs(params, s, tol, sieve)
    rhs = laplace_rhs(params, s, tol * 1e-2, sieve)
    return LaplaceResult(lhs, rhs, abs(lhs - rhs), x_max, mr, trunc)


# -- Mellin transform ------------------------------------------------------------


def mellin_rhs(params, z, tol=1e-10, sieve=None, max_cutoff=None):
    """(1-lam) Gamma(z) Phi(1 + (1-lam)(z + 1)) with Phi certified to tol."""
    z = complex(z)
    if not z.real > 0:
        raise DomainError("Mellin closed form needs Re(z) > 0")
    g = gamma_complex(z)
    w = 1.0 + params.alpha * (z + 1.0)
    phi = evaluate(Tag.PHI, params, w, tol, sieve, max_cutoff)
    return params.alpha * g * phi.value, params.alpha * abs(g) * phi.tail_bound


def mellin_numeric(params, z, cutoff=MELLIN_CUTOFF, sieve=None, panels=600, nodes=16):
    """int_0^inf T_P(s) s^(z-1) ds for T restricted to p <= cutoff.

    Uses s = e^u on the whole line; the u < u_min piece is bounded by
    T_P(0) e^(u_min Re z) / Re z and kept below 1e-13.
    """
    sieve = sieve or default_sieve()
    z = complex(z)
    if not z.real > 0:
        raise DomainError("Mellin transform needs Re(z) > 0")
    a = params.alpha
    p = sieve.primes_array(2, int(cutoff) + 1).astype(np.float64)
    lp = np.log(p)
    coef = a * lp * np.exp((params.lam - 2.0) * lp)
    rate = np.exp(a * lp)
    T0 = float(coef.sum())
    u_min = math.log(1e-13 * z.real / T0) / z.real
    u_max = math.log(745.0 / rate[0])
    edges = np.linspace(u_min, u_max, panels + 1)
    xi, wi = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    u = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
    w = (half[:, None] * wi[None, :]).ravel()
    s = np.exp(u)
    Ts = np.empty_like(s)
    step = max(1, (1 << 22) // max(1, len(p)))
    for i in range(0, len(s), step):
        Ts[i : i + step] = np.exp(-np.outer(s[i : i + step], rate)) @ coef
    vals = Ts * np.exp(u * z) * w
    return complex_block_sum(vals)


def mellin_truncated_rhs(params, z, cutoff=MELLIN_CUTOFF, sieve=None):
    z = complex(z)
    w = 1.0 + params.alpha * (z + 1.0)
    phi = partial_sum(Tag.PHI, params, w, cutoff, sieve)
    g = gamma_complex(z)
    return params.alpha * g * phi.value, params.alpha * abs(g) * phi.tail_bound


@dataclass
class MellinResult:
    z: complex
    numeric: complex
    closed_form: complex
    residual: float
    cutoff: int
    tail_bound: float


def mellin_check(params, z, cutoff=MELLIN_CUTOFF, sieve=None):
    num = mellin_numeric(params, z, cutoff, sieve)
    cf, tb = mellin_truncated_rhs(params, z, cutoff, sieve)
    return MellinResult(complex(z), num, cf, abs(num - cf), int(cutoff), tb)


# -- singular part of tau ----------------------------------------------------------


def tau_singular_part(s):
    """exp(-s)/s, the second derivative of exp(-s) - s Gamma(0, s)."""
    s = complex(s)
    if not s.real > 0:
        raise DomainError("needs Re(s) > 0")
    return cmath.exp(-s) / s


def _richardson_derivative(f, s, h):
    def d(hh):
        return (f(s + hh) - f(s - hh)) / (2.0 * hh)

    return (4.0 * d(h / 2) - d(h)) / 3.0


def tau_singular_checks(s, h=1e-4):
    """Residuals of the two derivative links through E1.

    d/ds[exp(-s) - s E1(s)] = -E1(s) and d/ds[-E1(s)] = exp(-s)/s.
    """
    s = complex(s)
    first = _richardson_derivative(lambda t: cmath.exp(-t) - t * exp_integral_E1(t), s, h)
    second = _richardson_derivative(lambda t: -exp_integral_E1(t), s, h)
    return abs(first + exp_integral_E1(s)), abs(second - tau_singular_part(s))


def psi_first_term(params, s):
    """The p = 2 term of Psi, for single-term checks."""
    s = complex(s)
    return math.log(2.0) / (2.0**params.lam * cmath.exp(s * substitution_g_inverse(params, 2.0)))


__all__ = [
    "Tag",
    "ComplexSumResult",
    "WeightParams",
    "evaluate",
    "partial_sum",
    "tail_bound",
    "required_cutoff",
    "identity_xi_psi",
    "identity_xi_tau",
    "identity_tau_Tpp",
    "laplace_lhs",
    "laplace_rhs",
    "laplace_check",
    "laplace_integrand",
    "mellin_rhs",
    "mellin_numeric",
    "mellin_check",
    "tau_singular_part",
    "tau_singular_checks",
]
