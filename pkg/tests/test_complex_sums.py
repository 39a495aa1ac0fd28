import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pgl import complex_sums as cs
from pgl.complex_sums import Tag
from pgl.errors import CapacityError, DomainError, NumericError
from pgl.sieve import Sieve, simple_primes
from pgl.special import gamma_complex
from pgl.weighted_sums import WeightParams

HALF = WeightParams(0.5, 1.0)
PHI2 = 0.49309110936876446  # -P'(2), prime zeta derivative (mpmath)

mp.mp.dps = 40
SMALL_PRIMES = [int(p) for p in simple_primes(10**5)]


def mp_term(tag, lam, s, p):
    lam, p, s = mp.mpf(lam), mp.mpf(p), mp.mpc(s)
    a = 1 - lam
    lp = mp.log(p)
    if tag is Tag.PHI:
        return lp / p**s
    if tag is Tag.PSI:
        return lp / (p**lam * mp.exp(s * (p**a - 1) / a))
    if tag is Tag.XI:
        return a * lp / (p**lam * mp.exp(s * (p**a - 1)))
    if tag is Tag.TAU:
        return a * lp / (p**lam * mp.exp(s * p**a))
    return a * lp / (p ** (2 - lam) * mp.exp(s * p**a))


def mp_partial(tag, lam, s, cutoff):
    return complex(mp.fsum(mp_term(tag, lam, s, p) for p in SMALL_PRIMES if p <= cutoff))


def test_phi_at_two(sieve):
    r = cs.evaluate(Tag.PHI, None, 2, 1e-8, sieve)
    assert r.tail_bound <= 1e-8
    assert abs(r.value - PHI2) <= 1e-8
    assert r.value.imag == 0.0


def test_tau_against_high_precision(sieve):
    r = cs.evaluate(Tag.TAU, HALF, 1, 1e-10, sieve)
    assert r.tail_bound <= 1e-10
    # terms past 10^5 are below exp(-300)
    assert abs(r.value - mp_partial(Tag.TAU, 0.5, 1, 10**5)) <= 1e-10


@pytest.mark.parametrize("tag", list(Tag))
@pytest.mark.parametrize("s", [2.5, 1.5 + 2j, 3 - 1j])
def test_partial_sums_match_mpmath(sieve, tag, s):
    lam = 0.4
    got = cs.partial_sum(tag, WeightParams(lam, 1.0), s, 5000, sieve).value
    assert abs(got - mp_partial(tag, lam, s, 5000)) <= 1e-13 * max(1.0, abs(got))


@given(st.floats(0.05, 0.95), st.floats(0.1, 4.0), st.floats(-5, 5))
def test_psi_first_term(lam, a, b):
    p = WeightParams(lam, 1.0)
    s = complex(a, b)
    single = cs.partial_sum(Tag.PSI, p, s, 2).value
    ref = math.log(2) / (2**lam * cmath.exp(s * (2 ** (1 - lam) - 1) / (1 - lam)))
    assert single == pytest.approx(ref, rel=1e-13, abs=1e-300)
    assert cs.psi_first_term(p, s) == pytest.approx(ref, rel=1e-13, abs=1e-300)


def test_domain_errors(sieve):
    with pytest.raises(DomainError):
        cs.evaluate(Tag.PHI, None, 1.0, 1e-6, sieve)
    with pytest.raises(DomainError):
        cs.evaluate(Tag.TAU, HALF, -0.1 + 1j, 1e-6, sieve)
    with pytest.raises(ValueError):
        cs.evaluate(Tag.TAU, None, 1.0, 1e-6, sieve)


def test_capacity_error_names_required_cutoff():
    small = Sieve(limit=10**5)
    with pytest.raises(CapacityError) as info:
        cs.evaluate(Tag.PHI, None, 2, 1e-8, small)
    assert info.value.required > 10**7


@pytest.mark.parametrize("tag", list(Tag))
def test_conjugate_symmetry_bitwise(sieve, tag):
    s = 2.7 + 0.8j
    a = cs.evaluate(tag, HALF, s, 1e-9, sieve)
    b = cs.evaluate(tag, HALF, s.conjugate(), 1e-9, sieve)
    assert b.value == a.value.conjugate()
    assert a.cutoff == b.cutoff


@pytest.mark.parametrize("tag", list(Tag))
def test_tail_bound_soundness(sieve, tag):
    rng = np.random.default_rng(7)
    for _ in range(20):
        lam = float(rng.uniform(0.2, 0.8))
        sigma = float(rng.uniform(1.2 if tag is Tag.PHI else 0.3, 3.0))
        s = complex(sigma, rng.uniform(-4, 4))
        p = WeightParams(lam, 1.0)
        P = int(rng.integers(200, 20000))
        a = cs.partial_sum(tag, p, s, P, sieve)
        b = cs.partial_sum(tag, p, s, 2 * P, sieve)
        assert abs(b.value - a.value) <= a.tail_bound


def test_required_cutoff_is_monotone_in_tol():
    c1 = cs.required_cutoff(Tag.TAU, 0.5, 1.0, 1e-6)
    c2 = cs.required_cutoff(Tag.TAU, 0.5, 1.0, 1e-12)
    assert c1 < c2


@pytest.mark.parametrize(
    "lam,s", [(0.5, 1), (0.3, 0.5 + 2j), (0.9, 3), (0.7, 2), (0.1, 0.3 + 2j)]
)
def test_termwise_identities(sieve, lam, s):
    p = WeightParams(lam, 1.0)
    a = cs.identity_xi_psi(p, s, 1e-10, sieve)
    b = cs.identity_xi_tau(p, s, 1e-10, sieve)
    assert a.residual <= 2e-10 and a.ok
    assert b.residual <= (1 + abs(cmath.exp(s))) * 1e-10 and b.ok


def test_tau_second_derivative_examples(sieve):
    r = cs.identity_tau_Tpp(HALF, 2, h=1e-3, tol=1e-10, sieve=sieve)
    assert r.residual <= 1e-5 and r.ok
    r = cs.identity_tau_Tpp(WeightParams(0.7, 1.0), 1 + 1j, h=1e-3, tol=1e-10, sieve=sieve)
    assert r.residual <= 1e-4
    r = cs.identity_tau_Tpp(HALF, 2, h=1e-2, tol=1e-10, sieve=sieve)
    assert 3.5 <= r.ratio <= 4.5


def test_tau_second_derivative_guards(sieve):
    with pytest.raises(DomainError):
        cs.identity_tau_Tpp(HALF, 0.001, h=1e-3)
    with pytest.raises(NumericError):
        cs.identity_tau_Tpp(HALF, 1.0, h=1e-8)


def test_laplace_pieces(sieve):
    assert cs.laplace_integrand(HALF, 0.0, sieve) == -1.0
    r = cs.laplace_check(HALF, 1.0, 1e-8, sieve)
    assert r.residual <= 1e-4
    lhs, _, max_ratio, _ = cs.laplace_lhs(HALF, 20.0, 1e-8, sieve)
    assert abs(lhs) <= (max_ratio + 1) / 20
    with pytest.raises(ValueError):
        cs.laplace_lhs(WeightParams(0.5, 5.0), 1.0)


def test_laplace_integrand_matches_quadrature_pieces(sieve):
    # integrand on a piece equals exp(log W - c - c(1-lam)x) - 1
    x = 3.0
    t = (1 + 0.5 * x) ** 2
    from pgl.weighted_sums import weight

    W = sum(weight(HALF, float(p)) for p in sieve.primes_in(2, int(t) + 1))
    assert cs.laplace_integrand(HALF, x, sieve) == pytest.approx(W / math.exp(t**0.5) - 1, rel=1e-13)


def test_mellin_examples(sieve):
    val, tail = cs.mellin_rhs(HALF, 1, 1e-8, sieve)
    assert tail <= 1e-8
    assert abs(val - 0.5 * PHI2) <= 1e-8
    r = cs.mellin_check(HALF, 1.5, sieve=sieve)
    assert r.residual <= 1e-5 * abs(r.closed_form)
    # at z = 1.5 the primes above the cutoff weigh less than 1e-5 as well
    full, full_tail = cs.mellin_rhs(HALF, 1.5, 1e-9, sieve)
    assert abs(r.numeric - full) <= 1e-5
    with pytest.raises(DomainError):
        cs.mellin_rhs(HALF, -1.0)


def test_mellin_closed_form_uses_gamma(sieve):
    val, _ = cs.mellin_truncated_rhs(HALF, 0.5, 2000, sieve)
    phi = cs.partial_sum(Tag.PHI, HALF, 1.75, 2000, sieve).value
    assert val == pytest.approx(0.5 * math.sqrt(math.pi) * phi, rel=1e-13)


def test_tau_singular_part():
    assert cs.tau_singular_part(1) == pytest.approx(math.exp(-1), rel=1e-15)
    for s in (1.0, 0.5, 2 + 1j, 0.8 - 3j):
        d1, d2 = cs.tau_singular_checks(s)
        assert d1 < 1e-8 and d2 < 1e-8
    with pytest.raises(DomainError):
        cs.tau_singular_part(-1)


def test_gamma_reflection():
    for z in (0.1, 0.3 + 0.2j, 0.7, 1.5 - 2j, -0.4, -2.5 + 0.5j, 0.25j + 0.1, 3.3, -1.7, 0.9 + 4j):
        v = gamma_complex(z) * gamma_complex(1 - z) * cmath.sin(math.pi * z) / math.pi
        assert abs(v - 1) < 1e-11
