import math
import threading
from fractions import Fraction as F

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pgl import taylor_polys as tp
from pgl.errors import CapacityError
from pgl.taylor_polys import RationalPolynomial, eval_poly, f_poly


def hand_recursion(j):
    """Plain list-based recursion, written independently of the module."""
    polys = [[F(1)]]
    for n in range(j):
        nxt = polys[n] + [F(0)]
        for k in range(n + 1):
            for d, c in enumerate(polys[n - k]):
                nxt[d + 1] -= math.comb(n, k) * c / (k + 2)
        polys.append(nxt)
    return polys[j]


def test_first_polynomials():
    assert f_poly(0) == RationalPolynomial([1])
    assert f_poly(1) == RationalPolynomial([1, F(-1, 2)])
    assert f_poly(2) == RationalPolynomial([1, F(-4, 3), F(1, 4)])


@pytest.mark.parametrize("j", [3, 7, 12])
def test_recursion_against_independent_build(j):
    assert f_poly(j) == RationalPolynomial(hand_recursion(j))


def test_constant_term_and_degree():
    for j in range(65):
        p = f_poly(j)
        assert p.coefficients[0] == 1
        assert p.degree == j


def test_order_cap():
    with pytest.raises(CapacityError):
        f_poly(65)
    with pytest.raises(ValueError):
        f_poly(-1)


def test_canonical_form():
    assert RationalPolynomial([1, 2, 0, 0]).coefficients == (1, 2)
    assert RationalPolynomial([0, 0]).degree == -1


def test_eval_examples():
    assert eval_poly(f_poly(0), 3.7 + 1j) == 1
    assert eval_poly(f_poly(1), 2.0) == 0
    assert eval_poly(f_poly(2), 0.0) == 1
    assert f_poly(2)(3.0) == pytest.approx(1 - 4 + 9 / 4)


def test_expansion_at_s_zero():
    lam = 0.3
    assert tp.expansion_check(2, 0, lam, 0) == pytest.approx(2 ** (1 - lam) - 1, rel=1e-14)
    assert tp.expansion_check(2, 0, lam, 30) < 1e-15


def test_expansion_converges():
    s, lam = 0.3 + 0.2j, 0.9
    r4 = tp.expansion_check(5, s, lam, 4)
    r10 = tp.expansion_check(5, s, lam, 10)
    assert r10 < r4 and r10 <= 1e-8


def test_expansion_lhs_against_mpmath():
    mp.mp.dps = 30
    s, lam, p = mp.mpc(0.3, 0.2), mp.mpf("0.9"), 5
    ref = complex(p ** (s + 1 - lam) / mp.exp(s * (p ** (1 - lam) - 1) / (1 - lam)))
    assert tp.expansion_lhs(5, 0.3 + 0.2j, 0.9) == pytest.approx(ref, rel=1e-14)


def test_opposite_sign_does_not_converge():
    assert tp.expansion_check_opposite_sign(5, 0.3 + 0.2j, 0.9, 20) > 0.1


@given(st.sampled_from([2, 3, 5, 7, 11]), st.floats(0.85, 0.99), st.floats(0, 1), st.floats(-1, 1))
def test_residual_small_near_lambda_one(p, lam, a, b):
    assert tp.expansion_check(p, complex(a, b), lam, 24) < 1e-9


@given(st.floats(0.05, 0.95), st.sampled_from([2, 3, 5, 7]))
def test_s_zero_collapse_is_exponential_series(lam, p):
    y = (1 - lam) * math.log(p)
    for J in (2, 5, 9):
        tail = sum(y**k / math.factorial(k) for k in range(J + 1, J + 40))
        assert tp.expansion_check(p, 0, lam, J) <= tail * (1 + 1e-9) + 1e-15


def test_dump_format_round_trip(tmp_path):
    text = tp.dumps(4)
    assert text.splitlines()[2] == "2: 1 -4/3 1/4"
    back = tp.loads(text)
    assert all(back[j] == f_poly(j) for j in range(5))
    path = tp.save_cache(10, tmp_path / "f.txt")
    assert tp.load_cache(path)[10] == f_poly(10)
    path.write_text("1: 1 1/2\n")
    with pytest.raises(ValueError):
        tp.load_cache(path)


def test_cache_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("PGL_CACHE_DIR", str(tmp_path))
    assert tp.save_cache(3) == tmp_path / "taylor_polys.txt"
    assert set(tp.load_cache()) == {0, 1, 2, 3}


def test_denominator_profile_recorded():
    rows = tp.denominator_profile(10)
    assert rows[2] == (2, 12, 12)
    assert all(d >= 1 for _, d, _ in rows)


def test_concurrent_memo():
    tp.set_max_order(64)
    results = {}

    def work(j):
        results[j] = f_poly(j)

    threads = [threading.Thread(target=work, args=(j,)) for j in (40, 50, 60, 64)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results[64] == RationalPolynomial(hand_recursion(64))
