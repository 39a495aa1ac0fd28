import math

import mpmath as mp
import numpy as np
import pytest

from pgl.errors import NumericError
from pgl.sieve import simple_primes
from pgl.summation_oracle import (
    const_one,
    direct_sum,
    eps_fprime_integral,
    epsilon_profile,
    li,
    log_fn,
    power_fn,
    rs_rhs,
    scaled_weight_fn,
)
from pgl.weighted_sums import PrimeSource, WeightParams, normalized_W

HALF = WeightParams(0.5, 1.0)


def test_li_examples():
    assert li(2) == 0.0
    assert li(10) == pytest.approx(float(mp.li(10, offset=True)), rel=1e-12)
    assert li(10) == pytest.approx(5.12043572, abs=1e-8)
    # offset integral from 2; the 78627.549 figure is the integral from 0
    assert li(1e6) == pytest.approx(float(mp.li(10**6, offset=True)), rel=1e-12)
    assert li(1e6) == pytest.approx(78626.50399568205, rel=1e-12)
    with pytest.raises(ValueError):
        li(1.5)


def test_li_strictly_increasing():
    xs = np.geomspace(2.001, 1e9, 60)
    vals = [li(x) for x in xs]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_epsilon_profile(sieve):
    recs = epsilon_profile([10, 2, 1e6], sieve)
    assert [r.x for r in recs] == [10, 2, 1e6]
    assert recs[0].epsilon == pytest.approx(4 - 5.120435724669806, rel=1e-12)
    assert recs[0].rh_ratio == pytest.approx(1.120435724669806 / (math.sqrt(10) * math.log(10)), rel=1e-12)
    assert recs[1].epsilon == 1.0 and recs[1].li == 0.0
    assert recs[2].epsilon == pytest.approx(78498 - 78626.50399568205, rel=1e-10)
    with pytest.raises(ValueError):
        epsilon_profile([1], sieve)


def test_rh_ratio_stays_small(sieve):
    recs = epsilon_profile(np.geomspace(10, 1e8, 25), sieve)
    assert max(r.rh_ratio for r in recs) < 1.5


def test_constant_function_collapses_to_pi(sieve):
    f, fp = const_one()
    assert rs_rhs(f, fp, 100, sieve) == pytest.approx(25, rel=1e-10)


def test_log_function_matches_theta(sieve):
    f, fp = log_fn()
    assert rs_rhs(f, fp, 1e4, sieve) == pytest.approx(sieve.theta(10**4), rel=1e-6)


def test_weight_function_matches_normalized_W(sieve):
    f, fp = scaled_weight_fn(HALF, 1e4)
    ratio = normalized_W(HALF, PrimeSource(sieve), 1e4).ratio
    assert rs_rhs(f, fp, 1e4, sieve) == pytest.approx(ratio, rel=1e-4)


@pytest.mark.parametrize("x", [1e3, 1e4, 1e5])
@pytest.mark.parametrize("name", ["one", "log", "t", "w"])
def test_oracle_equivalence(sieve, name, x):
    f, fp = {
        "one": const_one(),
        "log": log_fn(),
        "t": power_fn(1.0),
        "w": scaled_weight_fn(HALF, x),
    }[name]
    direct = direct_sum(f, x, sieve)
    assert abs(direct - rs_rhs(f, fp, x, sieve)) / abs(direct) <= 1e-4


def test_direct_sum_against_naive_primes(sieve):
    p = simple_primes(10**5)
    assert direct_sum(np.sqrt, 1e5, sieve) == pytest.approx(math.fsum(np.sqrt(p)), rel=1e-15)


def test_binned_mode_close_to_exact_split(sieve):
    f, fp = log_fn()
    exact = eps_fprime_integral(fp, 5e4, sieve)
    binned = eps_fprime_integral(fp, 5e4, sieve, exact_split_max=1e4)
    assert binned == pytest.approx(exact, rel=1e-3)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_quadrature_failure_is_reported(sieve):
    wild = (lambda t: np.sin(1e9 * np.asarray(t)), lambda t: 1e9 * np.cos(1e9 * np.asarray(t)))
    with pytest.raises(NumericError):
        rs_rhs(*wild, 1e3, sieve)
