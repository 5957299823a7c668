import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import gamma as gamma_fn, roots_genlaguerre

from qslice.errors import IllConditioned, InvalidMoments, NonConvergent, OutsideConvergence
from qslice.measures import (
    MomentMeasure, check_divergence, load_moments, make_measure, normalization_N,
    normalization_N_array, normalization_terms, radial_rule, x_factorial,
)


def test_exponential_moments_are_factorials():
    m = make_measure("exponential")
    np.testing.assert_allclose(m.moments(10), [math.factorial(n) for n in range(11)])
    np.testing.assert_allclose(m.ratios(5), [1, 1, 2, 3, 4, 5])
    assert x_factorial(m, 6) == 720.0
    np.testing.assert_allclose(m.inv_sqrt_factorials(6),
                               [1 / math.sqrt(math.factorial(n)) for n in range(7)], rtol=1e-15)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.5])
def test_gamma_moments(s):
    m = make_measure(f"gamma:{s}")
    ref = [gamma_fn(n + s + 1) / gamma_fn(s + 1) for n in range(8)]
    np.testing.assert_allclose(m.moments(7), ref, rtol=1e-13)
    assert m.name == f"gamma:{s:g}"


@pytest.mark.parametrize("desc", ["bogus", "gamma:-2", "gamma:abc", [2.0, 1.0], [1.0, -1.0],
                                  [1.0, 1.0, 0.5]])
def test_invalid_measure_specs(desc):
    with pytest.raises(InvalidMoments):
        make_measure(desc)


def test_explicit_measure_and_file(tmp_path):
    mu = [float(math.factorial(n)) for n in range(30)]
    p = tmp_path / "mom.txt"
    p.write_text("# exponential moments\n" + "\n".join(str(v) for v in mu) + "\n")
    np.testing.assert_allclose(load_moments(p), mu)
    m = make_measure(f"file:{p}")
    assert m.available == 30
    np.testing.assert_allclose(m.ratios(5), [1, 1, 2, 3, 4, 5])
    with pytest.raises(InvalidMoments):
        m.ratios(40)
    assert m == make_measure(mu)
    assert make_measure({"moments": mu}) == m


@given(st.floats(min_value=0.0, max_value=5.0))
def test_exponential_normalization_is_gaussian(r):
    m = make_measure("exponential")
    assert math.isclose(normalization_N(m, r), math.exp(r * r), rel_tol=1e-14)


@pytest.mark.parametrize("s,r", [(0.5, 1.3), (2.0, 2.0), (4.0, 0.4)])
def test_gamma_normalization_against_hypergeometric(s, r):
    m = make_measure(f"gamma:{s}")
    ref = float(mpmath.hyp1f1(1, s + 1, r * r))
    assert math.isclose(normalization_N(m, r), ref, rel_tol=1e-13)


def test_normalization_array_and_terms():
    m = make_measure("exponential")
    r = np.array([[0.0, 1.0], [2.0, 0.5]])
    np.testing.assert_allclose(normalization_N_array(m, r), np.exp(r ** 2), rtol=1e-14)
    assert normalization_terms(m, 0.0) == 1
    assert normalization_terms(m, 4.0) > normalization_terms(m, 1.0)


def test_normalization_errors():
    m = MomentMeasure("explicit", moments=[math.factorial(n) for n in range(6)],
                      convergence_radius=1.5)
    with pytest.raises(OutsideConvergence):
        normalization_N(m, 2.0)
    with pytest.raises(NonConvergent):
        normalization_N(m, 1.4)
    with pytest.raises(ValueError):
        normalization_N(make_measure("exponential"), -1.0)


@pytest.mark.parametrize("order", [1, 5, 20, 40])
def test_exponential_rule_matches_laguerre(order):
    rule = radial_rule(make_measure("exponential"), order)
    x, w = np.polynomial.laguerre.laggauss(order)
    np.testing.assert_allclose(rule.nodes, x, rtol=1e-12)
    np.testing.assert_allclose(rule.weights, w, rtol=1e-9)
    assert rule.exact_degree == 2 * order - 1


@pytest.mark.parametrize("s", [0.5, 3.0])
def test_gamma_rule_matches_generalized_laguerre(s):
    rule = radial_rule(make_measure(f"gamma:{s}"), 12)
    x, w = roots_genlaguerre(12, s)
    np.testing.assert_allclose(rule.nodes, x, rtol=1e-12)
    np.testing.assert_allclose(rule.weights, w / gamma_fn(s + 1), rtol=1e-10)


def test_rule_integrates_moments_exactly():
    m = make_measure("exponential")
    rule = radial_rule(m, 10)
    for k in range(2 * 10):
        assert math.isclose(rule.integrate_power(k), math.factorial(k), rel_tol=1e-11)


@pytest.mark.parametrize("order", [3, 6, 9])
def test_hankel_path_agrees_with_recurrence(order):
    exact = make_measure("exponential")
    explicit = make_measure([math.factorial(n) for n in range(2 * order + 2)])
    a = radial_rule(exact, order)
    b = radial_rule(explicit, order, method="hankel")
    np.testing.assert_allclose(b.nodes, a.nodes, rtol=1e-7)
    np.testing.assert_allclose(b.weights, a.weights, rtol=1e-6, atol=1e-12)


def test_hankel_loses_positivity_at_high_order():
    explicit = make_measure([math.factorial(n) for n in range(80)])
    with pytest.raises(IllConditioned) as info:
        radial_rule(explicit, 30, method="hankel")
    assert info.value.order is not None


def test_rule_errors():
    m = make_measure([math.factorial(n) for n in range(6)])
    with pytest.raises(InvalidMoments):
        radial_rule(m, 4)
    with pytest.raises(ValueError):
        radial_rule(m, 0)
    with pytest.raises(ValueError):
        radial_rule(m, 2, method="recurrence")


def test_divergence_heuristic():
    assert check_divergence(make_measure("exponential"), terms=2000)

    class Fast:
        # x_n = n**4: sum of 1/sqrt(x_n) converges
        available = math.inf

        def ratios(self, n):
            k = np.arange(n + 1, dtype=float)
            return np.maximum(k, 1.0) ** 4

    fast = Fast()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert not check_divergence(fast)
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)
