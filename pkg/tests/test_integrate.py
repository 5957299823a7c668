import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qslice.integrate import (
    QuadratureRules, ThetaRule, axis_vectors, hemisphere_rule, integrate_H, integrate_H_gram,
    integrate_slice, integrate_slice_gram, lebesgue_consistency, slice_nodes, theta_rule,
)
from qslice.quatcore import Quaternion, SliceAxis, qabs, qconj, qmul, qpowers

from conftest import random_axis

TWO_PI = 2.0 * math.pi


@given(st.integers(min_value=-20, max_value=20))
def test_theta_rule_exact_for_low_frequencies(k):
    t = ThetaRule(32)
    val = np.sum(t.weights * np.exp(1j * k * t.nodes))
    expected = TWO_PI if k == 0 else 0.0
    assert abs(val - expected) < 1e-12


def test_theta_rule_validation():
    with pytest.raises(ValueError):
        theta_rule(0)
    with pytest.raises(ValueError):
        hemisphere_rule(0, 4)


@pytest.mark.parametrize("shape", [(4, 8), (16, 32), (32, 64)])
def test_hemisphere_mass_and_vector_mass(shape):
    hr = hemisphere_rule(*shape)
    assert len(hr) == shape[0] * shape[1]
    assert abs(hr.mass() - TWO_PI) < 1e-12
    np.testing.assert_allclose(hr.vector_mass("polar"), [0.0, 0.0, math.pi], atol=1e-12)
    assert np.linalg.norm(hr.vector_mass("tilted")) < 1e-12


def test_hemisphere_polynomial_exactness():
    hr = hemisphere_rule(6, 12)
    # int cos(t1)^k dOmega over the upper hemisphere = 2 pi / (k + 1)
    for k in range(12):
        val = hr.integrate(lambda t, p: np.cos(t) ** k)
        assert math.isclose(val, TWO_PI / (k + 1), rel_tol=1e-13)


def test_polar_axes_are_canonical_and_unit():
    hr = hemisphere_rule(8, 16)
    ax = hr.axes("polar")
    np.testing.assert_allclose(np.linalg.norm(ax, axis=1), 1.0, rtol=1e-15)
    assert all(SliceAxis(*v).is_canonical for v in ax)
    with pytest.raises(ValueError):
        axis_vectors(0.1, 0.2, "bogus")


def test_slice_nodes_layout(small_rules, rng):
    axes = np.array([random_axis(rng).to_vector() for _ in range(3)])
    q, w = slice_nodes(axes, small_rules)
    S = small_rules.slice_size
    assert q.shape == (3 * S, 4) and w.shape == (3 * S,)
    # every node of block k lies on slice k
    for k in range(3):
        block = q[k * S:(k + 1) * S, 1:]
        cross = np.cross(block, axes[k])
        assert np.max(np.abs(cross)) < 1e-14
    assert math.isclose(w[:S].sum(), TWO_PI, rel_tol=1e-13)


@pytest.mark.parametrize("k", [0, 1, 3, 7])
def test_slice_radial_moments(small_rules, k, rng):
    axis = random_axis(rng)
    val = integrate_slice(lambda q: np.sum(q ** 2, axis=-1) ** k, axis, small_rules)
    assert math.isclose(val, TWO_PI * math.factorial(k), rel_tol=1e-12)


def test_slice_monomial_gram(small_rules, rng):
    axis = random_axis(rng)
    n = 8
    G = integrate_slice_gram(lambda q: qpowers(q, n), None, axis, small_rules)
    expected = np.zeros_like(G)
    for m in range(n + 1):
        expected[m, m, 0] = TWO_PI * math.factorial(m)
    np.testing.assert_allclose(G, expected, atol=1e-9 * math.factorial(n))


def test_gram_matches_brute_force(small_rules, rng):
    axis = random_axis(rng)
    c = rng.normal(size=(3, 4))

    def F(q):
        return qmul(c[None, :, :], q[:, None, :])

    def G(q):
        return qpowers(q, 1)

    got = integrate_slice_gram(F, G, axis, small_rules)
    q, w = slice_nodes(axis, small_rules)
    ref = np.zeros((3, 2, 4))
    for i in range(len(w)):
        Fi = F(q[i:i + 1])[0]
        Gi = G(q[i:i + 1])[0]
        for a in range(3):
            for b in range(2):
                ref[a, b] += w[i] * (Quaternion.from_array(Fi[a]) * Quaternion.from_array(Gi[b])).to_array()
    np.testing.assert_allclose(got, ref, atol=1e-12)


def test_gram_default_is_conjugate(small_rules, rng):
    axis = random_axis(rng)
    F = lambda q: qpowers(q, 3)
    G1 = integrate_slice_gram(F, None, axis, small_rules)
    G2 = integrate_slice_gram(F, lambda q: qconj(qpowers(q, 3)), axis, small_rules)
    np.testing.assert_allclose(G1, G2, atol=1e-12)


def test_radial_factor(small_rules, rng):
    axis = random_axis(rng)
    fac = np.asarray(small_rules.radial.nodes)
    val = integrate_slice(lambda q: np.ones(len(q)), axis, small_rules, radial_factor=fac)
    assert math.isclose(val, TWO_PI, rel_tol=1e-12)


def test_integrate_H_constant_and_quaternion_output(small_rules):
    assert math.isclose(integrate_H(lambda q: np.ones(len(q)), small_rules), 4 * math.pi ** 2,
                        rel_tol=1e-12)
    val = integrate_H(lambda q: q, small_rules)
    assert isinstance(val, Quaternion)
    # odd in the angle on each slice
    assert val.norm() < 1e-12


def test_integrate_H_gram_of_regular_monomials(small_rules):
    n = 6
    m = small_rules.measure
    s = m.inv_sqrt_factorials(n) / TWO_PI
    G = integrate_H_gram(lambda q: qpowers(q, n, scale=s), None, small_rules)
    G[np.arange(n + 1), np.arange(n + 1), 0] -= 1.0
    assert np.max(qabs(G)) < 1e-11


@pytest.mark.parametrize("workers,chunk", [(2, 16), (3, 5), (None, 7)])
def test_parallel_and_chunked_reduction_are_deterministic(small_rules, workers, chunk):
    F = lambda q: qpowers(q, 3)
    base = integrate_H_gram(F, None, small_rules, chunk=chunk)
    par = integrate_H_gram(F, None, small_rules, chunk=chunk, workers=workers)
    assert np.array_equal(base, par)


def test_refined_rules(small_rules):
    r = small_rules.refined()
    assert len(r.radial) == 2 * len(small_rules.radial)
    assert r.theta.M == 2 * small_rules.theta.M
    assert r.hemisphere.n_phi == 2 * small_rules.hemisphere.n_phi


@pytest.mark.parametrize("mode,expected", [("jacobian", math.pi ** 2), ("paper", 4 * math.pi)])
def test_lebesgue_consistency(mode, expected):
    rep = lebesgue_consistency(mode)
    assert rep.closed_form == pytest.approx(expected, rel=1e-15)
    assert abs(rep.value - expected) < 1e-8
    assert rep.reference == pytest.approx(math.pi ** 2)
    assert (rep.defect < 1e-8) == (mode == "jacobian")
