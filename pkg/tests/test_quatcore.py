import math

import numpy as np
import pytest
from hypothesis import given, settings

from qslice.errors import NonUnitAxis, RealAxisDegenerate
from qslice.quatcore import (
    CAYLEY, I, J, K, ONE, Quaternion, SliceAxis, canonicalize_axis, exp_imag,
    lebesgue_weight, left_matrix, polar4, polar4_inverse, qabs, qconj, qmul, qpowers,
    right_matrix, slice_compose, slice_decompose,
)

from conftest import quaternions, unit_vectors


def test_hamilton_rules():
    assert I * I == -ONE and J * J == -ONE and K * K == -ONE
    assert I * J == K and J * K == I and K * I == J
    assert J * I == -K


def test_cayley_matches_scalar_product():
    a = Quaternion(1.0, 2.0, -0.5, 0.25)
    b = Quaternion(-0.3, 0.7, 1.1, -2.0)
    got = np.einsum("i,j,ijl->l", a.to_array(), b.to_array(), CAYLEY)
    np.testing.assert_allclose(got, (a * b).to_array(), atol=1e-15)


@given(quaternions, quaternions, quaternions)
def test_associative_and_norm_multiplicative(a, b, c):
    lhs = ((a * b) * c).to_array()
    rhs = (a * (b * c)).to_array()
    assert np.allclose(lhs, rhs, atol=1e-10 * (1 + np.abs(lhs).max()))
    assert math.isclose((a * b).norm(), a.norm() * b.norm(), rel_tol=1e-12, abs_tol=1e-12)


@given(quaternions, quaternions)
def test_conjugate_reverses_products(a, b):
    assert (a * b).conj().isclose(b.conj() * a.conj(), tol=1e-10)


@given(quaternions, quaternions)
def test_left_right_matrices(a, b):
    ab = (a * b).to_array()
    np.testing.assert_allclose(left_matrix(a.to_array()) @ b.to_array(), ab, atol=1e-11)
    np.testing.assert_allclose(right_matrix(b.to_array()) @ a.to_array(), ab, atol=1e-11)


def test_array_ops_broadcast(rng):
    a = rng.normal(size=(5, 1, 4))
    b = rng.normal(size=(1, 3, 4))
    out = qmul(a, b)
    assert out.shape == (5, 3, 4)
    ref = (Quaternion.from_array(a[2, 0]) * Quaternion.from_array(b[0, 1])).to_array()
    np.testing.assert_allclose(out[2, 1], ref, atol=1e-14)
    np.testing.assert_allclose(qabs(qmul(a, qconj(a)))[:, 0], np.sum(a[:, 0] ** 2, axis=-1))


@pytest.mark.parametrize("n", [0, 1, 5, 12])
def test_qpowers_against_repeated_product(n, rng):
    q = rng.normal(size=(7, 4))
    P = qpowers(q, n)
    assert P.shape == (7, n + 1, 4)
    for i in range(7):
        ref = Quaternion.from_array(q[i]) ** n
        np.testing.assert_allclose(P[i, n], ref.to_array(), rtol=1e-12, atol=1e-12)


def test_qpowers_scale_and_weight(rng):
    q = rng.normal(size=(4, 4))
    s = np.arange(1.0, 5.0)
    w = np.array([1.0, 2.0, 3.0, 4.0])
    P = qpowers(q, 3, scale=s, weight=w)
    np.testing.assert_allclose(P, qpowers(q, 3) * s[None, :, None] * w[:, None, None], rtol=1e-13)


def test_inverse_and_division():
    q = Quaternion(1.0, -2.0, 0.5, 3.0)
    assert (q * q.inverse()).isclose(ONE, tol=1e-14)
    assert (q / q).isclose(ONE, tol=1e-14)
    with pytest.raises(ValueError):
        q ** -1


@given(quaternions)
def test_slice_decompose_roundtrip(q):
    if q.is_real(tol=1e-9):
        return
    x, y, axis = slice_decompose(q)
    assert y > 0
    assert slice_compose(x, y, axis).isclose(q, tol=1e-12)


@given(quaternions)
def test_hemisphere_decomposition_is_canonical(q):
    if q.is_real(tol=1e-9):
        return
    x, y, axis = slice_decompose(q, hemisphere=True)
    assert axis.is_canonical
    assert slice_compose(x, y, axis).isclose(q, tol=1e-12)


def test_real_quaternion_policies():
    with pytest.raises(RealAxisDegenerate):
        slice_decompose(Quaternion(2.0))
    x, y, axis = slice_decompose(Quaternion(2.0), real_policy="i")
    assert (x, y) == (2.0, 0.0) and axis == SliceAxis(1.0, 0.0, 0.0)


@pytest.mark.parametrize("v", [(0, 0, 2), (1e-3, 0, 0), (0, 0, 0)])
def test_axis_validation(v):
    if np.linalg.norm(v) == 0:
        with pytest.raises(NonUnitAxis):
            SliceAxis.from_vector(v)
    else:
        with pytest.raises(NonUnitAxis):
            SliceAxis(*map(float, v))


@pytest.mark.parametrize("v,expected", [
    ((0, 0, -1), (0, 0, 1)),
    ((-1, 0, 0), (1, 0, 0)),
    ((0, -1, 0), (0, 1, 0)),
    ((0.6, 0, -0.8), (-0.6, 0, 0.8)),
])
def test_canonicalize_sign_rule(v, expected):
    assert canonicalize_axis(v) == SliceAxis(*map(float, expected))


@given(unit_vectors)
def test_same_slice_is_antipodal_invariant(axis):
    assert axis.same_slice(-axis)
    assert canonicalize_axis(axis).same_slice(axis)


@given(unit_vectors)
def test_axis_squares_to_minus_one(axis):
    n = axis.as_quaternion()
    assert (n * n).isclose(-ONE, tol=1e-12)


def test_exp_imag_is_a_slice_unit():
    n = SliceAxis.from_vector([1.0, 2.0, 2.0])
    e = exp_imag(n, 0.7)
    assert math.isclose(e.norm(), 1.0, rel_tol=1e-15)
    assert (exp_imag(n, 0.3) * exp_imag(n, 0.4)).isclose(e, tol=1e-15)


@given(quaternions)
def test_polar4_roundtrip(q):
    p = polar4(q)
    assert 0 <= p.theta1 <= math.pi and 0 <= p.theta2 <= math.pi
    assert polar4_inverse(p).isclose(q, tol=1e-12)


def test_lebesgue_weight_modes():
    assert lebesgue_weight(3.0, -2.0) == 4.0
    assert math.isclose(lebesgue_weight(3.0, -2.0, "paper"), 2.0 * math.sqrt(13.0))
    with pytest.raises(ValueError):
        lebesgue_weight(1.0, 1.0, "bogus")
