import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from qslice.errors import NotOrthonormal, RealAxisDegenerate, ShapeMismatch
from qslice.fock import (
    SQRT_2PI, FockVector, completeness_defect, eval_Phi, eval_U, inner_product, parseval_check,
    phi_function, regularity_residual, restrict, restrict_coefficients,
)
from qslice.quatcore import Quaternion, SliceAxis, slice_compose

from conftest import quaternions, random_axis

coeffs = arrays(float, (6, 4), elements=st.floats(-5, 5, allow_nan=False))


@given(coeffs, coeffs, quaternions)
def test_left_module_inner_product(a, b, q):
    f, g = FockVector(a), FockVector(b)
    lhs = inner_product(q * f, g)
    assert lhs.isclose(q * inner_product(f, g), tol=1e-9 * (1 + lhs.norm()))
    rhs = inner_product(f, q * g)
    assert rhs.isclose(inner_product(f, g) * q.conj(), tol=1e-9 * (1 + rhs.norm()))


@given(coeffs, coeffs)
def test_inner_product_hermitian_and_positive(a, b):
    f, g = FockVector(a), FockVector(b)
    assert inner_product(f, g).isclose(inner_product(g, f).conj(), tol=1e-9)
    ff = inner_product(f, f)
    assert abs(ff.w - f.norm() ** 2) < 1e-9 * (1 + ff.w)
    assert np.linalg.norm(ff.imag) < 1e-9 * (1 + ff.w)


def test_vector_arithmetic_and_immutability():
    e0 = FockVector.basis(0, 3)
    e1 = FockVector.basis(1, 3)
    s = e0 + e1
    assert s.allclose(FockVector(np.array([[1, 0, 0, 0], [1, 0, 0, 0], [0] * 4, [0] * 4])))
    assert (s - e1).allclose(e0)
    assert (-e0).allclose(-1.0 * e0)
    assert s.n_max == 3 and len(s) == 4
    assert s[1] == Quaternion(1.0)
    with pytest.raises(ValueError):
        s.coeffs[0, 0] = 5.0
    assert FockVector.zeros(3).norm() == 0.0
    q = FockVector.from_quaternions([Quaternion(0, 1), 2.0])
    np.testing.assert_array_equal(q.coeffs, [[0, 1, 0, 0], [2, 0, 0, 0]])


def test_shape_and_measure_mismatch():
    with pytest.raises(ShapeMismatch):
        FockVector.basis(0, 3) + FockVector.basis(0, 4)
    with pytest.raises(ShapeMismatch):
        FockVector.basis(0, 3, "exponential") + FockVector.basis(0, 3, "gamma:1")
    with pytest.raises(ShapeMismatch):
        FockVector(np.zeros((3, 3)))


def test_parseval_and_completeness(rng):
    n = 10
    basis = [FockVector.basis(m, n) for m in range(n + 1)]
    f = FockVector(rng.normal(size=(n + 1, 4)))
    g = FockVector(rng.normal(size=(n + 1, 4)))
    assert parseval_check(f, basis) < 1e-12
    assert completeness_defect(f, g, basis) < 1e-12
    # a rotated orthonormal basis: left multiplication by unit quaternions
    u = Quaternion(1.0, 2.0, -1.0, 0.5)
    u = u * (1.0 / u.norm())
    rotated = [u * b for b in basis]
    assert parseval_check(f, rotated) < 1e-12


def test_parseval_rejects_non_orthonormal(rng):
    basis = [FockVector.basis(0, 2), FockVector.basis(0, 2) + FockVector.basis(1, 2)]
    with pytest.raises(NotOrthonormal):
        parseval_check(FockVector.basis(0, 2), basis)


def test_incomplete_family_shows_defect():
    basis = [FockVector.basis(m, 4) for m in range(3)]
    f = FockVector.basis(4, 4)
    assert parseval_check(f, basis) == pytest.approx(1.0)


@pytest.mark.parametrize("m", [0, 1, 4, 9])
def test_basis_function_values(m, rng):
    q = Quaternion.from_array(rng.normal(size=4))
    expected = (q ** m) * (1.0 / (2 * math.pi * math.sqrt(math.factorial(m))))
    assert eval_Phi(m, q).isclose(expected, tol=1e-13)
    axis = random_axis(rng)
    z = slice_compose(0.3, -1.2, axis)
    assert eval_U(m, (0.3, -1.2, axis)).isclose(eval_U(m, z), tol=1e-15)
    # sqrt(2 pi) Phi_m restricted to a slice is U_m
    assert (eval_Phi(m, z) * SQRT_2PI).isclose(eval_U(m, z), tol=1e-13)
    arr = eval_Phi(m, np.array([q.to_array(), z.to_array()]))
    np.testing.assert_allclose(arr[0], expected.to_array(), atol=1e-13)


def test_phi_function_and_restriction(rng):
    alpha = rng.normal(size=(7, 4))
    h = phi_function(alpha)
    q = rng.normal(size=(5, 4))
    ref = sum((Quaternion.from_array(alpha[m]) * eval_Phi(m, Quaternion.from_array(q[2]))).to_array()
              for m in range(7))
    np.testing.assert_allclose(h(q)[2], ref, atol=1e-13)
    axis = random_axis(rng)
    hn = restrict(alpha, axis)
    xy = rng.normal(size=(4, 2))
    beta = restrict_coefficients(alpha)
    for x, y in xy:
        z = slice_compose(x, y, axis)
        via_u = sum((Quaternion.from_array(beta[m]) * eval_U(m, z)).to_array() for m in range(7))
        np.testing.assert_allclose(hn(np.array([[x, y]]))[0], via_u, atol=1e-12)
        assert hn(z).isclose(Quaternion.from_array(via_u), tol=1e-12)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_central_differences_exact_for_quadratics(m, rng):
    a = np.zeros((m + 1, 4))
    a[m, 0] = 1.0
    q = Quaternion.from_array(rng.normal(size=4))
    assert regularity_residual(phi_function(a), q, 1e-2) < 1e-12


@pytest.mark.parametrize("m", [3, 4, 6])
@pytest.mark.parametrize("side", ["left", "right"])
def test_regularity_second_order(m, side, rng):
    a = np.zeros((m + 1, 4))
    a[m, 0] = 1.0
    f = phi_function(a)
    q = Quaternion.from_array(rng.normal(size=4))
    r1 = regularity_residual(f, q, 1e-2, side)
    r2 = regularity_residual(f, q, 1e-3, side)
    assert 80 <= r1 / r2 <= 120


def test_regularity_detects_non_regular(rng):
    # q -> conj(q) is anti-regular: the residual does not vanish as h -> 0
    f = lambda q: q * np.array([1.0, -1.0, -1.0, -1.0])
    q = Quaternion.from_array(rng.normal(size=4))
    assert regularity_residual(f, q, 1e-4) == pytest.approx(1.0, rel=1e-6)


def test_regularity_errors():
    f = phi_function(np.ones((2, 4)))
    with pytest.raises(RealAxisDegenerate):
        regularity_residual(f, Quaternion(1.0), 1e-3)
    with pytest.raises(ValueError):
        regularity_residual(f, Quaternion(1.0, 1.0), 0.0)
    with pytest.raises(ValueError):
        regularity_residual(f, Quaternion(1.0, 1.0), 1e-3, side="up")
