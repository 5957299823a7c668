import csv
import io
import math

import numpy as np
import pytest

from qslice.cs_kernel import gamma_canonical
from qslice.directint import (
    HilbertField, constancy_check, constancy_stats, decomposable_operator, export_field,
    field_from_H, field_inner, field_norm, fundamental_field, gamma_field, pointwise_inner,
    restriction_constant, sample_slices,
)
from qslice.errors import NonFiniteNorm, SamplingMismatch, ShapeMismatch
from qslice.fock import FockVector, inner_product, phi_function
from qslice.integrate import hemisphere_rule
from qslice.quatcore import Quaternion, SliceAxis, slice_compose

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="module")
def s():
    return sample_slices(hemisphere_rule(5, 10))


def test_sampling_masses():
    polar = sample_slices(hemisphere_rule(16, 32))
    assert polar.mass == pytest.approx(TWO_PI, abs=1e-12)
    np.testing.assert_allclose(polar.vector_mass, [0, 0, math.pi], atol=1e-12)
    assert all(polar.axis(k).is_canonical for k in range(len(polar)))
    tilted = sample_slices(hemisphere_rule(16, 32), "tilted")
    assert np.linalg.norm(tilted.vector_mass) < 1e-12
    assert not polar.same_as(tilted)
    with pytest.raises(ValueError):
        polar.axes[0, 0] = 1.0


def test_field_shape_validation(s):
    with pytest.raises(ShapeMismatch):
        HilbertField(s, np.zeros((len(s) - 1, 3, 4)))


@pytest.mark.parametrize("m,j", [(0, 0), (4, 4), (2, 5), (7, 3)])
def test_fundamental_fields_have_constant_inner_products(s, m, j, small_rules):
    rep = constancy_check(m, j, s, rules=small_rules)
    assert rep.stdev < 1e-10
    assert rep.mean.isclose(Quaternion(1.0 if m == j else 0.0), tol=1e-10)
    # the coefficient picture agrees
    F, G = fundamental_field(m, s, 8), fundamental_field(j, s, 8)
    vals = pointwise_inner(F, G)
    np.testing.assert_allclose(vals, np.tile([float(m == j), 0, 0, 0], (len(s), 1)), atol=1e-15)


def test_constancy_negative_control(s, rng):
    c = np.zeros((len(s), 3, 4))
    c[:, 0, 0] = 1.0 + np.arange(len(s))
    vals = pointwise_inner(HilbertField(s, c), HilbertField(s, c))
    assert constancy_stats(vals).stdev > 1.0


def test_fundamental_member_reconstructs_from_U_coefficients(s, small_rules):
    F = fundamental_field(3, s, 6)
    z = np.array([slice_compose(0.4, -0.3, s.axis(7)).to_array()])
    val = F.evaluate(7, z)[0]
    expected = slice_compose(0.4, -0.3, s.axis(7)) ** 3 * (1 / math.sqrt(TWO_PI * 6))
    np.testing.assert_allclose(val, expected.to_array(), atol=1e-14)


def test_projection_agrees_with_identity(s, small_rules, rng):
    h = FockVector(rng.normal(size=(7, 4)))
    a = field_from_H(h, s)
    b = field_from_H(h, s, "projection", small_rules)
    np.testing.assert_allclose(a.coeffs, b.coeffs, atol=1e-12)
    with pytest.raises(ValueError):
        field_from_H(h, s, "projection")
    with pytest.raises(ValueError):
        field_from_H(h, s, "bogus")


def test_field_members_are_restrictions(s, rng):
    alpha = rng.normal(size=(6, 4))
    F = field_from_H(alpha, s)
    h = phi_function(alpha)
    z = np.array([slice_compose(0.2, 1.1, s.axis(3)).to_array()])
    np.testing.assert_allclose(F.evaluate(3, z), h(z), atol=1e-13)


def test_restriction_constant_is_one(s, rng):
    cs = [restriction_constant(rng.normal(size=(9, 4)), rng.normal(size=(9, 4)), s)
          for _ in range(5)]
    for c in cs:
        assert c.isclose(Quaternion(1.0), tol=1e-12)


def test_field_inner_refinement_invariance(rng):
    h = rng.normal(size=(6, 4))
    k = rng.normal(size=(6, 4))
    coarse = sample_slices(hemisphere_rule(5, 10))
    fine = sample_slices(hemisphere_rule(10, 20))
    a = field_inner(field_from_H(h, coarse), field_from_H(k, coarse))
    b = field_inner(field_from_H(h, fine), field_from_H(k, fine))
    assert a.isclose(b, tol=1e-10)


def test_field_norm_and_guard(s, rng):
    h = FockVector(rng.normal(size=(5, 4)))
    F = field_from_H(h, s)
    assert field_norm(F) == pytest.approx(h.norm(), rel=1e-12)
    c = np.array(F.coeffs)
    c[2, 1, 0] = 1e300
    with pytest.raises(NonFiniteNorm):
        field_norm(HilbertField(s, c))


def test_sampling_mismatch(s):
    other = sample_slices(hemisphere_rule(4, 8))
    with pytest.raises(SamplingMismatch):
        field_inner(fundamental_field(0, s, 2), fundamental_field(0, other, 2))
    with pytest.raises(SamplingMismatch):
        field_inner(fundamental_field(0, s, 2), fundamental_field(0, s, 2), other)
    with pytest.raises(ShapeMismatch):
        field_inner(fundamental_field(0, s, 2), fundamental_field(0, s, 3))


def test_decomposable_operator(s):
    r, t = 0.9, 1.3
    B = decomposable_operator(r, t, s, 40)
    assert B.coupling() == 0.0
    assert np.max(B.unitarity_defects()) < 1e-8
    vac = HilbertField(s, np.tile(FockVector.basis(0, 40).coeffs, (len(s), 1, 1)))
    out = B.apply(vac)
    target = gamma_field(r, t, s, 40)
    np.testing.assert_allclose(out.coeffs[:, :30], target.coeffs[:, :30], atol=1e-10)
    with pytest.raises(SamplingMismatch):
        B.apply(fundamental_field(0, sample_slices(hemisphere_rule(4, 8)), 40))


def test_export_field(s, tmp_path):
    F = fundamental_field(1, s, 2)
    text = export_field(F)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["axis", "theta1", "phi", "m", "w", "x1", "x2", "x3"]
    assert len(rows) == 1 + len(s) * 3
    assert float(rows[2][4]) == pytest.approx(1.0)
    path = tmp_path / "field.csv"
    export_field(F, path)
    assert path.read_text() == text
    buf = io.StringIO()
    export_field(F, buf)
    assert buf.getvalue() == text
