"""Fields of slice spaces over the hemisphere of axes and their direct integral.

The continuum of slices is discretized by a hemisphere rule: a field is a
list of members, one truncated slice-space vector per sampled axis, with
members stored as coefficients in the slice basis ``U_m``. Inner products
of fields are weighted sums of the pointwise slice inner products.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .cs_kernel import gamma_canonical
from .errors import NonFiniteNorm, SamplingMismatch, ShapeMismatch
from .fock import FockVector, SQRT_2PI, inner_product, restrict_coefficients
from .integrate import HemisphereRule, QuadratureRules, axis_vectors, integrate_slice_gram
from .measures import make_measure
from .operators import SliceOperator, displacement
from .quatcore import Quaternion, SliceAxis, qconj, qmul, qpowers, slice_compose

__all__ = [
    "SliceSampling", "sample_slices", "HilbertField", "field_from_H", "fundamental_field",
    "field_inner", "field_norm", "pointwise_inner", "ConstancyReport", "constancy_check",
    "constancy_stats", "restriction_constant", "BlockOperator", "decomposable_operator",
    "gamma_field", "export_field",
]


@dataclass(frozen=True, eq=False)
class SliceSampling:
    """Sampled axes ``n_k`` with weights ``w_k`` for integrals over axes."""

    axes: np.ndarray
    weights: np.ndarray
    theta1: np.ndarray
    phi: np.ndarray
    convention: str

    def __len__(self):
        return self.weights.shape[0]

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def vector_mass(self) -> np.ndarray:
        return self.weights @ self.axes

    def axis(self, k: int) -> SliceAxis:
        return SliceAxis(*map(float, self.axes[k]))

    def same_as(self, other: "SliceSampling") -> bool:
        return self is other or (
            self.axes.shape == other.axes.shape
            and np.array_equal(self.axes, other.axes)
            and np.array_equal(self.weights, other.weights))


def sample_slices(hr: HemisphereRule, convention: str = "polar") -> SliceSampling:
    """Axes and weights from a hemisphere rule.

    ``"polar"`` axes are the canonical slice representatives (one per
    slice); ``"tilted"`` axes have zero weighted vector sum but include
    antipodal pairs. See :func:`qslice.integrate.axis_vectors`.
    """
    t1 = hr.theta1
    ph = hr.phi
    axes = axis_vectors(t1, ph, convention)
    axes = axes / np.linalg.norm(axes, axis=1, keepdims=True)
    for a in (axes, t1, ph):
        a.setflags(write=False)
    w = hr.weights
    w.setflags(write=False)
    return SliceSampling(axes, w, t1, ph, convention)


@dataclass(frozen=True, eq=False)
class HilbertField:
    """One member per sampled axis; ``coeffs[k]`` are ``U``-coefficients on axis ``k``."""

    sampling: SliceSampling
    coeffs: np.ndarray
    measure: str = "exponential"

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 3 or c.shape[0] != len(self.sampling) or c.shape[2] != 4:
            raise ShapeMismatch(
                f"field coefficients must have shape ({len(self.sampling)}, N+1, 4), got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __len__(self):
        return self.coeffs.shape[0]

    @property
    def n_max(self) -> int:
        return self.coeffs.shape[1] - 1

    def member(self, k: int) -> FockVector:
        return FockVector(self.coeffs[k], self.measure)

    def evaluate(self, k: int, z) -> np.ndarray:
        """Member ``k`` as a function: ``sum_m c_m U_m(z)`` at slice points ``z``."""
        m = make_measure(self.measure)
        s = m.inv_sqrt_factorials(self.n_max) / SQRT_2PI
        return np.sum(qmul(self.coeffs[k] * s[:, None], qpowers(z, self.n_max)), axis=-2)


def _coeff_array(h) -> np.ndarray:
    return h.coeffs if isinstance(h, FockVector) else np.asarray(h, dtype=float)


def field_from_H(h, s: SliceSampling, method: str = "identity",
                 rules: QuadratureRules | None = None, measure="exponential") -> HilbertField:
    """Field of slice restrictions of ``h = sum alpha_m Phi_m``.

    ``"identity"`` uses the restriction identity ``sqrt(2 pi) Phi_m = U_m``
    (member coefficients ``alpha_m / sqrt(2 pi)`` on every axis).
    ``"projection"`` instead computes ``<h|_n | U_m>`` on each axis by slice
    quadrature, which requires ``rules``.
    """
    a = _coeff_array(h)
    name = make_measure(measure if not isinstance(h, FockVector) or h.measure is None
                        else h.measure).name
    if method == "identity":
        c = np.broadcast_to(restrict_coefficients(a), (len(s),) + a.shape)
        return HilbertField(s, c, name)
    if method != "projection":
        raise ValueError(f"unknown method {method!r}")
    if rules is None:
        raise ValueError("projection needs quadrature rules")
    m = rules.measure
    n = a.shape[0] - 1
    phi_s = m.inv_sqrt_factorials(n) / (2.0 * math.pi)
    u_s = m.inv_sqrt_factorials(n) / SQRT_2PI
    ac = a * phi_s[:, None]

    def H(q):
        return np.sum(qmul(ac, qpowers(q, n)), axis=-2)[:, None, :]

    def Ubar(q):
        return qconj(qpowers(q, n, scale=u_s))

    out = np.empty((len(s), n + 1, 4))
    for k in range(len(s)):
        out[k] = integrate_slice_gram(H, Ubar, s.axis(k), rules)[0]
    return HilbertField(s, out, m.name)


def fundamental_field(m: int, s: SliceSampling, n_max: int, measure="exponential") -> HilbertField:
    """``Psi_m``: the field of ``sqrt(2 pi) Phi_m``, member ``U_m`` on every axis."""
    a = np.zeros((n_max + 1, 4))
    a[m, 0] = SQRT_2PI
    return field_from_H(a, s, measure=measure)


def _check_sampling(F: HilbertField, G: HilbertField, s: SliceSampling | None):
    if not F.sampling.same_as(G.sampling):
        raise SamplingMismatch("fields are sampled on different axis sets")
    if s is not None and not F.sampling.same_as(s):
        raise SamplingMismatch("fields are not sampled on the given axis set")
    if F.coeffs.shape != G.coeffs.shape:
        raise ShapeMismatch("fields have different truncations")


def pointwise_inner(F: HilbertField, G: HilbertField) -> np.ndarray:
    """``<F(n_k)|G(n_k)>`` for every sampled axis; shape ``(K, 4)``."""
    _check_sampling(F, G, None)
    return np.sum(qmul(F.coeffs, qconj(G.coeffs)), axis=1)


def field_inner(F: HilbertField, G: HilbertField, s: SliceSampling | None = None) -> Quaternion:
    """``sum_k w_k <F(n_k)|G(n_k)>``."""
    _check_sampling(F, G, s)
    return Quaternion.from_array(F.sampling.weights @ pointwise_inner(F, G))


def field_norm(F: HilbertField) -> float:
    """Square root of ``sum_k w_k ||F(n_k)||^2``; non-finite results raise."""
    with np.errstate(over="ignore", invalid="ignore"):
        sq = np.sum(F.coeffs ** 2, axis=(1, 2))
        total = float(F.sampling.weights @ sq)
    if not math.isfinite(total):
        raise NonFiniteNorm("field norm is not finite")
    return math.sqrt(total)


@dataclass(frozen=True)
class ConstancyReport:
    mean: Quaternion
    stdev: float
    values: np.ndarray


def constancy_stats(values: np.ndarray) -> ConstancyReport:
    """Mean and spread (root mean square deviation norm) of per-axis quaternions."""
    v = np.asarray(values, dtype=float)
    mean = v.mean(axis=0)
    sd = float(np.sqrt(np.mean(np.sum((v - mean) ** 2, axis=1))))
    return ConstancyReport(Quaternion.from_array(mean), sd, v)


def constancy_check(m: int, j: int, s: SliceSampling, measure="exponential",
                    rules: QuadratureRules | None = None) -> ConstancyReport:
    """``<Psi_m(n)|Psi_j(n)>`` by slice quadrature on every sampled axis."""
    meas = make_measure(measure)
    if rules is None:
        rules = QuadratureRules.default(meas)
    n = max(m, j)
    u = meas.inv_sqrt_factorials(n) / SQRT_2PI

    def Um(q):
        return qpowers(q, n, scale=u)[..., m:m + 1, :]

    def Uj_bar(q):
        return qconj(qpowers(q, n, scale=u)[..., j:j + 1, :])

    vals = np.array([integrate_slice_gram(Um, Uj_bar, s.axis(k), rules)[0, 0]
                     for k in range(len(s))])
    return constancy_stats(vals)


def restriction_constant(h, k, s: SliceSampling, measure="exponential") -> Quaternion:
    """``<phi(h)|phi(k)> <h|k>^-1`` for the field map ``phi = field_from_H``."""
    hv = h if isinstance(h, FockVector) else FockVector(h)
    kv = k if isinstance(k, FockVector) else FockVector(k)
    lhs = field_inner(field_from_H(hv, s, measure=measure), field_from_H(kv, s, measure=measure))
    return lhs * inner_product(hv, kv).inverse()


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """Block-diagonal operator: ``blocks[k]`` acts on the member at axis ``k``."""

    sampling: SliceSampling
    blocks: tuple

    def apply(self, F: HilbertField) -> HilbertField:
        if not F.sampling.same_as(self.sampling):
            raise SamplingMismatch("field and operator use different axis sets")
        out = np.array([b.apply(F.member(k)).coeffs for k, b in enumerate(self.blocks)])
        return HilbertField(F.sampling, out, F.measure)

    def coupling(self, n_max: int | None = None, seed: int = 0) -> float:
        """Largest member that leaks off-axis when applied to indicator fields.

        For each axis ``k`` a field supported on ``k`` alone (random member)
        is mapped; the result is the max norm found on the other axes.
        """
        K = len(self.sampling)
        n = self.blocks[0].dim if n_max is None else n_max + 1
        rng = np.random.default_rng(seed)
        worst = 0.0
        for k in range(K):
            c = np.zeros((K, n, 4))
            c[k] = rng.normal(size=(n, 4))
            out = self.apply(HilbertField(self.sampling, c)).coeffs.copy()
            out[k] = 0.0
            worst = max(worst, float(np.max(np.abs(out))))
        return worst

    def unitarity_defects(self, k: int | None = None) -> np.ndarray:
        """Interior defect of ``D_k D_k^dagger - I`` per block."""
        eye = SliceOperator(np.eye(self.blocks[0].dim))
        return np.array([(b @ b.adjoint()).interior_defect(eye, k) for b in self.blocks])


def decomposable_operator(r: float, theta: float, s: SliceSampling, n_max: int = 64) -> BlockOperator:
    """Blocks ``D(r e^{n_k theta})`` on every sampled axis."""
    blocks = []
    for k in range(len(s)):
        ax = s.axis(k)
        blocks.append(displacement(slice_compose(r * math.cos(theta), r * math.sin(theta), ax),
                                   n_max, ax))
    return BlockOperator(s, tuple(blocks))


def gamma_field(r: float, theta: float, s: SliceSampling, n_max: int = 64) -> HilbertField:
    """Field whose member on axis ``n_k`` is ``gamma(r e^{n_k theta})``."""
    c = [gamma_canonical(slice_compose(r * math.cos(theta), r * math.sin(theta), s.axis(k)),
                         n_max).coeffs for k in range(len(s))]
    return HilbertField(s, np.array(c))


def export_field(F: HilbertField, dest=None) -> str:
    """Write a field as CSV rows ``axis, theta1, phi, m, w, x1, x2, x3``.

    ``dest`` may be a path or a writable text stream; the CSV text is also
    returned.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["axis", "theta1", "phi", "m", "w", "x1", "x2", "x3"])
    s = F.sampling
    for k in range(len(F)):
        for m in range(F.n_max + 1):
            c = F.coeffs[k, m]
            w.writerow([k, repr(float(s.theta1[k])), repr(float(s.phi[k])), m,
                        *(repr(float(v)) for v in c)])
    text = buf.getvalue()
    if dest is not None:
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            with open(dest, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    return text
