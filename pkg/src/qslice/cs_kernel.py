"""Coherent states, reproducing kernels and the W transforms.

Two coherent-state families live here:

* ``eta`` states, ``eta_qbar = (2 pi sqrt(N(r)))^-1 sum_n qbar**n / sqrt(x_n!) f_n``,
  on the full space and on a slice. With this prefactor their norm is
  ``1/(2 pi)``; the norms are reported as measured.
* canonical states ``gamma_q = exp(-r^2/2) sum_m q**m / sqrt(m!) f_m`` of unit
  norm, the ones that displacement operators produce from the vacuum.

Kernels are evaluated by direct series with a relative cutoff against the
sum of term bounds, so cancellations in the quaternionic sum cannot stall
convergence detection.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AxisMismatch, InsufficientOrder, NonConvergent, OutsideConvergence
from .fock import FockVector, SQRT_2PI
from .integrate import QuadratureRules, integrate_H_gram, integrate_slice_gram
from .measures import (
    SERIES_CAP, MomentMeasure, make_measure, normalization_N, normalization_N_array,
)
from .quatcore import (
    CAYLEY, Quaternion, SliceAxis, as_qarray, qabs, qconj, qmul, qpowers,
    slice_compose, slice_decompose,
)

__all__ = [
    "CoherentState", "coherent_H", "coherent_slice", "gamma_canonical",
    "kernel_H", "kernel_slice", "KernelReport", "kernel_properties",
    "weyl_transform", "weyl_reconstruct", "resolution_check", "interior_size",
    "CS_TAIL_TOL", "KERNEL_REL_TOL",
]

CS_TAIL_TOL = 1e-12
KERNEL_REL_TOL = 1e-15
TWO_PI = 2.0 * math.pi


def interior_size(n_max: int) -> int:
    """``N_int = floor(0.75 (N_max + 1))``, the block used by identity checks."""
    return int(math.floor(0.75 * (n_max + 1)))


@dataclass(frozen=True)
class CoherentState:
    """A coherent state together with its label.

    ``kind`` is ``"H"``, ``"slice"`` or ``"canonical"``; ``normalization`` is
    ``N(|label|)`` for the first two and ``exp(|label|^2)`` for the last.
    """

    vector: FockVector
    label: Quaternion
    measure: str
    kind: str
    axis: SliceAxis | None
    normalization: float
    tail: float

    @property
    def coeffs(self) -> np.ndarray:
        return self.vector.coeffs

    def norm(self) -> float:
        return self.vector.norm()


def _as_slice_point(z) -> tuple[Quaternion, SliceAxis | None]:
    if isinstance(z, tuple) and len(z) == 3:
        x, y, axis = z
        if not isinstance(axis, SliceAxis):
            axis = SliceAxis.from_vector(axis)
        return slice_compose(x, y, axis), axis
    q = z if isinstance(z, Quaternion) else Quaternion.from_array(z)
    if q.is_real():
        return q, None
    return q, slice_decompose(q).axis


def _eta(q: Quaternion, measure, n_max: int, kind: str, axis) -> CoherentState:
    m = make_measure(measure)
    r = q.norm()
    if r >= m.convergence_radius:
        raise OutsideConvergence(f"|q|={r!r} outside radius {m.convergence_radius!r}")
    N = normalization_N(m, r)
    P = qpowers(q.conj().to_array(), n_max)
    scale = m.inv_sqrt_factorials(n_max) / (TWO_PI * math.sqrt(N))
    coeffs = P * scale[:, None]
    kept = float(np.sum((r ** (2 * np.arange(n_max + 1))) * scale ** 2)) * (TWO_PI ** 2)
    tail = max(0.0, 1.0 - kept)
    if tail > CS_TAIL_TOL:
        warnings.warn(f"coherent state truncated at N_max={n_max} leaves relative "
                      f"tail {tail:.2e}", RuntimeWarning)
    return CoherentState(FockVector(coeffs, m.name), q, m.name, kind, axis, N, tail)


def coherent_H(q: Quaternion, measure="exponential", n_max: int = 64) -> CoherentState:
    """``eta_qbar`` with coefficients ``qbar**n / (2 pi sqrt(N(r) x_n!))``."""
    q = q if isinstance(q, Quaternion) else Quaternion.from_array(q)
    axis = None if q.is_real() else slice_decompose(q).axis
    return _eta(q, measure, n_max, "H", axis)


def coherent_slice(z, measure="exponential", n_max: int = 64) -> CoherentState:
    """Slice coherent state ``eta_zbar``; ``z`` is a Quaternion or ``(x, y, axis)``."""
    q, axis = _as_slice_point(z)
    return _eta(q, measure, n_max, "slice", axis)


def gamma_canonical(q, n_max: int = 64) -> CoherentState:
    """``gamma_q = exp(-|q|^2/2) sum_m q**m / sqrt(m!) f_m`` (exponential measure).

    Built with the recurrence ``c_m = c_{m-1} q / sqrt(m)`` so no factorial
    or power is formed explicitly.
    """
    q, axis = _as_slice_point(q)
    qa = q.to_array()
    r2 = q.norm2()
    c = np.zeros((n_max + 1, 4))
    c[0, 0] = math.exp(-0.5 * r2)
    for m in range(1, n_max + 1):
        c[m] = qmul(c[m - 1], qa) / math.sqrt(m)
    tail = max(0.0, 1.0 - float(np.sum(c ** 2)))
    return CoherentState(FockVector(c, "exponential"), q, "exponential", "canonical",
                         axis, math.exp(r2), tail)


def _kernel_series(a: np.ndarray, b: np.ndarray, m: MomentMeasure, rel_tol: float) -> np.ndarray:
    """``sum_k conj(a)**k b**k / x_k!`` for broadcastable ``(..., 4)`` arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ra = qabs(a)
    rb = qabs(b)
    rr = float(np.max(ra * rb)) if ra.size and rb.size else 0.0
    if rr >= m.convergence_radius ** 2:
        raise OutsideConvergence(f"|q1||q2|={rr!r} outside radius^2 {m.convergence_radius ** 2!r}")
    ac = qconj(a)
    A = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    A[..., 0] = 1.0
    B = A.copy()
    total = A.copy()
    bound_sum = 1.0
    bound = 1.0
    k = 0
    while True:
        k += 1
        if k >= m.available:
            raise NonConvergent(f"kernel series ran out of moments after {k} terms")
        if k > SERIES_CAP:
            raise NonConvergent(f"kernel series not converged after {SERIES_CAP} terms")
        s = 1.0 / math.sqrt(m.ratio(k))
        A = qmul(A, ac) * s
        B = qmul(B, b) * s
        total = total + qmul(A, B)
        ratio = rr / m.ratio(k)
        bound *= ratio
        bound_sum += bound
        nxt = rr / m.ratio(k + 1) if k + 1 < m.available else 1.0
        if nxt < 0.5 and bound * nxt / (1.0 - nxt) <= rel_tol * bound_sum:
            return total


def _kernel(q1, q2, measure, prefactor, rel_tol):
    m = make_measure(measure)
    scalar = isinstance(q1, Quaternion) and isinstance(q2, Quaternion)
    val = _kernel_series(as_qarray(q1), as_qarray(q2), m, rel_tol) * prefactor
    return Quaternion.from_array(val) if scalar else val


def kernel_H(q1, q2, measure="exponential", rel_tol: float = KERNEL_REL_TOL):
    """``K(q1, q2bar) = sum_m conj(q1)**m q2**m / (4 pi^2 x_m!)``.

    Quaternions give a Quaternion; ``(..., 4)`` arrays broadcast.
    """
    return _kernel(q1, q2, measure, 1.0 / TWO_PI ** 2, rel_tol)


def kernel_slice(z1, z2, measure="exponential", rel_tol: float = KERNEL_REL_TOL):
    """``K(z1, z2bar) = sum_m conj(z1)**m z2**m / (2 pi x_m!)`` on one slice."""
    q1, n1 = _as_slice_point(z1)
    q2, n2 = _as_slice_point(z2)
    if n1 is not None and n2 is not None and not n1.same_slice(n2, tol=1e-10):
        raise AxisMismatch(f"points lie on different slices {n1} and {n2}")
    return _kernel(q1, q2, measure, 1.0 / TWO_PI, rel_tol)


def _phi_table(q: np.ndarray, n: int, m: MomentMeasure) -> np.ndarray:
    """``Phi_0..Phi_n`` at quaternion array ``q``; shape ``(..., n+1, 4)``."""
    return qpowers(q, n, scale=m.inv_sqrt_factorials(n) / TWO_PI)


def _random_quaternions(rng, k, radius):
    v = rng.normal(size=(k, 4))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * radius * rng.uniform(0.0, 1.0, size=(k, 1)) ** 0.25


def _complexify(qs: np.ndarray, axis: SliceAxis) -> np.ndarray:
    n = axis.to_vector()
    return qs[..., 0] + 1j * (qs[..., 1:] @ n)


@dataclass(frozen=True)
class KernelReport:
    hermiticity: float
    positivity_min: float
    positivity_defect: float
    gram_min_eig: float
    idempotence: float
    idempotence_slice: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def kernel_properties(measure="exponential", n_samples: int = 100, rules: QuadratureRules | None = None,
                      seed: int = 0, radius: float = 2.0, n_gram: int = 8, n_idem: int = 6,
                      idem_radius: float = 1.0, idem_terms: int = 24) -> KernelReport:
    """Hermiticity, positivity and idempotence defects of the kernels.

    * hermiticity: max ``|K(q1,q2bar) - conj(K(q2,q1bar))|`` over random pairs;
    * positivity: min of ``K(q,qbar)`` and its max relative defect against
      ``N(|q|)/4 pi^2``, plus the least eigenvalue of the complexified slice
      Gram matrix of ``n_gram`` same-slice points;
    * idempotence: max defect of ``int K(q1,qbar)K(q,q3bar) = K(q1,q3bar)``
      under ``integrate_H`` and of its slice analogue under ``integrate_slice``.
      The integrands use kernels truncated at ``idem_terms`` terms.
    """
    m = make_measure(measure)
    rng = np.random.default_rng(seed)
    q1 = _random_quaternions(rng, n_samples, radius)
    q2 = _random_quaternions(rng, n_samples, radius)
    k12 = kernel_H(q1, q2, m)
    k21 = kernel_H(q2, q1, m)
    herm = float(np.max(qabs(k12 - qconj(k21))))

    kqq = kernel_H(q1, q1, m)
    ref = normalization_N_array(m, qabs(q1)) / TWO_PI ** 2
    pos_min = float(np.min(kqq[:, 0]))
    pos_def = float(np.max(np.maximum(np.abs(kqq[:, 0] - ref), qabs(kqq[:, 1:])) / ref))

    axis = SliceAxis.from_vector(rng.normal(size=3))
    n = axis.to_vector()
    xy = rng.uniform(-1.0, 1.0, size=(n_gram, 2)) * (radius / math.sqrt(2))
    pts = np.concatenate([xy[:, :1], xy[:, 1:] * n], axis=1)
    G = kernel_slice_array(pts[:, None, :], pts[None, :, :], m)
    Gc = _complexify(G, axis)
    gram_min = float(np.min(np.linalg.eigvalsh(0.5 * (Gc + Gc.conj().T))))

    if rules is None:
        rules = QuadratureRules.default(m)
    n = idem_terms
    P = _random_quaternions(rng, n_idem, idem_radius)
    C = qconj(_phi_table(P, n, m))

    kern = _expansion(C, lambda q: _phi_table(q, n, m))

    got = integrate_H_gram(kern, None, rules)
    want = kernel_H(P[:, None, :], P[None, :, :], m)
    idem = float(np.max(qabs(got - want)))

    Z = np.concatenate([xy[:n_idem, :1], xy[:n_idem, 1:] * axis.to_vector()], axis=1) * (idem_radius / radius)
    U = _u_table(Z, n, m)
    Cz = qconj(U)

    kern_z = _expansion(Cz, lambda q: _u_table(q, n, m))

    got_z = integrate_slice_gram(kern_z, None, axis, rules)
    want_z = kernel_slice_array(Z[:, None, :], Z[None, :, :], m)
    idem_z = float(np.max(qabs(got_z - want_z)))
    return KernelReport(herm, pos_min, pos_def, gram_min, idem, idem_z)


def _expansion(C: np.ndarray, table: Callable) -> Callable:
    """``q -> [sum_m C[a, m] T_m(q)]_a`` as one BLAS product per call."""
    a, k = C.shape[:2]
    L = np.einsum("amj,jkl->mkal", C, CAYLEY).reshape(k * 4, a * 4)

    def h(q):
        T = table(q)
        return (T.reshape(T.shape[0], k * 4) @ L).reshape(T.shape[0], a, 4)

    return h


def _u_table(q: np.ndarray, n: int, m: MomentMeasure) -> np.ndarray:
    return qpowers(q, n, scale=m.inv_sqrt_factorials(n) / SQRT_2PI)


def kernel_slice_array(z1: np.ndarray, z2: np.ndarray, measure="exponential",
                       rel_tol: float = KERNEL_REL_TOL) -> np.ndarray:
    """Array form of :func:`kernel_slice` without the same-slice check."""
    return _kernel_series(z1, z2, make_measure(measure), rel_tol) / TWO_PI


def weyl_transform(f: FockVector, mode: str = "paper", domain="H",
                   measure="exponential") -> Callable:
    """The coherent-state transform ``W f`` as a vectorized function.

    ``paper`` mode is ``2 pi N(r)^(1/2) <f|eta_qbar>`` on either domain, which
    equals ``sum_m alpha_m q**m / sqrt(x_m!)``. ``isometric`` mode rescales to
    ``sum_m alpha_m Phi_m`` on ``H`` and ``sum_m alpha_m U_m`` on a slice
    (``domain`` a :class:`SliceAxis`), the normalizations that preserve norms.
    """
    m = make_measure(measure if f.measure is None else f.measure)
    n = f.n_max
    if mode == "paper":
        c = 1.0
    elif mode == "isometric":
        c = 1.0 / TWO_PI if domain == "H" else 1.0 / SQRT_2PI
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if domain != "H" and not isinstance(domain, SliceAxis):
        raise ValueError(f"domain must be 'H' or a SliceAxis, got {domain!r}")
    ac = f.coeffs * (c * m.inv_sqrt_factorials(n))[:, None]

    def Wf(q):
        scalar = isinstance(q, Quaternion)
        arr = as_qarray(q)
        val = np.sum(qmul(ac, qpowers(arr, n)), axis=-2)
        return Quaternion.from_array(val) if scalar else val

    Wf.n_max = n
    Wf.mode = mode
    Wf.domain = domain
    return Wf


def weyl_reconstruct(Wf: Callable, n_max: int, rules: QuadratureRules, mode: str = "isometric",
                     domain="H") -> FockVector:
    """Recover coefficients from a transform by projecting on the basis.

    Projection onto ``Phi_m`` (full space) or ``U_m`` (slice) gives
    ``alpha_m`` for the isometric transform; paper mode is divided by its
    known scale.
    """
    m = rules.measure
    if domain == "H":
        table = lambda q: _phi_table(q, n_max, m)
        F = lambda q: Wf(q)[..., None, :]
        G = lambda q: qconj(table(q))
        M = integrate_H_gram(F, G, rules)[0]
        scale = TWO_PI if mode == "paper" else 1.0
    else:
        table = lambda q: _u_table(q, n_max, m)
        F = lambda q: Wf(q)[..., None, :]
        G = lambda q: qconj(table(q))
        M = integrate_slice_gram(F, G, domain, rules)[0]
        scale = SQRT_2PI if mode == "paper" else 1.0
    return FockVector(M / scale, m.name)


class _RadialLookup:
    """Values of a radial function known at the rule's nodes, looked up by ``|q|^2``."""

    def __init__(self, rho: np.ndarray, values: np.ndarray):
        order = np.argsort(rho)
        self.rho = rho[order]
        self.values = values[order]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        idx = np.clip(np.searchsorted(self.rho, rho), 1, len(self.rho) - 1)
        left = self.rho[idx - 1]
        right = self.rho[idx]
        idx = np.where(np.abs(rho - left) <= np.abs(rho - right), idx - 1, idx)
        if np.max(np.abs(self.rho[idx] - rho) / np.maximum(self.rho[idx], 1e-300)) > 1e-9:
            raise ValueError("radius does not coincide with a radial node")
        return self.values[idx]


def resolution_check(domain="H", measure="exponential", n_max: int = 32,
                     rules: QuadratureRules | None = None, with_normalization: bool = True,
                     interior: int | None = None) -> float:
    """Max-norm defect of the coherent-state resolution of the identity.

    Forms ``M_mk = c int <f_m|eta><eta|f_k> N(r) dnu (dOmega)`` with ``c = 1``
    on the full space and ``c = 2 pi`` on a slice (``domain`` a
    :class:`SliceAxis`), and returns ``max |M - I|`` over indices below the
    interior size. ``with_normalization=False`` drops the ``N(r)`` weight.
    """
    m = make_measure(measure)
    if rules is None:
        rules = QuadratureRules.default(m)
    if rules.measure != m:
        raise ValueError("quadrature rules were built for a different measure")
    if rules.radial.exact_degree < n_max:
        raise InsufficientOrder(
            f"radial rule exact to degree {rules.radial.exact_degree} cannot resolve index {n_max}")
    if rules.theta.M <= n_max:
        raise InsufficientOrder(
            f"angle rule with {rules.theta.M} nodes cannot separate indices up to {n_max}")
    rho = rules.radial.nodes
    N = normalization_N_array(m, np.sqrt(rho))
    inv_sqrt_N = _RadialLookup(rho, 1.0 / np.sqrt(N))
    scale = m.inv_sqrt_factorials(n_max) / TWO_PI

    def F(q):
        # <f_m | eta_qbar> = conj(eta coefficient m) = q**m / (2 pi sqrt(N x_m!))
        return qpowers(q, n_max, scale=scale, weight=inv_sqrt_N(np.sum(q * q, axis=-1)))

    factor = N if with_normalization else None
    if domain == "H":
        M = integrate_H_gram(F, None, rules, radial_factor=factor)
    else:
        M = TWO_PI * integrate_slice_gram(F, None, domain, rules, radial_factor=factor)
    k = interior_size(n_max) if interior is None else interior
    D = M[:k, :k].copy()
    D[np.arange(k), np.arange(k), 0] -= 1.0
    return float(np.max(qabs(D)))
