"""Truncated ladder operators and slice displacement operators.

An operator on the truncated space is a matrix ``A`` acting on coefficient
vectors by ``(A f)_k = sum_m alpha_m A_km``: coefficients stay on the left,
so ``A(q f) = q (A f)`` for every quaternion ``q``. When all entries lie in
one slice ``C_n`` they commute with each other, and the operator is stored
as the complex matrix obtained through ``x + n y <-> x + i y``. Composition
and adjoints are then ordinary complex matrix operations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy

from .cs_kernel import gamma_canonical, interior_size
from .errors import AxisMismatch, ShapeMismatch
from .fock import FockVector, inner_product
from .quatcore import (
    CAYLEY, Quaternion, SliceAxis, as_qarray, exp_imag, qmul, slice_compose,
    slice_decompose,
)

__all__ = [
    "SliceOperator", "RankOneOperator", "ladder", "expm_taylor", "expm_quaternion_taylor",
    "displacement", "commutator_defect", "CommutatorReport", "bch_compose_defect",
    "generator_X_defect", "GeneratorReport", "eigen_relation_defect", "transporter_F",
    "to_complex", "from_complex", "SLICE_TOL",
]

SLICE_TOL = 1e-14


def to_complex(q, axis: SliceAxis) -> np.ndarray:
    """Map quaternions on the slice of ``axis`` to complex numbers.

    Raises :class:`AxisMismatch` if an entry is farther than ``SLICE_TOL``
    (relative to the largest entry) from the slice.
    """
    a = as_qarray(q)
    n = axis.to_vector()
    y = a[..., 1:] @ n
    off = a[..., 1:] - y[..., None] * n
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    if a.size and float(np.max(np.abs(off))) > SLICE_TOL * scale:
        raise AxisMismatch(f"entries leave the slice of {axis}")
    return a[..., 0] + 1j * y


def from_complex(c, axis: SliceAxis | None) -> np.ndarray:
    """Inverse of :func:`to_complex`; ``axis=None`` requires real input."""
    c = np.asarray(c)
    out = np.zeros(c.shape + (4,))
    out[..., 0] = c.real
    if axis is None:
        if np.any(np.imag(c) != 0):
            raise AxisMismatch("complex entries need a slice axis")
        return out
    out[..., 1:] = np.imag(c)[..., None] * axis.to_vector()
    return out


def _common_axis(a: SliceAxis | None, b: SliceAxis | None) -> tuple[SliceAxis | None, float]:
    """Shared axis of two slice tags and the sign mapping ``b`` onto it."""
    if a is None:
        return b, 1.0
    if b is None:
        return a, 1.0
    if not a.same_slice(b, tol=1e-12):
        raise AxisMismatch(f"operators live on different slices {a} and {b}")
    return a, float(np.sign(np.dot(a.to_vector(), b.to_vector())))


@dataclass(frozen=True, eq=False)
class SliceOperator:
    """Operator with all entries in one slice, stored in complexified form.

    ``axis=None`` marks a real matrix, which lies in every slice.
    """

    matrix: np.ndarray
    axis: SliceAxis | None = None

    def __post_init__(self):
        M = np.array(self.matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ShapeMismatch(f"operator matrix must be square, got {M.shape}")
        if self.axis is None and np.any(M.imag != 0):
            raise AxisMismatch("a complex matrix needs a slice axis")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @classmethod
    def from_entries(cls, Q, axis: SliceAxis | None) -> "SliceOperator":
        """Build from an ``(n, n, 4)`` quaternion array confined to one slice."""
        if axis is None:
            Q = as_qarray(Q)
            if np.any(Q[..., 1:] != 0):
                raise AxisMismatch("real operator has imaginary entries")
            return cls(Q[..., 0].astype(complex), None)
        return cls(to_complex(Q, axis), axis)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def entries(self) -> np.ndarray:
        """Quaternion entries ``A_km`` as an ``(n, n, 4)`` array."""
        return from_complex(self.matrix, self.axis) if self.axis is not None else \
            from_complex(self.matrix.real, None)

    def adjoint(self) -> "SliceOperator":
        return SliceOperator(self.matrix.conj().T, self.axis)

    def _align(self, other: "SliceOperator"):
        axis, sign = _common_axis(self.axis, other.axis)
        B = other.matrix if sign > 0 else other.matrix.conj()
        return axis, B

    def __matmul__(self, other):
        if isinstance(other, SliceOperator):
            if other.dim != self.dim:
                raise ShapeMismatch(f"dimensions {self.dim} and {other.dim} differ")
            axis, B = self._align(other)
            return SliceOperator(self.matrix @ B, axis)
        if isinstance(other, FockVector):
            return self.apply(other)
        return NotImplemented

    def __add__(self, other: "SliceOperator") -> "SliceOperator":
        axis, B = self._align(other)
        return SliceOperator(self.matrix + B, axis)

    def __sub__(self, other: "SliceOperator") -> "SliceOperator":
        axis, B = self._align(other)
        return SliceOperator(self.matrix - B, axis)

    def __neg__(self):
        return SliceOperator(-self.matrix, self.axis)

    def scale(self, q) -> "SliceOperator":
        """``q A`` for a scalar ``q`` in the operator's slice (or real)."""
        if isinstance(q, (int, float, np.floating, np.integer)):
            return SliceOperator(float(q) * self.matrix, self.axis)
        q = q if isinstance(q, Quaternion) else Quaternion.from_array(q)
        if q.is_real():
            return SliceOperator(q.w * self.matrix, self.axis)
        axis, _ = _common_axis(self.axis, slice_decompose(q).axis)
        c = complex(to_complex(q.to_array(), axis))
        return SliceOperator(c * self.matrix, axis)

    def apply(self, f: FockVector) -> FockVector:
        """``(A f)_k = sum_m alpha_m A_km = (Re A alpha) + (Im A alpha) n``."""
        if len(f) != self.dim:
            raise ShapeMismatch(f"vector length {len(f)} does not match dimension {self.dim}")
        a = f.coeffs
        out = self.matrix.real @ a
        if self.axis is not None:
            im = self.matrix.imag @ a
            out = out + qmul(im, self.axis.as_quaternion().to_array())
        return FockVector(out, f.measure)

    def interior_defect(self, other: "SliceOperator", k: int | None = None) -> float:
        """Max entry norm of ``self - other`` on the leading ``k x k`` block."""
        axis, B = self._align(other)
        k = interior_size(self.dim - 1) if k is None else k
        return float(np.max(np.abs(self.matrix[:k, :k] - B[:k, :k])))

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.matrix)))


@dataclass(frozen=True, eq=False)
class RankOneOperator:
    """``|ket><bra|`` acting as ``f -> <f|bra> ket``.

    Its entries ``bra_m``-conjugates times ``ket_k`` span two slices in
    general, so it is kept as a vector pair rather than a matrix.
    """

    ket: FockVector
    bra: FockVector

    def apply(self, f: FockVector) -> FockVector:
        return inner_product(f, self.bra) * self.ket

    def __matmul__(self, other):
        if isinstance(other, RankOneOperator):
            return RankOneOperator(inner_product(other.ket, self.bra) * self.ket, other.bra)
        if isinstance(other, FockVector):
            return self.apply(other)
        return NotImplemented

    def operator_norm(self) -> float:
        return self.ket.norm() * self.bra.norm()


def ladder(n_max: int) -> tuple[SliceOperator, SliceOperator, SliceOperator]:
    """Annihilation ``a``, creation ``a_dag`` and number ``N`` on ``0..n_max``."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    s = np.sqrt(np.arange(1, n_max + 1, dtype=float))
    a = np.diag(s, k=1)
    ad = np.diag(s, k=-1)
    N = np.diag(np.arange(n_max + 1, dtype=float))
    return SliceOperator(a), SliceOperator(ad), SliceOperator(N)


def expm_taylor(A: np.ndarray, order: int = 12, theta: float = 0.3) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a truncated Taylor series.

    The squaring count ``s`` is chosen so that ``||A||_1 / 2**s <= theta``;
    for ``theta = 0.3`` and ``order = 12`` the local truncation error is
    below ``0.3**13 / 13! ~ 3e-17``.
    """
    A = np.asarray(A)
    norm = float(np.max(np.sum(np.abs(A), axis=0))) if A.size else 0.0
    s = max(0, int(math.ceil(math.log2(norm / theta)))) if norm > theta else 0
    X = A / (2.0 ** s)
    E = np.eye(A.shape[0], dtype=np.result_type(A, float))
    T = E.copy()
    for k in range(1, order + 1):
        T = T @ X / k
        E = E + T
    for _ in range(s):
        E = E @ E
    return E


def _qmatmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Quaternion matrix product ``sum_m A_km B_mj`` with entry order kept."""
    return np.einsum("kmi,mjp,ipl->kjl", A, B, CAYLEY, optimize=True)


def expm_quaternion_taylor(Q: np.ndarray, terms: int = 20) -> np.ndarray:
    """Plain Taylor series ``sum_k Q**k / k!`` of a quaternion matrix.

    No scaling, no complexification; meant as an independent check for
    small arguments.
    """
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    E = np.zeros_like(Q)
    E[np.arange(n), np.arange(n), 0] = 1.0
    T = E.copy()
    for k in range(1, terms):
        T = _qmatmul(T, Q) / k
        E = E + T
    return E


def _slice_of(q, axis: SliceAxis | None) -> tuple[complex, SliceAxis | None]:
    """Complex coordinate of ``q`` on ``axis`` (or on its own slice)."""
    q = q if isinstance(q, Quaternion) else Quaternion.from_array(q)
    if axis is None:
        if q.is_real():
            return complex(q.w), None
        axis = slice_decompose(q).axis
    return complex(to_complex(q.to_array(), axis)), axis


def displacement(q, n_max: int = 64, axis: SliceAxis | None = None,
                 method: str = "taylor") -> SliceOperator:
    """``D(q) = exp(q a_dag - qbar a)`` on the slice of ``q``.

    ``axis`` fixes the slice when ``q`` is real or when the operator must be
    expressed on a particular orientation. ``method="scipy"`` uses
    :func:`scipy.linalg.expm` for the complexified exponential instead of
    :func:`expm_taylor`.
    """
    z, axis = _slice_of(q, axis)
    a, ad, _ = ladder(n_max)
    G = z * ad.matrix - np.conj(z) * a.matrix
    if method == "taylor":
        E = expm_taylor(G)
    elif method == "scipy":
        import scipy.linalg
        E = scipy.linalg.expm(G)
    else:
        raise ValueError(f"unknown method {method!r}")
    if axis is None:
        E = E.real
    return SliceOperator(E, axis)


@dataclass(frozen=True)
class CommutatorReport:
    """Exact (symbolic) and floating-point commutator defects."""

    n_max: int
    exact_ccr_interior: object
    exact_corner: object
    exact_number_a: object
    exact_number_adag: object
    float_ccr_interior: float
    float_corner: float
    float_number_a: float
    float_number_adag: float

    @property
    def exact(self) -> bool:
        return (self.exact_ccr_interior == 0 and self.exact_corner == -self.n_max
                and self.exact_number_a == 0 and self.exact_number_adag == 0)


def _sym_ladder(n_max: int):
    n = n_max + 1
    a = sympy.zeros(n, n)
    for m in range(1, n):
        a[m - 1, m] = sympy.sqrt(m)
    return a, a.T, sympy.diag(*range(n))


def commutator_defect(n_max: int = 64) -> CommutatorReport:
    """Commutation relations of the truncated ladder operators.

    Evaluated in exact arithmetic, where ``sqrt(m)**2 == m`` holds, and in
    floating point, where it may not. Interior means indices ``< n_max``.
    """
    a, ad, N = _sym_ladder(n_max)
    ccr = a * ad - ad * a
    interior = ccr[:n_max, :n_max] - sympy.eye(n_max)
    na = N * a - a * N + a
    nad = N * ad - ad * N - ad
    exact_int = max((abs(v) for v in interior), default=sympy.Integer(0))
    exact_na = max(abs(v) for v in na)
    exact_nad = max(abs(v) for v in nad)
    corner = ccr[n_max, n_max]

    fa, fad, fN = (op.matrix.real for op in ladder(n_max))
    fccr = fa @ fad - fad @ fa
    f_int = float(np.max(np.abs(fccr[:n_max, :n_max] - np.eye(n_max))))
    f_corner = float(fccr[n_max, n_max])
    f_na = float(np.max(np.abs(fN @ fa - fa @ fN + fa)))
    f_nad = float(np.max(np.abs(fN @ fad - fad @ fN - fad)))
    return CommutatorReport(n_max, sympy.nsimplify(exact_int), corner, exact_na, exact_nad,
                            f_int, f_corner, f_na, f_nad)


def _pair_coords(q1, q2) -> tuple[complex, complex, SliceAxis | None]:
    q1 = q1 if isinstance(q1, Quaternion) else Quaternion.from_array(q1)
    q2 = q2 if isinstance(q2, Quaternion) else Quaternion.from_array(q2)
    n1 = None if q1.is_real() else slice_decompose(q1).axis
    n2 = None if q2.is_real() else slice_decompose(q2).axis
    axis, _ = _common_axis(n1, n2)
    if axis is None:
        return complex(q1.w), complex(q2.w), None
    return complex(to_complex(q1.to_array(), axis)), complex(to_complex(q2.to_array(), axis)), axis


def bch_compose_defect(q1, q2, n_max: int = 64, k: int | None = None) -> float:
    """Interior defect of ``D(q1) D(q2) = exp(-n (x1 y2 - x2 y1)) D(q1 + q2)``."""
    z1, z2, axis = _pair_coords(q1, q2)
    ax = axis if axis is not None else SliceAxis(1.0, 0.0, 0.0)
    D1 = displacement(slice_compose(z1.real, z1.imag, ax), n_max, ax)
    D2 = displacement(slice_compose(z2.real, z2.imag, ax), n_max, ax)
    z3 = z1 + z2
    D3 = displacement(slice_compose(z3.real, z3.imag, ax), n_max, ax)
    wedge = z1.real * z2.imag - z2.real * z1.imag
    rhs = D3.scale(exp_imag(ax, -wedge))
    return (D1 @ D2).interior_defect(rhs, k)


@dataclass(frozen=True)
class GeneratorReport:
    antiadjoint: float
    factorization: float


def generator_X_defect(q, y: float, n_max: int = 64, axis: SliceAxis | None = None,
                       k: int | None = None) -> GeneratorReport:
    """``X = n y I + (q a_dag - qbar a)``: anti-adjointness and ``exp X = e^{n y} D(q)``."""
    z, axis = _slice_of(q, axis)
    ax = axis if axis is not None else SliceAxis(1.0, 0.0, 0.0)
    a, ad, _ = ladder(n_max)
    X = 1j * y * np.eye(n_max + 1) + (z * ad.matrix - np.conj(z) * a.matrix)
    anti = float(np.max(np.abs(X + X.conj().T)))
    eX = SliceOperator(expm_taylor(X), ax)
    D = displacement(slice_compose(z.real, z.imag, ax), n_max, ax)
    rhs = D.scale(exp_imag(ax, y))
    return GeneratorReport(anti, eX.interior_defect(rhs, k))


def eigen_relation_defect(q, n_max: int = 64) -> float:
    """``max_{m < n_max - 1} |(a gamma_q)_m - (q gamma_q)_m|``."""
    q = q if isinstance(q, Quaternion) else Quaternion.from_array(q)
    g = gamma_canonical(q, n_max)
    a, _, _ = ladder(n_max)
    lhs = a.apply(g.vector).coeffs
    rhs = (q * g.vector).coeffs
    d = np.linalg.norm(lhs - rhs, axis=1)
    return float(np.max(d[: max(n_max - 1, 0)]))


def transporter_F(axis: SliceAxis, axis_prime: SliceAxis, r: float, theta: float,
                  n_max: int = 64) -> RankOneOperator:
    """``F(n') = |gamma^{n'}><gamma^{n}|`` with ``gamma^n = gamma(r e^{n theta})``."""
    g = gamma_canonical(slice_compose(r * math.cos(theta), r * math.sin(theta), axis), n_max)
    gp = gamma_canonical(slice_compose(r * math.cos(theta), r * math.sin(theta), axis_prime), n_max)
    return RankOneOperator(gp.vector, g.vector)
