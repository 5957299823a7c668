"""Quaternion arithmetic and the slice geometry of the quaternion field.

Two layers live here. :class:`Quaternion` is an immutable scalar with the
full algebra, convenient for labels and single values. The ``q*`` array
functions (:func:`qmul`, :func:`qconj`, :func:`qpowers`, ...) operate on
float arrays whose trailing axis holds the four components ``(w, x1, x2, x3)``
and are what the quadrature and operator code uses in bulk.

Every non-real quaternion is uniquely ``x + n*y`` with ``y > 0`` and ``n`` a
unit imaginary quaternion; identifying ``n`` with ``-n`` gives the
projective plane of slices. :class:`SliceAxis` stores ``n``;
:func:`canonicalize_axis` picks the hemisphere representative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NonUnitAxis, RealAxisDegenerate

__all__ = [
    "Quaternion", "SliceAxis", "SliceCoords", "Polar4",
    "ONE", "I", "J", "K",
    "qmul", "qconj", "qabs", "qpowers", "as_qarray", "left_matrix",
    "right_matrix", "CAYLEY",
    "slice_decompose", "slice_compose", "canonicalize_axis", "exp_imag",
    "polar4", "polar4_inverse", "lebesgue_weight",
    "AXIS_TOL",
]

AXIS_TOL = 1e-12

# (a*b)_l = sum_ij CAYLEY[i, j, l] a_i b_j  for components (1, i, j, k)
CAYLEY = np.zeros((4, 4, 4))
for _i, _j, _l, _s in [
    (0, 0, 0, 1), (0, 1, 1, 1), (0, 2, 2, 1), (0, 3, 3, 1),
    (1, 0, 1, 1), (1, 1, 0, -1), (1, 2, 3, 1), (1, 3, 2, -1),
    (2, 0, 2, 1), (2, 1, 3, -1), (2, 2, 0, -1), (2, 3, 1, 1),
    (3, 0, 3, 1), (3, 1, 2, 1), (3, 2, 1, -1), (3, 3, 0, -1),
]:
    CAYLEY[_i, _j, _l] = _s
CAYLEY.setflags(write=False)


def as_qarray(q) -> np.ndarray:
    """Coerce a Quaternion, a sequence of them, or a ``(..., 4)`` array."""
    if isinstance(q, Quaternion):
        return q.to_array()
    if isinstance(q, SliceAxis):
        return q.as_quaternion().to_array()
    if isinstance(q, (list, tuple)) and q and isinstance(q[0], Quaternion):
        return np.array([p.to_array() for p in q])
    arr = np.asarray(q, dtype=float)
    if arr.shape[-1:] != (4,):
        raise ValueError(f"expected trailing axis of length 4, got shape {arr.shape}")
    return arr


def qmul(a, b) -> np.ndarray:
    """Hamilton product of broadcastable quaternion arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    b0, b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ], axis=-1)


def qconj(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a * np.array([1.0, -1.0, -1.0, -1.0])


def qabs(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return np.sqrt(np.einsum("...i,...i->...", a, a))


def qpowers(q, n: int, scale=None, weight=None) -> np.ndarray:
    """Powers ``q**0 .. q**n`` by repeated multiplication.

    Returns an array of shape ``q.shape[:-1] + (n + 1, 4)``. No slice
    shortcut is taken, so results can be cross-checked against slice
    complexification independently. Optional real factors multiply the
    result: ``scale`` (length ``n + 1``) per power and ``weight`` (shape
    ``q.shape[:-1]``) per point.

    The result is a view of a power-major buffer; reductions over the
    point axis (see ``integrate``) use that layout without copying.
    """
    q = as_qarray(q)
    b0, b1, b2, b3 = (np.ascontiguousarray(q[..., c]).reshape(q.shape[:-1]) for c in range(4))
    out = np.empty((n + 1, 4) + q.shape[:-1])
    out[0] = np.array([1.0, 0.0, 0.0, 0.0]).reshape((4,) + (1,) * (q.ndim - 1))
    for m in range(1, n + 1):
        a0, a1, a2, a3 = out[m - 1]
        o = out[m]
        o[0] = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3
        o[1] = a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2
        o[2] = a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1
        o[3] = a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0
    if scale is not None:
        out *= np.asarray(scale, dtype=float).reshape((n + 1, 1) + (1,) * (q.ndim - 1))
    if weight is not None:
        out *= np.asarray(weight, dtype=float)
    return np.moveaxis(out, (0, 1), (-2, -1))


def left_matrix(a) -> np.ndarray:
    """Real 4x4 matrices ``L`` with ``a*b == L @ b``."""
    return np.einsum("...i,ijl->...lj", np.asarray(a, dtype=float), CAYLEY)


def right_matrix(b) -> np.ndarray:
    """Real 4x4 matrices ``R`` with ``a*b == R @ a``."""
    return np.einsum("...j,ijl->...li", np.asarray(b, dtype=float), CAYLEY)


@dataclass(frozen=True)
class Quaternion:
    """An element ``w + x1*i + x2*j + x3*k`` of the quaternion field."""

    w: float = 0.0
    x1: float = 0.0
    x2: float = 0.0
    x3: float = 0.0

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        a = np.asarray(arr, dtype=float).reshape(4)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x1, self.x2, self.x3])

    @staticmethod
    def _coerce(other):
        if isinstance(other, Quaternion):
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Quaternion(float(other))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Quaternion(self.w + o.w, self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)

    __radd__ = __add__

    def __neg__(self):
        return Quaternion(-self.w, -self.x1, -self.x2, -self.x3)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            s = float(other)
            return Quaternion(self.w * s, self.x1 * s, self.x2 * s, self.x3 * s)
        if not isinstance(other, Quaternion):
            return NotImplemented
        a0, a1, a2, a3 = self.w, self.x1, self.x2, self.x3
        b0, b1, b2, b3 = other.w, other.x1, other.x2, other.x3
        return Quaternion(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self * (1.0 / float(other))
        if isinstance(other, Quaternion):
            return self * other.inverse()
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = ONE
        for _ in range(int(n)):
            out = out * self
        return out

    def __abs__(self) -> float:
        return self.norm()

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x1, -self.x2, -self.x3)

    def norm2(self) -> float:
        return self.w * self.w + self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def inverse(self) -> "Quaternion":
        n2 = self.norm2()
        if n2 == 0.0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        return self.conj() * (1.0 / n2)

    @property
    def real(self) -> float:
        return self.w

    @property
    def imag(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])

    def is_real(self, tol: float = 0.0) -> bool:
        return math.sqrt(self.x1 ** 2 + self.x2 ** 2 + self.x3 ** 2) <= tol

    def isclose(self, other, tol: float = 1e-12) -> bool:
        return (self - other).norm() <= tol

    def __repr__(self):
        return f"Quaternion({self.w!r}, {self.x1!r}, {self.x2!r}, {self.x3!r})"


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class SliceAxis:
    """A unit imaginary quaternion ``n1*i + n2*j + n3*k``.

    Any orientation is accepted; :attr:`is_canonical` tells whether this is
    the hemisphere representative of ``{n, -n}``.
    """

    n1: float
    n2: float
    n3: float

    def __post_init__(self):
        norm = math.sqrt(self.n1 ** 2 + self.n2 ** 2 + self.n3 ** 2)
        if not math.isfinite(norm) or abs(norm - 1.0) > AXIS_TOL:
            raise NonUnitAxis(f"axis norm {norm!r} is not 1")

    @classmethod
    def from_vector(cls, v) -> "SliceAxis":
        """Normalize a nonzero 3-vector into an axis."""
        v = np.asarray(v, dtype=float).reshape(3)
        norm = float(np.linalg.norm(v))
        if norm == 0.0 or not math.isfinite(norm):
            raise NonUnitAxis("cannot normalize a zero vector")
        v = v / norm
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @classmethod
    def from_quaternion(cls, q: Quaternion) -> "SliceAxis":
        if abs(q.w) > AXIS_TOL:
            raise NonUnitAxis(f"axis has real part {q.w!r}")
        return cls(q.x1, q.x2, q.x3)

    @classmethod
    def from_angles(cls, theta1: float, phi: float) -> "SliceAxis":
        """``(sin t cos p, sin t sin p, cos t)`` on ``(i, j, k)``."""
        st = math.sin(theta1)
        return cls(st * math.cos(phi), st * math.sin(phi), math.cos(theta1))

    def to_vector(self) -> np.ndarray:
        return np.array([self.n1, self.n2, self.n3])

    def as_quaternion(self) -> Quaternion:
        return Quaternion(0.0, self.n1, self.n2, self.n3)

    def __neg__(self) -> "SliceAxis":
        return SliceAxis(-self.n1, -self.n2, -self.n3)

    @property
    def is_canonical(self) -> bool:
        if self.n3 != 0.0:
            return self.n3 > 0.0
        if self.n1 != 0.0:
            return self.n1 > 0.0
        return self.n2 > 0.0

    @property
    def angles(self) -> tuple[float, float]:
        """``(theta1, phi)`` with ``phi`` in ``[0, 2*pi)``."""
        theta1 = math.atan2(math.hypot(self.n1, self.n2), self.n3)
        phi = math.atan2(self.n2, self.n1) % (2.0 * math.pi)
        return theta1, phi

    def same_slice(self, other: "SliceAxis", tol: float = 1e-12) -> bool:
        d = self.to_vector()
        e = other.to_vector()
        return bool(min(np.linalg.norm(d - e), np.linalg.norm(d + e)) <= tol)


class SliceCoords(NamedTuple):
    x: float
    y: float
    axis: SliceAxis


class Polar4(NamedTuple):
    r: float
    theta1: float
    theta2: float
    phi: float


def canonicalize_axis(n) -> SliceAxis:
    """Return the hemisphere representative of ``{n, -n}``.

    The rule is lexicographic in signs of ``(n3, n1, n2)``: keep ``n`` if
    ``n3 > 0``, or ``n3 == 0 and n1 > 0``, or ``n3 == n1 == 0 and n2 > 0``.
    """
    if isinstance(n, Quaternion):
        n = SliceAxis.from_quaternion(n)
    elif not isinstance(n, SliceAxis):
        arr = np.asarray(n, dtype=float)
        if arr.shape == (4,):
            n = SliceAxis.from_quaternion(Quaternion.from_array(arr))
        else:
            n = SliceAxis(*map(float, arr.reshape(3)))
    return n if n.is_canonical else -n


def slice_decompose(q: Quaternion, *, hemisphere: bool = False,
                    real_policy: str = "strict") -> SliceCoords:
    """Split ``q`` into ``x + n*y``.

    By default ``y = |Im q| > 0`` and ``n = Im q / |Im q|`` (unique on the
    sphere). With ``hemisphere=True`` the axis is canonicalized and ``y``
    carries the sign instead, which is the cylindrical coordinatization over
    the hemisphere.

    Real quaternions lie in every slice. ``real_policy="strict"`` raises
    :class:`RealAxisDegenerate`; ``real_policy="i"`` assigns the axis ``i``.
    """
    if not isinstance(q, Quaternion):
        q = Quaternion.from_array(q)
    y = math.sqrt(q.x1 ** 2 + q.x2 ** 2 + q.x3 ** 2)
    if y == 0.0:
        if real_policy == "strict":
            raise RealAxisDegenerate(f"{q!r} lies on the real axis")
        if real_policy != "i":
            raise ValueError(f"unknown real_policy {real_policy!r}")
        return SliceCoords(q.w, 0.0, SliceAxis(1.0, 0.0, 0.0))
    axis = SliceAxis.from_vector(q.imag)
    if hemisphere and not axis.is_canonical:
        return SliceCoords(q.w, -y, -axis)
    return SliceCoords(q.w, y, axis)


def slice_compose(x: float, y: float, axis: SliceAxis) -> Quaternion:
    """Return ``x + axis*y``."""
    if not isinstance(axis, SliceAxis):
        axis = SliceAxis(*map(float, np.asarray(axis, dtype=float).reshape(3)))
    return Quaternion(float(x), axis.n1 * y, axis.n2 * y, axis.n3 * y)


def exp_imag(axis: SliceAxis, t: float) -> Quaternion:
    """``cos t + axis*sin t``."""
    return slice_compose(math.cos(t), math.sin(t), axis)


def polar4(q) -> Polar4:
    """Four-dimensional polar coordinates.

    ``x0 = r cos t2``, ``x1 = r sin t2 sin t1 cos p``,
    ``x2 = r sin t2 sin t1 sin p``, ``x3 = r sin t2 cos t1``, with
    ``t1, t2`` in ``[0, pi]`` and ``p`` in ``(0, 2*pi]``. At the origin all
    angles are returned as zero.
    """
    a = as_qarray(q).reshape(4)
    r = float(np.linalg.norm(a))
    if r == 0.0:
        return Polar4(0.0, 0.0, 0.0, 0.0)
    rho3 = math.sqrt(a[1] ** 2 + a[2] ** 2 + a[3] ** 2)
    theta2 = math.atan2(rho3, a[0])
    theta1 = math.atan2(math.hypot(a[1], a[2]), a[3])
    phi = math.atan2(a[2], a[1])
    if phi <= 0.0:
        phi += 2.0 * math.pi
    return Polar4(r, theta1, theta2, phi)


def polar4_inverse(p: Polar4) -> Quaternion:
    r, t1, t2, ph = p
    s2 = math.sin(t2)
    return Quaternion(
        r * math.cos(t2),
        r * s2 * math.sin(t1) * math.cos(ph),
        r * s2 * math.sin(t1) * math.sin(ph),
        r * s2 * math.cos(t1),
    )


def lebesgue_weight(x, y, mode: str = "jacobian"):
    """Density of ``dx0 dx1 dx2 dx3`` against ``dx dy dOmega``.

    ``mode="jacobian"`` gives ``y**2``, the density that follows from the
    4D spherical Jacobian ``r**3 sin(t2)**2 sin(t1)``.
    ``mode="paper"`` gives the alternative density ``|y| sqrt(x**2 + y**2)``, which
    does not integrate correctly (see :func:`qslice.integrate.lebesgue_consistency`).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if mode == "jacobian":
        out = y * y
    elif mode == "paper":
        out = np.abs(y) * np.hypot(x, y)
    else:
        raise ValueError(f"unknown weight mode {mode!r}")
    return out if out.ndim else float(out)
