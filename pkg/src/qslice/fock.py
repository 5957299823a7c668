"""Truncated left quaternionic Hilbert space.

Vectors are left-coefficient sequences ``f = sum_m alpha_m f_m`` over an
orthonormal basis ``{f_m}``, with inner product
``<f|g> = sum_m alpha_m conj(beta_m)``. This is the form for which
``<q f|g> = q <f|g>`` and ``<f|q g> = <f|g> conj(q)``.

Function-space realizations use the regular monomials

    Phi_m(q) = q**m / (2 pi sqrt(x_m!))      on H,
    U_m(z)   = z**m / sqrt(2 pi x_m!)        on a slice,

so that ``sqrt(2 pi) Phi_m`` restricted to a slice equals ``U_m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NotOrthonormal, ShapeMismatch
from .measures import make_measure
from .quatcore import (
    CAYLEY, Quaternion, SliceAxis, as_qarray, qabs, qconj, qmul, qpowers,
    slice_compose, slice_decompose,
)

__all__ = [
    "FockVector", "inner_product", "eval_Phi", "eval_U", "phi_function",
    "parseval_check", "completeness_defect", "restrict", "restrict_coefficients",
    "regularity_residual", "DEFAULT_NMAX", "SQRT_2PI",
]

DEFAULT_NMAX = 64
SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class FockVector:
    """A truncated vector ``sum_m coeffs[m] f_m`` with quaternion coefficients."""

    coeffs: np.ndarray
    measure: str | None = None

    def __post_init__(self):
        c = as_qarray(self.coeffs) if not isinstance(self.coeffs, np.ndarray) else self.coeffs
        c = np.array(c, dtype=float)
        if c.ndim != 2 or c.shape[1] != 4:
            raise ShapeMismatch(f"coefficients must have shape (N+1, 4), got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, n_max: int, measure: str | None = None) -> "FockVector":
        return cls(np.zeros((n_max + 1, 4)), measure)

    @classmethod
    def basis(cls, m: int, n_max: int, measure: str | None = None) -> "FockVector":
        c = np.zeros((n_max + 1, 4))
        c[m, 0] = 1.0
        return cls(c, measure)

    @classmethod
    def from_quaternions(cls, qs: Sequence, measure: str | None = None) -> "FockVector":
        return cls(np.array([as_qarray(q) if not isinstance(q, (int, float))
                             else [float(q), 0, 0, 0] for q in qs], dtype=float), measure)

    @property
    def n_max(self) -> int:
        return self.coeffs.shape[0] - 1

    def __len__(self):
        return self.coeffs.shape[0]

    def __getitem__(self, m) -> Quaternion:
        return Quaternion.from_array(self.coeffs[m])

    def _check(self, other: "FockVector"):
        if not isinstance(other, FockVector):
            raise TypeError(f"expected FockVector, got {type(other).__name__}")
        if self.coeffs.shape != other.coeffs.shape:
            raise ShapeMismatch(f"lengths {len(self)} and {len(other)} differ")
        if self.measure is not None and other.measure is not None and self.measure != other.measure:
            raise ShapeMismatch(f"measures {self.measure!r} and {other.measure!r} differ")

    def __add__(self, other):
        self._check(other)
        return FockVector(self.coeffs + other.coeffs, self.measure or other.measure)

    def __sub__(self, other):
        self._check(other)
        return FockVector(self.coeffs - other.coeffs, self.measure or other.measure)

    def __neg__(self):
        return FockVector(-self.coeffs, self.measure)

    def __rmul__(self, q):
        """Left scalar multiplication ``q f``."""
        if isinstance(q, (int, float, np.floating, np.integer)):
            return FockVector(float(q) * self.coeffs, self.measure)
        return FockVector(qmul(as_qarray(q)[None, :], self.coeffs), self.measure)

    def inner(self, other: "FockVector") -> Quaternion:
        return inner_product(self, other)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.coeffs ** 2)))

    def allclose(self, other: "FockVector", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.max(qabs(self.coeffs - other.coeffs)) <= atol)


def inner_product(f: FockVector, g: FockVector) -> Quaternion:
    """``<f|g> = sum_m alpha_m conj(beta_m)``."""
    f._check(g)
    return Quaternion.from_array(np.sum(qmul(f.coeffs, qconj(g.coeffs)), axis=0))


def _scales(m: int, measure) -> np.ndarray:
    return make_measure(measure).inv_sqrt_factorials(m)


def eval_Phi(m: int, q, measure="exponential"):
    """``Phi_m(q) = q**m / (2 pi sqrt(x_m!))``; Quaternion in, Quaternion out."""
    c = _scales(m, measure)[m] / (2.0 * math.pi)
    if isinstance(q, Quaternion):
        return (q ** m) * c
    return qpowers(q, m)[..., m, :] * c


def eval_U(m: int, z, measure="exponential"):
    """``U_m(z) = z**m / sqrt(2 pi x_m!)`` for ``z`` on a slice.

    ``z`` may be a Quaternion, an array of them, or an ``(x, y, axis)`` triple.
    """
    if isinstance(z, tuple) and len(z) == 3 and isinstance(z[2], SliceAxis):
        z = slice_compose(*z)
    c = _scales(m, measure)[m] / SQRT_2PI
    if isinstance(z, Quaternion):
        return (z ** m) * c
    return qpowers(z, m)[..., m, :] * c


def phi_function(alpha, measure="exponential", scale: float = 1.0) -> Callable:
    """Vectorized ``q -> scale * sum_m alpha_m Phi_m(q)``."""
    a = alpha.coeffs if isinstance(alpha, FockVector) else as_qarray(alpha)
    n = a.shape[0] - 1
    c = scale * _scales(n, measure) / (2.0 * math.pi)
    ac = a * c[:, None]

    def h(q):
        q = as_qarray(q)
        P = qpowers(q, n)
        return np.sum(qmul(ac, P), axis=-2)

    return h


def _gram_defect(basis: Sequence[FockVector]) -> float:
    if not basis:
        return 0.0
    C = np.array([b.coeffs for b in basis])
    a = len(basis)
    Ct = np.moveaxis(C, 1, -1).reshape(a * 4, -1)
    Dt = np.moveaxis(qconj(C), 1, -1).reshape(a * 4, -1)
    G = np.einsum("aibj,ijl->abl", (Ct @ Dt.T).reshape(a, 4, a, 4), CAYLEY)
    G[np.arange(len(basis)), np.arange(len(basis)), 0] -= 1.0
    return float(np.max(qabs(G)))


def parseval_check(f: FockVector, basis: Sequence[FockVector], gram_tol: float = 1e-10) -> float:
    """``| ||f||^2 - sum_n |<u_n|f>|^2 |`` for an orthonormal family ``basis``."""
    d = _gram_defect(basis)
    if d > gram_tol:
        raise NotOrthonormal(f"basis Gram defect {d:.3e} exceeds {gram_tol:g}")
    total = sum(inner_product(u, f).norm2() for u in basis)
    return abs(f.norm() ** 2 - total)


def completeness_defect(f: FockVector, g: FockVector, basis: Sequence[FockVector]) -> float:
    """``| <f|g> - sum_n <f|u_n><u_n|g> |``."""
    s = Quaternion()
    for u in basis:
        s = s + inner_product(f, u) * inner_product(u, g)
    return (inner_product(f, g) - s).norm()


def restrict_coefficients(alpha) -> np.ndarray:
    """U-coefficients of the slice restriction of ``sum alpha_m Phi_m``."""
    a = alpha.coeffs if isinstance(alpha, FockVector) else as_qarray(alpha)
    return a / SQRT_2PI


def restrict(alpha, axis: SliceAxis, measure="exponential") -> Callable:
    """Restriction of ``h = sum alpha_m Phi_m`` to the slice of ``axis``.

    The returned function takes ``(n, 2)`` arrays of ``(x, y)`` pairs (or a
    Quaternion already on the slice) and evaluates ``h(x + axis*y)``.
    """
    h = phi_function(alpha, measure)
    n = axis.to_vector()

    def h_n(z):
        if isinstance(z, Quaternion):
            return Quaternion.from_array(h(z.to_array()[None])[0])
        z = np.asarray(z, dtype=float)
        if z.shape[-1] == 2:
            q = np.concatenate([z[..., :1], z[..., 1:2] * n], axis=-1)
        else:
            q = z
        return h(q)

    return h_n


def regularity_residual(f: Callable, q: Quaternion, h: float = 1e-3, side: str = "right") -> float:
    """Central-difference norm of the slice Cauchy-Riemann operator at ``q``.

    With ``q = x + n*y`` on its slice, ``left`` is ``(d_x f + n d_y f)/2`` and
    ``right`` is ``(d_x f + (d_y f) n)/2``. ``f`` is vectorized over
    ``(k, 4)`` quaternion arrays.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    x, y, axis = slice_decompose(q)
    n = axis.as_quaternion().to_array()
    pts = np.array([
        slice_compose(x + h, y, axis).to_array(),
        slice_compose(x - h, y, axis).to_array(),
        slice_compose(x, y + h, axis).to_array(),
        slice_compose(x, y - h, axis).to_array(),
    ])
    v = np.asarray(f(pts), dtype=float)
    dx = (v[0] - v[1]) / (2.0 * h)
    dy = (v[2] - v[3]) / (2.0 * h)
    if side == "left":
        d = 0.5 * (dx + qmul(n, dy))
    elif side == "right":
        d = 0.5 * (dx + qmul(dy, n))
    else:
        raise ValueError(f"unknown side {side!r}")
    return float(np.linalg.norm(d))
