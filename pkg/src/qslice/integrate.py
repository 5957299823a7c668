"""Quadrature on slices, on the hemisphere of slice axes, and on all of H.

A quaternion is parameterized as ``q = sqrt(x) * exp(n * t)`` with ``x`` the
moment variable (radius squared), ``t`` the slice angle and ``n`` the slice
axis. The measure ``dnu = dmu(r^2) dt`` on each slice is realized by a
:class:`~qslice.measures.RadialRule` in ``x`` times a :class:`ThetaRule` in
``t``; the axes are integrated against ``dOmega = sin(t1) dt1 dphi`` by a
:class:`HemisphereRule`.

Integrands are vectorized: they receive an ``(n, 4)`` array of quaternions
and return an array of shape ``(n, ..., 4)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .measures import MomentMeasure, RadialRule, make_measure, radial_rule
from .quatcore import CAYLEY, Quaternion, SliceAxis

__all__ = [
    "ThetaRule", "HemisphereRule", "QuadratureRules", "theta_rule",
    "hemisphere_rule", "axis_vectors", "slice_nodes", "integrate_slice",
    "integrate_H", "integrate_slice_gram", "integrate_H_gram",
    "lebesgue_consistency", "LebesgueReport",
]


@dataclass(frozen=True)
class ThetaRule:
    """Uniform trapezoid rule on the circle, ``2*pi*j/M`` with weight ``2*pi/M``."""

    M: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be at least 1")

    @property
    def nodes(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.M) / self.M

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.M, 2.0 * np.pi / self.M)


def theta_rule(M: int) -> ThetaRule:
    return ThetaRule(int(M))


def axis_vectors(theta1, phi, convention: str = "polar") -> np.ndarray:
    """Map hemisphere angles to unit 3-vectors on ``(i, j, k)``.

    ``"polar"``: ``(sin t1 cos p, sin t1 sin p, cos t1)``. For ``t1 < pi/2``
    this is the canonical representative of each slice, and the axes cover
    the projective plane once.

    ``"tilted"``: ``(cos t1 sin p, sin t1 sin p, cos p)``. Over
    ``t1 in [0, pi/2), p in [0, 2*pi)`` this has zero vector mass, but it
    visits antipodal pairs and so is not a chart of the projective plane.
    """
    t = np.asarray(theta1, dtype=float)
    p = np.asarray(phi, dtype=float)
    if convention == "polar":
        return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1)
    if convention == "tilted":
        return np.stack([np.cos(t) * np.sin(p), np.sin(t) * np.sin(p), np.cos(p)], axis=-1)
    raise ValueError(f"unknown axis convention {convention!r}")


@dataclass(frozen=True)
class HemisphereRule:
    """Product rule for ``dOmega`` on ``t1 in [0, pi/2)``, ``phi in [0, 2*pi)``.

    Gauss-Legendre in ``cos t1`` on ``(0, 1]`` times a uniform ``phi`` rule.
    Nodes are flattened with ``phi`` varying fastest.
    """

    n_theta: int
    n_phi: int

    def __post_init__(self):
        if self.n_theta < 1 or self.n_phi < 1:
            raise ValueError("hemisphere orders must be at least 1")

    def _grid(self):
        u, wu = np.polynomial.legendre.leggauss(self.n_theta)
        u = 0.5 * (u + 1.0)
        wu = 0.5 * wu
        phi = 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi
        wphi = 2.0 * np.pi / self.n_phi
        return u, wu, phi, wphi

    @property
    def theta1(self) -> np.ndarray:
        u, _, _, _ = self._grid()
        return np.repeat(np.arccos(u), self.n_phi)

    @property
    def phi(self) -> np.ndarray:
        _, _, phi, _ = self._grid()
        return np.tile(phi, self.n_theta)

    @property
    def weights(self) -> np.ndarray:
        _, wu, _, wphi = self._grid()
        return np.repeat(wu * wphi, self.n_phi)

    def __len__(self):
        return self.n_theta * self.n_phi

    def axes(self, convention: str = "polar") -> np.ndarray:
        return axis_vectors(self.theta1, self.phi, convention)

    def integrate(self, fn: Callable) -> float:
        """``sum w * fn(theta1, phi)`` for a vectorized scalar ``fn``."""
        return float(np.sum(self.weights * fn(self.theta1, self.phi)))

    def mass(self) -> float:
        return float(np.sum(self.weights))

    def vector_mass(self, convention: str = "polar") -> np.ndarray:
        return self.weights @ self.axes(convention)


def hemisphere_rule(n_theta: int, n_phi: int) -> HemisphereRule:
    return HemisphereRule(int(n_theta), int(n_phi))


@dataclass(frozen=True)
class QuadratureRules:
    """The radial, slice-angle and hemisphere rules for one measure."""

    measure: MomentMeasure
    radial: RadialRule
    theta: ThetaRule
    hemisphere: HemisphereRule

    @classmethod
    def default(cls, measure="exponential", radial_order: int = 40,
                theta_order: int = 64, hemisphere=(32, 64)) -> "QuadratureRules":
        m = make_measure(measure)
        return cls(m, radial_rule(m, radial_order), theta_rule(theta_order),
                   hemisphere_rule(*hemisphere))

    def refined(self, factor: int = 2) -> "QuadratureRules":
        return QuadratureRules(
            self.measure, radial_rule(self.measure, factor * len(self.radial)),
            theta_rule(factor * self.theta.M),
            hemisphere_rule(factor * self.hemisphere.n_theta,
                            factor * self.hemisphere.n_phi))

    @property
    def slice_size(self) -> int:
        return len(self.radial) * self.theta.M


def _axis_array(axis) -> np.ndarray:
    if isinstance(axis, SliceAxis):
        return axis.to_vector()
    return np.asarray(axis, dtype=float)


def slice_nodes(axes, rules: QuadratureRules, radial_factor=None):
    """Quaternion nodes and weights on one or more slices.

    ``axes`` is a SliceAxis or a ``(K, 3)`` array. Returns ``q`` of shape
    ``(K * R * T, 4)`` and weights of shape ``(K * R * T,)`` ordered by axis,
    then radial node, then angle. ``radial_factor`` (length ``R``) multiplies
    the radial weights.
    """
    n = np.atleast_2d(_axis_array(axes))
    r = np.sqrt(rules.radial.nodes)
    t = rules.theta.nodes
    c = np.outer(r, np.cos(t))
    s = np.outer(r, np.sin(t))
    K = n.shape[0]
    q = np.empty((K,) + c.shape + (4,))
    q[..., 0] = c
    q[..., 1:] = s[None, :, :, None] * n[:, None, None, :]
    wr = rules.radial.weights
    if radial_factor is not None:
        wr = wr * np.asarray(radial_factor, dtype=float)
    w = np.outer(wr, rules.theta.weights).ravel()
    return q.reshape(-1, 4), np.tile(w, K)


_CONJ_SIGN = np.array([1.0, -1.0, -1.0, -1.0])


def _columns(F: np.ndarray) -> np.ndarray:
    """``(n, a, 4)`` values as an ``(a, 4, n)`` array; free for power-major buffers."""
    return np.moveaxis(F, 0, -1)


def _gram(F: np.ndarray, G: np.ndarray | None, w: np.ndarray) -> np.ndarray:
    """``sum_n w_n F[n, a] * G[n, b]`` as quaternion products, shape ``(a, b, 4)``.

    ``G=None`` means the conjugate of ``F``.
    """
    a = F.shape[1]
    Fc = _columns(F)
    Ft = (Fc * w).reshape(a * 4, -1)
    if G is None:
        b = a
        Gt = (Fc * _CONJ_SIGN[:, None]).reshape(b * 4, -1)
    else:
        b = G.shape[1]
        Gt = _columns(G).reshape(b * 4, -1)
    P = Ft @ Gt.T
    return np.einsum("aibj,ijl->abl", P.reshape(a, 4, b, 4), CAYLEY)


def _wrap(total: np.ndarray):
    return Quaternion.from_array(total) if total.shape == (4,) else total


def integrate_slice(f: Callable, axis, rules: QuadratureRules, radial_factor=None):
    """Approximate ``int_{C_n} f(z) dnu(z)`` on the slice of ``axis``.

    Returns a :class:`Quaternion` for scalar integrands, else an array.
    """
    q, w = slice_nodes(axis, rules, radial_factor)
    vals = np.asarray(f(q), dtype=float)
    return _wrap(np.tensordot(w, vals, axes=(0, 0)))


def _pair(F, G, q):
    fv = np.asarray(F(q), dtype=float)
    gv = None if G is None else np.asarray(G(q), dtype=float)
    return fv, gv


def integrate_slice_gram(F: Callable, G: Callable | None, axis, rules: QuadratureRules,
                         radial_factor=None) -> np.ndarray:
    """``int F_a(z) G_b(z) dnu`` for vector-valued ``F``, ``G``; shape ``(a, b, 4)``.

    ``G=None`` stands for the conjugate of ``F``, giving the Gram matrix of
    the family ``F`` under the slice inner product.
    """
    q, w = slice_nodes(axis, rules, radial_factor)
    return _gram(*_pair(F, G, q), w)


def _chunks(K: int, size: int):
    return [(lo, min(lo + size, K)) for lo in range(0, K, size)]


def _over_hemisphere(partial: Callable, rules: QuadratureRules, convention: str,
                     chunk: int, workers):
    axes = rules.hemisphere.axes(convention)
    wh = rules.hemisphere.weights
    spans = _chunks(len(wh), chunk)

    def run(span):
        lo, hi = span
        return partial(axes[lo:hi], wh[lo:hi])

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, spans))
    else:
        parts = [run(s) for s in spans]
    # Reduction in chunk order keeps results bit-reproducible with threads.
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    return total


def integrate_H(f: Callable, rules: QuadratureRules, *, convention: str = "polar",
                radial_factor=None, chunk: int = 16, workers: int | None = None):
    """Approximate ``int_H f(q) dnu(z) dOmega`` as hemisphere sum of slice sums.

    ``workers > 1`` evaluates axis chunks on a thread pool; the reduction
    order is fixed, so the result does not depend on ``workers``.
    """
    S = rules.slice_size

    def partial(axes, wh):
        q, w = slice_nodes(axes, rules, radial_factor)
        w = w * np.repeat(wh, S)
        return np.tensordot(w, np.asarray(f(q), dtype=float), axes=(0, 0))

    return _wrap(_over_hemisphere(partial, rules, convention, chunk, workers))


def integrate_H_gram(F: Callable, G: Callable | None, rules: QuadratureRules, *,
                     convention: str = "polar", radial_factor=None,
                     chunk: int = 16, workers: int | None = None) -> np.ndarray:
    """``int_H F_a(q) G_b(q) dnu dOmega`` with quaternion products, shape ``(a, b, 4)``.

    ``G=None`` stands for the conjugate of ``F``.
    """
    S = rules.slice_size

    def partial(axes, wh):
        q, w = slice_nodes(axes, rules, radial_factor)
        w = w * np.repeat(wh, S)
        return _gram(*_pair(F, G, q), w)

    return _over_hemisphere(partial, rules, convention, chunk, workers)


@dataclass(frozen=True)
class LebesgueReport:
    mode: str
    value: float
    reference: float
    defect: float
    closed_form: float


def lebesgue_consistency(mode: str = "jacobian", hemisphere: HemisphereRule | None = None,
                         radial_order: int = 24, angle_order: int = 48) -> LebesgueReport:
    """Integrate ``exp(-|q|^2)`` over H in slice coordinates and compare with ``pi^2``.

    The ``(x, y)`` half of the integral is done in plane polar coordinates
    ``x = rho cos a, y = rho sin a``: Gauss-Laguerre in ``rho^2`` and
    Gauss-Legendre panels on ``[0, pi]`` and ``[pi, 2*pi]`` (the paper-mode
    weight has kinks at ``a = 0, pi``). ``closed_form`` is the exact value
    the chosen weight produces: ``pi^2`` for the Jacobian, ``4*pi`` for the
    alternative weight.
    """
    from .quatcore import lebesgue_weight

    hemisphere = hemisphere or hemisphere_rule(32, 64)
    rr = radial_rule(make_measure("exponential"), radial_order)
    g, wg = np.polynomial.legendre.leggauss(angle_order)
    a = np.concatenate([0.5 * np.pi * (g + 1.0), np.pi + 0.5 * np.pi * (g + 1.0)])
    wa = np.concatenate([0.5 * np.pi * wg, 0.5 * np.pi * wg])
    rho = np.sqrt(rr.nodes)[:, None]
    dens = lebesgue_weight(rho * np.cos(a), rho * np.sin(a), mode)
    # rho drho da = (1/2) dt da with t = rho^2, and exp(-t) is in the rule
    plane = 0.5 * float(np.sum(rr.weights[:, None] * wa[None, :] * dens))
    value = plane * hemisphere.mass()
    reference = math.pi ** 2
    closed = math.pi ** 2 if mode == "jacobian" else 4.0 * math.pi
    return LebesgueReport(mode, value, reference, abs(value - reference), closed)
