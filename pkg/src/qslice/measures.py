"""Moment measures on the half line and Gauss rules built from them.

A measure ``dmu`` on ``(0, inf)`` enters only through its moments
``mu_n = int x**n dmu``. From them come the ratios ``x_n = mu_n / mu_{n-1}``,
the generalized factorials ``x_n! = mu_n`` and the generalized exponential
``N(r) = sum_n r**(2n) / x_n!``.
"""
from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IllConditioned, InvalidMoments, NonConvergent, OutsideConvergence

__all__ = [
    "MomentMeasure", "RadialRule", "make_measure", "load_moments",
    "x_factorial", "normalization_N", "normalization_terms", "radial_rule",
    "check_divergence", "normalization_N_array", "SERIES_CAP",
]

SERIES_CAP = 100_000


class MomentMeasure:
    """A normalized measure known through its moment sequence.

    Built-in kinds are ``"exponential"`` (``dmu = e^{-x} dx``, ``mu_n = n!``)
    and ``"gamma"`` (``dmu = x^s e^{-x} dx / Gamma(s+1)``,
    ``mu_n = Gamma(n+s+1)/Gamma(s+1)``). ``"explicit"`` wraps a finite user
    sequence.

    Ratios ``x_n`` are memoized lazily; the memo is guarded by a lock so
    concurrent readers always see a consistent prefix.
    """

    def __init__(self, kind: str, s: float = 0.0, moments=None,
                 convergence_radius: float = math.inf, hankel_depth: int = 6):
        self.kind = kind
        self.s = float(s)
        self.convergence_radius = float(convergence_radius)
        self._lock = threading.Lock()
        self._ratios = [1.0]
        if kind == "exponential":
            self.s = 0.0
        elif kind == "gamma":
            if not self.s > -1.0:
                raise InvalidMoments(f"gamma measure needs s > -1, got {s!r}")
        elif kind == "explicit":
            mu = np.asarray(moments, dtype=float).ravel()
            _validate_explicit(mu, hankel_depth)
            self._explicit = mu
            self._ratios = [1.0] + list(mu[1:] / mu[:-1])
        else:
            raise InvalidMoments(f"unknown measure kind {kind!r}")

    @property
    def name(self) -> str:
        if self.kind == "gamma":
            return f"gamma:{self.s:g}"
        return self.kind

    @property
    def available(self) -> float:
        """Number of moments available (infinite for closed forms)."""
        if self.kind == "explicit":
            return len(self._explicit)
        return math.inf

    def __repr__(self):
        return f"MomentMeasure({self.name!r})"

    def __eq__(self, other):
        if not isinstance(other, MomentMeasure):
            return NotImplemented
        if self.kind != other.kind or self.s != other.s:
            return False
        if self.kind == "explicit":
            return np.array_equal(self._explicit, other._explicit)
        return True

    def __hash__(self):
        return hash((self.kind, self.s))

    def ratios(self, n: int) -> np.ndarray:
        """``x_0 .. x_n`` with ``x_0 = 1``."""
        if len(self._ratios) <= n:
            if self.kind == "explicit":
                raise InvalidMoments(
                    f"only {len(self._explicit)} moments supplied, x_{n} requested")
            with self._lock:
                start = len(self._ratios)
                if start <= n:
                    self._ratios.extend(k + self.s for k in range(start, n + 1))
        return np.array(self._ratios[: n + 1])

    def ratio(self, n: int) -> float:
        return float(self.ratios(n)[n])

    def moment(self, n: int) -> float:
        if self.kind == "explicit":
            if n >= len(self._explicit):
                raise InvalidMoments(f"moment {n} not supplied")
            return float(self._explicit[n])
        return float(np.prod(self.ratios(n)[1:]))

    def moments(self, n: int) -> np.ndarray:
        """``mu_0 .. mu_n``."""
        if self.kind == "explicit":
            if n >= len(self._explicit):
                raise InvalidMoments(f"moment {n} not supplied")
            return self._explicit[: n + 1].copy()
        return np.cumprod(self.ratios(n))

    def inv_sqrt_factorials(self, n: int) -> np.ndarray:
        """``1/sqrt(x_m!)`` for ``m = 0..n`` without forming ``x_m!``."""
        return np.cumprod(1.0 / np.sqrt(self.ratios(n)))

    def recurrence(self, n: int):
        """Closed-form Jacobi coefficients ``(alpha_0..n-1, beta_1..n-1)``.

        Only the built-in kinds have them (generalized Laguerre); returns
        ``None`` for explicit sequences.
        """
        if self.kind == "explicit":
            return None
        k = np.arange(n, dtype=float)
        alpha = 2.0 * k + self.s + 1.0
        beta = k[1:] * (k[1:] + self.s)
        return alpha, beta


@dataclass(frozen=True)
class RadialRule:
    """Gauss rule in the moment variable ``x`` (the slice radius squared)."""

    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int

    def __len__(self):
        return len(self.nodes)

    def integrate_power(self, k: int) -> float:
        return float(np.sum(self.weights * self.nodes ** k))


def _validate_explicit(mu: np.ndarray, hankel_depth: int) -> None:
    if mu.size == 0:
        raise InvalidMoments("empty moment sequence")
    if mu[0] != 1.0:
        raise InvalidMoments(f"mu_0 must be 1, got {mu[0]!r}")
    if not np.all(np.isfinite(mu)) or np.any(mu <= 0.0):
        raise InvalidMoments("all moments must be finite and positive")
    # Stieltjes realizability: H = (mu_{i+j}) and H1 = (mu_{i+j+1}) are
    # positive definite. Only the leading blocks are tested; larger Hankel
    # matrices are too ill conditioned in double precision to decide.
    for shift in (0, 1):
        size = min(hankel_depth, (len(mu) - shift + 1) // 2)
        if size < 1:
            continue
        H = np.array([[mu[i + j + shift] for j in range(size)] for i in range(size)])
        d = 1.0 / np.sqrt(np.diag(H))
        try:
            np.linalg.cholesky(H * np.outer(d, d))
        except np.linalg.LinAlgError:
            raise InvalidMoments(
                f"moment sequence is not realizable (Hankel block of size {size}, "
                f"shift {shift} is not positive definite)") from None


def make_measure(desc) -> MomentMeasure:
    """Build a measure from a description.

    Accepted forms: a :class:`MomentMeasure`; the strings ``"exponential"``,
    ``"gamma:S"``, ``"file:PATH"``; a dict ``{"kind": ..., "s": ...}`` or
    ``{"moments": [...]}``; or a plain sequence of moments.
    """
    if isinstance(desc, MomentMeasure):
        return desc
    if isinstance(desc, str):
        kind, _, arg = desc.partition(":")
        kind = kind.strip().lower()
        if kind == "exponential":
            return MomentMeasure("exponential")
        if kind == "gamma":
            try:
                s = float(arg) if arg else 0.0
            except ValueError:
                raise InvalidMoments(f"bad gamma parameter {arg!r}") from None
            return MomentMeasure("gamma", s=s)
        if kind == "file":
            return MomentMeasure("explicit", moments=load_moments(arg))
        raise InvalidMoments(f"unknown measure description {desc!r}")
    if isinstance(desc, dict):
        if "moments" in desc:
            return MomentMeasure("explicit", moments=desc["moments"],
                                 convergence_radius=desc.get("l", math.inf))
        return MomentMeasure(desc["kind"], s=desc.get("s", 0.0))
    return MomentMeasure("explicit", moments=desc)


def load_moments(path) -> np.ndarray:
    """Read ``mu_0, mu_1, ...`` from a text file, one value per line.

    Blank lines and lines starting with ``#`` are skipped.
    """
    values = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            values.append(float(line))
    return np.array(values)


def x_factorial(m: MomentMeasure, n: int) -> float:
    """``x_n! = x_1 x_2 ... x_n = mu_n``; ``x_0! = 1``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return m.moment(n)


def normalization_terms(m: MomentMeasure, rho2: float, rel_tol: float = 1e-16,
                        cap: int = SERIES_CAP) -> int:
    """Number of terms ``t_n = rho2**n / x_n!`` needed for a converged sum.

    Uses the ratio bound: once ``t_{n+1}/t_n = rho2/x_{n+1} < 1`` and the
    ratios are non-increasing, the tail is at most ``t_{n+1}/(1 - ratio)``.
    """
    total = 1.0
    term = 1.0
    n = 0
    while True:
        if n >= cap:
            raise NonConvergent(f"series not converged after {cap} terms")
        x_next = m.ratio(n + 1) if n + 1 < m.available else None
        if x_next is None:
            return n + 1
        ratio = rho2 / x_next
        nxt = term * ratio
        if ratio < 1.0 and nxt / (1.0 - ratio) <= rel_tol * total:
            return n + 1
        total += nxt
        term = nxt
        n += 1


def normalization_N(m: MomentMeasure, r: float, tail_tol: float = 1e-15) -> float:
    """``N(r) = sum_n r**(2n) / x_n!`` with an adaptive term count.

    Summation stops once the ratio-test bound on the remaining tail drops
    below ``tail_tol * max(1, partial sum)``.
    """
    r = float(r)
    if r < 0:
        raise ValueError("r must be non-negative")
    if r >= m.convergence_radius:
        raise OutsideConvergence(f"r={r!r} outside radius {m.convergence_radius!r}")
    r2 = r * r
    total = 1.0
    term = 1.0
    n = 0
    while True:
        if n + 1 >= m.available:
            raise NonConvergent(
                f"ran out of supplied moments after {n + 1} terms")
        ratio = r2 / m.ratio(n + 1)
        nxt = term * ratio
        if ratio < 1.0 and nxt / (1.0 - ratio) <= tail_tol * max(1.0, total):
            return total + nxt
        total += nxt
        term = nxt
        n += 1
        if n >= SERIES_CAP:
            raise NonConvergent(f"N({r}) not converged after {SERIES_CAP} terms")


def check_divergence(m: MomentMeasure, terms: int = 10_000) -> bool:
    """Heuristic test that ``sum 1/sqrt(x_n)`` diverges.

    Returns ``True`` if the partial sums keep growing appreciably over the
    last 90% of ``terms`` terms; otherwise warns and returns ``False``.
    """
    terms = int(min(terms, m.available))
    inv = 1.0 / np.sqrt(m.ratios(terms - 1))
    partial = np.cumsum(inv)
    head = partial[max(terms // 10 - 1, 0)]
    growing = (partial[-1] - head) > 1e-2 * partial[-1]
    if not growing:
        warnings.warn(f"sum of 1/sqrt(x_n) for {m!r} looks convergent", RuntimeWarning)
    return bool(growing)


def _hankel_jacobi(m: MomentMeasure, order: int):
    """Jacobi matrix from moments by Cholesky of the Hankel matrix."""
    mu = m.moments(2 * order)
    H = np.array([[mu[i + j] for j in range(order + 1)] for i in range(order + 1)])
    n = order + 1
    R = np.zeros((n, n))
    # Cholesky done by hand so the failing order can be reported.
    for i in range(n):
        s = H[i, i] - np.dot(R[:i, i], R[:i, i])
        if not s > 0.0 or not np.isfinite(s):
            raise IllConditioned(
                f"Hankel factorization lost positivity at order {i}", order=i)
        R[i, i] = math.sqrt(s)
        for j in range(i + 1, n):
            R[i, j] = (H[i, j] - np.dot(R[:i, i], R[:i, j])) / R[i, i]
    alpha = np.empty(order)
    for j in range(order):
        alpha[j] = R[j, j + 1] / R[j, j]
        if j > 0:
            alpha[j] -= R[j - 1, j] / R[j - 1, j - 1]
    off = np.array([R[j + 1, j + 1] / R[j, j] for j in range(order - 1)])
    if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(off))):
        raise IllConditioned("non-finite recurrence coefficients", order=order)
    return alpha, off


def radial_rule(m: MomentMeasure, order: int, method: str = "auto") -> RadialRule:
    """Gauss rule with ``order`` nodes for ``dmu``.

    The three-term recurrence is taken in closed form for built-in kinds
    (``method="auto"`` or ``"recurrence"``) and from the Hankel/Cholesky
    factorization of the moments otherwise (``method="hankel"``). Nodes and
    weights then follow from the Jacobi matrix eigendecomposition.
    """
    order = int(order)
    if order < 1:
        raise ValueError("order must be at least 1")
    rec = m.recurrence(order) if method in ("auto", "recurrence") else None
    if rec is None:
        if method == "recurrence":
            raise ValueError(f"{m!r} has no closed-form recurrence")
        if 2 * order >= m.available:
            raise InvalidMoments(
                f"order {order} needs moments up to {2 * order}, have {m.available}")
        alpha, off = _hankel_jacobi(m, order)
    else:
        alpha, beta = rec
        off = np.sqrt(beta)
    J = np.diag(alpha) + np.diag(off, 1) + np.diag(off, -1)
    nodes = np.linalg.eigvalsh(J)
    # Christoffel weights 1/sum p_k(x)^2 keep full relative accuracy in the
    # tiny tail weights, unlike squared eigenvector components.
    mu0 = m.moment(0)
    p_prev = np.zeros_like(nodes)
    p = np.full_like(nodes, 1.0 / math.sqrt(mu0))
    acc = p * p
    for k in range(order - 1):
        p_next = ((nodes - alpha[k]) * p - (off[k - 1] * p_prev if k else 0.0)) / off[k]
        p_prev, p = p, p_next
        acc += p * p
    weights = 1.0 / acc
    if np.any(nodes <= 0.0) or np.any(weights <= 0.0):
        raise IllConditioned("rule has non-positive nodes or weights", order=order)
    return RadialRule(nodes, weights, 2 * order - 1)


def normalization_N_array(m: MomentMeasure, r, tail_tol: float = 1e-15) -> np.ndarray:
    """Elementwise :func:`normalization_N` over an array of radii."""
    r = np.asarray(r, dtype=float)
    flat = r.ravel()
    out = np.array([normalization_N(m, v, tail_tol) for v in flat])
    return out.reshape(r.shape)
