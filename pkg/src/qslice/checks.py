"""Verification suite: configuration, the registry of checks, and reports.

Every check returns one or more *parts*, each a measured value with its
tolerance and verdict. A check passes when all its parts pass. The record's
``residual`` and ``tol`` are those of the part closest to (or furthest past)
its tolerance, so ``pass`` agrees with the headline numbers.
"""
from __future__ import annotations

import json
import math
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

import numpy as np

from . import cs_kernel, directint, fock, integrate, operators
from .errors import CheckUnknown, ConfigInvalid, InvalidMoments
from .fock import FockVector, SQRT_2PI
from .integrate import QuadratureRules, hemisphere_rule
from .measures import make_measure
from .quatcore import Quaternion, SliceAxis, qabs, qmul, qpowers, slice_compose

__all__ = ["SuiteConfig", "SuiteReport", "CheckRecord", "Part", "CHECKS", "run_suite",
           "check_ids"]

TWO_PI = 2.0 * math.pi


# --------------------------------------------------------------------------- config

@dataclass(frozen=True)
class SuiteConfig:
    """Settings shared by all checks.

    ``nmax`` is the general truncation, ``nmax_identity`` the truncation for
    the quadratic-cost resolution checks and ``bch_nmax`` the working
    truncation of the composition-law check. ``tol`` maps ``"id/part"`` to a
    replacement tolerance.
    """

    nmax: int = 64
    nmax_identity: int = 32
    bch_nmax: int = 128
    radial_order: int = 40
    theta_order: int = 64
    hemisphere: tuple = (32, 64)
    measure: str = "exponential"
    weight_mode: str = "jacobian"
    w_mode: str = "isometric"
    seed: int = 0
    timing: bool = True
    workers: int = 1
    tol: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "hemisphere", tuple(int(v) for v in self.hemisphere))
        object.__setattr__(self, "tol", {str(k): float(v) for k, v in dict(self.tol).items()})
        self.validate()

    def validate(self) -> None:
        for name in ("nmax", "nmax_identity", "bch_nmax", "radial_order", "theta_order", "workers"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise ConfigInvalid(f"{name} must be an integer >= 1, got {v!r}")
        if len(self.hemisphere) != 2 or min(self.hemisphere) < 1:
            raise ConfigInvalid(f"hemisphere orders must be two integers >= 1, got {self.hemisphere!r}")
        if self.weight_mode not in ("jacobian", "paper"):
            raise ConfigInvalid(f"weight_mode must be 'jacobian' or 'paper', got {self.weight_mode!r}")
        if self.w_mode not in ("isometric", "paper"):
            raise ConfigInvalid(f"w_mode must be 'isometric' or 'paper', got {self.w_mode!r}")
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigInvalid(f"seed must be a non-negative integer, got {self.seed!r}")
        for k, v in self.tol.items():
            if not (v > 0 and math.isfinite(v)):
                raise ConfigInvalid(f"tolerance {k} must be positive and finite, got {v!r}")
        try:
            make_measure(self.measure)
        except (InvalidMoments, ValueError, OSError) as exc:
            raise ConfigInvalid(f"bad measure {self.measure!r}: {exc}") from exc

    # flat key=value text ------------------------------------------------------

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hemisphere"] = list(self.hemisphere)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigInvalid(f"unknown config keys: {', '.join(sorted(extra))}")
        return cls(**d)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "tol":
                lines.extend(f"tol.{k}={_fmt(t)}" for k, t in sorted(v.items()))
            elif f.name == "hemisphere":
                lines.append(f"hemisphere={v[0]},{v[1]}")
            elif isinstance(v, bool):
                lines.append(f"{f.name}={'true' if v else 'false'}")
            else:
                lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, base: "SuiteConfig | None" = None) -> "SuiteConfig":
        return cls.from_pairs(parse_pairs(text), base)

    @classmethod
    def from_pairs(cls, pairs: dict, base: "SuiteConfig | None" = None) -> "SuiteConfig":
        """Apply string-valued ``key=value`` overrides on top of ``base``."""
        d = (base or cls()).to_dict()
        tol = dict(d["tol"])
        types = {f.name: f.type for f in fields(cls)}
        for raw_key, raw in pairs.items():
            key = raw_key.strip().replace("-", "_")
            if key.startswith("tol."):
                tol[key[4:]] = _parse_float(raw, key)
                continue
            if key not in types or key == "tol":
                raise ConfigInvalid(f"unknown config key {raw_key!r}")
            d[key] = _coerce(key, raw)
        d["tol"] = tol
        return cls.from_dict(d)


def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"{key} must be a number, got {raw!r}") from exc


def _coerce(key: str, raw):
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    if key in ("measure", "weight_mode", "w_mode"):
        return raw
    if key == "hemisphere":
        parts = raw.replace("x", ",").split(",")
        try:
            return tuple(int(p) for p in parts)
        except ValueError as exc:
            raise ConfigInvalid(f"hemisphere must look like '32,64', got {raw!r}") from exc
    if key == "timing":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigInvalid(f"timing must be a boolean, got {raw!r}")
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigInvalid(f"{key} must be an integer, got {raw!r}") from exc


def parse_pairs(text: str) -> dict:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigInvalid(f"line {n}: expected key=value, got {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


# --------------------------------------------------------------------------- records

@dataclass(frozen=True)
class Part:
    name: str
    value: float
    tol: float
    passed: bool

    @property
    def ratio(self) -> float:
        if self.value == 0:
            return 0.0
        return math.inf if self.tol == 0 else abs(self.value) / self.tol


@dataclass(frozen=True)
class CheckRecord:
    id: str
    anchor: str
    residual: float
    tol: float
    passed: bool
    ms: float
    parts: tuple = ()
    info: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "residual": _finite(self.residual),
            "tol": _finite(self.tol),
            "pass": bool(self.passed),
            "ms": self.ms,
            "parts": [{"name": p.name, "value": _finite(p.value), "tol": _finite(p.tol),
                       "pass": bool(p.passed)} for p in self.parts],
            "info": {k: _jsonable(v) for k, v in sorted(self.info.items())},
        }


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _jsonable(v):
    if isinstance(v, Quaternion):
        return [_finite(c) for c in v.to_array()]
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return _finite(v)
    return str(v)


@dataclass(frozen=True)
class SuiteReport:
    config: SuiteConfig
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_json_obj(self) -> dict:
        return {"config": self.config.to_dict(),
                "checks": [c.to_json_obj() for c in self.checks],
                "pass": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            out.append(f"{tag}  {c.id:<20} residual={c.residual:.3e}  tol={c.tol:.1e}")
        out.append(f"overall: {'PASS' if self.passed else 'FAIL'} "
                   f"({sum(c.passed for c in self.checks)}/{len(self.checks)})")
        return out


# --------------------------------------------------------------------------- context

class _Context:
    """Lazily built objects shared by several checks."""

    def __init__(self, cfg: SuiteConfig):
        self.cfg = cfg
        self.measure = make_measure(cfg.measure)
        self._rules = None

    @property
    def rules(self) -> QuadratureRules:
        if self._rules is None:
            c = self.cfg
            self._rules = QuadratureRules.default(self.measure, c.radial_order, c.theta_order,
                                                  c.hemisphere)
        return self._rules

    def rng(self, check_id: str) -> np.random.Generator:
        return np.random.default_rng([self.cfg.seed, zlib.crc32(check_id.encode())])


def _lt(name, value, tol):
    value = float(value)
    return Part(name, value, tol, bool(value < tol))


def _random_axis(rng) -> SliceAxis:
    return SliceAxis.from_vector(rng.normal(size=3))


def _disc_point(rng, axis: SliceAxis, radius: float) -> Quaternion:
    r = radius * math.sqrt(rng.uniform())
    t = rng.uniform(0.0, TWO_PI)
    return slice_compose(r * math.cos(t), r * math.sin(t), axis)


def _ball_point(rng, radius: float) -> Quaternion:
    v = rng.normal(size=4)
    v *= radius * rng.uniform() ** 0.25 / np.linalg.norm(v)
    return Quaternion.from_array(v)


def _gram_defect(G: np.ndarray, diag: float = 1.0) -> float:
    D = G.copy()
    k = D.shape[0]
    D[np.arange(k), np.arange(k), 0] -= diag
    return float(np.max(qabs(D)))


# --------------------------------------------------------------------------- checks

def _angular_mass(ctx):
    hr = ctx.rules.hemisphere
    return [_lt("mass", abs(hr.mass() - TWO_PI), 1e-12)], {"mass": hr.mass()}


def _angular_vector(ctx):
    hr = ctx.rules.hemisphere
    tilted = float(np.linalg.norm(hr.vector_mass("tilted")))
    polar = hr.vector_mass("polar")
    return [_lt("vector", tilted, 1e-12)], {"polar_vector_mass": polar}


def _basis_ortho_H(ctx):
    n = 12
    s = ctx.measure.inv_sqrt_factorials(n) / TWO_PI
    G = integrate.integrate_H_gram(lambda q: qpowers(q, n, scale=s), None, ctx.rules)
    return [_lt("gram", _gram_defect(G), 1e-9)], {}


def _basis_ortho_slice(ctx):
    n = 12
    axis = _random_axis(ctx.rng("basis.ortho.slice"))
    inv = ctx.measure.inv_sqrt_factorials(n)
    Gphi = integrate.integrate_slice_gram(lambda q: qpowers(q, n, scale=inv / TWO_PI), None,
                                          axis, ctx.rules)
    GU = integrate.integrate_slice_gram(lambda q: qpowers(q, n, scale=inv / SQRT_2PI), None,
                                        axis, ctx.rules)
    return [_lt("phi", _gram_defect(Gphi, 1.0 / TWO_PI), 1e-9),
            _lt("U", _gram_defect(GU), 1e-10)], {"axis": axis.to_vector()}


def _cs_norm(ctx):
    rng = ctx.rng("cs.norm")
    n = ctx.cfg.nmax
    eta = gam = 0.0
    for _ in range(50):
        q = _ball_point(rng, 2.0)
        eta = max(eta, abs(cs_kernel.coherent_H(q, ctx.measure, n).norm() - 1.0 / TWO_PI))
        gam = max(gam, abs(cs_kernel.gamma_canonical(q, n).norm() - 1.0))
    return ([_lt("eta", eta, 1e-10), _lt("gamma", gam, 1e-10)],
            {"eta_norm_expected": 1.0 / TWO_PI, "eta_norm_claimed": 1.0})


def _resolution_slice(ctx):
    axis = _random_axis(ctx.rng("resolution.slice"))
    d = cs_kernel.resolution_check(axis, ctx.measure, ctx.cfg.nmax_identity, ctx.rules)
    ctrl = cs_kernel.resolution_check(axis, ctx.measure, ctx.cfg.nmax_identity, ctx.rules,
                                      with_normalization=False)
    return [_lt("defect", d, 1e-8)], {"without_weight": ctrl}


def _resolution_H(ctx):
    d = cs_kernel.resolution_check("H", ctx.measure, ctx.cfg.nmax_identity, ctx.rules)
    return [_lt("defect", d, 1e-8)], {}


def _kernel_props(ctx):
    rep = cs_kernel.kernel_properties(ctx.measure, 100, ctx.rules, seed=ctx.cfg.seed)
    parts = [
        _lt("hermiticity", rep.hermiticity, 1e-12),
        # shortfall below zero of min K(q, qbar); the minimum itself goes to info
        Part("positivity_min", max(0.0, -rep.positivity_min), 0.0, bool(rep.positivity_min > 0)),
        _lt("positivity_vs_N", rep.positivity_defect, 1e-10),
        _lt("gram_min_eig", max(0.0, -rep.gram_min_eig), 1e-10),
        _lt("idempotence_H", rep.idempotence, 1e-8),
        _lt("idempotence_slice", rep.idempotence_slice, 1e-8),
    ]
    return parts, {"gram_min_eig": rep.gram_min_eig, "positivity_min": rep.positivity_min}


def _kernel_reproduce(ctx):
    rng = ctx.rng("kernel.reproduce")
    n = 12
    axis = _random_axis(rng)
    alpha = rng.normal(size=(n + 1, 4))
    u = ctx.measure.inv_sqrt_factorials(n) / SQRT_2PI
    au = alpha * u[:, None]
    pts = np.array([_disc_point(rng, axis, 2.0).to_array() for _ in range(20)])

    def f(q):
        return np.sum(qmul(au, qpowers(q, n)), axis=-2)

    def K(q):
        return cs_kernel.kernel_slice_array(q[:, None, :], pts[None, :, :], ctx.measure)

    got = integrate.integrate_slice_gram(lambda q: f(q)[:, None, :], K, axis, ctx.rules)[0]
    want = f(pts)
    return [_lt("reproduce", float(np.max(qabs(got - want))), 1e-9)], {}


def _weyl_scale(ctx):
    rng = ctx.rng("weyl.scale")
    n = 12
    vecs = [FockVector.basis(m, n, ctx.measure.name) for m in (0, 1, 5, 12)]
    vecs.append(FockVector(rng.normal(size=(n + 1, 4)), ctx.measure.name))
    modes = ("paper", "isometric", ctx.cfg.w_mode)
    Ws = [cs_kernel.weyl_transform(v, mode, "H") for mode in modes for v in vecs]
    # each transform is a left-linear combination of monomials, so one power
    # table serves all of them; the expansion is checked against the
    # transforms themselves at random points before it is integrated
    inv = ctx.measure.inv_sqrt_factorials(n)
    scale = {"paper": 1.0, "isometric": 1.0 / TWO_PI}
    C = np.array([v.coeffs * (scale[mode] * inv)[:, None] for mode in modes for v in vecs])
    F = cs_kernel._expansion(C, lambda q: qpowers(q, n))
    probe = np.array([_ball_point(rng, 2.0).to_array() for _ in range(50)])
    direct = np.stack([W(probe) for W in Ws], axis=-2)
    agree = float(np.max(qabs(direct - F(probe))) / np.max(qabs(direct)))
    G = integrate.integrate_H_gram(F, None, ctx.rules)
    norms = np.sqrt(G[np.arange(len(Ws)), np.arange(len(Ws)), 0])
    fnorm = np.array([v.norm() for v in vecs] * len(modes))
    ratio = (norms / fnorm).reshape(len(modes), len(vecs))
    paper = float(np.max(np.abs(ratio[0] - TWO_PI)) / TWO_PI)
    iso = float(np.max(np.abs(ratio[1] - 1.0)))
    sel = float(np.max(np.abs(ratio[2] - 1.0)))
    return ([_lt("expansion_vs_transform", agree, 1e-12),
             _lt("paper_ratio_2pi", paper, 1e-8), _lt("isometric_ratio_1", iso, 1e-9),
             _lt(f"selected_{ctx.cfg.w_mode}_isometry", sel, 1e-9)],
            {"paper_ratio": float(ratio[0].mean()), "isometric_ratio": float(ratio[1].mean())})


def _op_commutators(ctx):
    rep = operators.commutator_defect(ctx.cfg.nmax)
    n = ctx.cfg.nmax
    return ([Part("ccr_interior_exact", float(rep.exact_ccr_interior), 0.0,
                  bool(rep.exact_ccr_interior == 0)),
             Part("corner_exact", float(rep.exact_corner + n), 0.0, bool(rep.exact_corner == -n)),
             Part("number_a_exact", float(rep.exact_number_a), 0.0, bool(rep.exact_number_a == 0)),
             Part("number_adag_exact", float(rep.exact_number_adag), 0.0,
                  bool(rep.exact_number_adag == 0))],
            {"float_ccr_interior": rep.float_ccr_interior, "float_corner": rep.float_corner,
             "float_number_a": rep.float_number_a, "float_number_adag": rep.float_number_adag})


def _op_displacement(ctx):
    rng = ctx.rng("op.displacement")
    n = ctx.cfg.nmax
    k = cs_kernel.interior_size(n)
    eye = operators.SliceOperator(np.eye(n + 1))
    vac = FockVector.basis(0, n, "exponential")
    unit = match = 0.0
    for _ in range(20):
        axis = _random_axis(rng)
        q = _disc_point(rng, axis, 1.5)
        D = operators.displacement(q, n, axis)
        unit = max(unit, (D @ D.adjoint()).interior_defect(eye))
        diff = D.apply(vac).coeffs - cs_kernel.gamma_canonical(q, n).coeffs
        match = max(match, float(np.max(np.abs(diff[:k]))))
    return [_lt("unitarity", unit, 1e-8), _lt("vacuum_to_gamma", match, 1e-10)], {}


def _bch_pairs(rng, count):
    for _ in range(count):
        axis = _random_axis(rng)
        yield _disc_point(rng, axis, 1.0), _disc_point(rng, axis, 1.0)


def _op_bch(ctx):
    pairs = list(_bch_pairs(ctx.rng("op.bch"), 100))
    work = max(ctx.cfg.bch_nmax, ctx.cfg.nmax)
    d = max(operators.bch_compose_defect(a, b, work) for a, b in pairs)
    d_small = max(operators.bch_compose_defect(a, b, ctx.cfg.nmax) for a, b in pairs)
    return ([_lt("composition", d, 1e-7)],
            {"working_nmax": work, "interior": cs_kernel.interior_size(work),
             "defect_at_nmax": d_small, "nmax": ctx.cfg.nmax})


def _op_generator(ctx):
    rng = ctx.rng("op.generator")
    anti = fac = 0.0
    for _ in range(20):
        axis = _random_axis(rng)
        q = _disc_point(rng, axis, 1.5)
        rep = operators.generator_X_defect(q, rng.uniform(-3, 3), ctx.cfg.nmax, axis)
        anti = max(anti, rep.antiadjoint)
        fac = max(fac, rep.factorization)
    eps = float(np.finfo(float).eps)
    return [_lt("antiadjoint", anti, eps), _lt("factorization", fac, 1e-8)], {}


def _op_eigen(ctx):
    rng = ctx.rng("op.eigen")
    d = max(operators.eigen_relation_defect(_disc_point(rng, _random_axis(rng), 1.5), ctx.cfg.nmax)
            for _ in range(20))
    return [_lt("eigen", d, 1e-10)], {}


def _op_transporter(ctx):
    rng = ctx.rng("op.transporter")
    n = ctx.cfg.nmax
    worst = 0.0
    for _ in range(20):
        a = _random_axis(rng)
        b = _random_axis(rng)
        r = 1.5 * math.sqrt(rng.uniform())
        t = rng.uniform(0.0, TWO_PI)
        F = operators.transporter_F(a, b, r, t, n)
        g = cs_kernel.gamma_canonical(slice_compose(r * math.cos(t), r * math.sin(t), a), n)
        gp = cs_kernel.gamma_canonical(slice_compose(r * math.cos(t), r * math.sin(t), b), n)
        worst = max(worst, float(np.max(np.abs(F.apply(g.vector).coeffs - gp.coeffs))))
    return [_lt("transport", worst, 1e-9)], {}


def _field_constancy(ctx):
    s = directint.sample_slices(hemisphere_rule(5, 10))
    n = 8
    u = ctx.measure.inv_sqrt_factorials(n) / SQRT_2PI
    vals = np.array([integrate.integrate_slice_gram(lambda q: qpowers(q, n, scale=u), None,
                                                    s.axis(k), ctx.rules)
                     for k in range(len(s))])
    mean = vals.mean(axis=0)
    sd = np.sqrt(np.mean(np.sum((vals - mean) ** 2, axis=-1), axis=0))
    target = np.zeros_like(mean)
    target[np.arange(n + 1), np.arange(n + 1), 0] = 1.0
    return ([_lt("stdev", float(np.max(sd)), 1e-10),
             _lt("mean_vs_delta", float(np.max(qabs(mean - target))), 1e-10)],
            {"axes": len(s)})


def _field_isometry(ctx):
    rng = ctx.rng("field.isometry")
    s = directint.sample_slices(ctx.rules.hemisphere)
    n = 12
    cs = []
    for _ in range(20):
        h = FockVector(rng.normal(size=(n + 1, 4)), ctx.measure.name)
        k = FockVector(rng.normal(size=(n + 1, 4)), ctx.measure.name)
        cs.append(directint.restriction_constant(h, k, s, ctx.measure).to_array())
    cs = np.array(cs)
    mean = cs.mean(axis=0)
    spread = float(np.max(qabs(cs - mean)) / np.linalg.norm(mean))
    return ([_lt("relative_spread", spread, 1e-8)],
            {"c_measured": float(mean[0]), "c_claimed": TWO_PI})


def _field_reducible(ctx):
    rng = ctx.rng("field.reducible")
    s = directint.sample_slices(hemisphere_rule(5, 10))
    r = 1.5 * math.sqrt(rng.uniform())
    t = rng.uniform(0.0, TWO_PI)
    B = directint.decomposable_operator(r, t, s, ctx.cfg.nmax)
    coupling = B.coupling(seed=ctx.cfg.seed)
    unit = float(np.max(B.unitarity_defects()))
    return ([Part("coupling", coupling, 0.0, coupling == 0.0), _lt("block_unitarity", unit, 1e-8)],
            {"axes": len(s), "r": r, "theta": t})


def _geom_lebesgue(ctx):
    sel = integrate.lebesgue_consistency(ctx.cfg.weight_mode, ctx.rules.hemisphere)
    pap = integrate.lebesgue_consistency("paper", ctx.rules.hemisphere)
    return ([_lt(f"{ctx.cfg.weight_mode}_vs_pi2", sel.defect, 1e-8),
             _lt("paper_vs_4pi", abs(pap.value - pap.closed_form), 1e-8)],
            {"selected_value": sel.value, "paper_value": pap.value, "pi2": math.pi ** 2,
             "four_pi": 4 * math.pi})


def _fock_parseval(ctx):
    rng = ctx.rng("fock.parseval")
    n = ctx.cfg.nmax
    basis = [FockVector.basis(m, n) for m in range(n + 1)]
    d = max(fock.parseval_check(FockVector(rng.normal(size=(n + 1, 4))), basis) for _ in range(50))
    return [_lt("parseval", d, 1e-12)], {}


def _fock_regular(ctx):
    rng = ctx.rng("fock.regular")
    ratios = []
    for m in (3, 4, 5, 6):
        a = np.zeros((m + 1, 4))
        a[m, 0] = 1.0
        f = fock.phi_function(a, ctx.measure)
        q = Quaternion.from_array(rng.normal(size=4))
        q = q * (1.0 / q.norm())
        ratios.append(fock.regularity_residual(f, q, 1e-2, "right")
                      / fock.regularity_residual(f, q, 1e-3, "right"))
    worst = float(max(abs(r - 100.0) for r in ratios))
    return ([Part("ratio_in_80_120", worst, 20.0, all(80.0 <= r <= 120.0 for r in ratios))],
            {"ratios": ratios})


@dataclass(frozen=True)
class _Check:
    anchor: str
    fn: Callable


CHECKS: dict[str, _Check] = {
    "angular.mass": _Check("angular mass of the hemisphere of slice axes", _angular_mass),
    "angular.vector": _Check("vanishing first moment of the axis map", _angular_vector),
    "basis.ortho.H": _Check("orthonormal regular monomials on H", _basis_ortho_H),
    "basis.ortho.slice": _Check("orthogonality of slice monomials", _basis_ortho_slice),
    "cs.norm": _Check("norm of the quaternionic nonlinear coherent states", _cs_norm),
    "resolution.slice": _Check("slice resolution of the identity", _resolution_slice),
    "resolution.H": _Check("resolution of the identity on H", _resolution_H),
    "kernel.props": _Check("hermiticity, positivity and idempotence of the kernel", _kernel_props),
    "kernel.reproduce": _Check("reproducing property of the slice kernel", _kernel_reproduce),
    "weyl.scale": _Check("coherent-state transform as an isometry", _weyl_scale),
    "op.commutators": _Check("canonical commutation relations", _op_commutators),
    "op.displacement": _Check("unitary displacement operator", _op_displacement),
    "op.bch": _Check("composition law of displacements up to a slice phase", _op_bch),
    "op.generator": _Check("anti-self-adjoint generator", _op_generator),
    "op.eigen": _Check("coherent states as annihilation eigenvectors", _op_eigen),
    "op.transporter": _Check("transport of coherent states between slices", _op_transporter),
    "field.constancy": _Check("constant pointwise inner products of the fundamental fields",
                              _field_constancy),
    "field.isometry": _Check("restriction map into the direct integral", _field_isometry),
    "field.reducible": _Check("decomposable displacement on the direct integral", _field_reducible),
    "geom.lebesgue": _Check("Lebesgue measure in slice coordinates", _geom_lebesgue),
    "fock.parseval": _Check("Parseval identity", _fock_parseval),
    "fock.regular": _Check("slice regularity of the monomials", _fock_regular),
}


def check_ids() -> list[str]:
    return sorted(CHECKS)


def _apply_overrides(check_id: str, parts, cfg: SuiteConfig):
    out = []
    for p in parts:
        key = f"{check_id}/{p.name}"
        if key in cfg.tol:
            t = cfg.tol[key]
            p = Part(p.name, p.value, t, bool(abs(p.value) < t))
        out.append(p)
    return out


def run_check(check_id: str, cfg: SuiteConfig, ctx: _Context | None = None) -> CheckRecord:
    if check_id not in CHECKS:
        raise CheckUnknown(check_id)
    ctx = ctx or _Context(cfg)
    chk = CHECKS[check_id]
    t0 = time.perf_counter()
    parts, info = chk.fn(ctx)
    ms = round((time.perf_counter() - t0) * 1000.0, 1) if cfg.timing else 0
    parts = _apply_overrides(check_id, parts, cfg)
    head = max(parts, key=lambda p: (not p.passed, p.ratio))
    return CheckRecord(check_id, chk.anchor, head.value, head.tol,
                       all(p.passed for p in parts), ms, tuple(parts), info)


def run_suite(config: SuiteConfig | None = None, selection="all") -> SuiteReport:
    """Run the selected checks (``"all"`` or a list of ids); records sorted by id."""
    cfg = config or SuiteConfig()
    cfg.validate()
    ids = check_ids() if selection == "all" else list(dict.fromkeys(selection))
    for i in ids:
        if i not in CHECKS:
            raise CheckUnknown(i)
    ctx = _Context(cfg)
    if cfg.workers > 1:
        ctx.rules  # build shared rules before threads start
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            recs = list(pool.map(lambda i: run_check(i, cfg, ctx), ids))
    else:
        recs = [run_check(i, cfg, ctx) for i in ids]
    return SuiteReport(cfg, tuple(sorted(recs, key=lambda r: r.id)))
