"""The spectral construction of ``F_{r,psi}`` for spherical data, end to end.

Chain: ``f -> f^(B)`` (constant term) ``-> Phi`` (lift through ``r~``)
``-> Phi^`` (Fourier in ``t_n``, inversion in ``t_0``) ``-> H(lam) = Mellin(Phi^)(r~(lam + s0 d))``
``-> h`` (inverse spherical transform of ``mu -> H(-mu)``) and ``F(f) = h omega_{-s0}``.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

from . import quadrature as quad
from .archchar import gamma_rep
from .errors import (ConfigInvalid, DomainViolation, PoleEncountered, SlowModeDisabled,
                     TubeViolation, WDefectTooLarge)
from .rootdata import AugmentedMap, RepData, TubeSpec, build_augmentation, validate, weight_map
from .spherical import (GL1, GL2, GroupModel, InverseResult, SmoothBiKFunction, SpectralFunction,
                        SpectralGrid, constant_term, constant_term_support, inverse_spherical,
                        phi0, spherical_transform)
from .torustf import BumpSpec, TorusFunction, fourier_tn, lift

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    gm: GroupModel
    rep: RepData
    amap: AugmentedMap | None = None
    p: float = 1.0
    s0: float = 0.75
    grid: SpectralGrid | None = None
    bump_spec: BumpSpec = field(default_factory=BumpSpec)
    fourier_tol: float | None = None
    w_tol: float = 1e-3

    def __post_init__(self):
        if self.rep.rank != self.gm.rank:
            raise ConfigInvalid("representation and group have different ranks")
        if not 0 < self.p <= 1:
            raise ConfigInvalid("p must lie in (0, 1]")
        validate(self.gm.datum, self.rep)
        if self.fourier_tol is None:
            self.fourier_tol = 1e-12 if self.gm.factors[0] == GL1 else 1e-9
        if self.grid is None:
            self.grid = SpectralGrid.default_for(self.gm)
        if self.amap is None:
            self.amap = build_augmentation(self.gm.datum, self.rep)

    @property
    def d(self) -> np.ndarray:
        return np.array([float(x) for x in self.rep.d_omega])

    @property
    def tube(self) -> TubeSpec:
        return TubeSpec(self.gm.datum, self.p, self.s0, self.rep.d_omega)

    def s0_margin(self) -> float:
        """``min`` over hull vertices of ``r(Re lam) + s0 r(d)``; must be positive."""
        verts = np.array([[float(x) for x in v] for v in self.tube.hull_vertices])
        vals = weight_map(self.rep, verts) + self.s0 * weight_map(self.rep, self.d)
        return float(vals.min())

    def check(self) -> None:
        if self.s0_margin() <= 0:
            raise ConfigInvalid(f"s0 = {self.s0} too small: shifted tube leaves the Mellin region")

    @classmethod
    def standard_gl(cls, n: int, s0: float = 0.75, **kw) -> "PipelineConfig":
        gm = GroupModel.gl1() if n == 1 else GroupModel.gl2()
        return cls(gm, RepData.standard(n), s0=s0, **kw)

    @classmethod
    def sym2(cls, s0: float = 1.25, **kw) -> "PipelineConfig":
        return cls(GroupModel.gl2(), RepData.sym2_gl2(), s0=s0, **kw)


@dataclass
class BKResult:
    f: SmoothBiKFunction
    cfg: PipelineConfig
    phi: TorusFunction
    phi_hat: TorusFunction
    diagnostics: dict
    _inverse: InverseResult | None = None

    # spectral side ------------------------------------------------------------
    def torus_point(self, lam):
        """``r~(lam + s0 d)`` with the ``T_0`` block first."""
        lam = np.asarray(lam, dtype=complex)
        return self.cfg.amap.apply(lam + self.cfg.s0 * self.cfg.d)

    def H(self, lam):
        """``H(lam) = Psi~_{Phi^}(r~(lam + s0 d))``; equals ``h~(-lam)``."""
        return self.phi_hat.mellin(self.torus_point(lam))

    def spectral(self) -> SpectralFunction:
        return SpectralFunction(lambda mu: self.H(-np.asarray(mu)), self.cfg.gm.rank)

    def w_defect(self, lams) -> float:
        lams = np.atleast_2d(np.asarray(lams, dtype=complex))
        base = self.H(lams)
        worst = 0.0
        for A in self.cfg.gm.datum.weyl_group.arrays():
            moved = self.H(lams @ A.T)
            worst = max(worst, float(np.max(np.abs(moved - base))))
        peak = float(np.max(np.abs(base)))
        return worst / peak if peak > 0 else worst

    # group side ---------------------------------------------------------------
    @property
    def inverse(self) -> InverseResult:
        if self._inverse is None:
            t = time.time()
            self._inverse = inverse_spherical(self.spectral(), self.cfg.gm, self.cfg.grid)
            self.diagnostics["inverse"] = dict(self._inverse.diagnostics, seconds=time.time() - t)
        return self._inverse

    def h(self, c, r=None):
        return self.inverse(c, r)

    def omega(self, c):
        """``omega_{-s0}`` at central coordinate ``c`` (``<d, H> = rank * d_1 * c`` for scalar d)."""
        return np.exp(-self.cfg.s0 * float(np.sum(self.cfg.d)) * np.asarray(c, dtype=float))

    def transform_at(self, c, r=None):
        """``F_{r,psi}(f) = h omega_{-s0}`` at Cartan coordinates."""
        return self.h(c, r) * self.omega(c)


def bk_transform(f: SmoothBiKFunction, cfg: PipelineConfig, w_grid=None) -> BKResult:
    """Run the pipeline up to the spectral function; ``h`` is computed lazily."""
    cfg.check()
    if f.gm != cfg.gm:
        raise ConfigInvalid("test function and pipeline use different groups")
    diag: dict = {"s0_margin": cfg.s0_margin()}
    t = time.time()
    support = constant_term_support(f)
    phi = lift(lambda H: constant_term(f, H), support, cfg.amap, cfg.bump_spec)
    diag["lift"] = dict(phi.diagnostics, seconds=time.time() - t)
    t = time.time()
    phi_hat = fourier_tn(phi, tol=cfg.fourier_tol)
    diag["fourier"] = {"tmax": phi_hat.diagnostics["fourier_tmax"], "seconds": time.time() - t}
    res = BKResult(f, cfg, phi, phi_hat, diag)
    if w_grid is None:
        ys = np.linspace(-6, 6, 7)
        w_grid = 1j * np.array(np.meshgrid(*[ys] * cfg.gm.rank, indexing="ij")).reshape(cfg.gm.rank, -1).T
    defect = res.w_defect(w_grid)
    diag["w_defect"] = defect
    if defect > cfg.w_tol:
        raise WDefectTooLarge(f"spectral W-defect {defect:.2e} exceeds {cfg.w_tol:g}")
    return res


# ------------------------------------------------------------------------------
# traces and the functional equation
# ------------------------------------------------------------------------------
def trace_spectral(obj, nu, s, cfg: PipelineConfig | None = None):
    """``tr pi_s(.)`` for ``pi = J(e^{<nu, H_B>})``, i.e. ``J(nu + s d)``.

    For a test function this is ``f~(-(nu + s d))``.  For a :class:`BKResult`
    it is the trace on ``F(f) = h omega_{-s0}``, i.e. ``H(nu + (s - s0) d)``,
    evaluated through the torus Mellin transform (raises :class:`TubeViolation`
    outside its convergence region).
    """
    nu = np.asarray(nu, dtype=complex)
    if isinstance(obj, BKResult):
        cfg = obj.cfg
        lam = nu + (complex(s) - cfg.s0) * cfg.d
        try:
            return complex(obj.H(lam))
        except DomainViolation as exc:
            raise TubeViolation(str(exc)) from exc
    if cfg is None:
        raise ValueError("a PipelineConfig is needed to know d_omega")
    return complex(spherical_transform(obj, -(nu + complex(s) * cfg.d)))


@dataclass
class LFEReport:
    rows: list
    max_rel: float
    max_abs: float

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.max_rel))


def verify_lfe(f: SmoothBiKFunction, nus, ss, cfg: PipelineConfig, result: BKResult | None = None) -> LFEReport:
    """Compare ``gamma(s, pi, r, psi) tr pi_s(f)`` with ``tr pi^vee_{1-s}(F(f))`` pointwise."""
    res = result or bk_transform(f, cfg)
    rows = []
    for nu in np.atleast_2d(np.asarray(nus, dtype=complex)):
        for s in np.atleast_1d(np.asarray(ss, dtype=complex)):
            row = {"nu": nu.tolist(), "s": complex(s), "pole": False}
            try:
                g = complex(gamma_rep(cfg.rep, nu, s))
            except PoleEncountered:
                g = np.inf
            if not np.isfinite(g) or g == 0:
                row.update(pole=True, lhs=np.nan, rhs=np.nan, abs_err=np.nan, rel_err=np.nan)
                rows.append(row)
                continue
            lhs = g * trace_spectral(f, nu, s, cfg)
            rhs = trace_spectral(res, -nu, 1 - s)
            err = abs(lhs - rhs)
            row.update(lhs=lhs, rhs=rhs, abs_err=err, rel_err=err / max(abs(lhs), 1e-300))
            rows.append(row)
    good = [r for r in rows if not r["pole"]]
    return LFEReport(rows, max((r["rel_err"] for r in good), default=np.nan),
                     max((r["abs_err"] for r in good), default=np.nan))


def chain_identity(res: BKResult, nus, s) -> float:
    """Max relative gap between ``tr J(nu)_s(f)`` and ``Mellin(Phi)(r~(nu + s d))``."""
    nus = np.atleast_2d(np.asarray(nus, dtype=complex))
    lhs = spherical_transform(res.f, -(nus + s * res.cfg.d))
    rhs = res.phi.mellin(res.cfg.amap.apply(nus + s * res.cfg.d))
    return float(np.max(np.abs(lhs - rhs) / np.abs(lhs)))


def cauchy_riemann_residual(res: BKResult, lam, step: float = 1e-3) -> float:
    """Finite-difference Cauchy-Riemann residual of ``H`` at ``lam``, relative to ``|grad H|``."""
    lam = np.asarray(lam, dtype=complex)
    worst = 0.0
    for j in range(lam.size):
        e = np.zeros(lam.size)
        e[j] = step
        dx = (res.H(lam + e) - res.H(lam - e)) / (2 * step)
        dy = (res.H(lam + 1j * e) - res.H(lam - 1j * e)) / (2j * step)
        worst = max(worst, abs(dx - dy) / max(abs(dx), abs(dy), 1e-300))
    return worst


# ------------------------------------------------------------------------------
# Godement-Jacquet oracles
# ------------------------------------------------------------------------------
@dataclass
class GJReport:
    points: np.ndarray
    pipeline: np.ndarray
    oracle: np.ndarray
    max_abs: float
    max_rel: float
    seconds: float


def gl1_fourier(f: SmoothBiKFunction, x):
    """``f^(x) = int_R f(y) psi(xy) dy`` for ``f(y) = a(log|y|)`` (even)."""
    p = f.profiles[0]
    lo, hi = p.c_support
    x = np.atleast_1d(np.asarray(x, dtype=float))
    width = min((hi - lo) / 48, 1.0 / (max(1.0, float(np.max(np.abs(x)))) * np.exp(hi)))
    v, w = quad.gauss_panels(lo, hi, width, 20)
    y = np.exp(v)
    vals = f.coeff * p(v) * w * y
    return 2.0 * (np.cos(2 * np.pi * np.outer(x, y)) @ vals)


def gl2_gj_transform(f: SmoothBiKFunction, c, r, n_panels: int | None = None):
    """``|det g|^{1/2} int_{M_2} |det Y|^{-1/2} f(Y) psi(tr gY) dY`` at Cartan point ``(c, r)``.

    The K x K average of ``psi`` reduces to products of ``J_0``; ``dY`` in
    singular-value coordinates is ``4 pi^2 (s1^2 - s2^2) ds1 ds2 dk dk``.
    """
    p = f.profiles[0]
    a1, a2 = np.exp(c + 0.5 * r), np.exp(c - 0.5 * r)
    lo, hi = p.c_support
    bmax = np.exp(hi + 0.5 * p.r_max)
    freq = np.pi * (a1 + a2) * bmax
    npan = n_panels or int(np.clip(4 * freq, 24, 400))
    cc, wc = quad.gauss_panels(lo, hi, (hi - lo) / npan, 16)
    rr, wr = quad.gauss_panels(0.0, p.r_max, p.r_max / npan, 16)
    C, R = np.meshgrid(cc, rr, indexing="ij")
    b1, b2 = np.exp(C + 0.5 * R), np.exp(C - 0.5 * R)
    kern = 0.5 * (j0(np.pi * (a1 - a2) * (b1 - b2)) * j0(np.pi * (a1 + a2) * (b1 + b2))
                  + j0(np.pi * (a1 - a2) * (b1 + b2)) * j0(np.pi * (a1 + a2) * (b1 - b2)))
    dens = 4 * np.pi**2 * 2 * np.exp(3 * C) * np.sinh(R)
    vals = f.coeff * p(C, R) * kern * dens
    return np.exp(c) * float(wc @ vals @ wr)


def gj_oracle(f: SmoothBiKFunction, cfg: PipelineConfig, points=None, result: BKResult | None = None,
              slow: bool = False) -> GJReport:
    """Compare the pipeline transform with the Godement-Jacquet transform.

    GL_1 points are values of ``x > 0``; GL_2 points are Cartan pairs ``(c, r)``
    (slow mode only).
    """
    if cfg.rep.name not in ("std1", "std2"):
        raise ConfigInvalid("the Godement-Jacquet oracle needs the standard representation")
    t = time.time()
    res = result or bk_transform(f, cfg)
    if cfg.gm.factors[0] == GL1:
        pts = np.linspace(0.05, 3.0, 50) if points is None else np.asarray(points, dtype=float)
        pipe = res.transform_at(np.log(pts))
        orc = gl1_fourier(f, pts)
    else:
        if not slow:
            raise SlowModeDisabled("GL_2 oracle is a slow mode; pass slow=True")
        pts = np.array([[0.0, 0.5], [-0.5, 1.0], [0.3, 0.2]]) if points is None else np.atleast_2d(points)
        pipe = np.array([res.transform_at(c, r)[0] for c, r in pts])
        orc = np.array([gl2_gj_transform(f, c, r) for c, r in pts])
    dev = np.abs(pipe - orc)
    scale = max(float(np.max(np.abs(orc))), 1e-300)
    return GJReport(pts, pipe, orc, float(dev.max()), float(dev.max() / scale), time.time() - t)


# ------------------------------------------------------------------------------
# decay proxies
# ------------------------------------------------------------------------------
def _slope(x, y):
    return float(np.polyfit(x, y, 1)[0])


def mellin_decay_slopes(res: BKResult, re_part: float = 0.5, im_max: float = 50.0, n: int = 60,
                        directions=None, m_max: int = 4) -> dict:
    """Least-squares slopes of ``log((|lam|+1)^m |Psi~_{Phi^}(lam)|)`` along imaginary rays."""
    dim = res.phi_hat.dim
    if directions is None:
        directions = [np.eye(dim)[0], np.ones(dim) / np.sqrt(dim)]
    ts = np.linspace(0.0, im_max, n)
    out = {}
    for k, dvec in enumerate(directions):
        lam = re_part + 1j * ts[:, None] * np.asarray(dvec)[None, :]
        vals = np.abs(res.phi_hat.mellin(lam))
        norm = np.linalg.norm(lam, axis=1)
        for m in range(m_max + 1):
            out[(k, m)] = _slope(ts, m * np.log(norm + 1) + np.log(vals))
    return out


def group_decay_profile(res: BKResult, radii, direction=(0.0, 1.0), m_max: int = 3, p: float = 1.0):
    """Samples of ``(1+|x|)^m phi_0(x)^{-2/p} |h(x)|`` along a ray in Cartan coordinates.

    For GL_2 the ray is ``(c, r) = t * direction``; ``|x| = |H|`` with
    ``H = (c + r/2, c - r/2)``.  Returns ``{m: values}``.
    """
    radii = np.asarray(radii, dtype=float)
    if res.cfg.gm.factors[0] == GL1:
        c = radii * np.sign(direction[0] or 1.0)
        h = np.abs(res.h(c))
        norm = np.abs(c)
        ph = np.ones_like(c)
    else:
        dc, dr = direction
        c, r = radii * dc, radii * dr
        h = np.abs(np.array([res.h(ci, ri)[0] for ci, ri in zip(c, r)]))
        norm = np.sqrt((c + 0.5 * r) ** 2 + (c - 0.5 * r) ** 2)
        ph = np.array([phi0([0.0], [ri])[0, 0].real for ri in r])
    return {m: (1 + norm) ** m * ph ** (-2 / p) * h for m in range(m_max + 1)}


__all__ = [
    "PipelineConfig", "BKResult", "bk_transform", "trace_spectral", "verify_lfe", "LFEReport",
    "chain_identity", "cauchy_riemann_residual", "gj_oracle", "GJReport", "gl1_fourier",
    "gl2_gj_transform", "mellin_decay_slopes", "group_decay_profile",
]
