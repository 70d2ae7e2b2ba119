"""Spherical harmonic analysis on products of GL_1(R) and GL_2(R).

Coordinates
-----------
``a`` carries log coordinates: ``H = (log|t_1|, ..., log|t_n|)``.  For a GL_2
factor the Cartan chart is ``c = (x_1 + x_2)/2`` (central) and
``r = x_1 - x_2 >= 0`` where ``x`` are the log singular values.

Measures: ``dk`` is the probability measure on K, ``dt`` Lebesgue on ``a``
(i.e. on ``T(F)/M``), ``dn`` Lebesgue on the unipotent coordinate, and ``dg`` is
fixed by the Iwasawa integration formula.  In the Cartan chart this gives
``dg = 2 pi sinh(r) dc dr`` on a GL_2 factor (checked by :func:`calibrate_measures`).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import quadrature as quad
from .archchar import loggamma
from .errors import CalibrationUnstable, DimensionMismatch, SingularMatrix, SlowDecay
from .rootdata import RootDatum
from .torustf import bump, sharp_bump

log = logging.getLogger(__name__)

GL1, GL2 = "GL1", "GL2"
_RANK = {GL1: 1, GL2: 2}
CARTAN_CONSTANT = {GL1: 1.0, GL2: 2 * np.pi}


# --------------------------------------------------------------------------
# groups and decompositions
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class GroupModel:
    """A product of GL_1(R) and GL_2(R) factors with ``K`` a product of O(1), O(2)."""

    factors: tuple[str, ...]

    def __post_init__(self):
        bad = [f for f in self.factors if f not in _RANK]
        if bad or not self.factors:
            raise ValueError(f"unsupported factors {bad or self.factors}")

    @classmethod
    def gl1(cls) -> "GroupModel":
        return cls((GL1,))

    @classmethod
    def gl2(cls) -> "GroupModel":
        return cls((GL2,))

    @property
    def rank(self) -> int:
        return sum(_RANK[f] for f in self.factors)

    @cached_property
    def slices(self) -> list[slice]:
        out, i = [], 0
        for f in self.factors:
            out.append(slice(i, i + _RANK[f]))
            i += _RANK[f]
        return out

    @cached_property
    def datum(self) -> RootDatum:
        parts = [RootDatum.gl(_RANK[f]) for f in self.factors]
        return parts[0] if len(parts) == 1 else RootDatum.product(*parts)

    @property
    def is_simple_factor(self) -> bool:
        return len(self.factors) == 1

    def split(self, lam):
        lam = np.asarray(lam)
        if lam.shape[-1] != self.rank:
            raise DimensionMismatch(f"expected vectors of length {self.rank}")
        return [lam[..., s] for s in self.slices]


def _check_invertible(g):
    g = np.asarray(g, dtype=float)
    if g.ndim < 2 or g.shape[-1] != g.shape[-2]:
        raise DimensionMismatch("expected square matrices")
    det = np.linalg.det(g)
    scale = np.prod(np.linalg.norm(g, axis=-2), axis=-1)
    if np.any(np.abs(det) <= 1e-14 * scale):
        raise SingularMatrix("matrix is singular")
    return g


def iwasawa(g):
    """``g = k t n`` with ``k`` orthogonal, ``t`` positive diagonal, ``n`` unipotent upper."""
    g = _check_invertible(g)
    q, r = np.linalg.qr(g)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d = np.where(d == 0, 1.0, d)
    k = q * d[..., None, :]
    tr = r * d[..., :, None]
    t = np.diagonal(tr, axis1=-2, axis2=-1)
    n = tr / t[..., :, None]
    return k, t, n


def iwasawa_H(g):
    """``H_B(g)``: logs of the diagonal of the Iwasawa torus part."""
    _, t, _ = iwasawa(g)
    return np.log(t)


def cartan(g):
    """``g = k1 diag(a) k2`` with ``a`` positive and decreasing (closed positive chamber)."""
    g = _check_invertible(g)
    u, s, vt = np.linalg.svd(g)
    return u, s, vt


def cartan_coordinates(g):
    """``(c, r)`` of a 2x2 matrix (or stack)."""
    _, s, _ = cartan(g)
    x = np.log(s)
    return 0.5 * (x[..., 0] + x[..., 1]), x[..., 0] - x[..., 1]


# --------------------------------------------------------------------------
# spherical functions
# --------------------------------------------------------------------------
def phi0(nu, r):
    """Radial spherical function of GL_2: ``P_{-1/2+nu}(cosh r)``, shape ``(len(nu), len(r))``.

    Mehler's integral ``(sqrt2/pi) int_0^r cosh(nu t) / sqrt(cosh r - cosh t) dt``
    with ``t = r(1-u^2)``, which removes the endpoint singularity.
    """
    nu = np.atleast_1d(np.asarray(nu, dtype=complex))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.ones((nu.size, r.size), dtype=complex)
    rmax = float(r.max()) if r.size else 0.0
    if rmax == 0:
        return out
    freq = float(np.max(np.abs(nu.imag))) * rmax + float(np.max(np.abs(nu.real))) * rmax
    u, w = quad.gauss_panels(0.0, 1.0, min(0.125, 3.0 / (1.0 + freq)), 20)
    pos = r > 0
    rp = r[pos]
    t = rp[:, None] * (1 - u[None, :] ** 2)
    # cosh r - cosh t = 2 sinh((r+t)/2) sinh((r-t)/2), with r - t = r u^2
    half = 0.5 * rp[:, None] * u[None, :] ** 2
    ratio = np.where(half > 0, np.sinh(half) / np.where(u[None, :] > 0, u[None, :] ** 2, 1.0), 0.5 * rp[:, None])
    denom = np.sqrt(2 * np.sinh(0.5 * (rp[:, None] + t)) * ratio)
    kern = (2 * rp[:, None] * w[None, :]) / denom  # (Nr, Nu)
    step = max(1, 2_000_000 // max(1, t.size))
    vals = np.empty((nu.size, rp.size), dtype=complex)
    for i in range(0, nu.size, step):
        ch = np.cosh(nu[i:i + step, None, None] * t[None, :, :])
        vals[i:i + step] = np.einsum("pru,ru->pr", ch, kern)
    out[:, pos] = (np.sqrt(2) / np.pi) * vals
    return out


def _theta_nodes(r: float, nu_abs: float):
    n = 64.0 + 40.0 * np.exp(min(r, 9.0)) + 8.0 * nu_abs * (1.0 + r)
    n = int(2 ** np.ceil(np.log2(n)))
    return quad.trapezoid_periodic(min(n, 2**18), np.pi)


def phi_lambda(gm: GroupModel, lam, g):
    """``phi_lambda(g) = int_K exp(-<lam + rho, H_B(g^{-1} k)>) dk`` by quadrature over K.

    ``g`` is a list of per-factor matrices (a bare matrix is accepted for
    single-factor models).  GL_1 factors give ``|x|^lam`` exactly.
    """
    lam = np.asarray(lam, dtype=complex)
    blocks = [g] if gm.is_simple_factor and not isinstance(g, (list, tuple)) else list(g)
    if len(blocks) != len(gm.factors):
        raise DimensionMismatch("one matrix per factor expected")
    out = 1.0 + 0j
    for kind, sl, b in zip(gm.factors, gm.slices, blocks):
        b = _check_invertible(np.atleast_2d(np.asarray(b, dtype=float)))
        lk = lam[sl]
        if kind == GL1:
            out *= np.exp(lk[0] * np.log(abs(b[0, 0])))
            continue
        _, rr = cartan_coordinates(b)
        th, w = _theta_nodes(float(rr), float(abs(lk[0] - lk[1])))
        ginv = np.linalg.inv(b)
        col = ginv @ np.vstack([np.cos(th), np.sin(th)])  # first columns of g^{-1} k_theta
        h1 = np.log(np.linalg.norm(col, axis=0))
        h2 = -np.log(abs(np.linalg.det(b))) - h1
        out *= np.sum(w * np.exp(-(lk[0] + 0.5) * h1 - (lk[1] - 0.5) * h2))
    return complex(out)


def phi_lambda_cartan(lam, c, r):
    """GL_2 spherical function in Cartan coordinates via :func:`phi0`."""
    lam = np.asarray(lam, dtype=complex)
    nu = 0.5 * (lam[0] - lam[1])
    return np.exp(c * (lam[0] + lam[1])) * phi0([nu], np.atleast_1d(r))[0]


# --------------------------------------------------------------------------
# K-biinvariant test functions
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class RadialProfile:
    """One factor of a bi-K-invariant function.

    GL_1: ``fn(c)`` with ``c = log|x|``.  GL_2: ``fn(c, r)`` in Cartan
    coordinates, supported in ``c_support x [0, r_max]``; ``fn`` must be a smooth
    even function of ``r``.
    """

    kind: str
    fn: Callable
    c_support: tuple[float, float]
    r_max: float = 0.0
    name: str = ""

    def __call__(self, c, r=None):
        c = np.asarray(c, dtype=float)
        inside = (c >= self.c_support[0]) & (c <= self.c_support[1])
        if self.kind == GL1:
            return np.where(inside, self.fn(c), 0.0)
        r = np.abs(np.asarray(r, dtype=float))
        inside = inside & (r <= self.r_max)
        return np.where(inside, self.fn(c, r), 0.0)

    def on_a(self, H):
        """Evaluate as a W-invariant function on ``a`` (log coordinates)."""
        H = np.asarray(H, dtype=float)
        if self.kind == GL1:
            return self(H[..., 0])
        return self(0.5 * (H[..., 0] + H[..., 1]), H[..., 0] - H[..., 1])

    def scaled(self, k: float) -> "RadialProfile":
        fn = self.fn
        new = (lambda c: k * fn(c)) if self.kind == GL1 else (lambda c, r: k * fn(c, r))
        return RadialProfile(self.kind, new, self.c_support, self.r_max, f"{k}*{self.name}")


def _shape(sharpness):
    return bump if sharpness is None else (lambda y: sharp_bump(y, sharpness))


def gl1_bump(center: float = 0.0, halfwidth: float = 1.0, sharpness: float | None = None) -> RadialProfile:
    """Bump in ``c = log|x|``; ``sharpness`` switches to :func:`sharp_bump` with that parameter."""
    b = _shape(sharpness)
    tag = "" if sharpness is None else f",a={sharpness}"
    return RadialProfile(GL1, lambda c: b((c - center) / halfwidth),
                         (center - halfwidth, center + halfwidth), 0.0, f"gl1bump({center},{halfwidth}{tag})")


def gl2_bump(c_center: float = 0.0, c_halfwidth: float = 1.0, r_radius: float = 2.0,
             sharpness: float | None = None) -> RadialProfile:
    b = _shape(sharpness)
    tag = "" if sharpness is None else f",a={sharpness}"
    return RadialProfile(
        GL2, lambda c, r: b((c - c_center) / c_halfwidth) * b(r / r_radius),
        (c_center - c_halfwidth, c_center + c_halfwidth), r_radius,
        f"gl2bump({c_center},{c_halfwidth},{r_radius}{tag})")


@dataclass(frozen=True)
class SmoothBiKFunction:
    """Product of radial profiles, one per factor of the group model."""

    gm: GroupModel
    profiles: tuple[RadialProfile, ...]
    coeff: float = 1.0

    def __post_init__(self):
        if len(self.profiles) != len(self.gm.factors) or any(
                p.kind != k for p, k in zip(self.profiles, self.gm.factors)):
            raise DimensionMismatch("profiles must match the factors of the group model")

    @classmethod
    def single(cls, profile: RadialProfile) -> "SmoothBiKFunction":
        return cls(GroupModel((profile.kind,)), (profile,))

    def on_a(self, H):
        H = np.asarray(H, dtype=float)
        out = np.full(H.shape[:-1], self.coeff)
        for p, sl in zip(self.profiles, self.gm.slices):
            out = out * p.on_a(H[..., sl])
        return out

    def at_matrix(self, g):
        blocks = [g] if self.gm.is_simple_factor and not isinstance(g, (list, tuple)) else list(g)
        out = self.coeff
        for p, b in zip(self.profiles, blocks):
            b = np.asarray(b, dtype=float)
            if p.kind == GL1:
                out = out * p(np.log(np.abs(b[..., 0, 0])))
            else:
                c, r = cartan_coordinates(b)
                out = out * p(c, r)
        return out

    def scaled(self, k: float) -> "SmoothBiKFunction":
        return SmoothBiKFunction(self.gm, self.profiles, self.coeff * k)


# --------------------------------------------------------------------------
# forward transform, constant term
# --------------------------------------------------------------------------
def _nodes(lo, hi, panels=24, order=20):
    return quad.gauss_panels(lo, hi, (hi - lo) / panels, order)


def _factor_transform(p: RadialProfile, lam):
    """Factor spherical transform at ``lam`` (shape ``(P, rank_factor)``)."""
    c, wc = _nodes(*p.c_support)
    if p.kind == GL1:
        E = np.exp(-np.outer(lam[:, 0], c))
        return CARTAN_CONSTANT[GL1] * (E @ (wc * p(c)))
    r, wr = _nodes(0.0, p.r_max)
    U = p(c[:, None], r[None, :]) * wc[:, None] * (wr * np.sinh(r))[None, :]
    zeta = lam[:, 0] + lam[:, 1]
    nu = 0.5 * (lam[:, 0] - lam[:, 1])
    uz, iz = np.unique(zeta, return_inverse=True)
    un, inn = np.unique(nu, return_inverse=True)
    EU = np.exp(-np.outer(uz, c)) @ U  # (Pz, Nr)
    P0 = phi0(-un, r)  # (Pn, Nr)
    iz, inn = iz.ravel(), inn.ravel()
    out = np.empty(len(lam), dtype=complex)
    step = max(1, 4_000_000 // r.size)
    for i in range(0, len(lam), step):
        out[i:i + step] = np.sum(EU[iz[i:i + step]] * P0[inn[i:i + step]], axis=1)
    return CARTAN_CONSTANT[GL2] * out


def spherical_transform_grid(p: RadialProfile, zeta, nu):
    """GL_2 factor transform on the tensor grid ``zeta x nu`` (``lam = (zeta/2 + nu, zeta/2 - nu)``)."""
    c, wc = _nodes(*p.c_support)
    r, wr = _nodes(0.0, p.r_max)
    U = p(c[:, None], r[None, :]) * wc[:, None] * (wr * np.sinh(r))[None, :]
    E = np.exp(-np.outer(np.asarray(zeta, dtype=complex), c))
    return CARTAN_CONSTANT[GL2] * (E @ U @ phi0(-np.asarray(nu, dtype=complex), r).T)


def spherical_transform(f: SmoothBiKFunction, lam):
    """``f~(lam) = int_G f(g) phi_{-lam}(g) dg`` at one point or an array ``(P, rank)``."""
    lam = np.asarray(lam, dtype=complex)
    single = lam.ndim == 1
    lam = np.atleast_2d(lam)
    out = np.full(lam.shape[0], f.coeff, dtype=complex)
    for p, sl in zip(f.profiles, f.gm.slices):
        out *= _factor_transform(p, lam[:, sl])
    return complex(out[0]) if single else out


def _gl2_constant_term(p: RadialProfile, H, n: int = 200):
    H = np.atleast_2d(np.asarray(H, dtype=float))
    c = 0.5 * (H[:, 0] + H[:, 1])
    u = H[:, 0] - H[:, 1]
    out = np.zeros(len(H))
    reach = np.cosh(p.r_max) - np.cosh(u)
    live = (reach > 0) & (c >= p.c_support[0]) & (c <= p.c_support[1])
    if not np.any(live):
        return out
    xi, wxi = quad.gauss_panels(0.0, 1.0, 1.0 / 10, 20)
    Y = np.sqrt(2 * reach[live])
    y = Y[:, None] * xi[None, :]
    rr = np.arccosh(np.cosh(u[live])[:, None] + 0.5 * y**2)
    vals = p(np.broadcast_to(c[live][:, None], rr.shape), rr)
    out[live] = 2 * Y * (vals @ wxi)
    return out


def constant_term(f: SmoothBiKFunction, H):
    """``f^(B)(H) = e^{<rho,H>} int_N f(e^H n) dn`` as a function on ``a``.

    ``H`` has shape ``(rank,)`` or ``(P, rank)``.
    """
    H = np.asarray(H, dtype=float)
    single = H.ndim == 1
    H = np.atleast_2d(H)
    out = np.full(len(H), f.coeff)
    for p, sl in zip(f.profiles, f.gm.slices):
        Hs = H[:, sl]
        out = out * (p(Hs[:, 0]) if p.kind == GL1 else _gl2_constant_term(p, Hs))
    return float(out[0]) if single else out


def constant_term_support(f: SmoothBiKFunction):
    """A box ``(lo, hi)`` in ``a`` containing the support of ``f^(B)``."""
    lo, hi = [], []
    for p in f.profiles:
        a, b = p.c_support
        if p.kind == GL1:
            lo.append(a)
            hi.append(b)
        else:
            lo += [a - 0.5 * p.r_max] * 2
            hi += [b + 0.5 * p.r_max] * 2
    return np.array(lo), np.array(hi)


def torus_mellin(fB: Callable, support, lam, n_panels: int = 32):
    """``int_a fB(H) e^{<lam,H>} dH`` by tensor Gauss quadrature (abelian Mellin transform)."""
    lo, hi = support
    grids = [_nodes(a, b, n_panels) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*[g[0] for g in grids], indexing="ij")
    wts = np.ones_like(mesh[0])
    for i, g in enumerate(grids):
        shape = [1] * len(grids)
        shape[i] = -1
        wts = wts * g[1].reshape(shape)
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    vals = fB(pts) * wts.ravel()
    lam = np.atleast_2d(np.asarray(lam, dtype=complex))
    return np.exp(lam @ pts.T) @ vals


def gl1_self_convolution(u: RadialProfile, n: int = 400) -> RadialProfile:
    """``u * u^*`` on the group ``R_{>0}`` (log coordinate), a positive-definite profile."""
    lo, hi = u.c_support
    y, wy = _nodes(lo, hi, 40)
    uy = u(y) * wy

    def fn(c):
        c = np.atleast_1d(c)
        return (u(y[None, :] - c[:, None]) * uy[None, :]).sum(axis=1)

    width = hi - lo
    return RadialProfile(GL1, fn, (-width, width), 0.0, f"conv({u.name})")


# --------------------------------------------------------------------------
# Plancherel data and inversion
# --------------------------------------------------------------------------
def c_function(nu):
    """Harish-Chandra c-function of a GL_2 factor: ``Gamma(nu) / (sqrt(pi) Gamma(nu + 1/2))``."""
    nu = np.asarray(nu, dtype=complex)
    return np.exp(loggamma(nu) - loggamma(nu + 0.5)) / np.sqrt(np.pi)


def plancherel_density(tau):
    """``|c(i tau)|^{-2} = pi tau tanh(pi tau)`` (even, nonnegative)."""
    tau = np.asarray(tau, dtype=float)
    return np.pi * tau * np.tanh(np.pi * tau)


@dataclass(frozen=True)
class PlancherelData:
    """Inversion constants.  ``constant`` multiplies ``int H phi |c|^{-2} dlam``."""

    gm: GroupModel
    constant: float
    calibration: dict = field(default_factory=dict)

    @classmethod
    def analytic(cls, gm: GroupModel) -> "PlancherelData":
        if not gm.is_simple_factor:
            raise NotImplementedError("inversion is implemented for a single GL_1 or GL_2 factor")
        kind = gm.factors[0]
        # GL_1: 1/(2 pi).  GL_2: 1/(2 pi) (centre) x 1/(2 pi) (dg constant) x 1/pi (density)
        const = 1 / (2 * np.pi) if kind == GL1 else 1 / (4 * np.pi**3)
        return cls(gm, const)

    def density(self, tau):
        return plancherel_density(tau)


@dataclass
class SpectralFunction:
    """A function on ``a*_C`` (vectorized over ``(P, rank)`` arrays)."""

    fn: Callable
    rank: int
    tube: str = "i a*"
    grid_fn: Callable | None = None  # optional (zeta, nu) -> matrix fast path (GL_2)
    samples: dict = field(default_factory=dict)
    w_defect: float | None = None

    def __call__(self, lam):
        return self.fn(np.asarray(lam, dtype=complex))


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform truncated grids for the inversion integrals.

    GL_1: ``y in [-y_max, y_max]`` step ``dy``.  GL_2: central ``zeta`` step
    ``2 dy`` up to ``zeta_max``; radial ``tau in [0, tau_max]`` step ``dy``.
    """

    dy: float = 0.1
    y_max: float = 60.0
    zeta_max: float = 80.0
    tau_max: float = 60.0
    tail_tol: float = 1e-4

    @classmethod
    def default_for(cls, gm: "GroupModel") -> "SpectralGrid":
        # GL_1 spectra of pipeline outputs decay slowly along i R
        if gm.factors[0] == GL1:
            return cls(dy=0.1, y_max=150.0, tail_tol=1e-6)
        return cls()


@dataclass
class InverseResult:
    """Callable evaluator for ``h`` in Cartan coordinates plus diagnostics."""

    gm: GroupModel
    grid: SpectralGrid
    data: dict
    plancherel: PlancherelData
    diagnostics: dict

    def __call__(self, c, r=None):
        """``h`` at central coordinate(s) ``c`` (GL_1: ``log|x|``) and radial ``r``."""
        c = np.atleast_1d(np.asarray(c, dtype=float))
        if self.gm.factors[0] == GL1:
            y, Hw = self.data["y"], self.data["Hw"]
            return np.real(np.exp(1j * np.outer(c, y)) @ Hw) * self.plancherel.constant
        r = np.atleast_1d(np.asarray(r, dtype=float))
        zeta, tau, M = self.data["zeta"], self.data["tau"], self.data["M"]
        P = phi0(1j * tau, r).T  # (Nr, Ntau)
        E = np.exp(1j * np.outer(c, zeta))  # (Nc, Nz)
        return np.real(np.einsum("cz,zt,ct->c", E, M, P)) * self.plancherel.constant

    def grid_eval(self, c, r):
        """``h`` on the tensor grid ``c x r``; returns shape ``(len(c), len(r))``."""
        c = np.atleast_1d(np.asarray(c, dtype=float))
        r = np.atleast_1d(np.asarray(r, dtype=float))
        zeta, tau, M = self.data["zeta"], self.data["tau"], self.data["M"]
        P = phi0(1j * tau, r)  # (Ntau, Nr)
        E = np.exp(1j * np.outer(c, zeta))
        return np.real(E @ M @ P) * self.plancherel.constant


def transform_as_spectral(f: SmoothBiKFunction) -> SpectralFunction:
    """``f~`` packaged for :func:`inverse_spherical`."""
    grid_fn = None
    if f.gm == GroupModel.gl2():
        grid_fn = lambda z, n: f.coeff * spherical_transform_grid(f.profiles[0], z, n)  # noqa: E731
    return SpectralFunction(lambda lam: spherical_transform(f, lam), f.gm.rank, grid_fn=grid_fn)


def inverse_spherical(H: SpectralFunction, gm: GroupModel, grid: SpectralGrid = SpectralGrid(),
                      plancherel: PlancherelData | None = None, w_average: bool = True) -> InverseResult:
    """Inverse spherical transform of ``H`` (values of ``h~`` on ``i a*``)."""
    pl = plancherel or PlancherelData.analytic(gm)
    kind = gm.factors[0]
    diag: dict = {}
    if kind == GL1:
        y = np.arange(-grid.y_max, grid.y_max + 0.5 * grid.dy, grid.dy)
        vals = H(1j * y[:, None])
        w = np.full(y.size, grid.dy)
        peak = np.max(np.abs(vals)) or 1.0
        tail = float(np.max(np.abs(vals[[0, -1]]))) / peak
        diag.update(tail=tail, peak=float(peak), w_defect=0.0)
        if tail > grid.tail_tol:
            raise SlowDecay(f"spectral tail {tail:.2e} exceeds {grid.tail_tol:g}")
        return InverseResult(gm, grid, {"y": y, "Hw": vals * w}, pl, diag)

    zeta = np.arange(-grid.zeta_max, grid.zeta_max + grid.dy, 2 * grid.dy)
    tau = np.arange(0.0, grid.tau_max + 0.5 * grid.dy, grid.dy)
    if H.grid_fn is not None:
        vals = H.grid_fn(1j * zeta, 1j * tau)
        swapped = H.grid_fn(1j * zeta, -1j * tau)
    else:
        Z, T = np.meshgrid(zeta, tau, indexing="ij")
        pts = np.stack([0.5 * Z + T, 0.5 * Z - T], axis=-1).reshape(-1, 2)
        vals = H(1j * pts).reshape(Z.shape)
        swapped = H(1j * pts[:, ::-1]).reshape(Z.shape)
    peak = float(np.max(np.abs(vals))) or 1.0
    defect = float(np.max(np.abs(vals - swapped))) / peak
    if w_average:
        vals = 0.5 * (vals + swapped)
    dens = plancherel_density(tau)
    wz = np.full(zeta.size, 2 * grid.dy)
    wt = np.full(tau.size, grid.dy)
    wt[0] *= 0.5
    weighted = vals * dens[None, :]
    rim = max(float(np.max(np.abs(weighted[[0, -1], :]))), float(np.max(np.abs(weighted[:, -1]))))
    tail = rim / (float(np.max(np.abs(weighted))) or 1.0)
    diag.update(tail=tail, peak=peak, w_defect=defect, w_averaged=w_average)
    if tail > grid.tail_tol:
        raise SlowDecay(f"spectral tail {tail:.2e} exceeds {grid.tail_tol:g}")
    M = weighted * wz[:, None] * wt[None, :]
    return InverseResult(gm, grid, {"zeta": zeta, "tau": tau, "M": M}, pl, diag)


# --------------------------------------------------------------------------
# measure calibration
# --------------------------------------------------------------------------
def _iwasawa_integral(p: RadialProfile, n_h: int = 160, n_y: int = 96):
    """``int_a int_N f(e^H n) e^{<2rho,H>} dn dH`` evaluating f through the SVD of the matrix."""
    lo = p.c_support[0] - 0.5 * p.r_max
    hi = p.c_support[1] + 0.5 * p.r_max
    h, wh = quad.gauss_panels(lo, hi, (hi - lo) / (n_h // 16), 16)
    total = 0.0
    for h1, w1 in zip(h, wh):
        u = h1 - h
        reach = np.cosh(p.r_max) - np.cosh(u)
        ok = reach > 0
        if not np.any(ok):
            continue
        # |y| e^{u/2}... bound the unipotent range from the Frobenius norm
        ymax = np.sqrt(2 * reach[ok]) * np.exp(-0.5 * u[ok])
        xi, wxi = quad.gauss_panels(-1.0, 1.0, 2.0 / (n_y // 16), 16)
        y = ymax[:, None] * xi[None, :]
        h2 = h[ok][:, None] * np.ones_like(y)
        g = np.zeros(y.shape + (2, 2))
        g[..., 0, 0] = np.exp(h1)
        g[..., 0, 1] = np.exp(h1) * y
        g[..., 1, 1] = np.exp(h2)
        s = np.linalg.svd(g, compute_uv=False)
        x = np.log(s)
        vals = p(0.5 * (x[..., 0] + x[..., 1]), x[..., 0] - x[..., 1])
        inner = (vals * wxi[None, :]).sum(axis=1) * ymax
        total += w1 * np.sum(wh[ok] * np.exp(h1 - h[ok]) * inner)
    return total


def _cartan_integral(p: RadialProfile):
    c, wc = _nodes(*p.c_support)
    r, wr = _nodes(0.0, p.r_max)
    return float(wc @ p(c[:, None], r[None, :]) @ (wr * np.sinh(r)))


@dataclass(frozen=True)
class Calibration:
    constants: tuple[float, ...]
    analytic: float
    spread: float

    @property
    def constant(self) -> float:
        return float(np.mean(self.constants))


def calibrate_measures(gm: GroupModel, tests: Sequence[RadialProfile] | None = None,
                       tol: float = 1e-6) -> dict:
    """Compare Iwasawa-chart and Cartan-chart integrals to fix the Cartan density constant."""
    out = {}
    for kind in dict.fromkeys(gm.factors):
        if kind == GL1:
            out[kind] = Calibration((1.0, 1.0, 1.0), 1.0, 0.0)
            continue
        profs = tests or [gl2_bump(0.0, 1.0, 1.5), gl2_bump(0.3, 0.7, 2.5), gl2_bump(-0.5, 1.2, 1.0)]
        consts = tuple(_iwasawa_integral(p) / _cartan_integral(p) for p in profs)
        spread = (max(consts) - min(consts)) / abs(np.mean(consts))
        if spread > tol:
            raise CalibrationUnstable(f"Cartan constants disagree: {consts}")
        out[kind] = Calibration(consts, CARTAN_CONSTANT[GL2], spread)
    return out
