"""Torus-side analysis: lifts, the partial Fourier transform, Mellin transforms
and numerical Tate zeta integrals.

Functions on ``T~(F)/M~`` are stored in log coordinates ``v = log|x|`` per
coordinate and as a Tucker-type sum of products: a core tensor contracted with
one factor matrix per coordinate.  Each coordinate factor is either compactly
supported (lift stage, callable) or sampled on a Mellin grid (after the
Fourier transform, where it is only Schwartz).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.linalg import null_space

from . import quadrature as quad
from .archchar import RealQuasicharacter
from .errors import DimensionMismatch, DomainViolation, NotSurjective, SlowDecay, SupportEscape
from .rootdata import AugmentedMap

log = logging.getLogger(__name__)

_CHUNK = 2_000_000
MAX_LOG_RADIUS = 30.0


def bump(y):
    """``exp(-1/(1-y^2))`` on ``|y| < 1``, zero outside."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    m = np.abs(y) < 1
    out[m] = np.exp(-1.0 / (1.0 - y[m] ** 2))
    return out


BUMP_MASS = 0.443993816168079  # int_{-1}^{1} bump


def sharp_bump(y, a: float):
    """``exp(-a y^2 / (1 - y^2))`` on ``|y| < 1``: peak 1, Gaussian-like core of width ``~1/sqrt(2a)``."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    m = np.abs(y) < 1
    y2 = y[m] ** 2
    out[m] = np.exp(-a * y2 / (1.0 - y2))
    return out


def smooth_step(y):
    """C-infinity step: 0 for y <= 0, 1 for y >= 1."""
    y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)
        b = np.where(y < 1, np.exp(-1.0 / np.where(y < 1, 1.0 - y, 1.0)), 0.0)
    return a / (a + b)


# --------------------------------------------------------------------------
# one-dimensional profiles
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class Profile:
    """A function on R given on ``|x|`` together with its parity (+1 even, -1 odd)."""

    fn: Callable
    support: tuple[float, float]
    parity: int = 1
    name: str = ""

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        val = np.asarray(self.fn(ax), dtype=float)
        val = np.where((ax >= self.support[0]) & (ax <= self.support[1]), val, 0.0)
        return val if self.parity == 1 else np.sign(x) * val

    @classmethod
    def bump(cls, center: float, halfwidth: float) -> "Profile":
        """Even bump supported on ``center +- halfwidth`` (mirrored to negative x)."""
        lo = max(0.0, center - halfwidth)
        return cls(lambda x: bump((x - center) / halfwidth), (lo, center + halfwidth), 1,
                   f"bump({center},{halfwidth})")

    @classmethod
    def odd_bump(cls, halfwidth: float) -> "Profile":
        return cls(lambda x: x * bump(x / halfwidth), (0.0, halfwidth), -1, f"oddbump({halfwidth})")

    @classmethod
    def gaussian(cls) -> "Profile":
        # relaxed support: e^{-pi x^2} < 1e-50 beyond 6.1
        return cls(lambda x: np.exp(-np.pi * x**2), (0.0, 6.1), 1, "gaussian")

    @classmethod
    def odd_gaussian(cls) -> "Profile":
        return cls(lambda x: x * np.exp(-np.pi * x**2), (0.0, 6.1), -1, "odd_gaussian")

    def as_factor(self) -> "CompactFactor":
        fn = self.fn
        return CompactFactor(lambda x: np.asarray(fn(x), dtype=float)[:, None], self.support, 1,
                             self.parity)


# --------------------------------------------------------------------------
# coordinate factors
# --------------------------------------------------------------------------
def _mellin_sum(z, t, w, values, taylor=None, cut=1.0):
    """Mellin sums ``int g(t) t^z dt/t`` for many ``z``.

    With ``taylor = (g0, g1)`` the polynomial ``g0 + g1 t`` is subtracted on
    ``t <= cut`` and its transform ``g0 cut^z/z + g1 cut^(z+1)/(z+1)`` added back,
    which removes the slowly decaying, oscillating part near ``t = 0``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    logt = np.log(t)
    vals = values.astype(complex)
    if taylor is not None:
        g0, g1 = (np.asarray(g, dtype=complex) for g in taylor)
        near = (t <= cut)[:, None]
        vals = vals - np.where(near, g0[None, :] + t[:, None] * g1[None, :], 0.0)
    out = np.empty((z.size, values.shape[1]), dtype=complex)
    step = max(1, _CHUNK // max(1, t.size))
    for i in range(0, z.size, step):
        E = np.exp(z[i:i + step, None] * logt[None, :]) * w[None, :]
        out[i:i + step] = E @ vals
    if taylor is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            a0 = np.where(np.any(g0 != 0), cut**z / z, 0.0)
            a1 = np.where(np.any(g1 != 0), cut ** (z + 1) / (z + 1), 0.0)
        out += a0[:, None] * g0[None, :] + a1[:, None] * g1[None, :]
    return out


@dataclass
class CompactFactor:
    """Coordinate factor ``x -> (phi_1(x), ..., phi_r(x))`` with compact support in ``|x|``."""

    fn: Callable  # (N,) array of |x| -> (N, r)
    support: tuple[float, float]
    rank: int
    parity: int = 1
    kind: str = "compact"

    def values(self, x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(self.fn(x), dtype=float).reshape(x.size, self.rank)
        m = (x >= self.support[0]) & (x <= self.support[1])
        return np.where(m[:, None], out, 0.0)

    def taylor0(self, h: float = 1e-6):
        """``(g(0), g'(0))`` at the origin (``None`` if the support avoids 0)."""
        if self.support[0] > 0:
            return None
        if self.parity == 1:
            return self.values(np.array([0.0]))[0], np.zeros(self.rank)
        return np.zeros(self.rank), self.values(np.array([h]))[0] / h

    def mellin(self, z):
        """``int_0^inf phi(x) x^z dx/x``, shape ``(len(z), r)``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        lo, hi = self.support
        t, w = quad.compact_mult_grid(lo, hi)
        if lo == 0:
            if np.any(z.real <= 0):
                raise DomainViolation("Mellin transform of a profile nonzero at 0 needs Re z > 0")
            return _mellin_sum(z, t, w, self.values(t), self.taylor0(), min(1.0, hi))
        return _mellin_sum(z, t, w, self.values(t))

    def inverted(self) -> "CompactFactor":
        """``x -> phi(1/x)``: the 'dual function' on a ``T_0`` coordinate."""
        lo, hi = self.support
        if lo <= 0:
            raise SupportEscape("T_0 profiles must be supported away from 0")
        fn = self.fn
        return CompactFactor(lambda x: fn(1.0 / x), (1.0 / hi, 1.0 / lo), self.rank, self.parity)

    # Fourier transform --------------------------------------------------
    def _x_rule(self, tmax: float):
        lo, hi = self.support
        tmax = max(tmax, 1.0)
        if lo > 0:
            vlo, vhi = np.log(lo), np.log(hi)
            x, w = quad.graded_log_panels(vlo, vhi, tmax, (vhi - vlo) / 24)
            return x, w * x
        return quad.gauss_panels(0.0, hi, min(hi / 24, 2.0 / tmax), 20)

    def fourier_at(self, t):
        """``int_R phi(x) psi(tx) dx`` at ``t >= 0`` (cosine or i*sine transform).

        ``t`` is processed in dyadic bands, each with an x-rule resolving its
        highest frequency.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((t.size, self.rank), dtype=complex)
        band = np.maximum(0, np.ceil(np.log2(np.maximum(t, 1e-300)))).astype(int)
        for b in np.unique(band):
            idx = np.nonzero(band == b)[0]
            x, w = self._x_rule(2.0**b)
            vals = self.values(x) * w[:, None]
            step = max(1, _CHUNK // max(1, x.size))
            for i in range(0, idx.size, step):
                sel = idx[i:i + step]
                arg = 2 * np.pi * np.outer(t[sel], x)
                if self.parity == 1:
                    out[sel] = 2.0 * (np.cos(arg) @ vals)
                else:
                    out[sel] = 2j * (np.sin(arg) @ vals)
        return out

    def fourier(self, tol: float = 1e-12, tmax_cap: float = 4096.0, scale=None) -> "SampledFactor":
        """Fourier transform sampled on a Mellin grid, truncated where ``|phi^| < tol``.

        ``scale`` weights the columns when judging the tail (defaults to 1).
        """
        lo, hi = self.support
        scale = np.ones(self.rank) if scale is None else np.asarray(scale, dtype=float)
        head = np.abs(self.fourier_at(np.linspace(0.0, 4.0 / hi, 65))) * scale
        ref = head.max()
        T = 8.0 / hi
        while True:
            probe = np.linspace(0.5 * T, T, 257)
            tail = (np.abs(self.fourier_at(probe)) * scale).max()
            ref = max(ref, tail)
            if tail <= tol * ref or ref == 0:
                break
            if T >= tmax_cap:
                raise SlowDecay(f"Fourier transform not below {tol:g} relative by t = {T:g}")
            T *= 2.0
        t, w = quad.schwartz_mult_grid(T, hi)
        vals = self.fourier_at(t)
        x, wx = self._x_rule(1.0)
        fx = self.values(x) * wx[:, None]
        if self.parity == 1:
            taylor = (2.0 * fx.sum(axis=0) + 0j, np.zeros(self.rank, dtype=complex))
        else:
            taylor = (np.zeros(self.rank, dtype=complex), 4j * np.pi * (x[:, None] * fx).sum(axis=0))
        return SampledFactor(t, w, vals, taylor, self.parity, T)


@dataclass
class SampledFactor:
    """Schwartz-class coordinate factor sampled on a multiplicative grid."""

    t: np.ndarray
    w: np.ndarray  # weights for dt/t
    vals: np.ndarray  # (Nt, r)
    taylor: tuple  # (value, derivative) at t = 0
    parity: int
    tmax: float
    kind: str = "schwartz"

    @property
    def rank(self) -> int:
        return self.vals.shape[1]

    def mellin(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if np.any(z.real <= 0):
            raise DomainViolation("Mellin transform after the Fourier step needs Re z > 0")
        return _mellin_sum(z, self.t, self.w, self.vals, self.taylor, 1.0)

    def fourier_at(self, x):
        """Apply the Fourier transform again (evaluates ``phi^^`` at ``x >= 0``)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        dt = self.w * self.t
        arg = 2 * np.pi * np.outer(x, self.t)
        vals = self.vals * dt[:, None]  # the log grid's lower truncation is below 1e-10
        if self.parity == 1:
            return 2.0 * (np.cos(arg) @ vals)
        return 2j * (np.sin(arg) @ vals)


# --------------------------------------------------------------------------
# torus functions
# --------------------------------------------------------------------------
@dataclass
class TorusFunction:
    """``Phi(x~) = sum core[a,b,...] phi^(1)_a(x_1) phi^(2)_b(x_2) ...``.

    The first ``t0_rank`` coordinates belong to ``T_0``, the rest to ``T_n``.
    Coordinates are multiplicative: ``x_i`` is the absolute value of the torus
    coordinate, and the measure is ``prod dx_i/x_i``.
    """

    factors: list
    core: np.ndarray
    t0_rank: int
    stage: str = "compact"
    diagnostics: dict = field(default_factory=dict)
    exact: Callable | None = None  # exact log-coordinate evaluator, if known

    @property
    def dim(self) -> int:
        return len(self.factors)

    @property
    def tn_rank(self) -> int:
        return self.dim - self.t0_rank

    def _contract(self, mats):
        # mats[i]: (P, r_i); returns (P,)
        out = np.einsum("a...,pa->p...", self.core, mats[0])
        for M in mats[1:]:
            out = np.einsum("pa...,pa->p...", out, M)
        return out

    def evaluate_log(self, xt):
        """Evaluate at log coordinates ``xt`` of shape ``(P, dim)`` (compact stage only)."""
        xt = np.atleast_2d(np.asarray(xt, dtype=float))
        if self.stage != "compact":
            raise ValueError("pointwise evaluation is only available before the Fourier step")
        mats = [f.values(np.exp(xt[:, i])) for i, f in enumerate(self.factors)]
        return np.real(self._contract(mats))

    def mellin(self, lam):
        """``int Phi(x~) e^{<lam, log x~>} dx~``; ``lam`` of shape ``(dim,)`` or ``(P, dim)``."""
        lam = np.asarray(lam, dtype=complex)
        single = lam.ndim == 1
        lam = np.atleast_2d(lam)
        if lam.shape[1] != self.dim:
            raise DimensionMismatch(f"lambda must have length {self.dim}")
        mats = []
        for i, f in enumerate(self.factors):
            zi = lam[:, i]
            # grid points like zeta/2 + tau repeat up to rounding; merge them
            key = np.round(zi.real, 12) + 1j * np.round(zi.imag, 12)
            uniq, first, inv = np.unique(key, return_index=True, return_inverse=True)
            mats.append(f.mellin(zi[first])[inv.ravel()])
        # contract in blocks: the intermediate has shape (block, r_2, ..., r_d)
        block = max(1, _CHUNK // max(1, self.core.size // self.core.shape[0]))
        out = np.concatenate([self._contract([M[i:i + block] for M in mats])
                              for i in range(0, lam.shape[0], block)])
        return complex(out[0]) if single else out


def fourier_tn(phi: TorusFunction, tol: float = 1e-12, tmax_cap: float = 4096.0) -> TorusFunction:
    """Fourier transform in the ``T_n`` coordinates, ``t_0 -> t_0^{-1}`` on ``T_0``."""
    if phi.stage != "compact":
        raise ValueError("input must be a compactly supported (lift-stage) torus function")
    new = []
    core = phi.core
    for i, f in enumerate(phi.factors):
        if i < phi.t0_rank:
            new.append(f.inverted())
            continue
        # column weights: magnitude of the core slice attached to each column
        moved = np.moveaxis(np.abs(core), i, 0).reshape(core.shape[i], -1)
        scale = moved.max(axis=1) if moved.size else np.ones(f.rank)
        new.append(f.fourier(tol=tol, tmax_cap=tmax_cap, scale=scale))
    diag = dict(phi.diagnostics)
    diag["fourier_tmax"] = [getattr(f, "tmax", None) for f in new]
    return TorusFunction(new, core, phi.t0_rank, "fourier", diag)


def mellin(phi: TorusFunction, lam):
    return phi.mellin(lam)


# --------------------------------------------------------------------------
# Tate zeta integrals
# --------------------------------------------------------------------------
def _as_rank1(f):
    if isinstance(f, Profile):
        return f.as_factor()
    if f.rank != 1:
        raise DimensionMismatch("tate_zeta expects a single profile")
    return f


def tate_zeta(f, eta: RealQuasicharacter, s):
    """``Z(s, f, eta) = int_{R^x} f(x) eta(x) |x|^s d^x x`` with ``d^x x = dx/|x|``.

    ``f`` is a :class:`Profile`, or a rank-one factor (e.g. the output of
    :func:`fourier_profile`).  Profiles whose parity differs from ``eta(-1)``
    give zero.
    """
    fac = _as_rank1(f)
    s = np.asarray(s, dtype=complex)
    if fac.parity != eta.at_minus_one():
        return np.zeros_like(s) if s.ndim else 0j
    z = s + eta.t
    val = 2.0 * fac.mellin(np.atleast_1d(z))[:, 0]
    return val.reshape(s.shape) if s.ndim else complex(val[0])


def fourier_profile(f: Profile, tol: float = 1e-13) -> SampledFactor:
    return f.as_factor().fourier(tol=tol)


# --------------------------------------------------------------------------
# lifts through r~^vee
# --------------------------------------------------------------------------
def _cheb_nodes(a, b, n):
    y = np.cos(np.pi * (np.arange(n) + 0.5) / n)[::-1]
    return 0.5 * (a + b) + 0.5 * (b - a) * y, y


def _hosvd(T, tol):
    """Truncated higher-order SVD: returns (core, [U_i])."""
    Us = []
    for mode in range(T.ndim):
        M = np.moveaxis(T, mode, 0).reshape(T.shape[mode], -1)
        U, s, _ = np.linalg.svd(M, full_matrices=False)
        keep = max(1, int(np.sum(s > tol * s[0]))) if s[0] > 0 else 1
        Us.append(U[:, :keep])
    core = T
    for mode, U in enumerate(Us):
        core = np.moveaxis(np.tensordot(U.T, np.moveaxis(core, mode, 0), axes=1), 0, mode)
    return core, Us


def _chebyshev_factor(vlo, vhi, margin, nodes_y, U):
    """Windowed Chebyshev interpolant of sampled columns ``U`` on ``[vlo-m, vhi+m]``."""
    coef = C.chebfit(nodes_y, U, U.shape[0] - 1)
    a, b = vlo - margin, vhi + margin

    def fn(x):
        v = np.log(np.maximum(x, 1e-300))
        y = (2 * v - (a + b)) / (b - a)
        win = smooth_step((v - a) / margin) * smooth_step((b - v) / margin)
        return C.chebval(y, coef).T * win[:, None]

    return CompactFactor(fn, (float(np.exp(a)), float(np.exp(b))), U.shape[1])


@dataclass(frozen=True)
class BumpSpec:
    """Fiber bump and separation controls for :func:`lift`."""

    radius: float = 1.0
    cheb_nodes: int = 64
    margin: float = 0.25
    separation_tol: float = 1e-10
    sharpness: float | None = 4.0  # None: plain bump on the fiber

    def profile(self, y):
        return bump(y) if self.sharpness is None else sharp_bump(y, self.sharpness)

    @property
    def mass(self) -> float:
        """``int_{-1}^{1}`` of the fiber profile."""
        if self.sharpness is None:
            return BUMP_MASS
        y, w = quad.gauss_panels(-1.0, 1.0, 1.0 / 32, 20)
        return float(w @ self.profile(y))


def lift(fB: Callable, support, amap: AugmentedMap, bump_spec: BumpSpec = BumpSpec()) -> TorusFunction:
    """A compactly supported ``Phi`` on ``a~`` whose push-forward to ``a`` is ``fB``.

    ``Phi(x~) = c fB(L x~) prod_j bump(kappa_j / R)`` where ``L`` is the
    push-forward, ``kappa`` orthonormal coordinates on ``ker L`` and ``c`` makes
    every fiber integral (with the Jacobian of ``L``) reproduce ``fB``.
    ``support`` is ``(lo, hi)``: a box in ``a`` containing the support of ``fB``.
    """
    L = amap.pushforward_matrix
    rank, d = L.shape
    if np.linalg.matrix_rank(L) != rank:
        raise NotSurjective("push-forward a~ -> a is not surjective")
    lo, hi = (np.asarray(x, dtype=float) for x in support)
    sigma = amap.section
    K = null_space(L) if d > rank else np.zeros((d, 0))
    m = K.shape[1]
    jac = 1.0 / np.sqrt(np.linalg.det(L @ L.T))
    R = bump_spec.radius
    const = 1.0 / (jac * (R * bump_spec.mass) ** m)

    def exact(xt):
        xt = np.atleast_2d(xt)
        val = np.asarray(fB(xt @ L.T), dtype=float) * const
        if m:
            kap = xt @ K
            val = val * np.prod(bump_spec.profile(kap / R), axis=1)
        return val

    # bounding box of the support in a~
    corners = np.array(np.meshgrid(*[[a, b] for a, b in zip(lo, hi)], indexing="ij")).reshape(rank, -1).T
    img = corners @ sigma.T
    ext = R * np.abs(K).sum(axis=1) if m else np.zeros(d)
    blo, bhi = img.min(axis=0) - ext, img.max(axis=0) + ext
    if np.any(np.abs(np.concatenate([blo, bhi])) > MAX_LOG_RADIUS):
        raise SupportEscape("lifted support leaves the representable annulus")

    diag = {"jacobian": jac, "kernel_dim": m, "box": (blo.tolist(), bhi.tolist())}
    if d == 1:
        fac = CompactFactor(lambda x: exact(np.log(x)[:, None])[:, None],
                            (float(np.exp(blo[0])), float(np.exp(bhi[0]))), 1)
        diag["separation_rank"] = [1]
        diag["interpolation_error"] = 0.0
        return TorusFunction([fac], np.ones(1), amap.t0_rank, "compact", diag, exact)

    n = bump_spec.cheb_nodes
    mg = bump_spec.margin
    grids = [_cheb_nodes(a - mg, b + mg, n) for a, b in zip(blo, bhi)]
    mesh = np.meshgrid(*[g[0] for g in grids], indexing="ij")
    pts = np.stack([x.ravel() for x in mesh], axis=1)
    vals = np.concatenate([exact(pts[i:i + 20000]) for i in range(0, len(pts), 20000)]).reshape((n,) * d)
    core, Us = _hosvd(vals, bump_spec.separation_tol)
    factors = [_chebyshev_factor(a, b, mg, g[1], U) for a, b, g, U in zip(blo, bhi, grids, Us)]
    diag["separation_rank"] = [U.shape[1] for U in Us]
    recon = core
    for mode, U in enumerate(Us):
        recon = np.moveaxis(np.tensordot(U, np.moveaxis(recon, mode, 0), axes=1), 0, mode)
    diag["separation_error"] = float(np.max(np.abs(recon - vals)) / max(np.max(np.abs(vals)), 1e-300))
    out = TorusFunction(factors, core, amap.t0_rank, "compact", diag, exact)
    # off-node check of the separated form against the exact lift
    probe = np.random.default_rng(0).uniform(blo, bhi, (256, d))
    ref = exact(probe)
    diag["interpolation_error"] = float(np.max(np.abs(out.evaluate_log(probe) - ref)) / max(np.max(np.abs(ref)), 1e-300))
    log.debug("lift: ranks %s, separation error %.2e, interpolation error %.2e", diag["separation_rank"],
              diag["separation_error"], diag["interpolation_error"])
    return out


def pushforward(phi: TorusFunction, amap: AugmentedMap, H, separated: bool = False):
    """Numerical fiber integral ``(r~^vee_* Phi)(H)``.

    Integrates the exact lift by default; ``separated=True`` integrates the
    tensor representation that feeds the Fourier step instead.
    """
    if not separated and phi.exact is None:
        separated = True
    ev = phi.evaluate_log if separated else phi.exact
    L = amap.pushforward_matrix
    rank, d = L.shape
    H = np.atleast_2d(np.asarray(H, dtype=float))
    jac = 1.0 / np.sqrt(np.linalg.det(L @ L.T))
    base = H @ amap.section.T
    if d == rank:
        return jac * ev(base)
    K = null_space(L)
    m = K.shape[1]
    if m != 1:
        raise NotImplementedError("fiber quadrature implemented for one-dimensional fibers")
    blo, bhi = (np.asarray(x) for x in phi.diagnostics["box"])
    R = float(np.linalg.norm(bhi - blo))
    k, w = quad.gauss_panels(-R, R, 0.05, 20)
    out = np.empty(len(H))
    for i, b in enumerate(base):
        pts = b[None, :] + k[:, None] * K[:, 0][None, :]
        out[i] = jac * np.sum(w * ev(pts))
    return out
