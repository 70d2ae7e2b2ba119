"""Quadrature rules: double-exponential (tanh-sinh) and Gauss-Legendre panels.

All rules return ``(nodes, weights)`` as float arrays.  Multiplicative grids
(``*_mult``, ``*log_panels``) carry weights for the measure ``dt/t`` on
``(0, inf)`` so a Mellin transform is simply ``sum(w * g(t) * t**z)``.
"""
from __future__ import annotations

import functools

import numpy as np

_HALF_PI = 0.5 * np.pi


@functools.lru_cache(maxsize=64)
def _tanh_sinh_reference(h: float, tmax: float):
    t = np.arange(-tmax, tmax + 0.5 * h, h)
    q = _HALF_PI * np.sinh(t)
    with np.errstate(over="ignore"):
        # fraction of the interval measured from each end, without cancellation
        from_left = 1.0 / (1.0 + np.exp(-2.0 * q))
        from_right = 1.0 / (1.0 + np.exp(2.0 * q))
        w = h * _HALF_PI * np.cosh(t) / np.cosh(q) ** 2
    keep = (from_left > 0) & (from_right > 0) & (w > 0) & np.isfinite(w)
    return from_left[keep], from_right[keep], w[keep]


def tanh_sinh(a: float, b: float, h: float = 1.0 / 32, tmax: float = 6.5):
    """Tanh-sinh rule on ``[a, b]``.

    Nodes approach the endpoints double-exponentially, so integrable algebraic
    endpoint singularities such as ``x**(-0.9)`` at ``a = 0`` are handled.
    Nodes near ``a`` are computed as ``a + (b-a)*frac`` with ``frac`` evaluated
    directly, which keeps them exact when ``a == 0``.
    """
    fl, fr, w = _tanh_sinh_reference(float(h), float(tmax))
    span = b - a
    x = np.where(fl < 0.5, a + span * fl, b - span * fr)
    return x, 0.5 * span * w


@functools.lru_cache(maxsize=16)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def gauss_panels(a: float, b: float, width: float, order: int = 20):
    """Composite Gauss-Legendre rule with panels no wider than ``width``."""
    if b <= a:
        return np.empty(0), np.empty(0)
    npan = max(1, int(np.ceil((b - a) / width)))
    edges = np.linspace(a, b, npan + 1)
    x0, w0 = _leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
    w = (half[:, None] * w0[None, :]).ravel()
    return x, w


SMALL_T_LOG_DEPTH = 24.0  # log-coordinate depth of the (0, cut] piece


def log_panels(vlo: float, vhi: float, width: float = 0.2, order: int = 20):
    """Gauss panels in ``v = log t`` on ``[vlo, vhi]``; weights for ``dt/t``."""
    v, w = gauss_panels(vlo, vhi, width, order)
    return np.exp(v), w


def graded_log_panels(vlo: float, vhi: float, freq: float, width: float = 0.2, order: int = 20):
    """Log-coordinate panels that also resolve ``cos(2 pi freq t)``.

    In ``v`` the oscillation has local period ``1/(freq e^v)``; each panel spans
    at most two such periods and at most ``width``.
    """
    edges = [vlo]
    while edges[-1] < vhi:
        v = edges[-1]
        step = min(width, 2.0 / (max(freq, 1e-12) * np.exp(v)))
        edges.append(min(vhi, v + step))
    edges = np.asarray(edges)
    x0, w0 = _leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    v = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
    return np.exp(v), (half[:, None] * w0[None, :]).ravel()


def compact_mult_grid(lo: float, hi: float, width: float = 0.2):
    """Grid for ``int_lo^hi g(t) dt/t`` with ``0 <= lo < hi``.

    Gauss panels in ``log t``.  For ``lo == 0`` the piece below ``min(1, hi)`` is
    truncated at depth ``SMALL_T_LOG_DEPTH``; callers subtract the Taylor
    polynomial of ``g`` at 0 there so the truncated tail is negligible.
    """
    if lo > 0:
        # bump-type integrands are flat to all orders at the ends; Gauss needs
        # enough panels to see that
        vlo, vhi = np.log(lo), np.log(hi)
        return log_panels(vlo, vhi, min(width, (vhi - vlo) / 48))
    cut = np.log(min(1.0, hi))
    t1, w1 = log_panels(cut - SMALL_T_LOG_DEPTH, cut, width)
    if hi <= 1.0:
        return t1, w1
    t2, w2 = log_panels(0.0, np.log(hi), width)
    return np.concatenate([t1, t2]), np.concatenate([w1, w2])


def schwartz_mult_grid(tmax: float, freq: float, width: float = 0.2, order: int = 20):
    """Grid for ``int_0^tmax g(t) dt/t`` where ``g`` oscillates at frequency ``freq``.

    ``(0, 1]`` (truncated at depth ``SMALL_T_LOG_DEPTH``) and ``[1, tmax]`` use
    Gauss panels in ``log t``, graded so every panel covers at most two periods.
    """
    t1, w1 = log_panels(-SMALL_T_LOG_DEPTH, 0.0, width, order)
    if tmax <= 1.0:
        return t1, w1
    t2, w2 = graded_log_panels(0.0, np.log(tmax), freq, width, order)
    return np.concatenate([t1, t2]), np.concatenate([w1, w2])


def trapezoid_periodic(n: int, period: float = 2 * np.pi):
    """Equispaced rule for smooth periodic integrands, normalized to total mass 1."""
    x = np.arange(n) * (period / n)
    return x, np.full(n, 1.0 / n)
