"""Archimedean L-, epsilon- and gamma-factors for quasicharacters of R^x.

The additive character is fixed to ``psi(x) = exp(2 pi i x)`` and Fourier
transforms are ``f^(y) = int f(x) psi(xy) dx``.  With that convention the
Tate integral ratio gives ``epsilon(s, sgn, psi) = +i``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndeterminateAtPole, PoleEncountered
from .rootdata import RepData, weight_map

# Lanczos approximation, g = 671/128, 14 terms (Numerical Recipes, 3rd ed.)
_LANCZOS_SHIFT = 671.0 / 128.0
_LANCZOS_COF = np.array([
    57.1562356658629235, -59.5979603554754912, 14.1360979747417471,
    -0.491913816097620199, 0.339946499848118887e-4, 0.465236289270485756e-4,
    -0.983744753048795646e-4, 0.158088703224912494e-3, -0.210264441724104883e-3,
    0.217439618115212643e-3, -0.164318106536763890e-3, 0.844182239838527433e-4,
    -0.261908384015814087e-4, 0.368991826595316234e-5,
])
_LANCZOS_C0 = 0.999999999999997092
_SQRT_2PI = 2.5066282746310005
_LOG_PI = np.log(np.pi)


def _loggamma_right(z):
    # valid for Re z >= 1/2
    ser = np.full_like(z, _LANCZOS_C0)
    y = z
    for c in _LANCZOS_COF:
        y = y + 1
        ser = ser + c / y
    tmp = z + _LANCZOS_SHIFT
    return (z + 0.5) * np.log(tmp) - tmp + np.log(_SQRT_2PI * ser / z)


def _log_sin_pi(z):
    # log sin(pi z), stable for large |Im z|
    w = np.pi * z
    up = z.imag >= 0
    wu = np.where(up, w, np.conj(w))
    val = -1j * wu + np.log((1 - np.exp(2j * wu)) / (-2j))
    return np.where(up, val, np.conj(val))


def loggamma(z):
    """Complex log-Gamma (one branch; only ``exp(loggamma)`` is meaningful)."""
    z = np.asarray(z, dtype=complex)
    left = z.real < 0.5
    zr = np.where(left, 1 - z, z)
    lg = _loggamma_right(zr)
    with np.errstate(divide="ignore", invalid="ignore"):
        refl = _LOG_PI - _log_sin_pi(z) - lg
    return np.where(left, refl, lg)


def _is_nonpositive_int(z, tol=0.0):
    z = np.asarray(z, dtype=complex)
    r = np.round(z.real)
    return (np.abs(z.imag) <= tol) & (np.abs(z.real - r) <= tol) & (r <= 0)


def gamma(z):
    """Complex Gamma via Lanczos with reflection; raises at the poles."""
    z = np.asarray(z, dtype=complex)
    if np.any(_is_nonpositive_int(z)):
        raise PoleEncountered("Gamma has a pole at a nonpositive integer")
    out = np.exp(loggamma(z))
    return out if out.ndim else complex(out)


def log_gamma_R(s):
    s = np.asarray(s, dtype=complex)
    return -0.5 * s * _LOG_PI + loggamma(0.5 * s)


def gamma_R(s):
    """``Gamma_R(s) = pi^{-s/2} Gamma(s/2)``."""
    s = np.asarray(s, dtype=complex)
    if np.any(_is_nonpositive_int(0.5 * s)):
        raise PoleEncountered("Gamma_R has poles at s = 0, -2, -4, ...")
    out = np.exp(log_gamma_R(s))
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class RealQuasicharacter:
    """``x -> sgn(x)^sign |x|^t``."""

    sign: int = 0
    t: complex = 0.0

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise ValueError("sign exponent must be 0 or 1")
        object.__setattr__(self, "t", complex(self.t))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) ** self.sign * np.abs(x) ** self.t

    def inverse(self) -> "RealQuasicharacter":
        return RealQuasicharacter(self.sign, -self.t)

    def shift(self, s) -> "RealQuasicharacter":
        return RealQuasicharacter(self.sign, self.t + s)

    def at_minus_one(self) -> int:
        return -1 if self.sign else 1


TRIVIAL = RealQuasicharacter(0, 0.0)
SGN = RealQuasicharacter(1, 0.0)


def epsilon_factor(eta: RealQuasicharacter) -> complex:
    return 1j if eta.sign else 1.0 + 0j


def local_L(eta: RealQuasicharacter, s):
    """``L(s, eta) = Gamma_R(s + t + sign)``."""
    return gamma_R(np.asarray(s, dtype=complex) + eta.t + eta.sign)


def gamma_quasicharacter(eta: RealQuasicharacter, s):
    """``epsilon(eta) L(1-s, eta^{-1}) / L(s, eta)``.

    Returns ``inf`` at poles (numerator pole) and ``0`` at zeros (denominator
    pole); raises :class:`IndeterminateAtPole` where both collide.
    """
    s = np.asarray(s, dtype=complex)
    num_arg = 1 - s - eta.t + eta.sign
    den_arg = s + eta.t + eta.sign
    num_pole = _is_nonpositive_int(0.5 * num_arg)
    den_pole = _is_nonpositive_int(0.5 * den_arg)
    if np.any(num_pole & den_pole):
        raise IndeterminateAtPole("numerator and denominator L-factors both have poles")
    with np.errstate(all="ignore"):
        val = epsilon_factor(eta) * np.exp(log_gamma_R(num_arg) - log_gamma_R(den_arg))
    val = np.where(num_pole, complex(np.inf), np.where(den_pole, 0j, val))
    return val if val.ndim else complex(val)


def gamma_rep(rep: RepData, nu, s):
    """``gamma(s, J(e^<nu,H>), r, psi)`` as a product over the weights of ``r``."""
    t = weight_map(rep, np.asarray(nu, dtype=complex))
    s = np.asarray(s, dtype=complex)
    out = np.ones(np.broadcast_shapes(t.shape[:-1], s.shape), dtype=complex)
    for i in range(t.shape[-1]):
        out = out * gamma_quasicharacter(TRIVIAL, s + t[..., i])
    return out if out.ndim else complex(out)
