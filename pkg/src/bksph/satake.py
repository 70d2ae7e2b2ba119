"""Unramified spectral data: Satake parameters, Sym^k traces and Euler factors.

Satake parameters are stored as coordinates of a dual-torus element.  Values
built from them only depend on the multiset ``{mu_i(t)}`` of weights of ``r``
evaluated at ``t``; every operation first moves ``t`` to a canonical point of
its Weyl orbit so that W-equivalent inputs give bit-identical outputs.

Rational coordinates (``int``/``Fraction``) are kept exact throughout.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from numbers import Rational

import numpy as np

from .errors import DomainViolation, PoleEncountered
from .rootdata import RepData, RootDatum

log = logging.getLogger(__name__)


def _is_exact(x) -> bool:
    return isinstance(x, Rational)


def _key(x):
    z = complex(x)
    return (z.real, z.imag)


@dataclass(frozen=True)
class SatakeParam:
    """Dual-torus element ``t`` (taken modulo W) at a place with residue field of size ``q``."""

    t: tuple
    q: int

    def __post_init__(self):
        t = tuple(Fraction(x) if _is_exact(x) else complex(x) for x in self.t)
        if any(x == 0 for x in t):
            raise DomainViolation("Satake coordinates must be nonzero")
        if int(self.q) != self.q or self.q < 2:
            raise DomainViolation("q must be an integer prime power >= 2")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "q", int(self.q))

    @property
    def exact(self) -> bool:
        return all(isinstance(x, Fraction) for x in self.t)

    def orbit(self, datum: RootDatum) -> list[tuple]:
        """``{w t}``; ``w`` acts through the cocharacter action of the Weyl group."""
        out = []
        for C in datum.weyl_group.coweight_action:
            img = []
            for j in range(len(self.t)):
                v = 1
                for k, tk in enumerate(self.t):
                    e = C[k][j]
                    if e:
                        v = v * tk ** e
                img.append(v)
            out.append(tuple(img))
        return out

    def canonical(self, datum: RootDatum | None = None) -> tuple:
        """A fixed representative of the W-orbit (lexicographically smallest)."""
        if datum is None:
            datum = RootDatum.gl(len(self.t))
        return min(self.orbit(datum), key=lambda tt: [_key(x) for x in tt])


def eigenvalues(rep: RepData, sp: SatakeParam, datum: RootDatum | None = None) -> list:
    """``[mu_i(t)]`` with ``mu_i(t) = prod_j t_j^{w_ij}``, at the canonical representative."""
    if len(sp.t) != rep.rank:
        raise DomainViolation("Satake parameter and representation have different ranks")
    t = sp.canonical(datum)
    out = []
    for w in rep.weights:
        v = 1
        for tj, e in zip(t, w):
            if e:
                v = v * tj ** e
        out.append(v)
    # sorting makes the output independent of the order of the weights too
    return sorted(out, key=_key)


def power_sums(mu, k: int) -> list:
    """``[p_1, ..., p_k]`` of the multiset ``mu``."""
    p = []
    cur = list(mu)
    for _ in range(k):
        p.append(sum(cur))
        cur = [a * b for a, b in zip(cur, mu)]
    return p


def complete_homogeneous(mu, k: int) -> list:
    """``[h_0, ..., h_k]`` via Newton's identity ``j h_j = sum_{i=1}^j p_i h_{j-i}``."""
    exact = all(isinstance(x, Fraction) for x in mu)
    p = power_sums(mu, k)
    h = [Fraction(1) if exact else 1.0 + 0j]
    for j in range(1, k + 1):
        acc = sum(p[i - 1] * h[j - i] for i in range(1, j + 1))
        h.append(acc / j if exact else acc / float(j))
    return h


def h_bruteforce(mu, k: int):
    """``h_k`` by summing all degree-``k`` monomials (test oracle)."""
    total = 0
    for combo in combinations_with_replacement(range(len(mu)), k):
        term = 1
        for i in combo:
            term = term * mu[i]
        total = total + term
    return total if k else (Fraction(1) if all(isinstance(x, Fraction) for x in mu) else 1.0 + 0j)


def sym_trace(rep: RepData, sp: SatakeParam, k: int, datum: RootDatum | None = None):
    """``tr Sym^k(r(t)) = h_k(mu_1(t), ..., mu_n(t))``.

    Returns a ``Fraction`` for rational ``t`` and a ``complex`` otherwise.
    """
    if k < 0:
        raise DomainViolation("k must be nonnegative")
    return complete_homogeneous(eigenvalues(rep, sp, datum), k)[k]


def _q_power(q: int, s, exact: bool):
    # q^{-s}; exact when s is an integer and t rational
    if exact and isinstance(s, (int, Fraction)) and Fraction(s).denominator == 1:
        e = int(s)
        return Fraction(1, q**e) if e >= 0 else Fraction(q ** (-e))
    return complex(q) ** (-complex(s))


def local_L(rep: RepData, sp: SatakeParam, s, datum: RootDatum | None = None):
    """``prod_i (1 - mu_i(t) q^{-s})^{-1}``."""
    mu = eigenvalues(rep, sp, datum)
    exact = sp.exact
    x = _q_power(sp.q, s, exact)
    out = Fraction(1) if isinstance(x, Fraction) else 1.0 + 0j
    for m in mu:
        d = 1 - m * x
        if d == 0 or (not isinstance(d, Fraction) and abs(d) < 1e-14):
            raise PoleEncountered(f"mu q^(-s) = 1 at q = {sp.q}")
        out = out / d
    return out


# --------------------------------------------------------------------------
# truncated Euler products
# --------------------------------------------------------------------------
def primes_up_to(n: int) -> np.ndarray:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.nonzero(sieve)[0]


def prime_tail_sum(P: int, sigma: float, M: int = 100_000) -> float:
    """Upper bound for ``sum_{p > P} p^{-sigma}/(1 - p^{-sigma})`` (``sigma > 1``).

    Primes in ``(P, M]`` are summed explicitly; beyond ``M`` every prime is
    coprime to 30 and there are 8 such residues per block of 30, so the
    remainder is at most ``8 M^{-sigma} + (8/30) M^{1-sigma}/(sigma-1)``.
    """
    if sigma <= 1:
        raise DomainViolation("the Euler product tail is only bounded for Re s > 1")
    M = max(M, P + 1, 31)
    ps = primes_up_to(M)
    ps = ps[ps > P].astype(float)
    x = ps ** (-sigma)
    head = float(np.sum(x / (1 - x)))
    rest = 8 * M ** (-sigma) + (8 / 30) * M ** (1 - sigma) / (sigma - 1)
    return head + rest / (1 - M ** (-sigma))


def euler_tail_bound(rep: RepData, P: int, s, M: int = 100_000) -> float:
    """Relative bound on ``|L / L_{<=P} - 1|`` for tempered data (``|mu_i| = 1``) at primes ``> P``."""
    S = prime_tail_sum(P, float(np.real(complex(s))), M)
    return math.expm1(rep.n * S)


def partial_L(rep: RepData, params, s, datum: RootDatum | None = None):
    """Finite Euler product ``prod_v L(s, pi_v, r)``; an empty list gives 1.

    When the places are consecutive primes ``2, 3, ..., P`` and ``Re s > 1``,
    the relative truncation bound for tempered data beyond ``P`` is logged.
    """
    params = list(params)
    out = Fraction(1) if params and all(sp.exact for sp in params) else 1.0 + 0j
    if not params:
        return out
    for sp in params:
        out = out * local_L(rep, sp, s, datum)
    qs = sorted(sp.q for sp in params)
    if float(np.real(complex(s))) > 1 and qs == primes_up_to(qs[-1]).tolist():
        log.info("partial_L: %d places, tempered tail bound %.3e", len(qs), euler_tail_bound(rep, qs[-1], s))
    return out


__all__ = [
    "SatakeParam", "eigenvalues", "power_sums", "complete_homogeneous", "h_bruteforce", "sym_trace",
    "local_L", "primes_up_to", "prime_tail_sum", "euler_tail_bound", "partial_L",
]
