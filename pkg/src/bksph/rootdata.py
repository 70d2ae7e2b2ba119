"""Exact lattice layer: root data, Weyl groups, weight maps and tube geometry.

Characters live in ``X^*(T) = Z^rank`` and cocharacters in ``X_*(T) = Z^rank``
with the standard dot product as pairing.  A Weyl element is stored as the
integer matrix ``A`` by which it acts on characters (and on ``a*``); it acts on
cocharacters (and on ``a``) by ``A^{-T}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm
import numpy as np
import sympy
from sympy.matrices.normalforms import hermite_normal_form

from .errors import (
    CentralIncompatible,
    DimensionMismatch,
    KernelNotHandled,
    NonWeylStable,
)


def _as_int_rows(rows) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in r) for r in rows)


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _matvec(A, v):
    return tuple(_dot(row, v) for row in A)


def _matmul(A, B):
    cols = list(zip(*B))
    return tuple(tuple(_dot(row, c) for c in cols) for row in A)


@dataclass(frozen=True)
class RootDatum:
    """Split root datum with a fixed Borel (via its simple roots)."""

    rank: int
    simple_roots: tuple[tuple[int, ...], ...]
    simple_coroots: tuple[tuple[int, ...], ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "simple_roots", _as_int_rows(self.simple_roots))
        object.__setattr__(self, "simple_coroots", _as_int_rows(self.simple_coroots))
        if len(self.simple_roots) != len(self.simple_coroots):
            raise DimensionMismatch("simple roots and coroots differ in number")
        for v in self.simple_roots + self.simple_coroots:
            if len(v) != self.rank:
                raise DimensionMismatch(f"vector {v} does not have length {self.rank}")

    # constructors -----------------------------------------------------------
    @classmethod
    def gl(cls, n: int) -> "RootDatum":
        roots, coroots = [], []
        for i in range(n - 1):
            e = [0] * n
            e[i], e[i + 1] = 1, -1
            roots.append(tuple(e))
            coroots.append(tuple(e))
        return cls(n, tuple(roots), tuple(coroots), name=f"GL{n}")

    @classmethod
    def sl2(cls) -> "RootDatum":
        # X^*(T) = Z generated by the fundamental weight, alpha = 2 varpi
        return cls(1, ((2,),), ((1,),), name="SL2")

    @classmethod
    def product(cls, *factors: "RootDatum") -> "RootDatum":
        rank = sum(f.rank for f in factors)
        roots, coroots, off = [], [], 0
        for f in factors:
            for a, c in zip(f.simple_roots, f.simple_coroots):
                roots.append((0,) * off + a + (0,) * (rank - off - f.rank))
                coroots.append((0,) * off + c + (0,) * (rank - off - f.rank))
            off += f.rank
        return cls(rank, tuple(roots), tuple(coroots), name="x".join(f.name for f in factors))

    # structure ----------------------------------------------------------------
    @cached_property
    def cartan_matrix(self) -> np.ndarray:
        return np.array([[_dot(a, c) for c in self.simple_coroots] for a in self.simple_roots], dtype=int)

    @cached_property
    def simple_reflections(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        gens = []
        for a, c in zip(self.simple_roots, self.simple_coroots):
            # s(x) = x - <x, c> a
            M = tuple(
                tuple((1 if i == j else 0) - a[i] * c[j] for j in range(self.rank))
                for i in range(self.rank)
            )
            gens.append(M)
        return tuple(gens)

    @cached_property
    def weyl_group(self) -> "WeylGroup":
        ident = tuple(tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank))
        elems = [ident]
        seen = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for g in frontier:
                for s in self.simple_reflections:
                    h = _matmul(s, g)
                    if h not in seen:
                        seen.add(h)
                        elems.append(h)
                        nxt.append(h)
            frontier = nxt
            if len(elems) > 48:
                raise ValueError("Weyl group larger than the supported bound of 48")
        return WeylGroup(tuple(elems), self.simple_reflections)

    @cached_property
    def roots(self) -> tuple[tuple[int, ...], ...]:
        out = set()
        for A in self.weyl_group.elements:
            for a in self.simple_roots:
                out.add(_matvec(A, a))
        return tuple(sorted(out))

    @cached_property
    def _chamber_vector(self) -> tuple[Fraction, ...]:
        # xi with <alpha_i, xi> = 1 for every simple root (minimum-norm solution)
        if not self.simple_roots:
            return tuple(Fraction(0) for _ in range(self.rank))
        S = sympy.Matrix(self.simple_roots)
        xi = S.T * (S * S.T).inv() * sympy.ones(len(self.simple_roots), 1)
        return tuple(Fraction(int(x.p), int(x.q)) for x in xi)

    @cached_property
    def positive_roots(self) -> tuple[tuple[int, ...], ...]:
        xi = self._chamber_vector
        return tuple(r for r in self.roots if _dot(r, xi) > 0)

    @cached_property
    def two_rho(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.sum(np.array(self.positive_roots, dtype=int), axis=0)) if self.positive_roots else (0,) * self.rank

    @property
    def rho(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x, 2) for x in self.two_rho)

    def weyl_orbit(self, x, on: str = "characters"):
        """Orbit of ``x`` under W, duplicates removed, in a deterministic order."""
        x = tuple(x)
        if len(x) != self.rank:
            raise DimensionMismatch(f"expected length {self.rank}")
        mats = self.weyl_group.elements if on == "characters" else self.weyl_group.coweight_action
        out, seen = [], set()
        for A in mats:
            y = _matvec(A, x)
            if y not in seen:
                seen.add(y)
                out.append(y)
        return out

    def dominant(self, x):
        """The W-translate of ``x`` (a vector in a*) in the closed dominant chamber."""
        for A in self.weyl_group.elements:
            y = _matvec(A, x)
            if all(_dot(y, c) >= 0 for c in self.simple_coroots):
                return y
        raise AssertionError("no dominant representative found")


@dataclass(frozen=True)
class WeylGroup:
    elements: tuple
    generators: tuple

    def __len__(self):
        return len(self.elements)

    @cached_property
    def coweight_action(self) -> tuple:
        """Matrices ``A^{-T}`` giving the action on cocharacters (and on ``a``)."""
        out = []
        for A in self.elements:
            Ainv = sympy.Matrix(A).inv()
            out.append(_as_int_rows(Ainv.T.tolist()))
        return tuple(out)

    def arrays(self) -> list[np.ndarray]:
        return [np.array(A, dtype=float) for A in self.elements]


def weyl_orbit(datum: RootDatum, x, on: str = "characters"):
    return datum.weyl_orbit(x, on=on)


@dataclass(frozen=True)
class RepData:
    """Weights of ``r`` restricted to the dual torus plus the central datum."""

    weights: tuple[tuple[int, ...], ...]
    omega: tuple[Fraction, ...]
    N: int
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "weights", _as_int_rows(self.weights))
        object.__setattr__(self, "omega", tuple(Fraction(x) for x in self.omega))

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def rank(self) -> int:
        return len(self.weights[0])

    @property
    def d_omega(self) -> tuple[Fraction, ...]:
        return tuple(x / self.N for x in self.omega)

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.array(self.weights, dtype=float)

    # constructors -----------------------------------------------------------
    @classmethod
    def from_weights(cls, datum: RootDatum, weights, name: str = "") -> "RepData":
        """Attach the primitive W-invariant ``w`` with ``<mu_i, w> = N`` for all i."""
        w, N = find_central_datum(datum, weights)
        return cls(tuple(map(tuple, weights)), w, N, name=name)

    @classmethod
    def standard(cls, n: int) -> "RepData":
        weights = [tuple(int(i == j) for j in range(n)) for i in range(n)]
        return cls(tuple(weights), (1,) * n, 1, name=f"std{n}")

    @classmethod
    def sym2_gl2(cls) -> "RepData":
        return cls(((2, 0), (1, 1), (0, 2)), (1, 1), 2, name="sym2")


def find_central_datum(datum: RootDatum, weights):
    """Solve for a W-invariant rational ``w`` with ``<mu_i, w>`` equal and positive.

    Returns ``(w, N)`` with ``w`` scaled to a primitive integer vector.
    """
    weights = [tuple(int(x) for x in m) for m in weights]
    rank = datum.rank
    rows, rhs = [], []
    for s in datum.simple_reflections:
        for i in range(rank):
            rows.append([s[i][j] - (1 if i == j else 0) for j in range(rank)])
            rhs.append(0)
    for m in weights[1:]:
        rows.append([m[j] - weights[0][j] for j in range(rank)])
        rhs.append(0)
    rows.append(list(weights[0]))
    rhs.append(1)
    A = sympy.Matrix(rows)
    b = sympy.Matrix(rhs)
    try:
        sol, params = A.gauss_jordan_solve(b)
    except ValueError:
        raise CentralIncompatible("no W-invariant w with <mu_i, w> = N > 0 for all weights") from None
    sol = sol.subs({p: 0 for p in params})
    fr = [Fraction(int(sympy.fraction(x)[0]), int(sympy.fraction(x)[1])) for x in sol]
    den = lcm(*[f.denominator for f in fr])
    ints = [int(f * den) for f in fr]
    g = gcd(*ints) if any(ints) else 1
    ints = [x // g for x in ints]
    N = _dot(weights[0], ints)
    if N <= 0:
        raise CentralIncompatible("central pairing is not positive")
    return tuple(Fraction(x) for x in ints), N


@dataclass
class ValidationReport:
    checks: dict = field(default_factory=dict)
    N: int | None = None

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def __str__(self):
        return "\n".join(f"{'PASS' if v else 'FAIL'} {k}" for k, v in self.checks.items())


def validate(datum: RootDatum, rep: RepData, raise_on_fail: bool = True) -> ValidationReport:
    """Check the Cartan matrix, W-stability of the weights and ``r o omega^vee = [N]``."""
    if any(len(m) != datum.rank for m in rep.weights) or len(rep.omega) != datum.rank:
        raise DimensionMismatch("weights/omega do not match the rank of the root datum")
    rep_ = ValidationReport()
    C = datum.cartan_matrix
    rep_.checks["cartan_matrix"] = bool(
        C.size == 0 or (np.all(np.diag(C) == 2) and np.all(C[~np.eye(len(C), dtype=bool)] <= 0))
    )
    rep_.checks["two_rho_is_sum_of_positive_roots"] = tuple(datum.two_rho) == tuple(
        int(x) for x in (np.sum(datum.positive_roots, axis=0) if datum.positive_roots else np.zeros(datum.rank, int))
    )
    ms = sorted(rep.weights)
    stable = all(sorted(_matvec(B, m) for m in rep.weights) == ms for B in datum.weyl_group.coweight_action)
    rep_.checks["weights_weyl_stable"] = stable
    w_inv = all(_matvec(A, rep.omega) == tuple(rep.omega) for A in datum.weyl_group.elements)
    rep_.checks["omega_weyl_invariant"] = w_inv
    pairings = {_dot(m, rep.omega) for m in rep.weights}
    central = len(pairings) == 1 and pairings == {Fraction(rep.N)} and rep.N > 0
    rep_.checks["central_compatibility"] = central
    rep_.N = rep.N if central else None
    if raise_on_fail:
        if not central:
            raise CentralIncompatible(
                f"pairings <mu_i, w> = {[str(x) for x in sorted(pairings)]} are not all equal to N = {rep.N} > 0"
            )
        if not stable:
            raise NonWeylStable("weight multiset is not stable under the Weyl group")
        if not w_inv:
            raise NonWeylStable("omega is not Weyl invariant")
    return rep_


def weight_map(rep: RepData, lam) -> np.ndarray:
    """``lam -> (<mu_i, lam>)_i``; accepts trailing-axis batches."""
    lam = np.asarray(lam)
    if lam.shape[-1] != rep.rank:
        raise DimensionMismatch(f"lambda must have length {rep.rank}")
    return lam @ rep.matrix.T


def positive_chamber_test(rep: RepData, lam) -> bool:
    return bool(np.all(weight_map(rep, np.asarray(lam, dtype=float)) > 0))


@dataclass(frozen=True)
class AugmentedMap:
    """``r~ = r0 x r`` on ``a*`` and its transpose ``a~ -> a``."""

    r_matrix: np.ndarray
    r0_matrix: np.ndarray

    @property
    def t0_rank(self) -> int:
        return self.r0_matrix.shape[0]

    @property
    def n(self) -> int:
        return self.r_matrix.shape[0]

    @property
    def rank(self) -> int:
        return self.r_matrix.shape[1]

    @property
    def stacked(self) -> np.ndarray:
        """``(k+n) x rank`` matrix of ``r~``; t0 coordinates come first."""
        return np.vstack([self.r0_matrix, self.r_matrix])

    @property
    def pushforward_matrix(self) -> np.ndarray:
        return self.stacked.T

    @cached_property
    def section(self) -> np.ndarray:
        """Right inverse of the push-forward (the Moore-Penrose one)."""
        return np.linalg.pinv(self.pushforward_matrix)

    def apply(self, lam) -> np.ndarray:
        return np.asarray(lam) @ self.stacked.T


def _integer_kernel_basis(M: sympy.Matrix) -> list[list[int]]:
    basis = []
    for v in M.nullspace():
        den = lcm(*[int(sympy.fraction(x)[1]) for x in v])
        ints = [int(x * den) for x in v]
        g = gcd(*ints)
        basis.append([x // g for x in ints])
    if basis:
        H = hermite_normal_form(sympy.Matrix(basis).T)
        basis = [list(map(int, H[:, j])) for j in range(H.shape[1])]
        basis = [b if next(x for x in b if x) > 0 else [-x for x in b] for b in basis]
    return basis


def build_augmentation(datum: RootDatum, rep: RepData, r0_matrix=None) -> AugmentedMap:
    """Complete ``r`` by characters ``r0`` so that ``r~`` is injective on ``a*``.

    When ``r`` already has full column rank, ``r0`` is empty.  Otherwise the
    rows of ``r0`` are an integer (Hermite normal form) basis of the kernel of
    ``r`` on ``a*``; the Gram pairing with the kernel is then nonsingular and the
    row space is W-stable because the weights are.
    """
    R = sympy.Matrix(rep.weights)
    rank = datum.rank
    if r0_matrix is None:
        if R.rank() == rank:
            r0 = np.zeros((0, rank))
        else:
            kb = _integer_kernel_basis(R)
            K = sympy.Matrix(kb)
            # complement must annihilate d_omega so |det|^s only shifts the t_n part
            if any(x != 0 for x in K * sympy.Matrix([sympy.Rational(f.numerator, f.denominator) for f in rep.omega])):
                raise KernelNotHandled("kernel basis does not annihilate omega; supply r0_matrix")
            r0 = np.array(kb, dtype=float)
    else:
        r0 = np.atleast_2d(np.asarray(r0_matrix, dtype=float)).reshape(-1, rank)
    stacked = np.vstack([r0, rep.matrix])
    if np.linalg.matrix_rank(stacked) != rank:
        raise KernelNotHandled("r0 x r is not injective on a*")
    if r0.shape[0]:
        # W-stability of the row space of r0 (characters act by A)
        span = sympy.Matrix(r0.astype(int).tolist())
        for A in datum.weyl_group.elements:
            moved = span * sympy.Matrix(A).T
            if sympy.Matrix.vstack(span, moved).rank() != span.rank():
                raise KernelNotHandled("row space of r0 is not W-stable")
    return AugmentedMap(rep.matrix.copy(), r0)


@dataclass(frozen=True)
class TubeSpec:
    """Closed tube over ``hull(W . (2/p - 1) rho)``, optionally shifted by ``s0 d_omega``."""

    datum: RootDatum
    p: float
    s0: float = 0.0
    d_omega: tuple = ()

    @cached_property
    def apex(self) -> tuple[Fraction, ...]:
        p = Fraction(self.p)
        return tuple((2 / p - 1) * r for r in self.datum.rho)

    @property
    def hull_vertices(self):
        return self.datum.weyl_orbit(self.apex)

    def contains_real(self, x) -> bool:
        x = tuple(Fraction(v) for v in x)
        y = self.datum.dominant(x)
        diff = [a - b for a, b in zip(self.apex, y)]
        if not self.datum.simple_roots:
            return all(d == 0 for d in diff)
        S = sympy.Matrix(self.datum.simple_roots).T
        rhs = sympy.Matrix([sympy.Rational(d.numerator, d.denominator) for d in diff])
        try:
            sol, params = S.gauss_jordan_solve(rhs)
        except ValueError:
            return False
        return all(c >= 0 for c in sol)


def in_tube(ts: TubeSpec, lam, shifted: bool = False) -> bool:
    lam = np.asarray(lam, dtype=complex)
    re = [Fraction(float(v)) for v in lam.real]
    if shifted:
        re = [r - Fraction(ts.s0) * Fraction(d) for r, d in zip(re, ts.d_omega)]
    return ts.contains_real(re)
