import itertools
import logging
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bksph.errors import DomainViolation, PoleEncountered
from bksph.rootdata import RepData, RootDatum
from bksph.satake import (SatakeParam, complete_homogeneous, eigenvalues, euler_tail_bound, h_bruteforce, local_L,
                          partial_L, power_sums, primes_up_to, sym_trace)

STD2 = RepData.standard(2)
STD1 = RepData.standard(1)
SYM2 = RepData.sym2_gl2()


def test_sym_trace_examples():
    a, b = Fraction(2), Fraction(3)
    sp = SatakeParam((a, b), 5)
    assert sym_trace(STD2, sp, 0) == 1
    assert sym_trace(STD2, sp, 2) == a * a + a * b + b * b == 19
    assert sym_trace(SYM2, sp, 1) == a * a + a * b + b * b


def test_generating_function():
    rng = np.random.default_rng(4)
    mu = list(rng.uniform(-0.9, 0.9, 3) + 1j * rng.uniform(-0.3, 0.3, 3))
    K = 12
    h = complete_homogeneous(mu, K)
    # degree-K truncation of prod (1 - mu z)^{-1} by direct polynomial multiplication
    poly = np.zeros(K + 1, dtype=complex)
    poly[0] = 1
    for m in mu:
        geo = m ** np.arange(K + 1)
        poly = np.convolve(poly, geo)[:K + 1]
    np.testing.assert_allclose(h, poly, rtol=1e-12, atol=1e-15)


def test_newton_exact_against_bruteforce():
    rng = np.random.default_rng(9)
    for n in range(1, 5):
        mu = [Fraction(int(p), int(q)) for p, q in zip(rng.integers(-7, 8, n), rng.integers(1, 6, n))]
        h = complete_homogeneous(mu, 6)
        for k in range(7):
            assert h[k] == h_bruteforce(mu, k)
            assert isinstance(h[k], Fraction)


def test_power_sums():
    assert power_sums([Fraction(1, 2), Fraction(3)], 3) == [Fraction(7, 2), Fraction(37, 4), Fraction(217, 8)]  # p_1..p_k


def test_local_L_examples():
    assert local_L(STD2, SatakeParam((1, 1), 2), 2) == Fraction(16, 9)
    rng = np.random.default_rng(1)
    t = tuple(np.exp(1j * rng.uniform(0, 2 * np.pi, 2)))
    sp = SatakeParam(t, 3)
    x = 3.0 ** -3
    series = sum(hk * x**k for k, hk in enumerate(complete_homogeneous(eigenvalues(STD2, sp), 60)))
    assert abs(series - local_L(STD2, sp, 3)) < 1e-12
    assert local_L(STD2, SatakeParam(t[::-1], 3), 3) == local_L(STD2, sp, 3)


def test_local_L_pole():
    with pytest.raises(PoleEncountered):
        local_L(STD2, SatakeParam((4, 1), 2), 2)


def test_satake_param_validation():
    with pytest.raises(DomainViolation):
        SatakeParam((0, 1), 2)
    with pytest.raises(DomainViolation):
        SatakeParam((1, 1), 1)


def test_weyl_equivalent_params_identical():
    # floats that are W-equivalent give bit-identical values
    t = (0.3 + 0.7j, -1.1 + 0.2j)
    for rep in (STD2, SYM2):
        for k in range(5):
            assert sym_trace(rep, SatakeParam(t, 7), k) == sym_trace(rep, SatakeParam(t[::-1], 7), k)
        assert local_L(rep, SatakeParam(t, 7), 1.5 + 2j) == local_L(rep, SatakeParam(t[::-1], 7), 1.5 + 2j)


def test_partial_L_examples(caplog):
    assert partial_L(STD2, [], 2) == 1
    sp = SatakeParam((Fraction(1, 2), 3), 5)
    assert partial_L(STD2, [sp], 2) == local_L(STD2, sp, 2)
    ps = primes_up_to(100)
    with caplog.at_level(logging.INFO, logger="bksph.satake"):
        val = partial_L(STD1, [SatakeParam((1,), int(p)) for p in ps], 2)
    assert "tail bound" in caplog.text
    bound = euler_tail_bound(STD1, 100, 2)
    zeta2 = float(mpmath.zeta(2))
    assert bound < 1e-2
    assert abs(zeta2 / float(val) - 1) <= bound


def test_primes():
    assert primes_up_to(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert len(primes_up_to(100)) == 25


def test_partial_L_monotone_for_positive_params():
    ps = [int(p) for p in primes_up_to(60)]
    vals = [abs(complex(partial_L(SYM2, [SatakeParam((Fraction(1, 2), Fraction(3, 4)), p) for p in ps[:m]], 2)))
            for m in range(1, len(ps) + 1)]
    assert all(np.diff(np.log(vals)) > 0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.fractions(-3, 3, max_denominator=5).filter(lambda x: x != 0), min_size=1, max_size=4),
       st.integers(0, 6))
def test_newton_bruteforce_property(mu, k):
    assert complete_homogeneous(mu, k)[k] == h_bruteforce(mu, k)


@settings(max_examples=30, deadline=None)
@given(st.permutations([Fraction(1, 3), Fraction(-2), Fraction(5, 7)]), st.integers(0, 6))
def test_symmetric_in_eigenvalues(mu, k):
    assert h_bruteforce(list(mu), k) == h_bruteforce([Fraction(1, 3), Fraction(-2), Fraction(5, 7)], k)


def test_gl3_orbit_canonical():
    G3 = RootDatum.gl(3)
    rep = RepData.standard(3)
    t = (Fraction(2), Fraction(1, 3), Fraction(-5))
    vals = {local_L(rep, SatakeParam(p, 11), 2, G3) for p in itertools.permutations(t)}
    assert len(vals) == 1
