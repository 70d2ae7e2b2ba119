import functools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bksph import quadrature as quad
from bksph.archchar import SGN, TRIVIAL, gamma_R
from bksph.errors import DomainViolation
from bksph.rootdata import RepData, RootDatum, build_augmentation
from bksph.spherical import SmoothBiKFunction, constant_term, constant_term_support, gl2_bump
from bksph.torustf import (BUMP_MASS, BumpSpec, Profile, TorusFunction, bump, fourier_profile, fourier_tn, lift,
                           pushforward, sharp_bump, tate_zeta)

GL2 = RootDatum.gl(2)


def _gauss_mellin_tanh_sinh(z):
    # independent route: tanh-sinh on (0, 1] and [1, 8] in x (not in log x)
    out = 0j
    for a, b in ((0.0, 1.0), (1.0, 8.0)):
        x, w = quad.tanh_sinh(a, b)
        out += np.sum(w * np.exp(-np.pi * x**2) * x ** (z - 1))
    return out


def test_bump_mass():
    x, w = quad.tanh_sinh(-1.0, 1.0)
    assert abs(np.sum(w * bump(x)) - BUMP_MASS) < 1e-13
    assert sharp_bump(np.array([0.0, 1.0, -2.0]), 4.0).tolist() == [1.0, 0.0, 0.0]


def test_gaussian_mellin_is_half_gamma_R():
    g = Profile.gaussian().as_factor()
    z = np.array([0.3, 1.0, 2.5 + 3j, 0.7 - 8j])
    got = g.mellin(z)[:, 0]
    np.testing.assert_allclose(got, gamma_R(z) / 2, rtol=1e-10)
    for zi, gi in zip(z[:3], got[:3]):  # x^{iy} oscillates without bound near 0; keep |Im z| small
        assert abs(_gauss_mellin_tanh_sinh(zi) - gi) < 1e-8 * abs(gi)


def test_gaussian_self_dual():
    fh = fourier_profile(Profile.gaussian())
    t = np.linspace(0, 2.5, 11)
    np.testing.assert_allclose(Profile.gaussian().as_factor().fourier_at(t)[:, 0], np.exp(-np.pi * t**2),
                               atol=1e-13)
    x = np.linspace(0, 2.5, 7)
    np.testing.assert_allclose(fh.fourier_at(x)[:, 0].real, np.exp(-np.pi * x**2), atol=1e-9)


def test_fourier_at_zero_is_integral():
    p = Profile.bump(1.0, 0.5)
    x, w = quad.gauss_panels(0.5, 1.5, 0.05, 20)
    assert abs(p.as_factor().fourier_at([0.0])[0, 0] - 2 * np.sum(w * p(x))) < 1e-13


@pytest.mark.parametrize("prof", [Profile.bump(1.0, 0.5), Profile.bump(0.0, 1.5), Profile.odd_bump(1.0)])
def test_fourier_involution(prof):
    fh = fourier_profile(prof)
    x = np.linspace(0.05, 1.9, 15)
    back = fh.fourier_at(x)[:, 0]
    # the transform applied twice is f(-x) = parity * f(x)
    np.testing.assert_allclose(back, prof.parity * prof(x), atol=1e-8)


def test_mellin_scaling_and_linearity():
    p = Profile.bump(1.0, 0.5)
    c = 1.7
    scaled = Profile(lambda x: p.fn(c * x), (0.5 / c, 1.5 / c), 1).as_factor()
    z = np.array([0.4 + 2j, -1.0 + 5j, 3.0])
    np.testing.assert_allclose(scaled.mellin(z)[:, 0], c ** (-z) * p.as_factor().mellin(z)[:, 0], rtol=1e-11)
    two = Profile(lambda x: 2 * p.fn(x) + bump((x - 1.2) / 0.3), (0.5, 1.5), 1).as_factor()
    q = Profile.bump(1.2, 0.3).as_factor()
    np.testing.assert_allclose(two.mellin(z)[:, 0], 2 * p.as_factor().mellin(z)[:, 0] + q.mellin(z)[:, 0],
                               rtol=1e-12)


def test_tate_zeta_examples():
    s = np.array([0.2 + 1j, 0.8 - 4j, 1.5])
    b = Profile.bump(1.5, 0.5)
    np.testing.assert_allclose(tate_zeta(b, TRIVIAL, s), 2 * b.as_factor().mellin(s)[:, 0], rtol=1e-14)
    np.testing.assert_allclose(tate_zeta(Profile.gaussian(), TRIVIAL, s), gamma_R(s), rtol=1e-10)
    assert np.all(tate_zeta(b, SGN, s) == 0)  # parity mismatch


def test_tate_domain():
    with pytest.raises(DomainViolation):
        tate_zeta(Profile.gaussian(), TRIVIAL, -0.5)
    # supported away from 0: entire
    assert np.isfinite(tate_zeta(Profile.bump(1.5, 0.5), TRIVIAL, -3.0))


def test_tate_fe_sgn_gaussian():
    f = Profile.odd_gaussian()
    fh = fourier_profile(f)
    s = np.array([0.25 + 3j, 0.6 - 7j])
    # x e^{-pi x^2} is an eigenfunction: f^ = i f
    np.testing.assert_allclose(tate_zeta(fh, SGN, 1 - s) / tate_zeta(f, SGN, s),
                               1j * gamma_R(2 - s) / gamma_R(1 + s), rtol=1e-8)


def _sym2_lift(**kw):
    f = SmoothBiKFunction.single(gl2_bump(0.0, 0.6, 1.2, sharpness=4.0))
    am = build_augmentation(GL2, RepData.sym2_gl2())
    fB = lambda H: constant_term(f, H)  # noqa: E731
    return f, am, fB, lift(fB, constant_term_support(f), am, BumpSpec(**kw))


def test_lift_identity_for_standard():
    f = SmoothBiKFunction.single(gl2_bump(0.0, 0.6, 1.2))
    am = build_augmentation(GL2, RepData.standard(2))
    phi = lift(lambda H: constant_term(f, H), constant_term_support(f), am)
    H = np.random.default_rng(3).uniform(-1.2, 1.2, (30, 2))
    np.testing.assert_allclose(phi.exact(H), constant_term(f, H), atol=1e-15)
    assert phi.diagnostics["kernel_dim"] == 0
    # Chebyshev convergence on bumps is sub-exponential; the sharp profile converges much faster
    assert phi.diagnostics["interpolation_error"] < 1e-3
    f = SmoothBiKFunction.single(gl2_bump(0.0, 0.6, 1.2, sharpness=4.0))
    phi = lift(lambda H: constant_term(f, H), constant_term_support(f), am)
    assert phi.diagnostics["interpolation_error"] < 1e-5


def test_lift_pushforward_sym2():
    f, am, fB, phi = _sym2_lift()
    H = np.random.default_rng(11).uniform(-1.0, 1.0, (20, 2))
    ref = fB(H)
    assert np.max(np.abs(pushforward(phi, am, H) - ref)) <= 1e-6 * np.max(np.abs(ref))
    # the separated representation carries a measured interpolation error
    sep = pushforward(phi, am, H, separated=True)
    assert np.max(np.abs(sep - ref)) <= 10 * phi.diagnostics["interpolation_error"] * np.max(np.abs(ref)) + 1e-12


def test_lift_of_zero():
    am = build_augmentation(GL2, RepData.sym2_gl2())
    phi = lift(lambda H: np.zeros(len(H)), (np.array([-1.0, -1.0]), np.array([1.0, 1.0])), am)
    assert np.all(phi.core == 0)
    assert phi.mellin(np.array([0.3, 0.2 + 1j, 0.1])) == 0


def test_fourier_stage_domain():
    f = SmoothBiKFunction.single(gl2_bump(0.0, 0.6, 1.2, sharpness=4.0))
    am = build_augmentation(GL2, RepData.standard(2))
    phi = lift(lambda H: constant_term(f, H), constant_term_support(f), am)
    ph = fourier_tn(phi, tol=1e-9)
    assert ph.stage == "fourier"
    with pytest.raises(DomainViolation):
        ph.mellin(np.array([-0.1, 0.5]))
    # Phi^ at t = 0 is the integral of Phi over R^2 (both signs of each coordinate)
    x = np.linspace(-1.3, 1.3, 261)
    X = np.stack(np.meshgrid(x, x, indexing="ij"), -1).reshape(-1, 2)
    w = np.full(x.size, x[1] - x[0])
    integral = 4 * np.sum(phi.exact(X) * np.exp(X.sum(axis=1)) * np.outer(w, w).ravel())
    vals = [fac.taylor[0] for fac in ph.factors]
    at0 = np.einsum("ab,a,b->", ph.core, vals[0], vals[1])
    assert abs(at0 - integral) < 1e-6 * abs(integral)


@functools.lru_cache(maxsize=1)
def _std_lift():
    f = SmoothBiKFunction.single(gl2_bump(0.0, 0.6, 1.2, sharpness=4.0))
    am = build_augmentation(GL2, RepData.standard(2))
    return lift(lambda H: constant_term(f, H), constant_term_support(f), am)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(0.2, 2.0), st.floats(-30, 30), st.floats(-30, 30))
def test_mellin_conjugation_symmetry(r1, r2, y1, y2):
    phi = _std_lift()
    lam = np.array([r1 + 1j * y1, r2 + 1j * y2])
    a, b = phi.mellin(lam), phi.mellin(np.conj(lam))
    assert abs(a - np.conj(b)) <= 1e-12 * max(abs(a), 1e-300)


def test_torus_function_requires_compact_stage_for_evaluation():
    tf = TorusFunction([Profile.bump(1.0, 0.5).as_factor()], np.ones(1), 0, stage="fourier")
    with pytest.raises(ValueError):
        tf.evaluate_log(np.zeros((1, 1)))
