import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bksph import quadrature as quad
from bksph.errors import SingularMatrix, SlowDecay
from bksph.spherical import (GroupModel, PlancherelData, SmoothBiKFunction, SpectralFunction, SpectralGrid,
                             c_function, calibrate_measures, cartan, cartan_coordinates, constant_term,
                             constant_term_support, gl1_bump, gl1_self_convolution, gl2_bump, inverse_spherical,
                             iwasawa, iwasawa_H, phi0, phi_lambda, phi_lambda_cartan, plancherel_density,
                             spherical_transform, torus_mellin, transform_as_spectral)

G1, G2 = GroupModel.gl1(), GroupModel.gl2()


def _rot(t):
    return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])


def test_iwasawa_examples():
    np.testing.assert_allclose(iwasawa_H(_rot(0.7)), [0, 0], atol=1e-15)
    np.testing.assert_allclose(iwasawa_H(np.diag([2.0, -3.0])), np.log([2.0, 3.0]), atol=1e-15)
    np.testing.assert_allclose(iwasawa_H(np.array([[1.0, 5.0], [0.0, 1.0]])), [0, 0], atol=1e-15)
    with pytest.raises(SingularMatrix):
        iwasawa_H(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_decomposition_reassembly():
    g = np.random.default_rng(0).normal(size=(1000, 2, 2))
    k, t, n = iwasawa(g)
    assert np.max(np.abs(k @ (t[..., :, None] * n) - g)) <= 1e-12 * np.max(np.abs(g))
    np.testing.assert_allclose(k @ np.swapaxes(k, -1, -2), np.broadcast_to(np.eye(2), g.shape), atol=1e-13)
    assert np.all(t > 0) and np.allclose(n[..., 1, 0], 0) and np.allclose(np.diagonal(n, 0, -2, -1), 1)
    u, s, vt = cartan(g)
    assert np.max(np.abs((u * s[..., None, :]) @ vt - g)) <= 1e-12 * np.max(np.abs(g))
    assert np.all(s[..., 0] >= s[..., 1]) and np.all(s > 0)


def test_phi_lambda_at_identity_and_gl1():
    for lam in ([0.3 + 2j, -0.1 - 1j], [0, 0], [1.5, -0.5]):
        assert abs(phi_lambda(G2, lam, np.eye(2)) - 1) < 1e-13
    x = -2.3
    lam = 0.4 + 1.7j
    assert abs(phi_lambda(G1, [lam], np.array([[x]])) - abs(x) ** lam) < 1e-13


def test_phi0_against_legendre():
    # P_{-1/2 + nu}(cosh r), with mpmath's Legendre function as the oracle
    nus = np.array([0.0, 0.3, 2.5j, 0.2 + 7j])
    rs = np.array([0.1, 0.8, 2.0, 4.0])
    got = phi0(nus, rs)
    for i, nu in enumerate(nus):
        for j, r in enumerate(rs):
            ref = complex(mpmath.legenp(-0.5 + complex(nu), 0, mpmath.cosh(r), type=3))
            assert abs(got[i, j] - ref) <= 1e-10 * max(1.0, abs(ref))


def test_phi_lambda_routes_agree():
    # K-integral definition vs the Cartan closed form
    rng = np.random.default_rng(5)
    for _ in range(5):
        g = rng.normal(size=(2, 2))
        lam = rng.normal(size=2) + 1j * rng.normal(scale=3, size=2)
        c, r = cartan_coordinates(g)
        assert abs(phi_lambda(G2, lam, g) - phi_lambda_cartan(lam, c, r)[0]) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-4, 4), st.floats(-4, 4), st.integers(0, 2**31))
def test_phi_lambda_weyl_and_inverse(a, b, y1, y2, seed):
    g = np.random.default_rng(seed).normal(size=(2, 2))
    if abs(np.linalg.det(g)) < 1e-3:
        return
    lam = np.array([a + 1j * y1, b + 1j * y2])
    base = phi_lambda(G2, lam, g)
    tol = 1e-8 * max(1.0, abs(base))
    assert abs(phi_lambda(G2, lam[::-1], g) - base) < tol
    # for GL_2 the central part flips under g -> g^{-1}
    assert abs(phi_lambda(G2, -lam, np.linalg.inv(g)) - base) < tol


def test_spherical_transform_linear_and_conjugate():
    f1 = SmoothBiKFunction.single(gl2_bump(0.0, 1.0, 1.5))
    f2 = SmoothBiKFunction.single(gl2_bump(0.2, 0.5, 1.0))
    both = SmoothBiKFunction.single(
        type(f1.profiles[0])("GL2", lambda c, r: 2 * f1.profiles[0](c, r) - 3 * f2.profiles[0](c, r), (-1.0, 1.0),
                             1.5))
    lam = np.array([[0.1 + 2j, -0.3 + 1j], [1j, -1j], [0.5, 0.2]])
    # the sum is integrated on its own (wider) node set
    np.testing.assert_allclose(spherical_transform(both, lam),
                               2 * spherical_transform(f1, lam) - 3 * spherical_transform(f2, lam), rtol=1e-9)
    np.testing.assert_allclose(spherical_transform(f1, -np.conj(lam)), np.conj(spherical_transform(f1, lam)),
                               rtol=1e-12)


def test_spherical_transform_against_group_integral():
    # Cartan closed form vs integrating f * phi_{-lam} with the K-integral phi
    f = SmoothBiKFunction.single(gl2_bump(0.1, 0.5, 1.0))
    lam = np.array([0.2 + 1.5j, -0.4 + 0.5j])
    c, wc = quad.gauss_panels(-0.4, 0.6, 0.1, 12)
    r, wr = quad.gauss_panels(0.0, 1.0, 0.1, 12)
    total = 0j
    for ci, wi in zip(c, wc):
        for rj, wj in zip(r, wr):
            g = np.diag([np.exp(ci + rj / 2), np.exp(ci - rj / 2)])
            total += wi * wj * 2 * np.pi * np.sinh(rj) * f.at_matrix(g) * phi_lambda(G2, -lam, g)
    assert abs(total - spherical_transform(f, lam)) < 1e-8 * abs(total)


def test_constant_term_examples():
    f = SmoothBiKFunction.single(gl2_bump(0.0, 0.5, 1.0))
    lo, hi = constant_term_support(f)
    assert constant_term(f, hi + 0.01) == 0.0
    assert constant_term(f, [3.0, -3.0]) == 0.0
    g = SmoothBiKFunction.single(gl1_bump(0.3, 0.8))
    c = np.linspace(-1, 1.5, 11)[:, None]
    np.testing.assert_array_equal(constant_term(g, c), g.on_a(c))
    # W-invariant function on a
    H = np.random.default_rng(2).uniform(-1, 1, (20, 2))
    np.testing.assert_allclose(constant_term(f, H), constant_term(f, H[:, ::-1]), atol=1e-15)


def test_descent_two_routes():
    f = SmoothBiKFunction.single(gl2_bump(0.0, 0.8, 1.5))
    lam = np.array([[0.3j, -1.1j], [2j, 0.5j], [0.25 + 1j, 0.25 - 1j]])
    sph = spherical_transform(f, -lam)
    mel = torus_mellin(lambda H: constant_term(f, H), constant_term_support(f), lam)
    assert np.max(np.abs(sph - mel) / np.abs(sph)) < 1e-8


def test_gl1_positive_definite():
    f = SmoothBiKFunction.single(gl1_self_convolution(gl1_bump(0.2, 0.7)))
    y = np.linspace(-30, 30, 61)
    vals = spherical_transform(f, 1j * y[:, None])
    assert np.max(np.abs(vals.imag)) < 1e-12 * np.max(np.abs(vals))
    assert np.all(vals.real >= -1e-13 * np.max(np.abs(vals)))


def test_c_function_density():
    tau = np.linspace(0.01, 20, 50)
    np.testing.assert_allclose(np.abs(c_function(1j * tau)) ** -2, plancherel_density(tau), rtol=1e-10)
    assert np.all(plancherel_density(np.linspace(-5, 5, 41)) >= 0)
    np.testing.assert_array_equal(plancherel_density(-tau), plancherel_density(tau))


def test_inverse_of_zero():
    H = SpectralFunction(lambda lam: np.zeros(len(lam), dtype=complex), 2)
    h = inverse_spherical(H, G2, SpectralGrid(zeta_max=10, tau_max=10))
    assert np.all(h(np.array([0.0, 0.5]), np.array([0.3, 1.0])) == 0)


def test_inverse_slow_decay_detected():
    f = SmoothBiKFunction.single(gl1_bump(0.0, 1.0))
    with pytest.raises(SlowDecay):
        inverse_spherical(transform_as_spectral(f), G1, SpectralGrid(y_max=5.0, tail_tol=1e-6))


def test_gl1_inversion_matches_function():
    f = SmoothBiKFunction.single(gl1_bump(0.0, 1.0, sharpness=4.0))
    h = inverse_spherical(transform_as_spectral(f), G1, SpectralGrid(dy=0.1, y_max=150.0, tail_tol=1e-6))
    c = np.linspace(-1.2, 1.2, 49)
    assert np.max(np.abs(h(c) - f.on_a(c[:, None]))) < 1e-6


def test_calibration():
    cal = calibrate_measures(G1)
    assert cal["GL1"].constant == 1.0
    cal = calibrate_measures(G2)["GL2"]
    assert cal.spread < 1e-6
    assert abs(cal.constant - 2 * np.pi) < 1e-6
    p = gl2_bump(0.0, 1.0, 1.5)
    c3 = calibrate_measures(G2, [p, p.scaled(3.0)])["GL2"]
    assert abs(c3.constants[0] - c3.constants[1]) < 1e-10


def test_plancherel_constants():
    assert PlancherelData.analytic(G1).constant == pytest.approx(1 / (2 * np.pi))
    assert PlancherelData.analytic(G2).constant == pytest.approx(1 / (4 * np.pi**3))
    with pytest.raises(NotImplementedError):
        PlancherelData.analytic(GroupModel(("GL1", "GL2")))
