import numpy as np
import pytest
from conftest import F_GL1, F_GL2

from bksph.bktransform import (PipelineConfig, bk_transform, cauchy_riemann_residual, chain_identity, gj_oracle,
                               gl1_fourier, trace_spectral, verify_lfe)
from bksph.errors import ConfigInvalid, SlowModeDisabled, TubeViolation, WDefectTooLarge
from bksph.spherical import GL1, RadialProfile, SmoothBiKFunction, gl1_bump, spherical_transform
from bksph.archchar import TRIVIAL
from bksph.torustf import Profile, tate_zeta


def test_s0_criterion():
    assert PipelineConfig.standard_gl(2, s0=0.75).s0_margin() == pytest.approx(0.25)
    assert PipelineConfig.sym2(s0=1.25).s0_margin() == pytest.approx(0.25)
    with pytest.raises(ConfigInvalid):
        PipelineConfig.standard_gl(2, s0=0.4).check()
    with pytest.raises(ConfigInvalid):
        PipelineConfig.sym2(s0=0.9).check()


def test_trace_spectral_examples(gl1_result):
    cfg = gl1_result.cfg
    nu = np.array([0.7j])
    assert trace_spectral(F_GL1, nu, 0, cfg) == spherical_transform(F_GL1, -nu)
    assert trace_spectral(F_GL1.scaled(0.0), nu, 0.3, cfg) == 0
    # GL_1: the spherical transform is the one-sided Mellin transform, i.e. half the Tate integral
    a = F_GL1.profiles[0]
    lo, hi = a.c_support
    prof = Profile(lambda x: a(np.log(np.maximum(x, 1e-300))), (np.exp(lo), np.exp(hi)))
    for s in (0.3 + 2j, 0.8 - 5j):
        assert abs(trace_spectral(F_GL1, [0.0], s, cfg) - tate_zeta(prof, TRIVIAL, s) / 2) < 1e-8
    with pytest.raises(ValueError):
        trace_spectral(F_GL1, nu, 0.3)


def test_trace_on_result_needs_tube(gl2_result):
    with pytest.raises(TubeViolation):
        trace_spectral(gl2_result, np.zeros(2), -0.2)  # the torus point has real part s < 0


def test_linearity():
    cfg = PipelineConfig.standard_gl(1, s0=0.75)
    a, b = gl1_bump(0.0, 1.5, 4.0), gl1_bump(0.3, 1.0, 4.0)
    both = SmoothBiKFunction.single(RadialProfile(GL1, lambda c: a(c) + 2 * b(c), (-1.5, 1.5), 0.0))
    r1, r2 = (bk_transform(SmoothBiKFunction.single(p), cfg) for p in (a, b))
    r12 = bk_transform(both, cfg)
    lam = 1j * np.linspace(-20, 20, 9)[:, None]
    np.testing.assert_allclose(r12.H(lam), r1.H(lam) + 2 * r2.H(lam), atol=1e-8 * np.max(np.abs(r12.H(lam))))
    c = np.linspace(-1, 1, 7)
    np.testing.assert_allclose(r12.transform_at(c), r1.transform_at(c) + 2 * r2.transform_at(c), atol=1e-8)


def test_zero_function_gives_zero():
    cfg = PipelineConfig.standard_gl(2, s0=0.75)
    res = bk_transform(F_GL2.scaled(0.0), cfg)
    rep = verify_lfe(F_GL2.scaled(0.0), [[0.5j, -0.5j]], [0.25, 0.25 + 2j], cfg, res)
    for row in rep.rows:
        assert row["lhs"] == 0 and row["rhs"] == 0


def test_gl1_lfe_is_tate(gl1_result):
    ss = 0.25 + 1j * np.linspace(-6, 6, 7)
    rep = verify_lfe(F_GL1, [[0.0], [1.5j]], ss, gl1_result.cfg, gl1_result)
    assert rep.max_rel < 1e-6


def test_gl1_gj_scaling(gl1_result):
    x = np.linspace(0.1, 2.0, 9)
    res3 = bk_transform(F_GL1.scaled(3.0), gl1_result.cfg)
    np.testing.assert_allclose(res3.transform_at(np.log(x)), 3 * gl1_result.transform_at(np.log(x)), rtol=1e-9)
    np.testing.assert_allclose(gl1_fourier(F_GL1.scaled(3.0), x), 3 * gl1_fourier(F_GL1, x), rtol=1e-12)


def test_gl2_gj_needs_slow(gl2_result):
    with pytest.raises(SlowModeDisabled):
        gj_oracle(F_GL2, gl2_result.cfg, result=gl2_result)
    with pytest.raises(ConfigInvalid):
        gj_oracle(F_GL2, PipelineConfig.sym2())


def test_w_defect_guard():
    with pytest.raises(WDefectTooLarge):
        bk_transform(F_GL2, PipelineConfig.standard_gl(2, s0=0.75, w_tol=1e-300))


@pytest.mark.parametrize("which", ["gl2_result", "sym2_result"])
def test_chain_identity_and_holomorphy(which, request):
    res = request.getfixturevalue(which)
    nus = np.array([[0.3j, -0.3j], [1j, 0.4j], [2j, -2j]])
    assert chain_identity(res, nus, 0.25 + 1j) < 1e-4
    for lam in ([0.1 + 1j, -0.05 - 1j], [0.2 + 3j, 0.1 + 0.5j]):
        coarse, fine = (cauchy_riemann_residual(res, np.array(lam), h) for h in (1e-3, 1e-4))
        # a holomorphic H leaves only the O(h^2) truncation of the difference quotients
        assert fine < 1e-5 and 50 < coarse / fine < 200


@pytest.mark.parametrize("which", ["gl2_result", "sym2_result"])
def test_two_vertical_lines(which, request):
    # the functional equation holds on more than one line (continuation consistency)
    res = request.getfixturevalue(which)
    nus = [[0.5j, -0.5j]]
    for re in (1 - res.cfg.s0, 0.6):
        rep = verify_lfe(res.f, nus, re + 1j * np.array([-3.0, 0.0, 3.0]), res.cfg, res)
        assert rep.max_rel < 1e-3


def test_spectral_conjugation_symmetry(gl2_result):
    lam = np.array([[0.4j, -1.3j], [2j, 1j]])
    # h is real, so H(conj lam) = conj H(lam)
    np.testing.assert_allclose(gl2_result.H(np.conj(lam)), np.conj(gl2_result.H(lam)), rtol=1e-10)
