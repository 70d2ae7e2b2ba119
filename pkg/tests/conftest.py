"""Shared pipeline runs.  Each transform is computed once per session."""
import time

import pytest

from bksph.bktransform import PipelineConfig, bk_transform
from bksph.spherical import SmoothBiKFunction, gl1_bump, gl2_bump

# Test functions.  Sharp bumps (a > 0) keep the torus Mellin transforms
# decaying fast enough to be seen within |Im| <= 50; see the decay tests.
F_GL1 = SmoothBiKFunction.single(gl1_bump(0.0, 1.5, sharpness=4.0))
F_GL2 = SmoothBiKFunction.single(gl2_bump(0.0, 0.6, 1.2, sharpness=4.0))
F_GL2_WIDE = SmoothBiKFunction.single(gl2_bump(0.0, 1.2, 1.2, sharpness=8.0))


def _timed(f, cfg):
    t = time.time()
    res = bk_transform(f, cfg)
    res.diagnostics["wall"] = time.time() - t
    return res


@pytest.fixture(scope="session")
def gl1_result():
    return _timed(F_GL1, PipelineConfig.standard_gl(1, s0=0.75))


@pytest.fixture(scope="session")
def gl2_result():
    return _timed(F_GL2, PipelineConfig.standard_gl(2, s0=0.75))


@pytest.fixture(scope="session")
def sym2_result():
    return _timed(F_GL2, PipelineConfig.sym2(s0=1.25))


@pytest.fixture(scope="session")
def gl2_wide_result():
    return _timed(F_GL2_WIDE, PipelineConfig.standard_gl(2, s0=0.75))


@pytest.fixture(scope="session")
def sym2_wide_result():
    return _timed(F_GL2_WIDE, PipelineConfig.sym2(s0=1.25))


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
