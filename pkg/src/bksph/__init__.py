"""Spectral construction of r-twisted Fourier transforms for spherical functions
on GL_1(R) and GL_2(R), with the numerical checks that go with it."""
from . import archchar, bktransform, config, errors, quadrature, rootdata, satake, spherical, torustf
from .archchar import RealQuasicharacter, epsilon_factor, gamma_quasicharacter, gamma_rep, local_L
from .bktransform import (BKResult, PipelineConfig, bk_transform, chain_identity, gj_oracle, trace_spectral,
                          verify_lfe)
from .errors import *  # noqa: F401,F403
from .rootdata import AugmentedMap, RepData, RootDatum, TubeSpec, build_augmentation, validate
from .satake import SatakeParam, partial_L, sym_trace
from .spherical import (GroupModel, SmoothBiKFunction, SpectralGrid, constant_term, gl1_bump, gl2_bump,
                        inverse_spherical, spherical_transform)
from .torustf import Profile, fourier_tn, lift, mellin, tate_zeta

__version__ = "0.1.0"
