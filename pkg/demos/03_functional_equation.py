# %% [markdown]
# # The r-twisted transform on GL_2 and its functional equation
#
# Pipeline: constant term on the torus, lift along the augmented
# representation map, partial Fourier transform on the dual torus, torus
# Mellin transform.  The result is a spectral function H; h is its inverse
# spherical transform and F(f) = h omega_{-s0}.

# %%
import numpy as np

from bksph.bktransform import PipelineConfig, bk_transform, gj_oracle, verify_lfe
from bksph.spherical import SmoothBiKFunction, gl2_bump

f = SmoothBiKFunction.single(gl2_bump(0.0, 0.6, 1.2, sharpness=4.0))

# %% [markdown]
# Standard representation.  H is never symmetrized, yet it comes out W-invariant.

# %%
std = bk_transform(f, PipelineConfig.standard_gl(2, s0=0.75))
print("W-defect", std.diagnostics["w_defect"])
nus = [[1j * t, -1j * t] for t in (0.0, 0.5, 1.0)]
ss = 0.25 + 1j * np.array([-4.0, 0.0, 4.0])
print("LFE", verify_lfe(f, nus, ss, std.cfg, std).max_rel)

# %% [markdown]
# For the standard representation F(f) is the Godement-Jacquet transform,
# a Fourier transform on 2x2 matrices.  Checking three points takes a few seconds.

# %%
print("GJ", gj_oracle(f, std.cfg, result=std, slow=True).max_rel)

# %% [markdown]
# Sym^2 lives on a three-dimensional dual torus with a one-dimensional
# kernel for the lift.  s0 = 1.25 keeps the shifted tube inside the Mellin region.

# %%
sym = bk_transform(f, PipelineConfig.sym2(s0=1.25))
print("W-defect", sym.diagnostics["w_defect"])
print("LFE", verify_lfe(f, nus[:2], -0.25 + 1j * np.array([-4.0, 0.0, 4.0]), sym.cfg, sym).max_rel)
