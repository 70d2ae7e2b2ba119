# %% [markdown]
# # Spherical transform on GL_2(R) and descent to the torus
#
# A bi-K-invariant function is determined by its Cartan coordinates
# (c, r): c the central log-scale, r the log-ratio of singular values.

# %%
import numpy as np

from bksph.spherical import (GroupModel, SmoothBiKFunction, SpectralGrid, constant_term, constant_term_support,
                             gl2_bump, inverse_spherical, phi0, spherical_transform, torus_mellin,
                             transform_as_spectral)

p = gl2_bump(0.0, 0.6, 1.2, sharpness=4.0)
f = SmoothBiKFunction.single(p)

# %% [markdown]
# phi_0 is the Legendre function P_{-1/2}(cosh r); it decays like r exp(-r/2).

# %%
r = np.array([0.0, 1.0, 3.0, 6.0])
print(phi0([0.0], r)[0].real)

# %% [markdown]
# Two routes to the same numbers: integrate f against phi_{-lambda}, or take
# the constant term along the Borel and Mellin-transform it on the torus.

# %%
lam = 1j * np.array([[0.0, 0.3], [1.0, -1.0], [2.5, 0.4]])
a = spherical_transform(f, -lam)
b = torus_mellin(lambda H: constant_term(f, H), constant_term_support(f), lam)
print(np.abs(a - b) / np.abs(a))

# %% [markdown]
# Plancherel inversion with density pi tau tanh(pi tau) recovers f.  About 15 s.

# %%
h = inverse_spherical(transform_as_spectral(f), GroupModel.gl2(), SpectralGrid())
c, rr = np.meshgrid(np.linspace(-0.5, 0.5, 5), np.linspace(0, 1.0, 5), indexing="ij")
print(np.max(np.abs(h(c.ravel(), rr.ravel()) - p(c.ravel(), rr.ravel()))), h.diagnostics["tail"])
