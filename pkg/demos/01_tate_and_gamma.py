# %% [markdown]
# # Tate integrals on R^x and the gamma factor
#
# The one-dimensional case fixes every convention used later: the additive
# character psi(x) = exp(2 pi i x), self-dual Lebesgue measure, and the
# multiplicative measure dx/|x|.

# %%
import numpy as np

from bksph.archchar import SGN, TRIVIAL, gamma_R, gamma_quasicharacter
from bksph.torustf import Profile, fourier_profile, tate_zeta

s = np.array([0.3 + 2j, 0.5, 0.8 - 6j])

# %% [markdown]
# The Gaussian is its own Fourier transform, and its zeta integral is Gamma_R(s).

# %%
g = Profile.gaussian()
print(np.abs(tate_zeta(g, TRIVIAL, s) - gamma_R(s)))

# %% [markdown]
# For a bump supported away from 0 the zeta integral is entire, while the
# Fourier transform of the bump is not compactly supported.  The ratio of the
# two sides is the gamma factor, independent of the function.

# %%
for f in (Profile.bump(1.0, 0.5), Profile.bump(0.0, 1.5)):
    ratio = tate_zeta(fourier_profile(f), TRIVIAL, 1 - s) / tate_zeta(f, TRIVIAL, s)
    print(f.name, np.abs(ratio / gamma_quasicharacter(TRIVIAL, s) - 1))

# %% [markdown]
# With eta = sgn only odd functions see anything; the epsilon factor comes out as +i.

# %%
f = Profile.odd_gaussian()
ratio = tate_zeta(fourier_profile(f), SGN, 1 - s) / tate_zeta(f, SGN, s)
print(ratio / (gamma_R(2 - s) / gamma_R(1 + s)))
