"""Symmetrizing a separable two-qubit state can make it look squeezed.

psi_alpha = sqrt(alpha)|11> + sqrt(1 - alpha)|01> is a product state, so its
squeezing parameter never drops below 1.  After projecting onto the
symmetric subspace it becomes psi_beta with beta = 2 alpha / (1 + alpha),
which dips to 7/8.
"""
# %%
import numpy as np

from squeezedepth.symsim import beta_of_alpha, psi_alpha, symmetrize, xi2_state

# %%
alphas = np.linspace(0.1, 1.0, 10)
print("alpha  beta    xi2(product)  xi2(symmetrized)")
for a in alphas:
    before = xi2_state(psi_alpha(a))
    after = xi2_state(symmetrize(psi_alpha(a)))
    print(f"{a:<6.2f} {beta_of_alpha(a):<7.4f} {before:<13.6f} {after:.6f}")

# %% [markdown]
# The minimum sits at alpha = 2/3, i.e. beta = 4/5.

# %%
print("xi^2 at alpha = 2/3:", xi2_state(symmetrize(psi_alpha(2 / 3))))
