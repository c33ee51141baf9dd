"""Twin-Fock states versus the two witnesses, then the cold-cloud occupancy estimate."""
# %%
from squeezedepth import certify_depth, duan_min_k, solve_mu
from squeezedepth.symsim import exact_moments, twin_fock
from squeezedepth.thermal import TrapSpec

# %% [markdown]
# Twin-Fock states have zero mean spin, so the variance-versus-polarization
# witness sees nothing.  The Duan bound, built on <J_x^2 + J_y^2>, flags
# the full depth.

# %%
for n in (4, 10, 50):
    m = exact_moments(twin_fock(n))
    cert = certify_depth(m, k_max=min(n, 6))
    print(f"N={n}: Duan depth {duan_min_k(m).depth_claim}; certifier: {cert.warnings[0][:50]}...")

# %% [markdown]
# In a thermal cloud of 5e5 atoms at 30 uK in a (2, 1000, 1000) Hz trap,
# even the ground level is almost never doubly occupied.

# %%
rep = solve_mu(TrapSpec(omega_z=2, omega_perp=1000, temperature=30e-6, n_total=5e5))
print(f"beta mu = {rep.beta_mu:.4f}, <n_0> = {rep.ground_occupation:.3e}, "
      f"distinguishable: {rep.distinguishable}")
