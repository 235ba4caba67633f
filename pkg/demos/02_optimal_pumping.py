# %% [markdown]
# # Optimal repumping and the optical-depth scaling
#
# With the coupling expressed through the optical depth alpha and the ratio
# beta of pumping to spontaneous scattering, the zero-frequency variance
# has an interior minimum over beta once alpha * tau^2 > 2. The optimum
# approaches 4 / (alpha tau^2) for deep ensembles.

# %%
import numpy as np

from faraday_squeezing import mean_spin_fraction, optimize_beta, v_opt, vx_zero
from faraday_squeezing.closed_forms import to_decibel

# %%
for at in np.geomspace(3, 1000, 12):
    exact = v_opt(at)
    num = optimize_beta(at)
    print(f"alpha tau^2 = {at:8.2f}  beta* = {exact.beta_star:7.4f}  "
          f"V_opt = {exact.v_opt:.6f} ({exact.v_opt_db:5.2f} dB)  "
          f"V_opt alpha tau^2 / 4 = {exact.v_opt * at / 4:.4f}  "
          f"golden-section diff = {abs(num.v_opt / exact.v_opt - 1):.1e}")

# %% [markdown]
# A realistic optical depth of 100 with a lossless return path gives
# roughly 11 dB. At the optimum about half of the atoms remain in the
# polarized state.

# %%
best = v_opt(100.0)
print(f"{best.v_opt_db:.2f} dB at beta = {best.beta_star:.4f}")
print("mean spin fraction:", best.beta_star / (1 + best.beta_star))

# %% [markdown]
# Away from the optimum the variance rises on both sides.

# %%
for beta in (0.25, 0.5, best.beta_star, 2.0, 4.0):
    print(f"beta = {beta:6.3f}  V = {vx_zero(100.0, beta):.5f}  "
          f"({to_decibel(vx_zero(100.0, beta)):.2f} dB)")
