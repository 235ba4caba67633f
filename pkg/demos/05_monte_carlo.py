# %% [markdown]
# # Stochastic trajectories
#
# The Langevin equations are integrated with Euler-Maruyama, with each
# vacuum input drawn as white noise of spectral density 1/2. Averaged
# periodograms of the output and ensembles of pulse modes reproduce the
# closed-form results within their standard errors.

# %%
import numpy as np

from faraday_squeezing import (
    CouplingParams,
    SimConfig,
    build_single_cell,
    derive_rates,
    estimate_pulse_variance,
    estimate_spectrum,
    pulse_variances,
    simulate_cw,
    vx_spectrum,
)
from faraday_squeezing.stochastic import white_noise_series

# %% [markdown]
# Calibration: white noise at spectral density 1/2 must come out flat.

# %%
cfg = SimConfig(dt=1e-3, segment_length=64, seed=0)
est = estimate_spectrum(white_noise_series(64 * 400, cfg.dt, seed=0), cfg)
print(f"mean level {est.v_hat.mean():.4f}, typical stderr {np.median(est.stderr):.4f}")

# %% [markdown]
# Continuous-wave spectrum of a single cell.

# %%
p = CouplingParams(1.0, 1.0, 0.1, 0.1)
d = derive_rates(p)
cfg = SimConfig(dt=1e-3, duration=5000.0, segment_length=2**15, seed=1)
est = estimate_spectrum(simulate_cw(build_single_cell(p, d), cfg), cfg)
for target in (0.0, 0.5, 1.0, 2.0, 4.0):
    i = int(np.argmin(np.abs(est.omegas - target)))
    ref = vx_spectrum(d, est.omegas[i]).v_x
    print(f"omega = {est.omegas[i]:5.2f}  estimate {est.v_hat[i]:.4f} +- {est.stderr[i]:.4f}"
          f"  closed form {ref:.4f}")

# %% [markdown]
# Pulse ensembles run in blocks with their own random substreams, so the
# result does not depend on the number of worker threads.

# %%
p = CouplingParams(kappa2=1.0, tau=1.0, gamma=0.1)
ref = pulse_variances(1.0, 1.0, 0.1, 1.0)
for workers in (1, 4):
    mc = estimate_pulse_variance(p, 1.0, SimConfig(dt=1e-3, n_traj=10_000, seed=0,
                                                   workers=workers))
    print(f"workers = {workers}: Var x = {mc.var_x:.5f} +- {mc.stderr_x:.5f}, "
          f"Var p = {mc.var_p:.4f} +- {mc.stderr_p:.4f}")
print(f"closed form: Var x = {ref.var_x:.5f}, Var p = {ref.var_p:.4f}")
