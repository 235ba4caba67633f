# %% [markdown]
# # Squeezing of a square light pulse
#
# For a pulse of duration T the relevant field mode is the time average of
# the output over the pulse. Starting from a coherent spin state, its
# variance follows in closed form. The same number comes out of integrating
# the covariance equations of the model extended by two mode accumulators.

# %%
import numpy as np

from faraday_squeezing import pulse_variances, pulse_variances_numeric, pulse_variances_undamped

# %%
print(f"{'k2T':>5} {'Var x (gT=0)':>13} {'Var x (gT=0.1)':>15} {'Var p (gT=0.1)':>15}")
for kt in np.linspace(0, 10, 11):
    a = pulse_variances(kt, 1.0, 0.0, 1.0)
    b = pulse_variances(kt, 1.0, 0.1, 1.0)
    print(f"{kt:5.1f} {a.var_x:13.6f} {b.var_x:15.6f} {b.var_p:15.6f}")

# %% [markdown]
# Weak damping barely changes the squeezed variance while the
# anti-squeezed one drops noticeably.

# %%
kt = np.linspace(0, 10, 1001)
gap = np.abs(pulse_variances(kt, 1.0, 0.0, 1.0).var_x - pulse_variances(kt, 1.0, 0.1, 1.0).var_x)
print("largest difference between the damped and undamped curves:", gap.max())

# %% [markdown]
# Cross-check with the covariance ODE, including loss between the passes.

# %%
for tau in (1.0, 0.8):
    cf_ = pulse_variances(1.0, tau, 0.1, 1.0)
    ode = pulse_variances_numeric(1.0, tau, 0.1, 1.0)
    print(f"tau = {tau}: closed {cf_.var_x:.12f}  ODE {ode.var_x:.12f}")
print("undamped form:", pulse_variances_undamped(1.0).var_x)
