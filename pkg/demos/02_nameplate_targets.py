# %% [markdown]
# # From nameplate data to residuals
#
# The estimation problem matches six nameplate quantities: full-load
# mechanical power, reactive power, breakdown torque, locked-rotor torque,
# locked-rotor current and full-load efficiency.  Each residual is divided by
# its target, so a model that delivers nothing scores close to 6.

# %%
from motorparams import CircuitParams, NameplateData, residuals, to_targets

plate = NameplateData(u_n=400.0, freq=50.0, n_fl=1480.0, i_s_fl=181.0, p_m_fl=100e3,
                      pf_fl=0.87, eff_fl=0.95, t_b_ratio=2.6, t_lr_ratio=1.9,
                      i_lr_ratio=6.5, poles=4)
targets = to_targets(plate)
print(targets)

# %%
guess = CircuitParams(0.031, 0.10, 3.1, 0.018, 0.18, 0.12, 0.09, 42.0)
r = residuals(guess, targets)
print("residuals:", [round(v, 4) for v in r.f])
print("squared error:", r.squared_error)

# %% [markdown]
# A machine whose stator impedance is enormous draws no current and
# delivers nothing: all six normalised residuals approach 1.

# %%
dead = guess.replace(r_s=1e9, x_s=1e9, x_m=1e9, r_c=1e9)
print("degenerate squared error:", residuals(dead, targets).squared_error)
