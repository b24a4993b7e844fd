# %% [markdown]
# # The double-cage equivalent circuit
#
# Eight per-unit parameters describe the machine: stator resistance and
# reactance, magnetising reactance, core-loss resistance and two rotor cages.
# Here we evaluate one machine across its slip range.

# %%
import numpy as np

from motorparams import CircuitParams, breakdown_torque, operating_point
from motorparams.circuit import torque

machine = CircuitParams(r_s=0.031, x_s=0.10, x_m=3.1, r_r1=0.018, x_r1=0.18,
                        r_r2=0.12, x_r2=0.09, r_c=42.0)
print(machine.is_feasible())

# %% [markdown]
# An operating point at 2% slip.  Torque is in synchronous watts, so it
# equals the air-gap power and torque * (1 - s) is the shaft power.

# %%
op = operating_point(machine, 0.02)
print(op)
print("torque * (1 - s) =", op.torque * (1 - op.slip), " p_mech =", op.p_mech)

# %% [markdown]
# The torque-slip curve and its breakdown point.  This machine has a second,
# lower hump near s = 0.5, so a warning is raised while the global maximum
# is returned.

# %%
slips = np.logspace(-3, 0, 9)
for s, t in zip(slips, torque(machine.as_array(), slips)):
    print(f"s = {s:7.4f}   T = {t:.4f} pu")

s_max, t_b = breakdown_torque(machine)
print(f"breakdown at s = {s_max:.6f}, T_b = {t_b:.6f} pu")
