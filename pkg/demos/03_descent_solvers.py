# %% [markdown]
# # Descent solvers
#
# Six equations cannot fix eight unknowns, so plain descent ties two of them
# down: r_s = k_r * r_r1 and x_r2 = k_x * x_s.  We generate a machine that
# satisfies those ties exactly and see how each method copes from a random
# start.

# %%
from motorparams import CircuitParams, DescentConfig, solve
from motorparams.formulation import forward_targets

truth = CircuitParams(0.03, 0.09, 2.8, 0.03, 0.17, 0.11, 0.045, 45.0)
targets = forward_targets(truth, 0.025)

for method in ("NR", "LM", "DNR"):
    for seed in range(3):
        out = solve(targets, DescentConfig(seed=seed), method)
        print(f"{method:3s} seed {seed}: converged={out.converged!s:5s} "
              f"error={out.squared_error:.2e} iterations={out.iterations} "
              f"reason={out.failure_reason}")

# %% [markdown]
# Starting at the truth, every method stops immediately.

# %%
print(solve(targets, DescentConfig(initial_guess=truth), "LM"))
