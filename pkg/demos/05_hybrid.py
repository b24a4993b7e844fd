# %% [markdown]
# # Hybrid: a GA chooses (r_s, x_r2), descent does the rest
#
# Each GA member fixes the two parameters that the restrictions used to tie
# down; the remaining 6x6 system is solved by NR, LM or damped NR.  The run
# stops as soon as any inner solve converges.

# %%
from motorparams import corpus
from motorparams.descent import DescentConfig, solve
from motorparams.formulation import to_targets
from motorparams.hybrid import HybridConfig, HybridTrace, solve_hybrid

motors = corpus.generate_synthetic(6, seed=11)
for m in motors:
    t = to_targets(m.plate)
    plain = solve(t, DescentConfig(seed=0), "DNR")
    trace = HybridTrace()
    hyb = solve_hybrid(t, HybridConfig(seed=0), trace)
    print(f"{m.id}: DNR {plain.squared_error:.2e} ({'ok' if plain.converged else '--'})   "
          f"DNR-GA {hyb.squared_error:.2e} ({'ok' if hyb.converged else '--'}) "
          f"after {trace.inner_solves} inner solves")

# %% [markdown]
# The recovered parameters against the truth for the last motor.

# %%
for name, est in hyb.params.as_dict().items():
    print(f"{name:5s} est {est:9.5f}  true {getattr(m.truth, name):9.5f}")
