# %% [markdown]
# # Genetic algorithm over all eight parameters
#
# The GA needs no restrictions.  Elitism guarantees the best fitness never
# gets worse, but convergence to 1e-5 is rare within a few dozen generations.

# %%
from motorparams import corpus
from motorparams.evolution import GaConfig, solve_ga
from motorparams.formulation import to_targets

motor = corpus.generate_synthetic(1, seed=3)[0]
targets = to_targets(motor.plate)

for gens in (30, 50, 100):
    history = []
    out = solve_ga(targets, GaConfig(seed=1, max_generations=gens), history=history)
    print(f"{gens:3d} generations: best squared error {out.squared_error:.4g}, "
          f"{out.evaluations} evaluations")

print("elite fitness every 10 generations:", [round(h, 4) for h in history[::10]])
