# %% [markdown]
# # Corpus runs and reports
#
# A synthetic corpus has known answers, so solver failures are the solver's
# fault.  We compare plain descent with its hybrid on a small corpus and
# print the summary tables.  The same thing from a shell:
#
#     motorparams synth --count 20 --out corpus.csv
#     motorparams batch --corpus corpus.csv --algorithm DNRGA --out results.csv
#     motorparams report results.csv

# %%
from motorparams import corpus
from motorparams.batch import RunConfig, report, run_batch

records = corpus.generate_synthetic(10, seed=5)
stats = []
for algo in ("LM", "LMGA"):
    s, rows = run_batch(RunConfig(algorithm=algo), records)
    stats.append(s)

print(report(stats, "markdown"))
