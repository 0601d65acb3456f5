# %% [markdown]
# # Six solvers on the same problem
#
# Second order methods take a few steps. First order flows take thousands,
# and the Barzilai-Borwein steps sit in between. The traces are written to
# `demos/out/` as CSV so they can be plotted later (see the README).

# %%
from pathlib import Path

from sos_certify import Method, SolverConfig, build_preset, solve
from sos_certify.io import write_trace_csv

out = Path(__file__).resolve().parent / "out"
out.mkdir(exist_ok=True)
problem = build_preset("test1")

# %%
summary = {}
for method in Method:
    _, trace = solve(problem, SolverConfig(method.value))
    write_trace_csv(trace, out / f"test1_{method.value}.csv")
    summary[method.value] = trace.iterations

width = max(map(len, summary))
for name, its in sorted(summary.items(), key=lambda kv: kv[1]):
    print(f"{name:<{width}}  {its:6d}")

# %% [markdown]
# Only the BB traces are allowed to be non-monotone in the gradient norm.
# Every row still has a positive smallest eigenvalue of M, so no iterate
# left the domain.
