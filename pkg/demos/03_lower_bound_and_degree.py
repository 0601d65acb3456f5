# %% [markdown]
# # Approaching the boundary
#
# T_11 + 1 + alpha touches zero on [0, 1] as alpha goes to 0. The
# multipliers must grow to follow it, and the iteration count creeps up.
# A second sweep raises the degree of x**n + 1 and records the conditioning
# of the modified Newton matrix at the last step.

# %%
import numpy as np

from sos_certify import SolverConfig, build_preset, solve

for alpha in (1.0, 1e-3, 1e-6, 1e-9):
    _, tr = solve(build_preset("test3", alpha=alpha), SolverConfig("mnewton"))
    print(f"alpha={alpha:7.0e}  iterations={tr.iterations:3d}  |lambda|={tr.lambda_norm:.3e}")

# %%
rows = []
for n in range(1, 13):
    _, tr = solve(build_preset("test4", n=n), SolverConfig("mnewton"))
    rows.append((n, tr.iterations, tr.rows[-1].cond_H))
print(np.array(rows))

# %% [markdown]
# On the triangle the Motzkin polynomial needs the barycentric weights.
# Without them the interpolation system is too small to capture it and
# the gradient stalls well above the tolerance.

# %%
for name in ("test6", "test6-unweighted"):
    _, tr = solve(build_preset(name), SolverConfig("mnewton", max_iter=50,
                                                    continue_on_underflow=True))
    print(f"{name:17s} {tr.status.value:15s} final |grad| {tr.final_grad_norm:.3e}")
