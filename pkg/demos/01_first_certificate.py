# %% [markdown]
# # A first certificate
#
# The quintic x**5 + 1 is positive on [0, 1]. We ask the solver for a
# weighted sum of squares that matches it at the interpolation nodes,
# then check the result on a fine grid.

# %%
import numpy as np

from sos_certify import SolverConfig, build_preset, solve
from sos_certify.oracle import verify_certificate

problem = build_preset("test1")
problem

# %% [markdown]
# Two weights appear for odd degree, x and 1 - x, each with a block of
# quadratics. Newton with the adaptive step needs only a handful of steps.

# %%
cert, trace = solve(problem, SolverConfig("newton"))
print(trace.status.value, trace.iterations, "iterations")
for row in trace.rows:
    print(f"{row.iter:3d}  G={row.G: .10f}  |grad|={row.grad_norm:.3e}  tau={row.tau}")

# %% [markdown]
# Each block of the certificate holds the coefficients of the polynomials
# whose squares are summed. A block of size k never needs more than k of them.

# %%
for w, q in zip(problem.weights, cert.q_coeffs):
    print(w.name, q.shape, "largest coefficient", np.abs(q).max().round(4))

report = verify_certificate(problem, cert)
for part in report.parts:
    print(f"{part.name:14s} passed={part.passed}  metric={part.metric:.2e}")
