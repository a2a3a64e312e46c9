"""
One composed constraint versus one constraint per leaf
======================================================

Stacking every leaf constraint into one QP asks for all of them at once.
When the leaves point in opposite directions this has no solution, and a set
of nonnegative multipliers proves it.  The composed barrier gives a single
constraint that the explicit filter always satisfies.
"""

# %%
import numpy as np

from barrier_comp import (
    CompositionParams,
    Infeasible,
    Linear,
    SingleIntegrator,
    feasibility_check,
    filter_explicit,
    filter_qp_multi,
    leaf_eval,
    load_builtin,
    smooth_eval,
)
from barrier_comp.dynamics import leaf_lie_derivatives

dyn = SingleIntegrator(2)

# %% [markdown]
# Two half-spaces facing away from each other, evaluated at the origin where
# both barriers equal -1: the rows read ``u1 >= 1`` and ``-u1 >= 1``.

# %%
sc = load_builtin("opposing")
x = np.zeros(2)
evals = leaf_eval(sc.layered, x)
report = feasibility_check(leaf_lie_derivatives(dyn, evals, x), [h for h, _ in evals], sc.alpha)
print("A =", report.A.tolist(), " b =", report.b.tolist())
print("feasible:", report.feasible)
print("multipliers:", report.violating_multipliers, " lam.A =", report.violating_multipliers @ report.A,
      " lam.b =", report.certificate_gap)
try:
    filter_qp_multi(dyn, evals, sc.alpha, np.zeros(2), x)
except Infeasible as err:
    print("active-set QP:", err, "certificate", err.certificate)

# %% [markdown]
# The rectangle from the first demo: stacking its four faces is infeasible
# everywhere (you cannot be beyond every face), while the composed barrier
# gives a usable filter.

# %%
sc = load_builtin("example1")
x = np.array([-1.5, 0.2])
u_des = np.array([1.0, 0.0])
evals = leaf_eval(sc.layered, x)
report = feasibility_check(leaf_lie_derivatives(dyn, evals, x), [h for h, _ in evals], Linear(1.0))
print("per-leaf constraints feasible:", report.feasible)
res = filter_explicit(dyn, smooth_eval(sc.layered, sc.params, x), sc.alpha, u_des)
print(f"composed filter: case={res.case}, u={res.u_safe}, residual={res.residual:.2e}")
