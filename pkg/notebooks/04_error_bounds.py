"""
How far is the smooth barrier from the exact one?
=================================================

For any layered specification the gap ``h - h_c`` lies in an interval set by
the largest group at every level: union levels can only push ``h`` up, by at
most ``ln(fan-in)/kappa``; intersection levels only pull it down.
"""

# %%
import numpy as np

from barrier_comp import (
    Circle,
    CompositionParams,
    HalfSpace,
    error_bounds,
    intersection,
    layerize,
    nonsmooth_eval,
    smooth_eval,
    smooth_eval_batch,
    union,
)
from barrier_comp.oracle import nonsmooth_batch

rng = np.random.default_rng(0)

# %% [markdown]
# A three-level tree: (A or B) and (C or D or E), or F.

# %%
tree = union(
    intersection(
        union(HalfSpace((1, 0), (1, 0)), HalfSpace((0, 1), (0, 1))),
        union(Circle((0, 0), 1.0), HalfSpace((-1, 1), (0, 0)), HalfSpace((0, -1), (0, -2))),
    ),
    Circle((3, 3), 1.5, "outer"),
)
spec = layerize(tree)
print("fan-ins per level:", spec.fan_ins, "kinds:", [lv.kind for lv in spec.levels])

# %%
X = rng.uniform(-5, 5, size=(20000, 2))
h_c = nonsmooth_batch(spec, X)
for kappa in (1.0, 10.0, 100.0):
    params = CompositionParams(kappa)
    rep = error_bounds(spec, params)
    gap = smooth_eval_batch(spec, params, X).values - h_c
    print(f"kappa={kappa:6.1f}: observed gap [{gap.min():+.4f}, {gap.max():+.4f}]"
          f"  within bound [{rep.lower:+.4f}, {rep.upper:+.4f}]")

# %% [markdown]
# Growing kappa shrinks the bound like ``1/kappa``.  The gap at one point
# need not shrink monotonically, because union and intersection errors have
# opposite signs and can partly cancel.  Large kappa does not overflow,
# because the recursion runs on logarithms.

# %%
x = np.array([0.3, -0.4])
exact = nonsmooth_eval(spec, x).value
for kappa in (1.0, 1e1, 1e2, 1e3, 1e6):
    ev = smooth_eval(spec, CompositionParams(kappa), x)
    print(f"kappa={kappa:9.0e}: h={ev.value:+.10f}  h - h_c={ev.value - exact:+.3e}  weights={np.round(ev.leaf_weights, 3)}")
