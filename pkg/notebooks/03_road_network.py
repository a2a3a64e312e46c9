"""
Staying on a road network
=========================

Roads are strips (two half-spaces each) and rings (inside one circle, outside
another); the drivable set is the union of the four roads.  An agent that
starts off the road is pulled back onto it and then stays there.
"""

# %%
import os

import numpy as np

from barrier_comp import load_builtin, membership_grid
from barrier_comp.plotting import save_svg, trajectory_figure
from barrier_comp.sim import first_entry, simulate_all

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "out")
os.makedirs(OUT, exist_ok=True)

sc = load_builtin("example3")
spec = sc.layered
print(f"{spec.n_leaves} leaves, level sizes {spec.level_sizes}, kinds {[lv.kind for lv in spec.levels]}")

# %%
on_road, off_road = simulate_all(sc)
target = np.asarray(sc.controller.target)
print(f"on-road start : min h {on_road.h.min():.3e}, final distance {np.linalg.norm(on_road.final_state - target):.2e}")

k = first_entry(off_road)
print(f"off-road start: h(0) = {off_road.h[0]:.3f}, reaches the road at t = {off_road.times[k]:.2f}, "
      f"min h afterwards {off_road.h[k:].min():.3e}")

# %% [markdown]
# While the agent is off the road and the filter is active, ``h`` can only
# grow: the constraint ``hdot >= -h`` forces ``h`` up while ``h < 0``.

# %%
cases = np.array(off_road.cases[:k])
print("cases before entering:", {str(c): int((cases == c).sum()) for c in sorted(set(cases))})

grid = membership_grid(spec, sc.params, sc.workspace, 300)
fig = trajectory_figure(grid, spec, [on_road, off_road], target, labels=["on road", "off road"])
save_svg(fig, os.path.join(OUT, "example3.svg"))
