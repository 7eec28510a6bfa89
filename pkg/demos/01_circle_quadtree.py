# %% [markdown]
# # A quadtree around the unit circle
#
# We cover the circle x^2 + y^2 = 1 inside the box [-2, 2)^2 by repeatedly
# splitting squares into four and throwing away every square whose interval
# enclosure of x^2 + y^2 - 1 cannot reach zero.

# %%
import numpy as np

from fiberdiv import Box, FiberSpec, subdivide
from fiberdiv.export import export_leaves

fiber = FiberSpec.parse(["x^2 + y^2 - 1"], [0.0], n=2)
root = Box((-2.0, -2.0), (2.0, 2.0))
result = subdivide(fiber, root, delta=0.05)
print("rounds:", result.depth, " leaf diameter:", result.delta0 * 2.0**-result.depth)

# %% [markdown]
# Each level keeps roughly twice as many squares as the one before, which is
# what a curve (dimension 1) should do.

# %%
for s in result.levels:
    print(f"t={s.t:2d}  kept={s.count:5d}  tested={s.predicate_evals:5d}")

# %% [markdown]
# Leaves are stored as integer indices; their bounds come from exact dyadic
# arithmetic on the root box.

# %%
idx = result.leaf_index
print(idx[:5])
centers = (idx + 0.5) * (4.0 / 2**result.depth) - 2.0
radii = np.hypot(centers[:, 0], centers[:, 1])
print("leaf centre radius range:", radii.min().round(4), radii.max().round(4))

# %% [markdown]
# Write an SVG picture of the cover next to this script.

# %%
export_leaves(result, "circle_quadtree.svg", "svg")
print("wrote circle_quadtree.svg with", len(result.leaves), "squares")
