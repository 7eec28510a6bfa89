# %% [markdown]
# # A fiber through a singular point
#
# The double cone x^2 + y^2 - z^2 = 0 is a surface everywhere except at the
# origin, where 0 is not a regular value.  The subdivision still covers it;
# the count growth just carries extra voxels near the apex.

# %%
import numpy as np

from fiberdiv import build_report, coverage_check, subdivide, testfibers

tf = testfibers.get("cone")
res = subdivide(tf.fiber, tf.root, max_depth_override=7)
rep = build_report(res, d=2)
print("counts:", res.counts)
print(f"fitted dimension {rep.fit.slope:.3f}, box measure {rep.measure.final:.3f}, area {tf.true_measure:.3f}")

# %% [markdown]
# Points sampled on the cone, including ones near the apex, all fall inside
# kept voxels at every depth.

# %%
pts = np.vstack([tf.sampler(1, 2000), [[0.0, 0.0, 0.0]], [[1e-9, 0.0, 1e-9]]])
cov = coverage_check(res, pts)
print("coverage passed:", cov.passed)

# %% [markdown]
# Voxels per depth near the apex (within 0.1 of the origin) versus the rest.

# %%
for t in range(3, res.depth + 1):
    idx = res.level_indices[t]
    w = 2.0 / 2**t
    centers = -1.0 + (idx + 0.5) * w
    near = np.linalg.norm(centers, axis=1) < 0.1 + w
    print(f"t={t}  near apex {near.sum():5d}   elsewhere {(~near).sum():6d}")
