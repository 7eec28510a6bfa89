# %% [markdown]
# # Reading off the dimension from voxel counts
#
# If a set has dimension d, the number of depth-t voxels that touch it grows
# like 2^(t*d).  A straight-line fit of log2(count) against t recovers d.

# %%
from fiberdiv import fit_dimension, subdivide, testfibers
from fiberdiv.analysis import estimate_measure

for name, depth in [("axis-line", 10), ("circle", 10), ("plane", 7), ("sphere", 7), ("full-cube", 6)]:
    tf = testfibers.get(name)
    res = subdivide(tf.fiber, tf.root, max_depth_override=depth)
    fit = fit_dimension(res.levels)
    print(f"{name:10s} true d={tf.true_dimension}  fitted {fit.slope:.3f}  (r^2 {fit.r_squared:.4f})")

# %% [markdown]
# The box-counting measure |Q_t| * delta0^d * 2^(-t*d) settles down quickly,
# but it settles on a value above the true length.  For the circle the
# limit is about 8*sqrt(2) = 11.31 rather than 2*pi: a random curve of length
# L meets about 4L/(pi*w) grid squares of side w, each of diameter sqrt(2)*w.

# %%
tf = testfibers.get("circle")
res = subdivide(tf.fiber, tf.root, max_depth_override=12)
m = estimate_measure(res.levels, 1, res.delta0)
for t, mu in enumerate(m.sequence):
    print(f"t={t:2d}  mu^1={mu:8.4f}")
print("true length", tf.true_measure)
print(m.caveat)
