# %% [markdown]
# # Dense grid against adaptive subdivision
#
# The dense grid tests every one of the 4^N cells.  The subdivision only
# tests children of cells it kept, so its cost tracks the size of the answer.

# %%
import time

from fiberdiv import build_report, dense_scan, subdivide, testfibers

tf = testfibers.get("circle")
print(" N   dense evals   subdiv evals   ratio   same cells")
for depth in range(4, 12):
    t0 = time.perf_counter()
    sub = subdivide(tf.fiber, tf.root, max_depth_override=depth)
    dense = dense_scan(tf.fiber, tf.root, depth=depth)
    rep = build_report(sub, dense)
    print(f"{depth:2d}  {dense.predicate_evals:12d}  {rep.subdivision_evals:13d}  {rep.eval_ratio:6.1f}"
          f"   {rep.dense['same_leaves']}   ({time.perf_counter() - t0:.2f}s)")

# %% [markdown]
# The ratio roughly doubles with every extra level: dense work grows like
# 4^N while the circle cover grows like 2^N.  For a set that fills the box
# the two methods flag the same cells, and subdivision pays the extra levels.

# %%
tf = testfibers.get("full-square")
sub = subdivide(tf.fiber, tf.root, max_depth_override=6)
rep = build_report(sub, dense_scan(tf.fiber, tf.root, depth=6))
print("full square: eval ratio", round(rep.eval_ratio, 4), " leaf ratio", rep.leaf_ratio)
