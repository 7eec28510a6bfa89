import itertools
import math

import numpy as np
import pytest

from fiberdiv.errors import ArityError, NonPositiveResolution
from fiberdiv.geometry import Box, DyadicVoxel, FiberSpec, bounds, cell_bounds, children, diameter, required_depth

UNIT2 = Box((0, 0), (1, 1))


def test_bounds_examples():
    assert bounds(DyadicVoxel(1, (1, 0), UNIT2)) == Box((0.5, 0), (1, 0.5))
    assert bounds(DyadicVoxel.root_voxel(UNIT2)) == UNIT2
    assert bounds(DyadicVoxel(3, (5,), Box((0,), (1,)))) == Box((0.625,), (0.75,))


def test_bounds_closed_flag():
    b = bounds(DyadicVoxel(1, (0, 0), UNIT2), closed=True)
    assert b.closed and b.contains((0.5, 0.5))
    assert not bounds(DyadicVoxel(1, (0, 0), UNIT2)).contains((0.5, 0.5))


def test_children_2d_order():
    kids = children(DyadicVoxel.root_voxel(UNIT2))
    assert [k.index for k in kids] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert all(k.depth == 1 for k in kids)


def test_children_3d_tile_parent():
    root = Box((0, 0, 0), (1, 1, 1))
    v = DyadicVoxel(2, (1, 3, 2), root)
    kids = children(v)
    assert len(kids) == 8
    _assert_tiles(bounds(v), [bounds(k) for k in kids])


def test_grandchild_depth():
    v = DyadicVoxel.root_voxel(UNIT2)
    assert children(children(v)[0])[3].depth == 2


def test_voxel_validation_and_ancestry():
    with pytest.raises(ValueError):
        DyadicVoxel(2, (4, 0), UNIT2)
    with pytest.raises(ArityError):
        DyadicVoxel(1, (0,), UNIT2)
    v = DyadicVoxel(3, (5, 2), UNIT2)
    assert v.parent() == DyadicVoxel(2, (2, 1), UNIT2)
    assert v.ancestor(0) == DyadicVoxel.root_voxel(UNIT2)
    assert all(k.parent() == v for k in children(v))


@pytest.mark.parametrize(
    "root, depth, expected",
    [(UNIT2, 0, math.sqrt(2)), (UNIT2, 3, math.sqrt(2) / 8), (Box((0, 0), (2, 1)), 1, math.sqrt(5) / 2)],
)
def test_diameter_examples(root, depth, expected):
    assert diameter(DyadicVoxel(depth, (0, 0), root)) == pytest.approx(expected, rel=1e-15)


def test_diameter_halving_exact_on_dyadic_root():
    root = Box((-2, -2, -2), (2, 2, 2))
    v = DyadicVoxel(4, (3, 9, 1), root)
    for k in children(v):
        assert diameter(k) == diameter(v) / 2
        assert bounds(k).diameter == bounds(v).diameter / 2


def test_diameter_halving_within_ulp_otherwise():
    root = Box((0.1, -0.3), (0.7, 1.9))
    v = DyadicVoxel(5, (7, 30), root)
    scale = max(abs(c) for c in root.lo + root.hi)
    for k in children(v):
        assert diameter(k) == diameter(v) / 2
        # float bounds carry rounding at the scale of the coordinates
        assert abs(bounds(k).diameter - bounds(v).diameter / 2) <= 4 * math.ulp(scale)


@pytest.mark.parametrize("d0, d, expected", [(1, 0.1, 4), (1, 1, 0), (2, 0.25, 3), (1, 5, 0)])
def test_required_depth_examples(d0, d, expected):
    assert required_depth(d0, d) == expected


def test_required_depth_rejects_nonpositive():
    with pytest.raises(NonPositiveResolution):
        required_depth(1, 0)
    with pytest.raises(NonPositiveResolution):
        required_depth(1, -1)


def test_required_depth_postcondition_random():
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        d0 = 10 ** rng.uniform(-3, 3)
        if rng.random() < 0.5:
            k = int(rng.integers(0, 40))
            d = d0 * 2.0**-k * (1 + rng.choice([-1, 0, 1]) * 2**-52)
        else:
            d = d0 * 10 ** rng.uniform(-6, 0.5)
        n = required_depth(d0, d)
        assert d0 * 2.0**-n <= d
        assert n == 0 or d0 * 2.0 ** -(n - 1) > d


def _assert_tiles(parent, kids):
    for a, b in itertools.combinations(kids, 2):
        overlap = all(max(a.lo[i], b.lo[i]) < min(a.hi[i], b.hi[i]) for i in range(parent.n))
        assert not overlap
    vol = sum(math.prod(k.widths) for k in kids)
    assert vol == pytest.approx(math.prod(parent.widths), rel=1e-15)
    for i in range(parent.n):
        assert min(k.lo[i] for k in kids) == parent.lo[i]
        assert max(k.hi[i] for k in kids) == parent.hi[i]
        cuts = {k.hi[i] for k in kids if k.hi[i] != parent.hi[i]}
        assert cuts == {k.lo[i] for k in kids if k.lo[i] != parent.lo[i]}


def test_tiling_by_point_membership_on_awkward_root():
    rng = np.random.default_rng(2)
    root = Box((0.1, -1 / 3), (0.7, math.pi))
    for _ in range(50):
        depth = int(rng.integers(0, 20))
        v = DyadicVoxel(depth, tuple(int(i) for i in rng.integers(0, 1 << depth, 2)), root)
        parent, kids = bounds(v), [bounds(k) for k in children(v)]
        lo, hi = np.array(parent.lo), np.array(parent.hi)
        pts = lo + rng.random((200, 2)) * (hi - lo)
        pts = np.vstack([pts, [parent.lo], [[(a + b) / 2 for a, b in zip(parent.lo, parent.hi)]]])
        for p in pts:
            if parent.contains(p):
                assert sum(k.contains(p) for k in kids) == 1


def test_cell_bounds_align_across_depths():
    root = Box((0.1,), (0.7,))
    idx = np.arange(1 << 10)[:, None]
    lo, hi = cell_bounds(root, 10, idx)
    assert np.all(hi[:-1, 0] == lo[1:, 0])
    assert hi[-1, 0] == 0.7 and lo[0, 0] == 0.1


def test_box_validation():
    with pytest.raises(ValueError):
        Box((0, 1), (1, 1))
    with pytest.raises(ValueError):
        Box((0,), (math.inf,))
    assert Box((0, 0), (3, 4)).diameter == 5


def test_fiberspec():
    f = FiberSpec.parse(["x1", "x2 - 1"], [0, 0], 2)
    assert f.m == 2
    with pytest.raises(ValueError):
        FiberSpec.parse(["x1"], [0, 1], 2)
    with pytest.raises(ArityError):
        FiberSpec(FiberSpec.parse(["x3"], [0], 3).exprs, (0,), 2)
