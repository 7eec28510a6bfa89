import math

import numpy as np
import pytest

from fiberdiv import testfibers
from fiberdiv.analysis import (
    box_counting_measure,
    build_report,
    coverage_check,
    estimate_measure,
    expected_subdivision_evals,
    fit_dimension,
)
from fiberdiv.densegrid import dense_scan
from fiberdiv.errors import InsufficientLevels, MismatchedRuns, SampleOutsideRoot, ZeroCount
from fiberdiv.geometry import Box, FiberSpec
from fiberdiv.subdivide import LevelStats, subdivide

UNIT2 = Box((0, 0), (1, 1))
LINE = FiberSpec.parse(["x1"], [0], 2)


def _levels(counts):
    return [LevelStats(t, c, 0, 0.0) for t, c in enumerate(counts)]


def test_fit_full_square_exact():
    fit = fit_dimension(_levels([1, 4, 16, 64]), (0, 3))
    assert fit.slope == 2.0 and fit.r_squared == 1.0 and fit.fit_range == (0, 3)


def test_fit_line_exact():
    fit = fit_dimension(_levels([2**t for t in range(12)]))
    assert fit.slope == 1.0 and fit.r_squared == 1.0
    assert fit.fit_range == (7, 11)


def test_fit_exact_on_any_geometric_sequence():
    for k in (1, 2, 3):
        fit = fit_dimension(_levels([5 * 2 ** (k * t) for t in range(9)]))
        assert fit.slope == pytest.approx(k, abs=1e-12) and fit.r_squared == 1.0


def test_fit_skips_small_counts_by_default():
    fit = fit_dimension(_levels([1, 2, 4, 8, 16, 32]))
    assert fit.fit_range == (3, 5)


def test_fit_errors():
    with pytest.raises(InsufficientLevels):
        fit_dimension(_levels([1, 4, 16]))
    with pytest.raises(ZeroCount):
        fit_dimension(_levels([1, 0, 0, 0]), (0, 3))


def test_circle_slope_near_one():
    tf = testfibers.get("circle")
    counts = [dense_scan(tf.fiber, tf.root, depth=t).count for t in range(11)]
    fit = fit_dimension(_levels(counts), (5, 10))
    assert abs(fit.slope - 1.0) <= 0.1


def test_measure_line_and_full_box():
    line = subdivide(LINE, UNIT2, max_depth_override=6)
    m = estimate_measure(line.levels, 1, line.delta0)
    assert m.sequence == [math.sqrt(2)] * 7 and m.plateau_ratio == 0
    full = subdivide(FiberSpec.parse(["0"], [0], 2), UNIT2, max_depth_override=6)
    m = estimate_measure(full.levels, 2, full.delta0)
    assert m.final == pytest.approx(2.0, rel=1e-15) and m.plateau_ratio < 1e-15
    assert "overestimate" in m.caveat


def test_measure_identity_exact():
    tf = testfibers.get("circle")
    res = subdivide(tf.fiber, tf.root, max_depth_override=9)
    m = estimate_measure(res.levels, 1, res.delta0)
    for s, mu in zip(res.levels, m.sequence):
        exact = s.count * res.delta0 * 2.0**-s.t
        assert mu == exact
        assert mu == box_counting_measure(s.count, s.t, 1, res.delta0)


def test_measure_needs_four_levels():
    with pytest.raises(InsufficientLevels):
        estimate_measure(_levels([1, 2, 4]), 1, 1.0)


def test_coverage_circle():
    tf = testfibers.get("circle")
    res = subdivide(tf.fiber, tf.root, max_depth_override=8)
    rep = coverage_check(res, tf.sampler(1, 1000))
    assert rep.passed and rep.total_misses == 0
    for lc in rep.levels:
        assert lc.covered == 1000
        assert lc.max_center_distance <= lc.half_diameter


def test_coverage_off_fiber_sample_is_informational():
    tf = testfibers.get("circle")
    res = subdivide(tf.fiber, tf.root, max_depth_override=6)
    pts = np.vstack([tf.sampler(None, 4), [[0.0, 0.0]]])
    rep = coverage_check(res, pts, off_fiber=[False] * 4 + [True])
    assert rep.passed
    assert rep.off_fiber_missed > 0


def test_coverage_root_excluded_fails_with_diagnosis():
    res = subdivide(FiberSpec.parse(["x^2 + y^2"], [100], 2), UNIT2, max_depth_override=3)
    rep = coverage_check(res, [[0.5, 0.5]])
    assert not rep.passed
    assert "root" in rep.diagnosis


def test_coverage_sample_outside_root():
    res = subdivide(LINE, UNIT2, max_depth_override=2)
    with pytest.raises(SampleOutsideRoot):
        coverage_check(res, [[2.0, 0.0]])


def test_coverage_deep_levels_use_tuple_lookup():
    # a point fiber keeps deep levels tiny; t * n > 62 switches off the linear-id path
    third = 1 / 3
    fiber = FiberSpec.parse(["x1", "x2", "x3"], [third] * 3, 3)
    res = subdivide(fiber, Box((0, 0, 0), (1, 1, 1)), max_depth_override=25)
    assert 0 < res.counts[-1] <= 8
    assert coverage_check(res, [[third] * 3]).passed


def test_report_line_depth_three():
    sub = subdivide(LINE, UNIT2, max_depth_override=3)
    dense = dense_scan(LINE, UNIT2, depth=3)
    rep = build_report(sub, dense)
    assert rep.subdivision_evals == 29
    assert rep.dense["evals"] == 64 and rep.dense["same_leaves"]
    assert rep.eval_ratio == pytest.approx(64 / 29)
    assert rep.subdivision_evals == sum(r["evals"] for r in rep.rows)
    assert expected_subdivision_evals(sub.counts, 2) == 29


def test_report_full_box_degenerates_to_dense():
    full = FiberSpec.parse(["0"], [0], 2)
    for depth in range(0, 6):
        sub = subdivide(full, UNIT2, max_depth_override=depth)
        rep = build_report(sub, dense_scan(full, UNIT2, depth=depth))
        assert rep.leaf_ratio == 1.0 and rep.dense["same_leaves"]
        # every level is full, so subdivision pays the whole level sum (4^(N+1) - 1)/3
        assert rep.subdivision_evals == (4 ** (depth + 1) - 1) // 3
        assert rep.eval_ratio == 4**depth / rep.subdivision_evals


def test_report_circle_ratio_doubles():
    tf = testfibers.get("circle")
    ratios = []
    for depth in range(4, 11):
        sub = subdivide(tf.fiber, tf.root, max_depth_override=depth)
        dense = dense_scan(tf.fiber, tf.root, depth=depth)
        ratios.append(build_report(sub, dense).eval_ratio)
    steps = [b / a for a, b in zip(ratios, ratios[1:])]
    assert steps[-1] == pytest.approx(2.0, abs=0.1)


def test_report_mismatched_runs():
    sub = subdivide(LINE, UNIT2, max_depth_override=3)
    with pytest.raises(MismatchedRuns):
        build_report(sub, dense_scan(LINE, UNIT2, depth=2))
    with pytest.raises(MismatchedRuns):
        build_report(sub, dense_scan(LINE, Box((0, 0), (2, 1)), depth=3))


def test_report_shallow_fit_note_and_default_d():
    rep = build_report(subdivide(LINE, UNIT2, max_depth_override=3))
    assert rep.fit is not None and rep.fit.slope == 1.0
    assert rep.d == 1.0
    assert any("fewer than 8" in note for note in rep.notes)


@pytest.mark.parametrize(
    "name, depth, truth",
    [("axis-line", 10, 1.0), ("circle", 10, 1.0), ("sphere", 7, 2.0), ("plane", 7, 2.0), ("full-square", 8, 2.0)],
)
def test_slopes_of_catalog_fibers(name, depth, truth):
    tf = testfibers.get(name)
    fit = fit_dimension(subdivide(tf.fiber, tf.root, max_depth_override=depth).levels)
    assert abs(fit.slope - truth) <= 0.1


def test_circle_box_measure_matches_crofton_estimate():
    # a curve of length L meets about 4L/(pi w) grid cells of side w; each has diameter sqrt(2) w,
    # so the dyadic box measure of the unit circle tends to 4 sqrt(2) L / pi = 8 sqrt(2), not 2 pi
    tf = testfibers.get("circle")
    exact = subdivide(tf.oracle(), tf.root, max_depth_override=10)
    interval = subdivide(tf.fiber, tf.root, max_depth_override=10)
    assert exact.counts == interval.counts
    final = estimate_measure(exact.levels, 1, exact.delta0).final
    assert final == pytest.approx(8 * math.sqrt(2), rel=0.01)
    assert final > 2 * math.sqrt(2) * math.pi
