"""Acceptance suite: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v -s`` to see the lines as they are
produced; they are also repeated in the terminal summary.
"""

import io
import json
import math
import time
from fractions import Fraction

import numpy as np

from fiberdiv import cli, testfibers
from fiberdiv.analysis import build_report, coverage_check, estimate_measure, fit_dimension
from fiberdiv.densegrid import dense_scan
from fiberdiv.errors import EvalError
from fiberdiv.export import leaves_csv, strip_timings
from fiberdiv.expr import eval_interval_batch, eval_point
from fiberdiv.geometry import Box
from fiberdiv.subdivide import PredicateDecision, oracle_predicate, subdivide

from conftest import points_in, random_boxes, random_expr

CIRCLE = testfibers.get("circle")
GATED = [tf for tf in testfibers.catalog() if tf.gated]


def test_criterion_1_interval_soundness(criterion):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    trials = checked = violations = 0
    while trials < 10_000:
        n = int(rng.integers(1, 4))
        e = random_expr(rng, n, depth=5, allow_div=True, allow_sqrt=True)
        lo, hi = random_boxes(rng, 100, n)
        pts = points_in(rng, lo, hi)
        enc = eval_interval_batch(e, lo, hi)
        for k in range(100):
            try:
                v = eval_point(e, pts[k])
            except EvalError:
                continue
            checked += 1
            violations += not (enc.lo[k] <= v <= enc.hi[k])
        trials += 100
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 5.0
    criterion(1, "interval soundness", ok,
              f"{trials} trials, {checked} with a defined point value, {violations} violations, {elapsed:.2f}s")
    assert ok


def test_criterion_2_dense_equivalence(criterion):
    start = time.perf_counter()
    mismatches, runs = [], 0
    for tf in testfibers.catalog():
        top = 6 if tf.n == 2 else 4
        for depth in range(top + 1):
            sub = subdivide(tf.fiber, tf.root, max_depth_override=depth)
            dense = dense_scan(tf.fiber, tf.root, depth=depth)
            runs += 1
            if leaves_csv(sub).encode() != leaves_csv(dense).encode():
                mismatches.append((tf.name, depth))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 30.0
    criterion(2, "dense equivalence oracle", ok,
              f"{runs} runs over {len(testfibers.catalog())} fibers, mismatches {mismatches}, {elapsed:.2f}s")
    assert ok


def test_criterion_3_coverage(criterion):
    misses, details = 0, []
    for tf in GATED:
        depth = 8 if tf.n == 2 else 6
        samples = tf.sampler(3, 1000)
        if len(samples) == 0:
            details.append(f"{tf.name}: no points on fiber")
            continue
        rep = coverage_check(subdivide(tf.fiber, tf.root, max_depth_override=depth), samples)
        misses += rep.total_misses + (0 if rep.passed else 1)
        details.append(f"{tf.name}: {rep.total_misses} misses")
    ok = misses == 0
    criterion(3, "coverage of on-fiber samples", ok, "; ".join(details))
    assert ok


def test_criterion_4_dimension_slopes(criterion):
    start = time.perf_counter()
    cases = [("axis-line", 10), ("offset-line", 10), ("full-square", 10), ("full-cube", 7), ("circle", 10),
             ("sphere", 7), ("plane", 7)]
    slopes = {}
    for name, depth in cases:
        tf = testfibers.get(name)
        slopes[name] = fit_dimension(subdivide(tf.fiber, tf.root, max_depth_override=depth).levels).slope
    elapsed = time.perf_counter() - start
    ok = (
        slopes["axis-line"] == 1.0
        and slopes["offset-line"] == 1.0
        and slopes["full-square"] == 2.0
        and slopes["full-cube"] == 3.0
        and abs(slopes["circle"] - 1.0) <= 0.1
        and abs(slopes["sphere"] - 2.0) <= 0.1
        and abs(slopes["plane"] - 2.0) <= 0.1
        and elapsed < 60.0
    )
    criterion(4, "dimension slopes", ok, ", ".join(f"{k} {v:.4f}" for k, v in slopes.items()) + f", {elapsed:.1f}s")
    assert ok


def _circle_measure(depth=10):
    res = subdivide(CIRCLE.fiber, CIRCLE.root, max_depth_override=depth)
    return res, estimate_measure(res.levels, 1, res.delta0)


def test_criterion_5a_measure_identity(criterion):
    worst = 0.0
    for tf in GATED:
        if tf.true_dimension == 0:
            continue
        depth = 8 if tf.n == 2 else 5
        res = subdivide(tf.fiber, tf.root, max_depth_override=depth)
        d = tf.true_dimension
        seq = estimate_measure(res.levels, d, res.delta0).sequence
        for s, mu in zip(res.levels, seq):
            exact = s.count * Fraction(res.delta0) ** d * Fraction(1, 2 ** (s.t * d))
            worst = max(worst, float(abs(Fraction(mu) - exact) / Fraction(math.ulp(mu))))
    ok = worst <= 1.0
    criterion("5a", "measure identity to 1 ulp", ok, f"worst error {worst:.3f} ulp")
    assert ok


def test_criterion_5b_measure_plateau(criterion):
    _, m = _circle_measure()
    ok = m.plateau_ratio < 0.05
    criterion("5b", "circle measure plateau", ok, f"plateau ratio {m.plateau_ratio:.4f} over last 3 levels")
    assert ok


def test_criterion_5c_measure_band(criterion):
    res, m = _circle_measure()
    dense = dense_scan(CIRCLE.fiber, CIRCLE.root, depth=res.depth)
    dense_mu = dense.count * res.delta0 * 2.0**-res.depth
    lo, hi = 2 * math.pi, 2 * math.sqrt(2) * math.pi
    ok = lo <= m.final <= hi
    criterion("5c", "circle measure within [2pi, 2sqrt(2)pi]", ok,
              f"final {m.final:.4f}, dense oracle {dense_mu:.4f}, band [{lo:.4f}, {hi:.4f}]")
    assert ok


def _circle_ratios():
    ratios, per_leaf = {}, {}
    for depth in range(4, 11):
        sub = subdivide(CIRCLE.fiber, CIRCLE.root, max_depth_override=depth)
        dense = dense_scan(CIRCLE.fiber, CIRCLE.root, depth=depth)
        rep = build_report(sub, dense)
        assert rep.dense["same_leaves"]
        ratios[depth] = rep.eval_ratio
        per_leaf[depth] = rep.subdivision_evals / rep.leaves
    return ratios, per_leaf


def test_criterion_6_output_sensitivity(criterion):
    ratios, _ = _circle_ratios()
    seq = [ratios[d] for d in range(4, 11)]
    steps = [b / a for a, b in zip(seq, seq[1:])]
    ok = all(b > a for a, b in zip(seq, seq[1:])) and all(1.7 <= s <= 2.3 for s in steps)
    criterion(6, "dense/subdivision eval ratio", ok,
              "ratios " + " ".join(f"{r:.2f}" for r in seq) + "; steps " + " ".join(f"{s:.3f}" for s in steps))
    assert ok


def test_criterion_7_log_factor_work(criterion):
    _, per_leaf = _circle_ratios()
    band = [per_leaf[d] for d in range(6, 11)]
    spread = max(band) / min(band)
    ok = spread <= 4.0
    criterion(7, "evals per leaf within a factor-4 band", ok,
              "evals/|Q_N| " + " ".join(f"{v:.3f}" for v in band) + f"; max/min {spread:.3f}")
    assert ok


def test_criterion_8_determinism(criterion, tmp_path):
    csvs, stats = [], []
    for w in (1, 4, 8):
        leaves, js = tmp_path / f"w{w}.csv", tmp_path / f"w{w}.json"
        code = cli.run(["subdivide", "--fiber", "circle", "--depth", "8", "--workers", str(w),
                        "--leaves", str(leaves), "--stats", str(js)], io.StringIO(), io.StringIO())
        assert code == 0
        csvs.append(leaves.read_bytes())
        stats.append(strip_timings(json.loads(js.read_text())))
    ok = csvs[0] == csvs[1] == csvs[2] and stats[0] == stats[1] == stats[2]
    criterion(8, "determinism across 1/4/8 workers", ok,
              f"CSV {len(csvs[0])} bytes, stats compared without wall-clock fields")
    assert ok


def test_criterion_9_degenerate_inputs(criterion, tmp_path):
    out = tmp_path / "empty.csv"
    code = cli.run(["subdivide", "--fiber", "empty", "--depth", "6", "--leaves", str(out)],
                   io.StringIO(), io.StringIO())
    empty_rows = len(out.read_text().splitlines()) - 1
    coarse = subdivide(CIRCLE.fiber, CIRCLE.root, delta=CIRCLE.root.diameter)
    always = oracle_predicate(lambda box: PredicateDecision.POSSIBLE)
    full = subdivide(always, Box((0, 0), (1, 1)), max_depth_override=3)
    ok = (
        code == 0 and empty_rows == 0
        and coarse.depth == 0 and len(coarse.leaves) == 1
        and len(full.leaves) == 64
    )
    criterion(9, "degenerate handling", ok,
              f"empty: exit {code}, {empty_rows} leaves; delta >= delta0: {len(coarse.leaves)} leaf; "
              f"constant-possible N=3: {len(full.leaves)} leaves")
    assert ok
