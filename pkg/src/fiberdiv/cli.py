"""Command-line front end.

Examples::

    fiberdiv subdivide -n 2 -f "x^2+y^2-1" -y 0 --box "-2:2,-2:2" --delta 0.01 \\
        --leaves out.csv --stats out.json
    fiberdiv compare -n 2 -f "x" -y 0 --box "0:1,0:1" --depth 3
    fiberdiv subdivide --fiber sphere --depth 6 --coverage 1000

Exit status: 0 success, 1 usage error, 2 resource limit, 3 internal
invariant failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from . import testfibers
from .analysis import build_report, coverage_check
from .densegrid import dense_scan
from .errors import (
    ArityError,
    ExprSyntaxError,
    FiberdivError,
    InvariantViolation,
    NonPositiveResolution,
    ResourceLimit,
    UnsupportedDimension,
)
from .export import export_leaves, export_stats
from .geometry import Box, FiberSpec
from .subdivide import DEFAULT_BUDGET, subdivide

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_INVARIANT = 0, 1, 2, 3
MODES = ("subdivide", "dense", "compare")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    mode: str
    n: int
    functions: list[str]
    y: list[float]
    root: Box
    delta: Optional[float] = None
    depth: Optional[int] = None
    leaves: Optional[str] = None
    stats: Optional[str] = None
    svg: Optional[str] = None
    budget: int = DEFAULT_BUDGET
    workers: int = 1
    fit_levels: int = 5
    dim: Optional[float] = None
    seed: Optional[int] = None
    coverage: int = 0
    fiber_name: Optional[str] = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fiberdiv", description="Orthree approximation of implicitly defined fibers.")
    p.add_argument("mode", nargs="?", choices=MODES, help="what to run")
    p.add_argument("--mode", dest="mode_flag", choices=MODES, help="alternative to the positional mode")
    p.add_argument("-n", type=int, dest="n", help="ambient dimension")
    p.add_argument("-f", action="append", dest="functions", default=[], help="component expression (repeatable)")
    p.add_argument("-y", action="append", dest="y", type=float, default=[], help="target value per -f")
    p.add_argument("--box", help="root box as lo:hi[,lo:hi...]")
    p.add_argument("--fiber", help="catalog fiber name (sets -n, -f, -y, --box)")
    res = p.add_mutually_exclusive_group()
    res.add_argument("--delta", type=float, help="target voxel diameter")
    res.add_argument("--depth", type=int, help="number of refinement rounds")
    p.add_argument("--leaves", help="write leaf CSV here")
    p.add_argument("--stats", help="write JSON statistics here")
    p.add_argument("--svg", help="write an SVG rendering here (n = 2)")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max voxels tested per round / dense cells")
    p.add_argument("--workers", type=int, default=1, help="threads for predicate evaluation")
    p.add_argument("--fit-levels", type=int, default=5, help="levels used by the dimension fit")
    p.add_argument("--dim", type=float, help="d used for the box-counting measure")
    p.add_argument("--seed", type=int, help="seed for the coverage sampler")
    p.add_argument("--coverage", type=int, default=0, metavar="K", help="check K catalog samples (needs --fiber)")
    return p


_VALUE_FLAGS = {"-f", "-y", "--box", "--fiber", "--dim", "--delta"}


def _join_values(argv: Sequence[str]) -> list[str]:
    # values such as "-2:2,-2:2" or "-x+1" would otherwise be read as options
    out, i = [], 0
    argv = list(argv)
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            value = argv[i + 1]
            out.append(f"{tok}={value}" if tok.startswith("--") else f"{tok}{value}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def parse_box(text: str) -> Box:
    try:
        pairs = [part.split(":") for part in text.split(",")]
        bounds = [(float(a), float(b)) for a, b in pairs]
    except ValueError:
        raise UsageError(f"--box: expected lo:hi[,lo:hi...], got {text!r}") from None
    try:
        return Box.from_bounds(bounds)
    except ValueError as exc:
        raise UsageError(f"--box: {exc}") from None


def parse_config(argv: Sequence[str]) -> RunConfig:
    args = _build_parser().parse_args(_join_values(argv))
    mode = args.mode or args.mode_flag
    if mode is None:
        raise UsageError(f"a mode is required: one of {', '.join(MODES)}")
    if args.mode and args.mode_flag and args.mode != args.mode_flag:
        raise UsageError("positional mode and --mode disagree")
    functions, ys, n, root = args.functions, args.y, args.n, None
    if args.fiber:
        if functions or ys:
            raise UsageError("--fiber cannot be combined with -f/-y")
        try:
            tf = testfibers.get(args.fiber)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        functions = [_fiber_text(e) for e in tf.fiber.exprs]
        ys = list(tf.fiber.y)
        if n is not None and n != tf.n:
            raise UsageError(f"--fiber {args.fiber} is {tf.n}-dimensional, got -n {n}")
        n = tf.n
        root = tf.root
    if n is None:
        raise UsageError("-n is required")
    if not functions:
        raise UsageError("at least one -f is required")
    if len(functions) != len(ys):
        raise UsageError(f"{len(functions)} -f values but {len(ys)} -y values")
    if args.box:
        root = parse_box(args.box)
    if root is None:
        raise UsageError("--box is required")
    if root.n != n:
        raise UsageError(f"--box has {root.n} axes but -n is {n}")
    if args.delta is None and args.depth is None:
        raise UsageError("one of --delta or --depth is required")
    if args.depth is not None and args.depth < 0:
        raise UsageError("--depth must be >= 0")
    if args.workers < 1 or args.budget < 1:
        raise UsageError("--workers and --budget must be positive")
    if args.stats and mode == "dense":
        raise UsageError("--stats needs subdivide or compare mode")
    if args.coverage and not args.fiber:
        raise UsageError("--coverage needs --fiber (samples come from the catalog)")
    return RunConfig(
        mode=mode, n=n, functions=functions, y=ys, root=root, delta=args.delta, depth=args.depth,
        leaves=args.leaves, stats=args.stats, svg=args.svg, budget=args.budget, workers=args.workers,
        fit_levels=args.fit_levels, dim=args.dim, seed=args.seed, coverage=args.coverage,
        fiber_name=args.fiber,
    )


def _fiber_text(e) -> str:
    from .expr import format as format_expr

    return format_expr(e)


def _print_table(report, out) -> None:
    print(f"n={report.n} delta0={report.delta0:.6g} delta={report.delta:.6g} N={report.depth} d={report.d:g}", file=out)
    print(f"{'t':>3} {'count':>10} {'mu_d':>12} {'evals':>10} {'seconds':>10}", file=out)
    for row in report.rows:
        print(
            f"{row['t']:>3} {row['count']:>10} {row['mu_d']:>12.6g} {row['evals']:>10} {row['seconds']:>10.4f}",
            file=out,
        )
    print(f"leaves: {report.leaves}   subdivision predicate evals: {report.subdivision_evals}", file=out)
    if report.fit is not None:
        print(f"fitted dimension: {report.fit.slope:.4f} (r^2 = {report.fit.r_squared:.4f}, "
              f"t = {report.fit.fit_range[0]}..{report.fit.fit_range[1]})", file=out)
    if report.measure is not None:
        print(f"box-counting measure: {report.measure.final:.6g} (plateau ratio {report.measure.plateau_ratio:.4f})",
              file=out)
    print(f"alpha_M estimate: {report.alpha:.3g} s/eval", file=out)
    for note in report.notes:
        print(f"note: {note}", file=out)


def execute(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    fiber = FiberSpec.parse(cfg.functions, cfg.y, cfg.n)
    sub = dense = None
    if cfg.mode in ("subdivide", "compare"):
        sub = subdivide(fiber, cfg.root, cfg.delta, cfg.depth, budget=cfg.budget, workers=cfg.workers)
    if cfg.mode in ("dense", "compare"):
        dense = dense_scan(fiber, cfg.root, cfg.delta, cfg.depth, budget=cfg.budget, workers=cfg.workers)
    if sub is not None:
        report = build_report(sub, dense, cfg.dim, fit_levels=cfg.fit_levels)
        _print_table(report, out)
        if dense is not None:
            print(f"dense grid predicate evals: {dense.predicate_evals}   "
                  f"subdivision: {report.subdivision_evals}   ratio: {report.eval_ratio:.4g}", file=out)
            if not report.dense["same_leaves"]:
                raise InvariantViolation("dense flagged set differs from subdivision leaves")
        if cfg.stats:
            export_stats(report, cfg.stats)
    else:
        print(f"dense grid: {dense.total_cells} cells, {dense.count} flagged, "
              f"{dense.predicate_evals} predicate evals", file=out)
    result = sub if sub is not None else dense
    if cfg.leaves:
        export_leaves(result, cfg.leaves, "csv")
    if cfg.svg:
        export_leaves(result, cfg.svg, "svg")
    if cfg.coverage and sub is not None:
        tf = testfibers.get(cfg.fiber_name)
        samples = tf.sampler(cfg.seed, cfg.coverage)
        if len(samples):
            cov = coverage_check(sub, samples)
            status = "pass" if cov.passed else f"FAIL ({cov.diagnosis})"
            print(f"coverage of {len(samples)} samples over {len(cov.levels)} levels: {status}", file=out)
            if not cov.passed:
                raise InvariantViolation(f"coverage failed: {cov.diagnosis}")
    return EXIT_OK


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
        return execute(cfg, out)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, ExprSyntaxError, ArityError, NonPositiveResolution, UnsupportedDimension) as exc:
        print(_build_parser().format_usage().rstrip(), file=err)
        print(f"fiberdiv: error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_USAGE
    except ResourceLimit as exc:
        print(f"fiberdiv: resource limit: {exc}", file=err)
        return EXIT_RESOURCE
    except InvariantViolation as exc:
        print(f"fiberdiv: invariant failure: {exc}", file=err)
        return EXIT_INVARIANT
    except (FiberdivError, OSError) as exc:
        print(f"fiberdiv: error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
