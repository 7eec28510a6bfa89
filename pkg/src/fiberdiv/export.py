"""Leaf-set and statistics writers (CSV, SVG, JSON)."""

from __future__ import annotations

import json
import os
from typing import Union

import numpy as np

from .analysis import ComplexityReport
from .densegrid import DenseResult
from .errors import UnsupportedDimension
from .geometry import cell_bounds
from .subdivide import SubdivisionResult

# stats fields that carry wall-clock measurements; everything else is
# deterministic for a given configuration
TIMING_FIELDS = ("seconds", "subdivision_seconds", "alpha_M")

PathLike = Union[str, os.PathLike]


def _leaf_arrays(result):
    if isinstance(result, DenseResult):
        return result.root, result.depth, result.flagged_index
    return result.root, result.depth, result.leaf_index


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def leaves_csv(result: Union[SubdivisionResult, DenseResult]) -> str:
    root, depth, index = _leaf_arrays(result)
    n = root.n
    header = ["depth"] + [f"i{k}" for k in range(1, n + 1)]
    header += [f"lo{k}" for k in range(1, n + 1)] + [f"hi{k}" for k in range(1, n + 1)]
    lines = [",".join(header)]
    if len(index):
        lo, hi = cell_bounds(root, depth, index)
        for idx, a, b in zip(index.tolist(), lo.tolist(), hi.tolist()):
            fields = [str(depth)] + [str(i) for i in idx] + [_g17(v) for v in a] + [_g17(v) for v in b]
            lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def leaves_svg(result: Union[SubdivisionResult, DenseResult], size: int = 512) -> str:
    root, depth, index = _leaf_arrays(result)
    if root.n != 2:
        raise UnsupportedDimension(f"SVG export needs n = 2, got n = {root.n}")
    (x0, y0), (x1, y1) = root.lo, root.hi
    scale = size / max(x1 - x0, y1 - y0)
    width, height = (x1 - x0) * scale, (y1 - y0) * scale

    def sx(x):
        return (x - x0) * scale

    def sy(y):
        return (y1 - y) * scale

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.3f}" height="{height:.3f}" '
        f'viewBox="0 0 {width:.3f} {height:.3f}">',
        f'<rect class="root" x="0" y="0" width="{width:.3f}" height="{height:.3f}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    if len(index):
        lo, hi = cell_bounds(root, depth, index)
        for a, b in zip(lo.tolist(), hi.tolist()):
            parts.append(
                f'<rect class="leaf" x="{sx(a[0]):.4f}" y="{sy(b[1]):.4f}" '
                f'width="{(b[0] - a[0]) * scale:.4f}" height="{(b[1] - a[1]) * scale:.4f}" '
                'fill="steelblue" fill-opacity="0.5" stroke="navy" stroke-width="0.2"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def export_leaves(result, path: PathLike, format: str = "csv") -> None:  # noqa: A002
    if format == "csv":
        text = leaves_csv(result)
    elif format == "svg":
        text = leaves_svg(result)
    else:
        raise ValueError(f"unknown leaf format {format!r}")
    _write(path, text)


def report_to_dict(report: ComplexityReport) -> dict:
    fit = report.fit
    measure = report.measure
    return {
        "n": report.n,
        "m": report.m,
        "delta0": report.delta0,
        "delta": report.delta,
        "N": report.depth,
        "d": report.d,
        "root_excluded": report.root_excluded,
        "levels": [dict(row) for row in report.rows],
        "subdivision_evals": report.subdivision_evals,
        "subdivision_seconds": report.subdivision_seconds,
        "leaves": report.leaves,
        "slope": fit.slope if fit else None,
        "intercept": fit.intercept if fit else None,
        "r_squared": fit.r_squared if fit else None,
        "fit_range": list(fit.fit_range) if fit else None,
        "measure": measure.final if measure else None,
        "plateau_ratio": measure.plateau_ratio if measure else None,
        "measure_caveat": measure.caveat if measure else None,
        "alpha_M": report.alpha,
        "output_size_constant": report.output_size_constant,
        "work_constant": report.work_constant,
        "dense": report.dense,
        "ratio": report.eval_ratio,
        "leaf_ratio": report.leaf_ratio,
        "notes": list(report.notes),
    }


def strip_timings(stats):
    """Copy of a stats mapping with every wall-clock field removed."""
    if isinstance(stats, dict):
        return {k: strip_timings(v) for k, v in stats.items() if k not in TIMING_FIELDS}
    if isinstance(stats, list):
        return [strip_timings(v) for v in stats]
    return stats


def export_stats(report: ComplexityReport, path: PathLike) -> None:
    _write(path, json.dumps(report_to_dict(report), indent=2, sort_keys=False) + "\n")


def _write(path: PathLike, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {os.fspath(path)!r}: {exc.strerror}") from exc


def load_leaves_csv(path: PathLike) -> np.ndarray:
    """Read back the index columns of a leaf CSV as a ``(k, n)`` array."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        n = sum(1 for h in header if h.startswith("i"))
        rows = [line.strip().split(",") for line in fh if line.strip()]
    return np.asarray([[int(v) for v in r[1:1 + n]] for r in rows], dtype=np.int64).reshape(-1, n)
