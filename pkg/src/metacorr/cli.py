"""Command-line interface.

Exit codes: 0 success, 2 input or usage error, 3 degenerate statistics
(undefined correlation, empty pair window). JSON is the canonical output;
``--csv`` and ``--plot`` write derived views. Each run also writes a
manifest (command line, seed, input digests, version, timestamp) to
``--manifest`` or, when ``--out`` names a file, next to it.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import math
import shlex
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .correlation import FULL_TEST, JUDGED_ONLY, SCORING_MODES, system_aggregates, system_level_correlation
from .deltacorr import DeltaGrid, DeltaWindow, delta_correlation, delta_grid
from .errors import EmptySelectionError, InputError, UndefinedCorrelationError
from .resample import (
    METHODS,
    BootstrapConfig,
    bootstrap_correlation_ci,
    ranking_stability_curve,
    stability_csv,
    system_score_variance,
    variance_reduction,
)
from .scoredata import read_score_table, write_score_table
from .svg import render_svg_chart
from .synth import SynthConfig, generate_dataset

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 2, 3


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _clean(obj):
    # JSON has no NaN/Infinity
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path!r}: {exc.strerror}") from None


def _digest(path: str) -> str:
    h = hashlib.sha256()
    try:
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                h.update(chunk)
    except OSError:
        return ""
    return "sha256:" + h.hexdigest()


def _write_manifest(args, argv: Sequence[str], inputs: Sequence[str], anchor: str | None) -> None:
    target = args.manifest
    if target is None and anchor not in (None, "-"):
        target = f"{anchor}.manifest.json"
    if target is None:
        return
    manifest = {
        "command": shlex.join(["metacorr", *argv]),
        "seed": getattr(args, "seed", None),
        "inputs": {p: _digest(p) for p in inputs},
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    _write(target, _dump_json(manifest))


# --------------------------------------------------------------------------
# argument parsing helpers


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _sizes(text: str) -> list[int]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if not parts:
        raise argparse.ArgumentTypeError("at least one size is required")
    return [_positive_int(p) for p in parts]


def _window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like L:U, got {text!r}") from None
    if not (0.0 <= lo <= hi):
        raise argparse.ArgumentTypeError(f"window needs 0 <= L <= U, got {text!r}")
    return lo, hi


def _fractions(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma list."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + k * step, 10) for k in range(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid fraction list {text!r}") from None


def _level(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("level must be in (0, 1)")
    return value


# --------------------------------------------------------------------------
# commands


def cmd_correlate(args) -> tuple[int, list[str]]:
    metric, human = read_score_table(args.metric), read_score_table(args.human)
    result = system_level_correlation(metric, human, args.mode)
    _write(args.out, _dump_json(result.to_dict()))
    return EXIT_OK, [args.metric, args.human]


def _grid_heatmap(grid: DeltaGrid, title: str) -> dict:
    fmt = lambda f: f"{f:g}"  # noqa: E731
    cells = []
    for c in grid.cells.values():
        note = "" if c.u_value is None else f"{c.l_value:.3g}-{c.u_value:.3g}"
        cells.append({"row": fmt(c.fraction_low), "col": fmt(c.fraction_high), "value": c.tau, "note": note})
    return {
        "title": title,
        "rows": [fmt(f) for f in grid.lows()],
        "cols": [fmt(f) for f in grid.fractions],
        "cells": cells,
        "xlabel": "upper pair fraction (closest pairs first)",
        "ylabel": "lower pair fraction",
    }


def cmd_delta(args) -> tuple[int, list[str]]:
    if not args.grid and not args.window:
        raise InputError("give --window L:U (repeatable) or --grid")
    metric, human = read_score_table(args.metric), read_score_table(args.human)
    m_agg, h_agg = system_aggregates(metric, human, args.mode)
    if args.grid:
        grid = delta_grid(m_agg, h_agg, args.fractions)
        report = {"mode": args.mode, **grid.to_dict()}
        _write(args.out, _dump_json(report))
        if args.csv:
            _write(args.csv, grid.to_csv())
        if args.plot:
            title = f"windowed tau ({metric.label} vs {human.label}, {args.mode})"
            _write(args.plot, render_svg_chart(_grid_heatmap(grid, title), "heatmap"))
        return EXIT_OK, [args.metric, args.human]

    windows = []
    for lo, hi in args.window:
        window = DeltaWindow.by_value(lo, hi)
        try:
            result = delta_correlation(m_agg, h_agg, window)
        except EmptySelectionError:
            raise EmptySelectionError(f"window {lo:g}:{hi:g} selects no system pairs") from None
        except UndefinedCorrelationError as exc:
            raise UndefinedCorrelationError(f"window {lo:g}:{hi:g}: {exc}") from None
        windows.append({"lower": lo, "upper": hi, **result.to_dict()})
    _write(args.out, _dump_json({"mode": args.mode, "windows": windows}))
    return EXIT_OK, [args.metric, args.human]


def cmd_ci(args) -> tuple[int, list[str]]:
    metric, human = read_score_table(args.metric), read_score_table(args.human)
    modes = list(SCORING_MODES) if args.mode == "both" else [args.mode]
    intervals = []
    for mode in modes:
        cfg = BootstrapConfig(args.method, args.iterations, args.seed, args.level, mode)
        intervals.append(bootstrap_correlation_ci(metric, human, cfg, workers=args.workers))
    for ci in intervals:
        dropped = ci.iterations - ci.defined_iterations
        if dropped:
            _warn(f"{dropped} of {ci.iterations} iterations had an undefined tau ({ci.scoring_mode})")
    if len(intervals) == 1:
        report = intervals[0].to_dict()
    else:
        judged, full = intervals
        change = None if judged.width == 0 else 1.0 - full.width / judged.width
        report = {"intervals": [ci.to_dict() for ci in intervals], "width_reduction": change}
    _write(args.out, _dump_json(report))
    if args.plot:
        bars = [
            {
                "label": ci.scoring_mode,
                "value": ci.point_estimate if ci.point_estimate is not None else (ci.lower + ci.upper) / 2,
                "lower": ci.lower,
                "upper": ci.upper,
                "color": "#ff7f0e" if ci.scoring_mode == JUDGED_ONLY else "#1f77b4",
            }
            for ci in intervals
        ]
        data = {
            "title": f"{int(round(args.level * 100))}% CI for system-level tau ({args.method})",
            "ylabel": "Kendall tau",
            "ylim": (-1.0, 1.0),
            "bars": bars,
        }
        _write(args.plot, render_svg_chart(data, "bar-with-interval"))
    return EXIT_OK, [args.metric, args.human]


def cmd_stability(args) -> tuple[int, list[str]]:
    curves = []
    for path in args.scores:
        m = read_score_table(path)
        for size in args.sizes:
            if size > m.n_docs:
                _warn(f"M={size} exceeds the {m.n_docs} documents in {path}; sampling with replacement")
        points = ranking_stability_curve(m, args.sizes, args.iterations, args.seed, workers=args.workers)
        for p in points:
            if p.defined < p.iterations:
                _warn(f"{path}: {p.iterations - p.defined} undefined draws at M={p.size}")
        curves.append((m.label, points))
    report = {"curves": [{"label": label, "points": [p.to_dict() for p in pts]} for label, pts in curves]}
    _write(args.out, _dump_json(report))
    if args.csv:
        if len(curves) == 1:
            text = stability_csv(curves[0][1])
        else:
            blocks = [stability_csv(pts).splitlines() for _, pts in curves]
            lines = ["label," + blocks[0][0]]
            for (label, _), block in zip(curves, blocks):
                lines.extend(f"{label},{row}" for row in block[1:])
            text = "\n".join(lines) + "\n"
        _write(args.csv, text)
    if args.plot:
        data = {
            "title": "ranking stability",
            "xlabel": "M (documents per sample)",
            "ylabel": "Kendall tau between two samples",
            "log_x": True,
            "series": [
                {
                    "label": label,
                    "x": [p.size for p in pts],
                    "y": [p.mean_tau for p in pts],
                    "band": [p.std_tau for p in pts],
                }
                for label, pts in curves
            ],
        }
        _write(args.plot, render_svg_chart(data, "line-with-band"))
    return EXIT_OK, list(args.scores)


def cmd_variance(args) -> tuple[int, list[str]]:
    m = read_score_table(args.scores)
    reports = [
        system_score_variance(m, size, args.iterations, args.seed, args.level, workers=args.workers)
        for size in args.sizes
    ]
    reduction = variance_reduction(reports[0], reports[-1]) if len(reports) > 1 else None
    if reduction is not None:
        print(
            f"variance reduction from M={reports[0].sample_size} to M={reports[-1].sample_size}: "
            f"{100 * reduction:.2f}%",
            file=sys.stderr,
        )
    report = {"reports": [r.to_dict() for r in reports], "reduction": reduction}
    _write(args.out, _dump_json(report))
    if args.plot:
        means = dict(zip(m.system_ids, (m.values.mean(axis=1)).tolist()))
        bars = []
        for k, r in enumerate(reports):
            for s in m.system_ids:
                lo, hi = r.per_system_interval[s]
                bars.append({"label": s, "value": means[s], "lower": lo, "upper": hi,
                             "color": ("#1f77b4", "#ff7f0e", "#2ca02c")[k % 3], "order": m.system_ids.index(s)})
        bars.sort(key=lambda b: b.pop("order"))
        data = {
            "title": "bootstrapped system scores, sizes " + ", ".join(str(r.sample_size) for r in reports),
            "ylabel": "mean score",
            "bars": bars,
        }
        _write(args.plot, render_svg_chart(data, "bar-with-interval"))
    return EXIT_OK, [args.scores]


def cmd_synth(args) -> tuple[int, list[str]]:
    cfg = SynthConfig(
        n_systems=args.systems,
        m_test=args.docs,
        m_jud=args.judged,
        quality_spread=args.spread,
        doc_noise=args.noise,
        metric_distortion=args.distortion,
        seed=args.seed,
    )
    metric, human = generate_dataset(cfg)
    write_score_table(metric, args.out_metric)
    write_score_table(human, args.out_human)
    return EXIT_OK, []


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metacorr", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"metacorr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, pair=True):
        if pair:
            p.add_argument("--metric", required=True, help="metric score table (CSV or JSON)")
            p.add_argument("--human", required=True, help="human judgment table (CSV or JSON)")
        p.add_argument("--out", default=None, help="JSON report path (default: stdout)")
        p.add_argument("--manifest", default=None, help="run manifest path")

    def seeded(p):
        p.add_argument("--iterations", type=_positive_int, default=1000)
        p.add_argument("--seed", type=_seed, required=True)
        p.add_argument("--workers", type=_positive_int, default=1)

    p = sub.add_parser("correlate", help="system-level Kendall tau")
    common(p)
    p.add_argument("--mode", choices=SCORING_MODES, default=JUDGED_ONLY)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("delta", help="tau over system pairs within a metric-gap window")
    common(p)
    p.add_argument("--mode", choices=SCORING_MODES, default=FULL_TEST)
    p.add_argument("--window", type=_window, action="append", help="value window L:U (repeatable)")
    p.add_argument("--grid", action="store_true", help="rank-fraction heatmap grid")
    p.add_argument("--fractions", type=_fractions, default=[round(0.1 * k, 1) for k in range(1, 11)],
                   help="grid fractions as start:stop:step or a comma list (default 0.1:1.0:0.1)")
    p.add_argument("--csv", default=None, help="grid CSV path")
    p.add_argument("--plot", default=None, help="heatmap SVG path")
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("ci", help="bootstrap confidence interval for the system-level tau")
    common(p)
    seeded(p)
    p.add_argument("--method", choices=METHODS, default="boot-inputs")
    p.add_argument("--level", type=_level, default=0.95)
    p.add_argument("--mode", choices=(*SCORING_MODES, "both"), default=JUDGED_ONLY)
    p.add_argument("--plot", default=None, help="bar-with-interval SVG path")
    p.set_defaults(func=cmd_ci)

    p = sub.add_parser("stability", help="ranking stability versus document sample size")
    common(p, pair=False)
    seeded(p)
    p.add_argument("--scores", required=True, action="append", help="score table (repeatable)")
    p.add_argument("--sizes", type=_sizes, required=True, help="comma-separated sample sizes")
    p.add_argument("--csv", default=None, help="CSV path (M,mean_tau,std_tau,iterations,defined)")
    p.add_argument("--plot", default=None, help="line chart SVG path")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("variance", help="bootstrap variance of per-system scores")
    common(p, pair=False)
    seeded(p)
    p.add_argument("--scores", required=True, help="score table")
    p.add_argument("--sizes", type=_sizes, required=True, help="comma-separated sample sizes")
    p.add_argument("--level", type=_level, default=0.95)
    p.add_argument("--plot", default=None, help="per-system interval SVG path")
    p.set_defaults(func=cmd_variance)

    p = sub.add_parser("synth", help="write a synthetic metric/human table pair")
    p.add_argument("--systems", type=_positive_int, default=16)
    p.add_argument("--docs", type=_positive_int, default=11490)
    p.add_argument("--judged", type=_positive_int, default=100)
    p.add_argument("--spread", type=float, default=1.0, help="range of latent system quality")
    p.add_argument("--noise", type=float, default=1.0, help="per-summary noise scale")
    p.add_argument("--lambda", dest="distortion", type=float, default=0.3, help="metric distortion scale")
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--out-metric", required=True)
    p.add_argument("--out-human", required=True)
    p.add_argument("--manifest", default=None, help="run manifest path")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        code, inputs = args.func(args)
        anchor = getattr(args, "out", None) or getattr(args, "out_metric", None)
        _write_manifest(args, argv, inputs, anchor)
        return code
    except UndefinedCorrelationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
