"""plotkit command line.

Preset mode renders one of the known figures from a directory of trace CSVs:

    plotkit --preset fig1a --in results/ --out fig1a.png

Explicit mode mirrors the plot spec field by field:

    plotkit --input trace.csv:label [--input ...] --y loss --x iter \
            [--no-log-y] [--markers epoch-stars] [--vline-at-phase-switch] \
            --out figure.png
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import MARKER_CHOICES, PRESETS, PlotSpec, X_CHOICES, Y_CHOICES, preset_spec, render
from .traces import TraceFormatError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plotkit",
                                     description="Render convergence figures from trace CSV files.")
    parser.add_argument("--preset", choices=sorted(PRESETS), default=None)
    parser.add_argument("--in", dest="in_dir", type=Path, default=None,
                        help="directory containing the preset's trace files")
    parser.add_argument("--input", action="append", default=[],
                        metavar="PATH[:LABEL]", help="explicit trace input (repeatable)")
    parser.add_argument("--y", choices=Y_CHOICES, default="loss")
    parser.add_argument("--x", choices=X_CHOICES, default="iter")
    parser.add_argument("--no-log-y", action="store_true")
    parser.add_argument("--markers", choices=MARKER_CHOICES, default="none")
    parser.add_argument("--vline-at-phase-switch", action="store_true")
    parser.add_argument("--out", type=Path, required=True, help="output image path")
    return parser


def _parse_input(text: str) -> tuple[Path, str]:
    path, sep, label = text.rpartition(":")
    if not sep or not path:
        return Path(text), Path(text).stem
    return Path(path), label


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    try:
        if args.preset is not None:
            if args.in_dir is None:
                print("error: --preset requires --in DIR", file=sys.stderr)
                return 2
            spec = preset_spec(args.preset, args.in_dir, args.out)
        else:
            if not args.input:
                print("error: provide --preset or at least one --input", file=sys.stderr)
                return 2
            spec = PlotSpec(
                inputs=tuple(_parse_input(t) for t in args.input),
                y=args.y,
                x=args.x,
                log_y=not args.no_log_y,
                markers=args.markers,
                vline_at_phase_switch=args.vline_at_phase_switch,
                output=args.out,
            )
        render(spec)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TraceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
