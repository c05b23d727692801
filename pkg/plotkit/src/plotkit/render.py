"""Figure rendering from trace files.

Series extraction is a pure function of the parsed records; rendering draws
one curve per input file, optional star markers at epoch boundaries, and an
optional dashed vertical line at the first phase switch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .traces import Record, read_trace

Y_CHOICES = ("loss", "err_fro")
X_CHOICES = ("iter", "epoch")
MARKER_CHOICES = ("epoch-stars", "none")


@dataclass(frozen=True)
class PlotSpec:
    inputs: tuple[tuple[Path, str], ...]
    y: str = "loss"
    x: str = "iter"
    log_y: bool = True
    markers: str = "none"
    vline_at_phase_switch: bool = False
    output: Path | None = None
    title: str | None = None

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("at least one input trace is required")
        if self.y not in Y_CHOICES:
            raise ValueError(f"y must be one of {Y_CHOICES}")
        if self.x not in X_CHOICES:
            raise ValueError(f"x must be one of {X_CHOICES}")
        if self.markers not in MARKER_CHOICES:
            raise ValueError(f"markers must be one of {MARKER_CHOICES}")


def _y_value(r: Record, y: str, path: Path) -> float:
    val = r.loss if y == "loss" else r.err_fro
    if val is None:
        from .traces import TraceFormatError

        raise TraceFormatError(f"{path}: column {y!r} missing on iter {r.iter}")
    return val


def epoch_boundaries(records: list[Record]) -> list[Record]:
    """Records where the completed-epoch counter increases."""
    out, prev = [], None
    for r in records:
        if r.epoch is None:
            continue
        if prev is not None and r.epoch > prev:
            out.append(r)
        prev = r.epoch
    return out


def extract_series(records: list[Record], x: str, y: str,
                   path: Path = Path("<records>")) -> tuple[list[float], list[float]]:
    """The plotted data series for one trace."""
    if x == "iter":
        pts = records
        xs = [float(r.iter) for r in pts]
    else:
        first = records[0] if records and records[0].epoch is not None else None
        pts = ([first] if first else []) + epoch_boundaries(records)
        xs = [float(r.epoch) for r in pts]
        if not pts:
            from .traces import TraceFormatError

            raise TraceFormatError(f"{path}: no epoch column values for x=epoch")
    ys = [_y_value(r, y, path) for r in pts]
    return xs, ys


def star_points(records: list[Record], x: str, y: str,
                path: Path = Path("<records>")) -> tuple[list[float], list[float]]:
    """Marker positions: one per epoch increment."""
    pts = epoch_boundaries(records)
    xs = [float(r.iter if x == "iter" else r.epoch) for r in pts]
    ys = [_y_value(r, y, path) for r in pts]
    return xs, ys


def phase_switch_x(records: list[Record], x: str) -> float | None:
    """x-position of the first record whose phase differs from its predecessor."""
    prev = None
    for r in records:
        if prev is not None and r.phase != prev:
            return float(r.iter if x == "iter" else (r.epoch or 0))
        prev = r.phase
    return None


def render(spec: PlotSpec):
    """Draw the figure; saves to spec.output when set and returns the Figure."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for path, label in spec.inputs:
        records = read_trace(path)
        xs, ys = extract_series(records, spec.x, spec.y, path)
        ax.plot(xs, ys, label=label, linewidth=1.4)
        if spec.markers == "epoch-stars":
            sx, sy = star_points(records, spec.x, spec.y, path)
            if sx:
                ax.plot(sx, sy, linestyle="none", marker="*", markersize=11,
                        color="tab:orange", zorder=5, label="epoch boundary")
        if spec.vline_at_phase_switch:
            switch = phase_switch_x(records, spec.x)
            if switch is not None:
                ax.axvline(switch, linestyle="--", color="grey", linewidth=1.2)
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel("iteration" if spec.x == "iter" else "epoch")
    ax.set_ylabel(spec.y.replace("_", " "))
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(fontsize=9)
    fig.tight_layout()
    if spec.output is not None:
        fig.savefig(spec.output, dpi=130)
    return fig


PRESETS = {
    "fig1a": dict(
        files=[("fig1a_gd.csv", "adaptive GD"), ("fig1a_sgd.csv", "adaptive SGD (cyclic)")],
        y="loss", x="iter", title="Adaptive step size: full-batch vs stochastic"),
    "fig1b": dict(
        files=[("fig1b_hybrid.csv", "fixed-step warm start, then adaptive")],
        y="loss", x="iter", vline_at_phase_switch=True,
        title="Warm start switching to the adaptive rule"),
    "fig2a": dict(
        files=[("fig2a_sgd.csv", "adaptive SGD (cyclic)")],
        y="loss", x="iter", markers="epoch-stars",
        title="Per-iteration loss with epoch boundaries"),
    "fig2b": dict(
        files=[("fig2b_cyclic.csv", "all columns each epoch"),
               ("fig2b_iid.csv", "iid sampled columns")],
        y="loss", x="epoch", title="Cyclic vs iid column sampling"),
    "thm3": dict(
        files=[("thm3_polyrate.csv", "matrix-polynomial step size")],
        y="err_fro", x="iter", title="Rank-deficient target: order caps at one"),
}


def preset_spec(name: str, in_dir: Path, output: Path) -> PlotSpec:
    if name not in PRESETS:
        raise ValueError(f"unknown plot preset {name!r}; choose from {sorted(PRESETS)}")
    cfg = dict(PRESETS[name])
    files = cfg.pop("files")
    inputs = tuple((Path(in_dir) / fname, label) for fname, label in files)
    return PlotSpec(inputs=inputs, output=Path(output), **cfg)
