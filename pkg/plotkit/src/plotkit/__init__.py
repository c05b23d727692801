"""plotkit: render convergence figures from solver trace CSV files."""

from .render import PlotSpec, extract_series, phase_switch_x, preset_spec, render, star_points
from .traces import Record, TraceFormatError, read_trace

__version__ = "0.1.0"
