"""Read-only analysis of handover-sim CSV logs.

Renders the per-axis error panels (actual vs. model-predicted tracking
error, optionally with the applied force) and pivots suite summaries into
the task-by-behavior failure table.  Consumes nothing but the documented
CSV schema; the simulator runs fine without this package.
"""

from .errors import SchemaMismatchError
from .panels import AXES, PlotSpec, build_error_panels, plot_error_panels
from .summary import summarize_suite

__version__ = "0.1.0"

__all__ = [
    "AXES",
    "PlotSpec",
    "SchemaMismatchError",
    "build_error_panels",
    "plot_error_panels",
    "summarize_suite",
    "__version__",
]
