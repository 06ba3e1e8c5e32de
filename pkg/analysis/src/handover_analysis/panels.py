"""Per-axis error panels: actual vs. model-predicted tracking error.

One column of panels per input CSV (e.g. rigid on the left, compliant on
the right), one row per requested axis, the model-predicted error dashed
over the actual error, and optionally the matching component of the
applied wrench on a twin axis.  Output is deterministic for identical
inputs, modulo whatever metadata the image writer insists on.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

from .errors import SchemaMismatchError

AXES = ("x", "y", "z", "roll", "pitch", "yaw")

_UNITS = {"x": "m", "y": "m", "z": "m", "roll": "rad", "pitch": "rad", "yaw": "rad"}
_FORCE_COLUMNS = {
    "x": "fx_ext_N", "y": "fy_ext_N", "z": "fz_ext_N",
    "roll": "tx_ext_Nm", "pitch": "ty_ext_Nm", "yaw": "tz_ext_Nm",
}


def error_column(axis: str) -> str:
    return f"xt_{axis}_{_UNITS[axis]}"


def oracle_column(axis: str) -> str:
    return f"xto_{axis}_{_UNITS[axis]}"


@dataclass(frozen=True)
class PlotSpec:
    """What to plot: input logs, axes, overlays, output image path."""

    input_csvs: tuple
    output: str
    axes: tuple = AXES
    overlay_oracle: bool = True
    overlay_force: bool = False

    def __post_init__(self):
        object.__setattr__(self, "input_csvs", tuple(Path(p) for p in self.input_csvs))
        object.__setattr__(self, "axes", tuple(self.axes))


def _required_columns(spec: PlotSpec):
    cols = ["t_s"]
    for axis in spec.axes:
        cols.append(error_column(axis))
        if spec.overlay_oracle:
            cols.append(oracle_column(axis))
        if spec.overlay_force:
            cols.append(_FORCE_COLUMNS[axis])
    return cols


def load_trajectory(path, required) -> pd.DataFrame:
    """Read a harness trajectory CSV, checking the needed columns exist."""
    path = Path(path)
    if not path.is_file():
        raise SchemaMismatchError(f"input file does not exist: {path}")
    frame = pd.read_csv(path)
    for col in required:
        if col not in frame.columns:
            raise SchemaMismatchError(f"{path.name}: missing column '{col}'")
    return frame


def _validate_spec(spec: PlotSpec) -> None:
    if not spec.axes:
        raise SchemaMismatchError("no axes requested; pick from " + ", ".join(AXES))
    unknown = [a for a in spec.axes if a not in AXES]
    if unknown:
        raise SchemaMismatchError(f"unknown axes {unknown}; pick from " + ", ".join(AXES))
    if not spec.input_csvs:
        raise SchemaMismatchError("no input CSVs given")


def build_error_panels(spec: PlotSpec):
    """Figure with len(axes) rows x len(input_csvs) columns of panels."""
    _validate_spec(spec)
    required = _required_columns(spec)
    frames = [load_trajectory(p, required) for p in spec.input_csvs]

    n_rows = len(spec.axes)
    n_cols = len(frames)
    fig, axes_grid = plt.subplots(
        n_rows, n_cols, figsize=(5.0 * n_cols, 1.9 * n_rows),
        sharex="col", squeeze=False)
    for col, (path, frame) in enumerate(zip(spec.input_csvs, frames)):
        t = frame["t_s"].to_numpy()
        marker = "o" if len(frame) == 1 else None
        for row, axis in enumerate(spec.axes):
            ax = axes_grid[row][col]
            ax.plot(t, frame[error_column(axis)].to_numpy(),
                    color="tab:blue", lw=1.2, marker=marker, label="actual")
            if spec.overlay_oracle:
                ax.plot(t, frame[oracle_column(axis)].to_numpy(),
                        color="tab:red", lw=1.0, ls="--", marker=marker,
                        label="impedance model")
            ax.set_ylabel(f"{axis} error [{_UNITS[axis]}]", fontsize=8)
            ax.tick_params(labelsize=7)
            ax.grid(True, alpha=0.3)
            if spec.overlay_force:
                twin = ax.twinx()
                unit = "N" if _UNITS[axis] == "m" else "N m"
                twin.plot(t, frame[_FORCE_COLUMNS[axis]].to_numpy(),
                          color="tab:gray", lw=0.8, alpha=0.7, marker=marker)
                twin.set_ylabel(f"force [{unit}]", fontsize=7, color="tab:gray")
                twin.tick_params(labelsize=6, colors="tab:gray")
            if row == 0:
                ax.set_title(path.stem, fontsize=9)
            if row == 0 and col == 0:
                ax.legend(fontsize=7, loc="upper right")
            if row == n_rows - 1:
                ax.set_xlabel("t [s]", fontsize=8)
    fig.tight_layout()
    return fig


def plot_error_panels(spec: PlotSpec) -> Path:
    """Render the panels to spec.output (format from the extension)."""
    fig = build_error_panels(spec)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    metadata = None
    if out.suffix.lower() == ".svg":
        # Strip the creation date so identical inputs give identical bytes.
        metadata = {"Date": None}
        plt.rcParams["svg.hashsalt"] = "handover-analysis"
    fig.savefig(out, dpi=150, metadata=metadata)
    plt.close(fig)
    return out
