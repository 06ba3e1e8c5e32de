"""Pivot a suite summary CSV into the task-by-behavior failure table."""

from __future__ import annotations

from pathlib import Path

import pandas as pd

from .errors import SchemaMismatchError

_REQUIRED = ("scenario", "behavior", "outcome")


def summarize_suite(csv_path) -> pd.DataFrame:
    """Failure counts pivoted scenario x behavior.

    A run counts as failed whenever its outcome is anything but Success,
    which folds error rows in with failures the way a flight log would.
    """
    path = Path(csv_path)
    if not path.is_file():
        raise SchemaMismatchError(f"suite summary does not exist: {path}")
    frame = pd.read_csv(path)
    for col in _REQUIRED:
        if col not in frame.columns:
            raise SchemaMismatchError(f"{path.name}: missing column '{col}'")
    frame = frame.assign(failed=(frame["outcome"] != "Success").astype(int))
    pivot = frame.pivot_table(index="scenario", columns="behavior",
                              values="failed", aggfunc="sum", fill_value=0)
    pivot.index.name = "task"
    pivot.columns.name = "behavior"
    return pivot.sort_index()


def format_table(pivot: pd.DataFrame) -> str:
    header = ["failed handovers"] + [str(c) for c in pivot.columns]
    widths = [max(len(header[0]), max((len(str(i)) for i in pivot.index), default=0))]
    widths += [max(len(h), 6) for h in header[1:]]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for task, row in pivot.iterrows():
        cells = [str(task).ljust(widths[0])]
        cells += [str(int(v)).ljust(w) for v, w in zip(row, widths[1:])]
        lines.append("  ".join(cells))
    return "\n".join(lines)


def write_summary_csv(pivot: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pivot.to_csv(path)
    return path
