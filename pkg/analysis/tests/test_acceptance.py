"""Secondary acceptance: the 12-panel figure and the 3x2 outcome pivot.

Consumes the simulator only through its CLI and CSV files.  Run with
`pytest analysis/tests/test_acceptance.py -v -s` for the PASS line.
"""

import matplotlib.pyplot as plt
import pytest

from handover_analysis import PlotSpec, build_error_panels, plot_error_panels, summarize_suite

from conftest import run_simulator
from test_summary import suite_csv


@pytest.fixture(scope="module")
def full_fig2_logs(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig2-logs")
    run_simulator("run", "fig2-rigid", "--out", str(out))
    run_simulator("run", "fig2-compliant", "--out", str(out))
    return (out / "fig2-rigid__rigid.csv", out / "fig2-compliant__compliant.csv")


def test_criterion_9_secondary(full_fig2_logs, tmp_path):
    spec = PlotSpec(input_csvs=full_fig2_logs, output=str(tmp_path / "fig2_panels.png"),
                    overlay_force=True)
    fig = build_error_panels(spec)
    try:
        grid = fig.axes[0].get_subplotspec().get_gridspec()
        assert grid.nrows == 6 and grid.ncols == 2
        primaries = [ax for ax in fig.axes if ax.get_subplotspec() is not None
                     and len(ax.lines) >= 2]
        assert len(primaries) == 12  # 6 rigid panels left, 6 compliant right
        left = [ax for ax in primaries if ax.get_subplotspec().colspan.start == 0]
        right = [ax for ax in primaries if ax.get_subplotspec().colspan.start == 1]
        assert len(left) == 6 and len(right) == 6
        assert left[0].get_title().startswith("fig2-rigid")
        assert right[0].get_title().startswith("fig2-compliant")
        # Actual and model curves visually overlap: bounded sup distance
        # relative to the curve scale on the forced axis.
        x_panel = left[0]
        actual, oracle = x_panel.lines[0], x_panel.lines[1]
        diff = max(abs(a - o) for a, o in zip(actual.get_ydata(), oracle.get_ydata()))
        scale = max(abs(v) for v in actual.get_ydata())
        assert diff <= 1e-3 * scale
    finally:
        plt.close(fig)
    out = plot_error_panels(spec)
    assert out.is_file() and out.stat().st_size > 10_000

    rows = [(s, b, "Success")
            for s in ("r2h-success", "h2r-success", "collaborative")
            for b in ("rigid", "compliant")]
    pivot = summarize_suite(suite_csv(tmp_path / "suite.csv", rows))
    assert pivot.shape == (3, 2)
    assert (pivot.to_numpy() == 0).all()
    print("[PASS] criterion 9: 12-panel fig2 figure (rigid left, compliant right) "
          "with overlapping actual/model curves; 3x2 outcome pivot emitted")
