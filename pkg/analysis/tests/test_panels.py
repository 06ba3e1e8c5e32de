import matplotlib.pyplot as plt
import pytest

from handover_analysis import AXES, PlotSpec, SchemaMismatchError, build_error_panels, plot_error_panels

from conftest import synthetic_trajectory_csv


def test_twelve_panel_layout(short_fig2_logs):
    spec = PlotSpec(input_csvs=short_fig2_logs, output="unused.png")
    fig = build_error_panels(spec)
    try:
        assert len(fig.axes) == 12  # 6 axes x 2 behaviors, no twins
        grid = fig.axes[0].get_subplotspec().get_gridspec()
        assert grid.nrows == 6 and grid.ncols == 2
        assert fig.axes[0].get_title() == "fig2-rigid__rigid"
        # Each panel overlays the actual and the model-predicted error.
        assert [line.get_label() for line in fig.axes[0].lines] == ["actual", "impedance model"]
    finally:
        plt.close(fig)


def test_force_overlay_adds_twin_axes(short_fig2_logs):
    spec = PlotSpec(input_csvs=short_fig2_logs[:1], output="unused.png",
                    axes=("x",), overlay_force=True)
    fig = build_error_panels(spec)
    try:
        assert len(fig.axes) == 2  # the panel plus its force twin
    finally:
        plt.close(fig)


def test_png_output_is_deterministic(short_fig2_logs, tmp_path):
    spec_a = PlotSpec(input_csvs=short_fig2_logs, output=str(tmp_path / "a.png"))
    spec_b = PlotSpec(input_csvs=short_fig2_logs, output=str(tmp_path / "b.png"))
    a = plot_error_panels(spec_a)
    b = plot_error_panels(spec_b)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_svg_output(short_fig2_logs, tmp_path):
    out = plot_error_panels(PlotSpec(input_csvs=short_fig2_logs[:1],
                                     output=str(tmp_path / "fig.svg"), axes=("x", "yaw")))
    assert out.is_file() and b"<svg" in out.read_bytes()[:300]


def test_inputs_are_not_mutated(short_fig2_logs, tmp_path):
    before = short_fig2_logs[0].read_bytes()
    plot_error_panels(PlotSpec(input_csvs=short_fig2_logs[:1],
                               output=str(tmp_path / "x.png"), axes=("x",)))
    assert short_fig2_logs[0].read_bytes() == before


def test_single_row_csv_plots(tmp_path):
    csv = synthetic_trajectory_csv(tmp_path / "one.csv", rows=1)
    out = plot_error_panels(PlotSpec(input_csvs=(csv,), output=str(tmp_path / "one.png")))
    assert out.is_file()


def test_empty_axes_rejected(short_fig2_logs):
    with pytest.raises(SchemaMismatchError, match="no axes"):
        build_error_panels(PlotSpec(input_csvs=short_fig2_logs, output="x.png", axes=()))


def test_unknown_axis_rejected(short_fig2_logs):
    with pytest.raises(SchemaMismatchError, match="unknown axes"):
        build_error_panels(PlotSpec(input_csvs=short_fig2_logs, output="x.png",
                                    axes=("x", "warp")))


def test_missing_column_names_the_offender(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t_s,xt_x_m\n0.0,0.1\n")
    with pytest.raises(SchemaMismatchError, match="xto_x_m"):
        build_error_panels(PlotSpec(input_csvs=(bad,), output="x.png", axes=("x",)))


def test_missing_file_rejected(tmp_path):
    with pytest.raises(SchemaMismatchError, match="does not exist"):
        build_error_panels(PlotSpec(input_csvs=(tmp_path / "nope.csv",), output="x.png"))


def test_default_axes_cover_all_six():
    assert AXES == ("x", "y", "z", "roll", "pitch", "yaw")
