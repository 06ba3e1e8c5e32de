import pytest

from handover_analysis import SchemaMismatchError, summarize_suite
from handover_analysis.summary import format_table, write_summary_csv

HEADER = ("scenario,behavior,outcome,attempts,transfer_duration_s,"
          "peak_xt_x_m,peak_xt_y_m,peak_xt_z_m,peak_xt_roll_rad,"
          "peak_xt_pitch_rad,peak_xt_yaw_rad,steps,final_t_s,early_termination,detail")


def suite_csv(path, rows):
    lines = [HEADER]
    for scenario, behavior, outcome in rows:
        lines.append(f"{scenario},{behavior},{outcome},1,3.0,0,0,0,0,0,0,100,0.1,true,")
    path.write_text("\n".join(lines) + "\n")
    return path


CANONICAL = [
    ("r2h-success", "rigid", "Success"),
    ("r2h-success", "compliant", "Failed"),
    ("h2r-success", "rigid", "Success"),
    ("h2r-success", "compliant", "Success"),
    ("collaborative", "rigid", "Failed"),
    ("collaborative", "compliant", "Error"),
]


def test_three_by_two_pivot(tmp_path):
    pivot = summarize_suite(suite_csv(tmp_path / "suite.csv", CANONICAL))
    assert pivot.shape == (3, 2)
    assert list(pivot.columns) == ["compliant", "rigid"]
    assert pivot.loc["r2h-success", "compliant"] == 1
    assert pivot.loc["r2h-success", "rigid"] == 0
    assert pivot.loc["collaborative", "rigid"] == 1
    # Error rows count as failures in the tally.
    assert pivot.loc["collaborative", "compliant"] == 1


def test_all_success_gives_zeros(tmp_path):
    rows = [(s, b, "Success") for s, b, _ in CANONICAL]
    pivot = summarize_suite(suite_csv(tmp_path / "suite.csv", rows))
    assert (pivot.to_numpy() == 0).all()


def test_missing_column_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("scenario,behavior\nfoo,rigid\n")
    with pytest.raises(SchemaMismatchError, match="outcome"):
        summarize_suite(bad)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(SchemaMismatchError, match="does not exist"):
        summarize_suite(tmp_path / "nope.csv")


def test_format_table_and_csv_round_trip(tmp_path):
    pivot = summarize_suite(suite_csv(tmp_path / "suite.csv", CANONICAL))
    table = format_table(pivot)
    assert "failed handovers" in table.splitlines()[0]
    assert any(line.startswith("collaborative") for line in table.splitlines())
    out = write_summary_csv(pivot, tmp_path / "pivot.csv")
    text = out.read_text()
    assert text.splitlines()[0] == "task,compliant,rigid"
    assert len(text.splitlines()) == 4
