import subprocess
import sys

import pytest

TRAJ_COLUMNS = (
    "t_s,"
    "p_bx_m,p_by_m,p_bz_m,roll_b_rad,pitch_b_rad,yaw_b_rad,q1_rad,q2_rad,q3_rad,"
    "v_bx_mps,v_by_mps,v_bz_mps,droll_b_radps,dpitch_b_radps,dyaw_b_radps,"
    "dq1_radps,dq2_radps,dq3_radps,"
    "x_e_m,y_e_m,z_e_m,roll_e_rad,pitch_e_rad,yaw_e_rad,"
    "vx_e_mps,vy_e_mps,vz_e_mps,wroll_e_radps,wpitch_e_radps,wyaw_e_radps,"
    "ax_e_mps2,ay_e_mps2,az_e_mps2,aroll_e_radps2,apitch_e_radps2,ayaw_e_radps2,"
    "xt_x_m,xt_y_m,xt_z_m,xt_roll_rad,xt_pitch_rad,xt_yaw_rad,"
    "xto_x_m,xto_y_m,xto_z_m,xto_roll_rad,xto_pitch_rad,xto_yaw_rad,"
    "fx_ext_N,fy_ext_N,fz_ext_N,tx_ext_Nm,ty_ext_Nm,tz_ext_Nm,"
    "fsm_node,gripper_aperture_m,event"
)


def synthetic_trajectory_csv(path, rows=5):
    """Tiny file matching the documented harness trajectory schema."""
    lines = [TRAJ_COLUMNS]
    for k in range(rows):
        t = k * 0.001
        xt = 0.01 * (k + 1)
        values = [t] + [0.0] * 35 + [xt, 0, 0, 0, 0, 0] + [xt * 0.999, 0, 0, 0, 0, 0] \
            + [5.0, 0, 0, 0, 0, 0]
        lines.append(",".join(format(v, ".17g") for v in values) + ",none,0.05,")
    path.write_text("\n".join(lines) + "\n")
    return path


def run_simulator(*args):
    """Drive the simulator through its installed CLI, the external interface."""
    cmd = ["handover-sim", *args]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"{' '.join(cmd)} failed:\n{proc.stdout}\n{proc.stderr}")
    return proc


@pytest.fixture(scope="session")
def short_fig2_logs(tmp_path_factory):
    """Truncated fig2 pair generated by the real simulator CLI."""
    out = tmp_path_factory.mktemp("short-logs")
    run_simulator("run", "fig2-rigid", "--duration", "1.5", "--out", str(out))
    run_simulator("run", "fig2-compliant", "--duration", "1.5", "--out", str(out))
    return (out / "fig2-rigid__rigid.csv", out / "fig2-compliant__compliant.csv")
