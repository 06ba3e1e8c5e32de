"""Run loop: wires model, controller, FSM, and hand agent; logs CSV records.

Step order per simulated step: evaluate the hand script, map its wrench to
generalized coordinates, compute the control input (impedance law when IC is
active, a critically damped transit regulator while moving between
waypoints), advance the dynamics one RK4 step, update gripper and object
bookkeeping, step the FSM, and append one trajectory record.  Everything is
deterministic: identical configs produce byte-identical output files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from . import agent, fsm, model, spatial
from .config import RunDirection, ScenarioConfig
from .errors import ConfigError, IllegalTransitionError
from .impedance import GainSet, cartesian_projection, control_force, expected_error_oracle
from .model import DynamicsMatrices, EndEffectorState, GeneralizedForce, GeneralizedState

# Waypoint arrival tolerances for the transit regulator.
_POS_TOL = 0.005      # m
_ATT_TOL = 0.01       # rad
_VEL_TOL = 0.005      # m/s
_RATE_TOL = 0.01      # rad/s
_TRANSIT_OMEGA = 2.0  # rad/s, transit regulator bandwidth

OUTCOME_SUCCESS = "Success"
OUTCOME_FAILED = "Failed"
OUTCOME_ERROR = "Error"


@dataclass(frozen=True)
class TrajectoryRecord:
    """One logged timestep."""

    t: float
    xi: np.ndarray
    xi_dot: np.ndarray
    x: np.ndarray
    x_dot: np.ndarray
    x_ddot: np.ndarray
    x_tilde: np.ndarray
    x_tilde_oracle: np.ndarray  # None while impedance control is inactive
    f_ext: np.ndarray
    fsm_node: str
    gripper_aperture: float
    event: str


@dataclass(frozen=True)
class RunSummary:
    scenario: str
    behavior: str
    outcome: str
    attempts: int
    transfer_duration: float
    peak_error: np.ndarray
    steps: int
    final_t: float
    early_termination: bool
    detail: str = ""


def _direction_legs(direction: RunDirection):
    if direction is RunDirection.ROBOT_TO_HUMAN:
        return [fsm.Direction.ROBOT_TO_HUMAN]
    if direction is RunDirection.HUMAN_TO_ROBOT:
        return [fsm.Direction.HUMAN_TO_ROBOT]
    if direction is RunDirection.COLLABORATIVE:
        return [fsm.Direction.ROBOT_TO_HUMAN, fsm.Direction.HUMAN_TO_ROBOT]
    return []


class _Simulation:
    """Mutable state for one scenario run."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        q0 = cfg.initial_xi[6:]
        self.q_frozen = q0.copy()
        composite = model.condense_locked(cfg.params, q0)
        if cfg.locked_joints:
            # Frozen arm: simulate the exact equivalent single rigid body.
            self.sim_params = composite
            sim_xi0 = cfg.initial_xi[:6].copy()
        else:
            self.sim_params = cfg.params
            sim_xi0 = cfg.initial_xi.copy()
        self.state = GeneralizedState(sim_xi0, np.zeros_like(sim_xi0))
        self.base_to_ee = model.forward_kinematics(
            cfg.params, GeneralizedState(np.concatenate([np.zeros(6), q0]),
                                         np.zeros(cfg.params.dof)))

        m_tot = composite.base_mass
        inertia_diag = np.diag(composite.base_inertia)
        self.kp = np.concatenate([np.full(3, m_tot), inertia_diag]) * _TRANSIT_OMEGA ** 2
        self.kd = 2.0 * np.concatenate([np.full(3, m_tot), inertia_diag]) * _TRANSIT_OMEGA

        self.gripper = fsm.GripperModel(
            max_aperture=cfg.gripper.max_aperture,
            rate=cfg.gripper.rate,
            capture_radius=cfg.gripper.capture_radius,
            object_width=cfg.gripper.object_width,
        )
        self.ic_active = False
        self.transit_goal = None       # base-coordinate 6-vector
        self.hand_pose = cfg.hand_script.start_pose.copy()

        legs = _direction_legs(cfg.direction)
        self.legs = legs
        self.leg_index = 0
        self.fsm_state = fsm.initial_state(legs[0]) if legs else None
        self.attempts_completed = 0

        # Object bookkeeping: position plus who holds it.
        if cfg.object_pose is not None:
            self.object_pos = cfg.object_pose[:3].copy()
            self.possession = "free"
        elif legs and legs[0] is fsm.Direction.HUMAN_TO_ROBOT:
            self.object_pos = self.hand_pose[:3].copy()
            self.possession = "hand"
        else:
            self.object_pos = None
            self.possession = None
        if legs and legs[0] is fsm.Direction.HUMAN_TO_ROBOT and cfg.object_pose is None:
            pass

        x0 = model.ee_pose(self.sim_params, self.state.xi)
        if cfg.direction is RunDirection.IMPEDANCE_VALIDATION:
            self.ic_active = True
            offset = cfg.desired_offset if cfg.desired_offset is not None else np.zeros(6)
            self.x_desired = x0 + offset
        else:
            self.x_desired = x0.copy()
        self.close_pending = False

    # -- geometry helpers -------------------------------------------------

    def base_goal_from_ee(self, ee_goal: np.ndarray) -> np.ndarray:
        goal = spatial.HomogeneousTransform.from_rpy(ee_goal[:3], ee_goal[3:])
        base = spatial.compose(goal, self.base_to_ee.inverse())
        return np.concatenate([base.translation, spatial.rpy_from_rotation(base.rotation)])

    def full_xi(self) -> np.ndarray:
        if self.cfg.locked_joints:
            return np.concatenate([self.state.xi, self.q_frozen])
        return self.state.xi.copy()

    def full_xi_dot(self) -> np.ndarray:
        if self.cfg.locked_joints:
            return np.concatenate([self.state.xi_dot, np.zeros_like(self.q_frozen)])
        return self.state.xi_dot.copy()

    def at_waypoint(self) -> bool:
        if self.transit_goal is None:
            return False
        xi, xd = self.state.xi, self.state.xi_dot
        err = self.transit_goal - xi[:6]
        return (np.linalg.norm(err[:3]) < _POS_TOL
                and np.linalg.norm(err[3:6]) < _ATT_TOL
                and np.linalg.norm(xd[:3]) < _VEL_TOL
                and np.linalg.norm(xd[3:6]) < _RATE_TOL)

    def transit_force(self) -> np.ndarray:
        u = np.zeros(self.sim_params.dof)
        xi, xd = self.state.xi, self.state.xi_dot
        u[:6] = self.kp * (self.transit_goal - xi[:6]) - self.kd * xd[:6]
        if not self.cfg.locked_joints and self.sim_params.n_joints:
            # Light hold on the arm while the base transits in full-joint mode.
            u[6:] = 1.0 * (self.q_frozen - xi[6:]) - 0.5 * xd[6:]
        return u


def run_scenario(config: ScenarioConfig):
    """Run one scenario; returns (records, summary).

    Terminates early once the FSM finishes every leg (Success) or aborts
    after exhausting retries (Failed); otherwise runs the full horizon,
    which counts as Failed for handover directions.
    """
    sim = _Simulation(config)
    cfg = config
    records: list[TrajectoryRecord] = []
    steps = max(1, math.ceil(cfg.duration / cfg.dt))
    prev_t = None
    transfer_duration = 0.0
    done_all = False
    aborted = False

    for k in range(steps):
        t = k * cfg.dt
        events: list[str] = []

        # Kinematics snapshot at t.
        x, jac = model.task_kinematics(sim.sim_params, sim.state)
        x_dot = jac.J @ sim.state.xi_dot

        # Hand agent: pose, wrench, scripted possession changes.
        sample = agent.run_hand_script(cfg.hand_script, t,
                                       SimpleNamespace(ee_pose=x), prev_t)
        prev_t = t
        sim.hand_pose = sample.hand_pose
        for ev in sample.possession_events:
            if ev == agent.ACTION_PLACE_OBJECT:
                if sim.possession == "hand":
                    sim.possession = "free"
                    events.append("possession:hand->free")
                events.append("place_object")
            else:
                if sim.possession == "free":
                    sim.possession = "hand"
                    events.append("possession:free->hand")
                events.append("take_object")

        # Object tracks whoever holds it.
        if sim.possession == "robot":
            sim.object_pos = x[:3].copy()
        elif sim.possession == "hand":
            sim.object_pos = sim.hand_pose[:3].copy()

        f_ext = sample.wrench_direct.copy()
        if sim.possession == "robot":
            f_ext += sample.wrench_through_grasp

        # Control input for this step (held over the RK4 stages).
        x_desired = sim.x_desired.copy()
        ee = EndEffectorState(x=x, x_dot=x_dot, x_ddot=np.zeros(6), x_desired=x_desired)
        if sim.ic_active:
            u = control_force(cfg.gains, ee, jac)
        elif sim.transit_goal is not None:
            u = sim.transit_force()
        else:
            u = np.zeros(sim.sim_params.dof)
        u_ext = jac.J.T @ f_ext
        force = GeneralizedForce(u, u_ext)

        new_state, diag = model.step_with_diagnostics(
            sim.sim_params, sim.state, force, cfg.dt, locked_joints=False)
        x_ddot = jac.J @ diag.accel + jac.J_dot @ sim.state.xi_dot

        x_tilde = x_desired - x
        oracle = None
        if sim.ic_active:
            cart = cartesian_projection(DynamicsMatrices(diag.inertia, diag.coriolis), jac)
            ee_full = EndEffectorState(x=x, x_dot=x_dot, x_ddot=x_ddot, x_desired=x_desired)
            oracle = expected_error_oracle(cart, cfg.gains, ee_full, f_ext)
            transfer_duration += cfg.dt

        # Gripper and attachment bookkeeping.
        object_near = (sim.object_pos is not None
                       and float(np.linalg.norm(sim.object_pos - x[:3])) <= cfg.gripper.capture_radius)
        settled = sim.gripper.update(cfg.dt, object_near)
        if sim.close_pending and sim.gripper.commanded == "close" and settled:
            sim.close_pending = False
            if (object_near and sim.possession in ("free", "hand")
                    and sim.gripper.aperture >= cfg.gripper.object_width - 1e-9):
                events.append(f"possession:{sim.possession}->robot")
                sim.possession = "robot"

        # FSM step.
        if sim.fsm_state is not None and sim.fsm_state.node is not fsm.FsmNode.DONE:
            gstate = fsm.GripperState(
                aperture=sim.gripper.aperture,
                object_attached=(sim.possession == "robot"),
                beta_threshold=cfg.beta,
                commanded=sim.gripper.commanded,
            )
            obs = fsm.Observation(
                ee_velocity_norm=float(np.linalg.norm(x_dot[:3])),
                gripper=gstate,
                robot_at_waypoint=sim.at_waypoint(),
                ic_active=sim.ic_active,
                gripper_settled=settled,
            )
            prev_node = sim.fsm_state.node
            sim.fsm_state, commands = fsm.step_fsm(
                sim.fsm_state, obs, cfg.trigger, cfg.max_retries)
            if sim.fsm_state.node is not prev_node:
                events.append(f"enter:{sim.fsm_state.node.value}")
            for cmd in commands:
                events.append(f"cmd:{cmd}")
                if cmd == fsm.CMD_OPEN_GRIPPER:
                    sim.gripper.command("open")
                elif cmd == fsm.CMD_CLOSE_GRIPPER:
                    sim.gripper.command("close")
                    sim.close_pending = True
                elif cmd == fsm.CMD_GOTO_OBJECT:
                    sim.transit_goal = sim.base_goal_from_ee(cfg.object_pose)
                    sim.x_desired = cfg.object_pose.copy()
                elif cmd == fsm.CMD_GOTO_HANDOVER:
                    sim.transit_goal = sim.base_goal_from_ee(cfg.handover_pose)
                    sim.x_desired = cfg.handover_pose.copy()
                elif cmd == fsm.CMD_GOTO_RETRACT:
                    sim.transit_goal = sim.base_goal_from_ee(cfg.retract_pose)
                    sim.x_desired = cfg.retract_pose.copy()
                elif cmd == fsm.CMD_IC_ON:
                    sim.ic_active = True
                    sim.transit_goal = None
                    sim.x_desired = cfg.handover_pose.copy()
                elif cmd == fsm.CMD_IC_OFF:
                    sim.ic_active = False
                elif cmd == fsm.CMD_SIGNAL_READY:
                    events.append(fsm.signal_user("ready"))
                elif cmd == fsm.CMD_SIGNAL_FAILURE:
                    events.append(fsm.signal_user("failure")
                                  + f":attempt={sim.fsm_state.attempt_count}")
                elif cmd == fsm.CMD_RELEASE_OBJECT:
                    if sim.possession != "robot":
                        raise IllegalTransitionError("release fired without the object attached")
                    sim.possession = "hand"
                    events.append("release")
                    events.append("possession:robot->hand")
                elif cmd == fsm.CMD_ABORT:
                    aborted = True
                    events.append("abort")
            if sim.fsm_state.node is fsm.FsmNode.DONE:
                sim.attempts_completed += sim.fsm_state.attempt_count
                if sim.leg_index + 1 < len(sim.legs):
                    sim.leg_index += 1
                    direction = sim.legs[sim.leg_index]
                    sim.fsm_state = fsm.initial_state(direction)
                    events.append(f"leg:{direction.value}")
                else:
                    done_all = True

        records.append(TrajectoryRecord(
            t=t,
            xi=sim.full_xi(),
            xi_dot=sim.full_xi_dot(),
            x=x,
            x_dot=x_dot,
            x_ddot=x_ddot,
            x_tilde=x_tilde,
            x_tilde_oracle=oracle,
            f_ext=f_ext,
            fsm_node=(sim.fsm_state.node.value if sim.fsm_state is not None else "none"),
            gripper_aperture=sim.gripper.aperture,
            event=";".join(events),
        ))

        if done_all or aborted:
            break
        sim.state = new_state

    if cfg.direction is RunDirection.IMPEDANCE_VALIDATION:
        outcome = OUTCOME_SUCCESS
    else:
        outcome = OUTCOME_SUCCESS if done_all else OUTCOME_FAILED
    attempts = sim.attempts_completed
    if sim.fsm_state is not None and sim.fsm_state.node is not fsm.FsmNode.DONE:
        attempts += sim.fsm_state.attempt_count
    peak = np.max(np.abs(np.stack([r.x_tilde for r in records])), axis=0)
    summary = RunSummary(
        scenario=cfg.name,
        behavior=cfg.behavior,
        outcome=outcome,
        attempts=attempts,
        transfer_duration=transfer_duration,
        peak_error=peak,
        steps=len(records),
        final_t=records[-1].t,
        early_termination=len(records) < steps,
    )
    return records, summary


# -- CSV output -----------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def trajectory_columns(n_joints: int) -> list:
    axes = ["x", "y", "z", "roll", "pitch", "yaw"]
    cols = ["t_s"]
    cols += ["p_bx_m", "p_by_m", "p_bz_m", "roll_b_rad", "pitch_b_rad", "yaw_b_rad"]
    cols += [f"q{j + 1}_rad" for j in range(n_joints)]
    cols += ["v_bx_mps", "v_by_mps", "v_bz_mps",
             "droll_b_radps", "dpitch_b_radps", "dyaw_b_radps"]
    cols += [f"dq{j + 1}_radps" for j in range(n_joints)]
    cols += ["x_e_m", "y_e_m", "z_e_m", "roll_e_rad", "pitch_e_rad", "yaw_e_rad"]
    cols += ["vx_e_mps", "vy_e_mps", "vz_e_mps",
             "wroll_e_radps", "wpitch_e_radps", "wyaw_e_radps"]
    cols += ["ax_e_mps2", "ay_e_mps2", "az_e_mps2",
             "aroll_e_radps2", "apitch_e_radps2", "ayaw_e_radps2"]
    cols += [f"xt_{a}_{'m' if i < 3 else 'rad'}" for i, a in enumerate(axes)]
    cols += [f"xto_{a}_{'m' if i < 3 else 'rad'}" for i, a in enumerate(axes)]
    cols += ["fx_ext_N", "fy_ext_N", "fz_ext_N", "tx_ext_Nm", "ty_ext_Nm", "tz_ext_Nm"]
    cols += ["fsm_node", "gripper_aperture_m", "event"]
    return cols


def trajectory_csv_lines(records, n_joints: int):
    yield ",".join(trajectory_columns(n_joints))
    for r in records:
        parts = [_fmt(r.t)]
        parts += [_fmt(v) for v in r.xi]
        parts += [_fmt(v) for v in r.xi_dot]
        parts += [_fmt(v) for v in r.x]
        parts += [_fmt(v) for v in r.x_dot]
        parts += [_fmt(v) for v in r.x_ddot]
        parts += [_fmt(v) for v in r.x_tilde]
        if r.x_tilde_oracle is None:
            parts += [""] * 6
        else:
            parts += [_fmt(v) for v in r.x_tilde_oracle]
        parts += [_fmt(v) for v in r.f_ext]
        parts += [r.fsm_node, _fmt(r.gripper_aperture), r.event]
        yield ",".join(parts)


def write_trajectory_csv(records, n_joints: int, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in trajectory_csv_lines(records, n_joints):
            fh.write(line + "\n")


_SUMMARY_COLUMNS = [
    "scenario", "behavior", "outcome", "attempts", "transfer_duration_s",
    "peak_xt_x_m", "peak_xt_y_m", "peak_xt_z_m",
    "peak_xt_roll_rad", "peak_xt_pitch_rad", "peak_xt_yaw_rad",
    "steps", "final_t_s", "early_termination", "detail",
]


def summary_csv_lines(summaries):
    yield ",".join(_SUMMARY_COLUMNS)
    for s in summaries:
        parts = [s.scenario, s.behavior, s.outcome, str(s.attempts),
                 _fmt(s.transfer_duration)]
        parts += [_fmt(v) for v in s.peak_error]
        parts += [str(s.steps), _fmt(s.final_t),
                  "true" if s.early_termination else "false", s.detail]
        yield ",".join(parts)


def write_summary_csv(summaries, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in summary_csv_lines(summaries):
            fh.write(line + "\n")


def summary_table(summaries) -> str:
    """Human-readable suite table."""
    header = f"{'scenario':<24} {'behavior':<10} {'outcome':<8} {'attempts':>8} {'peak |xt|':>12}"
    lines = [header, "-" * len(header)]
    for s in summaries:
        peak = float(np.max(s.peak_error)) if np.ndim(s.peak_error) else 0.0
        lines.append(f"{s.scenario:<24} {s.behavior:<10} {s.outcome:<8} "
                     f"{s.attempts:>8d} {peak:>12.5g}")
    return "\n".join(lines)


def run_suite(configs, out_dir=None):
    """Run each scenario; failures are recorded per row, never fatal.

    Returns the list of RunSummary rows.  When out_dir is given, writes one
    trajectory CSV per run plus suite_summary.csv.
    """
    configs = list(configs)
    if not configs:
        raise ConfigError("suite requires at least one scenario config")
    summaries = []
    for cfg in configs:
        try:
            records, summary = run_scenario(cfg)
        except Exception as exc:  # noqa: BLE001 - per-row error reporting is the contract
            summaries.append(RunSummary(
                scenario=cfg.name, behavior=cfg.behavior, outcome=OUTCOME_ERROR,
                attempts=0, transfer_duration=0.0, peak_error=np.zeros(6),
                steps=0, final_t=0.0, early_termination=True,
                detail=f"{type(exc).__name__}: {exc}",
            ))
            continue
        summaries.append(summary)
        if out_dir is not None:
            write_trajectory_csv(records, cfg.params.n_joints,
                                 Path(out_dir) / f"{cfg.name}__{cfg.behavior}.csv")
    if out_dir is not None:
        write_summary_csv(summaries, Path(out_dir) / "suite_summary.csv")
    return summaries
