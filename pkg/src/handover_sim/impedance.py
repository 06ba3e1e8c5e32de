"""Cartesian impedance control law, gain presets, and the model-consistency oracle.

The controller regulates the end effector around a rest target (zero desired
velocity and acceleration) with u = J^T (-K_B xdot + K_D xtilde).  Projecting
the joint-space dynamics through the Jacobian gives the Cartesian impedance
model B_x xddot + (C_x + K_B) xdot - K_D xtilde = f_ext, which the oracle
inverts to predict the error the closed loop should exhibit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolveFailureError
from .model import DynamicsMatrices, EndEffectorState, JacobianMatrix

# Near-critical damping against the default model's apparent end-effector
# inertia.  These are configuration defaults, overridable per scenario.
_DAMPING_RATIO = 0.9
_EFFECTIVE_MASS = 10.0      # kg, translational channels
_EFFECTIVE_INERTIA = 2.0    # kg m^2, rotational channels seen at the gripper

_PRESET_STIFFNESS = {
    "rigid": np.array([400.0, 400.0, 400.0, 80.0, 80.0, 80.0]),
    "compliant": np.array([40.0, 40.0, 40.0, 8.0, 8.0, 8.0]),
}


@dataclass(frozen=True)
class GainSet:
    """Stiffness and damping matrices defining one impedance behavior."""

    stiffness: np.ndarray
    damping: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "stiffness", np.asarray(self.stiffness, dtype=float).reshape(6, 6))
        object.__setattr__(self, "damping", np.asarray(self.damping, dtype=float).reshape(6, 6))
        for name, M in (("stiffness", self.stiffness), ("damping", self.damping)):
            if np.max(np.abs(M - M.T)) > 1e-10:
                raise ValueError(f"{name} matrix must be symmetric")
            if np.min(np.linalg.eigvalsh(M)) <= 0.0:
                raise ValueError(f"{name} matrix must be positive definite")


@dataclass(frozen=True)
class CartesianDynamics:
    """Inertia and Coriolis matrices projected to end-effector coordinates."""

    inertia: np.ndarray
    coriolis: np.ndarray


def preset_gains(behavior: str) -> GainSet:
    """Shipped gain presets. 'rigid' is stiff, 'compliant' yields under load."""
    try:
        k_diag = _PRESET_STIFFNESS[behavior]
    except KeyError:
        raise ValueError(f"unknown behavior preset {behavior!r}") from None
    m_eff = np.array([_EFFECTIVE_MASS] * 3 + [_EFFECTIVE_INERTIA] * 3)
    b_diag = 2.0 * _DAMPING_RATIO * np.sqrt(k_diag * m_eff)
    return GainSet(np.diag(k_diag), np.diag(b_diag), label=behavior)


def control_force(gains: GainSet, ee: EndEffectorState, jac: JacobianMatrix) -> np.ndarray:
    """Generalized control input u = J^T (-K_B xdot + K_D xtilde)."""
    task = gains.stiffness @ ee.error - gains.damping @ ee.x_dot
    return jac.J.T @ task


def cartesian_projection(dyn: DynamicsMatrices, jac: JacobianMatrix) -> CartesianDynamics:
    """Project joint-space B and C to the end-effector coordinates.

    B_x = J^-T B J^-1 and C_x = J^-T (C - B J^-1 Jdot) J^-1.  A square
    Jacobian (locked-joint mode) is inverted by a dense solve; the redundant
    case falls back to the right pseudo-inverse.
    """
    J, J_dot = jac.J, jac.J_dot
    if J.shape[0] == J.shape[1]:
        try:
            J_inv = np.linalg.solve(J, np.eye(J.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise SolveFailureError("Jacobian is singular") from exc
        if not np.all(np.isfinite(J_inv)):
            raise SolveFailureError("Jacobian inverse is not finite")
    else:
        J_inv = np.linalg.pinv(J)
    Bx = J_inv.T @ dyn.inertia @ J_inv
    Cx = J_inv.T @ (dyn.coriolis - dyn.inertia @ J_inv @ J_dot) @ J_inv
    return CartesianDynamics(Bx, Cx)


def expected_error_oracle(cart: CartesianDynamics, gains: GainSet,
                          ee: EndEffectorState, f_ext: np.ndarray) -> np.ndarray:
    """Error the impedance model predicts from the observed motion.

    xtilde' = K_D^-1 [B_x xddot + (C_x + K_B) xdot - f_ext].  Validation
    only; the controller never consumes this.
    """
    f_ext = np.asarray(f_ext, dtype=float).reshape(6)
    rhs = cart.inertia @ ee.x_ddot + (cart.coriolis + gains.damping) @ ee.x_dot - f_ext
    try:
        return np.linalg.solve(gains.stiffness, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolveFailureError("stiffness matrix solve failed") from exc
