"""Kinematics and dynamics of a free-flying base carrying a serial arm.

Generalized coordinates are xi = [base position (3), base roll-pitch-yaw (3),
joint angles (n)].  The inertia matrix is assembled from per-body velocity
Jacobians, the Coriolis matrix from numerically differentiated Christoffel
symbols of the first kind, and time stepping uses a fixed-step classical RK4.
There is no gravity and no potential energy anywhere in the model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spatial
from .errors import SolveFailureError
from .spatial import HomogeneousTransform

# Central-difference step for inertia-matrix partial derivatives (rad / m).
FD_STEP = 1e-6

_EYE3 = np.eye(3)

# Perturbation pattern for the chain-free partials: rows are the center
# state then +/- steps along each attitude angle.
_ATT_PERTURB = np.zeros((7, 3))
for _i in range(3):
    _ATT_PERTURB[1 + 2 * _i, _i] = 1.0
    _ATT_PERTURB[2 + 2 * _i, _i] = -1.0
del _i


@dataclass(frozen=True)
class LinkSpec:
    """One revolute link: inertial data plus its joint placement.

    The joint frame is fixed to the parent by `joint_origin`; `joint_axis`
    is a unit vector in that frame; the link frame coincides with the joint
    frame rotated by the joint angle, and `com_offset` locates the link
    center of mass in the link frame.
    """

    mass: float
    inertia: np.ndarray
    joint_axis: np.ndarray
    joint_origin: HomogeneousTransform
    com_offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "inertia", np.asarray(self.inertia, dtype=float).reshape(3, 3))
        object.__setattr__(self, "joint_axis", np.asarray(self.joint_axis, dtype=float).reshape(3))
        object.__setattr__(self, "com_offset", np.asarray(self.com_offset, dtype=float).reshape(3))
        if not self.mass > 0.0:
            raise ValueError("link mass must be positive")
        _check_spd(self.inertia, "link inertia")
        if abs(np.linalg.norm(self.joint_axis) - 1.0) > 1e-12:
            raise ValueError("joint axis must be unit norm")


@dataclass(frozen=True)
class LinkParameters:
    """Full model parameter set: base body plus the serial chain."""

    base_mass: float
    base_inertia: np.ndarray
    links: tuple[LinkSpec, ...]
    ee_offset: HomogeneousTransform
    base_com: np.ndarray = None  # COM offset in the base frame; zero for normal models

    def __post_init__(self):
        object.__setattr__(self, "base_inertia", np.asarray(self.base_inertia, dtype=float).reshape(3, 3))
        object.__setattr__(self, "links", tuple(self.links))
        com = np.zeros(3) if self.base_com is None else np.asarray(self.base_com, dtype=float).reshape(3)
        object.__setattr__(self, "base_com", com)
        if not self.base_mass > 0.0:
            raise ValueError("base mass must be positive")
        _check_spd(self.base_inertia, "base inertia")
        # Cached derived quantities for the chain-free hot path: base inertia
        # about the frame origin (parallel axis) and the translation block.
        origin_inertia = self.base_inertia + self.base_mass * (
            float(com @ com) * np.eye(3) - np.outer(com, com))
        object.__setattr__(self, "_origin_inertia", origin_inertia)
        object.__setattr__(self, "_trans_block", self.base_mass * np.eye(3))

    @property
    def n_joints(self) -> int:
        return len(self.links)

    @property
    def dof(self) -> int:
        return 6 + len(self.links)


@dataclass(frozen=True)
class GeneralizedState:
    """Configuration xi and its rate, the single source of truth for a run."""

    xi: np.ndarray
    xi_dot: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float).reshape(-1))
        object.__setattr__(self, "xi_dot", np.asarray(self.xi_dot, dtype=float).reshape(-1))
        if self.xi.shape != self.xi_dot.shape:
            raise ValueError("xi and xi_dot must have matching shapes")
        if self.xi.shape[0] < 6:
            raise ValueError("state must have at least the 6 base coordinates")
        if not (np.all(np.isfinite(self.xi)) and np.all(np.isfinite(self.xi_dot))):
            raise ValueError("state entries must be finite")

    @property
    def dof(self) -> int:
        return self.xi.shape[0]


@dataclass(frozen=True)
class EndEffectorState:
    """End-effector pose, rates, and the rest target the controller regulates."""

    x: np.ndarray
    x_dot: np.ndarray
    x_ddot: np.ndarray
    x_desired: np.ndarray

    @property
    def error(self) -> np.ndarray:
        """Position error x_desired - x, recomputed on every access."""
        return self.x_desired - self.x


@dataclass(frozen=True)
class JacobianMatrix:
    """Task Jacobian J (xdot = J xidot) and its time derivative."""

    J: np.ndarray
    J_dot: np.ndarray


@dataclass(frozen=True)
class DynamicsMatrices:
    """Joint-space inertia matrix and Coriolis/centrifugal matrix."""

    inertia: np.ndarray
    coriolis: np.ndarray


@dataclass(frozen=True)
class GeneralizedForce:
    """Generalized control input and external input, both length 6+n."""

    control: np.ndarray
    external: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "control", np.asarray(self.control, dtype=float).reshape(-1))
        object.__setattr__(self, "external", np.asarray(self.external, dtype=float).reshape(-1))
        if not (np.all(np.isfinite(self.control)) and np.all(np.isfinite(self.external))):
            raise ValueError("force entries must be finite")

    @property
    def total(self) -> np.ndarray:
        return self.control + self.external


def _check_spd(M: np.ndarray, what: str) -> None:
    if np.max(np.abs(M - M.T)) > 1e-10:
        raise ValueError(f"{what} must be symmetric")
    if np.min(np.linalg.eigvalsh(M)) <= 0.0:
        raise ValueError(f"{what} must be positive definite")


def _rodrigues(axis: np.ndarray, angle) -> np.ndarray:
    S = spatial.skew(axis)
    a = np.asarray(angle, dtype=float)
    s = np.sin(a)[..., None, None]
    c = np.cos(a)[..., None, None]
    return np.eye(3) + s * S + (1.0 - c) * (S @ S)


def _chain_frames(params: LinkParameters, xi: np.ndarray):
    """World-frame chain quantities, broadcast over leading axes of xi.

    Returns (R_b, p_b, z_axes, p_joints, R_links, p_links, R_e, p_e) where
    z_axes[j] is joint j's axis in the inertial frame and p_joints[j] its
    origin.
    """
    xi = np.asarray(xi, dtype=float)
    p_b = xi[..., 0:3]
    R_b = spatial.rpy_to_rotation(xi[..., 3:6])
    R, p = R_b, p_b
    z_axes, p_joints, R_links, p_links = [], [], [], []
    for j, link in enumerate(params.links):
        origin = link.joint_origin
        p = p + np.einsum("...ij,j->...i", R, origin.translation)
        R = R @ origin.rotation
        z_axes.append(np.einsum("...ij,j->...i", R, link.joint_axis))
        p_joints.append(p)
        R = R @ _rodrigues(link.joint_axis, xi[..., 6 + j])
        R_links.append(R)
        p_links.append(p)
    p_e = p + np.einsum("...ij,j->...i", R, params.ee_offset.translation)
    R_e = R @ params.ee_offset.rotation
    return R_b, p_b, z_axes, p_joints, R_links, p_links, R_e, p_e


def forward_kinematics(params: LinkParameters, state: GeneralizedState) -> HomogeneousTransform:
    """End-effector pose in the inertial frame: base transform composed with the chain."""
    R_b, p_b, _, _, _, _, R_e, p_e = _chain_frames(params, state.xi)
    return HomogeneousTransform(R_e, p_e)


def ee_pose(params: LinkParameters, xi: np.ndarray) -> np.ndarray:
    """End-effector pose as [position, roll-pitch-yaw]. Broadcasts over leading axes."""
    *_, R_e, p_e = _chain_frames(params, xi)
    return np.concatenate([p_e, spatial.rpy_from_rotation(R_e)], axis=-1)


def _single_body_jacobian_and_pose(params: LinkParameters, xi: np.ndarray):
    """Chain-free _jacobian_and_pose: base motion carries the tool rigidly."""
    p_b = xi[..., 0:3]
    R, N_b = spatial.rotation_and_rate_maps(xi[..., 3:6])
    arm = R @ params.ee_offset.translation
    p_e = p_b + arm
    R_e = R @ params.ee_offset.rotation
    rpy_e = spatial.rpy_from_rotation(R_e)
    J = np.zeros(xi.shape[:-1] + (6, 6))
    J[..., 0:3, 0:3] = _EYE3
    J[..., 0:3, 3:6] = -(spatial.skew(arm) @ N_b)
    J[..., 3:6, 3:6] = spatial.rate_map_inverse(rpy_e) @ N_b
    return J, np.concatenate([p_e, rpy_e], axis=-1)


def _jacobian_and_pose(params: LinkParameters, xi: np.ndarray):
    """Task Jacobian mapping xi_dot to [p_e_dot, rpy_e_dot], plus the pose. Broadcasts."""
    xi = np.asarray(xi, dtype=float)
    if not params.links:
        return _single_body_jacobian_and_pose(params, xi)
    dof = params.dof
    batch = xi.shape[:-1]
    R_b, p_b, z_axes, p_joints, _, _, R_e, p_e = _chain_frames(params, xi)
    rpy_e = spatial.rpy_from_rotation(R_e)
    N_b = spatial.euler_rate_map(xi[..., 3:6])
    N_e = spatial.euler_rate_map(rpy_e)
    Jlin = np.zeros(batch + (3, dof))
    Jang = np.zeros(batch + (3, dof))
    Jlin[..., :, 0:3] = _EYE3
    Jlin[..., :, 3:6] = -spatial.skew(p_e - p_b) @ N_b
    Jang[..., :, 3:6] = N_b
    for j in range(params.n_joints):
        Jlin[..., :, 6 + j] = np.cross(z_axes[j], p_e - p_joints[j])
        Jang[..., :, 6 + j] = z_axes[j]
    # Angular rows in Euler-rate coordinates: rpy_e_dot = N_e^{-1} omega_e.
    Jang = np.linalg.solve(N_e, Jang)
    J = np.concatenate([Jlin, Jang], axis=-2)
    pose = np.concatenate([p_e, rpy_e], axis=-1)
    return J, pose


def task_kinematics(params: LinkParameters, state: GeneralizedState):
    """End-effector pose, J, and J_dot from one batched chain evaluation."""
    xi, xi_dot = state.xi, state.xi_dot
    speed = float(np.linalg.norm(xi_dot))
    if speed == 0.0:
        J, pose = _jacobian_and_pose(params, xi)
        return pose, JacobianMatrix(J, np.zeros_like(J))
    d = xi_dot / speed
    h = 1e-6
    triple = np.empty((3, xi.shape[0]))
    triple[0] = xi
    triple[1] = xi + h * d
    triple[2] = xi - h * d
    J, pose = _jacobian_and_pose(params, triple)
    J_dot = (J[1] - J[2]) * (speed / (2.0 * h))
    return pose[0], JacobianMatrix(J[0], J_dot)


def jacobian(params: LinkParameters, state: GeneralizedState) -> JacobianMatrix:
    """Task Jacobian and its time derivative along the current rate.

    J_dot is a central finite difference of J over xi in the direction of
    xi_dot; it vanishes when the system is at rest.
    """
    _, jac = task_kinematics(params, state)
    return jac


def _single_body_mass_from_maps(params: LinkParameters, R: np.ndarray,
                                N: np.ndarray) -> np.ndarray:
    """Inertia matrix of a chain-free model (one rigid body) from its maps.

    Uses the parallel-axis identity m S(Rc)^T S(Rc) + R I R^T =
    R I_origin R^T to avoid forming the skew product explicitly.
    """
    com_w = R @ params.base_com
    coupling = (-params.base_mass) * (spatial.skew(com_w) @ N)
    G = R @ params._origin_inertia @ np.swapaxes(R, -1, -2)
    B = np.empty(R.shape[:-2] + (6, 6))
    B[..., 0:3, 0:3] = params._trans_block
    B[..., 0:3, 3:6] = coupling
    B[..., 3:6, 0:3] = np.swapaxes(coupling, -1, -2)
    B[..., 3:6, 3:6] = np.swapaxes(N, -1, -2) @ G @ N
    return B


def mass_matrix(params: LinkParameters, xi: np.ndarray) -> np.ndarray:
    """Generalized inertia matrix B(xi), symmetric positive definite.

    Assembled as sum over bodies of Jv^T m Jv + Jw^T (R I R^T) Jw, where Jv
    and Jw are each body's COM linear and angular velocity Jacobians with
    respect to xi_dot.  Broadcasts over leading axes of xi.
    """
    xi = np.asarray(xi, dtype=float)
    dof = params.dof
    if not params.links:
        R, N = spatial.rotation_and_rate_maps(xi[..., 3:6])
        return _single_body_mass_from_maps(params, R, N)
    batch = xi.shape[:-1]
    R_b, p_b, z_axes, p_joints, R_links, p_links, _, _ = _chain_frames(params, xi)
    N_b = spatial.euler_rate_map(xi[..., 3:6])

    bodies = []
    base_com_world = p_b
    if np.any(params.base_com):
        base_com_world = p_b + np.einsum("...ij,j->...i", R_b, params.base_com)
    bodies.append((params.base_mass, params.base_inertia, R_b, base_com_world, 0))
    for j, link in enumerate(params.links):
        com = p_links[j] + np.einsum("...ij,j->...i", R_links[j], link.com_offset)
        bodies.append((link.mass, link.inertia, R_links[j], com, j + 1))

    B = np.zeros(batch + (dof, dof))
    for mass, inertia, R, com, n_sup in bodies:
        Jv = np.zeros(batch + (3, dof))
        Jw = np.zeros(batch + (3, dof))
        Jv[..., :, 0:3] = _EYE3
        Jv[..., :, 3:6] = -spatial.skew(com - p_b) @ N_b
        Jw[..., :, 3:6] = N_b
        for j in range(n_sup):
            Jv[..., :, 6 + j] = np.cross(z_axes[j], com - p_joints[j])
            Jw[..., :, 6 + j] = z_axes[j]
        inertia_world = np.einsum("...ij,jk,...lk->...il", R, inertia, R)
        B = B + mass * np.einsum("...ai,...aj->...ij", Jv, Jv)
        B = B + np.einsum("...ai,...ab,...bj->...ij", Jw, inertia_world, Jw)
    return B


def _mass_and_partial_slices(params: LinkParameters, xi: np.ndarray, coords, step: float):
    """B(xi) plus central-difference slices dB/dxi_k for k in coords.

    One batched inertia evaluation covers the center state and every
    perturbation.  Chain-free models perturb only the attitude angles,
    which is all their inertia depends on.
    """
    if not params.links:
        rpy = np.asarray(xi, dtype=float)[3:6] + step * _ATT_PERTURB
        R, N = spatial.rotation_and_rate_maps(rpy)
        stacked = _single_body_mass_from_maps(params, R, N)
        return stacked[0], (stacked[1::2] - stacked[2::2]) / (2.0 * step)
    X = np.repeat(np.asarray(xi, dtype=float)[None, :], 1 + 2 * len(coords), axis=0)
    for i, k in enumerate(coords):
        X[1 + 2 * i, k] += step
        X[2 + 2 * i, k] -= step
    stacked = mass_matrix(params, X)
    return stacked[0], (stacked[1::2] - stacked[2::2]) / (2.0 * step)


def mass_matrix_partials(params: LinkParameters, xi: np.ndarray, coords=None,
                         step: float = FD_STEP) -> np.ndarray:
    """Central-difference partials dB/dxi_k stacked as (dof, dof, dof).

    By default only attitude and joint coordinates are differentiated; B is
    exactly invariant to base translation, so those slices stay zero.
    """
    dof = params.dof
    if coords is None:
        coords = tuple(range(3, dof))
    coords = tuple(coords)
    if not params.links and coords == (3, 4, 5):
        _, slices = _mass_and_partial_slices(params, xi, coords, step)
    else:
        xi = np.asarray(xi, dtype=float)
        X = np.repeat(xi[None, :], 2 * len(coords), axis=0)
        for i, k in enumerate(coords):
            X[2 * i, k] += step
            X[2 * i + 1, k] -= step
        stacked = mass_matrix(params, X)
        slices = (stacked[0::2] - stacked[1::2]) / (2.0 * step)
    dB = np.zeros((dof, dof, dof))
    dB[list(coords)] = slices
    return dB


def _christoffel_from_slices(slices: np.ndarray, xi_dot: np.ndarray, dof: int) -> np.ndarray:
    """C from Christoffel symbols of the first kind of B.

    C_ij = 1/2 sum_k (dB_ij/dxi_k + dB_ik/dxi_j - dB_jk/dxi_i) xi_dot_k,
    which guarantees that Bdot - 2C is skew symmetric.  `slices` holds the
    nonzero derivative matrices for the contiguous coordinates starting at
    index 3 (the inertia matrix never depends on base position).
    """
    d = slices.shape[0]
    cols = slice(3, 3 + d)
    t1 = np.einsum("aij,a->ij", slices, xi_dot[cols])
    M = np.einsum("aik,k->ai", slices, xi_dot)
    t2 = np.zeros((dof, dof))
    t2[:, cols] = M.T
    return 0.5 * (t1 + t2 - t2.T)


def _coriolis_rate_product(slices: np.ndarray, xi_dot: np.ndarray) -> np.ndarray:
    """C(xi, xi_dot) @ xi_dot straight from the derivative slices.

    Expanding the Christoffel form against xi_dot, the first two terms
    coincide and the third collapses to per-coordinate quadratic forms.
    """
    d = slices.shape[0]
    M = np.einsum("aik,k->ai", slices, xi_dot)
    out = xi_dot[3:3 + d] @ M
    out[3:3 + d] -= 0.5 * (M @ xi_dot)
    return out


def coriolis_matrix(params: LinkParameters, xi: np.ndarray, xi_dot: np.ndarray) -> np.ndarray:
    """Coriolis/centrifugal matrix C(xi, xi_dot)."""
    dof = params.dof
    _, slices = _mass_and_partial_slices(params, xi, tuple(range(3, dof)), FD_STEP)
    return _christoffel_from_slices(slices, np.asarray(xi_dot, dtype=float), dof)


def dynamics_matrices(params: LinkParameters, state: GeneralizedState) -> DynamicsMatrices:
    dof = params.dof
    B, slices = _mass_and_partial_slices(params, state.xi, tuple(range(3, dof)), FD_STEP)
    return DynamicsMatrices(B, _christoffel_from_slices(slices, state.xi_dot, dof))


def kinetic_energy(params: LinkParameters, xi: np.ndarray, xi_dot: np.ndarray) -> float:
    return 0.5 * float(xi_dot @ mass_matrix(params, xi) @ xi_dot)


@dataclass(frozen=True)
class StepDiagnostics:
    """Matrices and acceleration evaluated at the pre-step state."""

    inertia: np.ndarray
    coriolis: np.ndarray
    accel: np.ndarray


def step_with_diagnostics(params: LinkParameters, state: GeneralizedState,
                          force: GeneralizedForce, dt: float,
                          locked_joints: bool = False):
    """Advance one RK4 step and report the pre-step dynamics.

    In locked-joint mode the joint rows and columns are removed before the
    solve, joint rates are held at zero, and joint angles pass through
    bit-identical.  The generalized force is held constant over the step.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    dof = params.dof
    if state.dof != dof or force.control.shape[0] != dof or force.external.shape[0] != dof:
        raise ValueError("state/force dimension does not match the model")
    if locked_joints:
        act = np.arange(6)
        deriv = tuple(range(3, 6))
    else:
        act = np.arange(dof)
        deriv = tuple(range(3, dof))
    all_active = act.shape[0] == dof
    tau = force.total
    tau_a = tau if all_active else tau[act]
    template = None if all_active else state.xi.copy()

    def rate(qa: np.ndarray, va: np.ndarray, need_matrices: bool = False):
        if all_active:
            xi, xd = qa, va
        else:
            xi = template.copy()
            xi[act] = qa
            xd = np.zeros(dof)
            xd[act] = va
        B, slices = _mass_and_partial_slices(params, xi, deriv, FD_STEP)
        if need_matrices:
            C = _christoffel_from_slices(slices, xd, dof)
            cxd = C @ xd
        else:
            C = None
            cxd = _coriolis_rate_product(slices, xd)
        if all_active:
            Baa = B
            rhs = tau_a - cxd
        else:
            Baa = B[np.ix_(act, act)]
            rhs = tau_a - cxd[act]
        try:
            acc = np.linalg.solve(Baa, rhs)
        except np.linalg.LinAlgError as exc:
            raise SolveFailureError("inertia matrix is numerically singular") from exc
        return acc, B, C

    qa0 = state.xi[act] if not all_active else state.xi
    va0 = state.xi_dot[act] if not all_active else state.xi_dot
    a1, B0, C0 = rate(qa0, va0, need_matrices=True)
    half = 0.5 * dt
    a2, _, _ = rate(qa0 + half * va0, va0 + half * a1)
    v2 = va0 + half * a1
    a3, _, _ = rate(qa0 + half * v2, va0 + half * a2)
    v3 = va0 + half * a2
    a4, _, _ = rate(qa0 + dt * v3, va0 + dt * a3)
    v4 = va0 + dt * a3

    qa_new = qa0 + (dt / 6.0) * (va0 + 2.0 * v2 + 2.0 * v3 + v4)
    va_new = va0 + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    if all_active:
        xi_new, xd_new, accel0 = qa_new, va_new, a1
    else:
        xi_new = template.copy()
        xi_new[act] = qa_new
        xd_new = np.zeros(dof)
        xd_new[act] = va_new
        accel0 = np.zeros(dof)
        accel0[act] = a1
    return GeneralizedState(xi_new, xd_new), StepDiagnostics(B0, C0, accel0)


def forward_dynamics_step(params: LinkParameters, state: GeneralizedState,
                          force: GeneralizedForce, dt: float,
                          locked_joints: bool = False) -> GeneralizedState:
    """One fixed-step RK4 advance of B xi_ddot + C xi_dot = u + u_ext."""
    new_state, _ = step_with_diagnostics(params, state, force, dt, locked_joints)
    return new_state


def condense_locked(params: LinkParameters, joint_angles: np.ndarray) -> LinkParameters:
    """Equivalent single-body model for a chain frozen at the given angles.

    With every joint locked the whole system is one rigid body; the result
    has the composite mass, COM, and inertia (about the composite COM, in
    the base frame) plus the frozen base-to-end-effector transform.  Its
    6x6 inertia matrix equals the base block of the full model's at the
    same attitude.
    """
    joint_angles = np.asarray(joint_angles, dtype=float).reshape(-1)
    if joint_angles.shape[0] != params.n_joints:
        raise ValueError("joint angle count does not match the model")
    xi = np.zeros(params.dof)
    xi[6:] = joint_angles
    _, _, _, _, R_links, p_links, R_e, p_e = _chain_frames(params, xi)

    masses = [params.base_mass]
    coms = [params.base_com]
    rots = [np.eye(3)]
    inertias = [params.base_inertia]
    for j, link in enumerate(params.links):
        masses.append(link.mass)
        coms.append(p_links[j] + R_links[j] @ link.com_offset)
        rots.append(R_links[j])
        inertias.append(link.inertia)

    m_tot = float(sum(masses))
    com = sum(m * c for m, c in zip(masses, coms)) / m_tot
    I_tot = np.zeros((3, 3))
    for m, c, R, I in zip(masses, coms, rots, inertias):
        d = c - com
        I_tot += R @ I @ R.T + m * (float(d @ d) * np.eye(3) - np.outer(d, d))
    return LinkParameters(
        base_mass=m_tot,
        base_inertia=I_tot,
        links=(),
        ee_offset=HomogeneousTransform(R_e, p_e),
        base_com=com,
    )
