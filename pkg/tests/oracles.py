"""Independent reference implementations used only to check the library.

Everything here is written the dumb, obvious way (explicit per-axis
matrices, 4x4 chain products, finite differences of body poses) so the
tests never share a code path with the implementation they check.
"""

import numpy as np


def rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rpy_product(roll, pitch, yaw):
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def axis_angle(axis, angle):
    x, y, z = np.asarray(axis, dtype=float)
    K = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def unskew(W):
    return np.array([W[2, 1], W[0, 2], W[1, 0]])


def naive_body_frames(params, xi):
    """4x4 transforms of every link frame plus the end effector, one product at a time."""
    T = np.eye(4)
    T[:3, :3] = rpy_product(xi[3], xi[4], xi[5])
    T[:3, 3] = xi[:3]
    frames = []
    for j, link in enumerate(params.links):
        T = T @ link.joint_origin.as_matrix()
        A = np.eye(4)
        A[:3, :3] = axis_angle(link.joint_axis, xi[6 + j])
        T = T @ A
        frames.append(T.copy())
    T_ee = T @ params.ee_offset.as_matrix()
    return frames, T_ee


def _body_coms_and_rots(params, xi):
    frames, _ = naive_body_frames(params, xi)
    R_b = rpy_product(xi[3], xi[4], xi[5])
    coms = [xi[:3] + R_b @ params.base_com]
    rots = [R_b]
    for frame, link in zip(frames, params.links):
        coms.append(frame[:3, :3] @ link.com_offset + frame[:3, 3])
        rots.append(frame[:3, :3])
    return coms, rots


def kinetic_energy_fd(params, xi, xi_dot, h=1e-6):
    """Total kinetic energy from per-body twists, by finite differences.

    Each body's COM velocity and angular velocity come from differencing
    its pose along the motion, never from the library's Jacobians.
    """
    coms_p, rots_p = _body_coms_and_rots(params, xi + h * xi_dot)
    coms_m, rots_m = _body_coms_and_rots(params, xi - h * xi_dot)
    coms_0, rots_0 = _body_coms_and_rots(params, xi)
    masses = [params.base_mass] + [link.mass for link in params.links]
    inertias = [params.base_inertia] + [link.inertia for link in params.links]
    energy = 0.0
    for k, (m, I) in enumerate(zip(masses, inertias)):
        v = (coms_p[k] - coms_m[k]) / (2.0 * h)
        R_dot = (rots_p[k] - rots_m[k]) / (2.0 * h)
        W = R_dot @ rots_0[k].T
        omega = unskew(0.5 * (W - W.T))
        I_world = rots_0[k] @ I @ rots_0[k].T
        energy += 0.5 * m * float(v @ v) + 0.5 * float(omega @ I_world @ omega)
    return energy
