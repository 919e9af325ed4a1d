"""
In-ellipsoid navigation: direction frames from the eigenbasis of P, the
direction programs over the unit ball, the boundary reach along a direction
and the largest step that keeps every body point inside the ellipsoid.
"""
import logging
from dataclasses import dataclass

import numpy as np

from tunnel.exceptions import AgentAtBoundaryTarget, DegenerateEllipsoid, DomainViolation
from tunnel.geometry import evaluate_quadric, global_to_local, rotate_2d, unit
from tunnel.solver import (
    BallProgram, ConeProgram, LinearInequality, LinearLogObjective, QuadraticInequality,
    QuadraticObjective, solve_ball, solve_cone,
)

audit_logger = logging.getLogger('audit_logger')


@dataclass(frozen=True, eq=False)
class DirectionFrame2D:
    z_pu: np.ndarray
    z_ou: np.ndarray
    side_counts: tuple


@dataclass(frozen=True, eq=False)
class DirectionFrame3D:
    z_pu: np.ndarray
    z1_ou: np.ndarray
    z2_ou: np.ndarray
    lambda1: float
    lambda2: float
    lambda_min: float
    s1: int
    s2: int


def _principal(e, goal):
    spectrum = e.spectrum()
    z_p = np.array(spectrum.eigenvectors[0])
    if z_p @ (np.asarray(goal, dtype=float) - e.center()) < 0:
        z_p = -z_p
    return spectrum, z_p


def build_frame_2d(e, pose, obstacles, goal):
    spectrum, z_pu = _principal(e, goal)
    points = getattr(obstacles, 'points', obstacles)
    local_y = global_to_local(pose, np.asarray(points, dtype=float).reshape(-1, 2))[:, 1]
    above, below = int(np.sum(local_y > 0)), int(np.sum(local_y < 0))
    # More obstacles above the local x-axis: steer clockwise, away from them.
    z_ou = rotate_2d(z_pu, -90.0 if above > below else 90.0)
    return DirectionFrame2D(z_pu, z_ou, (above, below))


def _sign_away(projections):
    negative, positive = int(np.sum(projections < 0)), int(np.sum(projections > 0))
    return 1 if negative > positive else -1


def build_frame_3d(e, obstacles, goal):
    spectrum, z_pu = _principal(e, goal)
    axis1 = np.array(spectrum.eigenvectors[1])
    axis2 = np.array(spectrum.eigenvectors[2])
    if np.linalg.det(np.column_stack([z_pu, axis1, axis2])) < 0:
        axis2 = -axis2
    points = np.asarray(getattr(obstacles, 'points', obstacles), dtype=float).reshape(-1, 3)
    collision = points - e.center()
    s1 = _sign_away(collision @ axis1)
    s2 = _sign_away(collision @ axis2)
    return DirectionFrame3D(
        z_pu=z_pu,
        z1_ou=s1 * axis1,
        z2_ou=s2 * axis2,
        lambda1=float(spectrum.eigenvalues[1]),
        lambda2=float(spectrum.eigenvalues[2]),
        lambda_min=spectrum.lambda_min,
        s1=s1,
        s2=s2,
    )


def direction_program_2d(f, beta):
    if not beta > 0:
        raise DomainViolation(f"beta={beta}")
    return BallProgram(LinearLogObjective(f.z_pu, [(beta, f.z_ou)]), 2)


def direction_program_3d(f):
    objective = LinearLogObjective(
        f.z_pu / f.lambda_min,
        [(1.0 / f.lambda1, f.z1_ou), (1.0 / f.lambda2, f.z2_ou)],
    )
    return BallProgram(objective, 3)


def solve_direction_2d(f, beta, settings=None):
    """Unit z_e trading progress along z_pu against clearance along z_ou."""
    solution = solve_ball(direction_program_2d(f, beta), 0.5 * f.z_ou, settings)
    audit_logger.debug(f"2D direction: {solution.status.value} in {solution.iterations} Newton steps")
    return unit(solution.x), solution


def solve_direction_3d(f, settings=None):
    solution = solve_ball(direction_program_3d(f), 0.5 * unit(f.z1_ou + f.z2_ou), settings)
    audit_logger.debug(f"3D direction: {solution.status.value} in {solution.iterations} Newton steps")
    return unit(solution.x), solution


def boundary_reach(e, z_e):
    """Distance from the centre to the boundary Psi = 0 along unit z_e."""
    center = e.center()
    sigma = evaluate_quadric(e, center)
    if sigma >= 0:
        raise DegenerateEllipsoid(f"Psi(center) = {sigma:.3e}")
    z_e = np.asarray(z_e, dtype=float)
    lam = float(z_e @ e.P @ z_e)
    delta = float(2.0 * center @ e.P @ z_e + z_e @ e.q)
    return (-delta + np.sqrt(delta * delta - 4.0 * lam * sigma)) / (2.0 * lam)


def boundary_target(e, z_e, l_e):
    return e.center() + l_e * np.asarray(z_e, dtype=float)


def motion_direction(z_a, e, z_e, l_e):
    difference = boundary_target(e, z_e, l_e) - np.asarray(z_a, dtype=float)
    distance = np.linalg.norm(difference)
    if distance < 1e-12:
        raise AgentAtBoundaryTarget(f"|z_b - z_a| = {distance:.1e}")
    return difference / distance


def max_safe_step(e, offsets, z_a, z_n):
    """
    Largest delta >= 0 with Psi(z_a + D_i + delta * z_n) <= -1 for every offset D_i.

    Each constraint is the scalar quadratic lam * delta^2 + b_i * delta + c_i <= 0
    with lam = z_n'P z_n; delta_2 is the smallest positive root.
    """
    z_n = np.asarray(z_n, dtype=float)
    body = np.asarray(z_a, dtype=float) + np.atleast_2d(np.asarray(offsets, dtype=float))
    lam = float(z_n @ e.P @ z_n)
    b = 2.0 * body @ e.P @ z_n + e.q @ z_n
    # Points already at (or numerically past) the margin can only stay put.
    c = np.minimum(e.values(body) + 1.0, 0.0)
    root = np.sqrt(b * b - 4.0 * lam * c)
    with np.errstate(divide='ignore', invalid='ignore'):
        roots = np.where(
            b >= 0,
            np.where(b + root > 0, -2.0 * c / (b + root), 0.0),
            (-b + root) / (2.0 * lam),
        )
    return float(max(np.min(roots), 0.0))


def step_length(e, offsets, z_a, z_n, delta1):
    return min(delta1, max_safe_step(e, offsets, z_a, z_n))


def step_length_program(e, offsets, z_a, z_n):
    """The step-length problem as a one-variable cone program: maximise delta subject to containment."""
    z_n = np.asarray(z_n, dtype=float)
    body = np.asarray(z_a, dtype=float) + np.atleast_2d(np.asarray(offsets, dtype=float))
    lam = float(z_n @ e.P @ z_n)
    quadratics = [
        QuadraticInequality(np.array([[lam]]), np.array([2.0 * point @ e.P @ z_n + e.q @ z_n]),
                            -(evaluate_quadric(e, point) + 1.0))
        for point in body
    ]
    return ConeProgram(
        objective=QuadraticObjective(np.zeros((1, 1)), np.array([-1.0])),
        n=1,
        linear_inequalities=[LinearInequality(np.array([-1.0]), 0.0)],
        quadratic_inequalities=quadratics,
    )


def solve_step_length_program(e, offsets, z_a, z_n, settings=None):
    return solve_cone(step_length_program(e, offsets, z_a, z_n), settings=settings)
