"""
Brute-force references the planner's closed forms and solvers are checked against.
"""
import numpy as np

from tunnel.geometry import Ellipsoid


def unit_disk():
    return Ellipsoid(np.eye(2), np.zeros(2), -1.0)


def bisection(f, lo, hi, tol=1e-13):
    """Root of f on [lo, hi] with f(lo) < 0 <= f(hi)."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def boundary_reach_bisection(e, z_e):
    center = e.center()
    f = lambda t: e(center + t * z_e)
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
    return bisection(f, 0.0, hi)


def line_search_step(e, body, z_n, step=1e-5, limit=20.0):
    """Largest multiple of `step` keeping every body point at Psi <= -1."""
    feasible = 0.0
    # Coarse-to-fine scan so the dense step only runs near the answer.
    for spacing in (1e-1, 1e-2, 1e-3, step):
        d = feasible
        while d + spacing < limit and np.max(e.values(body + (d + spacing) * z_n)) <= -1.0:
            d += spacing
        feasible = d
    return feasible


def direction_objective_2d(z, z_pu, z_ou, beta):
    inner = z @ z_ou
    return np.where(inner > 0, -(z @ z_pu) - beta * np.log(np.where(inner > 0, inner, 1.0)), np.inf)


def circle(samples):
    angles = 2.0 * np.pi * np.arange(samples) / samples
    return np.column_stack([np.cos(angles), np.sin(angles)])


def grid_direction_2d(z_pu, z_ou, beta, samples=100000):
    points = circle(samples)
    values = direction_objective_2d(points, z_pu, z_ou, beta)
    best = int(np.argmin(values))
    return points[best], float(values[best])


def fibonacci_sphere(samples):
    i = np.arange(samples) + 0.5
    phi = np.arccos(1.0 - 2.0 * i / samples)
    theta = np.pi * (1.0 + 5.0 ** 0.5) * i
    return np.column_stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)])


def direction_objective_3d(z, frame):
    a = z @ frame.z1_ou
    b = z @ frame.z2_ou
    inside = (a > 0) & (b > 0)
    safe_a = np.where(inside, a, 1.0)
    safe_b = np.where(inside, b, 1.0)
    values = (-np.log(safe_a) / frame.lambda1 - np.log(safe_b) / frame.lambda2
              - (z @ frame.z_pu) / frame.lambda_min)
    return np.where(inside, values, np.inf)


def grid_direction_3d(frame, samples=100000):
    points = fibonacci_sphere(samples)
    values = direction_objective_3d(points, frame)
    best = int(np.argmin(values))
    return points[best], float(values[best])


def random_rotation(rng, dim):
    """Uniform proper rotation from the QR factorisation of a Gaussian matrix."""
    Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q
