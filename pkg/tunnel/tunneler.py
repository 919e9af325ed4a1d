"""
Ellipsoid fitting: the convex QCQP that places the agent body inside, the
goal on or outside, and every sensed obstacle point outside the step ellipsoid.

The quadric is fitted in coordinates u = z - z_a centred on the agent and
translated back to the world afterwards; Psi values are identical in both.
"""
import logging
from dataclasses import dataclass

import numpy as np

from tunnel.conf import solver_settings
from tunnel.exceptions import CollisionError, DimensionMismatch, NoFeasibleEllipsoid
from tunnel.geometry import Ellipsoid, evaluate_quadric
from tunnel.solver import (
    AbsTerm, ConeProgram, LinearInequality, PsdBlock, QuadraticObjective, Status, solve_cone,
)

audit_logger = logging.getLogger('audit_logger')
error_logger = logging.getLogger('error_logger')

# Variable layout: upper triangle of P, then q, then r.
_P_INDEX = {
    2: ((0, 0), (0, 1), (1, 1)),
    3: ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)),
}


def variable_count(dim):
    return len(_P_INDEX[dim]) + dim + 1


def quadric_features(points):
    """Rows phi(z) with Psi(z) = phi(z)'x for the (P, q, r) variable vector x."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    dim = points.shape[1]
    if dim not in _P_INDEX:
        raise DimensionMismatch(f"points are {dim}D")
    columns = [
        points[:, i] * points[:, j] * (1.0 if i == j else 2.0)
        for i, j in _P_INDEX[dim]
    ]
    columns.extend(points[:, i] for i in range(dim))
    columns.append(np.ones(points.shape[0]))
    return np.column_stack(columns)


def unpack(x, dim):
    P = np.zeros((dim, dim))
    for k, (i, j) in enumerate(_P_INDEX[dim]):
        P[i, j] = P[j, i] = x[k]
    offset = len(_P_INDEX[dim])
    return P, np.array(x[offset:offset + dim]), float(x[offset + dim])


@dataclass(frozen=True, eq=False)
class FitInputs:
    agent_points: np.ndarray
    goal: np.ndarray
    obstacles: np.ndarray
    alpha: float
    gamma: float
    agent_center: np.ndarray

    def __post_init__(self):
        agent_points = np.atleast_2d(np.asarray(self.agent_points, dtype=float))
        dim = agent_points.shape[1]
        goal = np.asarray(self.goal, dtype=float).reshape(-1)
        center = np.asarray(self.agent_center, dtype=float).reshape(-1)
        obstacles = np.asarray(self.obstacles, dtype=float).reshape(-1, dim)
        if goal.shape[0] != dim or center.shape[0] != dim:
            raise DimensionMismatch(f"agent points are {dim}D, goal {goal.shape[0]}D, center {center.shape[0]}D")
        if not 0 < self.alpha <= 1:
            raise DimensionMismatch(f"alpha={self.alpha} outside (0, 1]")
        if not 0 < self.gamma <= 1e-3:
            raise DimensionMismatch(f"gamma={self.gamma} outside (0, 1e-3]")
        if obstacles.shape[0]:
            gaps = np.linalg.norm(obstacles[:, None, :] - agent_points[None, :, :], axis=2)
            if np.min(gaps) <= 1e-9:
                raise CollisionError(f"obstacle within {np.min(gaps):.1e} of an agent point")
        object.__setattr__(self, 'agent_points', agent_points)
        object.__setattr__(self, 'goal', goal)
        object.__setattr__(self, 'obstacles', obstacles)
        object.__setattr__(self, 'agent_center', center)

    @property
    def dim(self):
        return self.agent_points.shape[1]

    @property
    def m(self):
        return self.agent_points.shape[0]

    @property
    def k(self):
        return self.obstacles.shape[0]


def assemble_program(inputs, settings=None):
    """Build the fitting program over x = (P, q, r) in agent-centred coordinates."""
    cfg = settings or solver_settings()
    dim = inputs.dim
    n = variable_count(dim)
    origin = inputs.agent_center
    agent = quadric_features(inputs.agent_points - origin)
    goal = quadric_features(inputs.goal - origin)[0]
    center = quadric_features(np.zeros(dim))[0]

    inequalities = [LinearInequality(row, -1.0) for row in agent]
    inequalities.append(LinearInequality(-goal, 0.0))
    linear = np.zeros(n)
    if inputs.k:
        obstacles = quadric_features(inputs.obstacles - origin)
        inequalities.extend(LinearInequality(-row, -1.0) for row in obstacles)
        linear = inputs.gamma * obstacles.sum(axis=0)

    basis = []
    for i, j in _P_INDEX[dim]:
        E = np.zeros((dim, dim))
        E[i, j] = E[j, i] = 1.0
        basis.append(E)
    psd = PsdBlock(tuple(range(len(basis))), tuple(basis))

    H = 2.0 * inputs.alpha * np.outer(center, center) + 2.0 * cfg.regularization * np.eye(n)
    return ConeProgram(
        objective=QuadraticObjective(H, linear),
        n=n,
        linear_inequalities=inequalities,
        psd_block=psd,
        epigraph_terms=[AbsTerm(1.0, goal)],
    )


@dataclass(frozen=True, eq=False)
class FitResult:
    ellipsoid: Ellipsoid
    solution: object
    constraints: int


def solve_fit(inputs, settings=None):
    """Fit the step ellipsoid and keep the solver statistics alongside it."""
    program = assemble_program(inputs, settings)
    solution = solve_cone(program, settings=settings)
    if solution.status == Status.INFEASIBLE:
        error_logger.error(
            f"no separating ellipsoid: {inputs.m} agent points, {inputs.k} obstacles, "
            f"phase-I slack {solution.phase_one_slack:.3e}")
        raise NoFeasibleEllipsoid(f"phase-I slack {solution.phase_one_slack:.3e}", slack=solution.phase_one_slack)
    if solution.status != Status.OPTIMAL:
        audit_logger.warning(f"ellipsoid fit stopped with {solution.status.value} after {solution.iterations} steps")
    P, q, r = unpack(solution.x, inputs.dim)
    ellipsoid = Ellipsoid(P, q, r).translated(inputs.agent_center)
    return FitResult(ellipsoid, solution, program.constraint_count())


def fit_ellipsoid(inputs, settings=None):
    return solve_fit(inputs, settings).ellipsoid


def goal_on_boundary(e, z_g, eps):
    return abs(evaluate_quadric(e, z_g)) <= eps


def objective_components(e, inputs):
    """(f1, f2, f3) of the fitting objective evaluated at a given ellipsoid."""
    f1 = abs(evaluate_quadric(e, inputs.goal))
    f2 = evaluate_quadric(e, inputs.agent_center) ** 2
    f3 = float(np.sum(e.values(inputs.obstacles))) if inputs.k else 0.0
    return f1, f2, f3
