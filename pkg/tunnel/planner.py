"""
The online planning loop: sense, fit the step ellipsoid, pick a direction
inside it, take a safe step, repeat until the goal is within epsilon.
"""
import logging
import time
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum

import numpy as np

from tunnel.agents import advance, extremum_points
from tunnel.exceptions import AgentAtBoundaryTarget, CollisionError, DimensionMismatch, NoFeasibleEllipsoid
from tunnel.geometry import unit
from tunnel.navigator import (
    boundary_reach, boundary_target, build_frame_2d, build_frame_3d, max_safe_step, motion_direction,
    solve_direction_2d, solve_direction_3d,
)
from tunnel.signals import plan_finished, step_recorded
from tunnel.tunneler import FitInputs, solve_fit
from tunnel.world import FovSpec, build_fov_grid, sense

audit_logger = logging.getLogger('audit_logger')
error_logger = logging.getLogger('error_logger')


class Outcome(str, Enum):
    GOAL_REACHED = 'GoalReached'
    NO_FEASIBLE_ELLIPSOID = 'NoFeasibleEllipsoid'
    STALLED = 'Stalled'
    MAX_STEPS = 'MaxSteps'


# Point-agent step rules: cap by the goal distance, or by the distance to the boundary target.
GOAL_DISTANCE = 'GoalDistance'
BOUNDARY_DISTANCE = 'BoundaryDistance'
POINT_AGENT_MODES = (GOAL_DISTANCE, BOUNDARY_DISTANCE)

GOAL_BRANCH = 'goal'
BOUNDARY_BRANCH = 'boundary'
FALLBACK_BRANCH = 'fallback'

_FOV_FIELDS = tuple(f.name for f in fields(FovSpec))


@dataclass(frozen=True)
class PlannerParams:
    delta1: float
    alpha: float
    beta: float
    gamma: float
    epsilon: float
    fov: FovSpec
    max_steps: int = 500
    point_agent_delta2_mode: str = GOAL_DISTANCE
    goal_lead: float = 1.5
    first_return: bool = True
    stall_steps: int = 3
    stall_tol: float = 1e-9

    @classmethod
    def defaults(cls, dimension, finite_obstacles=False):
        gamma = 5e-4 if finite_obstacles else 5e-5
        if dimension == 2:
            return cls(delta1=1.0, alpha=0.1, beta=1.0, gamma=gamma, epsilon=1e-2,
                       fov=FovSpec(R_fov=5.0, theta_fov=80.0, dr=0.2, dtheta=1.0, phi_fov=40.0, dphi=0.5))
        if dimension == 3:
            return cls(delta1=2.0, alpha=0.1, beta=1.0, gamma=gamma, epsilon=1e-2,
                       fov=FovSpec(R_fov=5.0, theta_fov=40.0, dr=0.1, dtheta=0.5, phi_fov=40.0, dphi=0.5))
        raise DimensionMismatch(f"dimension must be 2 or 3, got {dimension}")

    def with_overrides(self, **values):
        """Apply flat overrides; FOV keys (R_fov, theta_fov, ...) update the nested FovSpec."""
        fov_values = {k: values.pop(k) for k in list(values) if k in _FOV_FIELDS}
        fov = replace(self.fov, **fov_values) if fov_values else self.fov
        return replace(self, fov=fov, **values)

    def to_dict(self):
        values = asdict(self)
        values.update(values.pop('fov'))
        return values

    @classmethod
    def from_dict(cls, values):
        values = dict(values)
        fov = FovSpec(**{k: values.pop(k) for k in _FOV_FIELDS if k in values})
        return cls(fov=fov, **values)


@dataclass(frozen=True, eq=False)
class StepRecord:
    t: int
    position: np.ndarray
    frame: np.ndarray
    cloud: np.ndarray
    ellipsoid: object
    fit_goal: np.ndarray
    psi_goal: float
    branch: str
    z_n: np.ndarray
    l_n: float
    z_e: np.ndarray = None
    l_e: float = None
    z_b: np.ndarray = None
    delta2: float = None
    constraints: int = 0
    timings: dict = field(default_factory=dict)
    kkt_residual: float = None
    duality_gap: float = None
    phase_one: bool = False

    @property
    def cloud_size(self):
        return int(self.cloud.shape[0])


@dataclass(eq=False)
class PlanTrace:
    dimension: int
    agent: object
    start: object
    goal: np.ndarray
    params: PlannerParams
    steps: list = field(default_factory=list)
    outcome: Outcome = Outcome.MAX_STEPS
    final: object = None
    grid_size: int = 0

    @property
    def succeeded(self):
        return self.outcome == Outcome.GOAL_REACHED

    @property
    def final_pose(self):
        return self.final or self.start

    @property
    def final_distance(self):
        return float(np.linalg.norm(self.final_pose.position - self.goal))

    def positions(self):
        """Agent positions at every step, then the final position."""
        return np.array([step.position for step in self.steps] + [self.final_pose.position])


def fit_goal(agent, position, goal, goal_lead):
    """
    Goal used inside the fit.

    A finite body needs room ahead of it: the goal is pushed along the approach
    bearing by goal_lead * sqrt(1 + rho^2), rho the body radius, the smallest
    radius of the -1 level set of a quadric with P >= I around that body.
    """
    if agent.is_point:
        return goal
    bearing = goal - position
    distance = np.linalg.norm(bearing)
    if distance == 0:
        return goal
    lead = goal_lead * np.sqrt(1.0 + agent.body_radius ** 2)
    return goal + lead * bearing / distance


def _take_step(t, env, agent, pose, goal, grid, params, settings):
    position = pose.position
    cloud = sense(env, pose, grid, first_return=params.first_return)
    target = fit_goal(agent, position, goal, params.goal_lead)
    inputs = FitInputs(
        agent_points=extremum_points(agent, pose),
        goal=target,
        obstacles=cloud.points,
        alpha=params.alpha,
        gamma=params.gamma,
        agent_center=position,
    )
    fit = solve_fit(inputs, settings)
    e = fit.ellipsoid
    timings = {'eq1': fit.solution.wall_time, 'dir': None, 'steplen': None}
    psi_goal = e(target)
    z_e = l_e = z_b = None
    to_goal = goal - position
    distance = float(np.linalg.norm(to_goal))

    if abs(psi_goal) > params.epsilon:
        if pose.dim == 2:
            frame = build_frame_2d(e, pose, cloud, goal)
            z_e, direction = solve_direction_2d(frame, params.beta, settings)
        else:
            frame = build_frame_3d(e, cloud, goal)
            z_e, direction = solve_direction_3d(frame, settings)
        timings['dir'] = direction.wall_time
        l_e = boundary_reach(e, z_e)
        z_b = boundary_target(e, z_e, l_e)
        try:
            z_n = motion_direction(position, e, z_e, l_e)
            branch = BOUNDARY_BRANCH
        except AgentAtBoundaryTarget:
            audit_logger.warning(f"step {t}: boundary target coincides with the agent, heading for the goal")
            z_n = unit(to_goal)
            branch = FALLBACK_BRANCH
    else:
        z_n = unit(to_goal)
        branch = GOAL_BRANCH

    delta2 = None
    if agent.is_point:
        if params.point_agent_delta2_mode == BOUNDARY_DISTANCE and branch == BOUNDARY_BRANCH:
            l_n = min(params.delta1, float(np.linalg.norm(position - z_b)))
        else:
            l_n = min(params.delta1, distance)
    else:
        started = time.perf_counter()
        delta2 = max_safe_step(e, agent.world_offsets(pose), position, z_n)
        timings['steplen'] = time.perf_counter() - started
        l_n = min(params.delta1, delta2, distance)

    return StepRecord(
        t=t,
        position=position,
        frame=pose.frame,
        cloud=cloud.points,
        ellipsoid=e,
        fit_goal=np.asarray(target, dtype=float),
        psi_goal=psi_goal,
        branch=branch,
        z_n=z_n,
        l_n=float(l_n),
        z_e=z_e,
        l_e=l_e,
        z_b=z_b,
        delta2=delta2,
        constraints=fit.constraints,
        timings=timings,
        kkt_residual=fit.solution.kkt_residual,
        duality_gap=fit.solution.duality_gap,
        phase_one=fit.solution.phase_one_slack is not None,
    )


def plan(env, agent, start, goal, params, grid=None, settings=None):
    """Run the planner from `start` until the goal, a failed fit, a stall or the step limit."""
    goal = np.asarray(goal, dtype=float)
    dim = start.dim
    if env.dim != dim or agent.dim != dim or goal.shape[0] != dim:
        raise DimensionMismatch(f"world {env.dim}D, agent {agent.dim}D, start {dim}D, goal {goal.shape[0]}D")
    if np.any(env.occupied(extremum_points(agent, start))):
        raise CollisionError(f"start body at {start.position.tolist()} overlaps an obstacle")
    grid = grid or build_fov_grid(params.fov, dim)
    trace = PlanTrace(dim, agent, start, goal, params, grid_size=grid.size)
    audit_logger.info(
        f"planning {agent.kind} agent from {start.position.tolist()} to {goal.tolist()} "
        f"with a {grid.size}-point FOV grid",
        extra={'event': 'start', 'details': params.to_dict()},
    )

    pose = start
    stalled = 0
    outcome = None
    for t in range(params.max_steps):
        if np.linalg.norm(goal - pose.position) <= params.epsilon:
            outcome = Outcome.GOAL_REACHED
            break
        try:
            record = _take_step(t, env, agent, pose, goal, grid, params, settings)
        except NoFeasibleEllipsoid as e:
            error_logger.error(f"step {t}: {e}", extra={'step': t, 'event': 'infeasible'})
            outcome = Outcome.NO_FEASIBLE_ELLIPSOID
            break
        trace.steps.append(record)
        step_recorded.send(sender=PlanTrace, step=record)
        pose = advance(pose, record.z_n, record.l_n)
        stalled = stalled + 1 if record.l_n < params.stall_tol else 0
        if stalled >= params.stall_steps:
            outcome = Outcome.STALLED
            break
    if outcome is None:
        reached = np.linalg.norm(goal - pose.position) <= params.epsilon
        outcome = Outcome.GOAL_REACHED if reached else Outcome.MAX_STEPS

    trace.outcome = outcome
    trace.final = pose
    plan_finished.send(sender=PlanTrace, trace=trace)
    return trace
