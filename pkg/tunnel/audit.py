"""
Independent re-check of a finished trace: stored ellipsoids against their own
constraints, swept body positions against the world, and pose bookkeeping.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from tunnel.agents import extremum_points
from tunnel.planner import Outcome

audit_logger = logging.getLogger('audit_logger')

FEASIBILITY_TOL = 1e-6
SWEEP_SPACING = 1e-2
POSE_TOL = 1e-12

ELLIPSOID_FIT = 'ellipsoid-fit'
COLLISION = 'collision'
POSE_ADVANCE = 'pose-advance'
CONTAINMENT = 'containment'
OUTCOME = 'outcome'


@dataclass(frozen=True)
class Violation:
    step: int
    kind: str
    detail: str


@dataclass
class AuditReport:
    steps: int
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def flag(self, step, kind, detail):
        self.violations.append(Violation(step, kind, detail))


def _check_fit(report, agent, step):
    e = step.ellipsoid
    body = step.position + agent.offsets @ step.frame.T
    worst_agent = float(np.max(e.values(body)))
    if worst_agent > -1.0 + FEASIBILITY_TOL:
        report.flag(step.t, ELLIPSOID_FIT, f"agent point value {worst_agent:.3e} above -1")
    if step.cloud.shape[0]:
        worst_obstacle = float(np.min(e.values(step.cloud)))
        if worst_obstacle < 1.0 - FEASIBILITY_TOL:
            report.flag(step.t, ELLIPSOID_FIT, f"obstacle value {worst_obstacle:.3e} below 1")
    goal_value = e(step.fit_goal)
    if goal_value < -FEASIBILITY_TOL:
        report.flag(step.t, ELLIPSOID_FIT, f"goal value {goal_value:.3e} below 0")
    lambda_min = float(np.min(np.linalg.eigvalsh(e.P)))
    if lambda_min < 1.0 - FEASIBILITY_TOL:
        report.flag(step.t, ELLIPSOID_FIT, f"lambda_min(P) = {lambda_min:.6f}")


def _swept_bodies(agent, step):
    """Body points at every sample of the straight segment, in the frame held during the step."""
    samples = max(int(np.ceil(step.l_n / SWEEP_SPACING)), 1) + 1
    s = np.linspace(0.0, step.l_n, samples)
    offsets = agent.offsets @ step.frame.T
    return step.position + s[:, None, None] * step.z_n + offsets[None, :, :]


def validate_trace(env, agent, trace):
    report = AuditReport(len(trace.steps))
    poses = [(s.position, s.frame) for s in trace.steps] + [(trace.final_pose.position, trace.final_pose.frame)]
    keeps_contained = not agent.is_point

    for i, step in enumerate(trace.steps):
        _check_fit(report, agent, step)

        swept = _swept_bodies(agent, step)
        if np.any(env.occupied(swept.reshape(-1, agent.dim))):
            report.flag(step.t, COLLISION, "swept body intersects a finite obstacle")
        if env.point_obstacles.shape[0]:
            gaps = np.linalg.norm(
                swept.reshape(-1, 1, agent.dim) - env.point_obstacles[None, :, :], axis=2)
            if np.min(gaps) <= 0.0:
                report.flag(step.t, COLLISION, "swept body touches a point obstacle")

        next_position, next_frame = poses[i + 1]
        expected = step.position + step.l_n * step.z_n
        drift = float(np.max(np.abs(next_position - expected)))
        if drift > POSE_TOL * max(1.0, float(np.max(np.abs(expected)))):
            report.flag(step.t, POSE_ADVANCE, f"next position off by {drift:.3e}")
        if keeps_contained:
            worst = float(np.max(step.ellipsoid.values(swept[-1])))
            if worst > -1.0 + FEASIBILITY_TOL:
                report.flag(step.t, CONTAINMENT, f"body leaves the ellipsoid margin ({worst:.3e})")

    final = trace.final_pose
    if np.any(env.occupied(extremum_points(agent, final))):
        report.flag(len(trace.steps), COLLISION, "final body overlaps a finite obstacle")
    reached = trace.final_distance <= trace.params.epsilon
    if reached != (trace.outcome == Outcome.GOAL_REACHED):
        report.flag(len(trace.steps), OUTCOME,
                    f"outcome {trace.outcome.value} with final distance {trace.final_distance:.3e}")

    audit_logger.info(f"audit of {len(trace.steps)} steps found {len(report.violations)} violations",
                      extra={'event': 'audit', 'details': [v.__dict__ for v in report.violations]})
    return report
