from dataclasses import replace
from pathlib import Path
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from tunnel.agents import AgentModel
from tunnel.audit import COLLISION, ELLIPSOID_FIT, POSE_ADVANCE, validate_trace
from tunnel.exceptions import CollisionError, DimensionMismatch
from tunnel.geometry import Pose
from tunnel.planner import BOUNDARY_DISTANCE, Outcome, PlannerParams, fit_goal, plan
from tunnel.scenario import build_environment, load_scenario
from tunnel.signals import plan_finished, step_recorded
from tunnel.world import Box, Environment

SCENARIOS = Path(__file__).resolve().parent.parent / 'scenarios'


def fixture(name):
    return load_scenario((SCENARIOS / f'{name}.json').read_text(encoding='utf-8'))


def run(scenario):
    env = build_environment(scenario)
    agent = scenario.build_agent()
    trace = plan(env, agent, scenario.start_pose(), scenario.goal, scenario.params)
    return env, agent, trace


BOX_IN_OPEN_FIELD = """
{
  "dimension": 2,
  "agent": {"kind": "box", "dims": {"width": 1.0, "height": 0.5}},
  "start": {"position": [0, 0], "heading": 0},
  "goal": [5, 0]
}
"""


class FitGoalTests(SimpleTestCase):
    def test_point_agent_uses_goal(self):
        np.testing.assert_array_equal(fit_goal(AgentModel.point(2), np.zeros(2), np.array([3.0, 4.0]), 1.5),
                                      [3.0, 4.0])

    def test_finite_body_pushes_goal_ahead(self):
        agent = AgentModel.box_2d(1.0, 0.5)
        shifted = fit_goal(agent, np.zeros(2), np.array([3.0, 4.0]), 1.5)
        lead = 1.5 * np.sqrt(1.0 + agent.body_radius ** 2)
        np.testing.assert_allclose(shifted, np.array([3.0, 4.0]) * (1 + lead / 5.0))


class TraceAssertions:
    def assertFitsConverged(self, trace):
        for step in trace.steps:
            self.assertLessEqual(step.kkt_residual, 1e-6, f"step {step.t}")
            self.assertLessEqual(step.duality_gap, 1e-7, f"step {step.t}")

    def assertConstraintCounts(self, trace, m):
        for step in trace.steps:
            self.assertEqual(step.constraints, m + 1 + step.cloud_size, f"step {step.t}")

    def assertWithinStepBudget(self, trace):
        straight = np.linalg.norm(trace.goal - trace.start.position)
        self.assertLessEqual(len(trace.steps), 3 * straight / trace.params.delta1)


class PlanOutcomeTests(TraceAssertions, SimpleTestCase):
    def test_walkthrough_scene_reaches_goal(self):
        scenario = fixture('section3')
        env, agent, trace = run(scenario)
        self.assertEqual(trace.outcome, Outcome.GOAL_REACHED)
        self.assertLessEqual(trace.final_distance, scenario.params.epsilon)
        for step in trace.steps:
            self.assertGreaterEqual(step.l_n, 0.0)
            self.assertLessEqual(step.l_n, scenario.params.delta1 + 1e-12)
        self.assertFitsConverged(trace)
        self.assertConstraintCounts(trace, 1)
        self.assertTrue(validate_trace(env, agent, trace).ok)

    def test_empty_world(self):
        env, agent, trace = run(fixture('empty'))
        self.assertEqual(trace.outcome, Outcome.GOAL_REACHED)
        self.assertGreaterEqual(len(trace.steps), 6)
        self.assertTrue(validate_trace(env, agent, trace).ok)

    def test_mixed_obstacles(self):
        env, agent, trace = run(fixture('mixed2d'))
        self.assertEqual(trace.outcome, Outcome.GOAL_REACHED)
        self.assertWithinStepBudget(trace)
        self.assertFitsConverged(trace)
        self.assertConstraintCounts(trace, 1)
        self.assertTrue(validate_trace(env, agent, trace).ok)

    def test_box_among_mixed_obstacles(self):
        env, agent, trace = run(fixture('mixed2d_box'))
        self.assertEqual(trace.outcome, Outcome.GOAL_REACHED)
        self.assertWithinStepBudget(trace)
        self.assertFitsConverged(trace)
        self.assertConstraintCounts(trace, 4)
        self.assertTrue(validate_trace(env, agent, trace).ok)

    def test_boundary_distance_mode(self):
        scenario = fixture('section3').with_params(point_agent_delta2_mode=BOUNDARY_DISTANCE)
        env, agent, trace = run(scenario)
        self.assertTrue(validate_trace(env, agent, trace).ok)

    def test_random_points(self):
        env, agent, trace = run(fixture('random446'))
        self.assertEqual(env.point_obstacles.shape, (446, 2))
        self.assertEqual(trace.outcome, Outcome.GOAL_REACHED)
        self.assertWithinStepBudget(trace)
        self.assertFitsConverged(trace)
        self.assertConstraintCounts(trace, 1)
        self.assertTrue(validate_trace(env, agent, trace).ok)

    def test_plane_among_buildings(self):
        env, agent, trace = run(fixture('city3d'))
        self.assertEqual(trace.dimension, 3)
        self.assertEqual(agent.m, 33)
        self.assertEqual(trace.outcome, Outcome.GOAL_REACHED)
        self.assertWithinStepBudget(trace)
        self.assertFitsConverged(trace)
        self.assertConstraintCounts(trace, 33)
        self.assertTrue(validate_trace(env, agent, trace).ok)

    def test_enclosed_box_has_no_ellipsoid(self):
        env, agent, trace = run(fixture('enclosure'))
        self.assertEqual(trace.outcome, Outcome.NO_FEASIBLE_ELLIPSOID)
        self.assertEqual(trace.steps, [])
        self.assertIs(trace.final_pose, trace.start)

    def test_step_limit(self):
        env, agent, trace = run(fixture('section3').with_params(max_steps=2))
        self.assertEqual(trace.outcome, Outcome.MAX_STEPS)
        self.assertEqual(len(trace.steps), 2)
        self.assertTrue(validate_trace(env, agent, trace).ok)

    def test_zero_steps_stall(self):
        scenario = load_scenario(BOX_IN_OPEN_FIELD)
        with mock.patch('tunnel.planner.max_safe_step', return_value=0.0):
            _, _, trace = run(scenario)
        self.assertEqual(trace.outcome, Outcome.STALLED)
        self.assertEqual(len(trace.steps), scenario.params.stall_steps)
        np.testing.assert_array_equal(trace.final_pose.position, [0.0, 0.0])

    def test_start_inside_obstacle(self):
        env = Environment(2, boxes=[Box([-1.0, -1.0], [1.0, 1.0])])
        with self.assertRaises(CollisionError):
            plan(env, AgentModel.point(2), Pose.from_heading([0.0, 0.0], [1.0, 0.0]), [5.0, 0.0],
                 PlannerParams.defaults(2, True))

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            plan(Environment(2), AgentModel.point(2), Pose.from_heading([0.0, 0.0], [1.0, 0.0]), [5.0, 0.0, 0.0],
                 PlannerParams.defaults(2))


class SignalTests(SimpleTestCase):
    def test_every_step_is_announced(self):
        steps, finished = [], []

        def on_step(sender, step, **kwargs):
            steps.append(step)

        def on_finish(sender, trace, **kwargs):
            finished.append(trace)

        step_recorded.connect(on_step)
        plan_finished.connect(on_finish)
        self.addCleanup(step_recorded.disconnect, on_step)
        self.addCleanup(plan_finished.disconnect, on_finish)

        _, _, trace = run(fixture('section3'))
        self.assertEqual(steps, trace.steps)
        self.assertEqual(finished, [trace])

    def test_outcome_is_logged(self):
        with self.assertLogs('audit_logger', level='INFO') as logs:
            run(fixture('empty'))
        self.assertTrue(any('GoalReached' in line for line in logs.output))


class AuditTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.env, cls.agent, cls.trace = run(fixture('section3'))

    def kinds(self, report):
        return {v.kind for v in report.violations}

    def test_obstacle_inside_ellipsoid_is_flagged(self):
        first = self.trace.steps[0]
        tampered = replace(first, cloud=np.vstack([first.cloud, first.ellipsoid.center()]))
        trace = replace(self.trace, steps=[tampered] + self.trace.steps[1:])
        report = validate_trace(self.env, self.agent, trace)
        self.assertIn(ELLIPSOID_FIT, self.kinds(report))
        self.assertEqual(report.violations[0].step, 0)

    def test_teleport_is_flagged(self):
        final = self.trace.final_pose
        trace = replace(self.trace, final=Pose(final.position + [0.5, 0.0], final.frame))
        self.assertIn(POSE_ADVANCE, self.kinds(validate_trace(self.env, self.agent, trace)))

    def test_wall_across_the_path_is_flagged(self):
        walled = Environment(2, point_obstacles=self.env.point_obstacles, boxes=[Box([0.5, -3.0], [0.7, 3.0])])
        self.assertIn(COLLISION, self.kinds(validate_trace(walled, self.agent, self.trace)))
