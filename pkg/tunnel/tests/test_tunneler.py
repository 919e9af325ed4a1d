import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from tunnel.agents import AgentModel, extremum_points
from tunnel.exceptions import CollisionError, DimensionMismatch, NoFeasibleEllipsoid
from tunnel.geometry import Pose
from tunnel.planner import PlannerParams
from tunnel.tests.oracles import unit_disk
from tunnel.tunneler import (
    FitInputs, assemble_program, fit_ellipsoid, goal_on_boundary, objective_components, quadric_features,
    solve_fit, unpack, variable_count,
)
from tunnel.world import Box, Environment, build_fov_grid, sense

TOL = 1e-6


def point_inputs(agent, goal, obstacles=(), alpha=0.1, gamma=5e-5):
    return FitInputs(
        agent_points=[agent], goal=goal, obstacles=np.array(obstacles, dtype=float).reshape(-1, len(agent)),
        alpha=alpha, gamma=gamma, agent_center=agent,
    )


class FitAssertions:
    def assertFitFeasible(self, e, inputs):
        self.assertLessEqual(np.max(e.values(inputs.agent_points)), -1 + TOL)
        if inputs.k:
            self.assertGreaterEqual(np.min(e.values(inputs.obstacles)), 1 - TOL)
        self.assertGreaterEqual(e(inputs.goal), -TOL)
        self.assertGreaterEqual(np.min(np.linalg.eigvalsh(e.P)), 1 - TOL)


class FeatureTests(SimpleTestCase):
    def test_features_reproduce_quadric(self):
        P = np.array([[2.0, 0.5], [0.5, 1.0]])
        x = np.array([P[0, 0], P[0, 1], P[1, 1], 0.3, -0.4, -2.0])
        points = np.array([[1.0, 2.0], [-0.5, 0.25]])
        expected = np.einsum('ij,jk,ik->i', points, P, points) + points @ [0.3, -0.4] - 2.0
        np.testing.assert_allclose(quadric_features(points) @ x, expected)
        P_back, q, r = unpack(x, 2)
        np.testing.assert_allclose(P_back, P)
        np.testing.assert_allclose(q, [0.3, -0.4])
        self.assertEqual(r, -2.0)

    def test_variable_counts(self):
        self.assertEqual(variable_count(2), 6)
        self.assertEqual(variable_count(3), 10)


class AssemblyTests(SimpleTestCase):
    def test_point_agent_without_obstacles(self):
        program = assemble_program(point_inputs([0.0, 0.0], [1.0, 0.0]))
        self.assertEqual(program.constraint_count(), 2)
        self.assertIsNotNone(program.psd_block)
        self.assertEqual(program.n, 6)

    def test_box_agent_with_ten_obstacles(self):
        agent = AgentModel.box_2d(1.0, 0.5)
        pose = Pose.from_heading([0, 0], [1, 0])
        obstacles = np.column_stack([np.linspace(2, 4, 10), np.ones(10)])
        inputs = FitInputs(extremum_points(agent, pose), [8, 0], obstacles, 0.1, 5e-4, [0, 0])
        self.assertEqual(assemble_program(inputs).constraint_count(), 15)

    def test_3d_variable_layout(self):
        program = assemble_program(point_inputs([0.0, 0.0, 0.0], [3.0, 0.0, 0.0]))
        self.assertEqual(program.n, 10)
        self.assertEqual(len(program.psd_block.indices), 6)

    def test_parameter_ranges(self):
        with self.assertRaises(DimensionMismatch):
            point_inputs([0.0, 0.0], [1.0, 0.0], alpha=0.0)
        with self.assertRaises(DimensionMismatch):
            point_inputs([0.0, 0.0], [1.0, 0.0], gamma=2e-3)

    def test_obstacle_on_agent_is_a_collision(self):
        with self.assertRaises(CollisionError):
            point_inputs([1.0, 1.0], [5.0, 0.0], obstacles=[[1.0, 1.0]])


class FitTests(FitAssertions, SimpleTestCase):
    def test_walkthrough_scene(self):
        inputs = point_inputs([2.0, 0.0], [9.0, 0.0], [[6.0, 0.0]])
        e = fit_ellipsoid(inputs)
        self.assertFitFeasible(e, inputs)
        self.assertLess(np.max(e.semi_axes()), 100.0)

    def test_unobstructed_goal_lands_on_boundary(self):
        inputs = point_inputs([0.0, 0.0], [1.0, 0.0])
        f1, _, _ = objective_components(fit_ellipsoid(inputs), inputs)
        self.assertLessEqual(f1, 1e-5)

    def test_obstacle_between_agent_and_goal_is_excluded(self):
        inputs = point_inputs([0.0, 0.0], [4.0, 0.0], [[2.0, 0.0]])
        e = fit_ellipsoid(inputs)
        self.assertGreaterEqual(e([2.0, 0.0]), 1 - TOL)
        self.assertLessEqual(e([0.0, 0.0]), -1 + TOL)

    def test_solver_statistics_are_kept(self):
        inputs = point_inputs([0.0, 0.0], [4.0, 1.0], [[2.0, 1.5], [3.0, -1.0]])
        fit = solve_fit(inputs)
        self.assertEqual(fit.constraints, 4)
        self.assertTrue(fit.solution.optimal)
        self.assertLessEqual(fit.solution.kkt_residual, 1e-6)
        self.assertLessEqual(fit.solution.duality_gap, 1e-7)

    def test_box_agent_fit_contains_corners(self):
        agent = AgentModel.box_2d(1.0, 0.5)
        pose = Pose.from_heading([1.0, 1.0], [1, 1])
        obstacles = [[3.0, 1.0], [1.0, 3.5], [4.0, 4.5]]
        inputs = FitInputs(extremum_points(agent, pose), [7.0, 7.0], obstacles, 0.1, 5e-4, pose.position)
        self.assertFitFeasible(fit_ellipsoid(inputs), inputs)

    def test_enclosed_box_agent(self):
        agent = AgentModel.box_2d(1.0, 0.5)
        pose = Pose.from_heading([0.0, 0.0], [1, 0])
        xs = np.linspace(-0.52, 0.52, 27)
        ys = np.linspace(-0.24, 0.24, 17)
        ring = np.vstack([
            np.column_stack([xs, np.full_like(xs, 0.27)]),
            np.column_stack([xs, np.full_like(xs, -0.27)]),
            np.column_stack([np.full_like(ys, 0.52), ys]),
            np.column_stack([np.full_like(ys, -0.52), ys]),
        ])
        inputs = FitInputs(extremum_points(agent, pose), [10.0, 0.0], ring, 0.1, 5e-5, [0.0, 0.0])
        with self.assertRaises(NoFeasibleEllipsoid) as caught:
            solve_fit(inputs)
        self.assertGreater(caught.exception.slack, 1e-6)

    def test_larger_gamma_does_not_raise_obstacle_sum(self):
        low = point_inputs([0.0, 0.0], [6.0, 0.0], [[3.0, 1.0]], gamma=5e-5)
        high = point_inputs([0.0, 0.0], [6.0, 0.0], [[3.0, 1.0]], gamma=5e-4)
        f3_low = objective_components(fit_ellipsoid(low), low)[2]
        f3_high = objective_components(fit_ellipsoid(high), high)[2]
        self.assertLessEqual(f3_high, f3_low + 1e-3)

    @given(
        st.floats(min_value=5, max_value=8), st.floats(min_value=-180, max_value=180),
        st.lists(st.tuples(st.floats(min_value=1.5, max_value=5), st.floats(min_value=-180, max_value=180)),
                 max_size=6),
    )
    @settings(deadline=None, max_examples=15)
    def test_fitted_ellipsoids_separate(self, goal_distance, goal_angle, polar_obstacles):
        def polar(r, degrees):
            return [r * np.cos(np.radians(degrees)), r * np.sin(np.radians(degrees))]
        obstacles = [polar(r, a) for r, a in polar_obstacles]
        inputs = point_inputs([0.0, 0.0], polar(goal_distance, goal_angle), obstacles)
        self.assertFitFeasible(fit_ellipsoid(inputs), inputs)


class GoalOnBoundaryTests(SimpleTestCase):
    def test_unit_disk(self):
        e = unit_disk()
        self.assertTrue(goal_on_boundary(e, [1.0, 0.0], 1e-2))
        self.assertFalse(goal_on_boundary(e, [2.0, 0.0], 1e-2))
        self.assertTrue(goal_on_boundary(e, [1.001, 0.0], 1e-2))


class ThinnedCloudTests(FitAssertions, SimpleTestCase):
    """First-return thinning keeps the feasible set but sums the obstacle term over fewer points."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        env = Environment(2, boxes=[Box([3.0, -1.0], [4.0, 1.0])])
        grid = build_fov_grid(PlannerParams.defaults(2).fov, 2)
        pose = Pose.from_heading([0.0, 0.0], [1.0, 0.0])
        cls.full_cloud = sense(env, pose, grid).points
        cls.thin_cloud = sense(env, pose, grid, first_return=True).points
        cls.full = point_inputs([0.0, 0.0], [9.0, 0.0], cls.full_cloud, gamma=5e-4)
        cls.thin = point_inputs([0.0, 0.0], [9.0, 0.0], cls.thin_cloud, gamma=5e-4)

    def test_thinned_cloud_is_smaller(self):
        self.assertGreater(len(self.thin_cloud), 0)
        self.assertLess(len(self.thin_cloud), len(self.full_cloud))

    def test_thinned_fit_excludes_every_sensed_point(self):
        self.assertFitFeasible(fit_ellipsoid(self.thin), self.full)

    def test_full_cloud_optimum_is_no_worse(self):
        thin_fit = solve_fit(self.thin)
        full_fit = solve_fit(self.full)
        full_program = assemble_program(self.full)
        self.assertEqual(full_fit.constraints, len(self.full_cloud) + 2)
        self.assertGreaterEqual(full_program.objective_value(thin_fit.solution.x),
                                full_fit.solution.objective_value - 1e-6)
