import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from tunnel.exceptions import DegenerateEllipsoid, DegenerateQuadric, DimensionMismatch
from tunnel.geometry import (
    Ellipsoid, Pose, eigen_symmetric, ellipsoid_center, evaluate_quadric, frame_from_heading,
    global_to_local, local_to_global, rotate_2d,
)
from tunnel.tests.oracles import unit_disk

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


class QuadricTests(SimpleTestCase):
    def test_unit_disk_values(self):
        e = unit_disk()
        self.assertEqual(evaluate_quadric(e, [1, 0]), 0.0)
        self.assertEqual(evaluate_quadric(e, [2, 0]), 3.0)
        self.assertEqual(e([0, 0]), -1.0)

    def test_values_matches_pointwise_evaluation(self):
        e = Ellipsoid([[2.0, 0.5], [0.5, 1.0]], [0.3, -1.0], -2.0)
        points = np.array([[0, 0], [1, 2], [-3, 0.5]], dtype=float)
        np.testing.assert_allclose(e.values(points), [e(p) for p in points])

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            evaluate_quadric(unit_disk(), [1, 0, 0])
        with self.assertRaises(DimensionMismatch):
            Ellipsoid(np.eye(3), np.zeros(2), -1.0)

    def test_asymmetric_matrix_rejected(self):
        with self.assertRaises(DimensionMismatch):
            Ellipsoid([[1.0, 1.0], [0.0, 1.0]], [0, 0], -1.0)

    def test_center(self):
        e = Ellipsoid(np.eye(2), [-2.0, -4.0], 0.0)
        np.testing.assert_allclose(ellipsoid_center(e), [1.0, 2.0])

    def test_singular_quadric_has_no_center(self):
        with self.assertRaises(DegenerateQuadric):
            Ellipsoid(np.diag([1.0, 0.0]), [0, 0], -1.0).center()

    def test_semi_axes(self):
        e = Ellipsoid(np.diag([1.0, 4.0]), [0, 0], -1.0)
        np.testing.assert_allclose(e.semi_axes(), [1.0, 0.5])

    def test_empty_interior(self):
        with self.assertRaises(DegenerateEllipsoid):
            Ellipsoid(np.eye(2), [0, 0], 1.0).semi_axes()

    def test_shape_matrix_of_unit_disk(self):
        center, E = unit_disk().shape_matrix()
        np.testing.assert_allclose(center, [0, 0])
        np.testing.assert_allclose(E, np.eye(2))

    @given(st.tuples(finite, finite), st.tuples(finite, finite))
    @settings(deadline=None, max_examples=50)
    def test_translated_shifts_the_argument(self, origin, z):
        e = Ellipsoid([[2.0, 0.3], [0.3, 1.5]], [0.4, -0.2], -3.0)
        moved = e.translated(origin)
        expected = e(np.subtract(z, origin))
        self.assertAlmostEqual(moved(z), expected, delta=1e-9 * max(1.0, abs(expected)))


class EigenTests(SimpleTestCase):
    def test_diagonal_2d(self):
        spectrum = eigen_symmetric(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(spectrum.eigenvalues, [1.0, 3.0])
        np.testing.assert_allclose(np.abs(spectrum.eigenvectors), [[0, 1], [1, 0]], atol=1e-12)

    def test_repeated_eigenvalues_give_axis_basis(self):
        spectrum = eigen_symmetric(2.0 * np.eye(3))
        np.testing.assert_allclose(spectrum.eigenvalues, [2.0, 2.0, 2.0])
        np.testing.assert_allclose(spectrum.eigenvectors, np.eye(3), atol=1e-12)

    @given(st.lists(finite, min_size=6, max_size=6))
    @settings(deadline=None, max_examples=100)
    def test_jacobi_3x3(self, entries):
        a, b, c, d, e, f = entries
        P = np.array([[a, d, e], [d, b, f], [e, f, c]])
        spectrum = eigen_symmetric(P)
        V = spectrum.eigenvectors
        self.assertTrue(np.all(np.diff(spectrum.eigenvalues) >= -1e-9))
        np.testing.assert_allclose(V @ V.T, np.eye(3), atol=1e-8)
        scale = max(1.0, np.max(np.abs(P)))
        for value, vector in zip(spectrum.eigenvalues, V):
            np.testing.assert_allclose(P @ vector, value * vector, atol=1e-8 * scale)

    @given(finite, finite, finite)
    @settings(deadline=None, max_examples=100)
    def test_closed_form_2x2_agrees_with_lapack(self, a, b, c):
        P = np.array([[a, b], [b, c]])
        spectrum = eigen_symmetric(P)
        np.testing.assert_allclose(spectrum.eigenvalues, np.linalg.eigvalsh(P), atol=1e-9 * max(1.0, abs(a), abs(b), abs(c)))


class FrameTests(SimpleTestCase):
    def test_rotate_2d(self):
        np.testing.assert_allclose(rotate_2d([1, 0], 90), [0, 1], atol=1e-15)
        np.testing.assert_allclose(rotate_2d([1, 0], -90), [0, -1], atol=1e-15)

    def test_pose_rejects_skewed_frame(self):
        with self.assertRaises(DimensionMismatch):
            Pose([0, 0], [[1, 0.1], [0, 1]])

    def test_pose_rejects_left_handed_3d_frame(self):
        with self.assertRaises(DimensionMismatch):
            Pose([0, 0, 0], np.diag([1.0, 1.0, -1.0]))

    def test_3d_heading_keeps_y_horizontal(self):
        frame = frame_from_heading([1.0, 1.0, 1.0])
        self.assertAlmostEqual(frame[2, 1], 0.0)
        self.assertGreater(np.linalg.det(frame), 0)

    def test_vertical_heading(self):
        frame = frame_from_heading([0.0, 0.0, 2.0])
        np.testing.assert_allclose(frame.T @ frame, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(frame[:, 0], [0, 0, 1])

    @given(st.tuples(finite, finite, finite), st.tuples(finite, finite, finite))
    @settings(deadline=None, max_examples=50)
    def test_local_global_inverse(self, position, v):
        pose = Pose.from_heading(position, [0.3, -0.7, 0.2])
        back = global_to_local(pose, local_to_global(pose, np.array(v)))
        np.testing.assert_allclose(back, v, atol=1e-9)
