"""
Quadric (ellipsoid) values, symmetric eigendecomposition and agent frames.

An ellipsoid is stored as the quadric Psi(z) = z'Pz + q'z + r; its interior is
{z | Psi(z) < 0}. All routines work on d = 2 or d = 3 and return new values.
"""
import math
from dataclasses import dataclass

import numpy as np

from tunnel.conf import GEOMETRY
from tunnel.exceptions import DegenerateQuadric, DegenerateEllipsoid, DimensionMismatch


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    P: np.ndarray
    q: np.ndarray
    r: float

    def __post_init__(self):
        P = _frozen(self.P)
        q = _frozen(self.q).reshape(-1)
        d = q.shape[0]
        if d not in (2, 3) or P.shape != (d, d):
            raise DimensionMismatch(f"P has shape {P.shape} and q has length {d}")
        if np.max(np.abs(P - P.T)) > GEOMETRY.symmetry * max(1.0, np.max(np.abs(P))):
            raise DimensionMismatch("P is not symmetric")
        object.__setattr__(self, 'P', P)
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'r', float(self.r))

    @property
    def dim(self):
        return self.q.shape[0]

    def __call__(self, z):
        return evaluate_quadric(self, z)

    def values(self, points):
        """Evaluate Psi on an (n, d) array of points."""
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        return np.einsum('ij,jk,ik->i', points, self.P, points) + points @ self.q + self.r

    def center(self):
        return ellipsoid_center(self)

    def spectrum(self):
        return eigen_symmetric(self.P)

    def semi_axes(self):
        """Semi-axis lengths paired with the ascending eigenvalues of P."""
        sigma = evaluate_quadric(self, self.center())
        if sigma >= 0:
            raise DegenerateEllipsoid(f"Psi(center) = {sigma:.3e}")
        spectrum = self.spectrum()
        return np.sqrt(-sigma / spectrum.eigenvalues)

    def shape_matrix(self):
        """Return (center, E) with the ellipsoid equal to {c + L u | |u| <= 1}, E = L L'."""
        center = self.center()
        sigma = evaluate_quadric(self, center)
        if sigma >= 0:
            raise DegenerateEllipsoid(f"Psi(center) = {sigma:.3e}")
        return center, -sigma * np.linalg.inv(self.P)

    def translated(self, origin):
        """Express a quadric fitted in coordinates u = z - origin in world coordinates."""
        o = np.asarray(origin, dtype=float)
        q = self.q - 2.0 * self.P @ o
        r = float(o @ self.P @ o - self.q @ o + self.r)
        return Ellipsoid(self.P, q, r)

    def to_dict(self):
        return {
            'P': [float(v) for v in self.P.reshape(-1)],
            'q': [float(v) for v in self.q],
            'r': self.r,
        }

    @classmethod
    def from_dict(cls, data):
        q = np.asarray(data['q'], dtype=float)
        d = q.shape[0]
        return cls(np.asarray(data['P'], dtype=float).reshape(d, d), q, data['r'])


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # row i pairs with eigenvalues[i]

    @property
    def lambda_min(self):
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self):
        return float(self.eigenvalues[-1])


@dataclass(frozen=True, eq=False)
class Pose:
    position: np.ndarray
    frame: np.ndarray  # columns are the local axes; column 0 is the direction of motion

    def __post_init__(self):
        position = _frozen(self.position).reshape(-1)
        frame = _frozen(self.frame)
        d = position.shape[0]
        if d not in (2, 3) or frame.shape != (d, d):
            raise DimensionMismatch(f"position has length {d} and frame has shape {frame.shape}")
        if np.max(np.abs(frame.T @ frame - np.eye(d))) > GEOMETRY.frame:
            raise DimensionMismatch("frame is not orthonormal")
        if d == 3 and np.linalg.det(frame) < 0:
            raise DimensionMismatch("3D frame is not right-handed")
        object.__setattr__(self, 'position', position)
        object.__setattr__(self, 'frame', frame)

    @property
    def dim(self):
        return self.position.shape[0]

    @property
    def heading(self):
        return self.frame[:, 0]

    @classmethod
    def from_heading(cls, position, heading):
        """Build a pose whose local x-axis is `heading`; in 3D the local y-axis stays horizontal."""
        position = np.asarray(position, dtype=float)
        return cls(position, frame_from_heading(heading))


def frame_from_heading(heading, up=None):
    x = np.asarray(heading, dtype=float)
    norm = np.linalg.norm(x)
    if norm < GEOMETRY.singular:
        raise DimensionMismatch("heading has zero length")
    x = x / norm
    if x.shape[0] == 2:
        return np.column_stack([x, rotate_2d(x, 90.0)])
    if x.shape[0] != 3:
        raise DimensionMismatch(f"heading has length {x.shape[0]}")
    up = np.array([0.0, 0.0, 1.0]) if up is None else np.asarray(up, dtype=float)
    y = np.cross(up, x)
    if np.linalg.norm(y) < 1e-9:
        y = np.cross(np.array([0.0, 1.0, 0.0]), x)
        y = np.array([0.0, 1.0, 0.0]) if np.linalg.norm(y) < 1e-9 else y
    y = y - (y @ x) * x
    y = y / np.linalg.norm(y)
    return np.column_stack([x, y, np.cross(x, y)])


def _check_point(e, z):
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.shape[0] != e.dim:
        raise DimensionMismatch(f"point has length {z.shape[0]}, ellipsoid is {e.dim}D")
    return z


def evaluate_quadric(e, z):
    """Return z'Pz + q'z + r."""
    z = _check_point(e, z)
    return float(z @ e.P @ z + e.q @ z + e.r)


def ellipsoid_center(e):
    """Return the stationary point -P^-1 q / 2 of the quadric."""
    magnitudes = np.abs(np.linalg.eigvalsh(e.P))
    if magnitudes.max() == 0 or magnitudes.min() / magnitudes.max() < GEOMETRY.singular:
        raise DegenerateQuadric(f"eigenvalue magnitudes {magnitudes}")
    return np.linalg.solve(e.P, -0.5 * e.q)


def _canonical_sign(vector):
    for component in vector:
        if abs(component) > GEOMETRY.eigen_degenerate:
            return vector if component > 0 else -vector
    return vector


def _jacobi_3x3(P, sweeps=50):
    A = np.array(P, dtype=float)
    V = np.eye(3)
    scale = max(1.0, np.max(np.abs(A)))
    for _ in range(sweeps):
        off = math.sqrt(A[0, 1] ** 2 + A[0, 2] ** 2 + A[1, 2] ** 2)
        if off <= 1e-16 * scale:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            if A[p, q] == 0.0:
                continue
            theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
            t = 1.0 if theta == 0 else math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            J = np.eye(3)
            J[p, p] = J[q, q] = c
            J[p, q] = s
            J[q, p] = -s
            A = J.T @ A @ J
            V = V @ J
    return np.diag(A).copy(), V


def _axis_aligned_basis(vectors):
    """Orthonormal basis of span(vectors) built from projected canonical axes."""
    d = vectors.shape[1]
    projector = vectors.T @ vectors
    basis = []
    remaining = list(range(d))
    while len(basis) < vectors.shape[0]:
        candidates = []
        for axis in remaining:
            w = projector[:, axis].copy()
            for b in basis:
                w -= (w @ b) * b
            candidates.append((np.linalg.norm(w), axis, w))
        norm, axis, w = max(candidates, key=lambda item: (item[0], -item[1]))
        remaining.remove(axis)
        basis.append(w / norm)
    return np.array(basis)


def eigen_symmetric(P):
    """Ascending eigenvalues and unit eigenvectors of a symmetric 2x2 or 3x3 matrix."""
    P = np.asarray(P, dtype=float)
    d = P.shape[0]
    if P.shape != (d, d) or d not in (2, 3):
        raise DimensionMismatch(f"matrix has shape {P.shape}")
    P = 0.5 * (P + P.T)
    tol = GEOMETRY.eigen_degenerate
    if d == 2:
        a, b, c = P[0, 0], P[0, 1], P[1, 1]
        mid = 0.5 * (a + c)
        radius = math.hypot(0.5 * (a - c), b)
        values = np.array([mid - radius, mid + radius])
        if 2.0 * radius <= tol * (1.0 + abs(mid)):
            return Spectrum(_frozen(values), _frozen(np.eye(2)))
        theta = 0.5 * math.atan2(2.0 * b, a - c)
        v_max = np.array([math.cos(theta), math.sin(theta)])
        v_min = np.array([-v_max[1], v_max[0]])
        vectors = np.array([_canonical_sign(v_min), _canonical_sign(v_max)])
        return Spectrum(_frozen(values), _frozen(vectors))

    values, V = _jacobi_3x3(P)
    order = np.argsort(values, kind='stable')
    values = values[order]
    vectors = V[:, order].T
    # Repeated eigenvalues: replace the cluster's vectors by an axis-aligned basis.
    i = 0
    while i < d:
        j = i + 1
        while j < d and values[j] - values[j - 1] <= tol * (1.0 + abs(values[j])):
            j += 1
        if j - i > 1:
            vectors[i:j] = _axis_aligned_basis(vectors[i:j])
            values[i:j] = [v @ P @ v for v in vectors[i:j]]
        else:
            vectors[i] = _canonical_sign(vectors[i] / np.linalg.norm(vectors[i]))
        i = j
    return Spectrum(_frozen(values), _frozen(vectors))


def rotate_2d(v, degrees):
    """Rotate a 2D vector anticlockwise by `degrees`."""
    angle = math.radians(degrees)
    c, s = math.cos(angle), math.sin(angle)
    v = np.asarray(v, dtype=float)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def local_to_global(pose, v_local):
    v_local = np.asarray(v_local, dtype=float)
    if v_local.shape[-1] != pose.dim:
        raise DimensionMismatch(f"vector has length {v_local.shape[-1]}, pose is {pose.dim}D")
    return pose.position + v_local @ pose.frame.T


def global_to_local(pose, z):
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != pose.dim:
        raise DimensionMismatch(f"point has length {z.shape[-1]}, pose is {pose.dim}D")
    return (z - pose.position) @ pose.frame


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)
