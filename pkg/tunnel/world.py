"""
Obstacle worlds and the simulated field-of-view sensor.

The FOV is a polar (2D) or spherical (3D) lattice in the agent frame, built
once per run. Sensing maps it through the current pose and keeps the lattice
points that land on a finite obstacle, plus raw point obstacles inside the
FOV wedge.
"""
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import shapely
from shapely.geometry import Polygon

from tunnel.conf import GEOMETRY
from tunnel.exceptions import DimensionMismatch, EmptyAxisError, ScenarioError
from tunnel.geometry import global_to_local, local_to_global

audit_logger = logging.getLogger('audit_logger')


@dataclass(frozen=True, eq=False)
class Box:
    """Closed axis-aligned box [lo, hi]."""
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or lo.shape[0] not in (2, 3):
            raise DimensionMismatch(f"box corners {lo.tolist()} and {hi.tolist()}")
        if np.any(hi <= lo):
            raise ScenarioError(f"box {lo.tolist()} -> {hi.tolist()} has no volume", field='obstacles.boxes')
        object.__setattr__(self, 'lo', lo)
        object.__setattr__(self, 'hi', hi)

    @property
    def dim(self):
        return self.lo.shape[0]

    def contains(self, points, tol=0.0):
        return np.all((points >= self.lo - tol) & (points <= self.hi + tol), axis=-1)


def convex_polygon(vertices):
    polygon = Polygon(vertices)
    if not polygon.is_valid or polygon.area <= 0:
        raise ScenarioError(f"polygon {vertices} is degenerate", field='obstacles.polygons')
    if polygon.convex_hull.area - polygon.area > 1e-9 * polygon.area:
        raise ScenarioError(f"polygon {vertices} is not convex", field='obstacles.polygons')
    return polygon


@dataclass(eq=False)
class Environment:
    dim: int
    point_obstacles: np.ndarray = None
    boxes: list = field(default_factory=list)
    polygons: list = field(default_factory=list)
    bounds: Box = None

    def __post_init__(self):
        points = np.zeros((0, self.dim)) if self.point_obstacles is None else self.point_obstacles
        self.point_obstacles = np.asarray(points, dtype=float).reshape(-1, self.dim)
        if any(box.dim != self.dim for box in self.boxes):
            raise DimensionMismatch(f"box dimension differs from the {self.dim}D world")
        if self.polygons and self.dim != 2:
            raise DimensionMismatch("convex polygons are only supported in 2D worlds")
        # Closed-set membership: grow each polygon by the occupancy tolerance once.
        self._grown = [shapely.buffer(p, GEOMETRY.occupancy) for p in self.polygons]
        for grown in self._grown:
            shapely.prepare(grown)

    @property
    def has_finite_obstacles(self):
        return bool(self.boxes or self.polygons)

    def occupied(self, points):
        """Vectorised occupancy of an (n, d) array of world points."""
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        hit = np.zeros(points.shape[0], dtype=bool)
        for box in self.boxes:
            hit |= box.contains(points, GEOMETRY.occupancy)
        for grown in self._grown:
            hit |= shapely.intersects_xy(grown, points[:, 0], points[:, 1])
        return hit


def occupancy(env, z):
    """True iff z is inside or on a finite obstacle."""
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != env.dim:
        raise DimensionMismatch(f"point has length {z.shape[-1]}, world is {env.dim}D")
    return bool(env.occupied(z)[0])


@dataclass(frozen=True)
class FovSpec:
    """Range in world units; half-angles and angular steps in degrees."""
    R_fov: float
    theta_fov: float
    dr: float
    dtheta: float
    phi_fov: float = 40.0
    dphi: float = 0.5

    def __post_init__(self):
        for name in ('R_fov', 'theta_fov', 'dr', 'dtheta', 'phi_fov', 'dphi'):
            if not getattr(self, name) > 0:
                raise ScenarioError(f"must be positive, got {getattr(self, name)}", field=f'params.{name}')
        if self.theta_fov > 180:
            raise ScenarioError(f"half-angle {self.theta_fov} exceeds 180", field='params.theta_fov')
        if self.phi_fov > 90:
            raise ScenarioError(f"half-angle {self.phi_fov} exceeds 90", field='params.phi_fov')

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class FovGrid:
    """Lattice points in the agent frame, shaped (rays, radii, d), nearest radius first."""
    points: np.ndarray
    radii: np.ndarray
    fov: FovSpec

    @property
    def dim(self):
        return self.points.shape[-1]

    @property
    def size(self):
        return self.points.shape[0] * self.points.shape[1]

    @property
    def flat(self):
        return self.points.reshape(-1, self.dim)


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    grid_hits: int = 0
    point_hits: int = 0

    def __len__(self):
        return self.points.shape[0]


def _count(extent, step, axis):
    if step > extent + 1e-12:
        raise EmptyAxisError(f"{axis} step {step} exceeds its range {extent}")
    ratio = extent / step
    nearest = round(ratio)
    return int(nearest) if abs(ratio - nearest) < 1e-9 else int(math.floor(ratio))


def _angles(half_angle, step, axis):
    """
    Cell-centred angles covering [-half-1/2, half+1/2] degrees in cells of `step`.

    With step = 1 these are the integers -half..half; finer steps keep the
    (2 * half + 1) / step count of the grid-size formula.
    """
    count = _count(2.0 * half_angle + 1.0, step, axis)
    start = -half_angle - 0.5 + 0.5 * step
    return start + step * np.arange(count)


def grid_size_formula(fov, dim):
    """Grid-point count from the closed-form expression (angles in degrees)."""
    size = (2 * fov.theta_fov + 1) * fov.R_fov / (fov.dr * fov.dtheta)
    if dim == 3:
        size *= (2 * fov.phi_fov + 1) / fov.dphi
    return size


def build_fov_grid(fov, dim):
    if dim not in (2, 3):
        raise DimensionMismatch(f"FOV grids are 2D or 3D, got {dim}")
    radii = fov.dr * np.arange(1, _count(fov.R_fov, fov.dr, 'radial') + 1)
    theta = np.radians(_angles(fov.theta_fov, fov.dtheta, 'theta'))
    if dim == 2:
        directions = np.column_stack([np.cos(theta), np.sin(theta)])
    else:
        phi = np.radians(_angles(fov.phi_fov, fov.dphi, 'phi'))
        t, p = np.meshgrid(theta, phi, indexing='ij')
        directions = np.column_stack([
            (np.cos(p) * np.cos(t)).ravel(),
            (np.cos(p) * np.sin(t)).ravel(),
            np.sin(p).ravel(),
        ])
    points = directions[:, None, :] * radii[None, :, None]
    audit_logger.debug(f"built {dim}D FOV grid with {points.shape[0]} rays x {radii.shape[0]} radii")
    return FovGrid(points, radii, fov)


def in_fov_wedge(fov, local):
    """Mask of local-frame points within range and inside the angular half-widths."""
    local = np.atleast_2d(np.asarray(local, dtype=float))
    distance = np.linalg.norm(local, axis=1)
    inside = (distance <= fov.R_fov + 1e-9) & (distance > 0)
    theta = np.degrees(np.arctan2(local[:, 1], local[:, 0]))
    inside &= np.abs(theta) <= fov.theta_fov
    if local.shape[1] == 3:
        phi = np.degrees(np.arctan2(local[:, 2], np.hypot(local[:, 0], local[:, 1])))
        inside &= np.abs(phi) <= fov.phi_fov
    return inside


def sense(env, pose, grid, first_return=False):
    """
    Obstacle points visible from `pose`.

    With first_return only the nearest occupied lattice point of every ray is
    kept; raw point obstacles are always passed through unchanged.
    """
    if env.dim != pose.dim or grid.dim != pose.dim:
        raise DimensionMismatch(f"world {env.dim}D, pose {pose.dim}D, grid {grid.dim}D")
    rays, radii = grid.points.shape[:2]
    world = local_to_global(pose, grid.flat)
    occupied = env.occupied(world).reshape(rays, radii)
    if first_return:
        hit_rays = np.flatnonzero(occupied.any(axis=1))
        nearest = np.argmax(occupied[hit_rays], axis=1)
        grid_points = world.reshape(rays, radii, -1)[hit_rays, nearest]
    else:
        grid_points = world[occupied.ravel()]

    raw = env.point_obstacles
    if raw.shape[0]:
        raw = raw[in_fov_wedge(grid.fov, global_to_local(pose, raw))]
    points = np.vstack([grid_points, raw]) if raw.shape[0] else grid_points
    return PointCloud(points.reshape(-1, env.dim), grid_points.shape[0], raw.shape[0])


def random_point_obstacles(rng, count, lo, hi, clearance=0.0, keep_clear=()):
    """Draw `count` uniform points in the box [lo, hi] at least `clearance` from every keep_clear point."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    keep_clear = np.asarray(keep_clear, dtype=float).reshape(-1, lo.shape[0])
    accepted = []
    for _ in range(100):
        batch = rng.uniform(lo, hi, size=(count, lo.shape[0]))
        if keep_clear.shape[0]:
            gaps = np.linalg.norm(batch[:, None, :] - keep_clear[None, :, :], axis=2)
            batch = batch[np.all(gaps > clearance, axis=1)]
        accepted.extend(batch)
        if len(accepted) >= count:
            return np.array(accepted[:count])
    raise ScenarioError(f"could not place {count} points with clearance {clearance}", field='obstacles.random_points')
