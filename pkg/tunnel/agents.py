"""
Agent bodies as tables of extremum offsets in the agent's local frame.

Containing every extremum point inside an ellipsoid contains the whole body
hull, so the fit and the step-length computation only ever see these points.
"""
from dataclasses import asdict, dataclass, fields

import numpy as np

from tunnel.geometry import Pose, local_to_global, rotate_2d, unit
from tunnel.exceptions import DimensionMismatch, ScenarioError

POINT = 'point'
BOX = 'box'
PLANE = 'plane'


@dataclass(frozen=True)
class PlaneDims:
    """Fixed-wing body; lengths along local x, spans along local y (wings) or z (fins)."""
    body_length: float = 1.2
    body_width: float = 0.2
    body_height: float = 0.2
    nose_length: float = 0.3
    front_span: float = 0.7
    front_chord: float = 0.3
    rear_span: float = 0.35
    rear_chord: float = 0.2
    top_span: float = 0.3
    top_chord: float = 0.15
    wing_thickness: float = 0.04
    front_wing_x: float = 0.05
    rear_wing_x: float = -0.45
    top_wing_x: float = -0.45
    fin_spacing: float = 0.08

    # Wing stations are positions, so they may be zero or negative.
    STATIONS = ('front_wing_x', 'rear_wing_x', 'top_wing_x')

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name not in self.STATIONS and not value > 0:
                raise ScenarioError(f"must be positive, got {value}", field=f'agent.dims.{f.name}')

    def to_dict(self):
        return asdict(self)


def plane33_offsets(dims=None):
    """8 body corners, the nose tip, then 4 corners at each of the six wing free ends."""
    dims = dims or PlaneDims()
    half_l, half_w, half_h = dims.body_length / 2, dims.body_width / 2, dims.body_height / 2
    half_t = dims.wing_thickness / 2
    offsets = [
        (sx * half_l, sy * half_w, sz * half_h)
        for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)
    ]
    offsets.append((half_l + dims.nose_length, 0.0, 0.0))

    for station, span, chord in (
            (dims.front_wing_x, dims.front_span, dims.front_chord),
            (dims.rear_wing_x, dims.rear_span, dims.rear_chord),
    ):
        tip = half_w + span
        for side in (1, -1):
            offsets.extend(
                (station + sx * chord / 2, side * tip, sz * half_t)
                for sx in (1, -1) for sz in (1, -1)
            )

    # Twin vertical fins; their free ends sit above the body.
    top = half_h + dims.top_span
    for side in (1, -1):
        offsets.extend(
            (dims.top_wing_x + sx * dims.top_chord / 2, side * dims.fin_spacing + sy * half_t, top)
            for sx in (1, -1) for sy in (1, -1)
        )
    return np.array(offsets, dtype=float)


def box_offsets(width, height):
    if not (width > 0 and height > 0):
        raise ScenarioError(f"box sides must be positive, got {width} x {height}", field='agent.dims')
    return np.array([
        (sx * width / 2, sy * height / 2) for sx in (1, -1) for sy in (1, -1)
    ], dtype=float)


@dataclass(frozen=True, eq=False)
class AgentModel:
    kind: str
    offsets: np.ndarray
    dims: dict = None

    def __post_init__(self):
        offsets = np.array(self.offsets, dtype=float)
        offsets.setflags(write=False)
        object.__setattr__(self, 'offsets', offsets)

    @classmethod
    def point(cls, dim):
        return cls(POINT, np.zeros((1, dim)), {})

    @classmethod
    def box_2d(cls, width, height):
        return cls(BOX, box_offsets(width, height), {'width': float(width), 'height': float(height)})

    @classmethod
    def plane_3d(cls, dims=None):
        dims = dims or PlaneDims()
        return cls(PLANE, plane33_offsets(dims), dims.to_dict())

    @property
    def m(self):
        return self.offsets.shape[0]

    @property
    def dim(self):
        return self.offsets.shape[1]

    @property
    def is_point(self):
        return self.kind == POINT

    @property
    def body_radius(self):
        return float(np.max(np.linalg.norm(self.offsets, axis=1)))

    def world_offsets(self, pose):
        """Offsets rotated into the world frame (not translated)."""
        return self.offsets @ pose.frame.T


def extremum_points(model, pose):
    if model.dim != pose.dim:
        raise DimensionMismatch(f"{model.kind} agent is {model.dim}D, pose is {pose.dim}D")
    return local_to_global(pose, model.offsets)


def _minimal_rotation(a, b, fallback_axis):
    """Rotation matrix carrying unit a onto unit b about the axis a x b."""
    v = np.cross(a, b)
    c = float(a @ b)
    if c < -1.0 + 1e-12:
        k = unit(fallback_axis - (fallback_axis @ a) * a)
        return 2.0 * np.outer(k, k) - np.eye(3)
    vx = np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])
    return np.eye(3) + vx + vx @ vx / (1.0 + c)


def advance(pose, z_n, l_n):
    """Translate by l_n along z_n and turn the local x-axis onto z_n."""
    if l_n < 0:
        raise DimensionMismatch(f"negative step length {l_n}")
    if l_n == 0:
        return pose
    z_n = unit(z_n)
    position = pose.position + l_n * z_n
    if pose.dim == 2:
        return Pose(position, np.column_stack([z_n, rotate_2d(z_n, 90.0)]))

    rotated = _minimal_rotation(pose.heading, z_n, pose.frame[:, 2]) @ pose.frame
    # Gram-Schmidt with column 0 pinned to z_n so drift never accumulates.
    y = rotated[:, 1] - (rotated[:, 1] @ z_n) * z_n
    y = unit(y)
    return Pose(position, np.column_stack([z_n, y, np.cross(z_n, y)]))
