"""
Scenario files: JSON documents describing the world, the agent, start, goal
and planner parameter overrides. Loading validates every section with Django
forms and resolves all defaults, so `dump_scenario` writes a complete file.
"""
import json
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import Delaunay

from tunnel.agents import AgentModel, PlaneDims, extremum_points
from tunnel.exceptions import EcanError, ScenarioError
from tunnel.forms import (
    AgentForm, BoxDimsForm, BoxForm, ObstaclesForm, ParamsForm, RandomPointsForm, ScenarioForm, StartForm,
)
from tunnel.geometry import Pose
from tunnel.planner import PlannerParams
from tunnel.world import Box, Environment, convex_polygon, random_point_obstacles

audit_logger = logging.getLogger('audit_logger')

DEFAULT_CLEARANCE = 0.5


@dataclass(frozen=True)
class AgentSpec:
    kind: str = 'point'
    dims: tuple = ()


@dataclass(frozen=True)
class RandomPoints:
    count: int
    lo: tuple
    hi: tuple
    clearance: float = DEFAULT_CLEARANCE


@dataclass(frozen=True)
class ObstacleSpec:
    points: tuple = ()
    boxes: tuple = ()
    polygons: tuple = ()
    random_points: RandomPoints = None

    @property
    def has_finite(self):
        return bool(self.boxes or self.polygons)


@dataclass(frozen=True)
class Scenario:
    dimension: int
    agent: AgentSpec
    start_position: tuple
    start_heading: tuple
    goal: tuple
    obstacles: ObstacleSpec
    params: PlannerParams
    seed: int = 0

    def build_agent(self):
        dims = dict(self.agent.dims)
        if self.agent.kind == 'box':
            return AgentModel.box_2d(dims['width'], dims['height'])
        if self.agent.kind == 'plane':
            return AgentModel.plane_3d(PlaneDims(**dims))
        return AgentModel.point(self.dimension)

    def start_pose(self):
        return Pose.from_heading(np.array(self.start_position), np.array(self.start_heading))

    def with_seed(self, seed):
        return replace(self, seed=seed)

    def with_params(self, **values):
        return replace(self, params=self.params.with_overrides(**values))


def build_environment(scenario):
    obstacles = scenario.obstacles
    points = np.array(obstacles.points, dtype=float).reshape(-1, scenario.dimension)
    spec = obstacles.random_points
    if spec is not None and spec.count:
        rng = np.random.default_rng(scenario.seed)
        generated = random_point_obstacles(
            rng, spec.count, spec.lo, spec.hi, spec.clearance,
            keep_clear=[scenario.start_position, scenario.goal],
        )
        points = np.vstack([points, generated])
    return Environment(
        dim=scenario.dimension,
        point_obstacles=points,
        boxes=[Box(lo, hi) for lo, hi in obstacles.boxes],
        polygons=[convex_polygon(vertices) for vertices in obstacles.polygons],
    )


def _line_of(text, key):
    """1-based line of the first occurrence of a JSON key, for diagnostics."""
    needle = f'"{key.split(".")[-1]}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def _validated(form_class, data, prefix, text):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ScenarioError("expected an object", field=prefix.rstrip('.'), line=_line_of(text, prefix.rstrip('.')))
    form = form_class(data)
    unknown = sorted(set(data) - set(form.fields))
    if unknown:
        field = f"{prefix}{unknown[0]}"
        raise ScenarioError("unknown key", field=field, line=_line_of(text, field))
    if not form.is_valid():
        name, errors = next(iter(form.errors.items()))
        field = f"{prefix}{name}" if name != '__all__' else prefix.rstrip('.')
        raise ScenarioError(errors[0], field=field, line=_line_of(text, field))
    return form


def _number(value, field, text):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioError(f"expected a finite number, got {value!r}", field=field, line=_line_of(text, field))
    return float(value)


def _vector(value, dim, field, text):
    if not isinstance(value, (list, tuple)) or len(value) != dim:
        raise ScenarioError(f"expected a list of {dim} numbers, got {value!r}", field=field,
                            line=_line_of(text, field))
    return tuple(_number(v, field, text) for v in value)


def _vectors(value, dim, field, text):
    if value is None:
        return ()
    if not isinstance(value, (list, tuple)):
        raise ScenarioError("expected a list", field=field, line=_line_of(text, field))
    return tuple(_vector(v, dim, field, text) for v in value)


def _agent(data, dim, text):
    form = _validated(AgentForm, data or {'kind': 'point'}, 'agent.', text)
    kind = form.cleaned_data['kind']
    dims = form.cleaned_data['dims'] or {}
    if kind == 'box':
        if dim != 2:
            raise ScenarioError("box agents are 2D", field='agent.kind', line=_line_of(text, 'agent.kind'))
        box = _validated(BoxDimsForm, dims, 'agent.dims.', text).cleaned_data
        return AgentSpec('box', tuple(sorted(box.items())))
    if kind == 'plane':
        if dim != 3:
            raise ScenarioError("plane agents are 3D", field='agent.kind', line=_line_of(text, 'agent.kind'))
        if not isinstance(dims, dict):
            raise ScenarioError("expected an object", field='agent.dims', line=_line_of(text, 'agent.dims'))
        try:
            resolved = PlaneDims(**{k: _number(v, f'agent.dims.{k}', text) for k, v in dims.items()})
        except TypeError as e:
            raise ScenarioError(str(e), field='agent.dims', line=_line_of(text, 'agent.dims'))
        return AgentSpec('plane', tuple(sorted(resolved.to_dict().items())))
    return AgentSpec('point', ())


def _obstacles(data, dim, text):
    cleaned = _validated(ObstaclesForm, data, 'obstacles.', text).cleaned_data
    boxes = []
    for raw in cleaned['boxes'] or []:
        box = _validated(BoxForm, raw, 'obstacles.boxes.', text).cleaned_data
        boxes.append((_vector(box['min'], dim, 'obstacles.boxes.min', text),
                      _vector(box['max'], dim, 'obstacles.boxes.max', text)))
    polygons = tuple(
        _vectors(vertices, 2, 'obstacles.polygons', text) for vertices in cleaned['polygons'] or []
    )
    if polygons and dim != 2:
        raise ScenarioError("polygons are 2D only", field='obstacles.polygons', line=_line_of(text, 'polygons'))
    random_points = None
    if cleaned['random_points']:
        spec = _validated(RandomPointsForm, cleaned['random_points'], 'obstacles.random_points.', text).cleaned_data
        clearance = spec['clearance']
        random_points = RandomPoints(
            count=spec['count'],
            lo=_vector(spec['min'], dim, 'obstacles.random_points.min', text),
            hi=_vector(spec['max'], dim, 'obstacles.random_points.max', text),
            clearance=DEFAULT_CLEARANCE if clearance is None else clearance,
        )
    return ObstacleSpec(
        points=_vectors(cleaned['points'], dim, 'obstacles.points', text),
        boxes=tuple(boxes),
        polygons=polygons,
        random_points=random_points,
    )


def _heading(value, dim, position, goal, text):
    if value is None:
        bearing = np.subtract(goal, position)
        norm = np.linalg.norm(bearing)
        if norm == 0:
            return tuple(float(v) for v in np.eye(dim)[0])
        return tuple(float(v) for v in bearing / norm)
    if dim == 2 and not isinstance(value, (list, tuple)):
        degrees = math.radians(_number(value, 'start.heading', text))
        return (math.cos(degrees), math.sin(degrees))
    heading = _vector(value, dim, 'start.heading', text)
    if np.linalg.norm(heading) == 0:
        raise ScenarioError("heading has zero length", field='start.heading', line=_line_of(text, 'heading'))
    return heading


def _check_start(scenario, text):
    agent = scenario.build_agent()
    env = build_environment(scenario)
    body = extremum_points(agent, scenario.start_pose())
    line = _line_of(text, 'start')
    if np.any(env.occupied(body)):
        raise ScenarioError("start body overlaps a finite obstacle", field='start.position', line=line)
    points = env.point_obstacles
    if not points.shape[0]:
        return
    if agent.is_point:
        overlapping = np.linalg.norm(points - body[0], axis=1) <= 1e-9
    else:
        overlapping = Delaunay(body).find_simplex(points) >= 0
    if np.any(overlapping):
        raise ScenarioError("a point obstacle lies on the start body", field='start.position', line=line)


def load_scenario(text):
    """Parse and validate a scenario document; every omitted parameter takes its default."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(e.msg, line=e.lineno)
    form = _validated(ScenarioForm, data, '', text)
    cleaned = form.cleaned_data
    dim = cleaned['dimension']
    start = _validated(StartForm, cleaned['start'], 'start.', text).cleaned_data
    position = _vector(start['position'], dim, 'start.position', text)
    goal = _vector(cleaned['goal'], dim, 'goal', text)
    obstacles = _obstacles(cleaned['obstacles'], dim, text)
    params_form = _validated(ParamsForm, cleaned['params'], 'params.', text)
    try:
        params = PlannerParams.defaults(dim, obstacles.has_finite).with_overrides(**params_form.overrides())
    except EcanError as e:
        raise ScenarioError(str(e), field='params', line=_line_of(text, 'params'))

    scenario = Scenario(
        dimension=dim,
        agent=_agent(cleaned['agent'], dim, text),
        start_position=position,
        start_heading=_heading(start['heading'], dim, position, goal, text),
        goal=goal,
        obstacles=obstacles,
        params=params,
        seed=cleaned['seed'] or 0,
    )
    _check_start(scenario, text)
    audit_logger.debug(f"loaded {dim}D scenario with {len(obstacles.points)} points and {len(obstacles.boxes)} boxes")
    return scenario


def scenario_to_dict(scenario):
    obstacles = scenario.obstacles
    document = {
        'dimension': scenario.dimension,
        'seed': scenario.seed,
        'agent': {'kind': scenario.agent.kind, 'dims': dict(scenario.agent.dims)},
        'start': {'position': list(scenario.start_position), 'heading': list(scenario.start_heading)},
        'goal': list(scenario.goal),
        'obstacles': {
            'points': [list(p) for p in obstacles.points],
            'boxes': [{'min': list(lo), 'max': list(hi)} for lo, hi in obstacles.boxes],
            'polygons': [[list(v) for v in polygon] for polygon in obstacles.polygons],
        },
        'params': scenario.params.to_dict(),
    }
    if obstacles.random_points is not None:
        spec = obstacles.random_points
        document['obstacles']['random_points'] = {
            'count': spec.count, 'min': list(spec.lo), 'max': list(spec.hi), 'clearance': spec.clearance,
        }
    return document


def dump_scenario(scenario):
    return json.dumps(scenario_to_dict(scenario), indent=2)
