"""
SVG views of a run: obstacles, the ellipsoid tunnel, the path and start/goal
markers. 3D runs are drawn as orthographic projections onto a coordinate plane.
"""
import logging

import numpy as np
from django.template.loader import render_to_string

from tunnel.exceptions import DegenerateEllipsoid, DimensionMismatch
from tunnel.scenario import build_environment

audit_logger = logging.getLogger('audit_logger')

SEGMENTS = 128
PLANES = {'xy': (0, 1), 'xz': (0, 2), 'yz': (1, 2)}
PIXELS_PER_UNIT = 40.0
OBSTACLE_RADIUS = 0.05
MARKER_RADIUS = 0.15


def fmt(value):
    return f"{float(value):.6f}"


def _pairs(points):
    return ' '.join(f"{fmt(x)},{fmt(y)}" for x, y in points)


class Bounds:
    def __init__(self):
        self.lo = None
        self.hi = None

    def require(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if not points.shape[0]:
            return
        lo, hi = points.min(axis=0), points.max(axis=0)
        self.lo = lo if self.lo is None else np.minimum(self.lo, lo)
        self.hi = hi if self.hi is None else np.maximum(self.hi, hi)

    def padded(self):
        pad = max(float(np.max(self.hi - self.lo)) * 0.05, 0.5)
        return self.lo - pad, self.hi + pad


def ellipse_outline(e, axes=(0, 1), segments=SEGMENTS):
    """
    Boundary points of the ellipsoid, or of its shadow on the plane `axes`.

    With Psi = 0 written as {c + L u : |u| = 1}, E = L L', the shadow of a 3D
    ellipsoid is the ellipse of the 2x2 sub-block of E.
    """
    center, E = e.shape_matrix()
    index = np.array(axes)
    L = np.linalg.cholesky(E[np.ix_(index, index)])
    angles = 2.0 * np.pi * np.arange(segments) / segments
    circle = np.vstack([np.cos(angles), np.sin(angles)])
    return (center[index][:, None] + L @ circle).T


def _path_data(points):
    head, *rest = points
    commands = [f"M {fmt(head[0])},{fmt(head[1])}"]
    commands.extend(f"L {fmt(x)},{fmt(y)}" for x, y in rest)
    commands.append('Z')
    return ' '.join(commands)


def render_context(trace, scenario, plane='xy'):
    if trace.dimension == 2:
        plane = 'xy'
    if plane not in PLANES:
        raise DimensionMismatch(f"unknown projection plane {plane!r}")
    axes = PLANES[plane]
    index = list(axes)
    bounds = Bounds()
    env = build_environment(scenario)

    points = env.point_obstacles[:, index]
    bounds.require(points)
    rects = []
    for box in env.boxes:
        lo, hi = box.lo[index], box.hi[index]
        bounds.require([lo, hi])
        rects.append({'x': fmt(lo[0]), 'y': fmt(lo[1]), 'width': fmt(hi[0] - lo[0]), 'height': fmt(hi[1] - lo[1])})
    polygons = []
    for polygon in env.polygons:
        vertices = np.asarray(polygon.exterior.coords)[:-1]
        bounds.require(vertices)
        polygons.append(_pairs(vertices))

    ellipses = []
    for step in trace.steps:
        try:
            outline = ellipse_outline(step.ellipsoid, axes)
        except (DegenerateEllipsoid, np.linalg.LinAlgError) as e:
            audit_logger.warning(f"step {step.t}: ellipsoid not drawn ({e})")
            continue
        bounds.require(outline)
        ellipses.append(_path_data(outline))

    positions = trace.positions()[:, index]
    bounds.require(positions)
    start = trace.start.position[index]
    goal = np.asarray(trace.goal, dtype=float)[index]
    bounds.require([start, goal])

    lo, hi = bounds.padded()
    size = hi - lo
    return {
        # y is flipped by the outer group, so the view box starts at -max_y.
        'view_box': f"{fmt(lo[0])} {fmt(-hi[1])} {fmt(size[0])} {fmt(size[1])}",
        'width': fmt(size[0] * PIXELS_PER_UNIT),
        'height': fmt(size[1] * PIXELS_PER_UNIT),
        'plane': plane,
        'points': [{'x': fmt(x), 'y': fmt(y)} for x, y in points],
        'point_radius': fmt(OBSTACLE_RADIUS),
        'rects': rects,
        'polygons': polygons,
        'ellipses': ellipses,
        'path': _pairs(positions) if positions.shape[0] > 1 else '',
        'start': {'x': fmt(start[0]), 'y': fmt(start[1])},
        'goal': {'x': fmt(goal[0]), 'y': fmt(goal[1])},
        'marker_radius': fmt(MARKER_RADIUS),
        'outcome': trace.outcome.value,
    }


def render_svg(trace, scenario, plane='xy'):
    """The SVG document as a string; identical inputs give identical bytes."""
    context = render_context(trace, scenario, plane)
    audit_logger.debug(f"rendering {len(context['ellipses'])} ellipses on the {context['plane']} plane")
    return render_to_string('tunnel/tunnel.svg', context)
