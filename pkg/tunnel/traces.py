"""
Trace files: JSON lines, a header document followed by one document per step.
Ellipsoids are stored as (P row-major, q, r).
"""
import json
import logging

import numpy as np

from tunnel.agents import AgentModel
from tunnel.exceptions import EcanError, TraceFormatError
from tunnel.geometry import Ellipsoid, Pose
from tunnel.planner import Outcome, PlannerParams, PlanTrace, StepRecord

audit_logger = logging.getLogger('audit_logger')
error_logger = logging.getLogger('error_logger')

HEADER = 'header'
STEP = 'step'


def _list(array):
    if array is None:
        return None
    return np.asarray(array, dtype=float).tolist()


def _array(values, shape=None):
    if values is None:
        return None
    array = np.asarray(values, dtype=float)
    return array.reshape(shape) if shape is not None else array


def _pose_doc(pose):
    return {'position': _list(pose.position), 'frame': _list(pose.frame)}


def _pose(doc):
    return Pose(_array(doc['position']), _array(doc['frame']))


def header_doc(trace):
    return {
        'kind': HEADER,
        'dimension': trace.dimension,
        'agent': {
            'kind': trace.agent.kind,
            'offsets': _list(trace.agent.offsets),
            'dims': trace.agent.dims or {},
        },
        'start': _pose_doc(trace.start),
        'goal': _list(trace.goal),
        'params': trace.params.to_dict(),
        'outcome': trace.outcome.value,
        'final': _pose_doc(trace.final_pose),
        'steps': len(trace.steps),
        'grid_size': trace.grid_size,
    }


def step_doc(step):
    return {
        'kind': STEP,
        't': step.t,
        'position': _list(step.position),
        'frame': _list(step.frame),
        'ellipsoid': step.ellipsoid.to_dict(),
        'cloud': _list(step.cloud),
        'fit_goal': _list(step.fit_goal),
        'psi_goal': step.psi_goal,
        'branch': step.branch,
        'z_n': _list(step.z_n),
        'l_n': step.l_n,
        'z_e': _list(step.z_e),
        'l_e': step.l_e,
        'z_b': _list(step.z_b),
        'delta2': step.delta2,
        'constraints': step.constraints,
        'timings': step.timings,
        'kkt_residual': step.kkt_residual,
        'duality_gap': step.duality_gap,
        'phase_one': step.phase_one,
    }


def dump_trace(trace, path):
    with open(path, 'w', encoding='utf-8') as stream:
        stream.write(json.dumps(header_doc(trace)) + '\n')
        for step in trace.steps:
            stream.write(json.dumps(step_doc(step)) + '\n')
    audit_logger.info(f"wrote trace with {len(trace.steps)} steps to {path}")
    return path


def _step(doc, dim):
    return StepRecord(
        t=int(doc['t']),
        position=_array(doc['position']),
        frame=_array(doc['frame']),
        cloud=_array(doc['cloud'], (-1, dim)),
        ellipsoid=Ellipsoid.from_dict(doc['ellipsoid']),
        fit_goal=_array(doc['fit_goal']),
        psi_goal=float(doc['psi_goal']),
        branch=doc['branch'],
        z_n=_array(doc['z_n']),
        l_n=float(doc['l_n']),
        z_e=_array(doc.get('z_e')),
        l_e=doc.get('l_e'),
        z_b=_array(doc.get('z_b')),
        delta2=doc.get('delta2'),
        constraints=int(doc.get('constraints', 0)),
        timings=doc.get('timings') or {},
        kkt_residual=doc.get('kkt_residual'),
        duality_gap=doc.get('duality_gap'),
        phase_one=bool(doc.get('phase_one', False)),
    )


def _trace(header):
    if header.get('kind') != HEADER:
        raise TraceFormatError("first line is not a trace header")
    dim = int(header['dimension'])
    agent = header['agent']
    return PlanTrace(
        dimension=dim,
        agent=AgentModel(agent['kind'], _array(agent['offsets'], (-1, dim)), agent.get('dims') or {}),
        start=_pose(header['start']),
        goal=_array(header['goal']),
        params=PlannerParams.from_dict(header['params']),
        outcome=Outcome(header['outcome']),
        final=_pose(header['final']),
        grid_size=int(header.get('grid_size', 0)),
    )


def load_trace(path):
    """Read a trace written by `dump_trace`; malformed content raises TraceFormatError with its line."""
    try:
        with open(path, encoding='utf-8') as stream:
            lines = [line for line in stream.read().splitlines()]
    except OSError as e:
        error_logger.error(f"Failed to read trace {path}: {str(e)}")
        raise
    trace = None
    expected = None
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            if trace is None:
                trace = _trace(doc)
                expected = doc.get('steps')
            else:
                if doc.get('kind') != STEP:
                    raise TraceFormatError(f"unexpected record kind {doc.get('kind')!r}")
                trace.steps.append(_step(doc, trace.dimension))
        except TraceFormatError as e:
            raise TraceFormatError(f"line {number}: {e.detail}")
        except (ValueError, KeyError, TypeError, EcanError) as e:
            raise TraceFormatError(f"line {number}: {e}")
    if trace is None:
        raise TraceFormatError(f"{path} is empty")
    if expected is not None and expected != len(trace.steps):
        raise TraceFormatError(f"header announces {expected} steps, found {len(trace.steps)}")
    return trace
