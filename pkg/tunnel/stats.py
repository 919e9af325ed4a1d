"""
Per-step solver timings and their run summary.
"""
import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

audit_logger = logging.getLogger('audit_logger')

STEP_COLUMNS = ('t', 'solve_time_eq1', 'constraints', 'solve_time_dir', 'solve_time_steplen')
SUMMARY_COLUMNS = ('program', 'calls', 'mean_time', 'std_time', 'min_constraints', 'max_constraints')

# Timing key in StepRecord.timings -> program name in the summary.
PROGRAMS = (('eq1', 'ellipsoid_fit'), ('dir', 'direction'), ('steplen', 'step_length'))


@dataclass(frozen=True)
class ProgramStats:
    calls: int
    mean_time: float
    std_time: float


@dataclass(frozen=True)
class RunStats:
    steps: int
    programs: dict
    min_constraints: int
    max_constraints: int
    boundary_reach_evaluations: int
    phase_one_solves: int

    def summary_rows(self):
        rows = []
        for _, name in PROGRAMS:
            program = self.programs[name]
            rows.append({
                'program': name,
                'calls': program.calls,
                'mean_time': program.mean_time,
                'std_time': program.std_time,
                'min_constraints': self.min_constraints if name == 'ellipsoid_fit' else '',
                'max_constraints': self.max_constraints if name == 'ellipsoid_fit' else '',
            })
        rows.append({'program': 'boundary_reach', 'calls': self.boundary_reach_evaluations})
        rows.append({'program': 'phase_one', 'calls': self.phase_one_solves})
        return rows


def _program_stats(times):
    if not times:
        return ProgramStats(0, 0.0, 0.0)
    times = np.asarray(times, dtype=float)
    return ProgramStats(int(times.shape[0]), float(np.mean(times)), float(np.std(times)))


def run_stats(trace):
    programs = {
        name: _program_stats([s.timings[key] for s in trace.steps if s.timings.get(key) is not None])
        for key, name in PROGRAMS
    }
    constraints = [s.constraints for s in trace.steps]
    return RunStats(
        steps=len(trace.steps),
        programs=programs,
        min_constraints=min(constraints, default=0),
        max_constraints=max(constraints, default=0),
        boundary_reach_evaluations=sum(1 for s in trace.steps if s.l_e is not None),
        phase_one_solves=sum(1 for s in trace.steps if s.phase_one),
    )


def step_rows(trace):
    return [
        {
            't': s.t,
            'solve_time_eq1': s.timings.get('eq1'),
            'constraints': s.constraints,
            'solve_time_dir': s.timings.get('dir'),
            'solve_time_steplen': s.timings.get('steplen'),
        }
        for s in trace.steps
    ]


def _write(path, columns, rows):
    with open(path, 'w', newline='', encoding='utf-8') as stream:
        writer = csv.DictWriter(stream, fieldnames=columns, restval='')
        writer.writeheader()
        for row in rows:
            writer.writerow({k: '' if v is None else v for k, v in row.items()})


def emit_stats(trace, out_dir=None):
    """Summarise a trace; with out_dir, also write stats.csv and summary.csv there."""
    stats = run_stats(trace)
    if out_dir is not None:
        out_dir = Path(out_dir)
        _write(out_dir / 'stats.csv', STEP_COLUMNS, step_rows(trace))
        _write(out_dir / 'summary.csv', SUMMARY_COLUMNS, stats.summary_rows())
        fit = stats.programs['ellipsoid_fit']
        audit_logger.info(
            f"stats: {stats.steps} steps, fit {fit.mean_time * 1e3:.2f} ms mean, "
            f"{stats.min_constraints}-{stats.max_constraints} constraints")
    return stats
