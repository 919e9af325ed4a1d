import logging
from dataclasses import dataclass, field
from pathlib import Path

from tunnel.log_handlers import RunAuditHandler
from tunnel.planner import plan
from tunnel.rendering import render_svg
from tunnel.scenario import build_environment, load_scenario
from tunnel.stats import emit_stats
from tunnel.traces import dump_trace

audit_logger = logging.getLogger('audit_logger')
error_logger = logging.getLogger('error_logger')

TRACE_FILE = 'trace.jsonl'
AUDIT_FILE = 'audit.jsonl'
SVG_FILE = 'tunnel.svg'


def read_scenario(path):
    """Read and validate a scenario file."""
    try:
        with open(path, encoding='utf-8') as stream:
            text = stream.read()
    except OSError as e:
        error_logger.error(f"Failed to read scenario {path}: {str(e)}")
        raise
    return load_scenario(text)


@dataclass
class RunResult:
    trace: object
    stats: object = None
    files: dict = field(default_factory=dict)


class RunFacade:
    """Runs one scenario and writes its artifacts into an output directory."""

    def __init__(self, out_dir):
        try:
            self.out_dir = Path(out_dir)
            self.out_dir.mkdir(parents=True, exist_ok=True)
            audit_logger.info(f"Initialized run directory {self.out_dir}")
        except OSError as e:
            error_logger.error(f"Failed to create run directory {out_dir}: {str(e)}")
            raise

    def _attach_audit(self):
        handler = RunAuditHandler(self.out_dir / AUDIT_FILE)
        for name in ('audit_logger', 'error_logger'):
            logging.getLogger(name).addHandler(handler)
        return handler

    @staticmethod
    def _detach_audit(handler):
        for name in ('audit_logger', 'error_logger'):
            logging.getLogger(name).removeHandler(handler)
        handler.close()

    def execute(self, scenario, svg=False, stats=False, plane='xy'):
        """Plan the scenario; the trace is always written, stats and SVG on request."""
        handler = self._attach_audit()
        try:
            trace = plan(
                build_environment(scenario),
                scenario.build_agent(),
                scenario.start_pose(),
                scenario.goal,
                scenario.params,
            )
            result = RunResult(trace, files={'audit': self.out_dir / AUDIT_FILE})
            result.files['trace'] = dump_trace(trace, self.out_dir / TRACE_FILE)
            if stats:
                result.stats = emit_stats(trace, self.out_dir)
                result.files['stats'] = self.out_dir / 'stats.csv'
                result.files['summary'] = self.out_dir / 'summary.csv'
            if svg:
                path = self.out_dir / SVG_FILE
                path.write_text(render_svg(trace, scenario, plane), encoding='utf-8')
                result.files['svg'] = path
            audit_logger.info(f"run finished with {trace.outcome.value}; artifacts in {self.out_dir}")
            return result
        except OSError as e:
            error_logger.error(f"Failed to write run artifacts to {self.out_dir}: {str(e)}")
            raise
        finally:
            self._detach_audit(handler)
