from django.core.management.base import BaseCommand, CommandError

from tunnel.audit import validate_trace
from tunnel.exceptions import EcanError
from tunnel.run_utils import read_scenario
from tunnel.scenario import build_environment
from tunnel.traces import load_trace


class Command(BaseCommand):
    help = "Re-check a trace against its scenario; exits non-zero when any violation is found."

    def add_arguments(self, parser):
        parser.add_argument('trace', help="Trace JSON-lines file written by `run`.")
        parser.add_argument('scenario', help="Scenario JSON file the trace was planned on.")

    def handle(self, *args, **options):
        try:
            trace = load_trace(options['trace'])
            scenario = read_scenario(options['scenario'])
            report = validate_trace(build_environment(scenario), trace.agent, trace)
        except (EcanError, OSError) as e:
            raise CommandError(str(e), returncode=2)

        for violation in report.violations:
            self.stdout.write(f"step {violation.step}: {violation.kind}: {violation.detail}")
        self.stdout.write(f"{report.steps} steps, {len(report.violations)} violations")
        if not report.ok:
            raise CommandError(f"{len(report.violations)} violations", returncode=1)
