from django.core.management.base import BaseCommand, CommandError

from tunnel.exceptions import EcanError
from tunnel.planner import Outcome
from tunnel.rendering import PLANES
from tunnel.run_utils import RunFacade, read_scenario


class Command(BaseCommand):
    help = "Plan a scenario and write its trace (and optionally stats and an SVG) to an output directory."

    def add_arguments(self, parser):
        parser.add_argument('scenario', help="Scenario JSON file.")
        parser.add_argument('--out', required=True, help="Output directory.")
        parser.add_argument('--svg', action='store_true', help="Render tunnel.svg.")
        parser.add_argument('--stats', action='store_true', help="Write stats.csv and summary.csv.")
        parser.add_argument('--seed', type=int, help="Override the scenario seed for generated obstacles.")
        parser.add_argument('--max-steps', type=int, dest='max_steps', help="Override the step limit.")
        parser.add_argument('--plane', choices=sorted(PLANES), default='xy', help="Projection plane for 3D runs.")

    def handle(self, *args, **options):
        try:
            scenario = read_scenario(options['scenario'])
            if options['seed'] is not None:
                scenario = scenario.with_seed(options['seed'])
            if options['max_steps'] is not None:
                scenario = scenario.with_params(max_steps=options['max_steps'])
            result = RunFacade(options['out']).execute(
                scenario, svg=options['svg'], stats=options['stats'], plane=options['plane'])
        except (EcanError, OSError) as e:
            raise CommandError(str(e), returncode=2)

        trace = result.trace
        self.stdout.write(
            f"{trace.outcome.value}: {len(trace.steps)} steps, final distance {trace.final_distance:.6f}")
        for name, path in sorted(result.files.items()):
            self.stdout.write(f"  {name}: {path}")
        if trace.outcome != Outcome.GOAL_REACHED:
            raise CommandError(trace.outcome.value, returncode=1)
