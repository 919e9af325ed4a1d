from django.core.management.base import BaseCommand, CommandError

from tunnel.exceptions import EcanError
from tunnel.run_utils import read_scenario
from tunnel.world import build_fov_grid, grid_size_formula


class Command(BaseCommand):
    help = "Print the FOV grid-point count of a scenario, closed form and constructed."

    def add_arguments(self, parser):
        parser.add_argument('scenario', help="Scenario JSON file.")

    def handle(self, *args, **options):
        try:
            scenario = read_scenario(options['scenario'])
            fov = scenario.params.fov
            grid = build_fov_grid(fov, scenario.dimension)
        except (EcanError, OSError) as e:
            raise CommandError(str(e), returncode=2)
        formula = grid_size_formula(fov, scenario.dimension)
        self.stdout.write(f"N = {formula:.0f}")
        self.stdout.write(f"grid points = {grid.size} ({grid.points.shape[0]} rays x {grid.radii.shape[0]} radii)")
