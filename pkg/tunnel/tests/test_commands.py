import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

SCENARIOS = Path(__file__).resolve().parent.parent / 'scenarios'


def scenario_path(name):
    return str(SCENARIOS / f'{name}.json')


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def call(self, *args, **options):
        stdout = StringIO()
        call_command(*args, stdout=stdout, **options)
        return stdout.getvalue()


class RunCommandTests(CommandTestCase):
    def test_run_writes_all_artifacts(self):
        output = self.call('run', scenario_path('section3'), out=str(self.out), svg=True, stats=True)
        self.assertTrue(output.startswith('GoalReached:'))
        for name in ('trace.jsonl', 'audit.jsonl', 'stats.csv', 'summary.csv', 'tunnel.svg'):
            self.assertTrue((self.out / name).exists(), name)
        events = [json.loads(line) for line in (self.out / 'audit.jsonl').read_text(encoding='utf-8').splitlines()]
        self.assertIn('outcome', {doc['event'] for doc in events})
        self.assertIn('step', {doc['event'] for doc in events})

    def test_trace_only_by_default(self):
        self.call('run', scenario_path('empty'), out=str(self.out))
        self.assertTrue((self.out / 'trace.jsonl').exists())
        self.assertFalse((self.out / 'tunnel.svg').exists())
        self.assertFalse((self.out / 'stats.csv').exists())

    def test_failed_run_exits_with_one(self):
        with self.assertRaises(CommandError) as caught:
            self.call('run', scenario_path('enclosure'), out=str(self.out))
        self.assertEqual(caught.exception.returncode, 1)
        self.assertIn('NoFeasibleEllipsoid', str(caught.exception))
        self.assertTrue((self.out / 'trace.jsonl').exists())

    def test_step_limit_override(self):
        with self.assertRaises(CommandError) as caught:
            self.call('run', scenario_path('section3'), out=str(self.out), max_steps=2)
        self.assertEqual(str(caught.exception), 'MaxSteps')

    def test_missing_scenario(self):
        with self.assertRaises(CommandError) as caught:
            self.call('run', str(self.out / 'missing.json'), out=str(self.out))
        self.assertEqual(caught.exception.returncode, 2)

    def test_invalid_scenario(self):
        path = self.out / 'bad.json'
        path.write_text('{"dimension": 4, "start": {"position": [0, 0]}, "goal": [1, 0]}', encoding='utf-8')
        with self.assertRaises(CommandError) as caught:
            self.call('run', str(path), out=str(self.out / 'run'))
        self.assertEqual(caught.exception.returncode, 2)
        self.assertIn('dimension', str(caught.exception))


class ValidateCommandTests(CommandTestCase):
    def test_clean_trace(self):
        self.call('run', scenario_path('section3'), out=str(self.out))
        output = self.call('validate', str(self.out / 'trace.jsonl'), scenario_path('section3'))
        self.assertTrue(output.strip().endswith('0 violations'))

    def test_trace_against_walled_world(self):
        self.call('run', scenario_path('empty'), out=str(self.out))
        walled = self.out / 'walled.json'
        walled.write_text(json.dumps({
            'dimension': 2,
            'start': {'position': [0, 0]},
            'goal': [5, 3],
            'obstacles': {'boxes': [{'min': [2, -5], 'max': [2.2, 5]}]},
        }), encoding='utf-8')
        stdout = StringIO()
        with self.assertRaises(CommandError) as caught:
            call_command('validate', str(self.out / 'trace.jsonl'), str(walled), stdout=stdout)
        self.assertEqual(caught.exception.returncode, 1)
        self.assertIn('collision', stdout.getvalue())

    def test_malformed_trace(self):
        path = self.out / 'trace.jsonl'
        path.write_text('not json\n', encoding='utf-8')
        with self.assertRaises(CommandError) as caught:
            self.call('validate', str(path), scenario_path('section3'))
        self.assertEqual(caught.exception.returncode, 2)
        self.assertIn('line 1', str(caught.exception))


class GridInfoCommandTests(CommandTestCase):
    def test_2d_defaults(self):
        output = self.call('grid_info', scenario_path('empty'))
        self.assertIn('N = 4025', output)
        self.assertIn('grid points = 4025 (161 rays x 25 radii)', output)
