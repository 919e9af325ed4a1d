from django.test import SimpleTestCase

from tunnel import exceptions
from tunnel.error_map import DEFAULT_ERROR_MESSAGE, ERROR_MAP


class ErrorMapTests(SimpleTestCase):
    def test_every_code_belongs_to_one_error(self):
        codes = [cls.code for cls in exceptions.EcanError.__subclasses__()]
        self.assertEqual(len(codes), len(set(codes)))
        self.assertEqual(set(codes), set(ERROR_MAP))

    def test_message_carries_detail(self):
        error = exceptions.DegenerateQuadric('det(P) = 0')
        self.assertEqual(str(error), f"{ERROR_MAP['DegenerateQuadric']} det(P) = 0")
        self.assertEqual(error.detail, 'det(P) = 0')

    def test_unknown_code_falls_back(self):
        self.assertEqual(str(exceptions.EcanError()), DEFAULT_ERROR_MESSAGE)

    def test_scenario_error_location(self):
        error = exceptions.ScenarioError('expected a number', field='start.heading', line=4)
        self.assertIn("field 'start.heading', line 4: expected a number", str(error))
