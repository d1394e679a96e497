from pathlib import Path
from tempfile import TemporaryDirectory

import numpy as np
from django.test import SimpleTestCase, override_settings

from severity_lab.exceptions import ScenarioError
from severity_lab.scenario import (
    PLACEHOLDER_THETA, from_figure, load_scenario, parse_bool, parse_count_grid, parse_float_list, parse_scenario,
    parse_step_grid,
)
from tests.helpers import OSCILLATING

OSCILLATING_TEXT = """
# relaxation oscillation
beta = 1
theta = 0.35
gamma_i = 0.6
gamma_c = 0.8
gamma_h = 0.4
eps = 0.01    # immunity loss
initial_total_infected = 1e-5
"""


class TestParsers(SimpleTestCase):

    def test_bool(self):
        self.assertTrue(parse_bool(" Yes "))
        self.assertFalse(parse_bool("0"))
        with self.assertRaises(ValueError):
            parse_bool("maybe")

    def test_step_grid(self):
        grid = parse_step_grid("0:1:0.02")
        self.assertEqual(len(grid), 51)
        self.assertEqual((grid[0], grid[-1]), (0.0, 1.0))

    def test_count_grid(self):
        grid = parse_count_grid("0.05:0.59:50")
        self.assertEqual(len(grid), 50)
        self.assertAlmostEqual(grid[-1], 0.59, places=15)

    def test_bad_grids(self):
        for value in ("0:1", "0:1:0", "1:0:0.1", "a:b:c"):
            with self.subTest(value=value), self.assertRaises(ValueError):
                parse_step_grid(value)
        with self.assertRaises(ValueError):
            parse_count_grid("0:1:0")

    def test_float_list(self):
        self.assertEqual(parse_float_list("0.2, 0.5,1"), (0.2, 0.5, 1.0))
        for value in ("", "0.2,,0.5", "0.2, x"):
            with self.subTest(value=value), self.assertRaises(ValueError):
                parse_float_list(value)


class TestParseScenario(SimpleTestCase):

    def test_parameters(self):
        scenario = parse_scenario(OSCILLATING_TEXT)
        self.assertEqual(scenario.params, OSCILLATING)
        self.assertEqual(scenario.experiment, "simulate")
        self.assertEqual(scenario.initial_total_infected, 1e-5)
        self.assertEqual(scenario.integrator, {})

    def test_unknown_key_names_the_key_and_line(self):
        with self.assertRaisesMessage(ScenarioError, "typo.txt:3: unknown key 'gamma_x'"):
            parse_scenario("beta = 1\ntheta = 0.3\ngamma_x = 0.6\n", source="typo.txt")

    def test_missing_keys(self):
        with self.assertRaisesMessage(ScenarioError, "missing required key(s): gamma_h, eps"):
            parse_scenario("beta = 1\ntheta = 0.3\ngamma_i = 0.6\ngamma_c = 0.8\n")

    def test_theta_free_experiments(self):
        text = "\n".join(line for line in OSCILLATING_TEXT.splitlines() if not line.startswith("theta"))
        scenario = parse_scenario(text + "\ntheta_grid = 0:1:0.1\n", experiment="worst-theta")
        self.assertEqual(scenario.params.theta, PLACEHOLDER_THETA)
        self.assertEqual(len(scenario.theta_grid), 11)
        with self.assertRaises(ScenarioError):
            parse_scenario(text)

    def test_experiment_override(self):
        scenario = parse_scenario(OSCILLATING_TEXT + "experiment = simulate\n", experiment="analyze")
        self.assertEqual(scenario.experiment, "analyze")

    def test_malformed_lines(self):
        for text in ("beta 1\n", "beta = 1\nbeta = 2\n", "beta = fast\n", "experiment = fly\n"):
            with self.subTest(text=text), self.assertRaises(ScenarioError):
                parse_scenario(text)

    def test_invalid_parameters_become_scenario_errors(self):
        with self.assertRaises(ScenarioError):
            parse_scenario(OSCILLATING_TEXT.replace("theta = 0.35", "theta = 1.5"))
        with self.assertRaises(ScenarioError):
            parse_scenario(OSCILLATING_TEXT.replace("gamma_i = 0.6", "gamma_i = 0.9"))

    def test_curve_thetas(self):
        self.assertEqual(parse_scenario(OSCILLATING_TEXT).curve_thetas, ())
        scenario = parse_scenario(OSCILLATING_TEXT + "curve_thetas = 0.2, 1\n")
        self.assertEqual(scenario.curve_thetas, (0.2, 1.0))
        with self.assertRaises(ScenarioError) as context:
            parse_scenario(OSCILLATING_TEXT + "curve_thetas = 0.2, 1.2\n")
        self.assertIn("curve_thetas", str(context.exception))

    def test_unordered_rates_can_be_acknowledged(self):
        text = OSCILLATING_TEXT.replace("gamma_i = 0.6", "gamma_i = 0.9") + "allow_unordered = true\n"
        self.assertFalse(parse_scenario(text).params.ordered)


class TestIntegratorConfig(SimpleTestCase):

    @override_settings(SEVERITY_LAB={"RTOL": 1e-8})
    def test_layers(self):
        scenario = parse_scenario(OSCILLATING_TEXT + "atol = 1e-11\nt_max = 500\n")
        config = scenario.integrator_config(t_max=100.0, h_max=None)
        self.assertEqual((config.rtol, config.atol, config.t_max), (1e-8, 1e-11, 100.0))

    def test_bad_tolerances(self):
        scenario = parse_scenario(OSCILLATING_TEXT + "rtol = 1e-12\natol = 1e-9\n")
        with self.assertRaises(ScenarioError):
            scenario.integrator_config()


class TestLoadScenario(SimpleTestCase):

    def test_from_file(self):
        with TemporaryDirectory() as directory:
            path = Path(directory) / "fig4.txt"
            path.write_text(OSCILLATING_TEXT, encoding="utf-8")
            scenario = load_scenario(path)
        self.assertEqual(scenario.params, OSCILLATING)
        self.assertEqual(scenario.source, str(path))

    def test_missing_file(self):
        with self.assertRaises(ScenarioError):
            load_scenario("/nonexistent/scenario.txt")


class TestFromFigure(SimpleTestCase):

    def test_built_in_scenarios(self):
        self.assertEqual(from_figure("fig4").params, OSCILLATING)
        self.assertEqual(from_figure("fig6b").experiment, "worst-theta")
        self.assertEqual(len(from_figure("fig6b").theta_grid), 51)
        self.assertEqual(from_figure("fig6b").curve_thetas, (0.2, 0.5, 0.74, 1.0))
        self.assertEqual(from_figure("fig4").curve_thetas, ())

        fig7 = from_figure("fig7")
        self.assertEqual(fig7.experiment, "entry-exit")
        self.assertEqual(fig7.params.gamma_i, fig7.params.gamma_c)
        np.testing.assert_allclose(fig7.entry_grid, np.linspace(0.05, 0.59, 50))

    def test_unknown_figure(self):
        with self.assertRaises(ScenarioError):
            from_figure("fig9")
