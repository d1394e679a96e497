from typing import Dict, NoReturn, Optional

import numpy as np
from django.core.management import BaseCommand, CommandError

from severity_lab.analysis import bifurcation_diagram, equilibrium_report
from severity_lab.constants import ENTRY_EXIT_ATOL, FIGURE_SCENARIOS
from severity_lab.econ import classify_case, compare, worst_case_report, worst_theta_empirical
from severity_lab.exceptions import NumericalError, ScenarioError, SeverityLabError
from severity_lab.model import make_initial_conditions
from severity_lab.scenario import Scenario, from_figure, load_scenario, parse_count_grid, parse_step_grid
from severity_lab.sim import EventKind, cost_at, integrate, s_minimum_event, slow_regime_events, wave_end_event
from severity_lab.slowfast import default_entry_grid, entry_exit_sweep
from severity_lab.utils import OutputDir, format_value
from severity_lab.utils.export import (
    BifurcationExport, ExitPointsExport, ExitTimesExport, ReportExport, SweepExport, TrajectoryExport,
)


class Command(BaseCommand):
    help = "Run a severity lab experiment from a scenario file, or reproduce a built-in figure."

    SUBCOMMANDS = ("simulate", "analyze", "entry-exit", "worst-theta", "bifurcation", "sweep", "reproduce")

    SCENARIO_ERROR = 2
    NUMERICAL_ERROR = 3

    def add_arguments(self, parser):
        parser.add_argument("subcommand", choices=self.SUBCOMMANDS)
        parser.add_argument(
            "figure",
            nargs="?",
            help=f"Figure id, only for `reproduce`: {', '.join(FIGURE_SCENARIOS)}.",
        )
        parser.add_argument("--scenario", help="Path of a `key = value` scenario file.")
        parser.add_argument("--out", help="Output directory for the CSVs and report.txt.")
        parser.add_argument("--theta-grid", type=parse_step_grid, help="Severity grid a:b:step.")
        parser.add_argument("--entry-grid", type=parse_count_grid, help="Entry points a:b:n.")
        parser.add_argument("--beta-grid", type=parse_count_grid, help="Transmission rates a:b:n.")
        parser.add_argument("--k", type=float, help="Hospitalization cost rate.")
        parser.add_argument("--tol", type=float, help="Relative tolerance of the integrator.")
        parser.add_argument("--workers", type=int, help="Processes used by the sweeps.")

    def handle(self, *args, **options):
        try:
            scenario = self.get_scenario(options)
            directory = self.get_output_dir(scenario, options)
            if directory.has_output:
                self.stdout.write(self.style.WARNING(
                    f"Overwriting results in {directory.path}: {', '.join(directory.get_files())}"
                ))
            runner = getattr(self, "run_" + scenario.experiment.replace("-", "_"))
            summary = runner(scenario, options, directory)
            ReportExport(directory).export(summary)
        except ScenarioError as err:
            raise CommandError(str(err), returncode=self.SCENARIO_ERROR)
        except NumericalError as err:
            raise CommandError(str(err), returncode=self.NUMERICAL_ERROR)
        except SeverityLabError as err:
            # the scenario asks for something its parameters do not support
            raise CommandError(f"{type(err).__name__}: {err}", returncode=self.SCENARIO_ERROR)

        for key, value in summary.items():
            self.stdout.write(f"{key}={format_value(value)}")
        self.stdout.write(self.style.SUCCESS(f"Results are in: {directory.path}"))

    def get_scenario(self, options) -> Scenario:
        if options["subcommand"] == "reproduce":
            if not options["figure"]:
                raise ScenarioError(f"`reproduce` needs a figure id: {', '.join(FIGURE_SCENARIOS)}.")
            return from_figure(options["figure"])

        if options["figure"]:
            raise ScenarioError("A figure id is only accepted by `reproduce`.")
        if not options["scenario"]:
            raise ScenarioError(f"`{options['subcommand']}` needs --scenario.")
        return load_scenario(options["scenario"], experiment=options["subcommand"])

    @staticmethod
    def get_output_dir(scenario: Scenario, options) -> OutputDir:
        base = options["out"] or scenario.out
        if options["subcommand"] == "reproduce":
            return OutputDir(base, options["figure"])
        return OutputDir(base)

    @staticmethod
    def get_integrator_config(scenario: Scenario, options, atol: Optional[float] = None):
        """
        --tol sets rtol; atol follows it down when the configured atol would exceed it.
        """
        overrides = {"atol": scenario.integrator.get("atol", atol)}
        rtol = options["tol"]
        if rtol is not None:
            baseline = scenario.integrator_config(**overrides)
            overrides.update(rtol=rtol, atol=min(baseline.atol, rtol))
        return scenario.integrator_config(**overrides)

    @staticmethod
    def pick(options, scenario: Scenario, name: str):
        """Command-line flag first, then the scenario."""
        value = options.get(name)
        return getattr(scenario, name) if value is None else value

    def warn_rows(self, statuses) -> NoReturn:
        failed = [status for status in statuses if status != "ok"]
        if failed:
            self.stdout.write(self.style.WARNING(f"{len(failed)} grid point(s) without a result: {sorted(set(failed))}"))

    def run_simulate(self, scenario: Scenario, options, directory: OutputDir) -> Dict[str, object]:
        """
        Single trajectory from the start of an epidemic, with S minima, slow-regime passages and the
            first-wave end recorded as events.
        """
        params = scenario.params
        events = [s_minimum_event(params)]
        if params.eps > 0:
            events += slow_regime_events(params)
        if params.r0 > 1 and params.theta > 0:
            events.append(wave_end_event(params))

        trajectory = integrate(
            params,
            make_initial_conditions(params, scenario.initial_total_infected),
            self.get_integrator_config(scenario, options),
            events,
        )
        k = self.pick(options, scenario, "k")
        samples = trajectory.samples(k)
        TrajectoryExport(directory).export(samples)

        wave_end = trajectory.first_event(EventKind.WAVE_END)
        return {
            "r0": params.r0,
            "steps": trajectory.flow.n_steps,
            "t_end": trajectory.times[-1],
            "s_minima": len(trajectory.events_of(EventKind.S_MINIMUM)),
            "slow_entries": len(trajectory.events_of(EventKind.SLOW_ENTRY)),
            "slow_exits": len(trajectory.events_of(EventKind.SLOW_EXIT)),
            "t_F": None if wave_end is None else wave_end.time,
            "K_tF": None if wave_end is None else cost_at(trajectory, wave_end.time, k),
            "K_end": samples.step_rows[-1].k,
        }

    def run_analyze(self, scenario: Scenario, options, directory: OutputDir) -> Dict[str, object]:
        params = scenario.params
        summary = equilibrium_report(params).as_dict()
        summary["case"] = classify_case(params).value
        return summary

    def run_entry_exit(self, scenario: Scenario, options, directory: OutputDir) -> Dict[str, object]:
        params = scenario.params
        grid = self.pick(options, scenario, "entry_grid")
        grid = default_entry_grid(params) if grid is None else grid

        sweep = entry_exit_sweep(
            params, grid, scenario.t0_fast, scenario.h0,
            config=self.get_integrator_config(scenario, options, atol=ENTRY_EXIT_ATOL),
            workers=self.pick(options, scenario, "workers"),
        )
        ExitPointsExport(directory).export(sweep.results)
        ExitTimesExport(directory).export(sweep.results)
        self.warn_rows(result.status for result in sweep.results)
        return {
            "r0": params.r0,
            "points": len(sweep.results),
            "max_err_point": sweep.max_err_point,
            "max_err_time": sweep.max_err_time,
            "max_err_fast_time": sweep.max_fast_time_error,
        }

    def run_worst_theta(self, scenario: Scenario, options, directory: OutputDir) -> Dict[str, object]:
        report = worst_case_report(
            scenario.params,
            self.pick(options, scenario, "theta_grid"),
            scenario.initial_total_infected,
            self.pick(options, scenario, "k"),
            self.get_integrator_config(scenario, options),
            self.pick(options, scenario, "workers"),
        )
        SweepExport(directory).export(report.empirical.rows)
        self.warn_rows(row.status for row in report.empirical.rows)

        curve_thetas = set(scenario.curve_thetas)
        if report.theta_tilde is not None:
            curve_thetas.add(report.theta_tilde)
        for theta in sorted(curve_thetas):
            self.write_cost_curve(scenario, options, directory, theta)

        summary = report.as_dict()
        summary["cost_curves"] = len(curve_thetas)
        if report.theta_tilde is not None and report.empirical.theta_argmax is not None \
                and report.empirical.k_tilde is not None:
            summary.update(compare(report, report.empirical).as_dict())
        return summary

    def write_cost_curve(self, scenario: Scenario, options, directory: OutputDir, theta: float) -> NoReturn:
        """K(t) for one severity, as `theta_<value>/trajectory.csv` below the run directory."""
        params = scenario.params.with_theta(theta)
        events = [wave_end_event(params)] if params.r0 > 1 and theta > 0 else []
        trajectory = integrate(
            params,
            make_initial_conditions(params, scenario.initial_total_infected),
            self.get_integrator_config(scenario, options),
            events,
        )
        curve_dir = OutputDir(directory.path, f"theta_{theta:.6g}")
        TrajectoryExport(curve_dir).export(trajectory.samples(self.pick(options, scenario, "k")))

    def run_sweep(self, scenario: Scenario, options, directory: OutputDir) -> Dict[str, object]:
        sweep = worst_theta_empirical(
            scenario.params,
            self.pick(options, scenario, "theta_grid"),
            scenario.initial_total_infected,
            self.pick(options, scenario, "k"),
            self.get_integrator_config(scenario, options),
            self.pick(options, scenario, "workers"),
        )
        SweepExport(directory).export(sweep.rows)
        self.warn_rows(row.status for row in sweep.rows)
        return {
            "points": len(sweep.rows),
            "grid_resolution": sweep.resolution,
            "theta_argmax": sweep.theta_argmax,
            "K_argmax": sweep.k_argmax,
        }

    def run_bifurcation(self, scenario: Scenario, options, directory: OutputDir) -> Dict[str, object]:
        params = scenario.params
        transcritical = 1 / params.rbar0
        grid = self.pick(options, scenario, "beta_grid")
        grid = np.linspace(transcritical / 2, 2 * transcritical, 61) if grid is None else grid

        try:
            dfe, ee = bifurcation_diagram(params, grid)
        except ValueError as err:
            raise ScenarioError(str(err))
        BifurcationExport(directory).export([dfe, ee])
        return {
            "beta_transcritical": transcritical,
            "dfe_points": len(dfe),
            "ee_points": len(ee),
            "ee_all_stable": bool(np.all(ee.stable)) if len(ee) else None,
        }
