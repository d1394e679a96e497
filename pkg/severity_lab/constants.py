DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12
DEFAULT_T_MAX = 3000.0
DEFAULT_COST_RATE = 1.0
DEFAULT_WORKERS = 1
DEFAULT_OUTPUT_DIR_NAME = "severity_lab_output"

# Components closer than this many atol to the simplex boundary are clamped.
SIMPLEX_CLAMP_FACTOR = 10

# A state is in the slow regime when max(I, C, H) < SLOW_REGIME_FACTOR * eps**2.
SLOW_REGIME_FACTOR = 10

MAX_INITIAL_INFECTED = 0.1
DEFAULT_INITIAL_INFECTED = 1e-5

# Warn when eps exceeds this fraction of the smallest fast rate.
TIMESCALE_SEPARATION_RATIO = 0.1

NON_HYPERBOLIC_TOL = 1e-12
ROOT_XTOL = 1e-14
EVENT_XTOL = 1e-12
EXIT_BRACKET_DELTA = 1e-10

# Root error of the EE characteristic polynomial against the full Jacobian at eps = 0.01.
# The O(eps**2) coefficient error is divided by |q'(lambda)| ~ 0.1 at the slow complex pair.
EE_CHARPOLY_TOL = 2e-3

ENTRY_EXIT_ATOL = 1e-20
DEFAULT_ENTRY_SEED = 1e-5

DEFAULT_THETA_STEP = 0.02
NEAR_THRESHOLD_MARGIN = 1e-6
PRACTICAL_MATCH_GAP = 0.05

FLOAT_FORMAT = ".17g"

TRAJECTORY_CSV_HEADER = ("t", "S", "I", "C", "H", "R", "K", "event")
SWEEP_CSV_HEADER = ("theta", "r0", "t_F", "K_tF", "status")
EXIT_POINTS_CSV_HEADER = ("s_entry", "s_exit_predicted", "s_exit_simulated", "abs_err_point", "status")
EXIT_TIMES_CSV_HEADER = ("s_entry", "tau_exit_predicted", "tau_exit_simulated", "abs_err_time", "status")
BIFURCATION_CSV_HEADER = ("branch", "beta", "S", "I", "C", "H", "p_I", "p_C", "p_H", "stable")

TRAJECTORY_FILE_NAME = "trajectory.csv"
SWEEP_FILE_NAME = "sweep.csv"
EXIT_POINTS_FILE_NAME = "exit_points.csv"
EXIT_TIMES_FILE_NAME = "exit_times.csv"
BIFURCATION_FILE_NAME = "bifurcation.csv"
REPORT_FILE_NAME = "report.txt"

_OSCILLATING = {"beta": 1.0, "theta": 0.35, "gamma_i": 0.6, "gamma_c": 0.8, "gamma_h": 0.4, "eps": 0.01}
_DAMPED = {"beta": 1.0, "theta": 0.2, "gamma_i": 0.2, "gamma_c": 0.3, "gamma_h": 0.15, "eps": 0.01}

# Built-in scenarios for `sirslab reproduce <figure>`.
FIGURE_SCENARIOS = {
    "fig4": dict(_OSCILLATING, experiment="simulate", initial_total_infected=1e-5),
    "fig5": dict(_DAMPED, experiment="simulate", initial_total_infected=1e-5),
    "fig6a": {
        "experiment": "worst-theta", "beta": 1.5, "theta": 0.5, "gamma_i": 0.6, "gamma_c": 0.8,
        "gamma_h": 0.4, "eps": 0.01, "initial_total_infected": 1e-5, "theta_grid": "0:1:0.02",
        "curve_thetas": "0.2, 0.4, 0.6, 0.8, 1",
    },
    "fig6b": {
        "experiment": "worst-theta", "beta": 1.0, "theta": 0.5, "gamma_i": 0.6, "gamma_c": 0.9,
        "gamma_h": 0.4, "eps": 0.01, "initial_total_infected": 1e-5, "theta_grid": "0:1:0.02",
        "curve_thetas": "0.2, 0.5, 0.74, 1",
    },
    "fig6c": {
        "experiment": "worst-theta", "beta": 0.7, "theta": 0.3, "gamma_i": 0.6, "gamma_c": 0.8,
        "gamma_h": 0.4, "eps": 0.01, "initial_total_infected": 1e-5, "theta_grid": "0:1:0.02",
        "curve_thetas": "0.1, 0.2, 0.35, 0.55",
    },
    "fig7": {
        "experiment": "entry-exit", "beta": 1.0, "theta": 0.35, "gamma_i": 0.6, "gamma_c": 0.6,
        "gamma_h": 0.2, "eps": 0.01, "t0_fast": 1e-5, "h0": 1e-5, "entry_grid": "0.05:0.59:50",
    },
}
