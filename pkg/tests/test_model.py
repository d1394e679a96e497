import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings

from severity_lab.analysis import endemic_equilibrium, lyapunov_function
from severity_lab.exceptions import DomainError, InvalidParameters, TimescaleSeparationWarning, UnsupportedRegime
from severity_lab.model import (
    ModelParams, ReducedState, State, derivative, disease_free_state, embed_reduced, fast_derivative,
    infective_growth_bound, make_initial_conditions, reduce_state, reduced_derivative, slow_derivative, slow_flow,
    vector_field,
)
from tests.helpers import OSCILLATING, EQUAL_RECOVERY, model_params, simplex_points


class TestModelParams(SimpleTestCase):

    def test_rejects_invalid_values(self):
        valid = dict(beta=1.0, theta=0.35, gamma_i=0.6, gamma_c=0.8, gamma_h=0.4, eps=0.01)
        for name, value in (("beta", 0.0), ("gamma_h", -1.0), ("theta", 1.5), ("eps", -0.01), ("beta", np.nan)):
            with self.subTest(name=name, value=value), self.assertRaises(InvalidParameters):
                ModelParams(**dict(valid, **{name: value}))

    def test_unordered_rates_need_acknowledgement(self):
        with self.assertRaises(InvalidParameters):
            ModelParams(beta=1.0, theta=0.5, gamma_i=0.9, gamma_c=0.6, gamma_h=0.4, eps=0.01)

        params = ModelParams(beta=1.0, theta=0.5, gamma_i=0.9, gamma_c=0.6, gamma_h=0.4, eps=0.01,
                             allow_unordered=True)
        self.assertFalse(params.ordered)

    def test_warns_when_eps_is_not_small(self):
        with self.assertWarns(TimescaleSeparationWarning):
            ModelParams(beta=1.0, theta=0.35, gamma_i=0.6, gamma_c=0.8, gamma_h=0.4, eps=0.2)

    def test_r0(self):
        self.assertAlmostEqual(OSCILLATING.r0, 0.65 / 0.6 + 0.35 / 0.8, places=14)
        self.assertAlmostEqual(OSCILLATING.r0, 1.5208333333333333, places=12)
        self.assertAlmostEqual(OSCILLATING.rbar0 * OSCILLATING.beta, OSCILLATING.r0, places=14)

    def test_equal_recovery_makes_r0_theta_independent(self):
        for theta in (0.0, 0.3, 1.0):
            self.assertAlmostEqual(EQUAL_RECOVERY.with_theta(theta).r0, 1 / 0.6, places=14)

    def test_copies(self):
        self.assertEqual(OSCILLATING.with_theta(0.5).theta, 0.5)
        self.assertEqual(OSCILLATING.with_beta(2.0).beta, 2.0)
        self.assertEqual(OSCILLATING.with_eps(0.0).eps, 0.0)
        self.assertEqual(OSCILLATING.theta, 0.35)


class TestState(SimpleTestCase):

    def test_recovered_is_derived(self):
        state = State(0.5, 0.1, 0.05, 0.05)
        self.assertAlmostEqual(state.r, 0.3)
        self.assertAlmostEqual(state.infective, 0.15)

    def test_validate(self):
        State(0.5, 0.1, 0.05, 0.05).validate()
        with self.assertRaises(DomainError):
            State(0.9, 0.2, 0.0, 0.0).validate()
        with self.assertRaises(DomainError):
            State(0.5, -1e-3, 0.0, 0.0).validate(tol=1e-10)
        State(0.5, -1e-13, 0.0, 0.0).validate(tol=1e-11)

    def test_clamped_only_touches_round_off(self):
        state = State(0.5, -1e-13, -1e-3, 0.0).clamped(tol=1e-11)
        self.assertEqual(state.i, 0.0)
        self.assertEqual(state.c, -1e-3)
        self.assertEqual(state.s, 0.5)

    def test_reduced_state_bounds(self):
        with self.assertRaises(DomainError):
            ReducedState(0.8, 0.3, 0.0).validate()


class TestDerivative(SimpleTestCase):

    def test_disease_free_state_is_an_equilibrium(self):
        self.assertEqual(tuple(derivative(OSCILLATING, disease_free_state())), (0.0, 0.0, 0.0, 0.0))

    def test_no_critical_course_without_theta(self):
        result = derivative(OSCILLATING.with_theta(0.0), State(0.9, 0.05, 0.0, 0.0))
        self.assertEqual(result.dc, 0.0)
        self.assertEqual(result.dh, 0.0)

    def test_endemic_equilibrium_is_an_equilibrium(self):
        ee = endemic_equilibrium(OSCILLATING)
        np.testing.assert_allclose(derivative(OSCILLATING, ee), 0.0, atol=1e-12)

    def test_recovered_balance(self):
        state = State(0.6, 0.1, 0.05, 0.02)
        result = derivative(OSCILLATING, state)
        expected = OSCILLATING.gamma_i * state.i + OSCILLATING.gamma_h * state.h - OSCILLATING.eps * state.r
        self.assertAlmostEqual(result.dr, expected, places=15)

    def test_fast_derivative_by_hand(self):
        s, i, c, h = 0.9, 0.05, 0.03, 0.02
        result = fast_derivative(OSCILLATING, State(s, i, c, h))
        infection = 1.0 * s * (i + c)
        np.testing.assert_allclose(result, [
            -infection,
            0.65 * infection - 0.6 * i,
            0.35 * infection - 0.8 * c,
            0.8 * c - 0.4 * h,
        ], rtol=1e-15)

    def test_fast_derivative_vanishes_on_the_critical_manifold(self):
        for s in (0.0, 0.3, 1.0):
            self.assertEqual(tuple(fast_derivative(OSCILLATING, State(s, 0.0, 0.0, 0.0))), (0.0, 0.0, 0.0, 0.0))

    @hypothesis_settings(deadline=None)
    @given(params=model_params(), point=simplex_points())
    def test_fast_flow_never_increases_susceptibles(self, params, point):
        self.assertLessEqual(vector_field(params, point, eps=0.0)[0], 0.0)

    @hypothesis_settings(deadline=None)
    @given(params=model_params(), point=simplex_points())
    def test_vector_field_points_into_the_simplex(self, params, point):
        rates = vector_field(params, point)
        for k in range(4):
            if point[k] == 0:
                self.assertGreaterEqual(rates[k], 0.0)

    @hypothesis_settings(deadline=None)
    @given(params=model_params(), point=simplex_points())
    def test_lyapunov_identity(self, params, point):
        s, i, c, h = point
        rates = vector_field(params, point, eps=0.0)
        along_flow = rates[1] / params.gamma_i + rates[2] / params.gamma_c
        self.assertAlmostEqual(along_flow, (i + c) * (s * params.r0 - 1), delta=1e-12)
        self.assertGreaterEqual(lyapunov_function(params, State(s, i, c, h)), 0.0)


class TestReducedSystem(SimpleTestCase):

    def test_without_infection(self):
        result = reduced_derivative(EQUAL_RECOVERY, ReducedState(0.7, 0.0, 0.0))
        np.testing.assert_allclose(result, [0.01 * 0.3, 0.0, 0.0], rtol=1e-14)

    def test_by_hand(self):
        result = reduced_derivative(EQUAL_RECOVERY, ReducedState(0.5, 0.01, 0.001))
        np.testing.assert_allclose(result, [
            -0.5 * 0.01 + 0.01 * (1 - 0.511),
            0.5 * 0.01 - 0.6 * 0.01,
            0.6 * 0.35 * 0.01 - 0.2 * 0.001,
        ], rtol=1e-14)

    def test_full_system_collapses_onto_reduced_one(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            s, t_inf, h = rng.dirichlet(np.ones(4))[:3]
            reduced = ReducedState(s, t_inf, h)
            full = derivative(EQUAL_RECOVERY, embed_reduced(EQUAL_RECOVERY, reduced))
            expected = reduced_derivative(EQUAL_RECOVERY, reduced)
            self.assertAlmostEqual(full.ds, expected.ds, delta=1e-14)
            self.assertAlmostEqual(full.di + full.dc, expected.dt_inf, delta=1e-14)
            self.assertAlmostEqual(full.dh, expected.dh, delta=1e-14)

    def test_reduce_inverts_embed(self):
        reduced = ReducedState(0.5, 0.01, 0.001)
        back = reduce_state(embed_reduced(EQUAL_RECOVERY, reduced))
        self.assertAlmostEqual(back.t_inf, reduced.t_inf, places=15)

    def test_needs_equal_recovery_rates(self):
        with self.assertRaises(UnsupportedRegime):
            reduced_derivative(OSCILLATING, ReducedState(0.5, 0.01, 0.001))


class TestSlowFlow(SimpleTestCase):

    def test_slow_flow_solves_slow_equation(self):
        taus = np.linspace(0.0, 3.0, 31)
        values = slow_flow(0.2, taus)
        self.assertEqual(values[0], 0.2)
        self.assertEqual(slow_flow(0.37, 0.0), 0.37)
        step = 1e-6
        numeric = (slow_flow(0.2, taus + step) - slow_flow(0.2, taus - step)) / (2 * step)
        np.testing.assert_allclose(numeric, [slow_derivative(s) for s in values], atol=1e-8)


class TestInitialConditions(SimpleTestCase):

    def test_split_by_theta(self):
        state = make_initial_conditions(OSCILLATING, 1e-5)
        self.assertAlmostEqual(state.s, 0.99999, places=15)
        self.assertAlmostEqual(state.i, 6.5e-6, places=18)
        self.assertAlmostEqual(state.c, 3.5e-6, places=18)
        self.assertEqual(state.h, 0.0)
        self.assertAlmostEqual(state.r, 0.0, places=15)

    def test_boundary_severities(self):
        self.assertEqual(make_initial_conditions(OSCILLATING.with_theta(0.0), 1e-5).c, 0.0)
        self.assertEqual(make_initial_conditions(OSCILLATING.with_theta(1.0), 1e-5).i, 0.0)

    def test_rejects_large_or_empty_seeds(self):
        for total in (0.0, 0.1, -1e-5):
            with self.subTest(total=total), self.assertRaises(InvalidParameters):
                make_initial_conditions(OSCILLATING, total)


class TestGrowthBound(SimpleTestCase):

    def test_decay_below_recovery(self):
        params = ModelParams(beta=0.5, theta=0.3, gamma_i=0.6, gamma_c=0.8, gamma_h=0.4, eps=0.01)
        rate, decays = infective_growth_bound(params)
        self.assertAlmostEqual(rate, -0.1)
        self.assertTrue(decays)

        rng = np.random.default_rng(3)
        for _ in range(100):
            s, i, c, h = rng.dirichlet(np.ones(5))[:4]
            rates = vector_field(params, [s, i, c, h])
            self.assertLessEqual(rates[1] + rates[2], rate * (i + c) + 1e-15)

    def test_no_certificate_above_recovery(self):
        self.assertFalse(infective_growth_bound(OSCILLATING)[1])
