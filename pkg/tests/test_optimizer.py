"""Tests for the trust-region optimizer: convergence, accounting, determinism."""

import math

import numpy as np
import pytest

from vqabench.optimizer import OptimizationResult, OptimizerSettings, minimize


def quadratic(x):
    return float(((x - 1.0) ** 2).sum())


class TestSettings:
    def test_radii_ordering_enforced(self):
        with pytest.raises(ValueError, match="rho_end"):
            OptimizerSettings(n_max=100, rho_beg=1e-4, rho_end=1.0)

    def test_budget_positive(self):
        with pytest.raises(ValueError, match="n_max"):
            OptimizerSettings(n_max=0)

    def test_budget_must_cover_model_construction(self):
        with pytest.raises(ValueError, match="n_max"):
            minimize(quadratic, np.zeros(4), OptimizerSettings(n_max=5))


class TestConvergence:
    def test_constant_objective_terminates(self):
        settings = OptimizerSettings(n_max=200, rho_beg=1.0, rho_end=1e-4)
        result = minimize(lambda x: 0.0, np.zeros(3), settings)
        assert result.best_value == 0.0
        assert result.n_calls <= settings.n_max

    def test_quadratic_two_dims(self):
        settings = OptimizerSettings(n_max=500, rho_beg=0.5, rho_end=1e-6)
        result = minimize(quadratic, np.zeros(2), settings)
        assert np.linalg.norm(result.final_params - 1.0) < 1e-3

    def test_quadratic_four_dims_within_500_calls(self):
        settings = OptimizerSettings(n_max=500, rho_beg=0.5, rho_end=1e-6)
        result = minimize(quadratic, np.zeros(4), settings)
        assert result.n_calls <= 500
        assert np.linalg.norm(result.final_params - 1.0) < 1e-3

    def test_anisotropic_quadratic(self):
        weights = np.array([1.0, 10.0, 0.3])
        objective = lambda x: float(weights @ (x - 2.0) ** 2)
        result = minimize(objective, np.zeros(3), OptimizerSettings(2000, 1.0, 1e-8))
        assert np.linalg.norm(result.final_params - 2.0) < 1e-3


class TestAccounting:
    def test_cap_binds_during_model_construction(self):
        k = 3
        settings = OptimizerSettings(n_max=k + 2, rho_beg=1.0, rho_end=1e-6)
        result = minimize(quadratic, np.zeros(k), settings)
        assert result.n_calls == k + 2

    def test_history_matches_call_count(self):
        settings = OptimizerSettings(n_max=80, rho_beg=0.5, rho_end=1e-8)
        result = minimize(quadratic, np.zeros(2), settings)
        assert len(result.history) == result.n_calls
        assert [i for i, _ in result.history] == list(range(1, result.n_calls + 1))

    def test_best_value_is_history_minimum(self):
        result = minimize(quadratic, np.zeros(3), OptimizerSettings(200, 0.7, 1e-7))
        assert result.best_value == min(v for _, v in result.history)
        assert quadratic(result.final_params) == pytest.approx(result.best_value, abs=1e-15)

    @pytest.mark.parametrize("seed", range(10))
    def test_cap_respected_under_fuzz(self, seed):
        # stochastic objectives with NaN patches must never exceed the budget
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 6))
        n_max = int(rng.integers(k + 2, 60))
        nan_rate = float(rng.uniform(0, 0.5))

        def objective(x):
            if rng.random() < nan_rate:
                return math.nan
            return float(rng.normal() + (x**2).sum())

        settings = OptimizerSettings(n_max=n_max, rho_beg=1.0, rho_end=1e-5)
        result = minimize(objective, rng.normal(size=k), settings)
        assert 1 <= result.n_calls <= n_max
        assert len(result.history) == result.n_calls

    def test_all_nan_objective_terminates(self):
        settings = OptimizerSettings(n_max=50, rho_beg=1.0, rho_end=1e-4)
        result = minimize(lambda x: math.nan, np.zeros(2), settings)
        assert result.n_calls <= 50
        assert result.best_value == math.inf
        assert all(v == math.inf for _, v in result.history)

    def test_nan_never_becomes_best(self):
        calls = []

        def objective(x):
            calls.append(1)
            return math.nan if len(calls) % 2 else float((x**2).sum())

        result = minimize(objective, np.ones(2), OptimizerSettings(60, 0.5, 1e-6))
        assert math.isfinite(result.best_value)


class TestDeterminism:
    def test_identical_runs_identical_history(self):
        settings = OptimizerSettings(n_max=300, rho_beg=0.8, rho_end=1e-7)
        a = minimize(quadratic, np.array([0.3, -0.2, 0.9]), settings)
        b = minimize(quadratic, np.array([0.3, -0.2, 0.9]), settings)
        assert a.history == b.history
        assert np.array_equal(a.final_params, b.final_params)

    def test_objective_cannot_corrupt_state(self):
        # mutating the argument in place must not affect the search
        def mutating(x):
            value = quadratic(x)
            x[:] = 1e9
            return value

        a = minimize(mutating, np.zeros(2), OptimizerSettings(200, 0.5, 1e-6))
        b = minimize(quadratic, np.zeros(2), OptimizerSettings(200, 0.5, 1e-6))
        assert a.history == b.history


class TestValidation:
    def test_initial_must_be_finite(self):
        with pytest.raises(ValueError, match="finite"):
            minimize(quadratic, np.array([0.0, math.inf]), OptimizerSettings(100))

    def test_initial_must_be_vector(self):
        with pytest.raises(ValueError, match="vector"):
            minimize(quadratic, np.zeros((2, 2)), OptimizerSettings(100))

    def test_result_type(self):
        result = minimize(quadratic, np.zeros(2), OptimizerSettings(100, 0.5, 1e-5))
        assert isinstance(result, OptimizationResult)
