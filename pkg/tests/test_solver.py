"""Tests for the penalized regression and the constrained trainers."""

import numpy as np
import pytest

from eopkit.core import Dataset, GroupCoefficients, LinearModel, UtilitySpec, crime_utility_spec
from eopkit.data import make_toy_instance
from eopkit.metrics import group_average_utility, min_group_average_utility
from eopkit.solver import (
    SolverConfig,
    default_loss_bound_grid,
    fit_l1_regularized,
    group_affine_terms,
    select_lambda,
    solve_baseline,
    solve_eop_training,
)

from gridoracle import grid_max_mean_residual, grid_max_min_utility


def dataset_1d(x, y, groups=None):
    x = np.asarray(x, dtype=float)
    groups = np.array(groups if groups is not None else [0, 1] * (len(x) // 2 + 1))[: len(x)]
    return Dataset(X=x[:, None], y=np.asarray(y, dtype=float), groups=groups)


class TestFitL1:
    def test_interpolation(self):
        ds = dataset_1d([1.0, 2.0, -1.0, 0.5], [1.0, 2.0, -1.0, 0.5])
        theta, value = fit_l1_regularized(ds, lam=0.0)
        assert theta == pytest.approx([1.0], abs=1e-10)
        assert value == pytest.approx(0.0, abs=1e-12)

    def test_full_shrinkage_threshold(self):
        ds = dataset_1d([1.0, -1.0], [0.75, -0.25])  # mean x*y = 0.5
        theta, _ = fit_l1_regularized(ds, lam=1.0)  # lam >= 2*|c|
        assert theta == pytest.approx([0.0], abs=1e-14)

    def test_one_dimensional_closed_form(self):
        # mean x^2 = 1, mean x*y = 0.5, lam = 0.2: theta = 0.5 - 0.1
        ds = dataset_1d([1.0, -1.0], [0.75, -0.25])
        theta, _ = fit_l1_regularized(ds, lam=0.2)
        assert theta == pytest.approx([0.4], abs=1e-12)

    def test_matches_dense_grid(self):
        for seed in range(5):
            ds = make_toy_instance(seed=seed, n=6, k=1, noise=0.3)
            lam = 0.1 + 0.05 * seed
            theta, value = fit_l1_regularized(ds, lam)
            grid = np.arange(-10.0, 10.0, 1e-4)
            losses = ((ds.X * grid[None, :] - ds.y[:, None]) ** 2).mean(axis=0)
            losses += lam * np.abs(grid)
            assert value == pytest.approx(losses.min(), abs=1e-6)
            assert theta[0] == pytest.approx(grid[np.argmin(losses)], abs=1e-3)

    def test_negative_lam_rejected(self):
        ds = dataset_1d([1.0, -1.0], [1.0, -1.0])
        with pytest.raises(ValueError):
            fit_l1_regularized(ds, -0.1)


class TestSelectLambda:
    def test_singleton_grid(self):
        ds = make_toy_instance(seed=1, n=20, k=2, noise=0.1)
        assert select_lambda(ds, [0.37]) == 0.37

    def test_noiseless_prefers_zero(self):
        ds = make_toy_instance(seed=2, n=24, k=2, noise=0.0)
        assert select_lambda(ds, [0.0, 10.0]) == 0.0

    def test_ties_go_to_smaller(self):
        # both values are above the kill threshold, so validation scores tie
        ds = make_toy_instance(seed=3, n=20, k=1, noise=0.2)
        big = 10.0 * abs(float(ds.X[:, 0] @ ds.y)) / ds.n
        assert select_lambda(ds, [2.0 * big, big]) == big

    def test_deterministic_given_seed(self):
        ds = make_toy_instance(seed=4, n=30, k=2, noise=0.5)
        grid = [0.0, 0.01, 0.1, 1.0]
        assert select_lambda(ds, grid, seed=9) == select_lambda(ds, grid, seed=9)


def toy_and_config(seed, k, eps_factor, lam=0.05, n=4):
    ds = make_toy_instance(seed=seed, n=n, k=k, noise=0.25)
    _, eps_min = fit_l1_regularized(ds, lam)
    config = SolverConfig(loss_bound=eps_factor * eps_min, lam=lam)
    return ds, config


class TestSolveEopTraining:
    def test_infeasible_bound(self):
        ds, config = toy_and_config(seed=0, k=1, eps_factor=1.0)
        tight = SolverConfig(loss_bound=config.loss_bound * 0.5, lam=config.lam)
        result = solve_eop_training(ds, crime_utility_spec(), tight)
        assert result.status == "infeasible"

    def test_bound_at_minimum_returns_anchor(self):
        ds = make_toy_instance(seed=5, n=6, k=1, noise=0.2)
        lam = 0.1
        theta_anchor, eps_min = fit_l1_regularized(ds, lam)
        config = SolverConfig(loss_bound=eps_min, lam=lam)
        result = solve_eop_training(ds, crime_utility_spec(), config)
        assert result.status == "optimal"
        assert result.weights == pytest.approx(theta_anchor, abs=1e-9)

    @pytest.mark.parametrize("seed,k", [(0, 1), (1, 1), (2, 2), (3, 2)])
    def test_matches_grid_oracle(self, seed, k):
        ds, config = toy_and_config(seed=seed, k=k, eps_factor=1.5)
        result = solve_eop_training(ds, crime_utility_spec(), config)
        oracle_value, oracle_theta = grid_max_min_utility(
            ds, crime_utility_spec(), config.lam, config.loss_bound,
            lo=-10.0 if k == 1 else -4.0, hi=10.0 if k == 1 else 4.0,
        )
        assert oracle_theta is not None
        assert result.status == "optimal"
        assert result.objective == pytest.approx(oracle_value, abs=1e-3)
        assert result.feasibility_residual <= 1e-8

    def test_feasibility_and_floor_recomputed_independently(self):
        spec = crime_utility_spec()
        for seed in (7, 8):
            ds, config = toy_and_config(seed=seed, k=2, eps_factor=2.0, n=8)
            result = solve_eop_training(ds, spec, config)
            model = LinearModel(result.weights)
            mse = float(np.mean((ds.X @ result.weights - ds.y) ** 2))
            loss = mse + config.lam * float(np.abs(result.weights).sum())
            assert loss <= config.loss_bound + 1e-8
            per_group = group_average_utility(ds, model, spec)
            assert all(v >= result.objective - 1e-8 for v in per_group.values())
            assert min_group_average_utility(ds, model, spec) == pytest.approx(
                result.objective, abs=1e-9
            )

    def test_objective_monotone_in_loss_bound(self):
        ds = make_toy_instance(seed=11, n=8, k=2, noise=0.3)
        lam = 0.05
        _, eps_min = fit_l1_regularized(ds, lam)
        values = []
        for eps in default_loss_bound_grid(eps_min, points=6):
            result = solve_eop_training(
                ds, crime_utility_spec(), SolverConfig(loss_bound=eps, lam=lam)
            )
            values.append(result.objective)
        for lo, hi in zip(values, values[1:]):
            assert hi >= lo - 5e-6

    def test_duality_gap_within_tolerance(self):
        ds, config = toy_and_config(seed=13, k=2, eps_factor=1.8, n=6)
        result = solve_eop_training(ds, crime_utility_spec(), config)
        assert result.status == "optimal"
        assert result.dual_bound - result.objective <= config.tol_optimality
        assert result.dual_bound >= result.objective - 1e-12

    def test_utility_scale_equivariance(self):
        ds, config = toy_and_config(seed=17, k=1, eps_factor=2.0, n=6)
        base = solve_eop_training(ds, crime_utility_spec(), config)
        scaled = solve_eop_training(ds, crime_utility_spec().scaled(7.0), config)
        assert scaled.objective == pytest.approx(7.0 * base.objective, rel=1e-4)
        assert scaled.weights == pytest.approx(base.weights, abs=1e-3)

    def test_three_groups(self):
        rng = np.random.default_rng(21)
        X = rng.normal(size=(9, 2))
        y = X @ np.array([0.4, -0.2]) + 0.1 * rng.normal(size=9)
        ds = Dataset(X=X, y=y, groups=np.array([0, 1, 2] * 3))
        spec = UtilitySpec({
            0: GroupCoefficients(0.5, -0.5, 0.0, 1.0),
            1: GroupCoefficients(3.0, 2.0, -1.0, 1.0),
            2: GroupCoefficients(1.0, 0.5, 0.0, 0.5),
        })
        lam = 0.05
        _, eps_min = fit_l1_regularized(ds, lam)
        config = SolverConfig(loss_bound=1.6 * eps_min, lam=lam)
        result = solve_eop_training(ds, spec, config)
        oracle_value, _ = grid_max_min_utility(ds, spec, lam, config.loss_bound,
                                               lo=-4.0, hi=4.0)
        assert result.objective == pytest.approx(oracle_value, abs=1e-3)

    def test_missing_group_coefficients_rejected(self):
        ds = make_toy_instance(seed=1, n=4, k=1)
        spec = UtilitySpec({0: GroupCoefficients(0, 0, 0, 1)})
        with pytest.raises(KeyError):
            solve_eop_training(ds, spec, SolverConfig(loss_bound=1.0))


class TestSolveBaseline:
    def test_bound_at_minimum_returns_anchor(self):
        ds = make_toy_instance(seed=6, n=6, k=1, noise=0.2)
        lam = 0.1
        theta_anchor, eps_min = fit_l1_regularized(ds, lam)
        result = solve_baseline(ds, SolverConfig(loss_bound=eps_min, lam=lam))
        assert result.weights == pytest.approx(theta_anchor, abs=1e-9)

    @pytest.mark.parametrize("seed,k", [(4, 1), (5, 2)])
    def test_matches_grid_oracle(self, seed, k):
        ds, config = toy_and_config(seed=seed, k=k, eps_factor=2.0)
        result = solve_baseline(ds, config)
        oracle_value, oracle_theta = grid_max_mean_residual(
            ds, config.lam, config.loss_bound,
            lo=-10.0 if k == 1 else -4.0, hi=10.0 if k == 1 else 4.0,
        )
        assert oracle_theta is not None
        assert result.objective == pytest.approx(oracle_value, abs=1e-3)
        assert result.feasibility_residual <= 1e-8

    def test_dominates_anchor(self):
        ds, config = toy_and_config(seed=9, k=2, eps_factor=2.0, n=8)
        theta_anchor, _ = fit_l1_regularized(ds, config.lam)
        anchor_objective = float(np.mean(ds.X @ theta_anchor - ds.y))
        result = solve_baseline(ds, config)
        assert result.objective >= anchor_objective - 1e-9


class TestAffineTerms:
    def test_affine_identity_against_metrics(self):
        spec = crime_utility_spec()
        rng = np.random.default_rng(3)
        ds = make_toy_instance(seed=10, n=10, k=2, noise=0.4)
        slopes, offsets, labels = group_affine_terms(ds, spec)
        for _ in range(20):
            theta = rng.normal(size=2)
            per_group = group_average_utility(ds, LinearModel(theta), spec)
            predicted = slopes @ theta + offsets
            for row, g in enumerate(labels):
                assert predicted[row] == pytest.approx(per_group[g], abs=1e-12)


class TestConfigValidation:
    def test_negative_bound_rejected(self):
        with pytest.raises(ValueError):
            SolverConfig(loss_bound=-1.0)

    def test_bad_bracket_rejected(self):
        with pytest.raises(ValueError):
            SolverConfig(loss_bound=1.0, multiplier_bracket=(1.0, 0.5))

    def test_rank_deficient_unpenalized_rejected(self):
        X = np.array([[1.0, 1.0], [2.0, 2.0], [-1.0, -1.0], [0.5, 0.5]])
        ds = Dataset(X=X, y=np.array([1.0, 2.0, -1.0, 0.5]),
                     groups=np.array([0, 1, 0, 1]))
        with pytest.raises(ValueError, match="full-rank"):
            solve_eop_training(ds, crime_utility_spec(), SolverConfig(loss_bound=1.0, lam=0.0))


class TestBackends:
    def test_backend_agreement(self):
        import eopkit.solver._kernels_py as pure

        try:
            import eopkit.solver._kernels as compiled
        except ImportError:
            pytest.skip("compiled kernels not built")
        rng = np.random.default_rng(0)
        k = 5
        gram_half = rng.normal(size=(k, k))
        gram = np.ascontiguousarray(gram_half @ gram_half.T / k + np.eye(k))
        linear = np.ascontiguousarray(rng.normal(size=k))
        t_pure, _ = pure.lasso_cd_gram(gram, linear, 0.3, np.zeros(k), 10_000, 1e-14)
        t_comp, _ = compiled.lasso_cd_gram(gram, linear, 0.3, np.zeros(k), 10_000, 1e-14)
        assert t_comp == pytest.approx(t_pure, abs=1e-12)

        slopes = np.ascontiguousarray(rng.normal(size=(2, k)))
        offsets = np.ascontiguousarray(rng.normal(size=2))
        args = (slopes, offsets, gram, linear, 1.3, 0.7, 0.2, 0.9,
                np.zeros(k), 500, 0.05)
        b_pure, v_pure, l_pure = pure.prox_subgradient_maxmin(*args)
        b_comp, v_comp, l_comp = compiled.prox_subgradient_maxmin(*args)
        assert v_comp == pytest.approx(v_pure, abs=1e-10)
        assert b_comp == pytest.approx(b_pure, abs=1e-10)
        assert l_comp == pytest.approx(l_pure, abs=1e-10)
