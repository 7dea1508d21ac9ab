import numpy as np
import pytest
from conftest import gd_minimize

from csl.errors import DataError, NonConvergenceError
from csl.losses import DataShard, LossModel, loss_value_gradient
from csl.solvers import SolverSettings, minimize_shard_loss, newton_minimize, shard_objective


def quadratic_objective(target):
    target = np.asarray(target, dtype=np.float64)

    def objective(theta):
        diff = theta - target
        return 0.5 * float(diff @ diff), diff, np.eye(target.size)

    return objective


def test_quadratic_converges_in_one_step():
    target = np.array([3.0, -1.5, 0.25])
    calls = {"count": 0}
    base = quadratic_objective(target)

    def counting(theta):
        calls["count"] += 1
        return base(theta)

    result = newton_minimize(counting, np.zeros(3))
    np.testing.assert_allclose(result, target, rtol=0, atol=1e-12)
    # one model evaluation at the start, one line-search probe, one final check
    assert calls["count"] <= 3


def test_already_optimal_start_returns_immediately():
    target = np.array([1.0, 2.0])
    result = newton_minimize(quadratic_objective(target), target.copy())
    np.testing.assert_array_equal(result, target)


def test_logistic_fit_matches_first_order_oracle():
    rng = np.random.default_rng(21)
    x = rng.standard_normal((200, 3))
    truth = np.array([0.5, -0.25, 1.0])
    y = (rng.uniform(size=200) < 1.0 / (1.0 + np.exp(-x @ truth))).astype(float)
    shard = DataShard(x=x, y=y)
    model = LossModel.logistic()
    fit = minimize_shard_loss(model, shard)
    oracle = gd_minimize(lambda t: loss_value_gradient(model, t, shard), np.zeros(3))
    np.testing.assert_allclose(fit, oracle, rtol=0, atol=1e-7)


def test_start_point_does_not_change_answer():
    rng = np.random.default_rng(22)
    x = rng.standard_normal((150, 4))
    y = (rng.uniform(size=150) < 0.5).astype(float)
    shard = DataShard(x=x, y=y)
    model = LossModel.logistic()
    a = minimize_shard_loss(model, shard, theta0=np.zeros(4))
    b = minimize_shard_loss(model, shard, theta0=np.full(4, 2.0))
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-7)


def test_separable_logistic_raises_nonconvergence_with_payload():
    # Perfectly separated labels: the minimizer sits at infinity. With a small
    # iteration budget the solver must fail loudly and hand back its state.
    x = np.concatenate([np.ones((20, 1)), -np.ones((20, 1))])
    y = np.concatenate([np.ones(20), np.zeros(20)])
    shard = DataShard(x=x, y=y)
    settings = SolverSettings(max_iters=8)
    with pytest.raises(NonConvergenceError) as info:
        minimize_shard_loss(LossModel.logistic(), shard, settings)
    err = info.value
    assert err.last_iterate is not None and np.all(np.isfinite(err.last_iterate))
    assert err.gradient_norm is not None and err.gradient_norm > 0.0
    assert err.iterations == 8


def test_nonfinite_candidate_is_backtracked_not_fatal():
    # Poisson loss overflows for big steps; the line search has to shrink past
    # the overflow instead of crashing.
    rng = np.random.default_rng(23)
    x = rng.standard_normal((50, 2))
    y = rng.poisson(1.5, size=50).astype(float)
    shard = DataShard(x=x, y=y)
    fit = minimize_shard_loss(LossModel.glm("log"), shard)
    value, grad, _ = shard_objective(LossModel.glm("log"), shard)(fit)
    assert np.isfinite(value)
    assert np.max(np.abs(grad)) <= 1e-8


class TestSettingsValidation:
    def test_rejects_bad_tolerance(self):
        with pytest.raises(DataError):
            SolverSettings(grad_tol=0.0)

    def test_rejects_bad_shrink(self):
        with pytest.raises(DataError):
            SolverSettings(backtrack_shrink=1.0)

    def test_rejects_bad_armijo(self):
        with pytest.raises(DataError):
            SolverSettings(armijo_c=0.7)

    def test_rejects_nonvector_start(self):
        with pytest.raises(DataError):
            newton_minimize(quadratic_objective(np.ones(2)), np.zeros((2, 2)))
