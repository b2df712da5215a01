import logging

import numpy as np
import pytest

from smsda import (
    CollocationGrid,
    DaConfig,
    IntegratorConfig,
    NlsGaussian,
    ObservationOperator,
    ObservationSeries,
    da_sms_run,
    evolve,
    fill_distance,
    lemma1_bound_check,
    newton_correct,
    observation_jacobian,
    observe_model,
)
from smsda.errors import DegenerateModulusError
from tests.test_core import SinMode


def linear_op(xs):
    return ObservationOperator("pointwise-state", np.asarray(xs, dtype=float))


def test_observe_sin_state():
    y = observe_model(linear_op([np.pi / 2]), SinMode(), np.array([2.0]))
    assert y == pytest.approx([2.0])


def test_observe_modulus_at_center_and_offset():
    model = NlsGaussian()
    theta = np.array([0.2, 20.0, 0.0, 0.0])
    op = ObservationOperator("pointwise-modulus", [0.0, 20.0])
    y = observe_model(op, model, theta)
    assert y[0] == pytest.approx(0.2)
    assert y[1] == pytest.approx(0.2 * np.exp(-1.0))


def test_jacobian_state_row():
    J = observation_jacobian(linear_op([np.pi / 2]), SinMode(), np.array([1.0]))
    assert J == pytest.approx(np.array([[1.0]]))


def test_jacobian_modulus_ignores_phase_and_chirp():
    model = NlsGaussian()
    theta = np.array([0.3, 10.0, 0.2, 1.3])
    op = ObservationOperator("pointwise-modulus", [0.0, 4.0])
    J = observation_jacobian(op, model, theta)
    # modulus does not depend on chirp speed or phase
    assert np.abs(J[:, 2]).max() <= 1e-14
    assert np.abs(J[:, 3]).max() <= 1e-14
    assert J[0, 0] == pytest.approx(1.0)  # d|u|/dA at the center


def test_jacobian_matches_finite_differences():
    model = NlsGaussian()
    op = ObservationOperator("pointwise-modulus", [0.0, 5.0, -10.0])
    rng = np.random.default_rng(13)
    for _ in range(20):
        theta = np.array(
            [rng.uniform(0.05, 0.5), rng.uniform(5, 40), rng.uniform(-0.3, 0.3), rng.uniform(0, 6)]
        )
        J = observation_jacobian(op, model, theta)
        for j in range(4):
            h = 1e-6 * (1 + abs(theta[j]))
            tp, tm = theta.copy(), theta.copy()
            tp[j] += h
            tm[j] -= h
            fd = (observe_model(op, model, tp) - observe_model(op, model, tm)) / (2 * h)
            # absolute floor covers columns that are numerically zero
            assert np.abs(J[:, j] - fd).max() <= 1e-5 * np.abs(fd).max() + 1e-10


def test_jacobian_degenerate_modulus():
    model = NlsGaussian()
    op = ObservationOperator("pointwise-modulus", [0.0])
    with pytest.raises(DegenerateModulusError):
        observation_jacobian(op, model, np.array([1e-13, 20.0, 0.0, 0.0]))


def cfg(delta=1e-10, maxits=1, gamma_t=0.0):
    return DaConfig(delta=delta, maxits=maxits, gamma_t=gamma_t, da_window=(0.0, 1.0), forecast_end=1.0)


def test_newton_linear_exact_in_one_step():
    theta, iters, err = newton_correct(
        np.array([1.0]), np.array([3.0]), linear_op([np.pi / 2]), SinMode(), cfg()
    )
    assert theta == pytest.approx([3.0])
    assert iters == 1
    assert err <= 1e-12


def test_newton_skips_when_already_converged():
    theta, iters, err = newton_correct(
        np.array([3.0]), np.array([3.0]), linear_op([np.pi / 2]), SinMode(), cfg(delta=0.05)
    )
    assert iters == 0
    assert theta == pytest.approx([3.0])


def test_newton_regularized_half_step():
    theta, iters, _ = newton_correct(
        np.array([1.0]), np.array([3.0]), linear_op([np.pi / 2]), SinMode(), cfg(gamma_t=1.0)
    )
    assert theta == pytest.approx([2.0])
    assert iters == 1


def test_newton_zero_observation_absolute_fallback():
    theta, iters, err = newton_correct(
        np.array([0.1]), np.array([0.0]), linear_op([np.pi / 2]), SinMode(), cfg(delta=0.05)
    )
    assert abs(theta[0]) <= 1e-12
    assert err <= 0.05


def test_newton_minimum_norm_interpolant():
    # two parameters, one sensor: a single unregularized step lands on the
    # minimum-norm interpolant of the data
    class TwoMode(SinMode):
        param_count = property(lambda self: 2)

        def eval(self, x, theta):
            x = np.atleast_1d(x)
            return theta[0] * np.sin(x) + theta[1] * np.cos(x)

        def grad_theta(self, x, theta):
            x = np.atleast_1d(x)
            return np.column_stack([np.sin(x), np.cos(x)])

    model = TwoMode()
    op = linear_op([0.7])
    theta, _, err = newton_correct(np.zeros(2), np.array([1.0]), op, model, cfg())
    assert err <= 1e-10
    # minimum-norm solution is J^T (J J^T)^{-1} y
    J = np.array([[np.sin(0.7), np.cos(0.7)]])
    expected = J.T @ np.linalg.solve(J @ J.T, np.array([1.0]))
    assert theta == pytest.approx(expected.ravel(), abs=1e-12)


def test_newton_keeps_best_iterate_on_failure(caplog):
    # an operator the Newton model handles badly: correction overshoots and
    # increases the misfit, so the start point must be returned
    class Saturating(SinMode):
        def eval(self, x, theta):
            return np.tanh(10.0 * theta[0]) * np.sin(np.atleast_1d(x))

        def grad_theta(self, x, theta):
            g = 10.0 * (1 - np.tanh(10.0 * theta[0]) ** 2)
            return (g * np.sin(np.atleast_1d(x)))[:, None]

    model = Saturating()
    op = linear_op([np.pi / 2])
    start = np.array([0.3])
    y = np.array([0.9])
    with caplog.at_level(logging.WARNING, logger="smsda.assimilation"):
        theta, iters, err = newton_correct(start, y, op, model, cfg(maxits=2, gamma_t=1e-6))
    y0_err = abs(model.eval(np.array([np.pi / 2]), start)[0] - y[0]) / y[0]
    assert err <= y0_err + 1e-12
    assert theta == pytest.approx(start)  # every step overshot; start is best
    assert any("keeping best iterate" in rec.message for rec in caplog.records)


def test_noise_floor_after_correction():
    # fitting noisy data exactly leaves a residual near the noise scale
    # against the clean truth
    model = SinMode()
    op = linear_op([np.pi / 2])
    sigma = 0.05
    rng = np.random.default_rng(21)
    clean = np.array([2.0])
    errs = []
    for _ in range(100):
        noisy = clean + sigma * rng.standard_normal(1)
        theta, _, _ = newton_correct(np.array([1.0]), noisy, op, model, cfg())
        errs.append(abs(model.eval(np.array([np.pi / 2]), theta)[0] - clean[0]))
    mean_err = np.mean(errs)
    assert 0.3 * sigma <= mean_err <= 3.0 * sigma


def test_da_run_empty_series_matches_plain_evolve():
    model = SinMode("identity")
    grid = CollocationGrid(np.linspace(0.1, 6.1, 16))
    icfg = IntegratorConfig(scheme="rk45-adaptive", dt_init=1e-2, rel_tol=1e-8, abs_tol=1e-10)
    da_cfg = DaConfig(delta=0.05, maxits=1, gamma_t=0.0, da_window=(0.0, 1.0), forecast_end=2.0)
    series = ObservationSeries(times=np.array([]), values=np.zeros((0, 1)))
    ev = np.linspace(0.0, 2.0, 9)
    result = da_sms_run(model, np.array([1.0]), series, linear_op([1.0]), da_cfg, 1e-8, grid, icfg, eval_times=ev)
    plain = evolve(model, np.array([1.0]), (0.0, 2.0), 1e-8, grid, icfg, eval_times=ev)
    assert np.array_equal(result.trajectory.times, plain.times)
    assert np.array_equal(result.trajectory.states, plain.states)
    assert result.corrections == []


def test_da_run_corrections_logged():
    model = SinMode("identity")
    grid = CollocationGrid(np.linspace(0.1, 6.1, 16))
    icfg = IntegratorConfig(scheme="rk45-adaptive", dt_init=1e-2, rel_tol=1e-8, abs_tol=1e-10)
    da_cfg = DaConfig(delta=1e-6, maxits=2, gamma_t=0.0, da_window=(0.0, 1.0), forecast_end=1.5)
    times = np.array([0.5, 1.0])
    # observations from a drifted truth to force corrections
    truth = 1.1 * np.exp(times)
    series = ObservationSeries(times=times, values=(truth * np.sin(1.0))[:, None])
    result = da_sms_run(model, np.array([1.0]), series, linear_op([1.0]), da_cfg, 0.0, grid, icfg)
    assert len(result.corrections) == 2
    for rec in result.corrections:
        assert rec.post_rel_err <= rec.pre_rel_err + 1e-12
    # the corrected trajectory ends at the drifted truth's forecast
    assert result.theta_final[0] == pytest.approx(1.1 * np.exp(1.5), rel=1e-5)


def test_fill_distance_simple_layouts():
    samples = np.linspace(0.0, 1.0, 10001)
    assert fill_distance(np.array([0.0, 1.0]), samples) == pytest.approx(0.5, abs=1e-3)
    assert fill_distance(np.array([0.5]), samples) == pytest.approx(0.5, abs=1e-3)


def test_fill_distance_ks_layout():
    sensors = -11.0 + 2.2 * np.arange(10)
    samples = np.linspace(-11.0, 11.0, 20001)
    assert fill_distance(sensors, samples) == pytest.approx(2.2, abs=1e-3)


def test_lemma_bound_exact_model():
    model = SinMode()
    samples = np.linspace(0, 2 * np.pi, 2001)
    report = lemma1_bound_check(
        lambda x: 2.0 * np.sin(np.atleast_1d(x)),
        model,
        np.array([2.0]),
        np.array([0.5, 3.0, 5.5]),
        samples,
    )
    assert report.max_violation <= 1e-6


def test_lemma_bound_linear_vs_constant():
    # u(x) = x, u_hat = 0.5, one sensor at 0.5 on [0, 1]: the bound reduces to
    # |x - 0.5| <= 2 * 0.5 which holds with margin
    class Const(SinMode):
        def eval(self, x, theta):
            return np.full(np.atleast_1d(x).shape, theta[0])

        def grad_theta(self, x, theta):
            return np.ones((np.atleast_1d(x).shape[0], 1))

    samples = np.linspace(0.0, 1.0, 5001)
    report = lemma1_bound_check(
        lambda x: np.atleast_1d(x).astype(float),
        Const(),
        np.array([0.5]),
        np.array([0.5]),
        samples,
    )
    assert report.max_violation <= 1e-6
    assert report.fill_distance == pytest.approx(0.5, abs=1e-3)
    assert report.lip_ref == pytest.approx(1.0, abs=1e-3)
