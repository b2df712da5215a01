import numpy as np
import pytest

from smsda import CollocationGrid, KsNetwork, assemble_collocation, fit_initial, midpoint_rule
from smsda.experiments import ks_initial_condition


def random_theta(rng, n):
    theta = np.empty(4 * n)
    theta[:n] = rng.uniform(-1.5, 1.5, n)
    theta[n : 2 * n] = rng.uniform(-3, 3, n)
    theta[2 * n : 3 * n] = rng.uniform(-1, 1, n)
    theta[3 * n :] = rng.uniform(0, 2 * np.pi, n)
    return theta


def test_zero_amplitudes():
    model = KsNetwork(6)
    theta = np.zeros(24)
    theta[6:] = 1.0
    x = np.linspace(-11, 11, 33)
    outs = model.eval_with_derivatives(x, theta, order=4)
    for out in outs:
        assert np.all(out == 0.0)


def test_periodicity_exact():
    model = KsNetwork(8, 22.0)
    rng = np.random.default_rng(3)
    theta = random_theta(rng, 8)
    x = rng.uniform(-11, 11, 100)
    np.testing.assert_allclose(model.eval(x, theta), model.eval(x + 22.0, theta), atol=1e-12)


def test_gradient_matches_finite_differences():
    model = KsNetwork(5)
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        theta = random_theta(rng, 5)
        x = rng.uniform(-11, 11, 3)
        grad = model.grad_theta(x, theta)
        for j in range(20):
            h = 1e-6 * (1 + abs(theta[j]))
            tp, tm = theta.copy(), theta.copy()
            tp[j] += h
            tm[j] -= h
            fd = (model.eval(x, tp) - model.eval(x, tm)) / (2 * h)
            scale = max(np.abs(fd).max(), 1e-8)
            worst = max(worst, np.abs(grad[:, j] - fd).max() / scale)
    assert worst < 1e-5


def test_fourth_derivative_against_five_point_stencil():
    model = KsNetwork(5)
    rng = np.random.default_rng(6)
    theta = random_theta(rng, 5)
    x = rng.uniform(-11, 11, 40)
    h = 1e-2
    d4_fd = (
        model.eval(x - 2 * h, theta)
        - 4 * model.eval(x - h, theta)
        + 6 * model.eval(x, theta)
        - 4 * model.eval(x + h, theta)
        + model.eval(x + 2 * h, theta)
    ) / h**4
    d4 = model.eval_with_derivatives(x, theta, order=4)[4]
    assert np.abs(d4 - d4_fd).max() <= 1e-4 * max(np.abs(d4_fd).max(), 1.0)


def test_pde_rhs_single_mode_against_sympy():
    # independent symbolic oracle for -u u' - u'' - u''''
    sympy = pytest.importorskip("sympy")
    xs = sympy.symbols("x")
    L = sympy.Rational(22)
    u = sympy.tanh(sympy.sin(2 * sympy.pi * xs / L))
    expr = -u * u.diff(xs) - u.diff(xs, 2) - u.diff(xs, 4)
    exact = float(expr.subs(xs, sympy.Rational(1, 3)).evalf(30))

    model = KsNetwork(1, 22.0)
    theta = np.array([1.0, 1.0, 0.0, 0.0])  # a=w=1, b=c=0
    val = model.pde_rhs(np.array([1.0 / 3.0]), theta)[0]
    assert val == pytest.approx(exact, abs=1e-10)


def test_collocation_dimensions():
    model = KsNetwork(10, 22.0)
    rng = np.random.default_rng(9)
    grid = CollocationGrid(np.linspace(-11, 11, 128, endpoint=False))
    Mt, ft = assemble_collocation(model, random_theta(rng, 10), grid)
    assert Mt.shape == (128, 40)
    assert ft.shape == (128,)


def test_fit_realizable_target():
    model = KsNetwork(3, 22.0)
    rng = np.random.default_rng(12)
    theta_star = random_theta(rng, 3)
    target = lambda x: model.eval(x, theta_star)
    rule = midpoint_rule(model.domain, 256)
    theta = fit_initial(model, target, rule, 1e-8, restarts=10, seed=0)
    vals = model.eval(rule.nodes, theta)
    ref = target(rule.nodes)
    assert np.linalg.norm(vals - ref) / np.linalg.norm(ref) < 1e-8


def test_fit_benchmark_initial_condition():
    model = KsNetwork(10, 22.0)
    u0 = ks_initial_condition(22.0)
    theta = fit_initial(model, u0, midpoint_rule(model.domain, 512), 1e-3, restarts=20, seed=0)
    dense = np.linspace(-11, 11, 2001)
    err = np.linalg.norm(model.eval(dense, theta) - u0(dense)) / np.linalg.norm(u0(dense))
    assert err < 1.5e-3  # slack for evaluating off the fit grid


def test_initial_condition_unit_amplitude():
    u0 = ks_initial_condition(22.0)
    dense = np.linspace(-11, 11, 200001)
    assert np.abs(u0(dense)).max() == pytest.approx(1.0, abs=1e-6)
