import numpy as np
import pytest

from smsda import IntegratorConfig, integrate
from smsda.errors import NonFiniteError, StepFailureError

RK4 = IntegratorConfig(scheme="rk4-fixed", dt_init=1e-3)
RK45 = IntegratorConfig(scheme="rk45-adaptive", dt_init=1e-2, rel_tol=1e-9, abs_tol=1e-12)


def test_constant_solution():
    traj = integrate(lambda y, t: np.zeros_like(y), np.array([3.0]), (0.0, 1.0), RK4)
    assert traj.final == pytest.approx([3.0])
    assert traj.times[0] == 0.0 and traj.times[-1] == 1.0


def test_exponential_rk4():
    traj = integrate(lambda y, t: y, np.array([1.0]), (0.0, 1.0), RK4)
    assert abs(traj.final[0] - np.e) < 1e-9


def test_exponential_adaptive_tolerance():
    traj = integrate(lambda y, t: y, np.array([1.0]), (0.0, 1.0), RK45)
    assert abs(traj.final[0] - np.e) < 1e-7


def test_eval_times_hit_exactly():
    evals = [0.125, 0.37, 0.8]
    traj = integrate(lambda y, t: y, np.array([1.0]), (0.0, 1.0), RK45, eval_times=evals)
    for t in evals:
        assert t in traj.times
        assert abs(traj.at(t)[0] - np.exp(t)) < 1e-7


def test_fourth_order_convergence():
    lam = -2.0
    errs = []
    for dt in (0.02, 0.01):
        cfg = IntegratorConfig(scheme="rk4-fixed", dt_init=dt)
        traj = integrate(lambda y, t: lam * y, np.array([1.0]), (0.0, 1.0), cfg)
        errs.append(abs(traj.final[0] - np.exp(lam)))
    order = np.log2(errs[0] / errs[1])
    assert order >= 3.8


def test_zero_length_window():
    traj = integrate(lambda y, t: y, np.array([2.0, 3.0]), (1.0, 1.0), RK45)
    assert traj.times.tolist() == [1.0]
    assert traj.states[0] == pytest.approx([2.0, 3.0])


def test_reversed_window_rejected():
    with pytest.raises(ValueError):
        integrate(lambda y, t: y, np.array([1.0]), (1.0, 0.0), RK45)


def test_non_finite_rhs():
    def rhs(y, t):
        return np.array([np.nan])

    with pytest.raises(NonFiniteError):
        integrate(rhs, np.array([1.0]), (0.0, 1.0), RK45)


def test_step_underflow():
    # finite-time blow-up forces the adaptive step below the resolvable floor
    def rhs(y, t):
        return y / (1.0 - t)

    with pytest.raises((StepFailureError, NonFiniteError)):
        integrate(rhs, np.array([1.0]), (0.0, 2.0), RK45)


def test_dt_max_honored():
    cfg = IntegratorConfig(scheme="rk45-adaptive", dt_init=1e-3, rel_tol=1e-3, abs_tol=1e-6, dt_max=0.05)
    traj = integrate(lambda y, t: -y, np.array([1.0]), (0.0, 1.0), cfg)
    assert np.max(np.diff(traj.times)) <= 0.05 + 1e-12


def test_trajectory_interpolation_between_points():
    traj = integrate(lambda y, t: np.ones_like(y), np.array([0.0]), (0.0, 1.0), RK4)
    assert traj.at(0.5)[0] == pytest.approx(0.5, abs=1e-9)
    with pytest.raises(ValueError):
        traj.at(2.0)
