"""Explicit ODE time steppers for the parameter evolution equations.

Two schemes: classical fixed-step RK4 and the adaptive Dormand-Prince 5(4)
embedded pair.  Both return a trajectory that contains the window endpoints
and any requested evaluation times exactly (steps are clipped, never
interpolated).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteError, StepFailureError

# Dormand-Prince 5(4) tableau.  The 5th-order solution is propagated; the
# difference to the embedded 4th-order one estimates the local error.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_DT_UNDERFLOW_FRAC = 1e-12


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: str = "rk45-adaptive"  # "rk4-fixed" | "rk45-adaptive"
    dt_init: float = 1e-2
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    dt_max: float = np.inf

    def __post_init__(self):
        if self.dt_init <= 0:
            raise ValueError("dt_init must be positive")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.scheme not in ("rk4-fixed", "rk45-adaptive"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


@dataclass
class Trajectory:
    """Times and states accumulated by an integrator, endpoints included."""

    times: np.ndarray
    states: np.ndarray  # (n_times, p)

    @property
    def final(self):
        return self.states[-1]

    def at(self, t):
        """State at time t: exact stored point if present, else linear interpolation."""
        idx = np.searchsorted(self.times, t)
        if idx < len(self.times) and abs(self.times[idx] - t) <= 1e-12 * (1 + abs(t)):
            return self.states[idx]
        if idx > 0 and abs(self.times[idx - 1] - t) <= 1e-12 * (1 + abs(t)):
            return self.states[idx - 1]
        if idx == 0 or idx == len(self.times):
            raise ValueError(f"t={t} outside trajectory range")
        t0, t1 = self.times[idx - 1], self.times[idx]
        w = (t - t0) / (t1 - t0)
        return (1 - w) * self.states[idx - 1] + w * self.states[idx]


@dataclass
class _Accumulator:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)

    def push(self, t, y):
        self.times.append(t)
        self.states.append(np.array(y, dtype=float))

    def build(self):
        return Trajectory(np.array(self.times), np.array(self.states))


def _eval_rhs(rhs, theta, t):
    out = np.asarray(rhs(theta, t), dtype=float)
    if not np.all(np.isfinite(out)):
        raise NonFiniteError(f"rhs returned NaN/Inf at t={t}")
    return out


def _checkpoints(t_a, t_b, eval_times):
    pts = [t_a, t_b]
    if eval_times is not None:
        ev = np.asarray(eval_times, dtype=float)
        if ev.size and (ev.min() < t_a - 1e-12 or ev.max() > t_b + 1e-12):
            raise ValueError("eval_times outside integration window")
        pts.extend(ev.tolist())
    pts = np.unique(np.array(pts, dtype=float))
    return pts[(pts >= t_a) & (pts <= t_b)]


def integrate(rhs, theta0, window, cfg, eval_times=None):
    """Integrate theta' = rhs(theta, t) over window, returning a Trajectory.

    The trajectory contains both endpoints and every entry of eval_times
    exactly.  A zero-length window returns the initial state unchanged.
    """
    t_a, t_b = float(window[0]), float(window[1])
    theta0 = np.asarray(theta0, dtype=float)
    if not np.all(np.isfinite(theta0)):
        raise NonFiniteError("initial state contains NaN/Inf")
    if t_b < t_a:
        raise ValueError("window end precedes start")
    if t_b == t_a:
        return Trajectory(np.array([t_a]), theta0[None, :].copy())
    points = _checkpoints(t_a, t_b, eval_times)
    if cfg.scheme == "rk4-fixed":
        return _run_rk4(rhs, theta0, points, cfg)
    return _run_dopri(rhs, theta0, points, cfg)


def _run_rk4(rhs, theta0, points, cfg):
    acc = _Accumulator()
    acc.push(points[0], theta0)
    y = theta0
    for t0, t1 in zip(points[:-1], points[1:]):
        span = t1 - t0
        n = max(1, int(np.ceil(span / cfg.dt_init - 1e-12)))
        h = span / n
        t = t0
        for _ in range(n):
            k1 = _eval_rhs(rhs, y, t)
            k2 = _eval_rhs(rhs, y + 0.5 * h * k1, t + 0.5 * h)
            k3 = _eval_rhs(rhs, y + 0.5 * h * k2, t + 0.5 * h)
            k4 = _eval_rhs(rhs, y + h * k3, t + h)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        acc.push(t1, y)
    return acc.build()


def _run_dopri(rhs, theta0, points, cfg):
    t_a, t_b = points[0], points[-1]
    dt_min = _DT_UNDERFLOW_FRAC * (t_b - t_a)
    acc = _Accumulator()
    acc.push(t_a, theta0)

    t = t_a
    y = theta0
    dt_prop = min(cfg.dt_init, cfg.dt_max, t_b - t_a)
    k0 = _eval_rhs(rhs, y, t)  # FSAL
    next_idx = 1
    while next_idx < len(points):
        target = points[next_idx]
        clipped = t + dt_prop >= target - 1e-14 * max(1.0, abs(target))
        h = target - t if clipped else dt_prop

        k = [k0]
        for i in range(1, 7):
            yi = y + h * sum(a * kk for a, kk in zip(_DP_A[i], k))
            k.append(_eval_rhs(rhs, yi, t + _DP_C[i] * h))
        k = np.array(k)
        y5 = y + h * (_DP_B5 @ k)
        err_vec = h * ((_DP_B5 - _DP_B4) @ k)
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y5))
        err = np.sqrt(np.mean((err_vec / scale) ** 2))

        if err <= 1.0:
            t = target if clipped else t + h
            y = y5
            k0 = k[6]  # same as rhs(y5, t): FSAL property
            if clipped:
                acc.push(target, y)
                next_idx += 1
            else:
                acc.push(t, y)
            grow = 0.9 * (max(err, 1e-16)) ** -0.2
            dt_new = h * min(5.0, grow)
            if clipped:
                # clipping shortened h artificially; keep the larger proposal
                dt_new = max(dt_new, dt_prop)
            dt_prop = min(dt_new, cfg.dt_max)
        else:
            shrink = max(0.2, 0.9 * err**-0.2)
            dt_prop = h * shrink
            if dt_prop < dt_min:
                raise StepFailureError(
                    f"adaptive step underflow at t={t:.6g}: dt={dt_prop:.3e}"
                )
    return acc.build()
