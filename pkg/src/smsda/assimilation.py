"""Sequential data assimilation for shape-morphing solutions.

The discrete scheme is a predictor-corrector: between observation times the
parameter ODEs evolve the solution; at each observation time the parameters
are corrected by regularized underdetermined Newton iterations

    theta <- theta + J^T (J J^T + gamma_t I)^{-1} (y - y_hat)

against the measured values.  A continuous-time variant instead constrains
the residual minimization so the estimated observations track the data's
time derivative exactly (J theta' = y'); both its Galerkin and collocation
forms are provided.  Sensor-coverage diagnostics (fill distance, sampled
Lipschitz bounds) quantify when pointwise agreement at sensors controls the
uniform reconstruction error.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .core import make_sms_rhs
from .integrate import Trajectory, integrate
from .errors import (
    DegenerateModulusError,
    RankDeficientJacobianError,
    SingularSystemError,
)
from .linalg import reg_pinv_apply

log = logging.getLogger(__name__)

_MODULUS_FLOOR = 1e-12


@dataclass(frozen=True)
class ObservationOperator:
    kind: str  # "pointwise-state" | "pointwise-modulus"
    locations: np.ndarray

    def __post_init__(self):
        if self.kind not in ("pointwise-state", "pointwise-modulus"):
            raise ValueError(f"unknown observation kind {self.kind!r}")
        object.__setattr__(self, "locations", np.asarray(self.locations, dtype=float))
        if self.locations.shape[0] < 1:
            raise ValueError("need at least one sensor")


@dataclass
class ObservationSeries:
    times: np.ndarray
    values: np.ndarray  # (m, r)
    noise_sigma_frac: float = 0.0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.size and np.any(np.diff(self.times) <= 0):
            raise ValueError("observation times must be strictly increasing")
        if self.values.shape[0] != self.times.shape[0]:
            raise ValueError("times/values length mismatch")

    def __len__(self):
        return self.times.shape[0]


@dataclass(frozen=True)
class DaConfig:
    delta: float = 0.05
    maxits: int = 1
    gamma_t: float = 1e-3
    da_window: tuple = (0.0, 1.0)
    forecast_end: float = 1.0

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.maxits < 1:
            raise ValueError("maxits must be at least 1")
        if self.gamma_t < 0:
            raise ValueError("gamma_t must be nonnegative")
        t0, tm = self.da_window
        if not (t0 < tm <= self.forecast_end):
            raise ValueError("need da_window start < end <= forecast_end")


@dataclass
class CorrectionRecord:
    t: float
    iterations: int
    pre_rel_err: float
    post_rel_err: float


@dataclass
class DaResult:
    trajectory: "object"  # integrate.Trajectory
    theta_final: np.ndarray
    corrections: list = field(default_factory=list)


def observe_model(op, model, theta):
    """Estimated observations of the ansatz at the sensor locations."""
    values = model.eval(op.locations, theta)
    if op.kind == "pointwise-modulus":
        return np.abs(values)
    return np.asarray(values, dtype=float)


def observation_jacobian(op, model, theta):
    """Rows are gradients of each observation w.r.t. the parameters.

    For modulus observations d|u|/dtheta = Re(conj(u) du/dtheta)/|u|, which
    is undefined where the state vanishes.
    """
    grad = model.grad_theta(op.locations, theta)
    if op.kind == "pointwise-state":
        return np.asarray(grad, dtype=float)
    values = model.eval(op.locations, theta)
    mags = np.abs(values)
    if np.any(mags <= _MODULUS_FLOOR):
        raise DegenerateModulusError(
            f"modulus below {_MODULUS_FLOOR:g} at a sensor; gradient undefined"
        )
    return (np.conj(values)[:, None] * grad).real / mags[:, None]


def newton_correct(theta_in, y, op, model, cfg):
    """Correct parameters against one observation vector.

    Runs at most cfg.maxits regularized Newton steps, stopping early once the
    relative observation error falls below cfg.delta.  With ||y|| = 0 the
    relative criterion is undefined and an absolute tolerance is used
    instead.  If no iterate improves on the start, the best iterate seen
    (smallest observation error) is returned.

    Returns (theta_out, iterations_used, final_rel_error).
    """
    y = np.asarray(y, dtype=float).ravel()
    y_norm = np.linalg.norm(y)
    denom = y_norm if y_norm > 0 else 1.0  # absolute fallback for zero data

    theta = np.asarray(theta_in, dtype=float).copy()
    err0 = np.linalg.norm(observe_model(op, model, theta) - y) / denom
    best_theta, best_err = theta, err0
    err = err0
    iters = 0
    while err >= cfg.delta and iters < cfg.maxits:
        J = observation_jacobian(op, model, theta)
        y_hat = observe_model(op, model, theta)
        theta = theta + reg_pinv_apply(J, y - y_hat, cfg.gamma_t)
        err = np.linalg.norm(observe_model(op, model, theta) - y) / denom
        iters += 1
        if err < best_err:
            best_theta, best_err = theta, err
    if iters > 0 and best_err >= err0:
        log.warning("correction did not reduce observation error; keeping best iterate")
    return best_theta, iters, best_err


def da_sms_run(model, theta0, series, op, cfg, gamma, grid_or_rule, evolve_cfg, eval_times=None):
    """Predictor-corrector assimilation over the DA window, then forecast.

    Evolves with the shape-morphing equation between observation times,
    corrects at each, and finally evolves to cfg.forecast_end.  With an
    empty series this reduces to a single evolution over the whole window,
    using the identical integrator path.
    """
    t0, tm = cfg.da_window
    rhs = make_sms_rhs(model, grid_or_rule, gamma)
    obs_times = series.times
    if len(series) and (obs_times[0] < t0 - 1e-12 or obs_times[-1] > tm + 1e-12):
        raise ValueError("observation times outside the DA window")

    eval_times = None if eval_times is None else np.asarray(eval_times, dtype=float)

    def seg_eval(a, b):
        if eval_times is None:
            return None
        return eval_times[(eval_times >= a - 1e-12) & (eval_times <= b + 1e-12)]

    knots = np.concatenate([[t0], obs_times])
    times_acc = []
    states_acc = []
    corrections = []
    theta = np.asarray(theta0, dtype=float)

    def extend(traj, replace_last_state=None):
        ts, ys = traj.times, traj.states
        if replace_last_state is not None:
            ys = ys.copy()
            ys[-1] = replace_last_state
        start = 1 if times_acc and abs(ts[0] - times_acc[-1][-1]) < 1e-12 else 0
        times_acc.append(ts[start:])
        states_acc.append(ys[start:])

    for i, t_obs in enumerate(obs_times):
        traj = integrate(rhs, theta, (knots[i], t_obs), evolve_cfg, eval_times=seg_eval(knots[i], t_obs))
        theta_pred = traj.final
        y_hat = observe_model(op, model, theta_pred)
        y = series.values[i]
        denom = np.linalg.norm(y) or 1.0
        pre_err = np.linalg.norm(y_hat - y) / denom
        theta, iters, post_err = newton_correct(theta_pred, y, op, model, cfg)
        corrections.append(CorrectionRecord(t_obs, iters, pre_err, post_err))
        extend(traj, replace_last_state=theta)

    t_last = obs_times[-1] if len(series) else t0
    if cfg.forecast_end > t_last or not times_acc:
        traj = integrate(
            rhs, theta, (t_last, cfg.forecast_end), evolve_cfg,
            eval_times=seg_eval(t_last, cfg.forecast_end),
        )
        theta = traj.final
        extend(traj)

    full = Trajectory(np.concatenate(times_acc), np.concatenate(states_acc))
    return DaResult(trajectory=full, theta_final=theta, corrections=corrections)


def _chol(S, label):
    try:
        return sla.cho_factor(0.5 * (S + S.T), lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise SingularSystemError(f"{label} is not positive definite: {exc}") from exc


def _constrained_rate(M_gamma, f_vec, J, ydot):
    """Minimize the quadratic residual subject to J theta' = ydot.

    Solves via the Lagrange-multiplier elimination:
        theta' = w - B lambda,  w = M_gamma^{-1} f,  B = M_gamma^{-1} J^T,
        lambda = (J B)^{-1} (J w - ydot),
    with one correction pass so the constraint holds to near round-off.
    """
    factor = _chol(M_gamma, "regularized metric tensor")
    w = sla.cho_solve(factor, f_vec, check_finite=False)
    if J is None or J.shape[0] == 0:
        return w
    B = sla.cho_solve(factor, J.T, check_finite=False)
    S = J @ B
    S = 0.5 * (S + S.T)
    try:
        s_factor = sla.cho_factor(S, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise RankDeficientJacobianError(
            f"observation Jacobian is rank deficient: {exc}"
        ) from exc
    lam = sla.cho_solve(s_factor, J @ w - ydot, check_finite=False)
    rate = w - B @ lam
    defect = J @ rate - ydot
    rate = rate - B @ sla.cho_solve(s_factor, defect, check_finite=False)
    if not np.all(np.isfinite(rate)):
        raise RankDeficientJacobianError("constrained solve produced non-finite rate")
    return rate


def continuous_da_rhs_symbolic(M, f, J, ydot, gamma):
    """Continuous-time assimilation rate for the Galerkin form.

    Returns the minimizer of the residual norm subject to J theta' = ydot,
    with the metric tensor regularized to M + gamma I.
    """
    M = np.asarray(M, dtype=float)
    M_gamma = M + gamma * np.eye(M.shape[0]) if gamma > 0 else M
    J = None if J is None else np.atleast_2d(np.asarray(J, dtype=float))
    ydot = None if ydot is None else np.asarray(ydot, dtype=float).ravel()
    return _constrained_rate(M_gamma, np.asarray(f, dtype=float).ravel(), J, ydot)


def continuous_da_rhs_collocation(Mt, ft, J, ydot, gamma):
    """Continuous-time assimilation rate for the collocation form.

    Same constrained minimization with M replaced by Mt^T Mt + gamma I and f
    by Mt^T ft; with no constraints (r = 0) this is exactly the regularized
    collocation rate.
    """
    Mt = np.asarray(Mt, dtype=float)
    ft = np.asarray(ft, dtype=float).ravel()
    M_gamma = Mt.T @ Mt
    M_gamma = 0.5 * (M_gamma + M_gamma.T)
    if gamma > 0:
        M_gamma[np.diag_indices_from(M_gamma)] += gamma
    J = None if J is None else np.atleast_2d(np.asarray(J, dtype=float))
    ydot = None if ydot is None else np.asarray(ydot, dtype=float).ravel()
    return _constrained_rate(M_gamma, Mt.T @ ft, J, ydot)


def _as_2d(points):
    pts = np.asarray(points, dtype=float)
    return pts[:, None] if pts.ndim == 1 else pts


def fill_distance(sensors, domain_samples):
    """Largest distance from any sampled domain point to its nearest sensor."""
    sensors = _as_2d(sensors)
    samples = _as_2d(domain_samples)
    if sensors.shape[0] == 0 or samples.shape[0] == 0:
        raise ValueError("both point sets must be nonempty")
    # chunked to bound the (n_samples x r) distance matrix
    worst = 0.0
    for start in range(0, samples.shape[0], 65536):
        block = samples[start : start + 65536]
        d2 = ((block[:, None, :] - sensors[None, :, :]) ** 2).sum(axis=2)
        worst = max(worst, float(np.sqrt(d2.min(axis=1).max())))
    return worst


@dataclass
class SensorDiagnostics:
    fill_distance: float
    lipschitz_estimates: tuple  # (L_ref, L_model)


@dataclass
class BoundCheckReport:
    max_violation: float
    fill_distance: float
    lip_ref: float
    lip_model: float


def _sampled_lipschitz(values, points, rng, n_pairs=10000):
    """Max difference quotient over adjacent and random sample pairs."""
    pts = _as_2d(points)
    vals = np.asarray(values, dtype=float)
    quotients = []
    if pts.shape[1] == 1:
        order = np.argsort(pts[:, 0])
        dx = np.diff(pts[order, 0])
        keep = dx > 0
        quotients.append(np.abs(np.diff(vals[order]))[keep] / dx[keep])
    idx_a = rng.integers(0, pts.shape[0], n_pairs)
    idx_b = rng.integers(0, pts.shape[0], n_pairs)
    dist = np.linalg.norm(pts[idx_a] - pts[idx_b], axis=1)
    keep = dist > 1e-12
    quotients.append(np.abs(vals[idx_a] - vals[idx_b])[keep] / dist[keep])
    return float(np.max(np.concatenate(quotients)))


def lemma1_bound_check(u_ref, model, theta, sensors, domain_samples, seed=0):
    """Check the sensor-coverage error bound on dense samples.

    Verifies |u_hat(x) - u(x)| <= (L_u + L_uhat) * Delta + |u_hat(x_j) - u(x_j)|
    at every sample, where x_j is the sample's nearest sensor, Delta the fill
    distance, and the Lipschitz constants are sampled estimates (a
    diagnostic, not a certified proof).  Violations should not exceed small
    sampling slack.
    """
    samples = _as_2d(domain_samples)
    sensors2 = _as_2d(sensors)
    rng = np.random.default_rng(seed)

    ref_vals = np.asarray(u_ref(domain_samples), dtype=float)
    model_vals = np.asarray(model.eval(domain_samples, theta), dtype=float)
    lip_ref = _sampled_lipschitz(ref_vals, samples, rng)
    lip_model = _sampled_lipschitz(model_vals, samples, rng)
    delta = fill_distance(sensors, domain_samples)

    ref_at_sensors = np.asarray(u_ref(sensors), dtype=float)
    model_at_sensors = np.asarray(model.eval(sensors, theta), dtype=float)
    sensor_err = np.abs(model_at_sensors - ref_at_sensors)

    d2 = ((samples[:, None, :] - sensors2[None, :, :]) ** 2).sum(axis=2)
    nearest = d2.argmin(axis=1)
    bound = (lip_ref + lip_model) * delta + sensor_err[nearest]
    violation = np.abs(model_vals - ref_vals) - bound
    return BoundCheckReport(
        max_violation=float(violation.max()),
        fill_distance=delta,
        lip_ref=lip_ref,
        lip_model=lip_model,
    )
