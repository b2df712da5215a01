"""Nonlinear least-squares fit of a model to an initial condition.

Minimizes the discrete (quadrature-weighted) L2 misfit between the ansatz
and a target function.  Each seeded restart draws shape parameters, solves a
linear least-squares problem for the amplitude block, then runs a damped
Gauss-Newton (Levenberg) iteration on all parameters.  Restarts proceed in
order and stop at the first one reaching the requested error, so the result
is deterministic for a fixed seed.
"""

import numpy as np

from ..errors import FitFailedError, SingularSystemError
from ..linalg import _solve_spd


def _rel_error(model, theta, pts, target_vals, sqw, target_norm):
    resid = sqw * (model.eval(pts, theta) - target_vals)
    return np.linalg.norm(resid) / target_norm


def _amplitude_least_squares(model, theta, pts, target_vals, sqw):
    """Closed-form solve for the linear (amplitude) block at fixed shapes."""
    sl = model.linear_param_slice
    basis = model.grad_theta(pts, theta)[:, sl] * sqw[:, None]
    rhs = sqw * target_vals
    gram = basis.T @ basis
    gram[np.diag_indices_from(gram)] += 1e-12 * (np.trace(gram) / gram.shape[0] + 1.0)
    theta = theta.copy()
    theta[sl] = _solve_spd(0.5 * (gram + gram.T), basis.T @ rhs)
    return theta


def _damped_gauss_newton(model, theta, pts, target_vals, sqw, target_norm, tol, max_iter):
    lam = 1e-3
    err = _rel_error(model, theta, pts, target_vals, sqw, target_norm)
    for _ in range(max_iter):
        if err <= tol:
            break
        J = model.grad_theta(pts, theta) * sqw[:, None]
        r = sqw * (model.eval(pts, theta) - target_vals)
        g = J.T @ r
        H = J.T @ J
        H = 0.5 * (H + H.T)
        scale = np.trace(H) / H.shape[0] + 1e-30
        improved = False
        while lam < 1e12:
            Hl = H.copy()
            Hl[np.diag_indices_from(Hl)] += lam * scale
            try:
                step = _solve_spd(Hl, -g)
            except SingularSystemError:
                lam *= 10.0
                continue
            cand = theta + step
            cand_err = _rel_error(model, cand, pts, target_vals, sqw, target_norm)
            if cand_err < err:
                theta, err = cand, cand_err
                lam = max(lam / 3.0, 1e-12)
                improved = True
                break
            lam *= 10.0
        if not improved:
            break
    return theta, err


def fit_initial(model, target, fit_rule, max_rel_error, restarts=20, max_iter=300, seed=0):
    """Fit model parameters to a target initial condition.

    Parameters
    ----------
    model : SmsModel with random_params() and linear_param_slice
    target : callable mapping the rule's nodes to values
    fit_rule : QuadratureRule defining the discrete L2 norm
    max_rel_error : acceptance threshold on ||u_hat - u0|| / ||u0||

    Raises FitFailedError (carrying the best error seen) when no restart
    reaches the threshold.
    """
    pts = fit_rule.nodes
    sqw = np.sqrt(fit_rule.weights)
    target_vals = np.asarray(target(pts), dtype=float)
    target_norm = np.linalg.norm(sqw * target_vals)
    if target_norm == 0.0:
        raise ValueError("target is identically zero on the fit grid")

    best_err = np.inf
    best_theta = None
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        theta = model.random_params(rng)
        try:
            theta = _amplitude_least_squares(model, theta, pts, target_vals, sqw)
        except SingularSystemError:
            continue
        theta, err = _damped_gauss_newton(
            model, theta, pts, target_vals, sqw, target_norm, max_rel_error, max_iter
        )
        if err < best_err:
            best_err, best_theta = err, theta
        if err <= max_rel_error:
            return theta
    raise FitFailedError(
        f"no restart reached rel error {max_rel_error:g}; best {best_err:.3e}",
        best_error=best_err,
        best_params=best_theta,
    )
