"""Dense regularized least-squares solves used by every other module.

Both entry points work on the normal equations: parameter counts stay in the
hundreds, and a positive ridge keeps the conditioning bounded, so a symmetric
positive-definite factorization is cheaper and safe.  One step of iterative
refinement tightens the normal-system residual to near round-off.
"""

import numpy as np
import scipy.linalg as sla

from .errors import NonFiniteError, SingularSystemError

# Residual tolerance for the normal system, relative to ||rhs|| + 1.
_RESID_TOL = 1e-10
_REFINE_STEPS = 2


def _require_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains NaN or Inf")


def _solve_spd(S, rhs):
    """Cholesky solve of a symmetric (semi)definite system.

    Raises SingularSystemError when the factorization breaks down, which is
    how near-singularity at gamma = 0 surfaces.
    """
    try:
        factor = sla.cho_factor(S, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise SingularSystemError(f"SPD factorization failed: {exc}") from exc
    x = sla.cho_solve(factor, rhs, check_finite=False)
    # Iterative refinement: drives the residual of the normal system down to
    # the contract tolerance even when S is poorly conditioned.
    for _ in range(_REFINE_STEPS):
        r = rhs - S @ x
        x = x + sla.cho_solve(factor, r, check_finite=False)
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("SPD solve produced non-finite values")
    return x


def tikhonov_solve(A, b, gamma):
    """Solve (A^T A + gamma I) x = A^T b.

    Parameters
    ----------
    A : (n, p) array
    b : (n,) array
    gamma : float
        Ridge parameter, >= 0.  With gamma = 0 the Gram matrix must be
        nonsingular, otherwise SingularSystemError is raised.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] != b.shape[0]:
        raise ValueError(f"shape mismatch: A {A.shape}, b {b.shape}")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    _require_finite("A", A)
    _require_finite("b", b)

    gram = A.T @ A
    gram = 0.5 * (gram + gram.T)
    if gamma > 0:
        gram[np.diag_indices_from(gram)] += gamma
    rhs = A.T @ b
    x = _solve_spd(gram, rhs)
    resid = np.linalg.norm(rhs - gram @ x)
    if resid > _RESID_TOL * (np.linalg.norm(rhs) + 1.0):
        raise SingularSystemError(
            f"normal-system residual {resid:.3e} exceeds tolerance; "
            "Gram matrix is singular to working precision"
        )
    return x


def reg_pinv_apply(J, resid, gamma_t):
    """Apply the regularized pseudo-inverse: J^T (J J^T + gamma_t I)^{-1} resid.

    With gamma_t = 0 and J of full row rank this is the minimum-norm solution
    of J x = resid.
    """
    J = np.asarray(J, dtype=float)
    resid = np.asarray(resid, dtype=float).ravel()
    if J.ndim != 2 or J.shape[0] != resid.shape[0]:
        raise ValueError(f"shape mismatch: J {J.shape}, resid {resid.shape}")
    if gamma_t < 0:
        raise ValueError("gamma_t must be nonnegative")
    _require_finite("J", J)
    _require_finite("resid", resid)

    S = J @ J.T
    S = 0.5 * (S + S.T)
    if gamma_t > 0:
        S[np.diag_indices_from(S)] += gamma_t
    w = _solve_spd(S, resid)
    nrm = np.linalg.norm(resid - S @ w)
    if nrm > _RESID_TOL * (np.linalg.norm(resid) + 1.0):
        raise SingularSystemError(
            f"J J^T solve residual {nrm:.3e} exceeds tolerance; "
            "matrix is singular to working precision"
        )
    return J.T @ w
