"""Shape-morphing solution core: model interface, assembly, evolution.

A shape-morphing solution is a parametric ansatz u(x, theta(t)) whose
parameters follow an ODE chosen to minimize the instantaneous PDE residual

    R(x, theta, theta') = sum_j (du/dtheta_j) theta'_j - F(u).

Minimizing ||R|| in the function-space norm gives the Galerkin form
M(theta) theta' = f(theta) with the Gram (metric) tensor M; requiring R = 0
at collocation points gives the rectangular system Mt theta' = ft solved in
the ridge-regularized least-squares sense.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteError
from .integrate import integrate
from .linalg import _solve_spd, tikhonov_solve


class SmsModel(ABC):
    """One ansatz: evaluation, parameter gradient, and the PDE right-hand side.

    Point arrays are (n,) in one dimension and (n, d) otherwise.  Models with
    complex state (wave envelopes) set is_complex and return complex arrays;
    the assembly routines split them into real and imaginary parts so that
    downstream linear algebra stays real.
    """

    is_complex = False

    @property
    @abstractmethod
    def param_count(self):
        """Length of the flat parameter vector."""

    @property
    @abstractmethod
    def domain(self):
        """Spatial bounds, ((lo, hi),) per dimension."""

    @abstractmethod
    def eval(self, x, theta):
        """State values at points x, shape (n,)."""

    @abstractmethod
    def grad_theta(self, x, theta):
        """Parameter gradient du/dtheta at points x, shape (n, p)."""

    @abstractmethod
    def pde_rhs(self, x, theta, t=0.0):
        """F(u) evaluated at points x, shape (n,)."""


@dataclass(frozen=True)
class CollocationGrid:
    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))
        if self.points.shape[0] < 1:
            raise ValueError("collocation grid must contain at least one point")


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.weights.shape[0] != self.nodes.shape[0]:
            raise ValueError("nodes and weights length mismatch")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")


def midpoint_rule(domain, n):
    """Midpoint quadrature on a box.

    n is an int in 1D or a (nx, nz) pair in 2D; nodes are cell centers and
    weights the constant cell measure.
    """
    if len(domain) == 1:
        (lo, hi), = domain
        h = (hi - lo) / n
        nodes = lo + h * (np.arange(n) + 0.5)
        return QuadratureRule(nodes, np.full(n, h))
    if len(domain) == 2:
        (x0, x1), (z0, z1) = domain
        nx, nz = n
        hx, hz = (x1 - x0) / nx, (z1 - z0) / nz
        xs = x0 + hx * (np.arange(nx) + 0.5)
        zs = z0 + hz * (np.arange(nz) + 0.5)
        X, Z = np.meshgrid(xs, zs, indexing="ij")
        nodes = np.column_stack([X.ravel(), Z.ravel()])
        return QuadratureRule(nodes, np.full(nx * nz, hx * hz))
    raise ValueError("midpoint_rule supports 1D and 2D domains")


def uniform_grid(domain, n, cell_centered=False):
    """Equispaced collocation points on a box (left-closed in each direction)."""
    if len(domain) == 1:
        (lo, hi), = domain
        h = (hi - lo) / n
        off = 0.5 * h if cell_centered else 0.0
        return CollocationGrid(lo + off + h * np.arange(n))
    (x0, x1), (z0, z1) = domain
    nx, nz = n
    hx, hz = (x1 - x0) / nx, (z1 - z0) / nz
    ox = 0.5 * hx if cell_centered else 0.0
    oz = 0.5 * hz if cell_centered else 0.0
    X, Z = np.meshgrid(x0 + ox + hx * np.arange(nx), z0 + oz + hz * np.arange(nz), indexing="ij")
    return CollocationGrid(np.column_stack([X.ravel(), Z.ravel()]))


def residual(model, x, theta, theta_dot, t=0.0):
    """PDE residual of the ansatz at points x for the given parameter rate.

    Points follow the owning model's convention ((n,) in 1D, (n, d) in 2D);
    models accept single points as well.
    """
    grad = model.grad_theta(x, theta)
    rhs = model.pde_rhs(x, theta, t)
    return grad @ np.asarray(theta_dot, dtype=float) - rhs


def assemble_collocation(model, theta, grid, t=0.0):
    """Pointwise residual system (Mt, ft): Mt[i, j] = du/dtheta_j(x_i), ft[i] = F(u)(x_i).

    Complex-state models produce stacked real rows: first all real parts,
    then all imaginary parts (2 n_c rows), which preserves the least-squares
    problem for real parameter rates.
    """
    fused = getattr(model, "grad_and_pde_rhs", None)
    if fused is not None:
        G, F = fused(grid.points, theta, t)
    else:
        G = model.grad_theta(grid.points, theta)
        F = model.pde_rhs(grid.points, theta, t)
    if not (np.all(np.isfinite(G)) and np.all(np.isfinite(F))):
        raise NonFiniteError("model evaluation returned NaN/Inf during assembly")
    if model.is_complex:
        Mt = np.vstack([G.real, G.imag])
        ft = np.concatenate([np.asarray(F).real, np.asarray(F).imag])
    else:
        Mt = np.asarray(G, dtype=float)
        ft = np.asarray(F, dtype=float)
    return Mt, ft


def assemble_quadrature(model, theta, rule, t=0.0):
    """Galerkin system (M, f) with inner products approximated by quadrature.

    M_ij = <du/dtheta_i, du/dtheta_j>, f_i = <du/dtheta_i, F(u)>; for complex
    state the real part of the Hermitian inner product is used.  M is
    symmetrized explicitly so M == M.T holds exactly.
    """
    G = model.grad_theta(rule.nodes, theta)
    F = model.pde_rhs(rule.nodes, theta, t)
    if not (np.all(np.isfinite(G)) and np.all(np.isfinite(F))):
        raise NonFiniteError("model evaluation returned NaN/Inf during assembly")
    w = rule.weights
    Gw = G * w[:, None]
    if model.is_complex:
        M = (G.conj().T @ Gw).real
        f = (G.conj().T @ (w * F)).real
    else:
        M = G.T @ Gw
        f = G.T @ (w * F)
    M = 0.5 * (M + M.T)
    return M, f


def sms_rhs_collocation(model, theta, grid, gamma, t=0.0):
    """Parameter rate from the regularized collocation system.

    Solves (Mt^T Mt + gamma I) theta' = Mt^T ft.
    """
    Mt, ft = assemble_collocation(model, theta, grid, t)
    return tikhonov_solve(Mt, ft, gamma)


def sms_rhs_quadrature(model, theta, rule, gamma, t=0.0):
    """Parameter rate from the Galerkin system: (M + gamma I) theta' = f."""
    M, f = assemble_quadrature(model, theta, rule, t)
    if gamma > 0:
        M = M + gamma * np.eye(M.shape[0])
    return _solve_spd(M, f)


def make_sms_rhs(model, grid_or_rule, gamma):
    """Build rhs(theta, t) for the integrator from a grid, rule, or callable."""
    if callable(grid_or_rule):
        return grid_or_rule
    if isinstance(grid_or_rule, CollocationGrid):
        return lambda theta, t: sms_rhs_collocation(model, theta, grid_or_rule, gamma, t)
    if isinstance(grid_or_rule, QuadratureRule):
        return lambda theta, t: sms_rhs_quadrature(model, theta, rule=grid_or_rule, gamma=gamma, t=t)
    raise TypeError(f"unsupported evolution spec: {type(grid_or_rule)!r}")


def evolve(model, theta0, window, gamma, grid_or_rule, cfg, eval_times=None):
    """Integrate the shape-morphing equation over the window."""
    rhs = make_sms_rhs(model, grid_or_rule, gamma)
    return integrate(rhs, theta0, window, cfg, eval_times=eval_times)
