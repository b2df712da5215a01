"""Symmetry-embedded tanh network and gyre flow for 2D advection-diffusion.

The scalar field satisfies homogeneous Dirichlet conditions at z = 0, H and
homogeneous Neumann conditions at x = 0, L.  A base network N_p, periodic on
the doubled box through per-node sine embeddings, is combined as

    u(x, z) = N_p(x, z) - N_p(x, -z) + N_p(-x, z) - N_p(-x, -z)

which is odd in z and even in x.  Together with the 2L x 2H periodicity this
makes every boundary condition hold identically for any parameter values.

The prescribed velocity is a time-periodic double-gyre drawn from a stream
function, so it is divergence-free and respects the no-flux walls exactly.
"""

from dataclasses import dataclass

import numpy as np

from ..core import SmsModel

# reflection terms (sigma_x, sigma_z, overall sign)
_REFLECTIONS = ((1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, 1.0), (-1.0, -1.0, -1.0))


@dataclass(frozen=True)
class GyreFlowConfig:
    m: int = 2
    A_v: float = 0.1
    eps: float = 0.025
    omega: float = np.pi
    L: float = 4.0
    H: float = 1.0

    def __post_init__(self):
        if self.L <= 0 or self.H <= 0:
            raise ValueError("box dimensions must be positive")


def _gyre_f(cfg, x, t):
    xi = x / cfg.L
    c_t = cfg.eps * cfg.L**4 * np.sin(cfg.omega * t)
    f = cfg.m * xi + c_t * (xi - 2.0 * xi**3 + xi**4)
    f_x = (cfg.m + c_t * (1.0 - 6.0 * xi**2 + 4.0 * xi**3)) / cfg.L
    return f, f_x


def gyre_velocity(cfg, x, z, t):
    """Oscillating double-gyre velocity (v1, v2) from the stream function
    psi = A_v sin(pi f(x,t)) sin(pi z / H)."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    f, f_x = _gyre_f(cfg, x, t)
    v1 = -(np.pi / cfg.H) * cfg.A_v * np.sin(np.pi * f) * np.cos(np.pi * z / cfg.H)
    v2 = np.pi * cfg.A_v * f_x * np.cos(np.pi * f) * np.sin(np.pi * z / cfg.H)
    return v1, v2


class AdNetwork(SmsModel):
    """Mixed-boundary-condition network; parameter layout [a | b | wx | wz | cx | cz]."""

    is_complex = False

    def __init__(self, n_nodes=100, flow=GyreFlowConfig(), kappa=1e-3, weight_init_scale=4.0):
        self.n_nodes = int(n_nodes)
        self.flow = flow
        self.kappa = float(kappa)
        self.weight_init_scale = float(weight_init_scale)
        self.L = flow.L
        self.H = flow.H
        self._domain = ((0.0, self.L), (0.0, self.H))
        self.linear_param_slice = slice(0, self.n_nodes)

    @property
    def param_count(self):
        return 6 * self.n_nodes

    @property
    def domain(self):
        return self._domain

    def split(self, theta):
        theta = np.asarray(theta, dtype=float)
        n = self.n_nodes
        return tuple(theta[i * n : (i + 1) * n] for i in range(6))

    def random_params(self, rng):
        """Restart draw; wider weight draws give the fitted network sharper
        nodes, which the evolved solution needs to track the stirred field."""
        n = self.n_nodes
        s = self.weight_init_scale
        theta = np.zeros(6 * n)
        theta[n : 2 * n] = rng.uniform(-1.0, 1.0, n)  # b
        theta[2 * n : 3 * n] = rng.uniform(-s, s, n)  # wx
        theta[3 * n : 4 * n] = rng.uniform(-s, s, n)  # wz
        theta[4 * n : 5 * n] = rng.uniform(0.0, 2.0 * np.pi, n)  # cx
        theta[5 * n :] = rng.uniform(0.0, 2.0 * np.pi, n)  # cz
        return theta

    @staticmethod
    def _points(x):
        pts = np.asarray(x, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        return pts

    def _base_tables(self, xs, zs, theta, order):
        """Node tables of the periodic base network at raw coordinates."""
        a, b, wx, wz, cx, cz = self.split(theta)
        kx, kz = np.pi / self.L, np.pi / self.H
        px = kx * xs[:, None] + cx[None, :]
        pz = kz * zs[:, None] + cz[None, :]
        sx, sz = np.sin(px), np.sin(pz)
        T = np.tanh(wx[None, :] * sx + wz[None, :] * sz + b[None, :])
        T1 = 1.0 - T * T
        tb = {"a": a, "wx": wx, "wz": wz, "sx": sx, "sz": sz, "T": T, "T1": T1}
        if order >= 1:
            tb["cpx"], tb["cpz"] = np.cos(px), np.cos(pz)
            tb["dzdx"] = wx[None, :] * kx * tb["cpx"]
            tb["dzdz"] = wz[None, :] * kz * tb["cpz"]
        if order >= 2:
            tb["T2"] = -2.0 * T * T1
            tb["d2zdx"] = -wx[None, :] * kx**2 * sx
            tb["d2zdz"] = -wz[None, :] * kz**2 * sz
        return tb

    def _reflected_eval(self, pts, theta, order):
        """Accumulate value/derivatives of the symmetrized network.

        Returns dict with u and, per order, ux, uz, uxx, uzz at pts.
        """
        x, z = pts[:, 0], pts[:, 1]
        out = {k: 0.0 for k in ("u", "ux", "uz", "uxx", "uzz")}
        for sgx, sgz, sign in _REFLECTIONS:
            tb = self._base_tables(sgx * x, sgz * z, theta, order)
            a = tb["a"]
            out["u"] += sign * (tb["T"] @ a)
            if order >= 1:
                # chain rule through the reflected coordinate
                out["ux"] += sign * sgx * ((tb["T1"] * tb["dzdx"]) @ a)
                out["uz"] += sign * sgz * ((tb["T1"] * tb["dzdz"]) @ a)
            if order >= 2:
                gxx = tb["T2"] * tb["dzdx"] ** 2 + tb["T1"] * tb["d2zdx"]
                gzz = tb["T2"] * tb["dzdz"] ** 2 + tb["T1"] * tb["d2zdz"]
                out["uxx"] += sign * (gxx @ a)
                out["uzz"] += sign * (gzz @ a)
        return out

    def eval(self, x, theta):
        return self._reflected_eval(self._points(x), theta, order=0)["u"]

    def eval_with_derivatives(self, x, theta):
        """(u, u_x, u_z, laplacian) at the given points."""
        out = self._reflected_eval(self._points(x), theta, order=2)
        return out["u"], out["ux"], out["uz"], out["uxx"] + out["uzz"]

    def grad_theta(self, x, theta):
        pts = self._points(x)
        x_, z_ = pts[:, 0], pts[:, 1]
        n = self.n_nodes
        grad = np.zeros((pts.shape[0], 6 * n))
        for sgx, sgz, sign in _REFLECTIONS:
            tb = self._base_tables(sgx * x_, sgz * z_, theta, order=1)
            a = tb["a"]
            aT1 = sign * a[None, :] * tb["T1"]
            grad[:, :n] += sign * tb["T"]
            grad[:, n : 2 * n] += aT1
            grad[:, 2 * n : 3 * n] += aT1 * tb["sx"]
            grad[:, 3 * n : 4 * n] += aT1 * tb["sz"]
            grad[:, 4 * n : 5 * n] += aT1 * tb["wx"][None, :] * tb["cpx"]
            grad[:, 5 * n :] += aT1 * tb["wz"][None, :] * tb["cpz"]
        return grad

    def pde_rhs(self, x, theta, t=0.0):
        """F(u) = -v . grad(u) + v2 + kappa lap(u); time enters through the flow."""
        pts = self._points(x)
        u, ux, uz, lap = self.eval_with_derivatives(pts, theta)
        v1, v2 = gyre_velocity(self.flow, pts[:, 0], pts[:, 1], t)
        return -(v1 * ux + v2 * uz) + v2 + self.kappa * lap

    def grad_and_pde_rhs(self, x, theta, t=0.0):
        """Fused assembly: one pass over the reflections serves both outputs.

        Collocation evolution calls this on every integrator stage, so the
        node tables are built once instead of twice.
        """
        pts = self._points(x)
        x_, z_ = pts[:, 0], pts[:, 1]
        n = self.n_nodes
        grad = np.zeros((pts.shape[0], 6 * n))
        ux = uz = lap = 0.0
        for sgx, sgz, sign in _REFLECTIONS:
            tb = self._base_tables(sgx * x_, sgz * z_, theta, order=2)
            a = tb["a"]
            aT1 = sign * a[None, :] * tb["T1"]
            grad[:, :n] += sign * tb["T"]
            grad[:, n : 2 * n] += aT1
            grad[:, 2 * n : 3 * n] += aT1 * tb["sx"]
            grad[:, 3 * n : 4 * n] += aT1 * tb["sz"]
            grad[:, 4 * n : 5 * n] += aT1 * tb["wx"][None, :] * tb["cpx"]
            grad[:, 5 * n :] += aT1 * tb["wz"][None, :] * tb["cpz"]
            ux = ux + sign * sgx * ((tb["T1"] * tb["dzdx"]) @ a)
            uz = uz + sign * sgz * ((tb["T1"] * tb["dzdz"]) @ a)
            gxx = tb["T2"] * tb["dzdx"] ** 2 + tb["T1"] * tb["d2zdx"]
            gzz = tb["T2"] * tb["dzdz"] ** 2 + tb["T1"] * tb["d2zdz"]
            lap = lap + sign * ((gxx + gzz) @ a)
        v1, v2 = gyre_velocity(self.flow, x_, z_, t)
        return grad, -(v1 * ux + v2 * uz) + v2 + self.kappa * lap
