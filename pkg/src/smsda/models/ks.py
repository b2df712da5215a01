"""Periodic shallow tanh network for the Kuramoto-Sivashinsky equation.

Each node is tanh(w * sin(2 pi x / L + c) + b) scaled by an amplitude a, so
the ansatz is periodic in x by construction.  The fourth-order PDE needs
exact spatial derivatives of the ansatz up to order four; they are computed
with the closed-form chain rule below (finite differences appear only in
tests).

Derivative table for g(x) = tanh(z(x)), z = w sin(kx + c) + b:
    T  = tanh z            T1 = 1 - T^2
    T2 = -2 T T1           T3 = -2 (T1^2 + T T2)       T4 = -2 (3 T1 T2 + T T3)
    z1 = w k cos(kx+c)     z2 = -w k^2 sin(kx+c)
    z3 = -w k^3 cos(kx+c)  z4 = w k^4 sin(kx+c)
    g1 = T1 z1
    g2 = T2 z1^2 + T1 z2
    g3 = T3 z1^3 + 3 T2 z1 z2 + T1 z3
    g4 = T4 z1^4 + 6 T3 z1^2 z2 + T2 (3 z2^2 + 4 z1 z3) + T1 z4
"""

import numpy as np

from ..core import SmsModel


class KsNetwork(SmsModel):
    """Shallow periodic tanh network; parameter layout [a | w | b | c], each block length N."""

    is_complex = False

    def __init__(self, n_nodes=10, domain_length=22.0, weight_init_scale=2.0):
        self.n_nodes = int(n_nodes)
        self.domain_length = float(domain_length)
        self.wavenumber = 2.0 * np.pi / self.domain_length
        self.weight_init_scale = float(weight_init_scale)
        self._domain = ((-0.5 * self.domain_length, 0.5 * self.domain_length),)
        # amplitudes come first: the ansatz is linear in this block
        self.linear_param_slice = slice(0, self.n_nodes)

    @property
    def param_count(self):
        return 4 * self.n_nodes

    @property
    def domain(self):
        return self._domain

    def split(self, theta):
        theta = np.asarray(theta, dtype=float)
        n = self.n_nodes
        return theta[:n], theta[n : 2 * n], theta[2 * n : 3 * n], theta[3 * n :]

    def random_params(self, rng):
        """Shape-parameter draw for fit restarts; amplitudes start at zero.

        weight_init_scale sets the node-weight draw range.  Larger draws bias
        the fit toward sharper (closer to saturation) nodes, which changes
        how faithfully the evolved network shadows the PDE later on.
        """
        n = self.n_nodes
        theta = np.zeros(4 * n)
        theta[n : 2 * n] = rng.uniform(-self.weight_init_scale, self.weight_init_scale, n)
        theta[2 * n : 3 * n] = rng.uniform(-1.0, 1.0, n)
        theta[3 * n :] = rng.uniform(0.0, 2.0 * np.pi, n)
        return theta

    def _node_tables(self, x, theta, order):
        a, w, b, c = self.split(theta)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = self.wavenumber
        phase = k * x[:, None] + c[None, :]
        s = np.sin(phase)
        T = np.tanh(w[None, :] * s + b[None, :])
        T1 = 1.0 - T * T
        tables = {"x": x, "a": a, "w": w, "s": s, "phase": phase, "T": T, "T1": T1}
        if order >= 1:
            cosp = np.cos(phase)
            tables["cosp"] = cosp
            tables["z1"] = w[None, :] * k * cosp
        if order >= 2:
            tables["T2"] = -2.0 * T * T1
            tables["z2"] = -w[None, :] * k**2 * s
        if order >= 3:
            tables["T3"] = -2.0 * (T1 * T1 + T * tables["T2"])
            tables["z3"] = -w[None, :] * k**3 * tables["cosp"]
        if order >= 4:
            tables["T4"] = -2.0 * (3.0 * T1 * tables["T2"] + T * tables["T3"])
            tables["z4"] = w[None, :] * k**4 * s
        return tables

    def eval(self, x, theta):
        tb = self._node_tables(x, theta, order=0)
        return tb["T"] @ tb["a"]

    def eval_with_derivatives(self, x, theta, order=4):
        """(u, u_x, ..., u^(order)) with closed-form derivatives."""
        tb = self._node_tables(x, theta, order)
        a = tb["a"]
        out = [tb["T"] @ a]
        if order >= 1:
            g1 = tb["T1"] * tb["z1"]
            out.append(g1 @ a)
        if order >= 2:
            g2 = tb["T2"] * tb["z1"] ** 2 + tb["T1"] * tb["z2"]
            out.append(g2 @ a)
        if order >= 3:
            g3 = (
                tb["T3"] * tb["z1"] ** 3
                + 3.0 * tb["T2"] * tb["z1"] * tb["z2"]
                + tb["T1"] * tb["z3"]
            )
            out.append(g3 @ a)
        if order >= 4:
            g4 = (
                tb["T4"] * tb["z1"] ** 4
                + 6.0 * tb["T3"] * tb["z1"] ** 2 * tb["z2"]
                + tb["T2"] * (3.0 * tb["z2"] ** 2 + 4.0 * tb["z1"] * tb["z3"])
                + tb["T1"] * tb["z4"]
            )
            out.append(g4 @ a)
        return tuple(out)

    def grad_theta(self, x, theta):
        tb = self._node_tables(x, theta, order=1)
        a, w = tb["a"], tb["w"]
        n_pts = tb["T"].shape[0]
        grad = np.empty((n_pts, 4 * self.n_nodes))
        aT1 = a[None, :] * tb["T1"]
        grad[:, : self.n_nodes] = tb["T"]
        grad[:, self.n_nodes : 2 * self.n_nodes] = aT1 * tb["s"]
        grad[:, 2 * self.n_nodes : 3 * self.n_nodes] = aT1
        grad[:, 3 * self.n_nodes :] = aT1 * w[None, :] * tb["cosp"]
        return grad

    def pde_rhs(self, x, theta, t=0.0):
        """F(u) = -u u_x - u_xx - u_xxxx."""
        u, u1, u2, _, u4 = self.eval_with_derivatives(x, theta, order=4)
        return -u * u1 - u2 - u4
