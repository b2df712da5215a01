"""Pseudo-spectral reference solvers and noisy observation sampling.

These direct numerical simulations are the ground truth the shape-morphing
runs are judged against.  All three PDEs are advanced with a fourth-order
exponential time-differencing Runge-Kutta scheme on Fourier coefficients;
the phi-function coefficients are evaluated with the standard contour trick
so they stay accurate for small |h L|.

The advection-diffusion problem has mixed Dirichlet/Neumann walls; it is
solved on a symmetry-extended doubled box (even in x, odd in z) where the
extension is periodic, so a plain Fourier treatment applies and the wall
conditions hold by parity.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NonFiniteError
from .models.ad import gyre_velocity


@dataclass
class GridField:
    """State samples on a tensor grid at one instant."""

    grid: tuple  # 1D axis arrays
    values: np.ndarray
    time: float

    def __post_init__(self):
        expected = tuple(len(ax) for ax in self.grid)
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != grid shape {expected}")


@dataclass(frozen=True)
class DnsConfig:
    modes: tuple
    dt: float
    scheme: str = "etdrk4"

    def __post_init__(self):
        modes = (self.modes,) if np.isscalar(self.modes) else tuple(self.modes)
        object.__setattr__(self, "modes", modes)
        for m in modes:
            if m < 2 or (m & (m - 1)) != 0:
                raise ConfigError(f"mode counts must be powers of two, got {m}")
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.scheme != "etdrk4":
            raise ConfigError(f"unsupported scheme {self.scheme!r}")


@dataclass(frozen=True)
class NoiseSpec:
    fraction: float = 0.0
    seed: int = 0
    mode: str = "per-value-multiplicative"  # | "signal-rms"

    def __post_init__(self):
        if self.fraction < 0:
            raise ValueError("noise fraction must be nonnegative")
        if self.mode not in ("per-value-multiplicative", "signal-rms"):
            raise ValueError(f"unknown noise mode {self.mode!r}")


@dataclass
class DnsResult:
    snapshots: list
    probe_times: np.ndarray = None
    probe_values: np.ndarray = None


class EtdRk4:
    """ETDRK4 stepper for u_hat' = lin * u_hat + nonlin(u_hat, t), lin diagonal."""

    def __init__(self, lin, nonlin, dt, contour_points=32):
        lin = np.asarray(lin)
        self.nonlin = nonlin
        self.dt = dt
        h = dt
        self.exp_full = np.exp(h * lin)
        self.exp_half = np.exp(0.5 * h * lin)
        # contour quadrature for the phi functions; full circle handles
        # complex spectra, the real part is kept for real ones
        is_complex = np.iscomplexobj(lin)
        if is_complex:
            roots = np.exp(2j * np.pi * (np.arange(contour_points) + 0.5) / contour_points)
        else:
            roots = np.exp(1j * np.pi * (np.arange(contour_points) + 0.5) / contour_points)
        lr = h * lin[..., None] + roots
        exp_lr = np.exp(lr)

        def mean(expr):
            m = expr.mean(axis=-1)
            return m if is_complex else m.real

        self.q = h * mean((np.exp(lr / 2.0) - 1.0) / lr)
        self.f1 = h * mean((-4.0 - lr + exp_lr * (4.0 - 3.0 * lr + lr**2)) / lr**3)
        self.f2 = h * mean((2.0 + lr + exp_lr * (lr - 2.0)) / lr**3)
        self.f3 = h * mean((-4.0 - 3.0 * lr - lr**2 + exp_lr * (4.0 - lr)) / lr**3)

    def step(self, v, t):
        h = self.dt
        n_v = self.nonlin(v, t)
        a = self.exp_half * v + self.q * n_v
        n_a = self.nonlin(a, t + 0.5 * h)
        b = self.exp_half * v + self.q * n_a
        n_b = self.nonlin(b, t + 0.5 * h)
        c = self.exp_half * a + self.q * (2.0 * n_b - n_v)
        n_c = self.nonlin(c, t + h)
        return self.exp_full * v + self.f1 * n_v + 2.0 * self.f2 * (n_a + n_b) + self.f3 * n_c


def _step_count(window, dt):
    t0, t1 = window
    n = int(round((t1 - t0) / dt))
    if n < 0 or abs(t0 + n * dt - t1) > 1e-9 * max(1.0, abs(t1)):
        raise ConfigError(f"window {window} is not a multiple of dt={dt}")
    return n


def _save_indices(save_times, t0, dt, n_steps):
    if save_times is None:
        return {0, n_steps}
    idx = set()
    for s in np.asarray(save_times, dtype=float):
        i = int(round((s - t0) / dt))
        if i < 0 or i > n_steps or abs(t0 + i * dt - s) > 1e-9 * max(1.0, abs(s)):
            raise ConfigError(f"save time {s} does not land on the dt grid")
        idx.add(i)
    return idx


def _march(stepper, u_hat0, window, dt, save_idx, to_field, probe=None):
    """Common fixed-step driver: saves snapshots, records probes, detects blow-up."""
    t0, _ = window
    n_steps = max(save_idx) if save_idx else 0
    snapshots = []
    probe_vals = []
    u_hat = u_hat0
    for n in range(n_steps + 1):
        t = t0 + n * dt
        if n > 0:
            u_hat = stepper.step(u_hat, t0 + (n - 1) * dt)
        if not np.all(np.isfinite(u_hat)):
            raise NonFiniteError(f"solution blew up at t={t:.6g}", partial=snapshots)
        field_needed = n in save_idx
        if field_needed or probe is not None:
            field = to_field(u_hat, t)
            if field_needed:
                snapshots.append(field)
            if probe is not None:
                probe_vals.append(probe(field))
    result = DnsResult(snapshots=snapshots)
    if probe is not None:
        result.probe_times = t0 + dt * np.arange(n_steps + 1)
        result.probe_values = np.asarray(probe_vals)
    return result


def nls_dns(u0, window, cfg, save_times=None, probe_points=None):
    """Cubic Schroedinger evolution u_t = i u_xx + i |u|^2 u on a periodic grid."""
    x = u0.grid[0]
    n = x.size
    if cfg.modes != (n,):
        raise ConfigError(f"cfg.modes {cfg.modes} != grid size {n}")
    length = n * (x[1] - x[0])
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=length / n)
    lin = -1j * k**2

    def nonlin(u_hat, t):
        u = np.fft.ifft(u_hat)
        return np.fft.fft(1j * np.abs(u) ** 2 * u)

    stepper = EtdRk4(lin, nonlin, cfg.dt)
    n_steps = _step_count(window, cfg.dt)
    save_idx = _save_indices(save_times, window[0], cfg.dt, n_steps)
    save_idx.add(n_steps)

    def to_field(u_hat, t):
        return GridField((x,), np.fft.ifft(u_hat), t)

    probe = None
    if probe_points is not None:
        p_idx = [int(np.argmin(np.abs(x - p))) for p in probe_points]
        probe = lambda field: field.values[p_idx]

    return _march(stepper, np.fft.fft(u0.values.astype(complex)), window, cfg.dt, save_idx, to_field, probe)


def ks_dns(u0, window, cfg, save_times=None, probe_points=None):
    """Kuramoto-Sivashinsky evolution u_t = -u u_x - u_xx - u_xxxx, periodic."""
    x = u0.grid[0]
    n = x.size
    if cfg.modes != (n,):
        raise ConfigError(f"cfg.modes {cfg.modes} != grid size {n}")
    length = n * (x[1] - x[0])
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=length / n)
    lin = k**2 - k**4

    # zero the Nyquist multiplier for the odd derivative (keeps u*u_x real
    # and parity-clean; see the fft-derivative folklore)
    k_d = k.copy()
    k_d[-1] = 0.0

    def nonlin(u_hat, t):
        u = np.fft.irfft(u_hat, n=n)
        return -0.5j * k_d * np.fft.rfft(u * u)

    stepper = EtdRk4(lin, nonlin, cfg.dt)
    n_steps = _step_count(window, cfg.dt)
    save_idx = _save_indices(save_times, window[0], cfg.dt, n_steps)
    save_idx.add(n_steps)

    def to_field(u_hat, t):
        return GridField((x,), np.fft.irfft(u_hat, n=n), t)

    probe = None
    if probe_points is not None:
        p_idx = [int(np.argmin(np.abs(x - p))) for p in probe_points]
        probe = lambda field: field.values[p_idx]

    return _march(stepper, np.fft.rfft(u0.values), window, cfg.dt, save_idx, to_field, probe)


class _AdExtension:
    """Symmetry extension machinery for the advection-diffusion box."""

    def __init__(self, nx, nz, gyre, kappa):
        self.nx, self.nz = nx, nz
        self.gyre = gyre
        self.kappa = kappa
        L, H = gyre.L, gyre.H
        self.dx, self.dz = L / nx, H / nz
        # inclusive physical axes; the extension grid is the doubled box
        self.x_phys = self.dx * np.arange(nx + 1)
        self.z_phys = self.dz * np.arange(nz + 1)
        x_ext = self.dx * np.arange(2 * nx)
        self.kx = 2.0 * np.pi * np.fft.fftfreq(2 * nx, d=self.dx)
        self.kz = 2.0 * np.pi * np.fft.rfftfreq(2 * nz, d=self.dz)
        self.lin = -kappa * (self.kx[:, None] ** 2 + self.kz[None, :] ** 2)
        # first-derivative multipliers: Nyquist zeroed so odd derivatives of
        # real symmetric fields stay real and parity-clean
        self.kx_d = self.kx.copy()
        self.kx_d[nx] = 0.0
        self.kz_d = self.kz.copy()
        self.kz_d[-1] = 0.0
        # reflected x coordinate and parities for the velocity components
        self.x_ref = np.minimum(x_ext, 2 * L - x_ext)
        self.sgn_v1 = np.where(x_ext > L, -1.0, 1.0)
        z_ext = self.dz * np.arange(2 * nz)
        self.cos_z = np.cos(np.pi * z_ext / H)
        self.sin_z = np.sin(np.pi * z_ext / H)
        self._vel_cache = (None, None)

    def extend(self, phys):
        """Even-in-x, odd-in-z periodic extension of an inclusive physical field."""
        nx, nz = self.nx, self.nz
        ext = np.zeros((2 * nx, 2 * nz))
        phys = phys.copy()
        phys[:, 0] = 0.0  # parities force the Dirichlet rows to zero
        phys[:, nz] = 0.0
        ext[: nx + 1, : nz + 1] = phys
        ext[nx + 1 :, : nz + 1] = phys[nx - 1 : 0 : -1, :]
        ext[:, nz + 1 :] = -ext[:, nz - 1 : 0 : -1]
        return ext

    def restrict(self, ext):
        return ext[: self.nx + 1, : self.nz + 1].copy()

    def velocity(self, t):
        if self._vel_cache[0] is not None and self._vel_cache[0] == t:
            return self._vel_cache[1]
        g = self.gyre
        from .models.ad import _gyre_f

        f, f_x = _gyre_f(g, self.x_ref, t)
        amp1 = -(np.pi / g.H) * g.A_v * np.sin(np.pi * f) * self.sgn_v1
        amp2 = np.pi * g.A_v * f_x * np.cos(np.pi * f)
        v1 = amp1[:, None] * self.cos_z[None, :]
        v2 = amp2[:, None] * self.sin_z[None, :]
        self._vel_cache = (t, (v1, v2))
        return v1, v2

    def nonlin(self, u_hat, t):
        nz2 = 2 * self.nz
        u_x = np.fft.irfft2(1j * self.kx_d[:, None] * u_hat, s=(2 * self.nx, nz2))
        u_z = np.fft.irfft2(1j * self.kz_d[None, :] * u_hat, s=(2 * self.nx, nz2))
        v1, v2 = self.velocity(t)
        forcing = -(v1 * u_x + v2 * u_z) + v2
        return np.fft.rfft2(forcing)


def ad_dns(u0, window, cfg, gyre, kappa, save_times=None):
    """Advection-diffusion of a scalar in the oscillating double gyre.

    u0 lives on the inclusive physical grid ([0, L] x [0, H]); the returned
    snapshots do too.
    """
    nx, nz = cfg.modes
    if u0.values.shape != (nx + 1, nz + 1):
        raise ConfigError(
            f"u0 shape {u0.values.shape} incompatible with modes {cfg.modes} (expect inclusive grid)"
        )
    ext = _AdExtension(nx, nz, gyre, kappa)
    stepper = EtdRk4(ext.lin, ext.nonlin, cfg.dt)
    n_steps = _step_count(window, cfg.dt)
    save_idx = _save_indices(save_times, window[0], cfg.dt, n_steps)
    save_idx.add(n_steps)

    def to_field(u_hat, t):
        u_ext = np.fft.irfft2(u_hat, s=(2 * nx, 2 * nz))
        return GridField((ext.x_phys, ext.z_phys), ext.restrict(u_ext), t)

    u_hat0 = np.fft.rfft2(ext.extend(u0.values))
    return _march(stepper, u_hat0, window, cfg.dt, save_idx, to_field)


def _interp_linear_1d(x_axis, values, locations):
    return np.interp(locations, x_axis, values)


def _interp_bilinear(x_axis, z_axis, values, locations):
    xs, zs = locations[:, 0], locations[:, 1]
    ix = np.clip(np.searchsorted(x_axis, xs) - 1, 0, len(x_axis) - 2)
    iz = np.clip(np.searchsorted(z_axis, zs) - 1, 0, len(z_axis) - 2)
    wx = (xs - x_axis[ix]) / (x_axis[ix + 1] - x_axis[ix])
    wz = (zs - z_axis[iz]) / (z_axis[iz + 1] - z_axis[iz])
    return (
        values[ix, iz] * (1 - wx) * (1 - wz)
        + values[ix + 1, iz] * wx * (1 - wz)
        + values[ix, iz + 1] * (1 - wx) * wz
        + values[ix + 1, iz + 1] * wx * wz
    )


def _observe_field(field, op):
    values = field.values
    if op.kind == "pointwise-modulus":
        values = np.abs(values)
    elif np.iscomplexobj(values):
        raise ValueError("pointwise-state observations require a real field")
    if len(field.grid) == 1:
        return _interp_linear_1d(field.grid[0], values, op.locations)
    return _interp_bilinear(field.grid[0], field.grid[1], values, np.atleast_2d(op.locations))


def sample_observations(snapshots, op, times, noise):
    """Observe DNS snapshots at the sensors and add seeded Gaussian noise.

    Off-grid sensors are linearly (1D) or bilinearly (2D) interpolated.  The
    default noise model perturbs each value with std = fraction * |value|;
    the signal-rms alternative uses std = fraction * rms(clean vector).
    Deterministic for a fixed (seed, inputs) pair.
    """
    from .assimilation import ObservationSeries

    by_time = {snap.time: snap for snap in snapshots}
    rng = np.random.default_rng(noise.seed)
    rows = []
    for t in np.asarray(times, dtype=float):
        key = min(by_time, key=lambda s: abs(s - t))
        if abs(key - t) > 1e-9 * max(1.0, abs(t)):
            raise ConfigError(f"no snapshot at observation time {t}")
        clean = _observe_field(by_time[key], op)
        xi = rng.standard_normal(clean.shape)
        if noise.mode == "per-value-multiplicative":
            std = noise.fraction * np.abs(clean)
        else:
            std = noise.fraction * np.sqrt(np.mean(clean**2))
        rows.append(clean + std * xi)
    return ObservationSeries(
        times=np.asarray(times, dtype=float),
        values=np.asarray(rows),
        noise_sigma_frac=noise.fraction,
    )
