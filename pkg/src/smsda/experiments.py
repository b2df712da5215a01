"""Experiment orchestration: presets, config schema, runs, sweeps, metrics.

Each preset bundles every constant of one benchmark problem (domain, model
width, regularizations, observation layout, noise, windows) as plain
key = value text so a run is auditable and reproducible.  Overrides are
type-checked against the schema.
"""

import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import io
from .assimilation import (
    DaConfig,
    ObservationOperator,
    da_sms_run,
)
from .core import CollocationGrid, midpoint_rule, uniform_grid
from .dns import DnsConfig, GridField, NoiseSpec, ad_dns, ks_dns, nls_dns, sample_observations
from .errors import ConfigError, SmsdaError, ZeroReferenceError
from .integrate import IntegratorConfig, integrate
from .models import AdNetwork, GyreFlowConfig, KsNetwork, NlsGaussian, fit_initial, nls_closed_form_rate

PRESETS = ("nls", "ks", "ad")

_COMMON_SCHEMA = {
    "experiment": "str",
    "seed": "int",
    "noise_fraction": "float",
    "noise_mode": "str",
    "delta": "float",
    "maxits": "int",
    "gamma": "float",
    "gamma_t": "float",
    "dt_obs": "float",
    "da_start": "float",
    "da_end": "float",
    "t_end": "float",
    "eval_dt": "float",
    "dns_dt": "float",
    "integrator": "str",
    "int_dt": "float",
    "int_rel_tol": "float",
    "int_abs_tol": "float",
    "int_dt_max": "float",
    "field_format": "str",
}

_FIT_SCHEMA = {
    "fit_tol": "float",
    "fit_restarts": "int",
    "fit_seed": "int",
    "fit_max_iter": "int",
}

SCHEMAS = {
    "nls": {
        **_COMMON_SCHEMA,
        "domain_length": "float",
        "modes": "int",
        "A0": "float",
        "L0": "float",
        "V0": "float",
        "phi0": "float",
        "sensors": "floats",
    },
    "ks": {
        **_COMMON_SCHEMA,
        **_FIT_SCHEMA,
        "domain_length": "float",
        "modes": "int",
        "n_nodes": "int",
        "n_colloc": "int",
        "num_sensors": "int",
        "jitter_seed": "int",
        "fit_grid": "int",
        "fit_w_scale": "float",
    },
    "ad": {
        **_COMMON_SCHEMA,
        **_FIT_SCHEMA,
        "box_length": "float",
        "box_height": "float",
        "modes_x": "int",
        "modes_z": "int",
        "n_nodes": "int",
        "colloc_nx": "int",
        "colloc_nz": "int",
        "kappa": "float",
        "gyre_m": "int",
        "gyre_amp": "float",
        "gyre_eps": "float",
        "gyre_omega": "float",
        "fit_nx": "int",
        "fit_nz": "int",
        "fit_w_scale": "float",
    },
}


def _parse_value(key, kind, raw):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "floats":
            if isinstance(raw, (list, tuple)):
                return [float(v) for v in raw]
            return [float(v) for v in str(raw).split(",") if v.strip()]
        return str(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {raw!r} ({kind})") from exc


def _load_preset_text(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
    return resources.files("smsda.presets").joinpath(f"{name}.cfg").read_text()


def resolve_config(preset=None, overrides=None, config_dict=None):
    """Resolve a run configuration from a preset plus overrides or a manifest dict."""
    entries = {}
    if config_dict is not None:
        entries.update(config_dict)
        preset = entries.get("experiment", preset)
    elif preset is not None:
        for line_no, line in enumerate(_load_preset_text(preset).splitlines(), 1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{preset}.cfg line {line_no}: expected key = value")
            key, raw = (part.strip() for part in stripped.split("=", 1))
            entries[key] = raw
    else:
        raise ConfigError("either a preset name or a config dict is required")

    schema = SCHEMAS.get(preset)
    if schema is None:
        raise ConfigError(f"unknown experiment {preset!r}")
    for key, raw in (overrides or {}).items():
        if key == "experiment":
            raise ConfigError("the experiment key cannot be overridden")
        entries[key] = raw

    cfg = {}
    for key, raw in entries.items():
        if key not in schema:
            raise ConfigError(f"unknown config key {key!r} for preset {preset}")
        cfg[key] = _parse_value(key, schema[key], raw)
    missing = sorted(set(schema) - set(cfg))
    if missing:
        raise ConfigError(f"missing config keys: {missing}")
    if cfg["noise_fraction"] > 0 and cfg["seed"] < 0:
        raise ConfigError("a nonnegative seed is required when noise_fraction > 0")
    if cfg["field_format"] not in ("csv", "bin", "none"):
        raise ConfigError("field_format must be csv, bin, or none")
    return cfg


def integrator_config(cfg):
    return IntegratorConfig(
        scheme=cfg["integrator"],
        dt_init=cfg["int_dt"],
        rel_tol=cfg["int_rel_tol"],
        abs_tol=cfg["int_abs_tol"],
        dt_max=cfg["int_dt_max"],
    )


def observation_times(cfg, dt_obs=None):
    dt = cfg["dt_obs"] if dt_obs is None else dt_obs
    n = int(np.floor((cfg["da_end"] - cfg["da_start"]) / dt + 1e-9))
    return cfg["da_start"] + dt * np.arange(1, n + 1)


def error_times(cfg):
    n = int(np.floor((cfg["t_end"] - cfg["da_start"]) / cfg["eval_dt"] + 1e-9))
    return cfg["da_start"] + cfg["eval_dt"] * np.arange(0, n + 1)


def ks_sensor_layout(domain_length, num_sensors):
    """Equispaced sensors x_j = -L/2 + (j-1) L / r."""
    j = np.arange(num_sensors)
    return -0.5 * domain_length + j * domain_length / num_sensors


def ad_sensor_layout(box_length, box_height):
    """Deterministic 46-sensor scattered layout.

    A 12 x 4 staggered lattice spanning the box wall to wall (free-running
    error piles up near the walls, so sensors must reach them), minus the
    two lattice points nearest the box corners.
    """
    cols, rows = 12, 4
    zs = (np.arange(rows) + 0.5) * box_height / rows
    pts = []
    for r, z in enumerate(zs):
        xs = (np.arange(cols) + 0.25 + 0.5 * (r % 2)) * box_length / cols
        for x in xs:
            pts.append((x, z))
    pts = np.array(pts)
    corners = np.array(
        [[0.0, 0.0], [box_length, 0.0], [0.0, box_height], [box_length, box_height]]
    )
    corner_dist = np.min(
        np.linalg.norm(pts[:, None, :] - corners[None, :, :], axis=2), axis=1
    )
    drop = np.argsort(corner_dist, kind="stable")[:2]
    keep = np.setdiff1d(np.arange(len(pts)), drop)
    return pts[keep]


def compute_relative_error(u_ref, model, theta):
    """Discrete relative L2 error of the ansatz against a reference snapshot."""
    if len(u_ref.grid) == 1:
        pts = u_ref.grid[0]
        values = model.eval(pts, theta)
    else:
        x, z = u_ref.grid
        X, Z = np.meshgrid(x, z, indexing="ij")
        pts = np.column_stack([X.ravel(), Z.ravel()])
        values = model.eval(pts, theta).reshape(u_ref.values.shape)
    ref_norm = np.linalg.norm(u_ref.values)
    if ref_norm == 0:
        raise ZeroReferenceError("reference snapshot has zero norm")
    return float(np.linalg.norm(values - u_ref.values) / ref_norm)


@dataclass
class ExperimentContext:
    cfg: dict
    model: object
    theta0: np.ndarray
    dynamics: object  # CollocationGrid or callable rhs
    gamma: float
    obs_op: ObservationOperator
    dns: object  # DnsResult
    snapshots_by_time: dict
    evolve_cfg: IntegratorConfig
    error_times: np.ndarray
    obs_times: np.ndarray
    wall_times: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def snapshot_at(self, t):
        key = min(self.snapshots_by_time, key=lambda s: abs(s - t))
        if abs(key - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"no DNS snapshot at t={t}")
        return self.snapshots_by_time[key]

    def da_config(self, forecast_end=None, gamma_t=None):
        return DaConfig(
            delta=self.cfg["delta"],
            maxits=self.cfg["maxits"],
            gamma_t=self.cfg["gamma_t"] if gamma_t is None else gamma_t,
            da_window=(self.cfg["da_start"], self.cfg["da_end"]),
            forecast_end=self.cfg["t_end"] if forecast_end is None else forecast_end,
        )


def _dense_eval_times(cfg):
    # finer trajectory sampling for the wave-packet peak table
    n = int(np.floor((cfg["t_end"] - cfg["da_start"]) / 0.1 + 1e-9))
    dense = cfg["da_start"] + 0.1 * np.arange(n + 1)
    return np.unique(np.concatenate([dense, error_times(cfg)]))


def build_context(cfg):
    builder = {"nls": _build_nls, "ks": _build_ks, "ad": _build_ad}[cfg["experiment"]]
    return builder(cfg)


def _build_nls(cfg):
    model = NlsGaussian(domain_length=cfg["domain_length"])
    theta0 = np.array([cfg["A0"], cfg["L0"], cfg["V0"], cfg["phi0"]])
    n = cfg["modes"]
    length = cfg["domain_length"]
    x = -0.5 * length + (length / n) * np.arange(n)
    u0 = GridField((x,), model.eval(x, theta0), cfg["da_start"])

    err_t = error_times(cfg)
    obs_t = observation_times(cfg)
    save_t = np.unique(np.concatenate([err_t, obs_t]))
    t0 = time.perf_counter()
    dns = nls_dns(
        u0,
        (cfg["da_start"], cfg["t_end"]),
        DnsConfig(modes=(n,), dt=cfg["dns_dt"]),
        save_times=save_t,
        probe_points=[0.0],
    )
    wall = {"dns": time.perf_counter() - t0}

    op = ObservationOperator("pointwise-modulus", np.asarray(cfg["sensors"], dtype=float))
    return ExperimentContext(
        cfg=cfg,
        model=model,
        theta0=theta0,
        dynamics=lambda theta, t: nls_closed_form_rate(theta),
        gamma=cfg["gamma"],
        obs_op=op,
        dns=dns,
        snapshots_by_time={s.time: s for s in dns.snapshots},
        evolve_cfg=integrator_config(cfg),
        error_times=err_t,
        obs_times=obs_t,
        wall_times=wall,
    )


def ks_initial_condition(domain_length):
    """Multimode trigonometric profile rescaled to unit max amplitude."""

    def raw(x):
        out = np.sin(2.0 * np.pi * x / domain_length)
        for k in range(2, 5):
            out = out + np.sin(2.0 * k * np.pi * x / domain_length)
            out = out + np.cos(2.0 * k * np.pi * x / domain_length)
        return out

    dense = np.linspace(-0.5 * domain_length, 0.5 * domain_length, 100001)
    peak = np.max(np.abs(raw(dense)))
    return lambda x: raw(np.asarray(x, dtype=float)) / peak


def _build_ks(cfg):
    model = KsNetwork(
        n_nodes=cfg["n_nodes"],
        domain_length=cfg["domain_length"],
        weight_init_scale=cfg["fit_w_scale"],
    )
    u0 = ks_initial_condition(cfg["domain_length"])

    t0 = time.perf_counter()
    theta0 = fit_initial(
        model,
        u0,
        midpoint_rule(model.domain, cfg["fit_grid"]),
        cfg["fit_tol"],
        restarts=cfg["fit_restarts"],
        max_iter=cfg["fit_max_iter"],
        seed=cfg["fit_seed"],
    )
    wall = {"fit": time.perf_counter() - t0}

    n = cfg["modes"]
    length = cfg["domain_length"]
    x = -0.5 * length + (length / n) * np.arange(n)
    err_t = error_times(cfg)
    obs_t = observation_times(cfg)
    save_t = np.unique(np.concatenate([err_t, obs_t]))
    t0 = time.perf_counter()
    dns = ks_dns(
        GridField((x,), u0(x), cfg["da_start"]),
        (cfg["da_start"], cfg["t_end"]),
        DnsConfig(modes=(n,), dt=cfg["dns_dt"]),
        save_times=save_t,
    )
    wall["dns"] = time.perf_counter() - t0

    sensors = ks_sensor_layout(cfg["domain_length"], cfg["num_sensors"])
    if cfg["jitter_seed"] >= 0:
        sensors = jitter_sensors(sensors, length / n, length, cfg["jitter_seed"])
    op = ObservationOperator("pointwise-state", sensors)
    return ExperimentContext(
        cfg=cfg,
        model=model,
        theta0=theta0,
        dynamics=CollocationGrid(x.copy()),
        gamma=cfg["gamma"],
        obs_op=op,
        dns=dns,
        snapshots_by_time={s.time: s for s in dns.snapshots},
        evolve_cfg=integrator_config(cfg),
        error_times=err_t,
        obs_times=obs_t,
        wall_times=wall,
    )


def jitter_sensors(sensors, cell, domain_length, seed):
    """Move each sensor one grid cell left or right (seeded), wrapping periodically."""
    rng = np.random.default_rng(seed)
    step = cell * (2 * rng.integers(0, 2, len(sensors)) - 1)
    moved = sensors + step
    half = 0.5 * domain_length
    return ((moved + half) % domain_length) - half


def _build_ad(cfg):
    flow = GyreFlowConfig(
        m=cfg["gyre_m"],
        A_v=cfg["gyre_amp"],
        eps=cfg["gyre_eps"],
        omega=cfg["gyre_omega"],
        L=cfg["box_length"],
        H=cfg["box_height"],
    )
    model = AdNetwork(
        n_nodes=cfg["n_nodes"],
        flow=flow,
        kappa=cfg["kappa"],
        weight_init_scale=cfg["fit_w_scale"],
    )

    def u0(pts):
        pts = np.atleast_2d(pts)
        return (
            0.1
            * np.cos(np.pi * pts[:, 0] / flow.L)
            * np.sin(np.pi * pts[:, 1] / flow.H)
        )

    t0 = time.perf_counter()
    theta0 = fit_initial(
        model,
        u0,
        midpoint_rule(model.domain, (cfg["fit_nx"], cfg["fit_nz"])),
        cfg["fit_tol"],
        restarts=cfg["fit_restarts"],
        max_iter=cfg["fit_max_iter"],
        seed=cfg["fit_seed"],
    )
    wall = {"fit": time.perf_counter() - t0}

    nx, nz = cfg["modes_x"], cfg["modes_z"]
    x = flow.L / nx * np.arange(nx + 1)
    z = flow.H / nz * np.arange(nz + 1)
    X, Z = np.meshgrid(x, z, indexing="ij")
    u0_grid = u0(np.column_stack([X.ravel(), Z.ravel()])).reshape(nx + 1, nz + 1)

    err_t = error_times(cfg)
    obs_t = observation_times(cfg)
    save_t = np.unique(np.concatenate([err_t, obs_t]))
    t0 = time.perf_counter()
    dns = ad_dns(
        GridField((x, z), u0_grid, cfg["da_start"]),
        (cfg["da_start"], cfg["t_end"]),
        DnsConfig(modes=(nx, nz), dt=cfg["dns_dt"]),
        flow,
        cfg["kappa"],
        save_times=save_t,
    )
    wall["dns"] = time.perf_counter() - t0

    sensors = ad_sensor_layout(flow.L, flow.H)
    op = ObservationOperator("pointwise-state", sensors)
    return ExperimentContext(
        cfg=cfg,
        model=model,
        theta0=theta0,
        dynamics=CollocationGrid(
            uniform_grid(model.domain, (cfg["colloc_nx"], cfg["colloc_nz"]), cell_centered=True).points
        ),
        gamma=cfg["gamma"],
        obs_op=op,
        dns=dns,
        snapshots_by_time={s.time: s for s in dns.snapshots},
        evolve_cfg=integrator_config(cfg),
        error_times=err_t,
        obs_times=obs_t,
        notes={"bc_device": "even-x/odd-z symmetry extension on the doubled box"},
        wall_times=wall,
    )


def _rhs_for(ctx):
    from .core import make_sms_rhs

    return make_sms_rhs(ctx.model, ctx.dynamics, ctx.gamma)


def run_sms(ctx, eval_times=None, t_end=None):
    """Plain shape-morphing evolution, no assimilation."""
    t_end = ctx.cfg["t_end"] if t_end is None else t_end
    ev = ctx.error_times if eval_times is None else eval_times
    ev = ev[ev <= t_end + 1e-12]
    return integrate(
        _rhs_for(ctx), ctx.theta0, (ctx.cfg["da_start"], t_end), ctx.evolve_cfg, eval_times=ev
    )


def run_dasms(ctx, noise_fraction, seed, forecast_end=None, gamma_t=None, op=None, obs_times=None, eval_times=None):
    """Predictor-corrector run against observations sampled from the DNS."""
    op = ctx.obs_op if op is None else op
    obs_t = ctx.obs_times if obs_times is None else obs_times
    series = sample_observations(
        ctx.dns.snapshots,
        op,
        obs_t,
        NoiseSpec(fraction=noise_fraction, seed=seed, mode=ctx.cfg["noise_mode"]),
    )
    cfg_da = ctx.da_config(forecast_end=forecast_end, gamma_t=gamma_t)
    ev = ctx.error_times if eval_times is None else eval_times
    ev = ev[ev <= cfg_da.forecast_end + 1e-12]
    return da_sms_run(
        ctx.model,
        ctx.theta0,
        series,
        op,
        cfg_da,
        ctx.gamma,
        ctx.dynamics,
        ctx.evolve_cfg,
        eval_times=ev,
    )


def field_error_series(ctx, trajectory, times=None):
    """Relative L2 error against the DNS snapshot at each time."""
    times = ctx.error_times if times is None else times
    out = []
    for t in times:
        theta = trajectory.at(t)
        out.append(compute_relative_error(ctx.snapshot_at(t), ctx.model, theta))
    return np.asarray(out)


def model_snapshots(ctx, trajectory, times=None):
    """Ansatz sampled on the DNS grid, for field archives."""
    times = ctx.error_times if times is None else times
    snaps = []
    for t in times:
        ref = ctx.snapshot_at(t)
        theta = trajectory.at(t)
        if len(ref.grid) == 1:
            vals = ctx.model.eval(ref.grid[0], theta)
        else:
            x, z = ref.grid
            X, Z = np.meshgrid(x, z, indexing="ij")
            vals = ctx.model.eval(np.column_stack([X.ravel(), Z.ravel()]), theta).reshape(
                ref.values.shape
            )
        snaps.append(GridField(ref.grid, vals, t))
    return snaps


def _write_fields(cfg, out_dir, stem, snapshots):
    if cfg["field_format"] == "csv":
        io.write_field_csv(f"{out_dir}/{stem}.csv", snapshots)
    elif cfg["field_format"] == "bin":
        io.write_field_bin(f"{out_dir}/{stem}.bin", snapshots)


def peak_summary(times, amplitudes):
    idx = int(np.argmax(amplitudes))
    return float(times[idx]), float(amplitudes[idx])


def run_experiment(cfg, out_dir):
    """Full benchmark: DNS, SMS, clean and noisy DA-SMS, metrics, artifacts."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    started = time.perf_counter()
    ctx = build_context(cfg)
    _write_fields(cfg, out_dir, "dns", ctx.dns.snapshots)

    dense = _dense_eval_times(cfg) if cfg["experiment"] == "nls" else None

    t0 = time.perf_counter()
    sms_traj = run_sms(ctx, eval_times=dense)
    ctx.wall_times["sms"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    clean = run_dasms(ctx, 0.0, ctx.cfg["seed"], eval_times=dense)
    ctx.wall_times["dasms_clean"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    noisy = run_dasms(ctx, cfg["noise_fraction"], ctx.cfg["seed"], eval_times=dense)
    ctx.wall_times["dasms_noisy"] = time.perf_counter() - t0

    err_rows = []
    e_sms = field_error_series(ctx, sms_traj)
    e_clean = field_error_series(ctx, clean.trajectory)
    e_noisy = field_error_series(ctx, noisy.trajectory)
    for i, t in enumerate(ctx.error_times):
        err_rows.append((t, e_sms[i], e_clean[i], e_noisy[i]))
    io.write_csv(
        f"{out_dir}/errors.csv",
        ["t", "E_sms", "E_dasms_clean", "E_dasms_noisy"],
        err_rows,
    )
    io.write_corrections_csv(f"{out_dir}/corrections.csv", noisy.corrections)
    io.write_corrections_csv(f"{out_dir}/corrections_clean.csv", clean.corrections)

    _write_fields(cfg, out_dir, "sms", model_snapshots(ctx, sms_traj))
    _write_fields(cfg, out_dir, "dasms_clean", model_snapshots(ctx, clean.trajectory))
    _write_fields(cfg, out_dir, "dasms_noisy", model_snapshots(ctx, noisy.trajectory))

    summary = {
        "max_E_sms": float(np.max(e_sms)),
        "max_E_dasms_clean": float(np.max(e_clean)),
        "max_E_dasms_noisy": float(np.max(e_noisy)),
    }

    if cfg["experiment"] == "nls":
        # center-amplitude peak table: the focusing benchmark's headline numbers
        rows = []
        t_dns, a_dns = peak_summary(ctx.dns.probe_times, np.abs(ctx.dns.probe_values[:, 0]))
        rows.append(("dns", t_dns, a_dns))
        for name, traj in (("sms", sms_traj), ("dasms_clean", clean.trajectory), ("dasms_noisy", noisy.trajectory)):
            amps = np.array([np.abs(ctx.model.eval(np.array([0.0]), s))[0] for s in traj.states])
            t_pk, a_pk = peak_summary(traj.times, amps)
            rows.append((name, t_pk, a_pk))
        io.write_csv(f"{out_dir}/peaks.csv", ["method", "t_peak", "amplitude"], rows)
        summary["peaks"] = {r[0]: (r[1], r[2]) for r in rows}

    ctx.wall_times["total"] = time.perf_counter() - started
    manifest = {
        "preset": cfg["experiment"],
        "config": cfg,
        "sensor_coordinates": ctx.obs_op.locations.tolist(),
        "code_version": _package_version(),
        "wall_times": {k: round(v, 3) for k, v in ctx.wall_times.items()},
        "notes": ctx.notes,
    }
    io.write_manifest(f"{out_dir}/manifest.json", manifest)
    return summary


SWEEP_PARAMS = ("gamma_t", "dt_obs", "num_sensors", "sensor_jitter")


def run_sensitivity(cfg, param, values, out_dir=None, ctx=None):
    """Sweep one assimilation parameter; report errors at the end of the DA window.

    Sweeps run with clean observations so orderings are not noise-realization
    artifacts; pass a noisy config explicitly to study noise.  Returns rows
    (label, value, error) with an SMS baseline row first.
    """
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {param!r}; choose from {SWEEP_PARAMS}")
    if ctx is None:
        ctx = build_context(cfg)
    t_da_end = cfg["da_end"]
    eval_sub = ctx.error_times[ctx.error_times <= t_da_end + 1e-12]

    sms_traj = run_sms(ctx, t_end=t_da_end)
    baseline = compute_relative_error(ctx.snapshot_at(t_da_end), ctx.model, sms_traj.final)
    rows = [("sms_baseline", float("nan"), baseline)]

    for value in values:
        kwargs = dict(
            noise_fraction=0.0,
            seed=cfg["seed"],
            forecast_end=t_da_end,
            eval_times=eval_sub,
        )
        if param == "gamma_t":
            kwargs["gamma_t"] = float(value)
        elif param == "dt_obs":
            kwargs["obs_times"] = observation_times(cfg, dt_obs=float(value))
        elif param == "num_sensors":
            sensors = ks_sensor_layout(cfg["domain_length"], int(value))
            kwargs["op"] = ObservationOperator("pointwise-state", sensors)
        elif param == "sensor_jitter":
            cell = cfg["domain_length"] / cfg["modes"]
            sensors = jitter_sensors(
                ks_sensor_layout(cfg["domain_length"], cfg["num_sensors"]),
                cell,
                cfg["domain_length"],
                int(value),
            )
            kwargs["op"] = ObservationOperator("pointwise-state", sensors)
        result = run_dasms(ctx, **kwargs)
        err = compute_relative_error(ctx.snapshot_at(t_da_end), ctx.model, result.theta_final)
        rows.append((param, float(value), err))

    if out_dir is not None:
        import os

        os.makedirs(out_dir, exist_ok=True)
        io.write_csv(
            f"{out_dir}/sweep.csv",
            ["param", "value", "rel_err_end_da"],
            [(r[0], r[1], r[2]) for r in rows],
        )
    return rows


def _package_version():
    from . import __version__

    return __version__
