import os

import numpy as np
import pytest

from smsda.cli import main
from smsda.dns import GridField
from smsda.errors import ConfigError, ZeroReferenceError
from smsda.experiments import (
    ad_sensor_layout,
    compute_relative_error,
    ks_sensor_layout,
    observation_times,
    resolve_config,
)
from smsda import NlsGaussian


def test_presets_resolve():
    for preset in ("nls", "ks", "ad"):
        cfg = resolve_config(preset)
        assert cfg["experiment"] == preset
        assert cfg["noise_fraction"] == 0.05


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        resolve_config("ks", overrides={"bogus": "1"})


def test_bad_value_rejected():
    with pytest.raises(ConfigError):
        resolve_config("ks", overrides={"maxits": "three"})


def test_experiment_key_locked():
    with pytest.raises(ConfigError):
        resolve_config("ks", overrides={"experiment": "nls"})


def test_missing_keys_rejected():
    with pytest.raises(ConfigError):
        resolve_config(config_dict={"experiment": "ks", "seed": 1})


def test_noise_requires_seed():
    with pytest.raises(ConfigError):
        resolve_config("ks", overrides={"seed": "-1"})
    resolve_config("ks", overrides={"seed": "-1", "noise_fraction": "0"})


def test_observation_times_spacing():
    cfg = resolve_config("ks")
    times = observation_times(cfg)
    assert times[0] == 2.0 and times[-1] == 30.0 and len(times) == 15
    times4 = observation_times(cfg, dt_obs=4.0)
    assert times4[-1] == 28.0


def test_ks_sensor_layout_matches_formula():
    sensors = ks_sensor_layout(22.0, 10)
    np.testing.assert_allclose(sensors, -11.0 + 2.2 * np.arange(10))


def test_ad_sensor_layout_count_and_interior():
    pts = ad_sensor_layout(4.0, 1.0)
    assert pts.shape == (46, 2)
    assert np.all((pts[:, 0] > 0) & (pts[:, 0] < 4))
    assert np.all((pts[:, 1] > 0) & (pts[:, 1] < 1))
    # deterministic
    np.testing.assert_array_equal(pts, ad_sensor_layout(4.0, 1.0))


def test_compute_relative_error_identities():
    model = NlsGaussian()
    theta = np.array([0.2, 20.0, 0.0, 0.0])
    x = np.linspace(-50, 50, 201)
    vals = model.eval(x, theta)
    assert compute_relative_error(GridField((x,), vals, 0.0), model, theta) == 0.0
    # model twice the reference: E = ||2u - u|| / ||u|| = 1
    assert compute_relative_error(GridField((x,), vals / 2.0, 0.0), model, theta) == pytest.approx(1.0)
    zero_model_theta = np.array([0.0, 20.0, 0.0, 0.0])
    assert compute_relative_error(GridField((x,), vals, 0.0), model, zero_model_theta) == pytest.approx(1.0)
    with pytest.raises(ZeroReferenceError):
        compute_relative_error(GridField((x,), np.zeros_like(vals), 0.0), model, theta)


def test_cli_config_error_exit_code(capsys):
    assert main(["run", "--preset", "ks", "--set", "bogus=1", "--out", "/tmp/nope"]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_requires_preset_or_manifest():
    assert main(["run", "--out", "/tmp/nope"]) == 2


def test_cli_run_and_manifest_rerun(tmp_path, capsys):
    out1 = tmp_path / "a"
    # shortened wave-packet run keeps this test quick
    args = [
        "run", "--preset", "nls",
        "--set", "t_end=6", "--set", "da_end=4", "--set", "eval_dt=1.0",
        "--out", str(out1),
    ]
    assert main(args) == 0
    for name in ("errors.csv", "corrections.csv", "peaks.csv", "manifest.json", "dns.bin"):
        assert (out1 / name).exists(), name
    out2 = tmp_path / "b"
    assert main(["run", "--manifest", str(out1 / "manifest.json"), "--out", str(out2)]) == 0
    assert (out1 / "errors.csv").read_bytes() == (out2 / "errors.csv").read_bytes()


def test_cli_seed_flag_changes_noise(tmp_path):
    outs = []
    for seed in ("7", "8"):
        out = tmp_path / f"s{seed}"
        main([
            "run", "--preset", "nls", "--seed", seed,
            "--set", "t_end=4", "--set", "da_end=2", "--set", "eval_dt=1.0",
            "--out", str(out),
        ])
        outs.append((out / "errors.csv").read_bytes())
    assert outs[0] != outs[1]
