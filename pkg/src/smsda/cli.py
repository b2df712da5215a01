"""Command-line experiment runner.

    smsda run --preset {nls|ks|ad} [--set key=value]... [--seed N] [--out DIR]
    smsda run --manifest PATH [--out DIR]
    smsda sweep --preset ks --param gamma_t --values 5e-4,1e-3,2e-3 [--out DIR]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import sys

from .errors import ConfigError, SmsdaError
from .experiments import PRESETS, SWEEP_PARAMS, resolve_config, run_experiment, run_sensitivity
from .io import read_manifest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _parse_overrides(pairs, seed):
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    if seed is not None:
        overrides["seed"] = str(seed)
    return overrides


def build_parser():
    parser = argparse.ArgumentParser(prog="smsda", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment preset")
    run_p.add_argument("--preset", choices=PRESETS)
    run_p.add_argument("--manifest", help="re-run from a previously written manifest")
    run_p.add_argument("--set", action="append", metavar="KEY=VALUE", dest="sets")
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--out", default="out")

    sweep_p = sub.add_parser("sweep", help="sweep one assimilation parameter")
    sweep_p.add_argument("--preset", choices=PRESETS, required=True)
    sweep_p.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    sweep_p.add_argument("--values", required=True, help="comma-separated sweep values")
    sweep_p.add_argument("--set", action="append", metavar="KEY=VALUE", dest="sets")
    sweep_p.add_argument("--seed", type=int)
    sweep_p.add_argument("--out", default="out")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        overrides = _parse_overrides(args.sets, args.seed)
        if args.command == "run":
            if args.manifest:
                cfg = resolve_config(config_dict=read_manifest(args.manifest)["config"], overrides=overrides)
            elif args.preset:
                cfg = resolve_config(preset=args.preset, overrides=overrides)
            else:
                raise ConfigError("run requires --preset or --manifest")
            summary = run_experiment(cfg, args.out)
            print(f"wrote artifacts to {args.out}")
            for key, value in summary.items():
                print(f"  {key}: {value}")
        else:
            cfg = resolve_config(preset=args.preset, overrides=overrides)
            values = [v for v in args.values.split(",") if v.strip()]
            rows = run_sensitivity(cfg, args.param, values, out_dir=args.out)
            for label, value, err in rows:
                print(f"  {label} {value}: rel err {err:.6g}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SmsdaError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
