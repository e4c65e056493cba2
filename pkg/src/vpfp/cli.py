"""Command line front end.

    vpfp <experiment> [--config FILE] [--set key=value ...] [--out DIR]
         [--threads N] [--seed N]

Exit codes: 0 all embedded assertions passed, 1 assertion failure,
2 usage error, 3 numerical error.
"""

import argparse
import sys

from .config import ExperimentSpec, parse_config_file, resolve_threads
from .errors import ConfigurationError, VpfpError
from .experiments import EXPERIMENTS, run_experiment

EXIT_OK = 0
EXIT_ASSERT = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def build_parser():
    p = argparse.ArgumentParser(
        prog="vpfp",
        description="Spectral VPFP laboratory: linear theory, nonlinear runs, echo analysis.",
    )
    p.add_argument("experiment", help=f"one of: {', '.join(sorted(EXPERIMENTS))}")
    p.add_argument("--config", help="key=value file with dotted parameter names")
    p.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a single parameter (repeatable)",
    )
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--threads", type=int, default=None, help="sweep parallelism")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled scans")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK

    overrides = {}
    try:
        if args.config:
            overrides.update(parse_config_file(args.config))
        for item in args.set:
            if "=" not in item:
                raise ConfigurationError(f"--set needs KEY=VALUE, got {item!r}")
            key, val = item.split("=", 1)
            overrides[key.strip()] = val.strip()
        spec = ExperimentSpec(
            name=args.experiment,
            overrides=overrides,
            out_dir=args.out,
            seed=args.seed,
            threads=resolve_threads(args.threads),
        )
        if spec.name not in EXPERIMENTS:
            print(f"vpfp: unknown experiment {spec.name!r}", file=sys.stderr)
            print(f"known experiments: {', '.join(sorted(EXPERIMENTS))}", file=sys.stderr)
            return EXIT_USAGE
        summary, failures = run_experiment(spec)
    except ConfigurationError as exc:
        print(f"vpfp: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VpfpError as exc:
        print(f"vpfp: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    if failures:
        for f in failures:
            print(f"ASSERTION FAILED: {f}", file=sys.stderr)
        return EXIT_ASSERT
    print(f"{args.experiment}: ok (artifacts in {args.out})")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
