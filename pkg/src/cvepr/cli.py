"""Command-line scenario runner.

Exit codes: 0 success, 2 validation error, 3 numerical or oracle failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import config as cfgmod
from .criterion import infer_direct_squeezing
from .errors import ConfigValidationError, CvEprError, InvalidArgumentError, UnphysicalInputError
from .runs import (
    run_epr_spectrum,
    run_phasematch,
    run_squeeze_spectrum,
    run_validate,
    write_outputs,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3

RUNNERS = {
    "squeeze-spectrum": (run_squeeze_spectrum, "paper-fig2"),
    "epr-spectrum": (run_epr_spectrum, "paper-fig3"),
    "phasematch": (run_phasematch, "phasematch-12mm"),
    "validate": (run_validate, "paper-fig3"),
}


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < cfgmod.SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario TOML file")
    common.add_argument(
        "--preset", choices=cfgmod.PRESETS, help="built-in scenario (used when --config is absent)"
    )
    common.add_argument("--out", help="output directory (overrides output.directory)")
    common.add_argument("--seed", type=_u64, help="64-bit RNG seed (overrides the config)")

    parser = argparse.ArgumentParser(
        prog="cvepr", description="Broadband EPR-beam experiment simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        sub.add_parser(name, parents=[common])
    inf = sub.add_parser("infer", help="squeezing before a known loss")
    inf.add_argument("--measured-db", type=float, required=True)
    inf.add_argument("--eta", type=float, required=True)
    return parser


def _load(args, default_preset: str):
    if args.config:
        cfg = cfgmod.load(args.config)
    else:
        cfg = cfgmod.load_preset(args.preset or default_preset)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.out:
        cfg = replace(cfg, output_dir=args.out)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "infer":
            value = infer_direct_squeezing(args.measured_db, args.eta)
            print(f"measured_db = {args.measured_db:.6g}")
            print(f"eta = {args.eta:.6g}")
            print(f"direct_squeezing_db = {value:.6g}")
            return EXIT_OK
        runner, default_preset = RUNNERS[args.command]
        cfg = _load(args, default_preset)
        result = runner(cfg)
    except (ConfigValidationError, InvalidArgumentError, UnphysicalInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CvEprError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_outputs(result, cfg.output_dir)
    sys.stdout.write(result.summary_text())
    return EXIT_OK if result.passed else EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
