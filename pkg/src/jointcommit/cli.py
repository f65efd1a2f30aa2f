"""Command-line entry point.

Subcommands map to experiment kinds plus `reproduce-figures`; every config key
is exposed as a flag, and --config loads a YAML file (or a previous run's
manifest) that the flags then override.  On failure a single JSON error line
goes to stderr and the exit code is nonzero (2 for configuration problems).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .harness import (
    OUTPUT_DIR_ENV,
    KINDS,
    ConfigError,
    ExperimentConfig,
    load_config,
    reproduce_figures,
    run_config,
)


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _str_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="YAML config file or a manifest JSON to re-run")
    p.add_argument("--b", type=_float_list, metavar="LIST",
                   help="benefit values, comma separated")
    p.add_argument("--ca", dest="c_a", type=_float_list, metavar="LIST",
                   help="arrangement cost values, comma separated")
    p.add_argument("--epsilon", type=_float_list, metavar="LIST",
                   help="perception error probabilities")
    p.add_argument("--regime", type=_str_list, metavar="LIST",
                   help="prediction regimes: short, long or infinite")
    p.add_argument("--n", dest="N", type=int, help="population size")
    p.add_argument("--turns", type=int, help="turns per evolutionary run")
    p.add_argument("--mu", type=float, help="mutation probability per turn")
    p.add_argument("--s", type=float, help="imitation strength")
    p.add_argument("--replicates", type=int, help="runs per parameter point")
    p.add_argument("--seed", type=int, help="seed base; run seeds are seed + index")
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./results)")
    p.add_argument("--rounds", type=int, help="rounds per reputation simulation")
    p.add_argument("--count", type=int, help="compositions to sample")
    p.add_argument("--count-no-redemption", dest="count_no_redemption", type=int,
                   help="extra compositions without redemption to sample")
    p.add_argument("--min-observers", dest="min_observers", type=int)
    p.add_argument("--stride", dest="snapshot_stride", type=int,
                   help="turns between recorded snapshots")
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.add_argument("--label", help="output file prefix")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jointcommit",
        description="Joint-commitment Prisoner's Dilemma experiments",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        _add_common(p)
    p = sub.add_parser("reproduce-figures",
                       help="desk-scale CSVs for the standard figure set")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--full-scale", action="store_true",
                   help="full replicate counts (roughly an overnight run)")
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
        cfg.kind = args.command
    else:
        cfg = ExperimentConfig(kind=args.command)
    for field_name in ("b", "c_a", "epsilon", "regime", "N", "turns", "mu", "s",
                       "replicates", "seed", "out", "rounds", "count",
                       "count_no_redemption", "min_observers", "snapshot_stride",
                       "workers", "label"):
        value = getattr(args, field_name, None)
        if value is not None:
            setattr(cfg, field_name, value)
    return cfg


def _fail(kind: str, exc: Exception, code: int) -> int:
    payload = {"error": kind, "message": str(exc)}
    if isinstance(exc, ConfigError):
        payload["field"] = exc.field
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "reproduce-figures":
            from .harness import _default_out
            out = args.out or _default_out()
            results = reproduce_figures(out, full_scale=args.full_scale,
                                        workers=args.workers, seed=args.seed)
            for name, res in results.items():
                for path in res.outputs:
                    print(f"{name}: {path}")
            return 0
        cfg = _config_from_args(args)
        result = run_config(cfg)
        for path in result.outputs:
            print(path)
        print(f"manifest: {result.manifest}")
        return 0
    except ConfigError as e:
        return _fail("config", e, 2)
    except (OSError, RuntimeError, ValueError) as e:
        return _fail("runtime", e, 1)


if __name__ == "__main__":
    sys.exit(main())
