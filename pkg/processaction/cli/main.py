"""Command-line entry point.

Exit codes:

====  ==========================================
0     success
1     any other processaction error
2     invalid configuration (:class:`ConfigError`)
3     missing or stale artifact (:class:`MissingArtifact`)
4     incompatible alphabets (:class:`AlphabetMismatch`)
====  ==========================================
"""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from typing import Optional

from processaction import __version__
from processaction.exceptions import (
    AlphabetMismatch,
    ConfigError,
    MissingArtifact,
    ProcessActionError,
)

from . import commands
from .config import PipelineConfig, load_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_MISSING = 3
EXIT_ALPHABET = 4


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser of the ``processaction`` command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", help="path of the JSON pipeline configuration")
    common.add_argument(
        "--seed-override", type=int, default=None, help="replace every seed of the configuration"
    )
    common.add_argument("--out", "-o", default=None, help="output file or directory")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", "-v", action="store_true", help="log debug messages")
    verbosity.add_argument("--quiet", "-q", action="store_true", help="log warnings only")

    parser = argparse.ArgumentParser(
        prog="processaction",
        description="Mine an MDP from an event log and recommend the next activity.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="generate a synthetic event log")
    sub.add_parser("train", parents=[common], help="train one policy per scaling function")
    rec = sub.add_parser("recommend", parents=[common], help="recommend next activities")
    rec.add_argument("prefixes", help="event log with the ongoing cases")
    rec.add_argument("--policy", default=None, help="name of the policy, e.g. pi_step")
    sub.add_parser("eval-sim", parents=[common], help="evaluate the policies by simulation")
    sub.add_parser("eval-log", parents=[common], help="evaluate the policies on the test log")
    sub.add_parser("silhouette", parents=[common], help="report the silhouette per k")
    return parser


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True
    )


def run(args: argparse.Namespace) -> int:
    """Run a parsed command and return its exit code."""
    try:
        cfg = load_config(args.config) if args.config else PipelineConfig()
        if args.seed_override is not None:
            cfg = cfg.with_seed(args.seed_override)
        if args.command == "generate":
            print(commands.cmd_generate(cfg, args.out))
        elif args.command == "train":
            manifest = commands.cmd_train(cfg, args.out)
            print(json.dumps({"policies": manifest["policies"]}))
        elif args.command == "recommend":
            report = commands.cmd_recommend(cfg, args.prefixes, args.policy, args.out)
            print(json.dumps(report["recommendations"], indent=2, sort_keys=True))
        elif args.command == "eval-sim":
            print(commands.cmd_eval_sim(cfg, args.out).summary().to_string(index=False))
        elif args.command == "eval-log":
            table = commands.cmd_eval_log(cfg, args.out).optimal_trace_table()
            print(table.to_string(index=False))
        elif args.command == "silhouette":
            print(commands.cmd_silhouette(cfg, args.out).to_string(index=False))
    except ConfigError as e:
        logger.error("Invalid configuration: %s", e)
        return EXIT_CONFIG
    except MissingArtifact as e:
        logger.error("Missing artifact: %s", e)
        return EXIT_MISSING
    except AlphabetMismatch as e:
        logger.error("Alphabet mismatch: %s", e)
        return EXIT_ALPHABET
    except ProcessActionError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_ERROR
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse the command line and run the command."""
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose, args.quiet)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
