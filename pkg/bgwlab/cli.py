"""
Command-line front end.

Artifacts (CSV, JSON, sample dumps) go to stdout or ``--output``; progress and
diagnostics go to stderr through logging. Exit codes: 0 success, 1 failed
check or empty conditioning, 2 usage or configuration error.
"""

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .config import LAWS, MODES, SAMPLERS, JobConfig, Settings
from .exact import exact_law
from .exceptions import (
    BgwLabError,
    BoundExceeded,
    ConfigError,
    SpecParseError,
)
from .models import ScaledRational
from .offspring import parse_offspring
from .rng import ALGORITHM, RngStream
from .samplers import draw_batch, format_sample_dump
from .suites import ALIASES, DEFAULT_SEED, SUITES, run_suite
from .trees import TreeFilter, enumerate_trees
from .verify import METRICS, sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

ENUMERATE_COLUMNS = ("tree", "vertices", "leaves", "internal", "max_outdegree")

EPILOG = f"""
enumerate prints CSV with columns {", ".join(ENUMERATE_COLUMNS)}; tree is
the canonical step sequence (outdegree minus one in lexicographic order).
sweep prints CSV with columns n, value and, for Monte-Carlo metrics,
substream, after '#' comment lines holding the metric, the config hash, the
seeds and the thresholds. Metrics: {", ".join(sorted(METRICS))}.
Suites: {", ".join(f"{num}={name}" for num, name in ALIASES.items())}.
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bgwlab",
        description="Exact laws and samplers for conditioned Galton-Watson trees.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("enumerate", help="list all plane trees with n vertices")
    p.add_argument("--n", type=int, required=True)
    p.add_argument(
        "--filter",
        default="none",
        help="none, leaves=k, internal=k, no_unary, or a comma list of these",
    )
    p.add_argument("--output")

    p = sub.add_parser("exact", help="exact law as JSON")
    _add_conditioning(p)
    p.add_argument("--law", choices=LAWS, default="reduced")
    p.add_argument("--output")

    p = sub.add_parser("sample", help="draw conditioned trees")
    _add_conditioning(p)
    p.add_argument("--sampler", choices=SAMPLERS, default="exact")
    p.add_argument("--N", dest="samples", type=int, default=1, help="sample count")
    p.add_argument("--seed", type=int, required=True, help="64-bit unsigned seed")
    p.add_argument("--cap", type=int, default=1_000_000, help="vertex cap (bgw)")
    p.add_argument("--max-tries", type=int, default=1_000_000)
    p.add_argument("--output")

    p = sub.add_parser("sweep", help="evaluate a metric along an n grid")
    p.add_argument("--config", required=True, help="JSON job file")

    p = sub.add_parser("verify", help="run a named acceptance suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--output")
    return parser


def _add_conditioning(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dist", required=True, help="e.g. geometric:p=1/2")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mode", choices=MODES, default="leaves")


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        stream=sys.stderr,
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
    )
    logging.getLogger("bgwlab").setLevel(level)


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
        logger.info("wrote %s", output)
    else:
        sys.stdout.write(text)


def cmd_enumerate(args: argparse.Namespace) -> int:
    config = JobConfig("enumerate", n=args.n, filter=args.filter, output=args.output)
    assert config.n is not None
    flt = TreeFilter.parse(config.filter)
    trees = enumerate_trees(config.n, flt, Settings.from_env().max_enum)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ENUMERATE_COLUMNS)
    for t in trees:
        writer.writerow((t.key, len(t), t.leaves, t.internal, max(t.outdegrees)))
    logger.info("%d trees with n=%d (%s)", len(trees), config.n, config.filter)
    _emit(buf.getvalue(), config.output)
    return EXIT_OK


def cmd_exact(args: argparse.Namespace) -> int:
    config = JobConfig(
        "exact",
        dist=args.dist,
        n=args.n,
        k=args.k,
        mode=args.mode,
        law=args.law,
        output=args.output,
    )
    assert config.dist is not None and config.n is not None and config.k is not None
    d = parse_offspring(config.dist)
    for warning in d.validate_for(config.mode):
        logger.warning("%s", warning)
    result = exact_law(d, config.n, config.k, config.mode, config.law)
    payload: Dict[str, Any] = {
        "dist": d.spec(),
        "n": config.n,
        "k": config.k,
        "mode": config.mode,
        "law": config.law,
    }
    if isinstance(result, ScaledRational):
        payload["probability"] = result.to_dict()
    else:
        payload["atoms"] = result.to_list()
    _emit(json.dumps(payload, indent=2) + "\n", config.output)
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    config = JobConfig(
        "sample",
        dist=args.dist,
        n=args.n,
        k=args.k,
        mode=args.mode,
        sampler=args.sampler,
        samples=args.samples,
        seed=args.seed,
        output=args.output,
        cap=args.cap,
        max_tries=args.max_tries,
    )
    assert config.dist is not None and config.n is not None
    assert config.k is not None and config.seed is not None
    d = parse_offspring(config.dist)
    stream = RngStream(config.seed)
    samples, report = draw_batch(
        config.sampler,
        d,
        config.n,
        config.k,
        config.mode,
        stream,
        config.samples,
        cap=config.cap,
        max_tries=config.max_tries,
    )
    header = {
        "dist": d.spec(),
        "n": config.n,
        "k": config.k,
        "mode": config.mode,
        "sampler": config.sampler,
        "seed": config.seed,
        "rng": ALGORITHM,
        "config_hash": config.config_hash(),
    }
    logger.info("sampler report: %s", json.dumps(report.to_dict()))
    _emit(format_sample_dump(samples, header), config.output)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = JobConfig.from_file(args.config)
    if config.subcommand != "sweep":
        raise ConfigError("config file is not a sweep job", "subcommand")
    assert config.metric is not None
    try:
        table = sweep(config.metric, config.n_grid, config)
    except ValueError as exc:
        raise ConfigError(str(exc), "metric") from exc
    _emit(table.to_csv(), config.output)
    failures = table.failures()
    for failure in failures:
        logger.error("%s", failure)
    return EXIT_FAILED if failures else EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    name = ALIASES.get(args.suite, args.suite)
    if name not in SUITES:
        raise ConfigError(
            f"Unknown suite {args.suite!r}; expected one of {', '.join(SUITES)}",
            "suite",
        )
    result = run_suite(name, args.seed)
    _emit(json.dumps(result.to_dict(), indent=2) + "\n", args.output)
    for check in result.checks:
        if not check.passed:
            logger.error("%s: %s failed (%s)", name, check.name, check.detail)
    return EXIT_OK if result.passed else EXIT_FAILED


COMMANDS = {
    "enumerate": cmd_enumerate,
    "exact": cmd_exact,
    "sample": cmd_sample,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse ``argv`` and run one subcommand.

    Returns:
        The process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    configure_logging(args.verbose, args.quiet)
    try:
        return COMMANDS[args.subcommand](args)
    except (ConfigError, SpecParseError, BoundExceeded) as exc:
        print(f"bgwlab: error: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    except BgwLabError as exc:
        print(f"bgwlab: {exc.message}", file=sys.stderr)
        return EXIT_FAILED
    except ValueError as exc:
        print(f"bgwlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
