"""
Command-line entry point: python -m app.cli.main <group> [<action>] [flags].

Exit codes: 0 pass, 1 fail, 2 invalid input (missing file, bad JSON/CSV,
schema or argument errors).
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from app.cli.commands import algebra, bandmatrix, cumulant, fock, freeness, liberation, nc
from app.cli.reports import write_result
from app.config import config
from app.core.schemas import BandVerdict, HaarConjugationReport, Verdict

logger = logging.getLogger(__name__)

COMMANDS = (nc, algebra, cumulant, freeness, fock, liberation, bandmatrix)
STREAMS = {module.__name__.rsplit(".", 1)[-1]: module.STREAM for module in COMMANDS}


class RunConfig(BaseModel):
    """Resolved invocation, recorded next to every result."""
    command: str
    action: str
    seed: int
    stream: int
    tol: Optional[float] = None
    order: Optional[int] = None
    out: Optional[str] = None
    format: str = "json"
    inputs: Dict[str, Any] = Field(default_factory=dict)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opfree", description="Operator-valued free probability toolkit")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in COMMANDS:
        module.register(subparsers)
    return parser


def module_rng(seed: int, command: str) -> np.random.Generator:
    """The stream of one subcommand group: SeedSequence([seed, index])."""
    return np.random.default_rng(np.random.SeedSequence([seed, STREAMS[command]]))


def verdict_of(result: BaseModel) -> Verdict:
    if isinstance(result, BandVerdict):
        return Verdict.PASS if result.consistent else Verdict.FAIL
    if isinstance(result, HaarConjugationReport):
        return Verdict.PASS if result.powers_decreasing and result.cumulants_decreasing else Verdict.FAIL
    return getattr(result, "verdict", Verdict.PASS)


_FLAGS = {"command", "action", "handler", "writes_by_default", "seed", "tol", "order", "out", "fmt", "log_level"}


def run_config(args: argparse.Namespace) -> RunConfig:
    inputs = {key: value for key, value in sorted(vars(args).items()) if key not in _FLAGS}
    return RunConfig(command=args.command, action=args.action, seed=args.seed, stream=STREAMS[args.command],
                     tol=args.tol, order=args.order, out=args.out, format=args.fmt, inputs=inputs)


def output_path(args: argparse.Namespace) -> Path:
    if args.out:
        return Path(args.out)
    return config.OUTPUT_PATH / f"{args.command}_{args.action}.{args.fmt}"


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=(args.log_level or config.LOG_LEVEL).upper())
    if args.seed is None:
        args.seed = config.SEED
    try:
        result = args.handler(args, module_rng(args.seed, args.command))
        verdict = verdict_of(result)
        if args.out or getattr(args, "writes_by_default", True):
            run = run_config(args).model_dump(mode="json")
            path = write_result(result, output_path(args), args.fmt, run)
            print(f"{verdict.value}: {path}")
    except (FileNotFoundError, json.JSONDecodeError, ValidationError, ValueError) as error:
        logger.error(f"{args.command} {args.action} failed: {error}", exc_info=True)
        first_line = str(error).splitlines()[0] if str(error) else type(error).__name__
        print(f"error: {first_line}", file=sys.stderr)
        return 2
    return verdict.exit_code


if __name__ == "__main__":
    sys.exit(main())
