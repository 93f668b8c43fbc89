"""
Subcommand groups. Each module exposes STREAM (its index in the seed split)
and register(subparsers); leaf parsers set `handler`, a callable
(args, rng) -> result model.
"""
import argparse
from typing import Any, List, Sequence

import numpy as np

from app.cli.reports.writers import FORMATS


def common_options() -> argparse.ArgumentParser:
    """Global flags, accepted after any subcommand."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--seed", type=int, default=None, help="master seed (default OPFREE_SEED)")
    parser.add_argument("--tol", type=float, default=None, help="tolerance (default OPFREE_TOL)")
    parser.add_argument("--order", type=int, default=None, help="maximum order")
    parser.add_argument("--out", default=None, help="output file (default under OPFREE_OUTPUT_DIR)")
    parser.add_argument("--format", choices=FORMATS, default="json", dest="fmt")
    parser.add_argument("--log-level", default=None)
    return parser


def model_option(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--context", "--model", "--spec", dest="context", required=required,
                        help="model file (matrix context or fock spec)")


def parse_indices(text: str) -> List[str]:
    return [token.strip() for token in text.split(",") if token.strip()]


def resolve(loaded, tokens: Sequence[str]) -> List[Any]:
    """Element names, or integer positions among the named elements in file order."""
    named = [name for name in loaded.elements if name != "1"]
    names = []
    for token in tokens:
        if token.isdigit() and token not in loaded.elements:
            position = int(token)
            if position >= len(named):
                raise ValueError(f"Element index {position} out of range; {len(named)} elements defined")
            names.append(named[position])
        else:
            names.append(token)
    return loaded.pick(names)


def as_matrix(model, value) -> np.ndarray:
    """d×d representative of a B-valued result."""
    if isinstance(value, np.ndarray):
        return value
    return model.compress_B(value)
