"""
Fock-model commands. Words are space-separated letters: `S<j>` for ℓ_j*,
`G<p>.<q>` for the generator Λ_p with q pending stars, `B<i>` for the i-th
matrix of the --coeffs file.
"""
import argparse
import re
from typing import List

import numpy as np

from app.cli.commands import common_options, model_option, parse_indices
from app.cli.loaders import load_coefficients, load_model
from app.core.fock import CanonicalModel, Coeff, Gen, Star, Word, WordError, canonical_moment, reduce_word
from app.core.schemas import ValueReport

STREAM = 4

_LETTER = re.compile(r"^(?:S(\d+)|G(\d+)\.(\d+)|B(\d+))$")


def parse_word(text: str, coefficients: List[np.ndarray]) -> Word:
    letters = []
    for token in text.split():
        match = _LETTER.match(token)
        if match is None:
            raise WordError(f"Unknown letter {token!r}; expected S<j>, G<p>.<q> or B<i>")
        star, p, q, b = match.groups()
        if star is not None:
            letters.append(Star(int(star)))
        elif p is not None:
            letters.append(Gen(int(p), int(q)))
        else:
            if int(b) >= len(coefficients):
                raise WordError(f"Coefficient B{b} is not defined ({len(coefficients)} given)")
            letters.append(Coeff(coefficients[int(b)]))
    return Word.of(*letters)


def _spec(path: str):
    loaded = load_model(path)
    if not isinstance(loaded.model, CanonicalModel):
        raise ValueError("fock commands need a model of kind 'fock'")
    return loaded.model.spec


def run_moment(args: argparse.Namespace, rng: np.random.Generator) -> ValueReport:
    spec = _spec(args.context)
    indices = [int(i) for i in parse_indices(args.indices)]
    coefficients = load_coefficients(args.coeffs) if args.coeffs else None
    value = canonical_moment(spec, indices, coefficients)
    return ValueReport.from_matrix("moment", value, arguments=[f"Y{i}" for i in indices])


def run_reduce(args: argparse.Namespace, rng: np.random.Generator) -> ValueReport:
    spec = _spec(args.context)
    coefficients = load_coefficients(args.coeffs) if args.coeffs else []
    reduced = reduce_word(parse_word(args.word, coefficients), spec, args.strategy)
    if isinstance(reduced, Word):
        raise WordError(f"The word does not reduce completely ({len(reduced)} letters left)")
    return ValueReport.from_matrix("reduced_word", reduced, arguments=args.word.split())


def register(subparsers) -> None:
    parser = subparsers.add_parser("fock", help="canonical Fock-space model")
    actions = parser.add_subparsers(dest="action", required=True)
    common = common_options()

    moment = actions.add_parser("moment", parents=[common], help="E_B(b_0 Y_i1 b_1 ⋯ Y_im b_m)")
    model_option(moment)
    moment.add_argument("--indices", required=True, help="comma-separated variable indices")
    moment.add_argument("--coeffs", default=None, help="JSON list of the m+1 coefficients")
    moment.set_defaults(handler=run_moment)

    reduce = actions.add_parser("reduce", parents=[common], help="reduce a word to its B-value")
    model_option(reduce)
    reduce.add_argument("--word", required=True)
    reduce.add_argument("--coeffs", default=None)
    reduce.add_argument("--strategy", choices=["leftmost", "rightmost"], default="leftmost")
    reduce.set_defaults(handler=run_reduce)
