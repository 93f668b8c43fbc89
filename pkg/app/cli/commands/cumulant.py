import argparse

import numpy as np

from app.cli.commands import as_matrix, common_options, model_option, parse_indices, resolve
from app.cli.loaders import load_coefficients, load_elements, load_model
from app.core.cumulants import CumulantEngine, CumulantQuery
from app.core.schemas import Target, ValueReport

STREAM = 2


def run_cumulant(args: argparse.Namespace, rng: np.random.Generator) -> ValueReport:
    loaded = load_model(args.context)
    if args.elements:
        load_elements(args.elements, loaded)
    model = loaded.model
    names = parse_indices(args.indices)
    variables = resolve(loaded, names)
    if args.coeffs:
        coefficients = [model.constant(b) for b in load_coefficients(args.coeffs)]
    else:
        coefficients = [model.one() for _ in range(len(variables) - 1)]
    target = Target(args.target)
    engine = CumulantEngine(model, max_order=args.order)
    value = engine.query(CumulantQuery(variables, coefficients, target))
    return ValueReport.from_matrix("cumulant", as_matrix(model, value), target=target, arguments=names)


def register(subparsers) -> None:
    parser = subparsers.add_parser("cumulant", parents=[common_options()],
                                   help="operator-valued cumulant of named elements")
    model_option(parser)
    parser.add_argument("--elements", default=None, help="extra {name: matrix} file")
    parser.add_argument("--indices", required=True, help="comma-separated element names or positions")
    parser.add_argument("--target", choices=[t.value for t in Target], default="B")
    parser.add_argument("--coeffs", default=None, help="JSON list of the k-1 interleaved coefficients")
    parser.set_defaults(handler=run_cumulant, action="value")
