import argparse
import logging

import numpy as np

from app.cli.commands import as_matrix, common_options, model_option, resolve
from app.cli.loaders import load_elements, load_model
from app.core.algebra import AlgebraContext
from app.core.schemas import InvariantReport, Target, ValueReport

logger = logging.getLogger(__name__)

STREAM = 1


def run_check(args: argparse.Namespace, rng: np.random.Generator) -> InvariantReport:
    loaded = load_model(args.context)
    if not isinstance(loaded.model, AlgebraContext):
        raise ValueError("algebra check needs a matrix context (kind 'matrix')")
    return loaded.model.check_invariants(samples=args.samples, rng=rng, tol=args.tol)


def run_expect(args: argparse.Namespace, rng: np.random.Generator) -> ValueReport:
    loaded = load_model(args.context)
    if args.elements:
        load_elements(args.elements, loaded)
    model = loaded.model
    (x,) = resolve(loaded, [args.element])
    if args.target == "commutant":
        if not isinstance(model, AlgebraContext):
            raise ValueError("E_D' is reported for matrix contexts only")
        return ValueReport.from_matrix("E_commutant", model.cond_exp_commutant(x).matrix, arguments=[args.element])
    target = Target(args.target)
    value = as_matrix(model, model.expect(x, target))
    return ValueReport.from_matrix(f"E_{target.value}", value, target=target, arguments=[args.element])


def register(subparsers) -> None:
    parser = subparsers.add_parser("algebra", help="conditional expectations on M_d ⊗ M_k")
    actions = parser.add_subparsers(dest="action", required=True)
    common = common_options()

    check = actions.add_parser("check", parents=[common], help="invariant suite of a context")
    model_option(check)
    check.add_argument("--samples", type=int, default=100)
    check.set_defaults(handler=run_check)

    expect = actions.add_parser("expect", parents=[common], help="E_B, E_D or E_D' of one element")
    model_option(expect)
    expect.add_argument("--elements", default=None, help="extra {name: matrix} file")
    expect.add_argument("--element", required=True)
    expect.add_argument("--target", choices=["B", "D", "commutant"], default="B")
    expect.set_defaults(handler=run_expect)
