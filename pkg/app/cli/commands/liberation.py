import argparse
import logging

import numpy as np

from app.cli.commands import common_options, model_option
from app.cli.loaders import load_model
from app.core import liberation
from app.core.schemas import FisherComparison, ResidualReport, Target

logger = logging.getLogger(__name__)

STREAM = 5


def _candidate(loaded, X, args) -> liberation.ConjugateCandidate:
    if loaded.spec.J:
        return liberation.ConjugateCandidate(J=loaded.role("J"), scope=Target(args.scope))
    logger.info(f"No 'J' in {loaded.source}; solving over words of length ≤ {args.max_length}")
    return liberation.solve_conjugate(loaded.model, X, Target(args.scope), args.max_length)


def run_conjugate(args: argparse.Namespace, rng: np.random.Generator) -> ResidualReport:
    loaded = load_model(args.context)
    X = loaded.role("X")
    cand = _candidate(loaded, X, args)
    verify = liberation.verify_conjugate_cumulant_form if args.cumulant_form else liberation.verify_conjugate
    report = verify(loaded.model, cand, X, args.order or 3, args.tol, args.coeff_draws, rng)
    if report.verdict.value == "pass":
        report.notes.append(f"Φ* = {liberation.fisher_info(loaded.model, cand, tol=max(report.tolerance, 1e-6)):.12g}")
    return report


def run_gradient(args: argparse.Namespace, rng: np.random.Generator) -> ResidualReport:
    loaded = load_model(args.context)
    A1, A2 = loaded.role("A1"), loaded.role("A2")
    if loaded.spec.J:
        (j,) = loaded.role("J")[:1]
    else:
        j = liberation.solve_gradient(loaded.model, A1, A2, args.max_length, Target(args.scope))
    return liberation.verify_liberation_gradient(loaded.model, j, A1, A2, Target(args.scope), args.order or 3,
                                                 args.tol, args.coeff_draws, rng)


def run_commutator(args: argparse.Namespace, rng: np.random.Generator) -> ResidualReport:
    loaded = load_model(args.context)
    X = loaded.role("X")
    cand = _candidate(loaded, X, args)
    projection = liberation.commutator_projection(loaded.model, X, cand)
    tol = args.tol if args.tol is not None else 1e-8
    report = ResidualReport(equation="commutator_projection", max_order=args.max_length, tolerance=tol)
    report.record("l2_norm", liberation.l2_norm(loaded.model, projection))
    return report


def run_fisher(args: argparse.Namespace, rng: np.random.Generator) -> FisherComparison:
    loaded = load_model(args.context)
    return liberation.fisher_info_pair(loaded.model, loaded.role("X"), args.max_length, args.tol,
                                       args.coeff_draws or 3, rng)


def register(subparsers) -> None:
    parser = subparsers.add_parser("liberation", help="conjugate variables and liberation gradients")
    actions = parser.add_subparsers(dest="action", required=True)
    common = common_options()

    handlers = {
        "conjugate": (run_conjugate, "conjugate-variable equations for J"),
        "gradient": (run_gradient, "liberation-gradient equations for (A1 : A2)"),
        "commutator": (run_commutator, "E_D'(Σ[J_i, X_i])·c⁻¹·dim D"),
        "fisher": (run_fisher, "Φ*(X : D) against Φ*(X : B)"),
    }
    for name, (handler, text) in handlers.items():
        action = actions.add_parser(name, parents=[common], help=text)
        model_option(action)
        action.add_argument("--scope", choices=[t.value for t in Target],
                            default="D" if name == "gradient" else "B")
        action.add_argument("--max-length", type=int, default=2 if name == "gradient" else 1,
                            help="word length of the least-squares span")
        action.add_argument("--coeff-draws", type=int, default=None)
        if name == "conjugate":
            action.add_argument("--cumulant-form", action="store_true")
        action.set_defaults(handler=handler)
