import argparse

import numpy as np

from app.cli.commands import common_options, model_option, parse_indices
from app.cli.loaders import load_model
from app.core import freeness
from app.core.schemas import Target

STREAM = 3


def run_mixed(args: argparse.Namespace, rng: np.random.Generator):
    loaded = load_model(args.context)
    return freeness.test_mixed_cumulants(loaded.model, loaded.role("S1"), loaded.role("S2"), Target(args.target),
                                         args.order, args.tol, args.coeff_draws, rng)


def run_factorization(args: argparse.Namespace, rng: np.random.Generator):
    loaded = load_model(args.context)
    return freeness.test_factorization(loaded.model, loaded.role("X"), args.order, args.tol, args.coeff_draws, rng)


def run_restriction(args: argparse.Namespace, rng: np.random.Generator):
    loaded = load_model(args.context)
    return freeness.test_restriction(loaded.model, loaded.role("X"), args.order, args.tol, args.coeff_draws, rng)


def run_rcyclic(args: argparse.Namespace, rng: np.random.Generator):
    loaded = load_model(args.context)
    return freeness.test_r_cyclic(loaded.model, loaded.grid(), args.order, args.tol)


def run_semicircle(args: argparse.Namespace, rng: np.random.Generator):
    if args.moments:
        return freeness.test_semicircularity_scalar([float(m) for m in parse_indices(args.moments)], args.tol)
    if not args.context:
        raise ValueError("freeness semicircle needs --moments or a model file")
    loaded = load_model(args.context)
    X = loaded.role("X")
    if len(X) != 1:
        raise ValueError(f"freeness semicircle takes exactly one element in 'X', got {len(X)}")
    return freeness.test_semicircularity_b_valued(loaded.model, X[0], args.order or 6, args.tol,
                                                  args.coeff_draws, rng)


def register(subparsers) -> None:
    parser = subparsers.add_parser("freeness", help="freeness with amalgamation")
    actions = parser.add_subparsers(dest="action", required=True)
    common = common_options()

    handlers = {
        "mixed": (run_mixed, "mixed cumulants of S1 ∪ S2 vanish"),
        "factorization": (run_factorization, "k_B = F∘k_B∘F on X"),
        "restriction": (run_restriction, "k_D = k_B on D-arguments when k_B is D-valued"),
        "rcyclic": (run_rcyclic, "R-cyclic vanishing pattern of 'entries'"),
        "semicircle": (run_semicircle, "semicircularity of a moment list or of X"),
    }
    for name, (handler, text) in handlers.items():
        action = actions.add_parser(name, parents=[common], help=text)
        model_option(action, required=name != "semicircle")
        action.add_argument("--coeff-draws", type=int, default=None)
        if name == "mixed":
            action.add_argument("--target", choices=[t.value for t in Target], default="B")
        if name == "semicircle":
            action.add_argument("--moments", default=None, help="comma-separated m_1, m_2, …")
        action.set_defaults(handler=handler)
