import argparse
import asyncio

import numpy as np

from app.cli.commands import common_options, parse_indices
from app.cli.loaders import load_profile
from app.core import randmat
from app.core.schemas import BandVerdict, HaarConjugationReport, HistogramResult, ValueReport

STREAM = 6


def _profile_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--profile", required=True, help="g×g CSV grid or builtin:<constant|x+y|circulant>")


def run_simulate(args: argparse.Namespace, rng: np.random.Generator) -> HistogramResult:
    profile = load_profile(args.profile)
    rows = profile.row_integrals()
    variance = float(rows.mean()) if np.ptp(rows) <= 1e-9 else None
    # trial seeds derive from the module stream
    seed = int(rng.integers(2 ** 63))
    return asyncio.run(randmat.simulate_band(profile, args.n, args.trials, seed, bins=args.bins,
                                             workers=args.workers, semicircle_variance=variance))


def run_limit(args: argparse.Namespace, rng: np.random.Generator) -> ValueReport:
    profile = load_profile(args.profile)
    moments = randmat.limit_moments_band(profile, args.order or 8)
    return ValueReport.from_matrix("limit_moments", [moments], arguments=[profile.name])


def run_verdict(args: argparse.Namespace, rng: np.random.Generator) -> BandVerdict:
    profile = load_profile(args.profile)
    return randmat.band_semicircle_verdict(profile, args.order or 8, args.tol_row, args.tol)


def run_haar(args: argparse.Namespace, rng: np.random.Generator) -> HaarConjugationReport:
    ks = [int(k) for k in parse_indices(args.ks)]
    return randmat.haar_conjugation_experiment(args.d, ks, args.trials, rng, seed=args.seed)


def register(subparsers) -> None:
    parser = subparsers.add_parser("bandmatrix", help="band matrices and block-Haar conjugation")
    actions = parser.add_subparsers(dest="action", required=True)
    common = common_options()

    simulate = actions.add_parser("simulate", parents=[common], help="Monte-Carlo eigenvalue histogram")
    _profile_option(simulate)
    simulate.add_argument("--n", type=int, required=True)
    simulate.add_argument("--trials", type=int, default=10)
    simulate.add_argument("--bins", type=int, default=50)
    simulate.add_argument("--workers", type=int, default=None)
    simulate.set_defaults(handler=run_simulate)

    limit = actions.add_parser("limit", parents=[common], help="limit moments m_0..m_order")
    _profile_option(limit)
    limit.set_defaults(handler=run_limit)

    verdict = actions.add_parser("verdict", parents=[common], help="constant rows against semicircularity")
    _profile_option(verdict)
    verdict.add_argument("--tol-row", type=float, default=1e-9)
    verdict.set_defaults(handler=run_verdict)

    haar = actions.add_parser("haar", parents=[common], help="block-Haar conjugation over diag(M_d)")
    haar.add_argument("--d", type=int, default=2)
    haar.add_argument("--ks", default="8,32,128")
    haar.add_argument("--trials", type=int, default=20)
    haar.set_defaults(handler=run_haar)
