"""
Writes one JSON artifact per reference experiment into
$OPFREE_OUTPUT_DIR/experiments:

    python -m app.scripts.reproduce_experiments [--seed N]
"""
import argparse
import asyncio
import logging
from typing import Awaitable, Callable, Dict, Union

import numpy as np
from pydantic import BaseModel

from app.cli.reports import write_result
from app.config import config
from app.core import freeness, liberation, randmat
from app.core.algebra import AlgebraContext, SubalgebraSpec
from app.core.fock import CanonicalModel, MultilinearMap, construct_free_model, semicircular_spec, spec_from_tables
from app.core.nc_core import catalan, enumerate_nc
from app.core.schemas import ResidualReport, Target

logger = logging.getLogger(__name__)

Experiment = Callable[[np.random.Generator], Union[BaseModel, Awaitable[BaseModel]]]


def _diagonal_free_model() -> CanonicalModel:
    """Two semicirculars in M_2, free from M_2 over the diagonal, with η(b) = E_D(b)."""
    diagonal = SubalgebraSpec.diagonal(2)
    covariance = {(0, 0): diagonal.compress, (1, 1): lambda b: 2 * diagonal.compress(b)}
    series = construct_free_model(semicircular_spec(2, covariance), diagonal)
    return CanonicalModel(series, diagonal)


def _unit(i: int, j: int) -> np.ndarray:
    e = np.zeros((2, 2), dtype=complex)
    e[i, j] = 1.0
    return e


def _mixing_model(subalgebra: SubalgebraSpec) -> CanonicalModel:
    """One D-semicircular in M_2 with η(b) = diag(2b₁₁ + b₂₂, b₁₁ + 2b₂₂); it has a conjugate variable."""
    eta = MultilinearMap(terms=[(2 * _unit(0, 0), _unit(0, 0)), (_unit(0, 1), _unit(1, 0)),
                                (_unit(1, 0), _unit(0, 1)), (2 * _unit(1, 1), _unit(1, 1))])
    series = construct_free_model(spec_from_tables(2, 1, 6, {(0, 0): eta}), subalgebra)
    return CanonicalModel(series, subalgebra)


def nc_counts(rng: np.random.Generator) -> ResidualReport:
    report = ResidualReport(equation="|NC(n)| = Catalan(n)", max_order=9, tolerance=0.0)
    for n in range(2, 10):
        report.record(f"n={n}", abs(len(enumerate_nc(n)) - catalan(n)))
    return report


def algebra_invariants(rng: np.random.Generator):
    ctx = AlgebraContext(3, 2, SubalgebraSpec.from_multiplicities([1, 2]))
    return ctx.check_invariants(samples=50, rng=rng)


def free_factorization(rng: np.random.Generator):
    model = _diagonal_free_model()
    return freeness.test_factorization(model, model.variables(), max_order=4, coeff_draws=5, rng=rng)


def r_cyclic_diagonal(rng: np.random.Generator):
    model = CanonicalModel(semicircular_spec(1, {(0, 0): lambda b: b, (1, 1): lambda b: b}))
    y0, y1 = model.variables()
    return freeness.test_r_cyclic(model, [[y0, model.zero()], [model.zero(), y1]], max_order=4)


def semicircular_conjugate(rng: np.random.Generator):
    model = CanonicalModel(semicircular_spec(1, {(0, 0): lambda b: b}))
    X = model.variables()
    cand = liberation.ConjugateCandidate(J=list(X))
    report = liberation.verify_conjugate(model, cand, X, max_m=4, tol=1e-9, rng=rng)
    report.notes.append(f"Φ* = {liberation.fisher_info(model, cand):.12g}")
    return report


def free_pair_gradient(rng: np.random.Generator):
    model = CanonicalModel(semicircular_spec(1, {(0, 0): lambda b: b, (1, 1): lambda b: b}))
    y0, y1 = model.variables()
    return liberation.verify_liberation_gradient(model, model.zero(), [y0], [y1], Target.D, max_m=3,
                                                 tol=1e-9, rng=rng)


def commutator_free_over_d(rng: np.random.Generator) -> ResidualReport:
    report = ResidualReport(equation="commutator_projection", max_order=1, tolerance=1e-8)
    for name, subalgebra in (("diagonal", SubalgebraSpec.diagonal(2)), ("full", SubalgebraSpec.full(2))):
        model = _mixing_model(subalgebra)
        X = model.variables()
        cand = liberation.solve_conjugate(model, X, Target.B, max_length=1)
        report.record(f"l2_norm|D={name}", liberation.l2_norm(model, liberation.commutator_projection(model, X, cand)))
    return report


def fisher_over_d(rng: np.random.Generator):
    model = _mixing_model(SubalgebraSpec.diagonal(2))
    return liberation.fisher_info_pair(model, model.variables(), max_length=1, rng=rng)


def band_verdict(name: str) -> Experiment:
    profiles = {
        "constant": randmat.VarianceProfile.constant,
        "x+y": randmat.VarianceProfile.sum_profile,
        "circulant": randmat.VarianceProfile.circulant,
    }
    return lambda rng: randmat.band_semicircle_verdict(profiles[name](), order=8)


async def band_simulation(rng: np.random.Generator):
    seed = int(rng.integers(2 ** 63))
    return await randmat.simulate_band(randmat.VarianceProfile.constant(), n=512, trials=8, seed=seed,
                                       semicircle_variance=1.0)


async def band_x_plus_y_simulation(rng: np.random.Generator) -> ResidualReport:
    profile = randmat.VarianceProfile.sum_profile()
    histogram = await randmat.simulate_band(profile, n=1024, trials=20, seed=int(rng.integers(2 ** 63)))
    return randmat.monte_carlo_check(histogram, profile, order=6)



def haar_conjugation(rng: np.random.Generator):
    return randmat.haar_conjugation_experiment(2, [8, 32, 128], trials=20, rng=rng)


EXPERIMENTS: Dict[str, Experiment] = {
    "nc_counts": nc_counts,
    "algebra_invariants": algebra_invariants,
    "free_factorization": free_factorization,
    "r_cyclic_diagonal": r_cyclic_diagonal,
    "semicircular_conjugate": semicircular_conjugate,
    "free_pair_gradient": free_pair_gradient,
    "commutator_free_over_d": commutator_free_over_d,
    "fisher_over_d": fisher_over_d,
    "band_constant": band_verdict("constant"),
    "band_x_plus_y": band_verdict("x+y"),
    "band_circulant": band_verdict("circulant"),
    "band_simulation": band_simulation,
    "haar_conjugation": haar_conjugation,
    "band_x_plus_y_simulation": band_x_plus_y_simulation,
}


async def reproduce(seed: int) -> Dict[str, str]:
    out_dir = config.OUTPUT_PATH / "experiments"
    written = {}
    for index, (name, experiment) in enumerate(EXPERIMENTS.items()):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 100 + index]))
        result = experiment(rng)
        if asyncio.iscoroutine(result):
            result = await result
        path = write_result(result, out_dir / f"{name}.json", "json", {"experiment": name, "seed": seed})
        written[name] = str(path)
    logger.info(f"✅ {len(written)} experiments written to {out_dir}")
    return written


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Reproduce the reference experiments")
    parser.add_argument("--seed", type=int, default=config.SEED)
    args = parser.parse_args()
    logging.basicConfig(level=config.LOG_LEVEL)
    asyncio.run(reproduce(args.seed))
