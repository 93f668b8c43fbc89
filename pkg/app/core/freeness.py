"""
Freeness tests with amalgamation, evaluated on concrete models.

Every test works with any model understood by `CumulantEngine` that also
provides cond_exp_D, random_coefficient, norm and trace (both
`AlgebraContext` and `CanonicalModel` do). Verdicts are scoped to the
tested order and tolerance.
"""
import itertools
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.config import config
from app.core.algebra import SubalgebraError, SubalgebraSpec
from app.core.cumulants import CumulantEngine, CumulantQuery, product
from app.core.fock import CanonicalModel, CumulantSeriesSpec, lift_series
from app.core.nc_core import catalan
from app.core.schemas import (FreenessReport, SemicircleVerdict, Target, Verdict, Witness,
                              verdict_for)

logger = logging.getLogger(__name__)


def _defaults(max_order, tol, coeff_draws, rng):
    return (
        max_order or 4,
        config.TOL if tol is None else tol,
        config.COEFF_DRAWS if coeff_draws is None else coeff_draws,
        rng if rng is not None else np.random.default_rng(config.SEED),
    )


def _check_tower(model: Any) -> None:
    subalgebra = getattr(model, "subalgebra", None)
    if subalgebra is None or subalgebra.size != model.d:
        raise SubalgebraError("The model carries no subalgebra D ⊂ B")


def _record(report: FreenessReport, family: Optional[str], order: int, residual: float,
            labels: Sequence[str], witness_residual: List[float]) -> None:
    report.per_order[order] = max(report.per_order.get(order, 0.0), residual)
    if family is not None:
        bucket = report.families.setdefault(family, {})
        bucket[order] = max(bucket.get(order, 0.0), residual)
    if residual > witness_residual[0]:
        witness_residual[0] = residual
        report.witness = Witness(order=order, arguments=list(labels), residual=residual)


def _finish(report: FreenessReport) -> FreenessReport:
    if report.verdict != Verdict.HYPOTHESIS_VIOLATED:
        report.verdict = verdict_for(report.max_residual, report.tolerance)
    mark = "✅" if report.verdict == Verdict.PASS else "⚠️"
    logger.info(f"{mark} {report.test}: max residual {report.max_residual:.3e} "
                f"up to order {report.max_order} → {report.verdict.value}")
    return report


def _coefficient_draws(model: Any, order: int, target: Target, draws: int,
                       rng: np.random.Generator) -> List[Tuple[Any, ...]]:
    if order == 1:
        return [()]
    return [tuple(model.random_coefficient(target, rng) for _ in range(order - 1)) for _ in range(draws)]


def test_mixed_cumulants(model: Any, S1: Sequence[Any], S2: Sequence[Any], target: Target = Target.B,
                         max_order: Optional[int] = None, tol: Optional[float] = None,
                         coeff_draws: Optional[int] = None,
                         rng: Optional[np.random.Generator] = None) -> FreenessReport:
    """
    Mixed cumulants of S1 ∪ S2 (at least one argument from each set) with
    random target-algebra coefficients must vanish.

    Raises:
        ValueError: if S1 or S2 is empty, or max_order < 2
    """
    if not S1 or not S2:
        raise ValueError("Both element sets must be non-empty")
    max_order, tol, coeff_draws, rng = _defaults(max_order, tol, coeff_draws, rng)
    if max_order < 2:
        raise ValueError("Mixed cumulants start at order 2")
    engine = CumulantEngine(model, max_order=max_order)
    elements = list(S1) + list(S2)
    labels = [f"S1[{i}]" for i in range(len(S1))] + [f"S2[{i}]" for i in range(len(S2))]
    first = set(range(len(S1)))
    report = FreenessReport(test="mixed", target=target, max_order=max_order, tolerance=tol)
    worst = [-1.0]
    for order in range(2, max_order + 1):
        report.per_order[order] = 0.0
        for indices in itertools.product(range(len(elements)), repeat=order):
            chosen = set(indices)
            if chosen <= first or not chosen & first:
                continue
            for coefficients in _coefficient_draws(model, order, target, coeff_draws, rng):
                value = engine.query(CumulantQuery([elements[i] for i in indices], coefficients, target))
                residual = model.norm(value)
                _record(report, None, order, residual, [labels[i] for i in indices], worst)
        logger.debug(f"mixed order {order}: {report.per_order[order]:.3e}")
    return _finish(report)


def test_factorization(model: Any, X: Sequence[Any], max_order: Optional[int] = None,
                       tol: Optional[float] = None, coeff_draws: Optional[int] = None,
                       rng: Optional[np.random.Generator] = None) -> FreenessReport:
    """
    k_B = F∘k_B∘F and k_B(b_1,…) = k_D(F(b_1),…) for random b_i ∈ B.

    Families "F∘k∘F" and "k_D" are reported separately; both must stay
    below tol.

    Raises:
        SubalgebraError: if the model has no D ⊂ B
    """
    _check_tower(model)
    if not X:
        raise ValueError("No elements to test")
    max_order, tol, coeff_draws, rng = _defaults(max_order, tol, coeff_draws, rng)
    engine = CumulantEngine(model, max_order=max_order)
    F = model.cond_exp_D
    labels = [f"X[{i}]" for i in range(len(X))]
    report = FreenessReport(test="factorization", target=Target.D, max_order=max_order, tolerance=tol)
    worst = [-1.0]
    for order in range(1, max_order + 1):
        report.per_order[order] = 0.0
        for indices in itertools.product(range(len(X)), repeat=order):
            variables = [X[i] for i in indices]
            for coefficients in _coefficient_draws(model, order, Target.B, coeff_draws, rng):
                projected = tuple(F(b) for b in coefficients)
                k_b = engine.query(CumulantQuery(variables, coefficients, Target.B))
                k_b_projected = engine.query(CumulantQuery(variables, projected, Target.B))
                k_d = engine.query(CumulantQuery(variables, projected, Target.D))
                arguments = [labels[i] for i in indices]
                _record(report, "F∘k∘F", order, model.norm(k_b - F(k_b_projected)), arguments, worst)
                _record(report, "k_D", order, model.norm(k_b - k_d), arguments, worst)
    return _finish(report)


def test_restriction(model: Any, X: Sequence[Any], max_order: Optional[int] = None,
                     tol: Optional[float] = None, coeff_draws: Optional[int] = None,
                     rng: Optional[np.random.Generator] = None) -> FreenessReport:
    """
    On D-arguments: if every k_B value lies in D (hypothesis), then
    k_D = k_B. A violated hypothesis is reported, the conclusion is not asserted.
    """
    _check_tower(model)
    max_order, tol, coeff_draws, rng = _defaults(max_order, tol, coeff_draws, rng)
    engine = CumulantEngine(model, max_order=max_order)
    F = model.cond_exp_D
    labels = [f"X[{i}]" for i in range(len(X))]
    report = FreenessReport(test="restriction", target=Target.D, max_order=max_order, tolerance=tol)
    hypothesis: Dict[int, float] = {}
    worst = [-1.0]
    for order in range(1, max_order + 1):
        report.per_order[order] = 0.0
        hypothesis[order] = 0.0
        for indices in itertools.product(range(len(X)), repeat=order):
            variables = [X[i] for i in indices]
            for coefficients in _coefficient_draws(model, order, Target.D, coeff_draws, rng):
                k_b = engine.query(CumulantQuery(variables, coefficients, Target.B))
                k_d = engine.query(CumulantQuery(variables, coefficients, Target.D))
                hypothesis[order] = max(hypothesis[order], model.norm(k_b - F(k_b)))
                _record(report, "conclusion", order, model.norm(k_d - k_b), [labels[i] for i in indices], worst)
    report.families["hypothesis"] = hypothesis
    report.hypothesis_holds = max(hypothesis.values(), default=0.0) <= tol
    if not report.hypothesis_holds:
        report.verdict = Verdict.HYPOTHESIS_VIOLATED
        report.notes.append("k_B on D-arguments leaves D; k_D = k_B is not asserted")
        logger.warning(f"⚠️ restriction hypothesis violated: {max(hypothesis.values()):.3e}")
    return _finish(report)


def test_r_cyclic(model: Any, entries: Sequence[Sequence[Any]], max_order: Optional[int] = None,
                  tol: Optional[float] = None) -> FreenessReport:
    """
    Scalar cumulants κ_n(x_{i_1 j_1}, …, x_{i_n j_n}) vanish unless
    j_1 = i_2, …, j_n = i_1.

    Raises:
        ValueError: for a non-square array or a non-scalar D
    """
    size = len(entries)
    if size == 0 or any(len(row) != size for row in entries):
        raise ValueError("R-cyclicity needs a square array of entries")
    if getattr(model, "dimension_D", 1) != 1:
        raise ValueError("R-cyclicity is tested with a scalar-valued expectation (D = ℂ)")
    max_order, tol, _, _ = _defaults(max_order, tol, 1, None)
    engine = CumulantEngine(model, max_order=max_order)
    pairs = [(i, j) for i in range(size) for j in range(size)]
    report = FreenessReport(test="rcyclic", target=Target.D, max_order=max_order, tolerance=tol)
    worst = [-1.0]
    for order in range(1, max_order + 1):
        report.per_order[order] = 0.0
        for pattern in itertools.product(pairs, repeat=order):
            cyclic = all(pattern[r][1] == pattern[(r + 1) % order][0] for r in range(order))
            if cyclic:
                continue
            value = engine.cumulant([entries[i][j] for i, j in pattern], Target.D)
            _record(report, None, order, model.norm(value), [f"x[{i}][{j}]" for i, j in pattern], worst)
    return _finish(report)


def semicircle_moments(variance: float, max_order: int) -> List[float]:
    """m_1..m_max of the centered semicircle: m_{2k} = Catalan(k)·variance^k."""
    return [0.0 if k % 2 else catalan(k // 2) * variance ** (k // 2) for k in range(1, max_order + 1)]


def test_semicircularity_scalar(moments: Sequence[float], tol: Optional[float] = None) -> SemicircleVerdict:
    """
    Compare τ(X^1), τ(X^2), … with the variance-matched semicircle.

    Raises:
        ValueError: if fewer than four moments are given or τ(X²) ≤ 0
    """
    tol = config.TOL if tol is None else tol
    values = [float(np.real(m)) for m in moments]
    if len(values) < 4:
        raise ValueError("Semicircularity needs moments up to order 4")
    variance = values[1]
    if variance <= 0:
        raise ValueError(f"Degenerate distribution: τ(X²) = {variance}")
    expected = semicircle_moments(variance, len(values))
    deviations = [abs(a - b) for a, b in zip(values, expected)]
    worst = max(deviations)
    return SemicircleVerdict(variance=variance, expected=expected, deviations=deviations,
                             max_deviation=worst, tolerance=tol, verdict=verdict_for(worst, tol))


def test_semicircularity_b_valued(model: Any, X: Any, max_order: int = 6,
                                  tol: Optional[float] = None, coeff_draws: Optional[int] = None,
                                  rng: Optional[np.random.Generator] = None) -> FreenessReport:
    """
    For B-semicircular X the scalar law is semicircular iff E_B(X²) ∈ ℂ.

    hypothesis_holds records B-semicircularity (k_n = 0 for n ≠ 2); the
    verdict passes when scalarity of E_B(X²) and scalar semicircularity of
    τ(X^k), k ≤ max_order, agree.
    """
    if getattr(model, "dimension_D", 1) != 1:
        raise ValueError("Scalar semicircularity is tested with D = ℂ")
    max_order, tol, coeff_draws, rng = _defaults(max_order, tol, coeff_draws, rng)
    engine = CumulantEngine(model, max_order=max_order)
    report = FreenessReport(test="semicircularity", target=Target.B, max_order=max_order, tolerance=tol)
    shape: Dict[int, float] = {}
    for order in range(1, max_order + 1):
        if order == 2:
            continue
        shape[order] = 0.0
        for coefficients in _coefficient_draws(model, order, Target.B, coeff_draws, rng):
            value = engine.query(CumulantQuery([X] * order, coefficients, Target.B))
            shape[order] = max(shape[order], model.norm(value))
    report.families["non_quadratic_cumulants"] = shape
    report.hypothesis_holds = max(shape.values(), default=0.0) <= tol

    second = engine.moment([X, X], Target.B)
    scalar_part = model.trace(X @ X)
    variance_gap = model.norm(second - model.cond_exp_D(second))
    moments = [model.trace(product([X] * k)) for k in range(1, max_order + 1)]
    scalar = test_semicircularity_scalar(moments, tol) if np.real(scalar_part) > 0 else None
    report.families["E(X²) − τ(X²)1"] = {2: variance_gap}
    if scalar is not None:
        report.families["scalar_moments"] = {k: dev for k, dev in enumerate(scalar.deviations, start=1)}
    is_scalar = variance_gap <= tol
    is_semicircle = scalar is not None and scalar.verdict == Verdict.PASS
    report.notes.append(f"E(X²) scalar: {is_scalar}; scalar law semicircular: {is_semicircle}")
    if not report.hypothesis_holds:
        report.verdict = Verdict.HYPOTHESIS_VIOLATED
        report.notes.append("X is not B-semicircular at the tested orders")
    elif is_scalar != is_semicircle:
        report.verdict = Verdict.FAIL
    else:
        report.verdict = Verdict.PASS
    mark = "✅" if report.verdict == Verdict.PASS else "⚠️"
    logger.info(f"{mark} semicircularity: {report.notes[0]} → {report.verdict.value}")
    return report


def test_free_over_tower(d_series: CumulantSeriesSpec, chain: Sequence[SubalgebraSpec],
                         max_order: Optional[int] = None, tol: Optional[float] = None,
                         coeff_draws: Optional[int] = None,
                         rng: Optional[np.random.Generator] = None) -> FreenessReport:
    """
    Build the model free from C over D and from B over C along
    chain = (D, C, …) and test factorization over the bottom algebra D.
    """
    if not chain:
        raise ValueError("The tower needs at least one subalgebra")
    model = CanonicalModel(lift_series(d_series, chain), subalgebra=chain[0])
    report = test_factorization(model, model.variables(), max_order, tol, coeff_draws, rng)
    report.test = "tower"
    report.notes.append(f"tower of {len(chain)} subalgebras over blocks {chain[0].blocks}")
    return report
