"""
Conjugate variables, Fisher information and liberation gradients.

The module verifies candidates against their defining equations. The
least-squares solvers are oracles over a truncated word span; a candidate
that fails verification at order m only means none was found at that order.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from app.config import config
from app.core.algebra import normalized_trace
from app.core.cumulants import CumulantEngine, product
from app.core.schemas import FisherComparison, ResidualReport, Target

logger = logging.getLogger(__name__)

RCOND = 1e-10


@dataclass
class ConjugateCandidate:
    """J_1..J_n, claimed conjugate to X_1..X_n with respect to the scope algebra."""
    J: List[Any]
    scope: Target = Target.B
    verified: bool = False
    notes: List[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def l2_norm(model: Any, x: Any) -> float:
    """‖x‖₂ = τ(x*x)^{1/2}."""
    return float(np.sqrt(max(np.real(model.trace(x.H @ x)), 0.0)))


def _tau(model: Any, factors: Sequence[Any]) -> complex:
    return complex(model.trace(product(list(factors)) if factors else model.one()))


def _expect(model: Any, factors: Sequence[Any], target: Target) -> Any:
    return model.expect(product(list(factors)) if factors else model.one(), target)


def _scalar(model: Any, value: complex, target: Target) -> Any:
    return model.expect(model.one(), target) * value


def _coefficients(model: Any, scope: Target, count: int, rng: np.random.Generator) -> List[Any]:
    return [model.constant(model.random_coefficient(scope, rng)) for _ in range(count)]


def _defaults(tol, coeff_draws, rng):
    return (
        config.TOL if tol is None else tol,
        config.COEFF_DRAWS if coeff_draws is None else coeff_draws,
        rng if rng is not None else np.random.default_rng(config.SEED),
    )


def _finish(report: ResidualReport) -> ResidualReport:
    mark = "✅" if report.verdict.value == "pass" else "⚠️"
    logger.info(f"{mark} {report.equation}: max residual {report.max_residual:.3e} "
                f"(m ≤ {report.max_order}) → {report.verdict.value}")
    return report


def _conjugate_rhs(model: Any, i: int, indices: Sequence[int], coefficients: Sequence[Any],
                   X: Sequence[Any]) -> complex:
    """Σ_r δ_{i,i_r} τ(b_1 X_{i_1} ⋯ b_r) τ(b_{r+1} ⋯ b_{m+1})."""
    total = 0j
    for r, index in enumerate(indices):
        if index != i:
            continue
        left = [coefficients[0]]
        for s in range(r):
            left += [X[indices[s]], coefficients[s + 1]]
        right = [coefficients[r + 1]]
        for s in range(r + 1, len(indices)):
            right += [X[indices[s]], coefficients[s + 1]]
        total += _tau(model, left) * _tau(model, right)
    return total


def _interleave(coefficients: Sequence[Any], variables: Sequence[Any]) -> List[Any]:
    factors = [coefficients[0]]
    for x, b in zip(variables, coefficients[1:]):
        factors += [x, b]
    return factors


# ---------------------------------------------------------------------------
# conjugate variables
# ---------------------------------------------------------------------------

def verify_conjugate(model: Any, cand: ConjugateCandidate, X: Sequence[Any], max_m: int = 4,
                     tol: Optional[float] = None, coeff_draws: Optional[int] = None,
                     rng: Optional[np.random.Generator] = None, position: int = 0) -> ResidualReport:
    """
    τ(J_i b_1 X_{i_1} b_2 ⋯ X_{i_m} b_{m+1}) against the derivative side for
    every m ≤ max_m, every index tuple and random coefficients from the scope.

    position moves J cyclically behind that many factors of the word
    (modulo its length); τ is tracial, so the residuals do not change.
    """
    tol, coeff_draws, rng = _defaults(tol, coeff_draws, rng)
    report = ResidualReport(equation="conjugate", max_order=max_m, tolerance=tol)
    for i, J in enumerate(cand.J):
        for m in range(0, max_m + 1):
            for indices in itertools.product(range(len(X)), repeat=m):
                for _ in range(coeff_draws):
                    coefficients = _coefficients(model, cand.scope, m + 1, rng)
                    word = _interleave(coefficients, [X[j] for j in indices])
                    shift = position % (len(word) + 1)
                    lhs = _tau(model, word[shift:] + [J] + word[:shift])
                    rhs = _conjugate_rhs(model, i, indices, coefficients, X)
                    key = f"J{i}|m={m}|{indices}"
                    report.record(key, max(abs(lhs - rhs), report.residuals.get(key, 0.0)))
    cand.verified = report.verdict.value == "pass"
    return _finish(report)


def verify_conjugate_cumulant_form(model: Any, cand: ConjugateCandidate, X: Sequence[Any], max_m: int = 3,
                                   tol: Optional[float] = None, coeff_draws: Optional[int] = None,
                                   rng: Optional[np.random.Generator] = None) -> ResidualReport:
    """
    D-valued cumulant form: κ^D(J_i) = 0, κ^D(J_i, d a) = δ_{a,X_i} τ(d)·1 and
    κ^D(J_i, d_1 a_1, …, d_m a_m) = 0 for m ≥ 2, with a ranging over the
    X's and a basis of B.
    """
    tol, coeff_draws, rng = _defaults(tol, coeff_draws, rng)
    engine = CumulantEngine(model, max_order=max_m + 1)
    letters = list(X) + [model.constant(b) for b in model.basis(Target.B)]
    labels = [f"X{j}" for j in range(len(X))] + [f"b{j}" for j in range(len(letters) - len(X))]
    report = ResidualReport(equation="conjugate_cumulant_form", max_order=max_m, tolerance=tol)
    for i, J in enumerate(cand.J):
        report.record(f"J{i}|order=1", model.norm(engine.cumulant([J], Target.D)))
        for m in range(1, max_m + 1):
            for choice in itertools.product(range(len(letters)), repeat=m):
                key = f"J{i}|order={m + 1}|{tuple(labels[c] for c in choice)}"
                for _ in range(coeff_draws):
                    ds = _coefficients(model, Target.D, m, rng)
                    args = [J] + [d @ letters[c] for d, c in zip(ds, choice)]
                    value = engine.cumulant(args, Target.D)
                    if m == 1 and choice[0] == i:
                        value = value - _scalar(model, complex(model.trace(ds[0])), Target.D)
                    report.record(key, max(model.norm(value), report.residuals.get(key, 0.0)))
    return _finish(report)


def fisher_info(model: Any, cand: ConjugateCandidate, tol: Optional[float] = None) -> float:
    """
    Φ* = Σ τ(J_i* J_i).

    Raises:
        ValueError: if some J_i is not self-adjoint within tol (L² norm)
    """
    tol = config.TOL if tol is None else tol
    total = 0.0
    for i, J in enumerate(cand.J):
        gap = l2_norm(model, J - J.H)
        if gap > tol:
            raise ValueError(f"J{i} is not self-adjoint: ‖J − J*‖₂ = {gap:.3e}")
        total += float(np.real(model.trace(J.H @ J)))
    if not cand.verified:
        logger.debug("Fisher information of an unverified candidate")
    return total


def _word_span(basis: Sequence[Any], n: int, max_length: int) -> List[Tuple[Tuple[int, ...], Tuple[Any, ...]]]:
    words = []
    for length in range(0, max_length + 1):
        for indices in itertools.product(range(n), repeat=length):
            for coefficients in itertools.product(basis, repeat=length + 1):
                words.append((indices, coefficients))
    return words


def _solve(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    alpha, *_ = np.linalg.lstsq(gram, rhs, rcond=RCOND)
    return alpha


def solve_conjugate(model: Any, X: Sequence[Any], scope: Target = Target.B,
                    max_length: int = 1) -> ConjugateCandidate:
    """
    Least-squares conjugate variables over the span of words
    c_0 X_{i_1} c_1 ⋯ X_{i_L} c_L, L ≤ max_length, c from a basis of the scope.

    The Gram matrix is τ(w_b* w_a); the right side is the derivative
    functional on w_b*.
    """
    words = _word_span([model.constant(b) for b in model.basis(scope)], len(X), max_length)
    elements = [product(_interleave(c, [X[j] for j in idx])) for idx, c in words]
    adjoints = [(tuple(reversed(idx)), tuple(b.H for b in reversed(c))) for idx, c in words]
    gram = np.array([[complex(model.trace(w_b.H @ w_a)) for w_a in elements] for w_b in elements])
    J = []
    for i in range(len(X)):
        rhs = np.array([_conjugate_rhs(model, i, idx, c, X) for idx, c in adjoints])
        alpha = _solve(gram, rhs)
        J.append(_combine(model, alpha, elements))
    logger.info(f"✅ Solved conjugate variables over {len(words)} words (scope {scope.value})")
    return ConjugateCandidate(J=J, scope=scope, notes=[f"word span up to length {max_length}"])


def _combine(model: Any, alpha: np.ndarray, elements: Sequence[Any]) -> Any:
    total = model.zero()
    for a, w in zip(alpha, elements):
        if abs(a) > RCOND:
            total = total + complex(a) * w
    return total


def fisher_info_pair(model: Any, X: Sequence[Any], max_length: int = 1,
                     tol: Optional[float] = None, coeff_draws: int = 3,
                     rng: Optional[np.random.Generator] = None) -> FisherComparison:
    """Φ*(X : D) and Φ*(X : B) from solved candidates, with their verification residuals."""
    tol, _, rng = _defaults(tol, coeff_draws, rng)
    values = {}
    for scope in (Target.D, Target.B):
        cand = solve_conjugate(model, X, scope, max_length)
        report = verify_conjugate(model, cand, X, max_m=max_length, tol=tol, coeff_draws=coeff_draws, rng=rng)
        values[scope] = (fisher_info(model, cand, tol=max(tol, 1e-6)), report.max_residual)
    comparison = FisherComparison(
        max_length=max_length,
        phi_D=values[Target.D][0], phi_B=values[Target.B][0],
        residual_D=values[Target.D][1], residual_B=values[Target.B][1],
    )
    comparison.notes.append("values are Fisher informations of the truncated word span")
    return comparison


# ---------------------------------------------------------------------------
# liberation gradient
# ---------------------------------------------------------------------------

def gradient_functional(model: Any, factors: Sequence[Any], membership: Sequence[int],
                        target: Target) -> Any:
    """
    E⊗E(δ(a_1⋯a_M)) = Σ_{l: a_l ∈ A_1} E(a_1⋯a_l)E(a_{l+1}⋯a_M) − E(a_1⋯a_{l−1})E(a_l⋯a_M).

    membership[l] is 1 for A_1 factors; anything else is treated as A_2 or B.
    """
    if len(factors) != len(membership):
        raise ValueError("Each factor needs a membership label")
    total = _scalar(model, 0.0, target)
    for l, label in enumerate(membership):
        if label != 1:
            continue
        total = total + _expect(model, factors[:l + 1], target) @ _expect(model, factors[l + 1:], target)
        total = total - _expect(model, factors[:l], target) @ _expect(model, factors[l:], target)
    return total


def verify_liberation_gradient(model: Any, j: Any, A1: Sequence[Any], A2: Sequence[Any],
                               target: Target = Target.D, max_m: int = 3, tol: Optional[float] = None,
                               coeff_draws: Optional[int] = None,
                               rng: Optional[np.random.Generator] = None) -> ResidualReport:
    """
    Both forms of the defining relations of j(A_1 : A_2) over the target:
    moments E(j c_1 c̃_1 ⋯ c_m c̃_m) against the telescoping sum, and the
    cumulant sign rules κ(j, a_1, …, a_m) ∈ {0, −κ(a_1…a_m), +κ(a_1…a_m)}.

    Raises:
        ValueError: if A1 or A2 is empty
    """
    if not A1 or not A2:
        raise ValueError("Both generator lists must be non-empty")
    tol, coeff_draws, rng = _defaults(tol, coeff_draws, rng)
    report = ResidualReport(equation="liberation_gradient", max_order=max_m, tolerance=tol)

    report.record("moment|m=0", model.norm(model.expect(j, target)))
    for m in range(1, max_m + 1):
        for picks in itertools.product(range(len(A1)), range(len(A2)), repeat=m):
            key = f"moment|m={m}|{picks}"
            for _ in range(coeff_draws):
                coefficients = _coefficients(model, target, 2 * m, rng)
                factors = []
                for r in range(m):
                    factors.append(A1[picks[2 * r]] @ coefficients[2 * r])
                    factors.append(A2[picks[2 * r + 1]] @ coefficients[2 * r + 1])
                lhs = model.expect(product([j] + factors), target)
                rhs = gradient_functional(model, factors, [1, 2] * m, target)
                report.record(key, max(model.norm(lhs - rhs), report.residuals.get(key, 0.0)))

    engine = CumulantEngine(model, max_order=max_m + 1)
    generators = [(a, 1) for a in A1] + [(a, 2) for a in A2]
    for m in range(1, max_m + 1):
        for choice in itertools.product(range(len(generators)), repeat=m):
            first, last = generators[choice[0]][1], generators[choice[-1]][1]
            sign = 0 if first == last else (-1 if first == 1 else 1)
            key = f"cumulant|m={m}|{tuple(generators[c][1] for c in choice)}|{choice}"
            for _ in range(coeff_draws):
                coefficients = _coefficients(model, target, m, rng)
                args = [generators[c][0] for c in choice]
                args = [coefficients[0] @ args[0]] + args[1:]
                args = [a @ b for a, b in zip(args[:-1], coefficients[1:])] + [args[-1]]
                value = engine.cumulant([j] + args, target)
                if sign:
                    value = value - engine.cumulant(args, target) * sign
                report.record(key, max(model.norm(value), report.residuals.get(key, 0.0)))
    return _finish(report)


def solve_gradient(model: Any, A1: Sequence[Any], A2: Sequence[Any], max_length: int = 2,
                   target: Optional[Target] = None) -> Any:
    """
    Least-squares liberation gradient j(A_1 : A_2) over the span of words
    c_0 a_1 c_1 ⋯ a_L c_L in the generators, L ≤ max_length.

    Without a target this is the scalar j_ℂ and every c is 1. With a target T
    the c run over a basis of T and the right side is τ∘(E_T⊗E_T)∘δ on w_b*,
    so the result is j_T and verifies at that target.
    """
    generators = [(a, 1) for a in A1] + [(a, 2) for a in A2]
    basis = [model.one()] if target is None else [model.constant(b) for b in model.basis(target)]
    words = _word_span(basis, len(generators), max_length)
    elements = [product(_interleave(c, [generators[g][0] for g in idx])) for idx, c in words]
    gram = np.array([[complex(model.trace(w_b.H @ w_a)) for w_a in elements] for w_b in elements])
    rhs = []
    for idx, c in words:
        factors = _interleave([b.H for b in reversed(c)], [generators[g][0].H for g in reversed(idx)])
        labels = _interleave([0] * len(c), [generators[g][1] for g in reversed(idx)])
        if target is None:
            rhs.append(_tau_functional(model, factors, labels))
        else:
            rhs.append(_trace_value(model, gradient_functional(model, factors, labels, target)))
    alpha = _solve(gram, np.array(rhs))
    scope = "ℂ" if target is None else target.value
    logger.info(f"✅ Solved liberation gradient over {len(words)} words (scope {scope})")
    return _combine(model, alpha, elements)


def _trace_value(model: Any, value: Any) -> complex:
    if isinstance(value, np.ndarray):
        return complex(normalized_trace(value))
    return complex(model.trace(value))


def _tau_functional(model: Any, factors: Sequence[Any], membership: Sequence[int]) -> complex:
    total = 0j
    for l, label in enumerate(membership):
        if label != 1:
            continue
        total += _tau(model, factors[:l + 1]) * _tau(model, factors[l + 1:])
        total -= _tau(model, factors[:l]) * _tau(model, factors[l:])
    return total


# ---------------------------------------------------------------------------
# projection identities for finite-dimensional D
# ---------------------------------------------------------------------------

def _inverse(model: Any, c: Any) -> Any:
    if isinstance(c, np.ndarray):
        return np.linalg.inv(c)
    return model.element(np.linalg.inv(c.matrix))


def liberation_projection(model: Any, j: Any) -> Any:
    """E_{D'}(j) · c^{-1} · dim(D): the D-valued gradient obtained from a scalar one."""
    c_inverse = _inverse(model, model.central_element_c())
    return (model.cond_exp_commutant(j) @ c_inverse) * float(model.dimension_D)


def commutator_projection(model: Any, X: Sequence[Any], cand: ConjugateCandidate) -> Any:
    """E_{D'}(Σ_i [J_i, X_i]) · c^{-1} · dim(D)."""
    if len(cand.J) != len(X):
        raise ValueError(f"{len(cand.J)} conjugate variables for {len(X)} elements")
    commutator = model.zero()
    for J, x in zip(cand.J, X):
        commutator = commutator + (J @ x - x @ J)
    return liberation_projection(model, commutator)
