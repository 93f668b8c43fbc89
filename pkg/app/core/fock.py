"""
Canonical random variables realizing a truncated B-valued cumulant series.

Letters are Star(j) = λ_j^*, Gen(p, q) = λ_p^q and Coeff(b) with b ∈ B = M_d.
The only algebraic input is the reduction rule

    λ_{j_1}^* b_1 λ_{j_2}^* b_2 ⋯ λ_{j_q}^* b_q λ_p^q = k_{j_1,…,j_q,p}(b_1,…,b_q)
    λ_p^0 = k_p

and the zero rule: E_B(w) = 0 unless w reduces to an element of B. Words are
only ever evaluated; no Fock space is built.

With Y_j = λ_j^* + Σ_{q≥0} λ_j^q the moments E_B(b_0 Y_{i_1} b_1 ⋯ Y_{i_m} b_m)
are exact for m ≤ K, and the B-valued cumulants of (Y_j) are the given series.
"""
import logging
from dataclasses import dataclass
from functools import reduce
from typing import (Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional,
                    Sequence, Tuple, Union)

import numpy as np

from app.config import config
from app.core.algebra import (SubalgebraError, SubalgebraSpec, central_element_c,
                              commutant_superoperator, normalized_trace)
from app.core.schemas import Target

logger = logging.getLogger(__name__)


class WordError(ValueError):
    """Malformed word: bad letter, index or truncation."""


# ---------------------------------------------------------------------------
# Letters and words
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Star:
    j: int


@dataclass(frozen=True)
class Gen:
    p: int
    q: int


@dataclass(frozen=True, eq=False)
class Coeff:
    b: np.ndarray


Letter = Union[Star, Gen, Coeff]


def _merge_coefficients(letters: Iterable[Letter]) -> Tuple[Letter, ...]:
    out: List[Letter] = []
    for letter in letters:
        if isinstance(letter, Coeff) and out and isinstance(out[-1], Coeff):
            out[-1] = Coeff(out[-1].b @ letter.b)
        else:
            out.append(letter)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Word:
    letters: Tuple[Letter, ...] = ()

    @classmethod
    def of(cls, *letters: Letter) -> "Word":
        """Canonical word: adjacent coefficients merged."""
        return cls(_merge_coefficients(letters))

    def __len__(self) -> int:
        return len(self.letters)


# ---------------------------------------------------------------------------
# Cumulant series
# ---------------------------------------------------------------------------

Evaluator = Callable[[Tuple[int, ...], Tuple[np.ndarray, ...]], np.ndarray]


@dataclass(frozen=True, eq=False)
class CumulantSeriesSpec:
    """
    A truncated family k_{j_1,…,j_k}(b_1,…,b_{k−1}) with values in M_d.

    Args:
        n: number of variables
        K: truncation order (largest cumulant order used)
        d: B = M_d
        evaluator: (indices, coefficients) -> d×d matrix
        orders: cumulant orders that may be nonzero (None: all up to K)
    """
    n: int
    K: int
    d: int
    evaluator: Evaluator
    orders: Optional[FrozenSet[int]] = None

    def has_order(self, k: int) -> bool:
        return k <= self.K and (self.orders is None or k in self.orders)

    def evaluate(self, indices: Sequence[int], coefficients: Sequence[np.ndarray] = ()) -> np.ndarray:
        indices = tuple(indices)
        coefficients = tuple(coefficients)
        k = len(indices)
        if k == 0 or k > self.K:
            raise WordError(f"Cumulant order {k} outside 1..{self.K}")
        if len(coefficients) != k - 1:
            raise WordError(f"Order {k} cumulant takes {k - 1} coefficients, got {len(coefficients)}")
        if any(i < 0 or i >= self.n for i in indices):
            raise WordError(f"Variable index out of range in {indices} (n={self.n})")
        if not self.has_order(k):
            return np.zeros((self.d, self.d), dtype=complex)
        return np.asarray(self.evaluator(indices, coefficients), dtype=complex)


class MultilinearMap:
    """
    (b_1,…,b_{k−1}) ↦ Σ_terms a_0 b_1 a_1 ⋯ b_{k−1} a_{k−1}, optionally plus
    trace_scale · τ(b_1)⋯τ(b_{k−1}) · 1.
    """

    def __init__(self, terms: Sequence[Sequence[np.ndarray]] = (), trace_scale: Optional[complex] = None,
                 d: Optional[int] = None):
        self.terms = [tuple(np.asarray(a, dtype=complex) for a in term) for term in terms]
        self.trace_scale = trace_scale
        if d is None:
            if not self.terms:
                raise ValueError("Dimension d is required for a map without terms")
            d = self.terms[0][0].shape[0]
        self.d = d
        arities = {len(t) - 1 for t in self.terms}
        if len(arities) > 1:
            raise ValueError(f"Terms of mixed arity {sorted(arities)}")
        self.arity = arities.pop() if arities else None

    @classmethod
    def trace(cls, d: int, scale: complex = 1.0) -> "MultilinearMap":
        return cls(trace_scale=scale, d=d)

    @classmethod
    def constant(cls, value: np.ndarray) -> "MultilinearMap":
        return cls(terms=[(value,)])

    def __call__(self, coefficients: Sequence[np.ndarray]) -> np.ndarray:
        if self.arity is not None and len(coefficients) != self.arity:
            raise ValueError(f"Map of arity {self.arity} called with {len(coefficients)} arguments")
        out = np.zeros((self.d, self.d), dtype=complex)
        for term in self.terms:
            acc = term[0]
            for b, a in zip(coefficients, term[1:]):
                acc = acc @ b @ a
            out = out + acc
        if self.trace_scale is not None:
            scale = self.trace_scale
            for b in coefficients:
                scale = scale * normalized_trace(b)
            out = out + scale * np.eye(self.d)
        return out

    def to_dict(self) -> Dict[str, object]:
        data: Dict[str, object] = {}
        if self.terms:
            data["terms"] = [[_matrix_to_json(a) for a in term] for term in self.terms]
        if self.trace_scale is not None:
            data["trace"] = complex(self.trace_scale).real
        return data


def _matrix_to_json(a: np.ndarray):
    if np.allclose(a.imag, 0):
        return a.real.tolist()
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


CoefficientMap = Callable[[Tuple[np.ndarray, ...]], np.ndarray]


def spec_from_tables(d: int, n: int, K: int, tables: Mapping[Tuple[int, ...], CoefficientMap]) -> CumulantSeriesSpec:
    """Series whose nonzero cumulants are listed per index tuple."""
    tables = {tuple(key): value for key, value in tables.items()}
    zero = np.zeros((d, d), dtype=complex)

    def evaluator(indices, coefficients):
        entry = tables.get(indices)
        return zero if entry is None else entry(coefficients)

    orders = frozenset(len(key) for key in tables)
    return CumulantSeriesSpec(n=n, K=K, d=d, evaluator=evaluator, orders=orders)


def semicircular_spec(d: int, covariances: Mapping[Tuple[int, int], Callable[[np.ndarray], np.ndarray]],
                      n: Optional[int] = None, K: Optional[int] = None,
                      means: Optional[Mapping[int, np.ndarray]] = None) -> CumulantSeriesSpec:
    """
    Family of B-semicircular elements: k_{ij}(b) = η_{ij}(b), optional means,
    all other cumulants zero. Missing (i, j) pairs are free of each other.
    """
    n = n or 1 + max(max(key) for key in covariances)
    K = K or config.CUMULANT_MAX_ORDER
    tables: Dict[Tuple[int, ...], CoefficientMap] = {
        tuple(key): (lambda bs, eta=eta: np.asarray(eta(bs[0]), dtype=complex))
        for key, eta in covariances.items()
    }
    for i, mean in (means or {}).items():
        tables[(i,)] = (lambda bs, value=np.asarray(mean, dtype=complex): value)
    return spec_from_tables(d, n, K, tables)


def perturb_spec(spec: CumulantSeriesSpec, indices: Sequence[int], epsilon: float,
                 direction: Optional[CoefficientMap] = None) -> CumulantSeriesSpec:
    """
    Add ε · direction(b_1,…) to the single cumulant k_indices. The default
    direction is b_1 ⋯ b_{k−1} (the identity for order 1).
    """
    target = tuple(indices)
    eye = np.eye(spec.d, dtype=complex)

    def default_direction(bs):
        return reduce(np.matmul, bs, eye)

    direction = direction or default_direction

    def evaluator(idx, bs):
        value = spec.evaluate(idx, bs)
        if idx == target:
            value = value + epsilon * direction(bs)
        return value

    orders = None if spec.orders is None else spec.orders | {len(target)}
    return CumulantSeriesSpec(n=spec.n, K=spec.K, d=spec.d, evaluator=evaluator, orders=orders)


# ---------------------------------------------------------------------------
# Reduction
# ---------------------------------------------------------------------------

def _validate(word: Word, spec: CumulantSeriesSpec) -> None:
    for letter in word.letters:
        if isinstance(letter, Star):
            if not 0 <= letter.j < spec.n:
                raise WordError(f"Star index {letter.j} out of range")
        elif isinstance(letter, Gen):
            if not 0 <= letter.p < spec.n or not 0 <= letter.q < spec.K:
                raise WordError(f"Letter Gen({letter.p}, {letter.q}) outside n={spec.n}, K={spec.K}")
        elif isinstance(letter, Coeff):
            if np.shape(letter.b) != (spec.d, spec.d):
                raise WordError(f"Coefficient of shape {np.shape(letter.b)} in B = M_{spec.d}")
        else:
            raise WordError(f"Unknown letter {letter!r}")


def _reducible_sites(letters: Sequence[Letter]) -> List[Tuple[int, int, Tuple[int, ...], Tuple[Optional[np.ndarray], ...]]]:
    """(start, gen_position, indices, coefficients) for every reducible Gen."""
    sites = []
    for g, letter in enumerate(letters):
        if not isinstance(letter, Gen):
            continue
        stars: List[int] = []
        coefs: List[Optional[np.ndarray]] = []
        pending: Optional[np.ndarray] = None
        pos = g - 1
        while len(stars) < letter.q and pos >= 0:
            current = letters[pos]
            if isinstance(current, Coeff):
                pending = current.b
            elif isinstance(current, Star):
                stars.append(current.j)
                coefs.append(pending)
                pending = None
            else:
                break
            pos -= 1
        if len(stars) == letter.q:
            start = pos + 1 if letter.q else g
            sites.append((start, g, tuple(reversed(stars)) + (letter.p,), tuple(reversed(coefs))))
    return sites


def reduce_word(word: Word, spec: CumulantSeriesSpec, strategy: str = "leftmost") -> Union[np.ndarray, Word]:
    """
    Replace reducible segments by cumulant values until none is left.

    Args:
        word: canonical word
        spec: cumulant series providing the values
        strategy: "leftmost" (normative) or "rightmost"

    Returns:
        The B-element if the word reduces completely, else the irreducible word.

    Raises:
        WordError: for malformed words
    """
    if strategy not in ("leftmost", "rightmost"):
        raise ValueError(f"Unknown reduction strategy {strategy!r}")
    _validate(word, spec)
    eye = np.eye(spec.d, dtype=complex)
    letters = list(_merge_coefficients(word.letters))
    while True:
        sites = _reducible_sites(letters)
        if not sites:
            break
        start, g, indices, coefs = sites[0] if strategy == "leftmost" else sites[-1]
        value = spec.evaluate(indices, tuple(eye if c is None else c for c in coefs))
        letters = list(_merge_coefficients(letters[:start] + [Coeff(value)] + letters[g + 1:]))
    if not letters:
        return eye
    if len(letters) == 1 and isinstance(letters[0], Coeff):
        return letters[0].b
    return Word(tuple(letters))


def expectation_word(word: Word, spec: CumulantSeriesSpec, strategy: str = "leftmost") -> np.ndarray:
    """E_B(w): the reduced value, or 0 for irreducible words."""
    reduced = reduce_word(word, spec, strategy)
    if isinstance(reduced, Word):
        return np.zeros((spec.d, spec.d), dtype=complex)
    return reduced


def canonical_moment(spec: CumulantSeriesSpec, indices: Sequence[int],
                     coefficients: Optional[Sequence[np.ndarray]] = None) -> np.ndarray:
    """
    E_B(b_0 Y_{i_1} b_1 ⋯ Y_{i_m} b_m), summed over all letter choices for
    each Y that can still reduce completely.

    Raises:
        ValueError: if m > K
        WordError: for out-of-range indices
    """
    indices = tuple(indices)
    m = len(indices)
    if m > spec.K:
        raise ValueError(f"Moment of order {m} exceeds the truncation K={spec.K}")
    eye = np.eye(spec.d, dtype=complex)
    coefficients = tuple(coefficients) if coefficients is not None else (eye,) * (m + 1)
    if len(coefficients) != m + 1:
        raise ValueError(f"Expected {m + 1} coefficients, got {len(coefficients)}")
    if any(i < 0 or i >= spec.n for i in indices):
        raise WordError(f"Variable index out of range in {indices} (n={spec.n})")
    if m == 0:
        return np.asarray(coefficients[0], dtype=complex).copy()

    total = np.zeros((spec.d, spec.d), dtype=complex)

    # pending: open stars as (index, coefficient accumulated after the star)
    def walk(r: int, base: np.ndarray, pending: Tuple[Tuple[int, np.ndarray], ...]) -> None:
        nonlocal total
        if r == m:
            if not pending:
                total = total + base
            return
        i, b = indices[r], coefficients[r + 1]
        last = r == m - 1
        if not last:
            walk(r + 1, base, pending + ((i, b),))
        for q in range(0, len(pending) + 1):
            if not spec.has_order(q + 1):
                continue
            rest = pending[:len(pending) - q]
            if last and rest:
                continue
            popped = pending[len(pending) - q:]
            value = spec.evaluate(tuple(j for j, _ in popped) + (i,), tuple(c for _, c in popped))
            if not value.any():
                continue
            if rest:
                j, c = rest[-1]
                walk(r + 1, base, rest[:-1] + ((j, c @ value @ b),))
            else:
                walk(r + 1, base @ value @ b, rest)

    walk(0, np.asarray(coefficients[0], dtype=complex), ())
    return total


# ---------------------------------------------------------------------------
# Polynomials in the canonical variables
# ---------------------------------------------------------------------------

Term = Tuple[Tuple[int, ...], Tuple[np.ndarray, ...]]


class NCPolynomial:
    """
    Σ c_0 Y_{i_1} c_1 ⋯ Y_{i_L} c_L with coefficients c in M_d, stored as
    rank-one terms (indices, coefficients).
    """

    __array_ufunc__ = None

    def __init__(self, d: int, terms: Iterable[Term] = ()):
        self.d = d
        self.terms: Tuple[Term, ...] = tuple(
            (tuple(idx), tuple(np.asarray(c, dtype=complex) for c in coefs)) for idx, coefs in terms
        )

    @classmethod
    def zero(cls, d: int) -> "NCPolynomial":
        return cls(d)

    @classmethod
    def constant(cls, b: np.ndarray) -> "NCPolynomial":
        b = np.asarray(b, dtype=complex)
        return cls(b.shape[0], [((), (b,))])

    @classmethod
    def variable(cls, i: int, d: int) -> "NCPolynomial":
        eye = np.eye(d, dtype=complex)
        return cls(d, [((i,), (eye, eye))])

    def _check(self, other: "NCPolynomial") -> None:
        if other.d != self.d:
            raise ValueError(f"Polynomials over M_{self.d} and M_{other.d} cannot be combined")

    def __add__(self, other: "NCPolynomial") -> "NCPolynomial":
        if not isinstance(other, NCPolynomial):
            return NotImplemented
        self._check(other)
        return NCPolynomial(self.d, self.terms + other.terms)

    def __neg__(self) -> "NCPolynomial":
        return -1.0 * self

    def __sub__(self, other: "NCPolynomial") -> "NCPolynomial":
        if not isinstance(other, NCPolynomial):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar) -> "NCPolynomial":
        if not np.isscalar(scalar):
            return NotImplemented
        return NCPolynomial(self.d, [(idx, (scalar * coefs[0],) + coefs[1:]) for idx, coefs in self.terms])

    __rmul__ = __mul__

    def __matmul__(self, other) -> "NCPolynomial":
        if isinstance(other, NCPolynomial):
            self._check(other)
            terms = []
            for idx1, c1 in self.terms:
                for idx2, c2 in other.terms:
                    terms.append((idx1 + idx2, c1[:-1] + (c1[-1] @ c2[0],) + c2[1:]))
            return NCPolynomial(self.d, terms)
        b = np.asarray(other, dtype=complex)
        if b.shape != (self.d, self.d):
            return NotImplemented
        return NCPolynomial(self.d, [(idx, coefs[:-1] + (coefs[-1] @ b,)) for idx, coefs in self.terms])

    def __rmatmul__(self, other) -> "NCPolynomial":
        b = np.asarray(other, dtype=complex)
        if b.shape != (self.d, self.d):
            return NotImplemented
        return NCPolynomial(self.d, [(idx, (b @ coefs[0],) + coefs[1:]) for idx, coefs in self.terms])

    def adjoint(self) -> "NCPolynomial":
        return NCPolynomial(self.d, [
            (tuple(reversed(idx)), tuple(c.conj().T for c in reversed(coefs))) for idx, coefs in self.terms
        ])

    @property
    def H(self) -> "NCPolynomial":
        return self.adjoint()

    @property
    def degree(self) -> int:
        return max((len(idx) for idx, _ in self.terms), default=0)

    def coefficient_tensors(self) -> Dict[Tuple[int, ...], np.ndarray]:
        """Merged coefficient tensor c_0 ⊗ ⋯ ⊗ c_L per index word."""
        tensors: Dict[Tuple[int, ...], np.ndarray] = {}
        for idx, coefs in self.terms:
            tensor = reduce(np.multiply.outer, coefs)
            tensors[idx] = tensors[idx] + tensor if idx in tensors else tensor
        return tensors

    def norm(self) -> float:
        """L² norm of the coefficient tensors (zero iff the polynomial is zero)."""
        return float(np.sqrt(sum(np.sum(np.abs(t) ** 2) for t in self.coefficient_tensors().values())))

    def fingerprint(self) -> Tuple:
        return tuple((idx, tuple(c.tobytes() for c in coefs)) for idx, coefs in self.terms)

    def __repr__(self) -> str:
        return f"NCPolynomial(d={self.d}, terms={len(self.terms)}, degree={self.degree})"


# ---------------------------------------------------------------------------
# The canonical model
# ---------------------------------------------------------------------------

class CanonicalModel:
    """
    B-probability space of the canonical variables Y_0..Y_{n-1}, with
    E_B by reduction, E_D = F∘E_B and τ = normalized trace of M_d after E_B.

    Args:
        spec: B-valued cumulant series
        subalgebra: D ⊂ M_d (default: scalars)
    """

    def __init__(self, spec: CumulantSeriesSpec, subalgebra: Optional[SubalgebraSpec] = None):
        self.spec = spec
        self.d = spec.d
        self.subalgebra = subalgebra or SubalgebraSpec.scalars(self.d)
        if self.subalgebra.size != self.d:
            raise SubalgebraError(f"D acts on ℂ^{self.subalgebra.size}, but B = M_{self.d}")
        self._commutant_tensor: Optional[np.ndarray] = None

    # elements ----------------------------------------------------------------

    def variable(self, i: int) -> NCPolynomial:
        if not 0 <= i < self.spec.n:
            raise WordError(f"Variable index {i} out of range (n={self.spec.n})")
        return NCPolynomial.variable(i, self.d)

    def variables(self) -> List[NCPolynomial]:
        return [self.variable(i) for i in range(self.spec.n)]

    def constant(self, b: np.ndarray) -> NCPolynomial:
        return NCPolynomial.constant(b)

    def one(self) -> NCPolynomial:
        return NCPolynomial.constant(np.eye(self.d, dtype=complex))

    def zero(self) -> NCPolynomial:
        return NCPolynomial.zero(self.d)

    # expectations ------------------------------------------------------------

    def expect_B(self, p: NCPolynomial) -> np.ndarray:
        total = np.zeros((self.d, self.d), dtype=complex)
        for idx, coefs in p.terms:
            total = total + canonical_moment(self.spec, idx, coefs)
        return total

    def cond_exp_D(self, b: np.ndarray) -> np.ndarray:
        return self.subalgebra.compress(b)

    def expect(self, p: NCPolynomial, target: Target) -> np.ndarray:
        value = self.expect_B(p)
        return value if target == Target.B else self.cond_exp_D(value)

    def trace(self, p: NCPolynomial) -> complex:
        return normalized_trace(self.expect_B(p))

    def fingerprint(self, p) -> Tuple:
        if isinstance(p, NCPolynomial):
            return p.fingerprint()
        return ("B", np.asarray(p, dtype=complex).tobytes())

    def norm(self, x) -> float:
        if isinstance(x, NCPolynomial):
            return x.norm()
        return float(np.linalg.norm(x))

    def random_coefficient(self, target: Target, rng: np.random.Generator) -> np.ndarray:
        b = (rng.standard_normal((self.d, self.d)) + 1j * rng.standard_normal((self.d, self.d))) / np.sqrt(2)
        return b if target == Target.B else self.cond_exp_D(b)

    def basis(self, target: Target) -> List[np.ndarray]:
        if target == Target.D:
            return self.subalgebra.basis_matrices()
        units = []
        for i in range(self.d):
            for j in range(self.d):
                e = np.zeros((self.d, self.d), dtype=complex)
                e[i, j] = 1.0
                units.append(e)
        return units

    # relative commutant ------------------------------------------------------

    def cond_exp_commutant(self, p: NCPolynomial) -> NCPolynomial:
        """E_{D'}(p) = ∫ u p u* du, applied to the outer coefficients of each term."""
        if self._commutant_tensor is None:
            self._commutant_tensor = commutant_superoperator(self.subalgebra)
        tensor = self._commutant_tensor
        support = np.argwhere(np.abs(tensor) > 1e-15)
        terms: List[Term] = []
        for idx, coefs in p.terms:
            if not idx:
                terms.append((idx, (self.subalgebra.commutant_compress(coefs[0]),)))
                continue
            for i, j, k, l in support:
                left = np.zeros((self.d, self.d), dtype=complex)
                left[i, :] = coefs[0][j, :]
                right = np.zeros((self.d, self.d), dtype=complex)
                right[:, l] = coefs[-1][:, k]
                terms.append((idx, (tensor[i, j, k, l] * left,) + coefs[1:-1] + (right,)))
        return NCPolynomial(self.d, terms)

    def central_element_c(self) -> np.ndarray:
        return central_element_c(self.subalgebra)

    @property
    def dimension_D(self) -> int:
        return self.subalgebra.dimension


# ---------------------------------------------------------------------------
# Free models over D
# ---------------------------------------------------------------------------

def _check_d_valued(series: CumulantSeriesSpec, subalgebra: SubalgebraSpec, tol: float) -> None:
    rng = np.random.default_rng(0)
    max_order = min(series.K, 3)
    for order in range(1, max_order + 1):
        if not series.has_order(order):
            continue
        for flat in range(series.n ** order):
            indices = tuple((flat // series.n ** p) % series.n for p in reversed(range(order)))
            for _ in range(2):
                coefs = tuple(
                    subalgebra.compress(rng.standard_normal((series.d, series.d))
                                        + 1j * rng.standard_normal((series.d, series.d)))
                    for _ in range(order - 1)
                )
                value = series.evaluate(indices, coefs)
                gap = float(np.linalg.norm(value - subalgebra.compress(value)))
                if gap > tol * max(1.0, float(np.linalg.norm(value))):
                    raise SubalgebraError(
                        f"Series is not D-valued: k{indices} leaves D by {gap:.3g}"
                    )


def construct_free_model(d_series: CumulantSeriesSpec, subalgebra: SubalgebraSpec,
                         tol: float = 1e-9) -> CumulantSeriesSpec:
    """
    B-valued series k_B(b_1,…) = F(k_D(F(b_1),…)) with F = E_D: canonical
    variables built from it are free from B with amalgamation over D and have
    the given D-valued cumulants.

    Raises:
        SubalgebraError: if d_series is not D-valued on D arguments
    """
    if subalgebra.size != d_series.d:
        raise SubalgebraError(f"D acts on ℂ^{subalgebra.size}, but the series lives in M_{d_series.d}")
    _check_d_valued(d_series, subalgebra, tol)
    F = subalgebra.compress

    def evaluator(indices, coefficients):
        return F(d_series.evaluate(indices, tuple(F(b) for b in coefficients)))

    logger.debug(f"Free model over D with blocks {subalgebra.blocks} constructed")
    return CumulantSeriesSpec(n=d_series.n, K=d_series.K, d=d_series.d,
                              evaluator=evaluator, orders=d_series.orders)


def lift_series(series: CumulantSeriesSpec, chain: Sequence[SubalgebraSpec], tol: float = 1e-9) -> CumulantSeriesSpec:
    """Tower lifting D_1 ⊂ D_2 ⊂ … ⊂ B: apply construct_free_model from the bottom up."""
    for subalgebra in chain:
        series = construct_free_model(series, subalgebra, tol)
    return series
