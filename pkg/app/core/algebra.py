"""
Finite matrix models M = M_d ⊗ M_k with the tower D ⊂ B = M_d ⊗ 1 ⊂ M.

All conditional expectations are computed algebraically (partial traces and
block compressions). The Haar-integral formulas

    E_D(m)    = dim(D) · c^{-1} · ∫ u τ(u* m) du
    E_{D'}(m) = ∫ u m u* du

are available as Monte-Carlo oracles for verification only.

Index convention: M_d ⊗ M_k acts on ℂ^d ⊗ ℂ^k with basis index i*k + a,
i.e. numpy.kron(b, a) for b ∈ M_d, a ∈ M_k.
"""
import logging
import numbers
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag, qr

from app.config import config
from app.core.schemas import InvariantReport, Target, Verdict

logger = logging.getLogger(__name__)


class DegenerateTraceError(ValueError):
    """A central projection of D carries zero trace."""


class ContextMismatchError(ValueError):
    """Arithmetic between elements of different contexts."""


class SubalgebraError(ValueError):
    """D is not a unital subalgebra of B, or a series is not D-valued."""


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Haar-distributed n×n unitary: QR of a complex Ginibre matrix with the
    phases of diag(R) moved into Q.
    """
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def normalized_trace(x: np.ndarray) -> complex:
    return complex(np.trace(x)) / x.shape[0]


@dataclass(frozen=True, eq=False)
class SubalgebraSpec:
    """
    D ≅ M_{n_1} ⊕ ⋯ ⊕ M_{n_r} acting on ℂ^s, s = Σ n_j m_j.

    In the adapted basis (columns of `basis`) the j-th summand is
    M_{n_j} ⊗ 1_{m_j} on ℂ^{n_j} ⊗ ℂ^{m_j}; blocks follow each other
    along the diagonal.

    Args:
        blocks: pairs (n_j, m_j) of block size and multiplicity
        basis: unitary s×s matrix of the adapted basis (identity if None)
    """
    blocks: Tuple[Tuple[int, int], ...]
    basis: Optional[np.ndarray] = None

    def __post_init__(self):
        blocks = tuple((int(n), int(m)) for n, m in self.blocks)
        if not blocks or any(n < 1 or m < 1 for n, m in blocks):
            raise SubalgebraError(f"Invalid block structure {self.blocks}")
        object.__setattr__(self, "blocks", blocks)
        if self.basis is not None:
            w = np.asarray(self.basis, dtype=complex)
            if w.shape != (self.size, self.size):
                raise SubalgebraError(f"Basis must be {self.size}×{self.size}, got {w.shape}")
            if not np.allclose(w.conj().T @ w, np.eye(self.size), atol=1e-10):
                raise SubalgebraError("Adapted basis must be unitary")
            object.__setattr__(self, "basis", w)

    # factories -------------------------------------------------------------

    @classmethod
    def scalars(cls, size: int) -> "SubalgebraSpec":
        return cls(blocks=((1, size),))

    @classmethod
    def diagonal(cls, size: int) -> "SubalgebraSpec":
        return cls(blocks=tuple((1, 1) for _ in range(size)))

    @classmethod
    def full(cls, size: int) -> "SubalgebraSpec":
        return cls(blocks=((size, 1),))

    @classmethod
    def from_multiplicities(cls, sizes: Sequence[int]) -> "SubalgebraSpec":
        """D ≅ ⊕ M_{n_j} embedded block-diagonally without multiplicity."""
        return cls(blocks=tuple((n, 1) for n in sizes))

    # structure -------------------------------------------------------------

    @property
    def size(self) -> int:
        return sum(n * m for n, m in self.blocks)

    @property
    def dimension(self) -> int:
        return sum(n * n for n, _ in self.blocks)

    @property
    def block_sizes(self) -> List[int]:
        return [n for n, _ in self.blocks]

    @cached_property
    def offsets(self) -> List[int]:
        offsets, pos = [], 0
        for n, m in self.blocks:
            offsets.append(pos)
            pos += n * m
        return offsets

    def amplify(self, k: int) -> "SubalgebraSpec":
        """The same D inside M_s ⊗ M_k, i.e. D ⊗ 1_k."""
        basis = None if self.basis is None else np.kron(self.basis, np.eye(k))
        return SubalgebraSpec(blocks=tuple((n, m * k) for n, m in self.blocks), basis=basis)

    def _to_adapted(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if self.basis is None:
            return x
        return self.basis.conj().T @ x @ self.basis

    def _from_adapted(self, y: np.ndarray) -> np.ndarray:
        if self.basis is None:
            return y
        return self.basis @ y @ self.basis.conj().T

    def _block_slices(self):
        for (n, m), o in zip(self.blocks, self.offsets):
            yield n, m, slice(o, o + n * m)

    # expectations ----------------------------------------------------------

    def compress(self, x: np.ndarray) -> np.ndarray:
        """Trace-preserving conditional expectation of M_s onto D."""
        y = self._to_adapted(x)
        out = np.zeros_like(y)
        for n, m, sl in self._block_slices():
            sub = y[sl, sl].reshape(n, m, n, m)
            out[sl, sl] = np.kron(np.einsum("ibjb->ij", sub) / m, np.eye(m))
        return self._from_adapted(out)

    def commutant_compress(self, x: np.ndarray) -> np.ndarray:
        """Trace-preserving conditional expectation of M_s onto D′ ∩ M_s."""
        y = self._to_adapted(x)
        out = np.zeros_like(y)
        for n, m, sl in self._block_slices():
            sub = y[sl, sl].reshape(n, m, n, m)
            out[sl, sl] = np.kron(np.eye(n), np.einsum("aiaj->ij", sub) / n)
        return self._from_adapted(out)

    def central_projections(self) -> List[np.ndarray]:
        projections = []
        for _, _, sl in self._block_slices():
            p = np.zeros((self.size, self.size), dtype=complex)
            p[sl, sl] = np.eye(sl.stop - sl.start)
            projections.append(self._from_adapted(p))
        return projections

    def projection_traces(self) -> List[float]:
        """τ(p_j) under the normalized trace of M_s."""
        return [n * m / self.size for n, m in self.blocks]

    def basis_matrices(self) -> List[np.ndarray]:
        """A linear basis of D: matrix units of each summand, tensored with 1."""
        out = []
        for n, m, sl in self._block_slices():
            for a in range(n):
                for b in range(n):
                    unit = np.zeros((n, n), dtype=complex)
                    unit[a, b] = 1.0
                    y = np.zeros((self.size, self.size), dtype=complex)
                    y[sl, sl] = np.kron(unit, np.eye(m))
                    out.append(self._from_adapted(y))
        return out

    def haar(self, rng: np.random.Generator) -> np.ndarray:
        """Haar unitary of D: independent Haar blocks on each summand."""
        parts = [np.kron(haar_unitary(n, rng), np.eye(m)) for n, m in self.blocks]
        return self._from_adapted(block_diag(*parts).astype(complex))

    def contains(self, x: np.ndarray, tol: float) -> bool:
        return float(np.linalg.norm(x - self.compress(x))) <= tol

    def describe(self) -> Dict[str, Any]:
        return {"blocks": [list(b) for b in self.blocks], "dimension": self.dimension}


def central_element_c(spec: SubalgebraSpec, weights: Optional[Sequence[float]] = None) -> np.ndarray:
    """
    c = (Σ n_j²) · Σ_j τ(p_j)/n_j² · p_j

    Args:
        spec: the subalgebra D
        weights: τ(p_j) per central projection (default: normalized trace)

    Raises:
        DegenerateTraceError: if some τ(p_j) is zero
    """
    weights = list(spec.projection_traces() if weights is None else weights)
    if len(weights) != len(spec.blocks):
        raise ValueError(f"Expected {len(spec.blocks)} projection weights, got {len(weights)}")
    if any(w <= 0 for w in weights):
        raise DegenerateTraceError(f"Central projection with zero trace: weights {weights}")
    c = np.zeros((spec.size, spec.size), dtype=complex)
    for (n, _), w, p in zip(spec.blocks, weights, spec.central_projections()):
        c += (w / n ** 2) * p
    return spec.dimension * c


def commutant_superoperator(spec: SubalgebraSpec) -> np.ndarray:
    """
    T = ∫ u ⊗ u* du as an array with T[i, j, k, l] = (E_{D'}(e_jk))_{il}.
    """
    s = spec.size
    tensor = np.zeros((s, s, s, s), dtype=complex)
    for j in range(s):
        for k in range(s):
            unit = np.zeros((s, s), dtype=complex)
            unit[j, k] = 1.0
            tensor[:, j, k, :] = spec.commutant_compress(unit)
    return tensor


def haar_integral_D(x: np.ndarray, spec: SubalgebraSpec, samples: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Monte-Carlo dim(D) · c^{-1} · ∫ u τ(u* x) du."""
    if samples < 1:
        raise ValueError("Monte-Carlo integration needs at least one sample")
    acc = np.zeros((spec.size, spec.size), dtype=complex)
    for _ in range(samples):
        u = spec.haar(rng)
        acc += u * normalized_trace(u.conj().T @ x)
    c_inv = np.linalg.inv(central_element_c(spec))
    return spec.dimension * c_inv @ (acc / samples)


def haar_average_commutant(x: np.ndarray, spec: SubalgebraSpec, samples: int,
                           rng: np.random.Generator) -> np.ndarray:
    """Monte-Carlo ∫ u x u* du."""
    if samples < 1:
        raise ValueError("Monte-Carlo integration needs at least one sample")
    acc = np.zeros((spec.size, spec.size), dtype=complex)
    for _ in range(samples):
        u = spec.haar(rng)
        acc += u @ x @ u.conj().T
    return acc / samples


@dataclass(frozen=True, eq=False)
class Element:
    """An N×N matrix belonging to one AlgebraContext."""
    context: "AlgebraContext"
    matrix: np.ndarray

    # make numpy defer binary operators to this class
    __array_ufunc__ = None

    def _other(self, other: "Element") -> np.ndarray:
        if not isinstance(other, Element):
            raise TypeError(f"Expected an Element, got {type(other).__name__}")
        if other.context is not self.context:
            raise ContextMismatchError("Elements belong to different contexts")
        return other.matrix

    def _wrap(self, matrix: np.ndarray) -> "Element":
        return Element(self.context, matrix)

    def __matmul__(self, other: "Element") -> "Element":
        return self._wrap(self.matrix @ self._other(other))

    def __add__(self, other: "Element") -> "Element":
        return self._wrap(self.matrix + self._other(other))

    def __sub__(self, other: "Element") -> "Element":
        return self._wrap(self.matrix - self._other(other))

    def __neg__(self) -> "Element":
        return self._wrap(-self.matrix)

    def __mul__(self, scalar: numbers.Number) -> "Element":
        if not isinstance(scalar, numbers.Number):
            return NotImplemented
        return self._wrap(scalar * self.matrix)

    __rmul__ = __mul__

    def adjoint(self) -> "Element":
        return self._wrap(self.matrix.conj().T)

    @property
    def H(self) -> "Element":
        return self.adjoint()

    def norm(self) -> float:
        """Frobenius norm normalized by √k (so B-elements b ⊗ 1 have norm ‖b‖_F)."""
        return float(np.linalg.norm(self.matrix)) / np.sqrt(self.context.k)

    def __repr__(self) -> str:
        return f"Element(N={self.matrix.shape[0]}, norm={self.norm():.3g})"


class AlgebraContext:
    """
    M = M_d ⊗ M_k with normalized trace τ, B = M_d ⊗ 1 and D ⊂ B.

    Args:
        d: block dimension of B
        k: amplification, N = d·k
        subalgebra: D as a subalgebra of M_d (default: scalars)
        trace_weights: optional τ(p_j) per central projection of D; must match
            the normalized trace (the only trace on a full matrix algebra)
    """

    def __init__(self, d: int, k: int = 1, subalgebra: Optional[SubalgebraSpec] = None,
                 trace_weights: Optional[Sequence[float]] = None):
        if d < 1 or k < 1:
            raise ValueError(f"Dimensions must be positive, got d={d}, k={k}")
        self.d = int(d)
        self.k = int(k)
        self.N = self.d * self.k
        self.subalgebra = subalgebra or SubalgebraSpec.scalars(self.d)
        if self.subalgebra.size != self.d:
            raise SubalgebraError(
                f"D acts on ℂ^{self.subalgebra.size}, but B = M_{self.d}: D is not contained in B"
            )
        expected = self.subalgebra.projection_traces()
        if trace_weights is not None:
            weights = [float(w) for w in trace_weights]
            if len(weights) != len(expected) or not np.allclose(weights, expected, atol=1e-12):
                raise ValueError(
                    f"Trace weights {weights} are not tracial on M_{self.N}: only the normalized trace is. "
                    f"Omit trace_weights or pass {expected}, uniform over the {self.d} diagonal entries"
                )
        self.trace_weights = expected
        self._amplified = self.subalgebra.amplify(self.k)
        logger.debug(f"Context built: d={self.d}, k={self.k}, D blocks={self.subalgebra.blocks}")

    # construction ------------------------------------------------------------

    def element(self, matrix) -> Element:
        m = np.asarray(matrix, dtype=complex)
        if m.shape != (self.N, self.N):
            raise ValueError(f"Expected a {self.N}×{self.N} matrix, got {m.shape}")
        return Element(self, m)

    def one(self) -> Element:
        return Element(self, np.eye(self.N, dtype=complex))

    def zero(self) -> Element:
        return Element(self, np.zeros((self.N, self.N), dtype=complex))

    def embed_B(self, b) -> Element:
        """b ∈ M_d ↦ b ⊗ 1_k."""
        b = np.asarray(b, dtype=complex)
        if b.shape != (self.d, self.d):
            raise ValueError(f"Expected a {self.d}×{self.d} matrix, got {b.shape}")
        return Element(self, np.kron(b, np.eye(self.k)))

    def constant(self, b) -> Element:
        """A B-coefficient as an element: Elements pass through, d×d matrices are embedded."""
        return b if isinstance(b, Element) else self.embed_B(b)

    def embed_k(self, a) -> Element:
        """a ∈ M_k ↦ 1_d ⊗ a."""
        return Element(self, np.kron(np.eye(self.d), np.asarray(a, dtype=complex)))

    def compress_B(self, x: Element) -> np.ndarray:
        """The d×d representative of E_B(x)."""
        t = x.matrix.reshape(self.d, self.k, self.d, self.k)
        return np.einsum("iaja->ij", t) / self.k

    # trace and expectations --------------------------------------------------

    def trace(self, x: Element) -> complex:
        return normalized_trace(x.matrix)

    def cond_exp_B(self, x: Element) -> Element:
        return self.embed_B(self.compress_B(x))

    def cond_exp_D(self, x: Element) -> Element:
        return Element(self, self._amplified.compress(x.matrix))

    def cond_exp_commutant(self, x: Element, samples: Optional[int] = None,
                           rng: Optional[np.random.Generator] = None) -> Element:
        """
        E_{D'}(x); exact unless `samples` is given, in which case the Haar
        average over the unitary group of D is estimated.
        """
        if samples is None:
            return Element(self, self._amplified.commutant_compress(x.matrix))
        if samples < 1:
            raise ValueError("Monte-Carlo mode needs at least one sample")
        rng = rng or np.random.default_rng(config.SEED)
        return Element(self, haar_average_commutant(x.matrix, self._amplified, samples, rng))

    def haar_integral_D(self, x: Element, samples: int, rng: np.random.Generator) -> Element:
        return Element(self, haar_integral_D(x.matrix, self._amplified, samples, rng))

    def central_element_c(self, weights: Optional[Sequence[float]] = None) -> Element:
        return Element(self, central_element_c(self._amplified, weights))

    def haar_sample(self, rng: np.random.Generator) -> Element:
        return Element(self, self._amplified.haar(rng))

    @property
    def dimension_D(self) -> int:
        return self.subalgebra.dimension

    # model protocol ----------------------------------------------------------

    def expect(self, x: Element, target: Target) -> Element:
        if target == Target.B:
            return self.cond_exp_B(x)
        return self.cond_exp_D(x)

    def fingerprint(self, x: Element) -> bytes:
        return x.matrix.tobytes()

    def norm(self, x: Element) -> float:
        return x.norm()

    def random_element(self, rng: np.random.Generator, hermitian: bool = False) -> Element:
        z = (rng.standard_normal((self.N, self.N)) + 1j * rng.standard_normal((self.N, self.N))) / np.sqrt(2)
        if hermitian:
            z = (z + z.conj().T) / 2
        return Element(self, z)

    def random_coefficient(self, target: Target, rng: np.random.Generator) -> Element:
        b = (rng.standard_normal((self.d, self.d)) + 1j * rng.standard_normal((self.d, self.d))) / np.sqrt(2)
        element = self.embed_B(b)
        return element if target == Target.B else self.cond_exp_D(element)

    def basis(self, target: Target) -> List[Element]:
        if target == Target.B:
            units = []
            for i in range(self.d):
                for j in range(self.d):
                    e = np.zeros((self.d, self.d), dtype=complex)
                    e[i, j] = 1.0
                    units.append(self.embed_B(e))
            return units
        return [self.embed_B(p) for p in self.subalgebra.basis_matrices()]

    def trace_form_gap(self) -> float:
        """Smallest eigenvalue of the Gram matrix τ(e_a* e_b) over a basis of B."""
        basis = self.basis(Target.B)
        gram = np.array([[self.trace(a.H @ b) for b in basis] for a in basis])
        return float(np.linalg.eigvalsh((gram + gram.conj().T) / 2).min())

    def describe(self) -> Dict[str, Any]:
        return {"d": self.d, "k": self.k, "D": self.subalgebra.describe()}

    # invariant suite ---------------------------------------------------------

    def check_invariants(self, samples: int = 100, rng: Optional[np.random.Generator] = None,
                         tol: Optional[float] = None) -> InvariantReport:
        """
        Bimodule law, idempotence, unitality, positivity and trace compatibility
        of E_B, E_D, E_{D'}, plus traciality, the tower law E_D∘E_B = E_D and
        nondegeneracy of the trace form on B.
        """
        rng = rng or np.random.default_rng(config.SEED)
        tol = config.ALGEBRA_TOL if tol is None else tol
        report = InvariantReport(context=self.describe(), samples=samples, tolerance=tol)

        gap = self.trace_form_gap()
        report.record("trace_form_nondegenerate", 0.0 if gap > tol else 1.0)
        report.record("trace_unit", abs(self.trace(self.one()) - 1))

        expectations = {
            "E_B": (self.cond_exp_B, lambda: self.random_coefficient(Target.B, rng)),
            "E_D": (self.cond_exp_D, lambda: self.random_coefficient(Target.D, rng)),
            "E_D'": (self.cond_exp_commutant,
                     lambda: self.cond_exp_commutant(self.random_element(rng))),
        }
        one = self.one()
        for _ in range(samples):
            m, m2 = self.random_element(rng), self.random_element(rng)
            report.record("traciality", abs(self.trace(m @ m2) - self.trace(m2 @ m)))
            report.record("tower", (self.cond_exp_D(self.cond_exp_B(m)) - self.cond_exp_D(m)).norm())
            for name, (cond, draw) in expectations.items():
                b, b2 = draw(), draw()
                e = cond(m)
                report.record(f"{name}.bimodule", (cond(b @ m @ b2) - b @ e @ b2).norm())
                report.record(f"{name}.idempotent", (cond(e) - e).norm())
                report.record(f"{name}.unital", (cond(one) - one).norm())
                report.record(f"{name}.trace", abs(self.trace(e) - self.trace(m)))
                pos = cond(m.H @ m).matrix
                pos = (pos + pos.conj().T) / 2
                report.record(f"{name}.positive", max(0.0, -float(np.linalg.eigvalsh(pos).min())))

        if report.verdict == Verdict.PASS:
            logger.info(f"✅ Invariant suite passed for {self.describe()}")
        else:
            logger.warning(f"⚠️ Invariant suite failed for {self.describe()}: {report.checks}")
        return report
