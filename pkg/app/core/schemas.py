"""
Shared enums and report models.

Every result the toolkit writes to disk is one of the pydantic models below;
their field names are frozen (see docs/SCHEMAS.md).
"""
import enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field


class Target(str, enum.Enum):
    B = "B"   # the coefficient algebra B
    D = "D"   # the subalgebra D ⊂ B


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    HYPOTHESIS_VIOLATED = "hypothesis_violated"

    @property
    def exit_code(self) -> int:
        return 1 if self is Verdict.FAIL else 0


def verdict_for(residual: float, tol: float) -> Verdict:
    return Verdict.PASS if residual <= tol else Verdict.FAIL


class Witness(BaseModel):
    """The query that produced the worst residual."""
    order: int
    arguments: List[str]
    residual: float


class FreenessReport(BaseModel):
    test: str
    target: Target
    max_order: int
    tolerance: float
    seed: Optional[int] = None
    per_order: Dict[int, float] = Field(default_factory=dict)
    families: Dict[str, Dict[int, float]] = Field(default_factory=dict)
    verdict: Verdict = Verdict.PASS
    witness: Optional[Witness] = None
    hypothesis_holds: Optional[bool] = None
    notes: List[str] = Field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.per_order.values(), default=0.0)


class ResidualReport(BaseModel):
    equation: str
    max_order: int
    tolerance: float
    residuals: Dict[str, float] = Field(default_factory=dict)
    max_residual: float = 0.0
    verdict: Verdict = Verdict.PASS
    notes: List[str] = Field(default_factory=list)

    def record(self, key: str, value: float) -> None:
        self.residuals[key] = float(value)
        if value > self.max_residual:
            self.max_residual = float(value)
        self.verdict = verdict_for(self.max_residual, self.tolerance)


class SemicircleVerdict(BaseModel):
    variance: float
    expected: List[float]
    deviations: List[float]
    max_deviation: float
    tolerance: float
    verdict: Verdict


class InvariantReport(BaseModel):
    context: Dict[str, Any]
    samples: int
    tolerance: float
    checks: Dict[str, float] = Field(default_factory=dict)
    verdict: Verdict = Verdict.PASS

    def record(self, name: str, residual: float) -> None:
        self.checks[name] = max(float(residual), self.checks.get(name, 0.0))
        failed = [v for v in self.checks.values() if v > self.tolerance]
        self.verdict = Verdict.FAIL if failed else Verdict.PASS


class HistogramResult(BaseModel):
    n: int
    trials: int
    seed: Optional[int] = None
    bin_edges: List[float]
    masses: List[float]
    moments: List[float]
    moment_errors: Optional[List[float]] = None
    ks_distance: Optional[float] = None


class BandVerdict(BaseModel):
    grid_size: int
    row_integrals: List[float]
    row_deviation: float
    tol_row: float
    constant_rows: bool
    moments: List[float]
    semicircle: SemicircleVerdict
    consistent: bool


class HaarConjugationStep(BaseModel):
    k: int
    trials: int
    power_norms: Dict[int, float]
    cyclic_moment_deviation: float
    mixed_cumulant_residual: float


class HaarConjugationReport(BaseModel):
    d: int
    seed: Optional[int] = None
    steps: List[HaarConjugationStep] = Field(default_factory=list)
    powers_decreasing: bool = False
    cumulants_decreasing: bool = False


class FisherComparison(BaseModel):
    """Φ* relative to D and to B from least-squares conjugate variables."""
    max_length: int
    phi_D: float
    phi_B: float
    residual_D: float
    residual_B: float
    notes: List[str] = Field(default_factory=list)


class PartitionListing(BaseModel):
    n: int
    count: int
    partitions: List[List[List[int]]] = Field(default_factory=list)


class ValueReport(BaseModel):
    """A single B- or D-valued quantity (moment, cumulant, conditional expectation)."""
    quantity: str
    target: Optional[Target] = None
    arguments: List[str] = Field(default_factory=list)
    re: List[List[float]]
    im: List[List[float]]
    norm: float
    seed: Optional[int] = None

    @classmethod
    def from_matrix(cls, quantity: str, matrix, **kwargs) -> "ValueReport":
        m = np.atleast_2d(np.asarray(matrix, dtype=complex))
        return cls(quantity=quantity, re=m.real.tolist(), im=m.imag.tolist(),
                   norm=float(np.linalg.norm(m)), **kwargs)
