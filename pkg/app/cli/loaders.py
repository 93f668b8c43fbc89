"""
Input files: model/context JSON and variance-profile CSV.

JSON errors surface as json.JSONDecodeError (line and column), schema
errors as pydantic.ValidationError (field path), CSV errors as ValueError
with the offending line number.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, TypeAdapter

from app.config import config
from app.core.algebra import AlgebraContext, SubalgebraSpec
from app.core.fock import (CanonicalModel, MultilinearMap, NCPolynomial, construct_free_model,
                           spec_from_tables)
from app.core.randmat import VarianceProfile

logger = logging.getLogger(__name__)


class ComplexMatrix(BaseModel):
    re: List[List[float]]
    im: List[List[float]]


MatrixValue = Union[List[List[float]], ComplexMatrix]


def to_array(value: MatrixValue) -> np.ndarray:
    if isinstance(value, ComplexMatrix):
        return np.asarray(value.re, dtype=float) + 1j * np.asarray(value.im, dtype=float)
    return np.asarray(value, dtype=complex)


class SubalgebraFile(BaseModel):
    kind: Literal["scalars", "diagonal", "full", "blocks"] = "scalars"
    blocks: Optional[List[Tuple[int, int]]] = None

    def build(self, size: int) -> SubalgebraSpec:
        if self.kind == "blocks":
            if not self.blocks:
                raise ValueError("D.kind = 'blocks' needs a 'blocks' list of [n_j, m_j] pairs")
            return SubalgebraSpec(blocks=tuple(tuple(b) for b in self.blocks))
        return getattr(SubalgebraSpec, self.kind)(size)


class TermFile(BaseModel):
    indices: List[int]
    coefficients: Optional[List[MatrixValue]] = None


class CumulantEntry(BaseModel):
    """One nonzero cumulant k_indices as a sum of a_0 b_1 a_1 ⋯ terms and/or a trace part."""
    indices: List[int]
    terms: List[List[MatrixValue]] = Field(default_factory=list)
    trace: Optional[float] = None


class ModelFile(BaseModel):
    kind: Literal["matrix", "fock"] = "matrix"
    d: int
    k: int = 1
    D: SubalgebraFile = Field(default_factory=SubalgebraFile)
    trace_weights: Optional[List[float]] = None
    elements: Dict[str, MatrixValue] = Field(default_factory=dict)
    n: Optional[int] = None
    K: Optional[int] = None
    cumulants: List[CumulantEntry] = Field(default_factory=list)
    free_over_D: bool = False
    polynomials: Dict[str, List[TermFile]] = Field(default_factory=dict)
    X: List[str] = Field(default_factory=list)
    S1: List[str] = Field(default_factory=list)
    S2: List[str] = Field(default_factory=list)
    entries: Optional[List[List[str]]] = None
    J: List[str] = Field(default_factory=list)
    A1: List[str] = Field(default_factory=list)
    A2: List[str] = Field(default_factory=list)


@dataclass
class LoadedModel:
    model: Any
    elements: Dict[str, Any]
    spec: ModelFile
    source: Optional[Path] = None
    notes: List[str] = field(default_factory=list)

    def pick(self, names: List[str]) -> List[Any]:
        missing = [name for name in names if name not in self.elements]
        if missing:
            raise ValueError(f"Unknown elements {missing}; defined: {sorted(self.elements)}")
        return [self.elements[name] for name in names]

    def role(self, name: str) -> List[Any]:
        return self.pick(getattr(self.spec, name))

    def grid(self) -> List[List[Any]]:
        if not self.spec.entries:
            raise ValueError("The model file defines no 'entries' array")
        return [self.pick(row) for row in self.spec.entries]


def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Input file not found: {path}")
    with path.open(encoding="utf-8") as handle:
        return json.load(handle)


def _embed(ctx: AlgebraContext, value: MatrixValue):
    matrix = to_array(value)
    return ctx.embed_B(matrix) if matrix.shape == (ctx.d, ctx.d) and ctx.k > 1 else ctx.element(matrix)


def _matrix_model(spec: ModelFile) -> LoadedModel:
    ctx = AlgebraContext(spec.d, spec.k, spec.D.build(spec.d), spec.trace_weights)
    elements: Dict[str, Any] = {"1": ctx.one()}
    for name, value in spec.elements.items():
        elements[name] = _embed(ctx, value)
    return LoadedModel(model=ctx, elements=elements, spec=spec)


def _coefficient_map(entry: CumulantEntry, d: int) -> MultilinearMap:
    terms = [[to_array(a) for a in term] for term in entry.terms]
    return MultilinearMap(terms=terms, trace_scale=entry.trace, d=d)


def _fock_model(spec: ModelFile) -> LoadedModel:
    if spec.n is None:
        raise ValueError("A fock model needs the number of variables 'n'")
    K = spec.K or config.CUMULANT_MAX_ORDER
    tables = {tuple(entry.indices): _coefficient_map(entry, spec.d) for entry in spec.cumulants}
    series = spec_from_tables(spec.d, spec.n, K, tables)
    subalgebra = spec.D.build(spec.d)
    if spec.free_over_D:
        series = construct_free_model(series, subalgebra)
    model = CanonicalModel(series, subalgebra)
    elements: Dict[str, Any] = {"1": model.one()}
    elements.update({f"Y{i}": model.variable(i) for i in range(spec.n)})
    eye = np.eye(spec.d, dtype=complex)
    for name, terms in spec.polynomials.items():
        poly_terms = []
        for term in terms:
            coefficients = ([to_array(c) for c in term.coefficients] if term.coefficients is not None
                            else [eye] * (len(term.indices) + 1))
            if len(coefficients) != len(term.indices) + 1:
                raise ValueError(f"Polynomial {name}: term {term.indices} needs {len(term.indices) + 1} coefficients")
            poly_terms.append((tuple(term.indices), tuple(coefficients)))
        elements[name] = NCPolynomial(spec.d, poly_terms)
    return LoadedModel(model=model, elements=elements, spec=spec)


def load_model(path: Union[str, Path]) -> LoadedModel:
    """
    Parse a model file (kind "matrix" or "fock").

    Raises:
        FileNotFoundError, json.JSONDecodeError, pydantic.ValidationError, ValueError
    """
    spec = ModelFile.model_validate(read_json(path))
    loaded = _matrix_model(spec) if spec.kind == "matrix" else _fock_model(spec)
    loaded.source = Path(path)
    logger.info(f"✅ Loaded {spec.kind} model from {path} (d={spec.d}, D={spec.D.kind})")
    return loaded


BUILTIN_PROFILES = {
    "constant": VarianceProfile.constant,
    "x+y": VarianceProfile.sum_profile,
    "circulant": VarianceProfile.circulant,
}


def load_profile(path: Union[str, Path]) -> VarianceProfile:
    """
    g×g CSV grid without header, or "builtin:<name>" for constant, x+y, circulant.

    Raises:
        FileNotFoundError: missing file
        ValueError: non-numeric cell (with its line number) or invalid grid
    """
    text = str(path)
    if text.startswith("builtin:"):
        name = text.split(":", 1)[1]
        if name not in BUILTIN_PROFILES:
            raise ValueError(f"Unknown builtin profile {name!r}; choose from {sorted(BUILTIN_PROFILES)}")
        return BUILTIN_PROFILES[name]()
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Profile file not found: {path}")
    frame = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True)
    numeric = frame.apply(lambda column: pd.to_numeric(column.str.strip(), errors="coerce"))
    bad = numeric.isna().any(axis=1)
    if bad.any():
        line = int(bad.idxmax()) + 1
        raise ValueError(f"{path}:{line}: non-numeric or missing value in variance profile")
    return VarianceProfile(numeric.to_numpy(dtype=float), name=path.stem)


_ELEMENTS = TypeAdapter(Dict[str, MatrixValue])
_COEFFICIENTS = TypeAdapter(List[MatrixValue])


def load_elements(path: Union[str, Path], loaded: LoadedModel) -> LoadedModel:
    """Add named elements from a {name: matrix} file to a matrix model."""
    if not isinstance(loaded.model, AlgebraContext):
        raise ValueError("Element files apply to matrix contexts; fock models define 'polynomials'")
    for name, value in _ELEMENTS.validate_python(read_json(path)).items():
        loaded.elements[name] = _embed(loaded.model, value)
    return loaded


def load_coefficients(path: Union[str, Path]) -> List[np.ndarray]:
    """A JSON list of d×d coefficient matrices."""
    return [to_array(value) for value in _COEFFICIENTS.validate_python(read_json(path))]
