import json

import numpy as np
import pytest

from app.core.algebra import AlgebraContext, SubalgebraSpec
from app.core.fock import CanonicalModel, MultilinearMap, construct_free_model, semicircular_spec, spec_from_tables

TEST_SEED = 20240601


def unit(i: int, j: int, d: int = 2) -> np.ndarray:
    e = np.zeros((d, d), dtype=complex)
    e[i, j] = 1.0
    return e


# η(b) = diag(2 b11 + b22, b11 + 2 b22): a D-valued covariance with full support on the diagonal
MIXING = MultilinearMap(terms=[
    (2 * unit(0, 0), unit(0, 0)),
    (unit(0, 1), unit(1, 0)),
    (unit(1, 0), unit(0, 1)),
    (2 * unit(1, 1), unit(1, 1)),
])


@pytest.fixture
def rng():
    """Seeded generator"""
    return np.random.default_rng(TEST_SEED)


@pytest.fixture
def diagonal_context():
    """M_2 ⊗ M_3 with D = diagonal of M_2"""
    return AlgebraContext(2, 3, SubalgebraSpec.diagonal(2))


@pytest.fixture
def block_context():
    """M_3 ⊗ M_2 with D ≅ ℂ ⊕ M_2"""
    return AlgebraContext(3, 2, SubalgebraSpec.from_multiplicities([1, 2]))


@pytest.fixture
def semicircular_model():
    """One standard semicircular over ℂ"""
    return CanonicalModel(semicircular_spec(1, {(0, 0): lambda b: b}, K=6))


@pytest.fixture
def free_pair_model():
    """Two free standard semicirculars over ℂ"""
    return CanonicalModel(semicircular_spec(1, {(0, 0): lambda b: b, (1, 1): lambda b: b}, K=6))


def mixing_model(subalgebra: SubalgebraSpec) -> CanonicalModel:
    series = spec_from_tables(2, 1, 6, {(0, 0): MIXING})
    return CanonicalModel(construct_free_model(series, subalgebra), subalgebra)


@pytest.fixture
def mixing():
    """The covariance MIXING"""
    return MIXING


@pytest.fixture
def diagonal_free_model():
    """D-semicircular with covariance MIXING, free from M_2 over the diagonal"""
    return mixing_model(SubalgebraSpec.diagonal(2))


@pytest.fixture
def full_mixing_model():
    """The same variable with D = B = M_2"""
    return mixing_model(SubalgebraSpec.full(2))


@pytest.fixture
def mixing_pair_model():
    """Two D-semicirculars with covariance MIXING, free over M_2 and free from M_2 over the diagonal"""
    diagonal = SubalgebraSpec.diagonal(2)
    series = spec_from_tables(2, 2, 6, {(0, 0): MIXING, (1, 1): MIXING})
    return CanonicalModel(construct_free_model(series, diagonal), diagonal)



@pytest.fixture
def write_json(tmp_path):
    """Writes a dict to a JSON file under tmp_path and returns its path"""
    def _write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path
    return _write
