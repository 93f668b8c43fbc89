"""Tests for matrix contexts and conditional expectations"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.algebra import (AlgebraContext, ContextMismatchError, DegenerateTraceError, SubalgebraError,
                              SubalgebraSpec, central_element_c, haar_unitary)
from app.core.schemas import Target, Verdict


class TestSubalgebraSpec:
    """Test D ⊂ M_s descriptions"""

    def test_dimensions(self):
        """Test size and dimension of the standard factories"""
        assert SubalgebraSpec.scalars(3).dimension == 1
        assert SubalgebraSpec.diagonal(3).dimension == 3
        assert SubalgebraSpec.full(3).dimension == 9
        blocks = SubalgebraSpec.from_multiplicities([1, 2])
        assert blocks.size == 3
        assert blocks.dimension == 5

    def test_invalid_blocks(self):
        """Test empty or non-positive blocks raise SubalgebraError"""
        with pytest.raises(SubalgebraError):
            SubalgebraSpec(blocks=())
        with pytest.raises(SubalgebraError):
            SubalgebraSpec(blocks=((0, 1),))

    def test_non_unitary_basis(self):
        """Test a non-unitary adapted basis is rejected"""
        with pytest.raises(SubalgebraError):
            SubalgebraSpec(blocks=((1, 1), (1, 1)), basis=np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_diagonal_compress(self, rng):
        """Test compression onto the diagonal keeps the diagonal"""
        x = rng.standard_normal((3, 3))
        assert_allclose(SubalgebraSpec.diagonal(3).compress(x), np.diag(np.diag(x)))

    def test_scalar_compress(self, rng):
        """Test compression onto scalars is the normalized trace"""
        x = rng.standard_normal((4, 4))
        assert_allclose(SubalgebraSpec.scalars(4).compress(x), np.trace(x) / 4 * np.eye(4), atol=1e-12)

    def test_commutant_of_diagonal(self, rng):
        """Test D' of the diagonal is the diagonal"""
        x = rng.standard_normal((3, 3))
        assert_allclose(SubalgebraSpec.diagonal(3).commutant_compress(x), np.diag(np.diag(x)), atol=1e-12)

    def test_rotated_basis(self, rng):
        """Test compression in a rotated adapted basis lands in the rotated diagonal"""
        w = haar_unitary(2, rng)
        spec = SubalgebraSpec(blocks=((1, 1), (1, 1)), basis=w)
        x = rng.standard_normal((2, 2))
        y = spec.compress(x)
        inner = w.conj().T @ y @ w
        assert_allclose(inner, np.diag(np.diag(inner)), atol=1e-12)
        assert spec.contains(y, 1e-10)


class TestCentralElement:
    """Test c = dim(D) Σ τ(p_j)/n_j² p_j"""

    def test_diagonal_is_identity(self):
        """Test c = 1 for the diagonal with the normalized trace"""
        assert_allclose(central_element_c(SubalgebraSpec.diagonal(3)), np.eye(3))

    def test_full_algebra(self):
        """Test c = 1 for D = M_s"""
        assert_allclose(central_element_c(SubalgebraSpec.full(2)), np.eye(2))

    def test_zero_weight(self):
        """Test a zero projection trace raises DegenerateTraceError"""
        with pytest.raises(DegenerateTraceError):
            central_element_c(SubalgebraSpec.diagonal(2), weights=[1.0, 0.0])


class TestAlgebraContext:
    """Test AlgebraContext"""

    def test_mismatched_subalgebra(self):
        """Test D must act on ℂ^d"""
        with pytest.raises(SubalgebraError):
            AlgebraContext(2, 2, SubalgebraSpec.diagonal(3))

    def test_non_tracial_weights(self):
        """Test non-uniform trace weights are rejected"""
        with pytest.raises(ValueError, match="tracial"):
            AlgebraContext(2, 1, SubalgebraSpec.diagonal(2), trace_weights=[0.3, 0.7])

    def test_weights_error_names_alternative(self):
        """Test the rejection points at the normalized-trace weights that are accepted"""
        with pytest.raises(ValueError, match=r"Omit trace_weights or pass \[0.5, 0.5\]"):
            AlgebraContext(2, 1, SubalgebraSpec.diagonal(2), trace_weights=[0.3, 0.7])
        ctx = AlgebraContext(2, 1, SubalgebraSpec.diagonal(2), trace_weights=[0.5, 0.5])
        assert ctx.trace_weights == pytest.approx([0.5, 0.5])


    def test_context_mismatch(self, diagonal_context):
        """Test arithmetic across contexts raises ContextMismatchError"""
        other = AlgebraContext(2, 3, SubalgebraSpec.diagonal(2))
        with pytest.raises(ContextMismatchError):
            diagonal_context.one() @ other.one()

    def test_compress_b_of_embedding(self, diagonal_context, rng):
        """Test E_B(b ⊗ 1) = b ⊗ 1"""
        b = rng.standard_normal((2, 2))
        x = diagonal_context.embed_B(b)
        assert_allclose(diagonal_context.compress_B(x), b, atol=1e-12)
        assert_allclose(diagonal_context.cond_exp_B(x).matrix, x.matrix, atol=1e-12)

    def test_compress_b_partial_trace(self, diagonal_context, rng):
        """Test E_B(b ⊗ a) = τ(a) b"""
        b = rng.standard_normal((2, 2))
        a = rng.standard_normal((3, 3))
        x = diagonal_context.embed_B(b) @ diagonal_context.embed_k(a)
        assert_allclose(diagonal_context.compress_B(x), np.trace(a) / 3 * b, atol=1e-12)

    def test_tower(self, block_context, rng):
        """Test E_D ∘ E_B = E_D"""
        m = block_context.random_element(rng)
        lhs = block_context.cond_exp_D(block_context.cond_exp_B(m))
        assert_allclose(lhs.matrix, block_context.cond_exp_D(m).matrix, atol=1e-12)

    def test_expect_dispatch(self, diagonal_context, rng):
        """Test expect() routes targets B and D"""
        m = diagonal_context.random_element(rng)
        assert_allclose(diagonal_context.expect(m, Target.B).matrix, diagonal_context.cond_exp_B(m).matrix)
        assert_allclose(diagonal_context.expect(m, Target.D).matrix, diagonal_context.cond_exp_D(m).matrix)

    def test_norm_of_b_element(self, diagonal_context):
        """Test ‖b ⊗ 1‖ = ‖b‖_F"""
        b = np.array([[1.0, 2.0], [0.0, 1.0]])
        assert diagonal_context.embed_B(b).norm() == pytest.approx(np.linalg.norm(b))

    def test_basis_sizes(self, block_context):
        """Test bases of B and D have dimensions d² and dim(D)"""
        assert len(block_context.basis(Target.B)) == 9
        assert len(block_context.basis(Target.D)) == block_context.dimension_D == 5

    def test_trace_form_nondegenerate(self, block_context):
        """Test the Gram matrix of τ on B is positive definite"""
        assert block_context.trace_form_gap() > 0

    def test_invariant_suite(self, block_context, rng):
        """Test the invariant suite passes on a block subalgebra"""
        report = block_context.check_invariants(samples=10, rng=rng)
        assert report.verdict == Verdict.PASS
        assert "E_D.bimodule" in report.checks
        assert "E_D'.positive" in report.checks
        assert max(report.checks.values()) <= report.tolerance

    def test_monte_carlo_commutant(self, diagonal_context, rng):
        """Test the Haar average of u m u* approaches E_D' in Monte-Carlo mode"""
        m = diagonal_context.random_element(rng)
        exact = diagonal_context.cond_exp_commutant(m)
        estimate = diagonal_context.cond_exp_commutant(m, samples=2000, rng=rng)
        assert (estimate - exact).norm() < 0.2 * max(exact.norm(), 1.0)

    def test_monte_carlo_d_integral(self, diagonal_context, rng):
        """Test dim(D) c⁻¹ ∫ u τ(u* m) du approaches E_D(m)"""
        m = diagonal_context.random_element(rng)
        exact = diagonal_context.cond_exp_D(m)
        estimate = diagonal_context.haar_integral_D(m, samples=4000, rng=rng)
        assert (estimate - exact).norm() < 0.2 * max(exact.norm(), 1.0)

    def test_monte_carlo_needs_samples(self, diagonal_context):
        """Test zero samples raise ValueError"""
        with pytest.raises(ValueError):
            diagonal_context.cond_exp_commutant(diagonal_context.one(), samples=0)

    def test_haar_unitary_is_unitary(self, rng):
        """Test haar_unitary returns a unitary"""
        u = haar_unitary(5, rng)
        assert_allclose(u @ u.conj().T, np.eye(5), atol=1e-12)
