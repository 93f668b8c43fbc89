"""Tests for freeness with amalgamation"""
import numpy as np
import pytest

from app.core import freeness
from app.core.algebra import SubalgebraError, SubalgebraSpec
from app.core.fock import CanonicalModel, perturb_spec, semicircular_spec, spec_from_tables
from app.core.schemas import Target, Verdict

AVERAGE = np.full((2, 2), 0.5)


class TestMixedCumulants:
    """Test vanishing of mixed cumulants"""

    def test_element_free_from_b(self, diagonal_context, rng):
        """Test any element is free from B over B"""
        x = diagonal_context.random_element(rng, hermitian=True)
        b = diagonal_context.embed_B(rng.standard_normal((2, 2)))
        report = freeness.test_mixed_cumulants(diagonal_context, [x], [b], max_order=3, coeff_draws=2, rng=rng)
        assert report.verdict == Verdict.PASS
        assert set(report.per_order) == {2, 3}

    def test_element_not_free_from_itself(self, diagonal_context, rng):
        """Test a non-constant element is not free from itself"""
        x = diagonal_context.random_element(rng, hermitian=True)
        report = freeness.test_mixed_cumulants(diagonal_context, [x], [x], max_order=2, coeff_draws=2, rng=rng)
        assert report.verdict == Verdict.FAIL
        assert report.verdict.exit_code == 1
        assert report.witness is not None
        assert report.witness.order == 2

    def test_free_semicirculars(self, free_pair_model, rng):
        """Test two free semicirculars have vanishing mixed cumulants"""
        y0, y1 = free_pair_model.variables()
        report = freeness.test_mixed_cumulants(free_pair_model, [y0], [y1], max_order=4, coeff_draws=1, rng=rng)
        assert report.verdict == Verdict.PASS

    def test_empty_sets(self, diagonal_context):
        """Test empty element sets raise ValueError"""
        with pytest.raises(ValueError):
            freeness.test_mixed_cumulants(diagonal_context, [], [diagonal_context.one()])

    def test_order_below_two(self, diagonal_context):
        """Test max_order < 2 raises ValueError"""
        one = diagonal_context.one()
        with pytest.raises(ValueError):
            freeness.test_mixed_cumulants(diagonal_context, [one], [one], max_order=1)

    @pytest.mark.parametrize("dependent,expected", [(False, Verdict.PASS), (True, Verdict.FAIL)])
    def test_free_over_b_matches_free_over_d(self, mixing, rng, dependent, expected):
        """Test X free from Y over B exactly when B⟨X⟩ is free from Y over D, for Y free from B over D"""
        model = CanonicalModel(semicircular_spec(2, {(0, 0): lambda b: b, (1, 1): lambda b: mixing([b])}, K=6),
                               SubalgebraSpec.diagonal(2))
        y0, y = model.variables()
        x = y0 + y if dependent else y0
        b1, b2 = (model.constant(rng.standard_normal((2, 2))) for _ in range(2))
        over_b = freeness.test_mixed_cumulants(model, [x], [y], Target.B, max_order=3, coeff_draws=1, rng=rng)
        over_d = freeness.test_mixed_cumulants(model, [x, b1, b1 @ x @ b2], [y], Target.D, max_order=3,
                                               coeff_draws=1, rng=rng)
        assert over_b.verdict == expected
        assert over_d.verdict == expected



class TestFactorization:
    """Test B-cumulants factoring through D"""

    def test_free_over_diagonal(self, diagonal_free_model, rng):
        """Test a model built free over the diagonal passes both families"""
        report = freeness.test_factorization(diagonal_free_model, diagonal_free_model.variables(),
                                             max_order=4, coeff_draws=2, rng=rng)
        assert report.verdict == Verdict.PASS
        assert set(report.families) == {"F∘k∘F", "k_D"}

    def test_identity_covariance_fails(self, rng):
        """Test η(b) = b does not factor through the diagonal"""
        model = CanonicalModel(semicircular_spec(2, {(0, 0): lambda b: b}, K=4), SubalgebraSpec.diagonal(2))
        report = freeness.test_factorization(model, model.variables(), max_order=2, coeff_draws=3, rng=rng)
        assert report.verdict == Verdict.FAIL
        assert report.families["k_D"][2] > 1e-3

    def test_detects_small_perturbation(self, diagonal_free_model, rng):
        """Test ε = 1e-3 on the third cumulant shows up at order 3 only"""
        epsilon = 1e-3
        perturbed = perturb_spec(diagonal_free_model.spec, (0, 0, 0), epsilon)
        model = CanonicalModel(perturbed, SubalgebraSpec.diagonal(2))
        report = freeness.test_factorization(model, model.variables(), max_order=3, coeff_draws=3, rng=rng)
        assert report.verdict == Verdict.FAIL
        assert report.per_order[2] < 1e-8
        assert report.per_order[3] >= epsilon / 10

    def test_model_without_subalgebra(self, diagonal_free_model):
        """Test a model whose D does not act on ℂ^d is rejected"""
        class Bare:
            d = 2
            subalgebra = None

        with pytest.raises(SubalgebraError):
            freeness.test_factorization(Bare(), diagonal_free_model.variables())


class TestRestriction:
    """Test k_D = k_B on D-arguments"""

    def test_d_valued_model_passes(self, diagonal_free_model, rng):
        """Test the hypothesis and the conclusion hold for a model free over D"""
        report = freeness.test_restriction(diagonal_free_model, diagonal_free_model.variables(),
                                           max_order=3, coeff_draws=2, rng=rng)
        assert report.hypothesis_holds is True
        assert report.verdict == Verdict.PASS

    def test_hypothesis_violated(self, rng):
        """Test η(b) = a b a with a averaging leaves D and is reported, not failed"""
        model = CanonicalModel(semicircular_spec(2, {(0, 0): lambda b: AVERAGE @ b @ AVERAGE}, K=4),
                               SubalgebraSpec.diagonal(2))
        report = freeness.test_restriction(model, model.variables(), max_order=2, coeff_draws=3, rng=rng)
        assert report.hypothesis_holds is False
        assert report.verdict == Verdict.HYPOTHESIS_VIOLATED
        assert report.verdict.exit_code == 0
        assert report.families["hypothesis"][2] > 0


class TestRCyclic:
    """Test R-cyclicity of matrices of elements"""

    def test_diagonal_of_free_semicirculars(self, free_pair_model):
        """Test diag(Y0, Y1) with free entries is R-cyclic"""
        y0, y1 = free_pair_model.variables()
        zero = free_pair_model.zero()
        report = freeness.test_r_cyclic(free_pair_model, [[y0, zero], [zero, y1]], max_order=3)
        assert report.verdict == Verdict.PASS

    def test_constant_entries_fail(self, semicircular_model):
        """Test a matrix with all entries equal to one semicircular is not R-cyclic"""
        y = semicircular_model.variable(0)
        report = freeness.test_r_cyclic(semicircular_model, [[y, y], [y, y]], max_order=2)
        assert report.verdict == Verdict.FAIL
        assert report.per_order[2] == pytest.approx(1.0)

    def test_non_square(self, semicircular_model):
        """Test ragged arrays raise ValueError"""
        y = semicircular_model.variable(0)
        with pytest.raises(ValueError, match="square"):
            freeness.test_r_cyclic(semicircular_model, [[y, y], [y]])

    def test_needs_scalar_d(self, diagonal_free_model):
        """Test a non-scalar D raises ValueError"""
        y = diagonal_free_model.variable(0)
        with pytest.raises(ValueError, match="scalar"):
            freeness.test_r_cyclic(diagonal_free_model, [[y]])


class TestSemicircularity:
    """Test scalar and B-valued semicircularity"""

    def test_scalar_semicircle(self):
        """Test moments 0, 1, 0, 2 match the standard semicircle"""
        verdict = freeness.test_semicircularity_scalar([0.0, 1.0, 0.0, 2.0])
        assert verdict.verdict == Verdict.PASS
        assert verdict.variance == 1.0
        assert verdict.expected == [0.0, 1.0, 0.0, 2.0]

    def test_scalar_variance_scaling(self):
        """Test m_{2k} = Catalan(k)·v^k with v = 2"""
        verdict = freeness.test_semicircularity_scalar([0.0, 2.0, 0.0, 8.0, 0.0, 40.0])
        assert verdict.verdict == Verdict.PASS

    def test_scalar_fourth_moment_off(self):
        """Test m_4 = 3 (Gaussian) is rejected with deviation 1"""
        verdict = freeness.test_semicircularity_scalar([0.0, 1.0, 0.0, 3.0])
        assert verdict.verdict == Verdict.FAIL
        assert verdict.max_deviation == pytest.approx(1.0)

    @pytest.mark.parametrize("moments", [[0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 2.0]])
    def test_scalar_invalid(self, moments):
        """Test short or degenerate moment lists raise ValueError"""
        with pytest.raises(ValueError):
            freeness.test_semicircularity_scalar(moments)

    def test_semicircle_moments(self):
        """Test the reference sequence"""
        assert freeness.semicircle_moments(1.0, 8) == [0.0, 1.0, 0.0, 2.0, 0.0, 5.0, 0.0, 14.0]

    def test_b_valued_scalar_covariance(self, semicircular_model, rng):
        """Test a standard semicircular is consistent"""
        y = semicircular_model.variable(0)
        report = freeness.test_semicircularity_b_valued(semicircular_model, y, max_order=6, coeff_draws=1, rng=rng)
        assert report.hypothesis_holds is True
        assert report.verdict == Verdict.PASS
        assert "E(X²) scalar: True" in report.notes[0]

    def test_b_valued_non_scalar_covariance(self, rng):
        """Test E(X²) = diag(1, 3) gives a non-semicircular scalar law, consistently"""
        model = CanonicalModel(semicircular_spec(2, {(0, 0): lambda b: np.diag([b[0, 0], 3 * b[1, 1]])}, K=6))
        report = freeness.test_semicircularity_b_valued(model, model.variable(0), max_order=4, coeff_draws=2, rng=rng)
        assert report.hypothesis_holds is True
        assert report.verdict == Verdict.PASS
        assert report.notes[0] == "E(X²) scalar: False; scalar law semicircular: False"
        assert report.families["scalar_moments"][4] == pytest.approx(2.0)

    def test_b_valued_not_semicircular(self, rng):
        """Test X = Y² is reported as not B-semicircular"""
        model = CanonicalModel(semicircular_spec(1, {(0, 0): lambda b: b}, K=8))
        y = model.variable(0)
        report = freeness.test_semicircularity_b_valued(model, y @ y, max_order=4, coeff_draws=1, rng=rng)
        assert report.hypothesis_holds is False
        assert report.verdict == Verdict.HYPOTHESIS_VIOLATED


class TestTower:
    """Test freeness along a tower D ⊂ C ⊂ B"""

    def test_diagonal_inside_full(self, mixing, rng):
        """Test lifting over the diagonal and then M_2 keeps factorization over the diagonal"""
        series = spec_from_tables(2, 1, 4, {(0, 0): mixing})
        chain = [SubalgebraSpec.diagonal(2), SubalgebraSpec.full(2)]
        report = freeness.test_free_over_tower(series, chain, max_order=3, coeff_draws=2, rng=rng)
        assert report.test == "tower"
        assert report.verdict == Verdict.PASS

    def test_strict_three_step_tower(self, rng):
        """Test ℂ ⊂ diagonal ⊂ M_3 with the trace covariance"""
        series = semicircular_spec(3, {(0, 0): lambda b: np.trace(b) / 3 * np.eye(3)}, K=6)
        chain = [SubalgebraSpec.scalars(3), SubalgebraSpec.diagonal(3), SubalgebraSpec.full(3)]
        report = freeness.test_free_over_tower(series, chain, max_order=4, coeff_draws=2, rng=rng)
        assert report.verdict == Verdict.PASS
        assert report.max_residual < 1e-10


    def test_empty_chain(self, mixing):
        """Test an empty chain raises ValueError"""
        with pytest.raises(ValueError):
            freeness.test_free_over_tower(spec_from_tables(2, 1, 4, {(0, 0): mixing}), [])

    def test_series_not_d_valued(self):
        """Test a series leaving D is rejected when lifting"""
        series = semicircular_spec(2, {(0, 0): lambda b: AVERAGE @ b @ AVERAGE}, K=4)
        with pytest.raises(SubalgebraError, match="not D-valued"):
            freeness.test_free_over_tower(series, [SubalgebraSpec.diagonal(2)])
