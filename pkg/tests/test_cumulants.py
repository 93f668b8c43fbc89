"""Tests for the moment-cumulant engine"""
import operator

import pytest
from numpy.testing import assert_allclose

from app.core.cumulants import (CumulantEngine, CumulantQuery, bracketing, cumulant, cumulant_series,
                                moment_from_cumulants, product)
from app.core.nc_core import NCPartition, enumerate_nc
from app.core.schemas import Target


class TestBracketing:
    """Test nested bracket evaluation"""

    def test_multiplicative_map_gives_product(self, rng):
        """Test ⟨m⟩_π = m_1⋯m_n for f = product, for every π"""
        mats = [rng.standard_normal((3, 3)) for _ in range(5)]
        full = product(mats)
        for partition in enumerate_nc(5):
            assert_allclose(bracketing(product, partition, mats), full, atol=1e-10)

    def test_nested_order(self):
        """Test inner blocks multiply onto the parent argument on the right"""
        calls = []

        def f(args):
            calls.append(list(args))
            return sum(args)

        value = bracketing(f, NCPartition.from_blocks([[1, 4], [2, 3]]), [1, 2, 3, 4], operator.mul)
        assert calls[0] == [2, 3]
        assert calls[1] == [1 * 5, 4]
        assert value == 9

    def test_arity_mismatch(self):
        """Test a partition of the wrong size raises ValueError"""
        with pytest.raises(ValueError, match="Arity"):
            bracketing(sum, NCPartition.from_blocks([[1, 2]]), [1, 2, 3], operator.mul)

    @pytest.mark.parametrize("n,expected", [(2, 1), (4, 2), (6, 5), (8, 14)])
    def test_pair_partitions_count(self, n, expected):
        """Test a pure second-order series counts non-crossing pairings"""
        def series(args):
            return 1.0 if len(args) == 2 else 0.0

        assert moment_from_cumulants(series, [1.0] * n, operator.mul) == expected


class TestCumulantEngine:
    """Test CumulantEngine on matrix contexts"""

    @pytest.mark.parametrize("target", [Target.B, Target.D])
    def test_round_trip(self, block_context, rng, target):
        """Test Σ_π bracketings of κ reproduce E(m_1⋯m_n) up to order 5"""
        engine = CumulantEngine(block_context, max_order=6)
        for n in range(1, 6):
            args = [block_context.random_element(rng) for _ in range(n)]
            moment = engine.moment(args, target)
            rebuilt = moment_from_cumulants(engine.series(target), args)
            assert_allclose(rebuilt.matrix, moment.matrix, atol=1e-10)

    def test_first_order_is_expectation(self, diagonal_context, rng):
        """Test κ(m) = E(m)"""
        m = diagonal_context.random_element(rng)
        engine = CumulantEngine(diagonal_context)
        assert_allclose(engine.cumulant([m], Target.D).matrix, diagonal_context.cond_exp_D(m).matrix)

    def test_unit_argument_vanishes(self, diagonal_context, rng):
        """Test κ of order ≥ 2 with an argument equal to 1 vanishes"""
        engine = CumulantEngine(diagonal_context)
        x, y = diagonal_context.random_element(rng), diagonal_context.random_element(rng)
        one = diagonal_context.one()
        for args in ([x, one], [one, x, y], [x, y, one, x]):
            assert engine.cumulant(args, Target.B).norm() < 1e-10

    def test_traciality(self, block_context, rng):
        """Test τ(κ_D(m_1,m_2,m_3)) = τ(κ_D(m_2,m_3,m_1))"""
        engine = CumulantEngine(block_context)
        m = [block_context.random_element(rng) for _ in range(3)]
        lhs = block_context.trace(engine.cumulant(m, Target.D))
        rhs = block_context.trace(engine.cumulant(m[1:] + m[:1], Target.D))
        assert abs(lhs - rhs) < 1e-10

    def test_balanced(self, diagonal_context, rng):
        """Test κ(m_1 b, m_2) = κ(m_1, b m_2) and κ(b m_1, m_2) = b κ(m_1, m_2)"""
        engine = CumulantEngine(diagonal_context)
        x, y = diagonal_context.random_element(rng), diagonal_context.random_element(rng)
        b = diagonal_context.random_coefficient(Target.B, rng)
        lhs = engine.cumulant([x @ b, y], Target.B)
        rhs = engine.cumulant([x, b @ y], Target.B)
        assert (lhs - rhs).norm() < 1e-10
        assert (engine.cumulant([b @ x, y], Target.B) - b @ engine.cumulant([x, y], Target.B)).norm() < 1e-10

    def test_memoization(self, diagonal_context, rng):
        """Test repeated queries are served from the cache"""
        engine = CumulantEngine(diagonal_context)
        args = [diagonal_context.random_element(rng) for _ in range(3)]
        first = engine.cumulant(args, Target.B)
        hits = engine.cache.hits
        second = engine.cumulant(args, Target.B)
        assert engine.cache.hits == hits + 1
        assert second is first

    def test_order_cap(self, diagonal_context):
        """Test orders above max_order raise ValueError"""
        engine = CumulantEngine(diagonal_context, max_order=3)
        with pytest.raises(ValueError, match="exceeds"):
            engine.cumulant([diagonal_context.one()] * 4, Target.B)

    def test_empty_arguments(self, diagonal_context):
        """Test κ() raises ValueError"""
        with pytest.raises(ValueError):
            CumulantEngine(diagonal_context).cumulant([], Target.B)


class TestCumulantQuery:
    """Test interleaved coefficient queries"""

    def test_coefficient_count(self, diagonal_context):
        """Test k variables need k − 1 coefficients"""
        one = diagonal_context.one()
        with pytest.raises(ValueError, match="coefficients"):
            CumulantQuery([one, one], [])
        with pytest.raises(ValueError):
            CumulantQuery([], [])

    def test_arguments(self, diagonal_context, rng):
        """Test arguments are X_1 b_1, …, X_k"""
        x = diagonal_context.random_element(rng)
        b = diagonal_context.random_coefficient(Target.B, rng)
        args = CumulantQuery([x, x], [b]).arguments()
        assert_allclose(args[0].matrix, (x @ b).matrix)
        assert args[1] is x


class TestCanonicalModelCumulants:
    """Test cumulants recovered from Fock-model moments"""

    def test_semicircular_cumulants(self, semicircular_model):
        """Test κ_1 = 0, κ_2 = 1 and κ_3 = κ_4 = 0 for the standard semicircular"""
        engine = CumulantEngine(semicircular_model)
        y = semicircular_model.variable(0)
        assert abs(engine.cumulant([y], Target.B)[0, 0]) < 1e-12
        assert engine.cumulant([y, y], Target.B)[0, 0] == pytest.approx(1.0)
        assert abs(engine.cumulant([y] * 3, Target.B)[0, 0]) < 1e-12
        assert abs(engine.cumulant([y] * 4, Target.B)[0, 0]) < 1e-12

    def test_cumulant_series_matches_spec(self, diagonal_free_model, rng):
        """Test k_00(b) computed from moments equals the defining series"""
        engine = CumulantEngine(diagonal_free_model)
        b = rng.standard_normal((2, 2))
        value = cumulant_series(engine, diagonal_free_model.variables(), [0, 0], [b])
        assert_allclose(value, diagonal_free_model.spec.evaluate((0, 0), (b,)), atol=1e-12)

    def test_one_shot_cumulant(self, free_pair_model):
        """Test cumulant() without an engine and mixed free cumulants vanishing"""
        y0, y1 = free_pair_model.variables()
        value = cumulant(free_pair_model, CumulantQuery([y0, y1], [free_pair_model.one()]))
        assert abs(value[0, 0]) < 1e-12
