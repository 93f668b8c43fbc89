"""Tests for non-crossing partitions"""
import itertools

import pytest

from app.core import nc_core
from app.core.nc_core import (NCPartition, catalan, enumerate_nc, flatten, is_noncrossing, iter_nc,
                              nesting_forest)


def set_partitions(elements):
    if not elements:
        yield []
        return
    first, rest = elements[0], elements[1:]
    for partition in set_partitions(rest):
        yield [[first]] + partition
        for i in range(len(partition)):
            yield partition[:i] + [[first] + partition[i]] + partition[i + 1:]


def canonical(blocks):
    return tuple(sorted(tuple(sorted(b)) for b in blocks))


class TestEnumeration:
    """Test NC(n) enumeration"""

    @pytest.mark.parametrize("n,expected", [(2, 2), (3, 5), (4, 14), (5, 42), (6, 132), (7, 429),
                                            (8, 1430), (9, 4862)])
    def test_catalan_counts(self, n, expected):
        """Test |NC(n)| is the Catalan number"""
        assert catalan(n) == expected
        assert len(enumerate_nc(n)) == expected

    @pytest.mark.parametrize("n", range(1, 8))
    def test_brute_force_agreement(self, n):
        """Test enumeration equals the non-crossing filter over all set partitions"""
        brute = {canonical(p) for p in set_partitions(list(range(1, n + 1))) if is_noncrossing(p)}
        listed = [p.blocks for p in enumerate_nc(n)]
        assert len(listed) == len(set(listed))
        assert set(listed) == brute

    def test_frozen_order_small(self):
        """Test the documented order for n = 2 and n = 3"""
        assert [p.blocks for p in enumerate_nc(2)] == [((1, 2),), ((1,), (2,))]
        assert [p.blocks for p in enumerate_nc(3)] == [
            ((1, 2, 3),),
            ((1, 2), (3,)),
            ((1, 3), (2,)),
            ((1,), (2, 3)),
            ((1,), (2,), (3,)),
        ]

    def test_iter_matches_enumerate(self):
        """Test streaming and materialized enumeration agree"""
        assert tuple(iter_nc(6)) == enumerate_nc(6)

    def test_blocks_are_canonical(self):
        """Test blocks are sorted internally and by minima"""
        for p in enumerate_nc(6):
            assert p.blocks == canonical(p.blocks)

    def test_cap(self, monkeypatch):
        """Test n above the configured cap is rejected"""
        monkeypatch.setattr(nc_core.config, "NC_MAX_ORDER", 5)
        with pytest.raises(ValueError, match="cap"):
            enumerate_nc(6)

    @pytest.mark.parametrize("n", [0, -1])
    def test_invalid_n(self, n):
        """Test non-positive n is rejected"""
        with pytest.raises(ValueError):
            enumerate_nc(n)


class TestValidation:
    """Test is_noncrossing and NCPartition.from_blocks"""

    def test_crossing_detected(self):
        """Test {1,3},{2,4} crosses"""
        assert is_noncrossing([[1, 3], [2, 4]]) is False
        assert is_noncrossing([[1, 4], [2, 3]]) is True

    def test_not_a_partition(self):
        """Test gaps and overlaps raise ValueError"""
        with pytest.raises(ValueError):
            is_noncrossing([[1, 2], [2, 3]])
        with pytest.raises(ValueError):
            is_noncrossing([[1], [3]])

    def test_from_blocks_canonicalizes(self):
        """Test from_blocks sorts blocks"""
        p = NCPartition.from_blocks([[3, 2], [4, 1]])
        assert p.blocks == ((1, 4), (2, 3))
        assert p.n == 4

    def test_from_blocks_rejects_crossing(self):
        """Test from_blocks refuses crossing partitions"""
        with pytest.raises(ValueError, match="crossing"):
            NCPartition.from_blocks([[1, 3], [2, 4]])


class TestNesting:
    """Test nesting forests"""

    def test_nested_pair(self):
        """Test {1,4},{2,3} has root {1,4} with child {2,3} after position 1"""
        forest = nesting_forest(NCPartition.from_blocks([[1, 4], [2, 3]]))
        assert len(forest.roots) == 1
        root = forest.roots[0]
        assert root.block == (1, 4)
        assert [child.block for child in root.children] == [(2, 3)]
        assert root.positions == (1,)

    def test_outer_blocks(self):
        """Test side-by-side blocks are separate roots"""
        forest = nesting_forest(NCPartition.from_blocks([[1, 2], [3], [4, 5]]))
        assert [root.block for root in forest.roots] == [(1, 2), (3,), (4, 5)]

    def test_flatten_inverts(self):
        """Test flatten(nesting_forest(π)) = π on NC(6)"""
        for p in enumerate_nc(6):
            assert flatten(nesting_forest(p)) == p

    def test_child_positions(self):
        """Test children inside {1,3,6} land after positions 1 and 2"""
        forest = nesting_forest(NCPartition.from_blocks([[1, 3, 6], [2], [4, 5]]))
        root = forest.roots[0]
        assert dict(zip([c.block for c in root.children], root.positions)) == {(2,): 1, (4, 5): 2}
