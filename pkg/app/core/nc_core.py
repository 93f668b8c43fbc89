"""
Non-crossing partitions: enumeration, validation and nesting structure.

Partitions of {1..n} are stored canonically: blocks sorted internally and
ordered by their minima.

Enumeration order (frozen): the block containing 1 is built first. For
NC(n) we iterate over the successor j of 1 inside its block, j = 2..n
ascending, and put "1 is a singleton" last. Inside one choice of j, the
gap {2..j-1} varies slowest and the remainder {j..n} (whose first block is
merged with 1) varies fastest, both recursively in the same order. So
NC(2) = [{1,2}], [{1},{2}].
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, List, Sequence, Tuple

from app.config import config

logger = logging.getLogger(__name__)

Block = Tuple[int, ...]
Shape = Tuple[Block, ...]

# NC(10) has 16796 elements; larger shapes are streamed instead of cached
_CACHE_LIMIT = 10


@dataclass(frozen=True)
class NCPartition:
    n: int
    blocks: Tuple[Block, ...]

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]]) -> "NCPartition":
        """Build a validated, canonical partition from arbitrary block lists."""
        canonical = _canonical(blocks)
        n = _check_set_partition(canonical)
        if not is_noncrossing(canonical):
            raise ValueError(f"Partition {canonical} is crossing")
        return cls(n=n, blocks=canonical)

    def as_lists(self) -> List[List[int]]:
        return [list(b) for b in self.blocks]

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class NestingNode:
    """
    A block of the partition together with the blocks nested directly inside it.

    `positions[i]` is the 1-based index of the parent element after which
    `children[i]` sits.
    """
    block: Block
    children: Tuple["NestingNode", ...] = ()
    positions: Tuple[int, ...] = ()


@dataclass(frozen=True)
class NestingForest:
    n: int
    roots: Tuple[NestingNode, ...] = field(default_factory=tuple)


def _canonical(blocks: Sequence[Sequence[int]]) -> Tuple[Block, ...]:
    return tuple(sorted(tuple(sorted(int(x) for x in b)) for b in blocks))


def _check_set_partition(blocks: Tuple[Block, ...]) -> int:
    if not blocks or any(len(b) == 0 for b in blocks):
        raise ValueError("A partition needs at least one block and no empty blocks")
    elements = [x for b in blocks for x in b]
    n = len(elements)
    if sorted(elements) != list(range(1, n + 1)):
        raise ValueError(f"Blocks {blocks} do not partition {{1..{n}}} (gap or overlap)")
    return n


def is_noncrossing(blocks: Sequence[Sequence[int]]) -> bool:
    """
    True iff no a<b<c<d has a,c in one block and b,d in another.

    Raises:
        ValueError: if the blocks are not a set partition of {1..n}.
    """
    canonical = _canonical(blocks)
    _check_set_partition(canonical)
    owner = {x: idx for idx, b in enumerate(canonical) for x in b}
    for b in canonical:
        for lo, hi in zip(b, b[1:]):
            for x in range(lo + 1, hi):
                other = canonical[owner[x]]
                if other[0] < lo or other[-1] > hi:
                    return False
    return True


def _shift(shape: Shape, offset: int) -> Shape:
    return tuple(tuple(x + offset for x in b) for b in shape)


def _iter_shapes(n: int) -> Iterator[Shape]:
    """Partitions of {0..n-1} in the frozen order."""
    if n == 0:
        yield ()
        return
    for j in range(1, n):
        for gap in _shapes(j - 1):
            gap_blocks = _shift(gap, 1)
            for rest in _shapes(n - j):
                rest_blocks = _shift(rest, j)
                head = (0,) + rest_blocks[0]
                yield tuple(sorted((head,) + gap_blocks + rest_blocks[1:]))
    for rest in _shapes(n - 1):
        yield ((0,),) + _shift(rest, 1)


@lru_cache(maxsize=None)
def _cached_shapes(n: int) -> Tuple[Shape, ...]:
    return tuple(_iter_shapes(n))


def _shapes(n: int):
    return _cached_shapes(n) if n <= _CACHE_LIMIT else _iter_shapes(n)


def check_order(n: int) -> None:
    """Raises ValueError unless 1 <= n <= config.NC_MAX_ORDER."""
    cap = config.NC_MAX_ORDER
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if n > cap:
        raise ValueError(f"n={n} exceeds the non-crossing enumeration cap {cap}")


def iter_nc(n: int) -> Iterator[NCPartition]:
    """Stream NC(n) in the frozen order without materializing it."""
    check_order(n)
    for shape in _shapes(n):
        yield NCPartition(n=n, blocks=_shift(shape, 1))


@lru_cache(maxsize=16)
def _enumerate(n: int) -> Tuple[NCPartition, ...]:
    return tuple(iter_nc(n))


def enumerate_nc(n: int) -> Tuple[NCPartition, ...]:
    """
    Every non-crossing partition of {1..n} exactly once, in the frozen order.

    Args:
        n: ground-set size, 1 <= n <= config.NC_MAX_ORDER

    Returns:
        Tuple of NCPartition of length Catalan(n)
    """
    check_order(n)
    if n > _CACHE_LIMIT:
        logger.debug(f"Materializing NC({n}) without caching")
        return tuple(iter_nc(n))
    return _enumerate(n)


def catalan(n: int) -> int:
    c = 1
    for i in range(n):
        c = c * 2 * (2 * i + 1) // (i + 2)
    return c


def _forest_between(lo: int, hi: int, owner, blocks) -> Tuple[Tuple[NestingNode, ...], int]:
    nodes = []
    pos = lo
    while pos <= hi:
        block = blocks[owner[pos]]
        children, positions = [], []
        for idx, (a, b) in enumerate(zip(block, block[1:]), start=1):
            inner = _forest_between(a + 1, b - 1, owner, blocks)[0]
            children.extend(inner)
            positions.extend([idx] * len(inner))
        nodes.append(NestingNode(block=block, children=tuple(children), positions=tuple(positions)))
        pos = block[-1] + 1
    return tuple(nodes), pos


def nesting_forest(partition: NCPartition) -> NestingForest:
    """
    Decompose a partition into outermost blocks and their nested children.

    Example: {{1,4},{2,3}} gives the root {1,4} with child {2,3} after
    parent position 1.
    """
    owner = {x: idx for idx, b in enumerate(partition.blocks) for x in b}
    roots, _ = _forest_between(1, partition.n, owner, partition.blocks)
    return NestingForest(n=partition.n, roots=roots)


def flatten(forest: NestingForest) -> NCPartition:
    blocks: List[Block] = []
    stack = list(forest.roots)
    while stack:
        node = stack.pop()
        blocks.append(node.block)
        stack.extend(node.children)
    return NCPartition(n=forest.n, blocks=tuple(sorted(blocks)))
