"""
Moment and cumulant engines over an arbitrary operator-valued expectation.

The engine is generic over a *model*: any object providing

    expect(x, target)     -> value in the target algebra (B or D)
    fingerprint(x)        -> hashable key identifying x (memo key)

whose elements support `@` with each other and with target values, and whose
target values support `@`, `+` and `-`. Both `app.core.algebra.AlgebraContext`
and `app.core.fock.CanonicalModel` are models.

Cumulants are computed lazily on concrete argument tuples with the
first-block recursion

    κ(m_1..m_n) = E(m_1⋯m_n) − Σ_{V ∋ 1, V ≠ [n]} κ(m_{v_1}E(g_1), …, m_{v_s}) · E(tail)

which is the moment-cumulant formula summed over everything except the
block containing 1.
"""
import logging
import operator
import threading
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from app.config import config
from app.core.nc_core import NCPartition, NestingNode, enumerate_nc, nesting_forest
from app.core.schemas import Target

logger = logging.getLogger(__name__)

Multiply = Callable[[Any, Any], Any]
BalancedMap = Callable[[Sequence[Any]], Any]


def product(items: Sequence[Any], multiply: Multiply = operator.matmul) -> Any:
    return reduce(multiply, items)


# ---------------------------------------------------------------------------
# Multiplicative bracketings
# ---------------------------------------------------------------------------

def _evaluate_node(f: BalancedMap, node: NestingNode, args: Sequence[Any], multiply: Multiply) -> Any:
    inner: Dict[int, List[Any]] = {}
    for child, pos in zip(node.children, node.positions):
        inner.setdefault(pos, []).append(_evaluate_node(f, child, args, multiply))
    block_args = []
    for idx, element in enumerate(node.block, start=1):
        arg = args[element - 1]
        if idx in inner:
            arg = multiply(arg, product(inner[idx], multiply))
        block_args.append(arg)
    return f(block_args)


def bracketing(f: BalancedMap, partition: NCPartition, args: Sequence[Any],
               multiply: Multiply = operator.matmul) -> Any:
    """
    Evaluate the nested-bracket expression ⟨m_1,…,m_n⟩_π.

    Blocks nested between two elements of a parent block are evaluated first
    and multiplied onto the parent argument on the right; outermost blocks are
    multiplied left to right.

    Args:
        f: balanced map, called with the list of arguments of one block
        partition: π ∈ NC(n)
        args: m_1..m_n
        multiply: product used for arguments and values

    Raises:
        ValueError: if len(args) != π.n
    """
    if len(args) != partition.n:
        raise ValueError(f"Arity mismatch: partition of {partition.n} with {len(args)} arguments")
    forest = nesting_forest(partition)
    values = [_evaluate_node(f, root, args, multiply) for root in forest.roots]
    return product(values, multiply)


def moment_from_cumulants(series: BalancedMap, args: Sequence[Any],
                          multiply: Multiply = operator.matmul) -> Any:
    """Σ over NC(n) of the bracketings of `series` (the moment-cumulant formula)."""
    total = None
    for partition in enumerate_nc(len(args)):
        term = bracketing(series, partition, args, multiply)
        total = term if total is None else total + term
    return total


# ---------------------------------------------------------------------------
# Cumulants
# ---------------------------------------------------------------------------

@dataclass
class CumulantQuery:
    """
    X_{i_1} b_1, X_{i_2} b_2, …, X_{i_k}: variables with interleaved coefficients.
    """
    variables: Sequence[Any]
    coefficients: Sequence[Any] = ()
    target: Target = Target.B

    def __post_init__(self):
        if len(self.variables) == 0:
            raise ValueError("A cumulant query needs at least one variable")
        if len(self.coefficients) != len(self.variables) - 1:
            raise ValueError(
                f"Expected {len(self.variables) - 1} coefficients, got {len(self.coefficients)}"
            )

    def arguments(self) -> List[Any]:
        args = [x @ b for x, b in zip(self.variables, self.coefficients)]
        args.append(self.variables[-1])
        return args


@dataclass
class CumulantCache:
    """Memo of cumulant values keyed by (target, argument fingerprints)."""
    values: Dict[Hashable, Any] = field(default_factory=dict)
    hits: int = 0
    misses: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def get(self, key: Hashable) -> Optional[Any]:
        with self._lock:
            value = self.values.get(key)
            if value is None:
                self.misses += 1
            else:
                self.hits += 1
            return value

    def put(self, key: Hashable, value: Any) -> None:
        with self._lock:
            self.values.setdefault(key, value)

    def clear(self) -> None:
        with self._lock:
            self.values.clear()
            self.hits = self.misses = 0


class CumulantEngine:
    """
    Cumulants κ^B / κ^D of a model, memoized per engine instance.

    Args:
        model: object with expect(x, target) and fingerprint(x)
        max_order: largest admissible cumulant order (default from config)
    """

    def __init__(self, model: Any, max_order: Optional[int] = None):
        self.model = model
        self.max_order = max_order or config.CUMULANT_MAX_ORDER
        self.cache = CumulantCache()
        self._moments = CumulantCache()

    def _key(self, kind: str, args: Sequence[Any], target: Target) -> Hashable:
        return (kind, target.value) + tuple(self.model.fingerprint(a) for a in args)

    def moment(self, args: Sequence[Any], target: Target = Target.B) -> Any:
        """E(m_1⋯m_n) with memoization."""
        key = self._key("moment", args, target)
        value = self._moments.get(key)
        if value is None:
            value = self.model.expect(product(args), target)
            self._moments.put(key, value)
        return value

    def cumulant(self, args: Sequence[Any], target: Target = Target.B) -> Any:
        """
        κ(m_1,…,m_n) with values in the target algebra.

        Raises:
            ValueError: if n exceeds max_order or the enumeration cap
        """
        n = len(args)
        if n == 0:
            raise ValueError("Cumulants need at least one argument")
        if n > self.max_order or n > config.NC_MAX_ORDER:
            raise ValueError(f"Cumulant order {n} exceeds the configured maximum {self.max_order}")
        key = self._key("cumulant", args, target)
        cached = self.cache.get(key)
        if cached is not None:
            return cached

        value = self.moment(args, target)
        for size in range(1, n):
            for rest in combinations(range(1, n), size - 1):
                block = (0,) + rest
                value = value - self._first_block_term(args, block, target)
        self.cache.put(key, value)
        return value

    def _first_block_term(self, args: Sequence[Any], block: Tuple[int, ...], target: Target) -> Any:
        block_args = []
        for here, nxt in zip(block, block[1:]):
            arg = args[here]
            if nxt > here + 1:
                arg = arg @ self.moment(args[here + 1:nxt], target)
            block_args.append(arg)
        block_args.append(args[block[-1]])
        value = self.cumulant(block_args, target)
        if block[-1] < len(args) - 1:
            value = value @ self.moment(args[block[-1] + 1:], target)
        return value

    def query(self, q: CumulantQuery) -> Any:
        return self.cumulant(q.arguments(), q.target)

    def series(self, target: Target = Target.B) -> BalancedMap:
        """The cumulant family as a balanced map, usable with bracketing()."""
        return lambda block_args: self.cumulant(list(block_args), target)


def cumulant(model: Any, q: CumulantQuery, engine: Optional[CumulantEngine] = None) -> Any:
    """One-shot cumulant evaluation; pass an engine to share its memo."""
    engine = engine or CumulantEngine(model)
    return engine.query(q)


def cumulant_series(engine: CumulantEngine, variables: Sequence[Any], indices: Sequence[int],
                    coefficients: Sequence[Any], target: Target = Target.B) -> Any:
    """k_{i_1…i_k}(b_1,…,b_{k−1}) of the family `variables`."""
    chosen = [variables[i] for i in indices]
    return engine.query(CumulantQuery(chosen, coefficients, target))
