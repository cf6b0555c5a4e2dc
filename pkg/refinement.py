# refinement.py: Coarsest equitable partition by color refinement, iterated degrees and quotient matrices.
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from graph_core import Graph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Partition:
    """Node coloring with classes numbered by their smallest member."""
    class_of: Tuple[int, ...]
    classes: Tuple[Tuple[int, ...], ...]
    passes: int = field(default=0, compare=False)

    def __post_init__(self):
        seen = 0
        for c, members in enumerate(self.classes):
            if not members:
                raise PartitionError(f"Class {c} is empty")
            for i in members:
                if not 0 <= i < len(self.class_of) or self.class_of[i] != c:
                    raise PartitionError(f"class_of and classes disagree on node {i}")
            seen += len(members)
        if seen != len(self.class_of):
            raise PartitionError("Every node must belong to exactly one class")
        if any(self.classes[c][0] > self.classes[c + 1][0] for c in range(len(self.classes) - 1)):
            raise PartitionError("Classes are not in canonical order")

    @property
    def K(self) -> int:
        return len(self.classes)

    @property
    def n(self) -> int:
        return len(self.class_of)

    @property
    def sizes(self) -> List[int]:
        return [len(members) for members in self.classes]

    @classmethod
    def from_labels(cls, labels: Sequence[Hashable], passes: int = 0) -> 'Partition':
        """Canonical partition grouping nodes with equal labels."""
        ids: Dict[Hashable, int] = {}
        class_of: List[int] = []
        for label in labels:
            class_of.append(ids.setdefault(label, len(ids)))
        classes: List[List[int]] = [[] for _ in ids]
        for i, c in enumerate(class_of):
            classes[c].append(i)
        return cls(tuple(class_of), tuple(tuple(m) for m in classes), passes)

    @classmethod
    def discrete(cls, n: int) -> 'Partition':
        return cls.from_labels(range(n))

    @classmethod
    def trivial(cls, n: int) -> 'Partition':
        return cls.from_labels([0] * n)

    def to_json(self) -> Dict:
        return {'K': self.K, 'class_of': list(self.class_of)}

    @classmethod
    def from_json(cls, data: Dict) -> 'Partition':
        try:
            partition = cls.from_labels([int(c) for c in data['class_of']])
        except (KeyError, TypeError, ValueError) as e:
            raise PartitionError(f"Invalid partition JSON: {e}") from e
        if 'K' in data and int(data['K']) != partition.K:
            raise PartitionError(f"Partition JSON declares K={data['K']} but has {partition.K} classes")
        return partition


NestedDegree = Union[int, Tuple['NestedDegree', ...]]


@dataclass(frozen=True)
class IteratedDegree:
    """Depth-truncated iterated degree; multisets are sorted tuples, so == is multiset equality."""
    depth: int
    value: NestedDegree

    def __str__(self) -> str:
        return _render(self.value)


def _render(value: NestedDegree) -> str:
    if isinstance(value, int):
        return str(value)
    return "{" + ",".join(_render(v) for v in value) + "}"


def color_refinement(g: Graph) -> Partition:
    """Coarsest equitable partition.

    Starts from a single class and splits by (class, multiset of neighbor
    classes) until a pass leaves the class count unchanged.
    """
    current = Partition.trivial(g.n)
    passes = 0
    while True:
        signatures = [
            (current.class_of[i], tuple(sorted(current.class_of[k] for k in g.adjacency[i])))
            for i in range(g.n)
        ]
        refined = Partition.from_labels(signatures)
        if refined.K == current.K:
            break
        passes += 1
        logger.debug(f"Refinement pass {passes}: {current.K} -> {refined.K} classes")
        current = refined
    return Partition(current.class_of, current.classes, passes)


def iterated_degree(g: Graph, i: int, depth: int) -> IteratedDegree:
    """Explicit nested iterated degree of node i.

    The value grows like degree**depth; for large depths compare nodes with
    iterated_degree_codes instead.
    """
    g.neighbors(i)
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    level: List[NestedDegree] = [len(row) for row in g.adjacency]
    for _ in range(depth):
        level = [tuple(sorted(level[v] for v in g.adjacency[u])) for u in range(g.n)]
    return IteratedDegree(depth, level[i])


def iterated_degree_codes(g: Graph, depth: int) -> List[int]:
    """Integer code per node; equal codes iff equal depth-truncated iterated degrees.

    Depth-k values are interned level by level, so a depth-(k+1) value is the
    sorted tuple of its neighbors' depth-k codes.
    """
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    codes = [len(row) for row in g.adjacency]
    for _ in range(depth):
        table: Dict[Tuple[int, ...], int] = {}
        keys = [tuple(sorted(codes[v] for v in g.adjacency[u])) for u in range(g.n)]
        for key in sorted(set(keys)):
            table[key] = len(table)
        codes = [table[key] for key in keys]
    return codes


def iterated_degree_partition(g: Graph, depth: Optional[int] = None) -> Partition:
    return Partition.from_labels(iterated_degree_codes(g, g.n if depth is None else depth))


def _check_sizes(g: Graph, p: Partition) -> None:
    if p.n != g.n:
        raise PartitionMismatchError(f"Partition covers {p.n} nodes but the graph has {g.n}")


def _class_counts(g: Graph, p: Partition) -> np.ndarray:
    """n x K matrix whose row i is s(i), the neighbor count of i in each class."""
    membership = np.zeros((g.n, p.K), dtype=np.int64)
    membership[np.arange(g.n), np.array(p.class_of, dtype=np.int64)] = 1
    return np.asarray(g.adjacency_matrix() @ membership).astype(np.int64)


def is_equitable(g: Graph, p: Partition) -> bool:
    _check_sizes(g, p)
    if g.n == 0:
        return True
    counts = _class_counts(g, p)
    return all(
        bool(np.all(counts[list(members)] == counts[members[0]]))
        for members in p.classes
    )


def quotient_matrix(g: Graph, p: Partition) -> Tuple[np.ndarray, np.ndarray]:
    """(S, sizes) with S[c][c'] the number of class-c' neighbors of any node in class c."""
    if not is_equitable(g, p):
        raise NotEquitableError("quotient_matrix needs an equitable partition")
    counts = _class_counts(g, p)
    S = np.array([counts[members[0]] for members in p.classes], dtype=np.int64).reshape(p.K, p.K)
    return S, np.array(p.sizes, dtype=np.int64)


def quotient_to_json(S: np.ndarray, sizes: np.ndarray) -> Dict:
    return {'K': int(len(sizes)), 'sizes': sizes.tolist(), 'S': S.tolist()}


def is_coarser_or_equal(p: Partition, q: Partition) -> bool:
    """True when every class of q lies inside a single class of p."""
    if p.n != q.n:
        raise PartitionMismatchError(f"Partitions cover {p.n} and {q.n} nodes")
    return all(len({p.class_of[i] for i in members}) == 1 for members in q.classes)


class PartitionError(Exception):
    """Base exception for partition-related errors."""
    pass

class PartitionMismatchError(PartitionError):
    """Raised when a partition does not cover the graph's node set."""
    pass

class NotEquitableError(PartitionError):
    """Raised when an operation requires an equitable partition."""
    pass
