# preorder.py: The node preorder as the greatest fixed point of the inductive neighbor-matching operator.
from dataclasses import dataclass, field
from typing import Callable, Collection, Dict, List, Optional, Sequence, Set, Tuple, Union
import logging

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from graph_core import Graph, degree_vector
from refinement import Partition
from utils.color_utils import generate_color_palette, get_contrast_color

logger = logging.getLogger(__name__)

# Either a boolean matrix indexed [dominator][dominated] or a set of (dominator, dominated) pairs.
Relation = Union[np.ndarray, Sequence[Sequence[bool]], Collection[Tuple[int, int]]]

STRATEGIES = ('worklist', 'sweep')


@dataclass(frozen=True, eq=False)
class PreorderRelation:
    """rel[i][j] is True iff i dominates j."""
    n: int
    rel: np.ndarray
    iterations: int = 0

    def __post_init__(self):
        if self.rel.shape != (self.n, self.n) or self.rel.dtype != bool:
            raise PreorderError(f"rel must be a boolean {self.n}x{self.n} matrix")
        rel = self.rel.copy()
        rel.setflags(write=False)
        object.__setattr__(self, 'rel', rel)

    def dominates(self, i: int, j: int) -> bool:
        return bool(self.rel[i, j])

    def equivalent(self, i: int, j: int) -> bool:
        return bool(self.rel[i, j] and self.rel[j, i])

    def pairs(self) -> List[Tuple[int, int]]:
        """Related pairs (i, j), i != j, in lexicographic order."""
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.rel)) if i != j]

    def to_json(self) -> Dict:
        return {'n': self.n, 'pairs': [[i, j] for i, j in self.pairs()]}

    @classmethod
    def from_json(cls, data: Dict) -> 'PreorderRelation':
        try:
            n = int(data['n'])
            rel = np.eye(n, dtype=bool)
            for i, j in data['pairs']:
                i, j = int(i), int(j)
                if not (0 <= i < n and 0 <= j < n):
                    raise IndexError(f"pair ({i}, {j}) is outside 0..{n - 1}")
                rel[i, j] = True
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise PreorderError(f"Invalid relation JSON: {e}") from e
        return cls(n, rel)


@dataclass(frozen=True)
class Condensation:
    """Equivalence classes with the transitively reduced strict order between them."""
    partition: Partition
    edges: Tuple[Tuple[int, int], ...] = field(default=())

    def to_dot(self, name: str = "condensation") -> str:
        palette = generate_color_palette(self.partition.K)
        lines = [f"digraph {name} {{", "    rankdir=TB;", "    node [shape=box, style=filled];"]
        for c, members in enumerate(self.partition.classes):
            color = palette[f'class_{c}']
            label = "{" + ",".join(str(i) for i in members) + "}"
            lines.append(f'    c{c} [label="{label}", fillcolor="{color}", fontcolor="{get_contrast_color(color)}"];')
        for a, b in self.edges:
            lines.append(f"    c{a} -> c{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _relation_lookup(R: Relation) -> Callable[[int, int], bool]:
    if isinstance(R, np.ndarray):
        return lambda a, b: bool(R[a, b])
    if isinstance(R, (set, frozenset, dict)):
        return lambda a, b: (a, b) in R
    return lambda a, b: bool(R[a][b])


def _match_sources(sources: Sequence[int], targets: Sequence[int],
                   related: Callable[[int, int], bool]) -> Optional[np.ndarray]:
    """Position in targets matched to each source, or None when some source stays unmatched."""
    if len(sources) == 0:
        return np.zeros(0, dtype=np.int64)
    if len(sources) > len(targets):
        return None
    coord = np.array(
        [(a, b) for a, k in enumerate(sources) for b, t in enumerate(targets) if related(t, k)],
        dtype=np.int64,
    ).reshape(-1, 2)
    if len(np.unique(coord[:, 0])) < len(sources):
        return None
    biadjacency = csr_matrix(
        (np.ones(coord.shape[0]), (coord[:, 0], coord[:, 1])),
        shape=(len(sources), len(targets)),
    )
    matched = maximum_bipartite_matching(biadjacency, perm_type='column')
    if np.any(matched < 0):
        return None
    return matched


def injective_cover_exists(sources: Sequence[int], targets: Sequence[int], R: Relation) -> bool:
    """True iff some injective f: sources -> targets has (f(k), k) in R for every source k."""
    return _match_sources(sources, targets, _relation_lookup(R)) is not None


def apply_operator(g: Graph, rel: np.ndarray) -> np.ndarray:
    """One application of the inductive operator: pairs (i, j) with a dominating neighbor injection."""
    result = np.zeros((g.n, g.n), dtype=bool)
    for i in range(g.n):
        for j in range(g.n):
            result[i, j] = injective_cover_exists(g.adjacency[j], g.adjacency[i], rel)
    return result


def is_inductive(g: Graph, rel: np.ndarray) -> bool:
    """True when rel is a fixed point of the inductive operator."""
    return bool(np.array_equal(apply_operator(g, np.asarray(rel, dtype=bool)), rel))


def is_supported(g: Graph, rel: np.ndarray) -> bool:
    """True when every related pair has a dominating neighbor injection inside rel."""
    rel = np.asarray(rel, dtype=bool)
    return bool(np.all(apply_operator(g, rel)[rel]))


def max_inductive_preorder(g: Graph, strategy: str = 'worklist') -> PreorderRelation:
    """Greatest fixed point of the inductive operator, i.e. the node preorder.

    Iterates R_{t+1} = Phi(R_t) & R_t from the degree-dominance relation.
    Every pass checks pairs against the frozen R_t and applies its removals
    at once, so both strategies visit the same sequence of relations. The
    worklist strategy rechecks only pairs (i, j) whose neighbors (u, v) lost
    their relation in the previous pass; sweep rechecks everything.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"Unknown strategy '{strategy}'; expected one of {STRATEGIES}")
    if g.n == 0:
        return PreorderRelation(0, np.zeros((0, 0), dtype=bool), 0)

    degrees = degree_vector(g)
    rel = degrees[:, None] >= degrees[None, :]
    adjacency = g.adjacency
    pending: Set[Tuple[int, int]] = {(int(i), int(j)) for i, j in zip(*np.nonzero(rel)) if i != j}
    removing_passes = 0

    while pending:
        removed = [
            (i, j) for i, j in sorted(pending)
            if not injective_cover_exists(adjacency[j], adjacency[i], rel)
        ]
        if not removed:
            break
        for i, j in removed:
            rel[i, j] = False
        removing_passes += 1
        logger.debug(f"Fixed-point pass {removing_passes}: removed {len(removed)} pairs")
        if strategy == 'sweep':
            pending = {(int(i), int(j)) for i, j in zip(*np.nonzero(rel)) if i != j}
        else:
            pending = {
                (a, b)
                for u, v in removed
                for a in adjacency[u]
                for b in adjacency[v]
                if a != b and rel[a, b]
            }

    result = PreorderRelation(g.n, rel, removing_passes + 1)
    check_preorder(result, g)
    logger.info(f"Preorder computed: n={g.n}, related pairs={len(result.pairs())}, passes={result.iterations}")
    return result


def check_preorder(r: PreorderRelation, g: Optional[Graph] = None) -> None:
    """Raise PreorderInvariantError naming the first violated preorder axiom."""
    rel = r.rel
    if not np.all(np.diag(rel)):
        raise PreorderInvariantError("Relation is not reflexive")
    composed = (rel.astype(np.int64) @ rel.astype(np.int64)) > 0
    if np.any(composed & ~rel):
        i, j = (int(x) for x in np.argwhere(composed & ~rel)[0])
        raise PreorderInvariantError(f"Relation is not transitive: ({i}, {j}) missing")
    if g is not None:
        degrees = degree_vector(g)
        if np.any(rel & (degrees[:, None] < degrees[None, :])):
            raise PreorderInvariantError("Relation relates a node to one of larger degree")


def equivalence_classes(r: PreorderRelation) -> Partition:
    check_preorder(r)
    mutual = r.rel & r.rel.T
    return Partition.from_labels([int(np.argmax(mutual[i])) for i in range(r.n)])


def condensation(r: PreorderRelation) -> Condensation:
    """Transitively reduced order on equivalence classes (edge a -> b: class a dominates class b)."""
    partition = equivalence_classes(r)
    representatives = [members[0] for members in partition.classes]
    order = nx.DiGraph()
    order.add_nodes_from(range(partition.K))
    for a, ra in enumerate(representatives):
        for b, rb in enumerate(representatives):
            if a != b and r.rel[ra, rb]:
                order.add_edge(a, b)
    reduced = nx.transitive_reduction(order)
    return Condensation(partition, tuple(sorted(reduced.edges())))


def dominating_neighbor_map(g: Graph, r: PreorderRelation, i: int, j: int) -> Optional[Dict[int, int]]:
    """Injective f: N(j) -> N(i) with f(k) dominating k, or None when i does not dominate j."""
    sources, targets = g.neighbors(j), g.neighbors(i)
    matched = _match_sources(sources, targets, r.dominates)
    if matched is None:
        return None
    return {int(k): int(targets[b]) for k, b in sorted(zip(sources, matched))}


def relation_from_partition(p: Partition) -> np.ndarray:
    """Equivalence relation (as a boolean matrix) whose classes are those of p."""
    labels = np.array(p.class_of, dtype=np.int64)
    return labels[:, None] == labels[None, :]


class PreorderError(Exception):
    """Base exception for preorder computations."""
    pass

class PreorderInvariantError(PreorderError):
    """Raised when a relation violates reflexivity, transitivity or degree consistency."""
    pass
