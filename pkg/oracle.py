# oracle.py: Brute-force references for tests and the verify command.
#
# Adapted dominating maps are searched directly on walk sets, and automorphism
# orbits come from exhaustive permutation search. Neither is meant to scale.
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple
import logging

import numpy as np

from graph_core import Graph
from refinement import Partition

logger = logging.getLogger(__name__)

DEFAULT_PATH_BOUND = 10**6
DEFAULT_MAX_NODES = 12

Walk = Tuple[int, ...]


@dataclass(frozen=True)
class PathSet:
    """All walks with `length` steps starting at `origin`, sorted lexicographically.

    Walks may revisit nodes; only consecutive entries need to be adjacent.
    """
    origin: int
    length: int
    paths: Tuple[Walk, ...]

    def __len__(self) -> int:
        return len(self.paths)

    def prefixes(self, m: int) -> List[Walk]:
        """Distinct projections onto the first m+1 coordinates, in order."""
        return sorted({p[:m + 1] for p in self.paths})


def enumerate_paths(g: Graph, i: int, length: int, bound: int = DEFAULT_PATH_BOUND) -> PathSet:
    g.neighbors(i)
    if length < 0:
        raise ValueError(f"Walk length must be >= 0, got {length}")
    walks: List[Walk] = [(i,)]
    for step in range(length):
        total = sum(len(g.adjacency[w[-1]]) for w in walks)
        if total > bound:
            raise PathExplosionError(f"{total} walks of length {step + 1} from node {i} exceed the bound {bound}")
        walks = [w + (k,) for w in walks for k in g.adjacency[w[-1]]]
    return PathSet(i, length, tuple(walks))


def _children(paths: PathSet) -> Dict[Walk, List[Walk]]:
    """Prefix tree of a walk set: each prefix mapped to its one-step extensions."""
    tree: Dict[Walk, List[Walk]] = {}
    for m in range(paths.length):
        for prefix in paths.prefixes(m + 1):
            tree.setdefault(prefix[:-1], []).append(prefix)
    return tree


def find_adapted_dominating_map(g: Graph, j: int, i: int, length: int,
                                bound: int = DEFAULT_PATH_BOUND) -> Optional[Dict[Walk, Walk]]:
    """An injective, prefix-consistent, degree-dominating map P_length(j) -> P_length(i), or None.

    Prefix consistency makes the map an embedding of the walk tree of j into
    that of i, so the search assigns the children of each matched prefix
    injectively and backtracks on failure.
    """
    source, target = enumerate_paths(g, j, length, bound), enumerate_paths(g, i, length, bound)
    if len(source) > len(target):
        return None
    source_tree, target_tree = _children(source), _children(target)
    degree = [len(row) for row in g.adjacency]
    cache: Dict[Tuple[Walk, Walk], Optional[Dict[Walk, Walk]]] = {}

    def embed(p: Walk, q: Walk) -> Optional[Dict[Walk, Walk]]:
        key = (p, q)
        if key in cache:
            return cache[key]
        result: Optional[Dict[Walk, Walk]] = None
        if degree[q[-1]] >= degree[p[-1]]:
            if len(p) == length + 1:
                result = {p: q}
            else:
                kids_p, kids_q = source_tree.get(p, []), target_tree.get(q, [])
                if len(kids_p) <= len(kids_q):
                    result = assign(kids_p, kids_q, 0, set())
        cache[key] = result
        return result

    def assign(kids_p: List[Walk], kids_q: List[Walk], k: int, used: set) -> Optional[Dict[Walk, Walk]]:
        if k == len(kids_p):
            return {}
        for candidate in kids_q:
            if candidate in used:
                continue
            sub = embed(kids_p[k], candidate)
            if sub is None:
                continue
            used.add(candidate)
            rest = assign(kids_p, kids_q, k + 1, used)
            used.discard(candidate)
            if rest is not None:
                rest.update(sub)
                return rest
        return None

    tree_map = embed((j,), (i,))
    if tree_map is None:
        return None
    return {p: q for p, q in tree_map.items() if len(p) == length + 1}


def is_adapted_dominating_map(g: Graph, f: Dict[Walk, Walk], j: int, i: int, length: int) -> bool:
    """Check a walk map against the definition: domain, injectivity, both prefix implications, degrees."""
    source = enumerate_paths(g, j, length)
    target = set(enumerate_paths(g, i, length).paths)
    if set(f) != set(source.paths) or not all(q in target for q in f.values()):
        return False
    if len(set(f.values())) != len(f):
        return False
    degree = [len(row) for row in g.adjacency]
    for p, q in f.items():
        if any(degree[b] < degree[a] for a, b in zip(p, q)):
            return False
    walks = list(source.paths)
    for a, p in enumerate(walks):
        for p_other in walks[a + 1:]:
            for m in range(length + 1):
                if (p[:m + 1] == p_other[:m + 1]) != (f[p][:m + 1] == f[p_other][:m + 1]):
                    return False
    return True


def adapted_dominating_map_exists(g: Graph, j: int, i: int, length: int,
                                  bound: int = DEFAULT_PATH_BOUND) -> bool:
    return find_adapted_dominating_map(g, j, i, length, bound) is not None


def _check_size(g: Graph, max_nodes: int) -> None:
    if g.n > max_nodes:
        raise OracleSizeError(f"Brute-force automorphism search is limited to {max_nodes} nodes (graph has {g.n})")


def _extend(g: Graph, order: List[int], image: Dict[int, int], used: List[bool]) -> Iterator[Dict[int, int]]:
    """Yield every adjacency-preserving completion of a partial vertex map, in order."""
    if len(image) == len(order):
        yield dict(image)
        return
    u = order[len(image)]
    for v in range(g.n):
        if used[v] or len(g.adjacency[v]) != len(g.adjacency[u]):
            continue
        if any((w in g.adjacency[u]) != (image[w] in g.adjacency[v]) for w in image):
            continue
        image[u] = v
        used[v] = True
        yield from _extend(g, order, image, used)
        used[v] = False
        del image[u]


def automorphisms(g: Graph, max_nodes: int = DEFAULT_MAX_NODES) -> Iterator[Tuple[int, ...]]:
    """Every automorphism exactly once, as the tuple of images of 0..n-1."""
    _check_size(g, max_nodes)
    for image in _extend(g, list(range(g.n)), {}, [False] * g.n):
        yield tuple(image[u] for u in range(g.n))


def _maps_to(g: Graph, i: int, j: int) -> bool:
    order = [i] + [u for u in range(g.n) if u != i]
    used = [False] * g.n
    used[j] = True
    return next(_extend(g, order, {i: j}, used), None) is not None


def automorphism_orbits(g: Graph, max_nodes: int = DEFAULT_MAX_NODES) -> Partition:
    """Orbit partition of the automorphism group.

    For each pair of not-yet-merged nodes of equal degree the search looks
    for one automorphism sending one to the other; orbits are closed under
    the group, so merges are transitive.
    """
    _check_size(g, max_nodes)
    label = list(range(g.n))
    for i in range(g.n):
        if label[i] != i:
            continue
        for j in range(i + 1, g.n):
            if label[j] == j and len(g.adjacency[i]) == len(g.adjacency[j]) and _maps_to(g, i, j):
                label[j] = i
    orbits = Partition.from_labels(label)
    logger.debug(f"Automorphism orbits: n={g.n}, K={orbits.K}")
    return orbits


def orbit_relation(g: Graph, max_nodes: int = DEFAULT_MAX_NODES) -> np.ndarray:
    labels = np.array(automorphism_orbits(g, max_nodes).class_of, dtype=np.int64)
    return labels[:, None] == labels[None, :]


class OracleError(Exception):
    """Base exception for brute-force oracle errors."""
    pass

class PathExplosionError(OracleError):
    """Raised when a walk set would exceed the enumeration bound."""
    pass

class OracleSizeError(OracleError):
    """Raised when a graph is too large for exhaustive automorphism search."""
    pass
