# graph_core.py: Immutable simple undirected graphs, edge-list/JSON parsing and named generators.
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union
import json
import logging
import re

import networkx as nx
import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)

Number = Union[int, float]

_HEADER = re.compile(r"^#\s*n\s*=\s*([0-9]+)\s*$")

# Frucht graph: 7-cycle 0..6 plus five more nodes; 3-regular, trivial automorphism group.
FRUCHT_EDGES: Tuple[Tuple[int, int], ...] = (
    (0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (0, 6),
    (0, 7), (1, 7), (2, 8), (3, 9), (4, 9), (5, 10), (6, 10),
    (7, 11), (8, 11), (8, 9), (10, 11),
)

# Smallest asymmetric tree: path 0-1-2-3-4-5 with a leaf 6 hanging off node 2.
ASYMMETRIC_TREE_EDGES: Tuple[Tuple[int, int], ...] = (
    (0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (2, 6),
)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes 0..n-1 stored as sorted neighbor tuples."""
    n: int
    adjacency: Tuple[Tuple[int, ...], ...]
    edge_count: int

    def __post_init__(self):
        """Reject anything that is not a simple undirected graph."""
        if self.n < 0 or len(self.adjacency) != self.n:
            raise GraphError(f"Adjacency has {len(self.adjacency)} rows for n={self.n}")
        half_edges = 0
        for i, row in enumerate(self.adjacency):
            if any(a >= b for a, b in zip(row, row[1:])):
                raise GraphError(f"Neighbor list of node {i} is not strictly ascending")
            for j in row:
                if j == i:
                    raise GraphError(f"Self-loop at node {i}")
                if not 0 <= j < self.n:
                    raise GraphError(f"Neighbor {j} of node {i} out of range")
                if i not in self.adjacency[j]:
                    raise GraphError(f"Edge {i}-{j} is not symmetric")
            half_edges += len(row)
        if half_edges != 2 * self.edge_count:
            raise GraphError(f"edge_count={self.edge_count} but adjacency holds {half_edges // 2} edges")

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[Tuple[int, int]]) -> 'Graph':
        """Build a graph from an edge list; duplicates collapse, self-loops are rejected."""
        neighbor_sets: List[set] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise GraphError(f"Self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"Edge {u}-{v} out of range for n={n}")
            neighbor_sets[u].add(v)
            neighbor_sets[v].add(u)
        adjacency = tuple(tuple(sorted(s)) for s in neighbor_sets)
        edge_count = sum(len(row) for row in adjacency) // 2
        return cls(n=n, adjacency=adjacency, edge_count=edge_count)

    @classmethod
    def from_networkx(cls, nx_graph: nx.Graph) -> 'Graph':
        """Convert a networkx graph, relabeling its nodes 0..n-1 in sorted order."""
        if nx_graph.is_directed() or nx_graph.is_multigraph():
            raise GraphError("Only simple undirected graphs are supported")
        index = {node: k for k, node in enumerate(sorted(nx_graph.nodes()))}
        return cls.from_edges(len(index), [(index[u], index[v]) for u, v in nx_graph.edges()])

    def to_networkx(self) -> nx.Graph:
        nx_graph = nx.Graph()
        nx_graph.add_nodes_from(range(self.n))
        nx_graph.add_edges_from(self.edges())
        return nx_graph

    def edges(self) -> Iterator[Tuple[int, int]]:
        """Each undirected edge once as (u, v) with u < v, in lexicographic order."""
        for u, row in enumerate(self.adjacency):
            for v in row:
                if u < v:
                    yield (u, v)

    def neighbors(self, i: int) -> Tuple[int, ...]:
        self._check_node(i)
        return self.adjacency[i]

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))

    @cached_property
    def max_degree(self) -> int:
        return max((len(row) for row in self.adjacency), default=0)

    @cached_property
    def _csr(self) -> sp.csr_array:
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(row) for row in self.adjacency])
        indices = np.fromiter((j for row in self.adjacency for j in row), dtype=np.int64, count=int(indptr[-1]))
        data = np.ones(len(indices), dtype=float)
        return sp.csr_array((data, indices, indptr), shape=(self.n, self.n))

    def adjacency_matrix(self) -> sp.csr_array:
        """Sparse 0/1 adjacency matrix; computed once per graph."""
        return self._csr

    def relabel(self, perm: Sequence[int]) -> 'Graph':
        """Graph in which node i is renamed perm[i]."""
        if sorted(perm) != list(range(self.n)):
            raise GraphError("relabel needs a permutation of 0..n-1")
        return Graph.from_edges(self.n, [(perm[u], perm[v]) for u, v in self.edges()])

    def to_json(self) -> Dict:
        return {'n': self.n, 'edges': [[u, v] for u, v in self.edges()]}

    @classmethod
    def from_json(cls, data: Dict) -> 'Graph':
        try:
            return cls.from_edges(int(data['n']), [(int(u), int(v)) for u, v in data['edges']])
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"Invalid graph JSON: {e}") from e

    def _check_node(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise GraphError(f"Node {i} out of range for n={self.n}")


def parse_edge_list(text: str) -> Graph:
    """Parse "u v" lines into a graph over nodes 0..max index.

    Blank lines and '#' comments are skipped. A "# n=<count>" header extends
    the node range so trailing isolated nodes survive a round trip.
    """
    edges: List[Tuple[int, int]] = []
    declared_n = 0
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            header = _HEADER.match(line)
            if header:
                declared_n = max(declared_n, int(header.group(1)))
            continue
        tokens = line.split()
        if len(tokens) != 2 or not all(t.isascii() and t.isdigit() for t in tokens):
            raise ParseError(f"Line {line_number}: expected two nonnegative integers, got {raw!r}", line_number)
        u, v = int(tokens[0]), int(tokens[1])
        if u == v:
            raise SelfLoopError(f"Line {line_number}: self-loop {u} {u} is not allowed", line_number)
        edges.append((u, v))

    n = max(declared_n, max((max(u, v) + 1 for u, v in edges), default=0))
    graph = Graph.from_edges(n, edges)
    logger.debug(f"Parsed edge list: n={graph.n}, edges={graph.edge_count}")
    return graph


def serialize_edge_list(g: Graph) -> str:
    lines = [f"# n={g.n}"] + [f"{u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def load_graph(path: Path) -> Graph:
    """Read a graph from a .json interchange file or an edge-list file."""
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise GraphError(f"Failed to read graph file {path}: {e}") from e
    if Path(path).suffix.lower() == '.json':
        try:
            return Graph.from_json(json.loads(text))
        except json.JSONDecodeError as e:
            raise ParseError(f"Invalid JSON in {path}: {e}") from e
    return parse_edge_list(text)


def degree_vector(g: Graph) -> np.ndarray:
    return np.array([len(row) for row in g.adjacency], dtype=np.int64)


def _require_seed(name: str, seed: Optional[int]) -> int:
    if seed is None:
        raise GeneratorError(f"Generator '{name}' is random and needs a seed")
    return seed


def _as_int(name: str, value: Number, minimum: int) -> int:
    if int(value) != value or value < minimum:
        raise GeneratorError(f"Generator '{name}' needs integer parameters >= {minimum}, got {value}")
    return int(value)


def _path(params: List[Number], seed: Optional[int]) -> nx.Graph:
    return nx.path_graph(_as_int('path', params[0], 1))


def _cycle(params: List[Number], seed: Optional[int]) -> nx.Graph:
    return nx.cycle_graph(_as_int('cycle', params[0], 3))


def _star(params: List[Number], seed: Optional[int]) -> nx.Graph:
    # star:k is K_{1,k}; the center is node 0
    return nx.star_graph(_as_int('star', params[0], 0))


def _complete(params: List[Number], seed: Optional[int]) -> nx.Graph:
    return nx.complete_graph(_as_int('complete', params[0], 1))


def _complete_bipartite(params: List[Number], seed: Optional[int]) -> nx.Graph:
    a = _as_int('complete_bipartite', params[0], 0)
    b = _as_int('complete_bipartite', params[1], 0)
    if a + b == 0:
        raise GeneratorError("complete_bipartite needs at least one node")
    return nx.complete_bipartite_graph(a, b)


def _frucht(params: List[Number], seed: Optional[int]) -> nx.Graph:
    return nx.Graph(FRUCHT_EDGES)


def _asymmetric_tree(params: List[Number], seed: Optional[int]) -> nx.Graph:
    return nx.Graph(ASYMMETRIC_TREE_EDGES)


def _random_regular(params: List[Number], seed: Optional[int]) -> nx.Graph:
    n = _as_int('random_regular', params[0], 1)
    d = _as_int('random_regular', params[1], 0)
    if (n * d) % 2 != 0 or d >= n:
        raise GeneratorError(f"random_regular needs n*d even and d < n (n={n}, d={d})")
    return nx.random_regular_graph(d, n, seed=_require_seed('random_regular', seed))


def _erdos_renyi(params: List[Number], seed: Optional[int]) -> nx.Graph:
    n = _as_int('erdos_renyi', params[0], 1)
    p = float(params[1])
    if not 0.0 <= p <= 1.0:
        raise GeneratorError(f"erdos_renyi edge probability must lie in [0, 1], got {p}")
    return nx.gnp_random_graph(n, p, seed=_require_seed('erdos_renyi', seed))


def _random_tree(params: List[Number], seed: Optional[int]) -> nx.Graph:
    n = _as_int('random_tree', params[0], 1)
    rng = np.random.default_rng(_require_seed('random_tree', seed))
    if n <= 2:
        return nx.path_graph(n)
    return nx.from_prufer_sequence(rng.integers(0, n, size=n - 2).tolist())


def _disjoint_union_cliques(params: List[Number], seed: Optional[int]) -> nx.Graph:
    sizes = [_as_int('disjoint_union_cliques', k, 1) for k in params]
    return nx.disjoint_union_all([nx.complete_graph(k) for k in sizes])


# name -> (builder, parameter count or None for "one or more")
GENERATORS: Dict[str, Tuple[Callable[[List[Number], Optional[int]], nx.Graph], Optional[int]]] = {
    'path': (_path, 1),
    'cycle': (_cycle, 1),
    'star': (_star, 1),
    'complete': (_complete, 1),
    'complete_bipartite': (_complete_bipartite, 2),
    'frucht': (_frucht, 0),
    'asymmetric_tree': (_asymmetric_tree, 0),
    'random_regular': (_random_regular, 2),
    'erdos_renyi': (_erdos_renyi, 2),
    'random_tree': (_random_tree, 1),
    'disjoint_union_cliques': (_disjoint_union_cliques, None),
}


def generate(name: str, params: Sequence[Number] = (), seed: Optional[int] = None) -> Graph:
    """Build a named graph; random families are deterministic given the seed."""
    if name not in GENERATORS:
        raise GeneratorError(f"Unknown generator '{name}'; known: {', '.join(sorted(GENERATORS))}")
    builder, arity = GENERATORS[name]
    params = list(params)
    if (arity is None and not params) or (arity is not None and len(params) != arity):
        expected = "one or more" if arity is None else str(arity)
        raise GeneratorError(f"Generator '{name}' takes {expected} parameters, got {len(params)}")
    try:
        graph = Graph.from_networkx(builder(params, seed))
    except nx.NetworkXError as e:
        raise GeneratorError(f"Generator '{name}' failed: {e}") from e
    logger.debug(f"Generated {name}{params} (seed={seed}): n={graph.n}, edges={graph.edge_count}")
    return graph


def parse_generator_spec(spec: str) -> Tuple[str, List[Number], Optional[int]]:
    """Split "name:params:seed" (e.g. "cycle:4", "random_regular:12,3:42")."""
    parts = spec.strip().split(':')
    if not parts[0] or len(parts) > 3:
        raise GeneratorError(f"Malformed generator spec {spec!r}; expected name[:params[:seed]]")
    name = parts[0]
    params: List[Number] = []
    try:
        if len(parts) > 1 and parts[1]:
            for token in parts[1].split(','):
                params.append(float(token) if '.' in token else int(token))
        seed = int(parts[2]) if len(parts) == 3 and parts[2] else None
    except ValueError as e:
        raise GeneratorError(f"Malformed generator spec {spec!r}: {e}") from e
    return name, params, seed


def generate_from_spec(spec: str, default_seed: Optional[int] = None) -> Graph:
    """Generate from a spec string; default_seed applies when the spec names none."""
    name, params, seed = parse_generator_spec(spec)
    return generate(name, params, default_seed if seed is None else seed)


class GraphError(Exception):
    """Base exception for graph construction and I/O errors."""
    pass

class ParseError(GraphError):
    """Raised when edge-list or JSON input is malformed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        super().__init__(message)
        self.line_number = line_number

class SelfLoopError(ParseError):
    """Raised when an edge list contains a "u u" line."""
    pass

class GeneratorError(GraphError):
    """Raised for unknown generators or infeasible parameters."""
    pass
