import unittest

import networkx as nx
import numpy as np
from hypothesis import given, settings, strategies as st

from graph_core import Graph, generate, generate_from_spec
from oracle import (
    OracleSizeError,
    PathExplosionError,
    adapted_dominating_map_exists,
    automorphism_orbits,
    automorphisms,
    enumerate_paths,
    find_adapted_dominating_map,
    is_adapted_dominating_map,
    orbit_relation,
)
from preorder import max_inductive_preorder
from refinement import Partition, color_refinement, is_coarser_or_equal, is_equitable


@st.composite
def graphs(draw, max_nodes=6):
    n = draw(st.integers(min_value=1, max_value=max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, edges)


class TestEnumeratePaths(unittest.TestCase):
    def test_examples(self):
        """Test walk sets of K2, P3 and C4."""
        self.assertEqual(enumerate_paths(generate('complete', [2]), 0, 2).paths, ((0, 1, 0),))
        self.assertEqual(enumerate_paths(generate('path', [3]), 1, 1).paths, ((1, 0), (1, 2)))
        c4 = generate('cycle', [4])
        for length in range(6):
            with self.subTest(length=length):
                self.assertEqual(len(enumerate_paths(c4, 2, length)), 2 ** length)

    def test_walks_are_sorted_and_adjacent(self):
        """Test ordering and adjacency of enumerated walks."""
        g = generate('frucht')
        walks = enumerate_paths(g, 0, 3)
        self.assertEqual(list(walks.paths), sorted(set(walks.paths)))
        for walk in walks.paths:
            self.assertEqual(walk[0], 0)
            self.assertTrue(all(b in g.neighbors(a) for a, b in zip(walk, walk[1:])))

    def test_prefixes(self):
        """Test projections onto walk prefixes."""
        walks = enumerate_paths(generate('path', [3]), 1, 2)
        self.assertEqual(walks.prefixes(0), [(1,)])
        self.assertEqual(walks.prefixes(1), [(1, 0), (1, 2)])

    def test_isolated_node(self):
        """Test walk sets from an isolated node."""
        g = Graph.from_edges(2, [])
        self.assertEqual(len(enumerate_paths(g, 0, 0)), 1)
        self.assertEqual(len(enumerate_paths(g, 0, 3)), 0)

    def test_errors(self):
        """Test negative lengths and the explosion bound."""
        g = generate('complete', [5])
        with self.assertRaises(ValueError):
            enumerate_paths(g, 0, -1)
        with self.assertRaises(PathExplosionError):
            enumerate_paths(g, 0, 6, bound=1000)


class TestAdaptedMaps(unittest.TestCase):
    def test_identity(self):
        """Test that every node has an adapted map onto itself."""
        g = generate('erdos_renyi', [6, 0.5], seed=2)
        for i in range(g.n):
            for length in range(4):
                self.assertTrue(adapted_dominating_map_exists(g, i, i, length))

    def test_cliques(self):
        """Test a K2 node mapped into a K3 node at depth 2, and not back."""
        g = generate('disjoint_union_cliques', [3, 2])
        f = find_adapted_dominating_map(g, 3, 0, 2)
        self.assertIsNotNone(f)
        self.assertTrue(is_adapted_dominating_map(g, f, 3, 0, 2))
        self.assertFalse(adapted_dominating_map_exists(g, 0, 3, 1))

    def test_degree_failure(self):
        """Test that the P3 center has no map into an end."""
        self.assertFalse(adapted_dominating_map_exists(generate('path', [3]), 1, 0, 1))

    def test_checker_rejects_bad_maps(self):
        """Test that the checker catches each violated condition."""
        g = generate('path', [3])
        good = find_adapted_dominating_map(g, 0, 2, 2)
        self.assertEqual(good, {(0, 1, 0): (2, 1, 0), (0, 1, 2): (2, 1, 2)})
        self.assertTrue(is_adapted_dominating_map(g, good, 0, 2, 2))
        not_injective = {(0, 1, 0): (2, 1, 0), (0, 1, 2): (2, 1, 0)}
        self.assertFalse(is_adapted_dominating_map(g, not_injective, 0, 2, 2))
        partial = {(0, 1, 0): (2, 1, 0)}
        self.assertFalse(is_adapted_dominating_map(g, partial, 0, 2, 2))

        star = generate('star', [3])
        # leaf 1 into leaf 2, keeping every last step
        same_tails = {(1, 0, 1): (2, 0, 1), (1, 0, 2): (2, 0, 2), (1, 0, 3): (2, 0, 3)}
        self.assertTrue(is_adapted_dominating_map(star, same_tails, 1, 2, 2))
        wrong_degree = {(0, 1): (1, 0), (0, 2): (1, 0), (0, 3): (1, 0)}
        self.assertFalse(is_adapted_dominating_map(star, wrong_degree, 0, 1, 1))

    def test_prefix_consistency_both_ways(self):
        """Test that a map merging distinct prefixes is rejected."""
        g = generate('cycle', [4])
        # walks from 0 of length 2: (0,1,0),(0,1,2),(0,3,0),(0,3,2)
        merging = {(0, 1, 0): (0, 1, 0), (0, 1, 2): (0, 3, 2), (0, 3, 0): (0, 3, 0), (0, 3, 2): (0, 1, 2)}
        self.assertFalse(is_adapted_dominating_map(g, merging, 0, 0, 2))

    @settings(max_examples=40, deadline=None)
    @given(graphs())
    def test_found_maps_pass_checker(self, g):
        """Test that every map found by search satisfies the definition."""
        for i in range(g.n):
            for j in range(g.n):
                f = find_adapted_dominating_map(g, j, i, 2)
                if f is not None:
                    self.assertTrue(is_adapted_dominating_map(g, f, j, i, 2))

    @settings(max_examples=30, deadline=None)
    @given(graphs())
    def test_soundness_shadow(self, g):
        """Test that related pairs have maps at depth 3 and rejected pairs are unrelated."""
        r = max_inductive_preorder(g)
        for i in range(g.n):
            for j in range(g.n):
                for length in range(4):
                    exists = adapted_dominating_map_exists(g, j, i, length)
                    if r.dominates(i, j):
                        self.assertTrue(exists)
                    if not exists:
                        self.assertFalse(r.dominates(i, j))


class TestAutomorphisms(unittest.TestCase):
    def test_orbits(self):
        """Test orbit partitions of Frucht, C4, P3 and the asymmetric tree."""
        self.assertEqual(automorphism_orbits(generate('frucht')).K, 12)
        self.assertEqual(automorphism_orbits(generate('cycle', [4])).K, 1)
        self.assertEqual(automorphism_orbits(generate('path', [3])).classes, ((0, 2), (1,)))
        self.assertEqual(automorphism_orbits(generate('asymmetric_tree')), Partition.discrete(7))

    def test_group_sizes_match_networkx(self):
        """Test automorphism counts against networkx's matcher."""
        for spec in ["cycle:5", "star:3", "complete_bipartite:2,3", "path:4", "complete:4"]:
            with self.subTest(spec=spec):
                g = generate_from_spec(spec)
                nx_graph = g.to_networkx()
                expected = sum(1 for _ in nx.algorithms.isomorphism.GraphMatcher(nx_graph, nx_graph).isomorphisms_iter())
                found = list(automorphisms(g))
                self.assertEqual(len(found), expected)
                self.assertEqual(len(set(found)), len(found))

    def test_size_bound(self):
        """Test that large graphs are refused."""
        with self.assertRaises(OracleSizeError):
            automorphism_orbits(generate('path', [13]))
        with self.assertRaises(OracleSizeError):
            next(automorphisms(generate('path', [5]), max_nodes=4))

    def test_orbit_relation(self):
        """Test the orbit relation of P3."""
        expected = np.array([[1, 0, 1], [0, 1, 0], [1, 0, 1]], dtype=bool)
        np.testing.assert_array_equal(orbit_relation(generate('path', [3])), expected)

    def test_frucht_is_regular_but_asymmetric(self):
        """Test that Frucht orbits are equitable yet much finer than its CEP."""
        g = generate('frucht')
        orbits = automorphism_orbits(g)
        self.assertTrue(is_equitable(g, orbits))
        self.assertEqual(color_refinement(g).K, 1)

    def test_trees_orbits_equal_cep(self):
        """Test that orbits coincide with the CEP on 50 random trees."""
        rng = np.random.default_rng(0)
        for k in range(50):
            n = int(rng.integers(1, 9))
            with self.subTest(n=n, seed=k):
                g = generate('random_tree', [n], seed=k)
                self.assertEqual(automorphism_orbits(g), color_refinement(g))

    @settings(max_examples=50, deadline=None)
    @given(graphs(max_nodes=8))
    def test_orbits_equitable_and_finer(self, g):
        """Test that orbits are equitable and refine the CEP."""
        orbits = automorphism_orbits(g)
        self.assertTrue(is_equitable(g, orbits))
        self.assertTrue(is_coarser_or_equal(color_refinement(g), orbits))

if __name__ == '__main__':
    unittest.main()
