import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

from graph_core import Graph, GraphError, generate, generate_from_spec
from refinement import (
    IteratedDegree,
    NotEquitableError,
    Partition,
    PartitionError,
    PartitionMismatchError,
    color_refinement,
    is_coarser_or_equal,
    is_equitable,
    iterated_degree,
    iterated_degree_codes,
    iterated_degree_partition,
    quotient_matrix,
    quotient_to_json,
)


@st.composite
def graphs(draw, max_nodes=10):
    n = draw(st.integers(min_value=1, max_value=max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, edges)


class TestPartition(unittest.TestCase):
    def test_from_labels_is_canonical(self):
        """Test that classes are numbered by first occurrence."""
        p = Partition.from_labels(['x', 'y', 'y', 'x'])
        self.assertEqual(p.class_of, (0, 1, 1, 0))
        self.assertEqual(p.classes, ((0, 3), (1, 2)))
        self.assertEqual(p.K, 2)
        self.assertEqual(p.sizes, [2, 2])
        self.assertEqual(p, Partition.from_labels([7, 3, 3, 7]))

    def test_validation(self):
        """Test that inconsistent partitions are rejected."""
        with self.assertRaises(PartitionError):
            Partition((0, 1), ((0,), ()))
        with self.assertRaises(PartitionError):
            Partition((0, 0), ((0,), (1,)))
        with self.assertRaises(PartitionError):
            Partition((1, 0), ((1,), (0,)))

    def test_discrete_and_trivial(self):
        """Test the two extreme partitions."""
        self.assertEqual(Partition.discrete(3).K, 3)
        self.assertEqual(Partition.trivial(3).K, 1)
        self.assertEqual(Partition.trivial(0).K, 0)

    def test_json(self):
        """Test the partition JSON form."""
        p = Partition.from_labels([0, 1, 1, 0])
        self.assertEqual(p.to_json(), {'K': 2, 'class_of': [0, 1, 1, 0]})
        self.assertEqual(Partition.from_json(p.to_json()), p)
        with self.assertRaises(PartitionError):
            Partition.from_json({'K': 3, 'class_of': [0, 1]})
        with self.assertRaises(PartitionError):
            Partition.from_json({'K': 1})


class TestColorRefinement(unittest.TestCase):
    def test_regular_graphs_single_class(self):
        """Test that regular graphs have a one-class CEP."""
        for spec in ["frucht", "complete:1", "complete:5", "cycle:7", "random_regular:12,3:42"]:
            with self.subTest(spec=spec):
                self.assertEqual(color_refinement(generate_from_spec(spec)).K, 1)

    def test_path4(self):
        """Test P4 splits into ends and middle."""
        p = color_refinement(generate('path', [4]))
        self.assertEqual(p.classes, ((0, 3), (1, 2)))
        self.assertEqual(p.passes, 1)

    def test_asymmetric_tree_is_discrete(self):
        """Test that the asymmetric tree refines to singletons."""
        self.assertEqual(color_refinement(generate('asymmetric_tree')).K, 7)

    def test_cliques(self):
        """Test K3 + K2 splits by clique."""
        p = color_refinement(generate('disjoint_union_cliques', [3, 2]))
        self.assertEqual(p.classes, ((0, 1, 2), (3, 4)))

    def test_empty_graph(self):
        """Test the zero-node graph."""
        p = color_refinement(Graph.from_edges(0, []))
        self.assertEqual((p.K, p.passes), (0, 0))

    @settings(max_examples=80, deadline=None)
    @given(graphs())
    def test_output_is_equitable_and_fast(self, g):
        """Test equitability and the pass bound."""
        p = color_refinement(g)
        self.assertTrue(is_equitable(g, p))
        self.assertLess(p.passes, max(g.n, 1))

    @settings(max_examples=60, deadline=None)
    @given(graphs(), st.randoms(use_true_random=False))
    def test_permutation_invariance(self, g, rnd):
        """Test that relabeling permutes the partition."""
        perm = list(range(g.n))
        rnd.shuffle(perm)
        p, q = color_refinement(g), color_refinement(g.relabel(perm))
        relabeled = Partition.from_labels([q.class_of[perm[i]] for i in range(g.n)])
        self.assertEqual(relabeled, p)

    @settings(max_examples=60, deadline=None)
    @given(graphs())
    def test_coarsest(self, g):
        """Test that the CEP sits between the trivial and discrete partitions."""
        p = color_refinement(g)
        self.assertTrue(is_coarser_or_equal(p, Partition.discrete(g.n)))
        self.assertTrue(is_coarser_or_equal(Partition.trivial(g.n), p))


class TestIteratedDegree(unittest.TestCase):
    def test_examples(self):
        """Test small hand-computed iterated degrees."""
        p3 = generate('path', [3])
        self.assertEqual(str(iterated_degree(p3, 1, 1)), "{1,1}")
        self.assertEqual(iterated_degree(p3, 0, 0), IteratedDegree(0, 1))
        c4 = generate('cycle', [4])
        for i in range(4):
            self.assertEqual(str(iterated_degree(c4, i, 2)), "{{2,2},{2,2}}")

    def test_errors(self):
        """Test negative depth and bad nodes."""
        g = generate('path', [3])
        with self.assertRaises(ValueError):
            iterated_degree(g, 0, -1)
        with self.assertRaises(ValueError):
            iterated_degree_codes(g, -1)
        with self.assertRaises(GraphError):
            iterated_degree(g, 5, 1)

    @settings(max_examples=40, deadline=None)
    @given(graphs(max_nodes=7))
    def test_codes_match_explicit_values(self, g):
        """Test that interned codes agree with nested values at small depth."""
        for depth in range(3):
            codes = iterated_degree_codes(g, depth)
            values = [iterated_degree(g, i, depth).value for i in range(g.n)]
            for i in range(g.n):
                for j in range(g.n):
                    self.assertEqual(codes[i] == codes[j], values[i] == values[j])

    @settings(max_examples=80, deadline=None)
    @given(graphs(max_nodes=16))
    def test_partition_equals_cep(self, g):
        """Test that depth-n iterated degrees induce the CEP."""
        self.assertEqual(iterated_degree_partition(g), color_refinement(g))

    def test_named_suite_characterization(self):
        """Test the characterization on larger named graphs."""
        for spec in ["erdos_renyi:32,0.2:3", "random_tree:30:5", "frucht", "random_regular:16,3:1"]:
            with self.subTest(spec=spec):
                g = generate_from_spec(spec)
                self.assertEqual(iterated_degree_partition(g), color_refinement(g))


class TestEquitability(unittest.TestCase):
    def test_examples(self):
        """Test equitability on P3 and Frucht."""
        p3 = generate('path', [3])
        self.assertTrue(is_equitable(generate('frucht'), Partition.trivial(12)))
        self.assertTrue(is_equitable(p3, Partition.discrete(3)))
        self.assertFalse(is_equitable(p3, Partition.trivial(3)))

    def test_size_mismatch(self):
        """Test that partitions of the wrong size are rejected."""
        with self.assertRaises(PartitionMismatchError):
            is_equitable(generate('path', [3]), Partition.trivial(4))
        with self.assertRaises(PartitionMismatchError):
            is_coarser_or_equal(Partition.trivial(3), Partition.trivial(4))

    def test_quotient_matrix(self):
        """Test quotient matrices of C4, P4 and K3."""
        cases = [
            (generate('cycle', [4]), Partition.trivial(4), [[2]], [4]),
            (generate('path', [4]), Partition.from_labels([0, 1, 1, 0]), [[0, 1], [1, 1]], [2, 2]),
            (generate('complete', [3]), Partition.trivial(3), [[2]], [3]),
        ]
        for g, p, S, sizes in cases:
            with self.subTest(n=g.n):
                S_got, sizes_got = quotient_matrix(g, p)
                np.testing.assert_array_equal(S_got, S)
                np.testing.assert_array_equal(sizes_got, sizes)

    def test_quotient_requires_equitable(self):
        """Test that non-equitable partitions have no quotient."""
        with self.assertRaises(NotEquitableError):
            quotient_matrix(generate('path', [3]), Partition.trivial(3))

    def test_quotient_json(self):
        """Test the quotient JSON form."""
        S, sizes = quotient_matrix(generate('path', [4]), Partition.from_labels([0, 1, 1, 0]))
        self.assertEqual(quotient_to_json(S, sizes), {'K': 2, 'sizes': [2, 2], 'S': [[0, 1], [1, 1]]})

    @settings(max_examples=60, deadline=None)
    @given(graphs())
    def test_row_sums_are_degrees(self, g):
        """Test that quotient row sums equal class degrees."""
        p = color_refinement(g)
        S, _ = quotient_matrix(g, p)
        for c, members in enumerate(p.classes):
            self.assertEqual(int(S[c].sum()), g.degree(members[0]))

    def test_coarser_or_equal(self):
        """Test the coarsening relation on small partitions."""
        coarse = Partition.from_labels([0, 0, 1, 1])
        fine = Partition.from_labels([0, 1, 2, 2])
        self.assertTrue(is_coarser_or_equal(coarse, fine))
        self.assertFalse(is_coarser_or_equal(fine, coarse))
        self.assertTrue(is_coarser_or_equal(coarse, coarse))

if __name__ == '__main__':
    unittest.main()
