import unittest

import networkx as nx
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from fvm.spectra import (
    adjacency_matrix,
    char_poly,
    char_poly_reference,
    cospectral,
    format_poly,
    graph_char_poly,
    spectra_report,
)
from fvm.structures import graph_family, graph_structure, structure
from fvm.suites import cospectral_pair
from fvm.util import NotAGraphError

GRAPHS = graph_family(5)


class TestCharacteristicPolynomials(unittest.TestCase):
    def test_small_graphs(self):
        self.assertEqual(graph_char_poly(graph_structure(nx.complete_graph(2))), [1, 0, -1])
        self.assertEqual(graph_char_poly(graph_structure(nx.complete_graph(3))), [1, 0, -3, -2])
        self.assertEqual(graph_char_poly(graph_structure(nx.empty_graph(0))), [1])

    def test_integer_matrices(self):
        self.assertEqual(char_poly([[2, 1], [1, 2]]), [1, -4, 3])
        with self.assertRaises(ValueError):
            char_poly(np.zeros((2, 3), dtype=int))

    def test_adjacency_matrix_follows_universe_order(self):
        G = graph_structure(nx.path_graph(3))
        M = adjacency_matrix(G)
        self.assertEqual(M.tolist(), [[0, 1, 0], [1, 0, 1], [0, 1, 0]])
        with self.assertRaises(NotAGraphError):
            adjacency_matrix(structure({"E": 2}, "ab", {"E": [("a", "b")]}))

    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from(GRAPHS))
    def test_agrees_with_sympy(self, G):
        M = adjacency_matrix(G)
        self.assertEqual(char_poly(M), char_poly_reference(M))


class TestCospectrality(unittest.TestCase):
    def test_star_and_square_with_isolated_vertex(self):
        star, cycle_and_point = cospectral_pair()
        self.assertEqual(graph_char_poly(star), [1, 0, -4, 0, 0, 0])
        self.assertTrue(cospectral(star, cycle_and_point))
        self.assertEqual(
            spectra_report(star, cycle_and_point),
            [
                "CHARPOLY G x^5 - 4x^3",
                "CHARPOLY H x^5 - 4x^3",
                "COSPECTRAL yes",
                "ISOMORPHIC no",
            ],
        )

    def test_path_and_star_differ(self):
        self.assertFalse(
            cospectral(graph_structure(nx.path_graph(4)), graph_structure(nx.star_graph(3)))
        )

    def test_format(self):
        self.assertEqual(format_poly([1, 0, -3, -2]), "x^3 - 3x - 2")
        self.assertEqual(format_poly([-2, 1]), "-2x + 1")
        self.assertEqual(format_poly([1]), "1")
        self.assertEqual(format_poly([0, 0]), "0")


if __name__ == "__main__":
    unittest.main()
