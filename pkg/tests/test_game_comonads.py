import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from fvm.game_comonads import (
    CospectralComonad,
    EFComonad,
    ModalComonad,
    PebbleComonad,
    check_graph,
    comonad_by_name,
    comonad_from_doc,
)
from fvm.structures import enumerate_structures, structure
from fvm.util import (
    NotAGraphError,
    SignatureMismatchError,
    UnsupportedComonadError,
    encode,
)

LOOP = structure({"E": 2}, "a", {"E": [("a", "a")]})
EDGE = structure({"E": 2}, "ab", {"E": [("a", "b")]})
K3 = structure({"E": 2}, "abc", {"E": [(x, y) for x in "abc" for y in "abc" if x != y]})
MODAL = structure({"R": 2, "P": 1}, "ab", {"R": [("a", "b"), ("b", "b")], "P": [("b",)]}, point="a")
SMALL = enumerate_structures({"E": 2}, [1, 2])


class TestEFComonad(unittest.TestCase):
    def test_universe_is_all_short_words(self):
        CA = EFComonad(2).build(EDGE)
        self.assertEqual(len(CA), 2 + 4)
        self.assertIn(encode(["b", "a"]), CA)

    def test_relations_need_comparable_words(self):
        C = EFComonad(2)
        CA = C.build(EDGE)
        self.assertTrue(CA.holds("E", (encode(["a"]), encode(["a", "b"]))))
        self.assertFalse(CA.holds("E", (encode(["a"]), encode(["b"]))), msg="Incomparable words")
        self.assertFalse(C.holds(EDGE, "E", [encode(["a", "a"]), encode(["b"])]))

    def test_contains(self):
        C = EFComonad(2)
        self.assertTrue(C.contains(EDGE, encode(["a", "b"])))
        self.assertFalse(C.contains(EDGE, encode(["a", "b", "a"])))
        self.assertFalse(C.contains(EDGE, encode(["c"])))

    def test_pointed_input(self):
        CA = EFComonad(2).build(EDGE.with_point("a"))
        self.assertEqual(CA.point, encode(["a"]))

    def test_parameters_must_be_positive(self):
        with self.assertRaises(ValueError):
            EFComonad(0)
        with self.assertRaises(ValueError):
            PebbleComonad(2, 0)


class TestPebbleComonad(unittest.TestCase):
    def test_universe(self):
        CA = PebbleComonad(2, 2).build(EDGE)
        self.assertEqual(len(CA), 4 + 16)

    def test_moved_pebble_breaks_the_relation(self):
        C = PebbleComonad(2, 2)
        CA = C.build(LOOP)
        first = encode([[0, "a"]])
        self.assertTrue(CA.holds("E", (first, encode([[0, "a"], [1, "a"]]))))
        self.assertFalse(
            CA.holds("E", (first, encode([[0, "a"], [0, "a"]]))),
            msg="Pebble 0 is moved after it was placed",
        )

    def test_coextension_keeps_pebbles(self):
        C = PebbleComonad(2, 3)
        w = encode([[1, "a"], [0, "b"]])
        self.assertEqual(C.coextend_element(lambda v: "x", w), encode([[1, "x"], [0, "x"]]))
        self.assertEqual(C.counit_element(w), "b")


class TestModalComonad(unittest.TestCase):
    def test_paths_from_the_point(self):
        C = ModalComonad(2)
        CA = C.build(MODAL)
        self.assertEqual(
            set(CA.universe),
            {
                encode(["a"]),
                encode(["a", "R", "b"]),
                encode(["a", "R", "b", "R", "b"]),
            },
        )
        self.assertEqual(CA.point, encode(["a"]))
        self.assertTrue(CA.holds("P", (encode(["a", "R", "b"]),)))
        self.assertTrue(CA.holds("R", (encode(["a"]), encode(["a", "R", "b"]))))

    def test_contains_checks_transitions(self):
        C = ModalComonad(2)
        self.assertTrue(C.contains(MODAL, encode(["a", "R", "b"])))
        self.assertFalse(C.contains(MODAL, encode(["a", "R", "a"])))
        self.assertFalse(C.contains(MODAL, encode(["b"])), msg="Paths start at the point")

    def test_needs_a_pointed_modal_structure(self):
        C = ModalComonad(1)
        with self.assertRaises(SignatureMismatchError):
            C.build(MODAL.base())
        with self.assertRaises(SignatureMismatchError):
            C.build(structure({"T": 3}, "a", point="a"))

    def test_prefixes_skip_labels(self):
        w = encode(["a", "R", "b", "R", "b"])
        self.assertEqual(
            ModalComonad(2).prefixes(w), [encode(["a"]), encode(["a", "R", "b"]), w]
        )


class TestCospectralComonad(unittest.TestCase):
    def test_walk_points_of_the_triangle(self):
        CA = CospectralComonad(3).build(K3)
        self.assertEqual(len(CA), 6 * 2 + 6 * 3)
        self.assertTrue(CA.holds("E", (encode([["a", "b", "c"], 2]), encode([["a", "b", "c"], 0]))))
        self.assertFalse(CA.holds("E", (encode([["a", "b"], 0]), encode([["a", "b", "c"], 1]))))

    def test_counit_and_coextension(self):
        C = CospectralComonad(3)
        w = encode([["a", "b", "c"], 1])
        self.assertEqual(C.counit_element(w), "b")
        self.assertEqual(C.coextend_element(C.counit_element, w), w)

    def test_graph_checks(self):
        with self.assertRaises(NotAGraphError):
            check_graph(EDGE)
        with self.assertRaises(NotAGraphError):
            check_graph(LOOP)
        with self.assertRaises(NotAGraphError):
            check_graph(structure({"F": 2}, "a"))
        self.assertFalse(CospectralComonad(2).accepts(EDGE))
        with self.assertRaises(UnsupportedComonadError):
            CospectralComonad(2).point_element("a")


class TestRegistry(unittest.TestCase):
    def test_by_name(self):
        self.assertEqual(comonad_by_name("P", 3, 4), PebbleComonad(3, 4))
        self.assertEqual(comonad_by_name("Cos", 3, 4), CospectralComonad(4))
        self.assertEqual(comonad_from_doc({"name": "M", "k": 3}), ModalComonad(3))
        with self.assertRaises(UnsupportedComonadError):
            comonad_by_name("X")


class TestElementLevelRelations(unittest.TestCase):
    """``holds`` and ``contains`` agree with the built structure."""

    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from(SMALL), st.sampled_from([EFComonad(2), PebbleComonad(2, 2)]), st.data())
    def test_holds_matches_build(self, A, C, data):
        CA = C.build(A)
        pair = (
            data.draw(st.sampled_from(CA.universe)),
            data.draw(st.sampled_from(CA.universe)),
        )
        self.assertEqual(C.holds(A, "E", pair), CA.holds("E", pair), msg=f"{C.label} on {pair}")
        self.assertTrue(C.contains(A, pair[0]))


if __name__ == "__main__":
    unittest.main()
