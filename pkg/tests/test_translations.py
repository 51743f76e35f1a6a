import unittest

from fvm.fvm_engine import decide_fo_eq_equiv, decide_fo_noeq_equiv
from fvm.kleisli_laws import (
    coproduct_operation,
    merge_operation,
    product_operation,
    vee_operation,
)
from fvm.structures import enumerate_structures, structure
from fvm.translations import (
    check_translated_fvm,
    check_translation_square,
    tr_connectivity,
    tr_equality,
    tr_global,
    tr_weak,
    translation_by_name,
)
from fvm.util import SignatureMismatchError

FAMILY = enumerate_structures({"E": 2}, [1, 2], up_to_iso=True)[:5]
WEAK_FAMILY = enumerate_structures({"R": 2, "S": 2}, [1], pointed=True)
CHAIN = structure(
    {"R": 2, "S": 2, "P": 1},
    "abc",
    {"S": [("a", "b")], "R": [("b", "c")], "P": [("b",)]},
    point="a",
)


class TestTranslations(unittest.TestCase):
    def test_equality(self):
        A = tr_equality(structure({"E": 2}, "ab", {"E": [("a", "b")]}))
        self.assertEqual(A.signature.to_dict(), {"E": 2, "I": 2})
        self.assertEqual(A.relations["I"], {("a", "a"), ("b", "b")})

    def test_connectivity(self):
        A = tr_connectivity(structure({"E": 2}, "abc", {"E": [("a", "b")]}))
        self.assertTrue(A.holds("Con", ("b", "a")))
        self.assertFalse(A.holds("Con", ("a", "c")))
        self.assertTrue(A.holds("I", ("c", "c")))

    def test_global(self):
        A = tr_global(structure({"E": 2}, "abc"))
        self.assertEqual(A.tuple_count("G"), 9)

    def test_weak_variants(self):
        hidden = tr_weak(CHAIN, "S")
        self.assertEqual(hidden.relations["R"], {("a", "c"), ("b", "c")})
        self.assertEqual(hidden.tuple_count("S"), 0)
        self.assertEqual(hidden.relations["P"], {("b",)})
        plus = tr_weak(CHAIN, "S", "plus")
        self.assertEqual(plus.relations["S"], {("a", "b")})
        star = tr_weak(CHAIN, "S", "star")
        self.assertEqual(star.tuple_count("S"), 4)
        closed = tr_weak(CHAIN, "S", close_unary=True)
        self.assertEqual(closed.relations["P"], {("a",), ("b",)})

    def test_weak_needs_a_binary_silent_symbol(self):
        with self.assertRaises(SignatureMismatchError):
            tr_weak(CHAIN, "P")
        with self.assertRaises(SignatureMismatchError):
            tr_weak(structure({"T": 3}, "a"), "T")
        with self.assertRaises(ValueError):
            tr_weak(CHAIN, "S", "tau")

    def test_by_name(self):
        self.assertEqual(translation_by_name("weak:S").name, "weak:S")
        self.assertEqual(translation_by_name("con")(CHAIN), tr_connectivity(CHAIN))
        with self.assertRaises(ValueError):
            translation_by_name("closure")


class TestSquares(unittest.TestCase):
    def test_equality_commutes_with_coproduct(self):
        eq = translation_by_name("eq")
        report = check_translation_square([eq] * 3, coproduct_operation(2), coproduct_operation(2), FAMILY)
        self.assertTrue(report.passed, msg="\n".join(report.lines()))

    def test_connectivity_commutes_with_coproduct(self):
        con = translation_by_name("con")
        report = check_translation_square([con] * 3, coproduct_operation(2), coproduct_operation(2), FAMILY)
        self.assertTrue(report.passed, msg="\n".join(report.lines()))

    def test_global_commutes_with_product_only(self):
        glob = translation_by_name("global")
        report = check_translation_square([glob] * 3, product_operation(2), product_operation(2), FAMILY)
        self.assertTrue(report.passed, msg="\n".join(report.lines()))
        report = check_translation_square([glob] * 3, coproduct_operation(2), coproduct_operation(2), FAMILY)
        self.assertFalse(report.passed, msg="G relates elements of different components")

    def test_weak_translation_turns_merge_into_vee(self):
        weak = translation_by_name("weak:S")
        report = check_translation_square([weak] * 3, merge_operation("S"), vee_operation(), WEAK_FAMILY)
        self.assertTrue(report.passed, msg="\n".join(report.lines()))

    def test_plus_variant_keeps_silent_steps_from_the_root(self):
        weak = translation_by_name("weak:S", "plus")
        report = check_translation_square([weak] * 3, merge_operation("S"), vee_operation(), WEAK_FAMILY)
        self.assertFalse(report.passed)

    def test_translation_count(self):
        eq = translation_by_name("eq")
        with self.assertRaises(ValueError):
            check_translation_square([eq] * 2, coproduct_operation(2), coproduct_operation(2), FAMILY)


class TestTranslatedFVM(unittest.TestCase):
    def test_equality_translation_of_coproduct(self):
        report = check_translated_fvm(
            translation_by_name("eq"),
            coproduct_operation(2),
            lambda A, B: decide_fo_noeq_equiv(2, A, B),
            FAMILY[:4],
            reference=lambda A, B: decide_fo_eq_equiv(2, A, B),
        )
        self.assertTrue(report.passed, msg="\n".join(report.lines()))
        self.assertEqual(len(report.check_lines), 2)


if __name__ == "__main__":
    unittest.main()
