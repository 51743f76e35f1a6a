import unittest
from functools import lru_cache

from hypothesis import given, settings
from hypothesis import strategies as st

from fvm.comonads import counit
from fvm.fvm_engine import (
    CountingWitness,
    compose_counting_witness,
    compose_pe_witness,
    decide_fo_eq_equiv,
    decide_fo_noeq_equiv,
    decide_modal_sim,
    decide_pe_game,
    find_fvm_counterexample,
    search_kleisli_iso,
    search_pe_witness,
    verify_kleisli_inverse,
)
from fvm.game_comonads import CospectralComonad, EFComonad, ModalComonad
from fvm.kleisli_laws import (
    coproduct_operation,
    identity_operation,
    kappa_coproduct,
    kappa_product,
    pointed_coproduct_operation,
)
from fvm.structures import (
    StructMap,
    disjoint_union,
    enumerate_structures,
    is_homomorphism,
    product,
    structure,
)
from fvm.util import (
    EndpointMismatchError,
    InvalidWitnessError,
    SearchBudget,
    SignatureMismatchError,
    Verdict,
)

LOOP = structure({"E": 2}, "a", {"E": [("a", "a")]})
EDGE = structure({"E": 2}, "ab", {"E": [("a", "b")]})
RENAMED = structure({"E": 2}, "xy", {"E": [("y", "x")]})
K2 = structure({"E": 2}, "ab", {"E": [("a", "b"), ("b", "a")]})
K3 = structure({"E": 2}, "abc", {"E": [(x, y) for x in "abc" for y in "abc" if x != y]})
SMALL = enumerate_structures({"E": 2}, [1, 2], up_to_iso=True)

MODAL = {"R": 2, "P": 1}
A1 = structure(MODAL, "a", {"R": [("a", "a")]}, point="a")
B1 = structure(MODAL, "ab", {"R": [("a", "b"), ("b", "b")]}, point="a")
A2 = structure(MODAL, "ab", {"R": [("a", "b")], "P": [("b",)]}, point="a")


class TestPositiveExistential(unittest.TestCase):
    def test_triangle_needs_three_rounds(self):
        self.assertIsNotNone(search_pe_witness(EFComonad(2), K3, K2))
        self.assertIsNone(search_pe_witness(EFComonad(3), K3, K2))
        self.assertTrue(decide_pe_game(2, K3, K2))
        self.assertFalse(decide_pe_game(3, K3, K2))

    def test_witness_document(self):
        w = search_pe_witness(EFComonad(2), EDGE, K2)
        doc = w.to_doc()
        self.assertEqual(doc["comonad"], {"name": "E", "k": 2})
        self.assertEqual(len(doc["map"]), len(EFComonad(2).build(EDGE)))

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(SMALL), st.sampled_from(SMALL), st.integers(min_value=1, max_value=2))
    def test_comonad_agrees_with_the_game(self, A, B, k):
        found = search_pe_witness(EFComonad(k), A, B) is not None
        self.assertEqual(found, decide_pe_game(k, A, B))


class TestCounting(unittest.TestCase):
    def test_isomorphic_structures(self):
        result = search_kleisli_iso(EFComonad(2), EDGE, RENAMED)
        self.assertEqual(result.verdict, Verdict.PASS)
        w = result.witness
        self.assertTrue(verify_kleisli_inverse(w.comonad, w.forward, w.backward))

    def test_different_counts(self):
        result = search_kleisli_iso(EFComonad(1), K2, disjoint_union([K2, K2]))
        self.assertEqual(result.verdict, Verdict.FAIL)
        self.assertFalse(result.found)

    def test_counit_need_not_be_surjective(self):
        cases = {
            "M_1 unreachable element": (
                ModalComonad(1),
                structure(MODAL, "ab", {}, point="a"),
            ),
            "Cos_2 isolated vertex": (
                CospectralComonad(2),
                structure({"E": 2}, "abc", {"E": [("a", "b"), ("b", "a")]}),
            ),
        }
        for label, (C, A) in cases.items():
            identity = counit(C, A)
            self.assertTrue(verify_kleisli_inverse(C, identity, identity), msg=label)
            result = search_kleisli_iso(C, A, A)
            self.assertEqual(result.verdict, Verdict.PASS, msg=label)
            w = result.witness
            self.assertTrue(verify_kleisli_inverse(C, w.forward, w.backward), msg=label)

    def test_budget_exhaustion_is_indeterminate(self):
        result = search_kleisli_iso(EFComonad(2), K3, K3, SearchBudget(1))
        self.assertEqual(result.verdict, Verdict.INDETERMINATE)
        self.assertIsNone(result.witness)


class TestComposition(unittest.TestCase):
    def test_compose_through_coproduct(self):
        C = EFComonad(2)
        ws = [search_pe_witness(C, EDGE, K2), search_pe_witness(C, LOOP, LOOP)]
        composite = compose_pe_witness(kappa_coproduct(C), ws)
        self.assertEqual(composite.source, disjoint_union([EDGE, LOOP]))
        self.assertEqual(composite.target, disjoint_union([K2, LOOP]))
        self.assertTrue(is_homomorphism(composite.map))

    def test_compose_through_product(self):
        C = EFComonad(2)
        ws = [search_pe_witness(C, EDGE, K2), search_pe_witness(C, K3, K2)]
        composite = compose_pe_witness(kappa_product(C), ws)
        self.assertEqual(composite.target, product([K2, K2]))

    def test_misaligned_witnesses(self):
        ws = [search_pe_witness(EFComonad(2), EDGE, K2)]
        with self.assertRaises(EndpointMismatchError):
            compose_pe_witness(kappa_coproduct(EFComonad(2)), ws)
        with self.assertRaises(EndpointMismatchError):
            compose_pe_witness(kappa_coproduct(EFComonad(3)), ws * 2)

    def test_compose_counting_witnesses(self):
        C = EFComonad(1)
        w = search_kleisli_iso(C, EDGE, RENAMED).witness
        composite = compose_counting_witness(kappa_product(C), [w, w])
        self.assertEqual(composite.source, product([EDGE, EDGE]))
        self.assertTrue(verify_kleisli_inverse(C, composite.forward, composite.backward))

    def test_broken_counting_witness_is_rejected(self):
        C = EFComonad(1)
        good = search_kleisli_iso(C, EDGE, EDGE).witness
        constant = StructMap(C.build(EDGE), EDGE, {w: "a" for w in C.build(EDGE).universe})
        bad = CountingWitness(C, EDGE, EDGE, good.forward, constant)
        with self.assertRaises(InvalidWitnessError):
            compose_counting_witness(kappa_product(C), [bad, good])


class TestOracles(unittest.TestCase):
    def test_equality_distinguishes_copies(self):
        one = structure({"E": 2}, "a")
        two = structure({"E": 2}, "ab")
        self.assertTrue(decide_fo_noeq_equiv(3, one, two))
        self.assertTrue(decide_fo_eq_equiv(1, one, two))
        self.assertFalse(decide_fo_eq_equiv(2, one, two))

    def test_back_and_forth_reflects_relations(self):
        self.assertFalse(decide_fo_noeq_equiv(2, EDGE, K2))
        self.assertTrue(decide_fo_eq_equiv(3, EDGE, RENAMED))

    def test_modal_simulation_depth(self):
        self.assertTrue(decide_modal_sim(1, A1, B1))
        self.assertTrue(decide_modal_sim(2, A1, B1))
        self.assertFalse(decide_modal_sim(2, A2.with_point("b"), B1.with_point("b")))
        self.assertFalse(decide_modal_sim(1, A2, B1), msg="P does not hold after one step in B1")

    def test_modal_simulation_needs_points(self):
        with self.assertRaises(SignatureMismatchError):
            decide_modal_sim(1, A1.base(), B1)
        with self.assertRaises(SignatureMismatchError):
            decide_pe_game(1, A1, EDGE)

    def test_simulation_matches_modal_comonad(self):
        for A in (A1, B1, A2):
            for B in (A1, B1, A2):
                self.assertEqual(
                    decide_modal_sim(2, A, B),
                    search_pe_witness(ModalComonad(2), A, B) is not None,
                    msg=f"{A} and {B}",
                )


class TestCounterexamples(unittest.TestCase):
    def test_pointed_coproduct_breaks_modal_preservation(self):
        C = ModalComonad(2)

        @lru_cache(maxsize=None)
        def related(A, B):
            return search_pe_witness(C, A, B) is not None

        found = find_fvm_counterexample(pointed_coproduct_operation(), related, [A1, B1, A2])
        self.assertIsNotNone(found)
        self.assertTrue(decide_modal_sim(2, found.A1, found.B1))
        self.assertTrue(decide_modal_sim(2, found.A2, found.B2))
        self.assertFalse(decide_modal_sim(2, found.image_A, found.image_B))
        self.assertEqual(len(found.lines()), 6)

    def test_coproduct_preserves_positive_existential_equivalence(self):
        C = EFComonad(2)

        def related(A, B):
            return search_pe_witness(C, A, B) is not None

        self.assertIsNone(find_fvm_counterexample(coproduct_operation(2), related, SMALL[:4]))

    def test_binary_operations_only(self):
        with self.assertRaises(EndpointMismatchError):
            find_fvm_counterexample(identity_operation(), lambda A, B: True, [LOOP])


if __name__ == "__main__":
    unittest.main()
