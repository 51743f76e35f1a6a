import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from fvm.comonads import (
    CorruptedComonad,
    KleisliMorphism,
    check_comonad_laws,
    check_preserves_embeddings,
    coextend,
    comultiplication,
    counit,
    functor_map,
    kleisli_compose,
    kleisli_identity,
)
from fvm.game_comonads import CospectralComonad, EFComonad, ModalComonad, PebbleComonad
from fvm.structures import (
    StructMap,
    classify_map,
    enumerate_structures,
    graph_family,
    iter_homomorphisms,
    search_homomorphism,
    structure,
)
from fvm.util import (
    EndpointMismatchError,
    NotAHomomorphismError,
    UnsupportedComonadError,
    Verdict,
    encode,
)

GRAPHS = enumerate_structures({"E": 2}, [1, 2], up_to_iso=True)[:6]
LOOP = structure({"E": 2}, "a", {"E": [("a", "a")]})
EDGE = structure({"E": 2}, "ab", {"E": [("a", "b")]})
K2 = structure({"E": 2}, "ab", {"E": [("a", "b"), ("b", "a")]})
CHAIN = [EDGE, K2, K2, LOOP]


def kleisli_morphisms(C, A, B):
    return [KleisliMorphism(C, A, B, f) for f in iter_homomorphisms(C.build(A), B)]


class TestDerivedOperations(unittest.TestCase):
    def setUp(self):
        self.C = EFComonad(2)

    def test_label_and_document(self):
        self.assertEqual(self.C.label, "E[k=2]")
        self.assertEqual(self.C.to_doc(), {"name": "E", "k": 2})
        self.assertEqual(PebbleComonad(2, 3).label, "P[k=2,len=3]")
        self.assertEqual(EFComonad(2), self.C)
        self.assertNotEqual(EFComonad(3), self.C)

    def test_build_is_cached(self):
        self.assertIs(self.C.build(EDGE), self.C.build(EDGE))

    def test_counit_is_a_homomorphism(self):
        epsilon = counit(self.C, EDGE)
        self.assertTrue(classify_map(epsilon).is_surjective)
        self.assertEqual(epsilon(encode(["a", "b"])), "b")

    def test_coextension_of_the_counit_is_the_identity(self):
        extended = coextend(self.C, counit(self.C, EDGE))
        self.assertEqual(extended, StructMap.identity(self.C.build(EDGE)))

    def test_functor_map(self):
        f = StructMap(EDGE, LOOP, {"a": "a", "b": "a"})
        Cf = functor_map(self.C, f)
        self.assertEqual(Cf(encode(["a", "b"])), encode(["a", "a"]))
        self.assertTrue(classify_map(Cf).is_hom)
        with self.assertRaises(NotAHomomorphismError):
            functor_map(self.C, StructMap(EDGE, EDGE, {"a": "b", "b": "a"}))

    def test_comultiplication(self):
        C = EFComonad(1)
        delta = comultiplication(C, LOOP)
        w = encode(["a"])
        self.assertEqual(delta(w), encode([w]))
        self.assertTrue(classify_map(delta).is_hom)

    def test_kleisli_identity_is_neutral(self):
        CA = self.C.build(EDGE)
        f = KleisliMorphism(self.C, EDGE, LOOP, search_homomorphism(CA, LOOP))
        left = kleisli_compose(self.C, kleisli_identity(self.C, LOOP), f)
        right = kleisli_compose(self.C, f, kleisli_identity(self.C, EDGE))
        self.assertEqual(left.map, f.map)
        self.assertEqual(right.map, f.map)

    def test_kleisli_morphism_endpoints(self):
        with self.assertRaises(EndpointMismatchError):
            KleisliMorphism(self.C, EDGE, LOOP, StructMap(EDGE, LOOP, {"a": "a", "b": "a"}))
        f = KleisliMorphism(self.C, EDGE, LOOP, search_homomorphism(self.C.build(EDGE), LOOP))
        with self.assertRaises(EndpointMismatchError):
            kleisli_compose(self.C, f, f)
        with self.assertRaises(EndpointMismatchError):
            kleisli_compose(EFComonad(3), f, f)

    def test_prefixes(self):
        w = encode(["a", "b"])
        self.assertEqual(self.C.prefixes(w), [encode(["a"]), w])
        self.assertTrue(self.C.is_prefix(encode(["a"]), w))
        with self.assertRaises(UnsupportedComonadError):
            CospectralComonad(3).prefixes(encode([["a", "b"], 0]))


class TestKleisliCategory(unittest.TestCase):
    def test_concrete_composite(self):
        C = EFComonad(1)
        f = KleisliMorphism(
            C, EDGE, K2, StructMap(C.build(EDGE), K2, {encode(["a"]): "b", encode(["b"]): "a"})
        )
        g = KleisliMorphism(
            C, K2, K2, StructMap(C.build(K2), K2, {encode(["a"]): "b", encode(["b"]): "a"})
        )
        composite = kleisli_compose(C, g, f)
        self.assertEqual(composite.map.assignment, {encode(["a"]): "a", encode(["b"]): "b"})
        self.assertEqual((composite.source, composite.target), (EDGE, K2))

    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from([EFComonad(1), EFComonad(2), PebbleComonad(1, 2)]), st.data())
    def test_composition_is_associative_and_unital(self, C, data):
        fs = [
            data.draw(st.sampled_from(kleisli_morphisms(C, A, B)))
            for A, B in zip(CHAIN, CHAIN[1:])
        ]
        f, g, h = fs
        left = kleisli_compose(C, h, kleisli_compose(C, g, f))
        right = kleisli_compose(C, kleisli_compose(C, h, g), f)
        self.assertEqual(left.map, right.map)
        for k in fs:
            self.assertEqual(kleisli_compose(C, kleisli_identity(C, k.target), k).map, k.map)
            self.assertEqual(kleisli_compose(C, k, kleisli_identity(C, k.source)).map, k.map)


class TestComonadLaws(unittest.TestCase):
    def _assert_lawful(self, report):
        self.assertTrue(report.passed, msg="\n".join(report.lines()))
        self.assertGreater(report.count(Verdict.PASS), 0)

    def test_ef_comonad(self):
        report = check_comonad_laws(EFComonad(2), GRAPHS)
        self._assert_lawful(report)
        self.assertIn("LAW E[k=2]:counit_hom", report.lines()[0])

    def test_pebble_comonad(self):
        family = enumerate_structures({"E": 2}, [1])
        self._assert_lawful(check_comonad_laws(PebbleComonad(2, 2), family))

    def test_modal_comonad(self):
        family = enumerate_structures({"R": 2, "P": 1}, [1, 2], pointed=True, up_to_iso=True)[:6]
        self._assert_lawful(check_comonad_laws(ModalComonad(2), family))

    def test_modal_comonad_skips_unpointed_structures(self):
        report = check_comonad_laws(ModalComonad(1), enumerate_structures({"R": 2}, [1]))
        self.assertEqual(report.count(Verdict.SKIP), 2)
        self.assertEqual(report.count(Verdict.PASS), 0)

    def test_cospectral_comonad(self):
        self._assert_lawful(check_comonad_laws(CospectralComonad(3), graph_family(3), limit=2000))

    def test_corrupted_coextension_is_detected(self):
        report = check_comonad_laws(CorruptedComonad(EFComonad(2)), GRAPHS)
        self.assertFalse(report.passed)
        failed = {line[1] for line in report.failures()}
        self.assertIn("corrupted-E[k=2]:counit_coextension_is_identity", failed)

    def test_modes_are_recorded(self):
        report = check_comonad_laws(EFComonad(2), GRAPHS[:3], limit=1)
        self.assertTrue(any(line.startswith("MODE") and line.endswith("sampled") for line in report.lines()))


class TestEmbeddingPreservation(unittest.TestCase):
    def test_ef_comonad_preserves_embeddings(self):
        report = check_preserves_embeddings(EFComonad(2), GRAPHS)
        self.assertTrue(report.passed, msg="\n".join(report.lines()))

    def test_modal_comonad_preserves_embeddings(self):
        family = enumerate_structures({"R": 2}, [1, 2], pointed=True)
        report = check_preserves_embeddings(ModalComonad(2), family)
        self.assertTrue(report.passed, msg="\n".join(report.lines()))


if __name__ == "__main__":
    unittest.main()
