import unittest

from fvm.game_comonads import EFComonad, ModalComonad, PebbleComonad
from fvm.kleisli_laws import (
    LAW_NAMES,
    check_comonad_morphism,
    check_kleisli_law,
    coproduct_operation,
    identity_law,
    kappa_coproduct,
    kappa_merge,
    kappa_product,
    kappa_reduct,
    kappa_vee,
    law_by_name,
    morph_cos_to_pebble3,
    morph_ef_to_pebble,
    morph_modal_to_pebble2,
    product_operation,
)
from fvm.structures import StructMap, enumerate_structures, graph_family, structure
from fvm.util import (
    EndpointMismatchError,
    FVMError,
    TruncationError,
    Verdict,
    encode,
    encode_tagged,
)

GRAPHS = enumerate_structures({"E": 2}, [1, 2], up_to_iso=True)[:3]
POINTED = enumerate_structures({"R": 2, "P": 1}, [1], pointed=True)
LOOP = structure({"E": 2}, "a", {"E": [("a", "a")]})
EDGE = structure({"E": 2}, "ab", {"E": [("a", "b")]})


def failure_lines(report):
    return "\n".join(report.lines())


class TestOperations(unittest.TestCase):
    def test_arity_is_checked(self):
        with self.assertRaises(EndpointMismatchError):
            coproduct_operation(2).apply([EDGE])

    def test_action_on_maps(self):
        H = product_operation(2)
        f = StructMap(EDGE, LOOP, {"a": "a", "b": "a"})
        Hf = H.apply_map([f, StructMap.identity(EDGE)])
        self.assertEqual(Hf(encode(["b", "a"])), encode(["a", "a"]))
        identities = [StructMap.identity(EDGE), StructMap.identity(LOOP)]
        self.assertEqual(H.apply_map(identities), StructMap.identity(H.apply([EDGE, LOOP])))


class TestComponents(unittest.TestCase):
    def test_coproduct_component_restricts_to_the_last_component(self):
        L = kappa_coproduct(EFComonad(3))
        kappa = L.component([EDGE, LOOP])
        w = encode([encode_tagged(1, "a"), encode_tagged(2, "a"), encode_tagged(1, "b")])
        self.assertEqual(kappa(w), encode_tagged(1, encode(["a", "b"])))

    def test_ef_to_pebble_places_pebbles_in_order(self):
        L = morph_ef_to_pebble(2)
        kappa = L.component([EDGE])
        self.assertEqual(kappa(encode(["b", "a"])), encode([[0, "b"], [1, "a"]]))

    def test_truncation_must_be_long_enough(self):
        with self.assertRaises(TruncationError):
            morph_ef_to_pebble(3, 2)
        with self.assertRaises(TruncationError):
            morph_modal_to_pebble2(2, 2)
        with self.assertRaises(TruncationError):
            morph_cos_to_pebble3(4, 3)

    def test_no_coproduct_law_for_modal_comonad(self):
        with self.assertRaises(FVMError):
            kappa_coproduct(ModalComonad(2))
        with self.assertRaises(ValueError):
            kappa_coproduct(EFComonad(2), m=1)


class TestLawChecks(unittest.TestCase):
    def assertLaw(self, report):
        self.assertTrue(report.passed, msg=failure_lines(report))
        self.assertGreater(report.count(Verdict.PASS), 0, msg="Nothing was checked")

    def test_coproduct_of_ef_comonad(self):
        self.assertLaw(check_kleisli_law(kappa_coproduct(EFComonad(2)), GRAPHS))

    def test_coproduct_of_pebble_comonad(self):
        family = enumerate_structures({"E": 2}, [1])
        self.assertLaw(check_kleisli_law(kappa_coproduct(PebbleComonad(2, 2)), family))

    def test_product_of_ef_comonad(self):
        self.assertLaw(check_kleisli_law(kappa_product(EFComonad(2)), GRAPHS))

    def test_product_of_modal_comonad(self):
        self.assertLaw(check_kleisli_law(kappa_product(ModalComonad(1)), POINTED))

    def test_reduct(self):
        family = enumerate_structures({"R": 2, "P": 1}, [1, 2], up_to_iso=True)[:5]
        self.assertLaw(check_kleisli_law(kappa_reduct(2, {"P": 1}), family))

    def test_merge(self):
        self.assertLaw(check_kleisli_law(kappa_merge(1, "R"), POINTED))

    def test_vee(self):
        self.assertLaw(check_kleisli_law(kappa_vee(1), POINTED))

    def test_unpointed_arguments_are_skipped(self):
        report = check_kleisli_law(kappa_vee(1), enumerate_structures({"R": 2}, [1]))
        self.assertEqual(report.count(Verdict.SKIP), 4)
        self.assertTrue(report.passed)

    def test_unrestricted_coproduct_is_not_a_law(self):
        L = kappa_coproduct(EFComonad(2), restrict=False)
        self.assertEqual(L.name, "coproduct-E-unrestricted")
        report = check_kleisli_law(L, GRAPHS)
        self.assertFalse(report.passed)


class TestComonadMorphisms(unittest.TestCase):
    def assertMorphism(self, report):
        self.assertTrue(report.passed, msg=failure_lines(report))

    def test_ef_to_pebble(self):
        self.assertMorphism(check_comonad_morphism(morph_ef_to_pebble(2), GRAPHS))

    def test_modal_to_pebble2(self):
        self.assertMorphism(check_comonad_morphism(morph_modal_to_pebble2(1), POINTED))

    def test_cos_to_pebble3(self):
        self.assertMorphism(check_comonad_morphism(morph_cos_to_pebble3(3), graph_family(3)))

    def test_identity(self):
        L = identity_law(EFComonad(2))
        self.assertTrue(L.is_comonad_morphism)
        self.assertMorphism(check_comonad_morphism(L, GRAPHS))

    def test_only_identity_operation_laws(self):
        with self.assertRaises(EndpointMismatchError):
            check_comonad_morphism(kappa_product(EFComonad(2)), GRAPHS)


class TestRegistry(unittest.TestCase):
    def test_every_name_builds(self):
        for name in LAW_NAMES:
            L = law_by_name(name, k=2, length=3, tau={"P": 1})
            self.assertEqual(L.arity, len(L.sources), msg=name)

    def test_unknown_name(self):
        with self.assertRaises(FVMError):
            law_by_name("pushout")


if __name__ == "__main__":
    unittest.main()
