"""Verification suites run by ``fvm suite``.

Each suite turns one family of claims into report lines: the comonad laws, the
Kleisli laws, agreement of the comonadic relations with the game oracles,
witness composition, the full-logic machinery, translations, spectra and the
counterexample search. Families are generated exhaustively from the settings,
so two runs with the same settings produce the same report.
"""

import functools
import itertools
import logging

import networkx as nx
import yaml
from pydantic import BaseModel, ConfigDict, PositiveInt, ValidationError, field_validator

from fvm.coalgebras import (
    check_full_logic,
    check_surjective_path_image,
    compose_full_witness,
    iso_span,
)
from fvm.comonads import CorruptedComonad, check_comonad_laws, check_preserves_embeddings
from fvm.fvm_engine import (
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
from fvm.game_comonads import CospectralComonad, EFComonad, ModalComonad, PebbleComonad
from fvm.kleisli_laws import (
    check_comonad_morphism,
    check_kleisli_law,
    coproduct_operation,
    law_by_name,
    merge_operation,
    pointed_coproduct_operation,
    product_operation,
    vee_operation,
)
from fvm.spectra import adjacency_matrix, char_poly, char_poly_reference, graph_char_poly
from fvm.structures import (
    Signature,
    Structure,
    are_isomorphic,
    disjoint_union,
    enumerate_structures,
    graph_family,
    graph_structure,
    is_homomorphism,
    iter_homomorphisms,
    search_isomorphism,
)
from fvm.translations import (
    WEAK_VARIANTS,
    check_translated_fvm,
    check_translation_square,
    translation_by_name,
)
from fvm.util import (
    CheckReport,
    FVMError,
    IntegrityError,
    InvalidWitnessError,
    SearchBudget,
    Verdict,
    decode,
    ordered_map,
    structure_id,
    validation_message,
)

log = logging.getLogger(__name__)

SUITES = (
    "laws",
    "kleisli-laws",
    "fvm-pe",
    "fvm-counting",
    "fvm-full",
    "translations",
    "spectra",
    "counterexample",
)


#########################
#     Suite config      #
#########################


class SuiteConfig(BaseModel):
    """Settings of ``fvm suite``, usually read from a YAML file."""

    model_config = ConfigDict(extra="forbid")

    signature: dict[str, PositiveInt] = {"E": 2}
    modal_signature: dict[str, PositiveInt] = {"R": 2, "P": 1}
    weak_signature: dict[str, PositiveInt] = {"R": 2, "S": 2}
    size: PositiveInt = 2
    graph_size: PositiveInt = 4
    ks: list[PositiveInt] = [1, 2]
    lengths: list[PositiveInt] = [2, 3]
    seed: int = 0
    limit: PositiveInt = 10**5
    cap: PositiveInt = 64
    weak_variant: str = "hide"
    suites: list[str] = list(SUITES)
    mutate: bool = False

    @field_validator("suites")
    @classmethod
    def known_suites(cls, value):
        unknown = [name for name in value if name not in SUITES]
        if unknown:
            raise ValueError(f"unknown suites {unknown}, expected a subset of {list(SUITES)}")
        return value

    @field_validator("ks", "lengths")
    @classmethod
    def nonempty(cls, value):
        if not value:
            raise ValueError("at least one value is needed")
        return value

    @field_validator("weak_variant")
    @classmethod
    def known_variant(cls, value):
        if value not in WEAK_VARIANTS:
            raise ValueError(f"expected one of {list(WEAK_VARIANTS)}")
        return value

    @field_validator("signature", "modal_signature", "weak_signature")
    @classmethod
    def nonempty_signature(cls, value):
        if not value:
            raise ValueError("the signature needs at least one symbol")
        return value

    def header(self):
        return (
            f"SUITE seed={self.seed} size={self.size} graph_size={self.graph_size} "
            f"k={','.join(map(str, self.ks))} len={','.join(map(str, self.lengths))} "
            f"signature={Signature.of(self.signature)} suites={','.join(self.suites) or '-'} "
            f"mutate={str(self.mutate).lower()}"
        )


def load_suite_config(path, overrides=None):
    """Read the YAML settings file; ``overrides`` replace individual settings."""
    with open(path) as settings_file:
        settings = yaml.full_load(settings_file) or {}
    settings.update(overrides or {})
    try:
        return SuiteConfig.model_validate(settings)
    except ValidationError as e:
        raise FVMError(validation_message(path, e)) from e


#########################
#       Families        #
#########################


def _sizes(cfg_size):
    return range(1, cfg_size + 1)


def structure_family(signature, size, pointed=False, up_to_iso=False):
    return enumerate_structures(signature, _sizes(size), pointed=pointed, up_to_iso=up_to_iso)


def first_binary(signature):
    binary = Signature.of(signature).binary_symbols
    if not binary:
        raise FVMError(f"{Signature.of(signature)} has no binary symbol")
    return binary[0]


def law_family(name, signature, size, graph_size, modal_signature=None):
    """The argument family a shipped law is checked on."""
    modal_signature = modal_signature or {"R": 2, "P": 1}
    if name == "reduct":
        return structure_family(modal_signature, size)
    if name in ("product-M", "merge", "vee", "modal-to-pebble2"):
        return structure_family(signature, size, pointed=True)
    if name in ("product-Cos", "cos-to-pebble3"):
        return graph_family(graph_size)
    return structure_family(signature, size)


def build_law(name, k, length, signature=None, modal_signature=None):
    modal_signature = modal_signature or {"R": 2, "P": 1}
    if name == "reduct":
        tau = {s: a for s, a in Signature.of(modal_signature).symbols if a == 1}
        return law_by_name(name, k=k, length=length, tau=tau)
    if name == "merge":
        return law_by_name(name, k=k, length=length, relation=first_binary(signature or {"E": 2}))
    return law_by_name(name, k=k, length=length)


#########################
#       Suites          #
#########################


def _family_check(report, name, subject, failures, total):
    detail = f"{total} checked" if not failures else f"{len(failures)} of {total}, first {failures[0]}"
    report.add_check(name, subject, not failures, detail)


def suite_laws(cfg):
    report = CheckReport("LAW")
    family = structure_family(cfg.signature, cfg.size)
    pointed = structure_family(cfg.signature, cfg.size, pointed=True)
    comonads = []
    for k in cfg.ks:
        comonads.append((EFComonad(k), family))
        comonads += [(PebbleComonad(k, length), family) for length in cfg.lengths]
        if Signature.of(cfg.signature).is_modal:
            comonads.append((ModalComonad(k), pointed))
    graphs = graph_family(cfg.graph_size)
    comonads += [(CospectralComonad(length), graphs) for length in cfg.lengths]
    if cfg.mutate:
        # one-letter words have no parent prefix to fall back to
        comonads.append((CorruptedComonad(EFComonad(max(2, *cfg.ks))), family))
    for C, members in comonads:
        report.extend(check_comonad_laws(C, members, cfg.limit, cfg.seed))
        report.extend(check_preserves_embeddings(C, members))
    for k in cfg.ks:
        E = EFComonad(k)
        failures = [
            structure_id(A)
            for A in family
            if not set(E.build(A).universe) <= set(EFComonad(k + 1).build(A).universe)
        ]
        _family_check(report, f"{E.label}:monotone", "family", failures, len(family))
        for length in cfg.lengths:
            P = PebbleComonad(k, length)
            # coextending a constant keeps the pebble sequence of every word
            failures = [
                structure_id(A)
                for A in family
                for w in P.build(A).universe
                if [p for p, _ in decode(P.coextend_element(lambda v, A=A: A.universe[0], w))]
                != [p for p, _ in decode(w)]
            ]
            _family_check(report, f"{P.label}:length_preserving", "family", failures, len(family))
    return report


def suite_kleisli_laws(cfg):
    report = CheckReport("LAW")
    k, length = max(cfg.ks), max(cfg.lengths)
    names = [
        "reduct",
        "coproduct-E",
        "coproduct-P",
        "product-E",
        "product-P",
        "product-M",
        "product-Cos",
        "merge",
        "vee",
        "ef-to-pebble",
        "modal-to-pebble2",
        "cos-to-pebble3",
    ]
    if cfg.mutate:
        names.append("coproduct-E-unrestricted")
    for name in names:
        L = build_law(name, k, length, cfg.signature, cfg.modal_signature)
        family = law_family(name, cfg.signature, cfg.size, cfg.graph_size, cfg.modal_signature)
        if L.is_comonad_morphism:
            report.extend(check_comonad_morphism(L, family, limit=cfg.limit, seed=cfg.seed))
        else:
            report.extend(check_kleisli_law(L, family, limit=cfg.limit, seed=cfg.seed))
    return report


def _agreement(report, name, pairs, comonadic, oracle):
    results = ordered_map(lambda pair: (pair, comonadic(*pair), oracle(*pair)), pairs)
    disagreements = [
        f"{structure_id(A)},{structure_id(B)}" for (A, B), left, right in results if left != right
    ]
    _family_check(report, name, "pairs", disagreements, len(pairs))
    return [(pair, left) for pair, left, _ in results]


def _compose_all(report, name, L, witnesses, compose, verify, cap):
    failures = []
    tuples = list(itertools.islice(itertools.product(witnesses, repeat=L.arity), cap))
    for ws in tuples:
        subject = "+".join(f"{structure_id(w.source)}>{structure_id(w.target)}" for w in ws)
        try:
            composite = compose(L, list(ws))
            if not verify(composite):
                failures.append(subject)
        except IntegrityError as e:
            failures.append(f"{subject} {e}")
    _family_check(report, name, L.name, failures, len(tuples))


def suite_fvm_pe(cfg):
    report = CheckReport("FVM")
    family = structure_family(cfg.signature, cfg.size)
    pairs = list(itertools.product(family, repeat=2))
    for k in cfg.ks:
        E = EFComonad(k)
        results = _agreement(
            report,
            f"{E.label}:pe_game_agreement",
            pairs,
            lambda A, B, E=E: search_pe_witness(E, A, B) is not None,
            lambda A, B, k=k: decide_pe_game(k, A, B),
        )
        witnesses = [search_pe_witness(E, A, B) for (A, B), found in results if found]
        for name in ("coproduct-E", "product-E"):
            L = build_law(name, k, max(cfg.lengths))
            _compose_all(
                report,
                f"{E.label}:pe_composition",
                L,
                witnesses,
                compose_pe_witness,
                lambda w: is_homomorphism(w.map),
                cfg.cap,
            )
    if Signature.of(cfg.signature).is_modal:
        pointed = structure_family(cfg.signature, cfg.size, pointed=True)
        pointed_pairs = list(itertools.product(pointed, repeat=2))
        for k in cfg.ks:
            M = ModalComonad(k)
            _agreement(
                report,
                f"{M.label}:simulation_agreement",
                pointed_pairs,
                lambda A, B, M=M: search_pe_witness(M, A, B) is not None,
                lambda A, B, k=k: decide_modal_sim(k, A, B),
            )
    return report


def suite_fvm_counting(cfg):
    report = CheckReport("FVM")
    family = structure_family(cfg.signature, cfg.size)
    k = min(cfg.ks)
    E = EFComonad(k)
    pairs = list(itertools.product(family, repeat=2))
    searches = ordered_map(lambda pair: search_kleisli_iso(E, *pair, SearchBudget(cfg.limit)), pairs)
    results = dict(zip(pairs, searches))
    undecided = [pair for pair, result in results.items() if result.verdict is Verdict.INDETERMINATE]
    if undecided:
        A, B = undecided[0]
        report.add_check(
            f"{E.label}:kleisli_iso_search",
            "pairs",
            Verdict.INDETERMINATE,
            f"{len(undecided)} pairs out of budget, first {structure_id(A)},{structure_id(B)}",
        )
    asymmetric = [
        f"{structure_id(A)},{structure_id(B)}"
        for (A, B), result in results.items()
        if result.found != results[(B, A)].found
        and Verdict.INDETERMINATE not in (result.verdict, results[(B, A)].verdict)
    ]
    _family_check(report, f"{E.label}:kleisli_iso_symmetric", "pairs", asymmetric, len(pairs))
    witnesses = [result.witness for result in results.values() if result.found]
    for name in ("coproduct-E", "product-E"):
        L = build_law(name, k, max(cfg.lengths))
        _compose_all(
            report,
            f"{E.label}:counting_composition",
            L,
            witnesses,
            compose_counting_witness,
            lambda w: verify_kleisli_inverse(w.comonad, w.forward, w.backward),
            cfg.cap,
        )
    return report


def _automorphism_span(C, A):
    *_, h = iter_homomorphisms(A, A, injective=True)
    return iso_span(C, h)


def suite_fvm_full(cfg):
    report = CheckReport("FULL")
    family = structure_family(cfg.signature, cfg.size)
    pointed = structure_family(cfg.signature, cfg.size, pointed=True)
    laws = []
    for k in cfg.ks:
        laws += [
            (build_law("coproduct-E", k, max(cfg.lengths)), family),
            (build_law("product-E", k, max(cfg.lengths)), family),
            (
                build_law("reduct", k, max(cfg.lengths), modal_signature=cfg.modal_signature),
                structure_family(cfg.modal_signature, cfg.size, up_to_iso=True),
            ),
        ]
        report.extend(check_surjective_path_image(EFComonad(k), family))
    modal = Signature.of(cfg.signature).is_modal
    if modal:
        k = max(cfg.ks)
        laws.append((build_law("product-M", k, max(cfg.lengths)), pointed))
        report.extend(check_surjective_path_image(ModalComonad(k), pointed))
    for L, members in laws:
        report.extend(check_full_logic(L, members, cfg.cap))
        tuples = [
            list(args)
            for args in itertools.islice(itertools.product(members, repeat=L.arity), cfg.cap)
            if L.accepts(list(args))
        ]
        failures = []
        for args in tuples:
            try:
                compose_full_witness(L, [_automorphism_span(C, A) for C, A in zip(L.sources, args)])
            except (IntegrityError, InvalidWitnessError) as e:
                failures.append(f"{'+'.join(structure_id(A) for A in args)} {e}")
        _family_check(report, f"{L.name}:automorphism_spans", "tuples", failures, len(tuples))

    equivalent = functools.lru_cache(maxsize=None)(lambda A, B: decide_fo_noeq_equiv(2, A, B))
    related = [(A, B) for A, B in itertools.product(family, repeat=2) if equivalent(A, B)]
    violations = [
        f"{structure_id(A1)},{structure_id(B1)} {structure_id(A2)},{structure_id(B2)}"
        for (A1, B1), (A2, B2) in itertools.product(related, repeat=2)
        if not equivalent(disjoint_union([A1, A2]), disjoint_union([B1, B2]))
    ]
    _family_check(report, "coproduct:fo_noeq_fvm", "pairs", violations, len(related) ** 2)
    return report


def _translation_injective(report, translation, family):
    failures = [
        f"{structure_id(A)},{structure_id(B)}"
        for A, B in itertools.combinations(family, 2)
        if are_isomorphic(translation(A), translation(B)) and not are_isomorphic(A, B)
    ]
    _family_check(report, f"{translation.name}:injective", "family", failures, len(family))


def suite_translations(cfg):
    report = CheckReport("TR")
    family = structure_family(cfg.signature, cfg.size)
    pointed = structure_family(cfg.signature, cfg.size, pointed=True)
    eq, con, glob = (translation_by_name(name) for name in ("eq", "con", "global"))
    coproduct, prod = coproduct_operation(2), product_operation(2)
    report.extend(check_translation_square([eq] * 3, coproduct, coproduct, family))
    report.extend(check_translation_square([con] * 3, coproduct, coproduct, family))
    report.extend(check_translation_square([glob] * 3, prod, prod, pointed))
    S = Signature.of(cfg.weak_signature).binary_symbols[-1]
    weak = translation_by_name(f"weak:{S}", cfg.weak_variant)
    weak_family = structure_family(cfg.weak_signature, cfg.size, pointed=True, up_to_iso=True)
    report.extend(check_translation_square([weak] * 3, merge_operation(S), vee_operation(), weak_family))
    for translation, members in ((eq, family), (con, family), (glob, pointed)):
        _translation_injective(report, translation, members)
    report.extend(
        check_translated_fvm(
            eq,
            coproduct,
            lambda A, B: decide_fo_noeq_equiv(2, A, B),
            family,
            reference=lambda A, B: decide_fo_eq_equiv(2, A, B),
        )
    )
    return report


def cospectral_pair():
    """``K_{1,4}`` and ``C_4 ⊎ K_1``, the smallest pair of cospectral non-isomorphic graphs."""
    star = graph_structure(nx.star_graph(4))
    cycle_and_point = graph_structure(nx.disjoint_union(nx.cycle_graph(4), nx.empty_graph(1)))
    return star, cycle_and_point


def suite_spectra(cfg):
    report = CheckReport("SPECTRA")
    star, cycle_and_point = cospectral_pair()
    report.add_check(
        "cospectral",
        "K14,C4+K1",
        graph_char_poly(star) == graph_char_poly(cycle_and_point),
    )
    report.add_check(
        "not_isomorphic", "K14,C4+K1", search_isomorphism(star, cycle_and_point) is None
    )
    graphs = graph_family(cfg.graph_size)
    failures = []
    for G in graphs:
        M = adjacency_matrix(G)
        if char_poly(M) != char_poly_reference(M):
            failures.append(structure_id(G))
    _family_check(report, "char_poly_reference", "graphs", failures, len(graphs))
    failures = []
    for G in graphs:
        renamed = Structure(
            G.signature,
            tuple(f"w{x}" for x in G.universe),
            {"E": [(f"w{x}", f"w{y}") for x, y in G.relations["E"]]},
        )
        if graph_char_poly(G) != graph_char_poly(renamed):
            failures.append(structure_id(G))
    _family_check(report, "isomorphic_implies_cospectral", "graphs", failures, len(graphs))
    for length in cfg.lengths:
        L = law_by_name("cos-to-pebble3", length=length)
        report.extend(check_comonad_morphism(L, graphs, limit=cfg.limit, seed=cfg.seed))
    return report


def _quadruple_ids(found):
    return " ".join(
        f"{name}={structure_id(X)}"
        for name, X in (("A1", found.A1), ("B1", found.B1), ("A2", found.A2), ("B2", found.B2))
    )


def suite_counterexample(cfg):
    report = CheckReport("CEX")
    k = max(cfg.ks)
    M = ModalComonad(k)
    modal_relation = functools.lru_cache(maxsize=None)(
        lambda A, B: search_pe_witness(M, A, B) is not None
    )
    family = structure_family(cfg.modal_signature, cfg.size, pointed=True)
    found = find_fvm_counterexample(pointed_coproduct_operation(), modal_relation, family)
    if found is None:
        report.add_check(f"pointed_coproduct:{M.label}", "family", False, "no counterexample found")
    else:
        certified = (
            decide_modal_sim(k, found.A1, found.B1)
            and decide_modal_sim(k, found.A2, found.B2)
            and not decide_modal_sim(k, found.image_A, found.image_B)
        )
        ids = _quadruple_ids(found)
        report.add_check(
            f"pointed_coproduct:{M.label}",
            "family",
            certified,
            ids if certified else f"{ids} not confirmed by the simulation oracle",
        )
    family = structure_family(cfg.signature, cfg.size)
    E2 = EFComonad(2)
    pe = functools.lru_cache(maxsize=None)(lambda A, B: search_pe_witness(E2, A, B) is not None)
    found = find_fvm_counterexample(coproduct_operation(2), pe, family)
    report.add_check(
        f"coproduct:{E2.label}", "family", found is None, "" if found is None else _quadruple_ids(found)
    )
    E1 = EFComonad(1)
    counting = functools.lru_cache(maxsize=None)(
        lambda A, B: search_kleisli_iso(E1, A, B, SearchBudget(cfg.limit)).found
    )
    found = find_fvm_counterexample(product_operation(2), counting, family)
    report.add_check(
        f"product:{E1.label}:counting", "family", found is None, "" if found is None else _quadruple_ids(found)
    )
    return report


SUITE_RUNNERS = {
    "laws": suite_laws,
    "kleisli-laws": suite_kleisli_laws,
    "fvm-pe": suite_fvm_pe,
    "fvm-counting": suite_fvm_counting,
    "fvm-full": suite_fvm_full,
    "translations": suite_translations,
    "spectra": suite_spectra,
    "counterexample": suite_counterexample,
}


def run_suite(cfg):
    """Run the selected suites in a fixed order.

    Returns the exit code, the report lines (header first) and the merged report.
    """
    report = CheckReport("SUITE")
    for name in SUITES:
        if name not in cfg.suites:
            continue
        log.info(f"Running suite {name}")
        report.extend(SUITE_RUNNERS[name](cfg))
    lines = [cfg.header()]
    if report.check_lines:
        lines += report.lines()
        lines.append(
            "SUMMARY "
            + " ".join(f"{verdict.value}={report.count(verdict)}" for verdict in Verdict)
        )
    return (0 if report.passed else 1), lines, report


