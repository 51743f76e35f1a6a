"""Translations that extend a signature with definable relations.

A translation keeps the universe and the original relations and adds new ones:
equality ``I``, Gaifman connectivity ``Con``, the global relation ``G``, or it
closes relations under silent ``S``-steps. If an operation commutes with a
translation, FVM theorems for the operation transfer to the translated logics.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Callable

import networkx as nx

from fvm.structures import Structure, gaifman_closure, search_isomorphism
from fvm.util import CheckReport, SignatureMismatchError, ordered_map, structure_id

log = logging.getLogger(__name__)

WEAK_VARIANTS = ("hide", "plus", "star")


@dataclass(frozen=True)
class Translation:
    name: str
    translate: Callable

    def apply(self, A):
        return self.translate(A)

    def __call__(self, A):
        return self.translate(A)


def _extend(A, extra):
    signature = A.signature.extend({name: 2 for name in extra})
    relations = dict(A.relations)
    relations.update(extra)
    return Structure(signature, A.universe, relations, A.point)


def tr_equality(A):
    """Add ``I``, interpreted as equality."""
    return _extend(A, {"I": [(x, x) for x in A.universe]})


def tr_connectivity(A):
    """Add ``I`` and ``Con``, the pairs in the same component of the Gaifman graph."""
    return _extend(A, {"I": [(x, x) for x in A.universe], "Con": sorted(gaifman_closure(A))})


def tr_global(A):
    """Add the total relation ``G``."""
    return _extend(A, {"G": list(itertools.product(A.universe, repeat=2))})


def _closure(A, S, reflexive):
    graph = nx.DiGraph()
    graph.add_nodes_from(A.universe)
    graph.add_edges_from(A.relations[S])
    return set(nx.transitive_closure(graph, reflexive=reflexive).edges)


def tr_weak(A, S, variant="hide", close_unary=False):
    """Weak translation: every binary ``R`` other than ``S`` becomes ``S*;R;S*``.

    ``variant`` decides what happens to ``S`` itself: ``hide`` empties it, ``plus``
    replaces it by its transitive closure and ``star`` by its reflexive-transitive
    closure. With ``close_unary`` a unary predicate also holds wherever it is
    reachable by ``S``-steps.
    """
    if not A.signature.is_modal:
        raise SignatureMismatchError(f"{A.signature} is not a modal signature")
    if S not in A.signature.binary_symbols:
        raise SignatureMismatchError(f"{S} is not a binary symbol of {A.signature}")
    if variant not in WEAK_VARIANTS:
        raise ValueError(f"Unknown variant {variant!r}, expected one of {WEAK_VARIANTS}")
    star = _closure(A, S, reflexive=True)
    after = {}
    for x, y in star:
        after.setdefault(x, set()).add(y)
    relations = {}
    for name, arity in A.signature.symbols:
        tuples = A.relations[name]
        if name == S:
            if variant == "hide":
                relations[name] = []
            elif variant == "plus":
                relations[name] = sorted(_closure(A, S, reflexive=False))
            else:
                relations[name] = sorted(star)
        elif arity == 2:
            relations[name] = sorted(
                {(x, z) for x, x2 in star for src, y in tuples if src == x2 for z in after[y]}
            )
        elif close_unary:
            relations[name] = [(x,) for x, y in star if (y,) in tuples]
        else:
            relations[name] = list(tuples)
    return Structure(A.signature, A.universe, relations, A.point)


TRANSLATIONS = {
    "eq": Translation("eq", tr_equality),
    "con": Translation("con", tr_connectivity),
    "global": Translation("global", tr_global),
}


def translation_by_name(name, weak_variant="hide"):
    """``eq``, ``con``, ``global`` or ``weak:S``."""
    if name.startswith("weak:"):
        S = name.split(":", 1)[1]
        return Translation(name, lambda A: tr_weak(A, S, weak_variant))
    if name not in TRANSLATIONS:
        raise ValueError(f"Unknown translation {name!r}, expected eq, con, global or weak:S")
    return TRANSLATIONS[name]


#########################
#   Commuting squares   #
#########################


def check_translation_square(translations, H, H_translated, family):
    """Whether ``H'(tr_1(A_1), ..., tr_n(A_n)) ≅ tr(H(A_1, ..., A_n))`` for tuples from ``family``.

    ``translations`` holds one translation per argument and a last one for the result.
    """
    if len(translations) != H.arity + 1:
        raise ValueError(f"Expected {H.arity + 1} translations, got {len(translations)}")
    *argument_trs, result_tr = translations
    name = f"{result_tr.name}:{H.name}/{H_translated.name}"
    report = CheckReport("TR")

    def check(args):
        subject = "+".join(structure_id(A) for A in args)
        try:
            left = H_translated.apply([tr(A) for tr, A in zip(argument_trs, args)])
            right = result_tr(H.apply(args))
        except (SignatureMismatchError, ValueError) as e:
            return subject, False, str(e)
        iso = search_isomorphism(left, right)
        return subject, iso is not None, "" if iso else "no isomorphism"

    tuples = [list(t) for t in itertools.product(family, repeat=H.arity)]
    for subject, ok, detail in ordered_map(check, tuples):
        report.add_check(f"{name}:square", subject, ok, detail)
    return report


def check_translated_fvm(translation, H, relation, family, reference=None):
    """FVM for the translated logic: componentwise ``relation(tr(A_i), tr(B_i))`` implies
    ``relation(tr(H(A⃗)), tr(H(B⃗)))``.

    When ``reference`` is given, it must agree with ``relation`` on the translated
    structures for every pair from ``family``.
    """
    report = CheckReport("TR")
    name = f"{translation.name}:{H.name}"
    translated = {A: translation(A) for A in family}
    if reference is not None:
        disagreements = [
            (A, B)
            for A, B in itertools.product(family, repeat=2)
            if relation(translated[A], translated[B]) != reference(A, B)
        ]
        detail = ""
        if disagreements:
            A, B = disagreements[0]
            detail = f"{len(disagreements)} pairs, first {structure_id(A)},{structure_id(B)}"
        report.add_check(f"{name}:reference_agreement", f"{len(family)}", not disagreements, detail)
    related = [
        (A, B) for A, B in itertools.product(family, repeat=2) if relation(translated[A], translated[B])
    ]
    violations = []
    for pairs in itertools.product(related, repeat=H.arity):
        As = [A for A, _ in pairs]
        Bs = [B for _, B in pairs]
        if not relation(translation(H.apply(As)), translation(H.apply(Bs))):
            violations.append(pairs)
    detail = ""
    if violations:
        first = violations[0]
        detail = "first " + " ".join(f"{structure_id(A)},{structure_id(B)}" for A, B in first)
    report.add_check(f"{name}:translated_fvm", f"{len(related)}", not violations, detail)
    return report
