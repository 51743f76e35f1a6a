"""Comonads in Kleisli form over finite structures.

A comonad is given by its object map, its counit and its coextension. Everything
else (functor action, comultiplication, Kleisli composition) is derived here.

All derived operations work one element at a time: ``C(C(A))`` is usually far too
large to build, but the image of a single element under ``δ`` or ``C(f)`` is cheap.
Structures are only materialized when a homomorphism has to be checked.
"""

import logging
import random
from dataclasses import dataclass

from fvm.structures import (
    Structure,
    StructMap,
    classify_map,
    homomorphisms,
    is_embedding,
    is_homomorphism,
    iter_homomorphisms,
)
from fvm.util import (
    BudgetExceeded,
    CheckReport,
    EndpointMismatchError,
    FVMError,
    MalformedMapError,
    NotAHomomorphismError,
    UnsupportedComonadError,
    Verdict,
    first_mismatch,
    ordered_map,
    structure_id,
)

log = logging.getLogger(__name__)

# Above this many candidate maps |B|^|C(A)| the law checker samples homomorphisms.
EXHAUSTIVE_LIMIT = 10**5


class Comonad:
    """Base class of the comonads shipped with fvm.

    Subclasses implement the object map (``_build``), the element-level counit and
    coextension, membership and relation tests on single elements, and, when the
    universe is ordered by prefixes, ``prefixes``.
    """

    name = None
    # "plain" comonads act on all structures, "pointed" ones only on pointed structures
    kind = "plain"
    # coalgebras need elements ordered by prefixes
    has_prefix_order = True

    def __init__(self):
        self._cache = {}

    @property
    def params(self):
        return {}

    @property
    def label(self):
        if not self.params:
            return self.name
        inner = ",".join(f"{key}={value}" for key, value in self.params.items())
        return f"{self.name}[{inner}]"

    def __repr__(self):
        return self.label

    def __eq__(self, other):
        return type(self) is type(other) and self.params == other.params

    def __hash__(self):
        return hash((type(self).__name__, tuple(self.params.items())))

    def to_doc(self):
        return {"name": self.name, **self.params}

    #########################
    #  Primitive components #
    #########################

    def check_input(self, A):
        """Raise an FVMError when ``A`` is outside the domain of the comonad."""

    def accepts(self, A):
        try:
            self.check_input(A)
        except FVMError:
            return False
        return True

    def build(self, A):
        """The structure ``C(A)``; cached per argument."""
        if A not in self._cache:
            self.check_input(A)
            self._cache[A] = self._build(A)
            log.debug(f"Built {self.label} of {structure_id(A)}: {len(self._cache[A])} elements")
        return self._cache[A]

    def _build(self, A):
        raise NotImplementedError

    def counit_element(self, w):
        raise NotImplementedError

    def coextend_element(self, h, w):
        """Image of the element ``w`` of ``C(A)`` under ``h*``, for ``h`` a function on elements."""
        raise NotImplementedError

    def contains(self, A, w):
        """Whether ``w`` is an element of ``C(A)``, decided without building ``C(A)``."""
        raise NotImplementedError

    def holds(self, A, name, elements):
        """Whether relation ``name`` holds on ``elements`` in ``C(A)``."""
        raise NotImplementedError

    def point_element(self, point):
        raise NotImplementedError

    def prefixes(self, w):
        """The chain of prefixes of ``w``, shortest first and ending with ``w``."""
        raise UnsupportedComonadError(f"{self.label} has no prefix order on its elements")

    #########################
    #   Derived components  #
    #########################

    def lift_point(self, A):
        if A.point is None:
            return None
        return self.point_element(A.point)

    def functor_element(self, f, w):
        counit = self.counit_element
        return self.coextend_element(lambda v: f(counit(v)), w)

    def delta_element(self, w):
        return self.coextend_element(lambda v: v, w)

    def is_prefix(self, v, w):
        return v in self.prefixes(w)


@dataclass(frozen=True)
class KleisliMorphism:
    """A morphism ``A -> B`` of the Kleisli category, carried by a homomorphism ``C(A) -> B``."""

    comonad: Comonad
    source: Structure
    target: Structure
    map: StructMap

    def __post_init__(self):
        if self.map.source != self.comonad.build(self.source) or self.map.target != self.target:
            raise EndpointMismatchError(
                f"The map does not go from {self.comonad.label}(source) to the target"
            )
        if not is_homomorphism(self.map):
            raise NotAHomomorphismError("A Kleisli morphism must be carried by a homomorphism")


#########################
#   Derived operations  #
#########################


def counit(C, A):
    CA = C.build(A)
    return StructMap(CA, A, {w: C.counit_element(w) for w in CA.universe})


def coextend(C, f):
    """``f*: C(A) -> C(B)`` for a homomorphism ``f: C(A) -> B``."""
    CB = C.build(f.target)
    return StructMap(f.source, CB, {w: C.coextend_element(f, w) for w in f.source.universe})


def functor_map(C, f):
    """``C(f) = (f ∘ ε)*``."""
    if not is_homomorphism(f):
        raise NotAHomomorphismError("functor_map needs a homomorphism")
    CA = C.build(f.source)
    CB = C.build(f.target)
    return StructMap(CA, CB, {w: C.functor_element(f, w) for w in CA.universe})


def comultiplication(C, A):
    """``δ_A = id*``, with ``C(C(A))`` built in full; only feasible for small ``C(A)``."""
    CA = C.build(A)
    CCA = C.build(CA)
    return StructMap(CA, CCA, {w: C.delta_element(w) for w in CA.universe})


def kleisli_identity(C, A):
    return KleisliMorphism(C, A, A, counit(C, A))


def kleisli_compose(C, g, f):
    """``g • f = g ∘ f*``."""
    if f.comonad != C or g.comonad != C:
        raise EndpointMismatchError("Both Kleisli morphisms must belong to the same comonad")
    if f.target != g.source:
        raise EndpointMismatchError("The target of f is not the source of g")
    CA = f.map.source
    assignment = {w: g.map(C.coextend_element(f.map, w)) for w in CA.universe}
    return KleisliMorphism(C, f.source, g.target, StructMap(CA, g.target, assignment))


#########################
#      Law checking     #
#########################


def _law_homomorphisms(source, target, limit, rng):
    try:
        return homomorphisms(source, target, limit, rng=rng)
    except BudgetExceeded:
        return [], "sampled"


def _check_structure(C, A, family, limit, seed, associativity_targets):
    subject = structure_id(A)
    report = CheckReport("LAW")
    rng = random.Random(seed)
    CA = C.build(A)
    elements = CA.universe
    report.add_check(f"{C.label}:counit_hom", subject, is_homomorphism(counit(C, A)))

    mismatch = first_mismatch(elements, lambda w: C.coextend_element(C.counit_element, w), lambda w: w)
    report.add_check(f"{C.label}:counit_coextension_is_identity", subject, mismatch is None, mismatch or "")

    mismatch = first_mismatch(elements, lambda w: C.counit_element(C.delta_element(w)), lambda w: w)
    report.add_check(f"{C.label}:counit_after_delta", subject, mismatch is None, mismatch or "")

    mismatch = first_mismatch(
        elements, lambda w: C.functor_element(C.counit_element, C.delta_element(w)), lambda w: w
    )
    report.add_check(f"{C.label}:functor_counit_after_delta", subject, mismatch is None, mismatch or "")

    mismatch = first_mismatch(
        elements,
        lambda w: C.delta_element(C.delta_element(w)),
        lambda w: C.functor_element(C.delta_element, C.delta_element(w)),
    )
    report.add_check(f"{C.label}:delta_coassociative", subject, mismatch is None, mismatch or "")

    modes = set()
    counit_failure = None
    coextension_failure = None
    associativity_failure = None
    for B in family:
        if not C.accepts(B) or B.is_pointed != CA.is_pointed:
            continue
        fs, mode = _law_homomorphisms(CA, B, limit, rng)
        modes.add(mode)
        for f in fs:
            mismatch = first_mismatch(
                elements, lambda w: C.counit_element(C.coextend_element(f, w)), f
            )
            if mismatch and counit_failure is None:
                counit_failure = f"target {structure_id(B)} {mismatch}"
            try:
                extended = coextend(C, f)
                if not is_homomorphism(extended) and coextension_failure is None:
                    coextension_failure = f"target {structure_id(B)}: f* is not a homomorphism"
            except MalformedMapError as e:
                if coextension_failure is None:
                    coextension_failure = f"target {structure_id(B)}: {e}"
                continue
            CB = C.build(B)
            for D in family[:associativity_targets]:
                if not C.accepts(D) or D.is_pointed != CB.is_pointed:
                    continue
                gs, mode = _law_homomorphisms(CB, D, limit, rng)
                modes.add(mode)
                for g in gs[:4]:
                    mismatch = first_mismatch(
                        elements,
                        lambda w: C.coextend_element(lambda v: g(C.coextend_element(f, v)), w),
                        lambda w: C.coextend_element(g, C.coextend_element(f, w)),
                    )
                    if mismatch and associativity_failure is None:
                        associativity_failure = f"targets {structure_id(B)},{structure_id(D)} {mismatch}"
    report.add_check(f"{C.label}:counit_after_coextension", subject, counit_failure is None, counit_failure or "")
    report.add_check(f"{C.label}:coextension_hom", subject, coextension_failure is None, coextension_failure or "")
    report.add_check(
        f"{C.label}:coextension_associative", subject, associativity_failure is None, associativity_failure or ""
    )
    report.record_mode(
        f"{C.label}:{subject}", "sampled" if "sampled" in modes else "exhaustive"
    )
    return report


def check_comonad_laws(C, family, limit=EXHAUSTIVE_LIMIT, seed=0, associativity_targets=3):
    """Check the three Kleisli-form equations and the derived comonad equations.

    Every structure of ``family`` accepted by ``C`` is checked; the homomorphisms
    ``f: C(A) -> B`` range over all of them when there are at most ``limit``
    candidate maps, and over a seeded sample otherwise.
    """
    report = CheckReport("LAW")
    members = [A for A in family if C.accepts(A)]
    for A in family:
        if not C.accepts(A):
            report.add_check(f"{C.label}:domain", structure_id(A), Verdict.SKIP, f"not in the domain of {C.label}")
    results = ordered_map(
        lambda A: _check_structure(C, A, members, limit, seed, associativity_targets), members
    )
    for result in results:
        report.extend(result)
    return report


def check_preserves_embeddings(C, family):
    """``C(e)`` is an embedding for every embedding ``e`` between members of ``family``."""
    report = CheckReport("LAW")
    members = [A for A in family if C.accepts(A)]
    pairs = [(A, B) for A in members for B in members if A.is_pointed == B.is_pointed]

    def check(pair):
        A, B = pair
        subject = f"{structure_id(A)},{structure_id(B)}"
        embeddings = [f for f in iter_homomorphisms(A, B, injective=True) if is_embedding(f)]
        for e in embeddings:
            image = classify_map(functor_map(C, e))
            if not image.is_embedding:
                return subject, False, f"{C.label}(e) is {image.value} for e={dict(sorted(e.assignment.items()))}"
        return subject, True, f"{len(embeddings)} embeddings" if embeddings else ""

    for subject, ok, detail in ordered_map(check, pairs):
        report.add_check(f"{C.label}:preserves_embeddings", subject, ok, detail)
    return report


class CorruptedComonad(Comonad):
    """Wraps a comonad and breaks its coextension by dropping the last letter of the argument.

    Used to make sure the law checker actually detects violations.
    """

    def __init__(self, base):
        super().__init__()
        self.base = base
        self.name = f"corrupted-{base.name}"
        self.kind = base.kind
        self.has_prefix_order = base.has_prefix_order

    @property
    def params(self):
        return self.base.params

    def check_input(self, A):
        self.base.check_input(A)

    def _build(self, A):
        return self.base.build(A)

    def counit_element(self, w):
        return self.base.counit_element(w)

    def coextend_element(self, h, w):
        chain = self.base.prefixes(w)
        shortened = chain[-2] if len(chain) > 1 else w
        return self.base.coextend_element(h, shortened)

    def contains(self, A, w):
        return self.base.contains(A, w)

    def holds(self, A, name, elements):
        return self.base.holds(A, name, elements)

    def point_element(self, point):
        return self.base.point_element(point)

    def prefixes(self, w):
        return self.base.prefixes(w)
