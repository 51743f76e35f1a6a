"""Composition of Feferman-Vaught-Mostowski witnesses, model comparison games and
counterexample search.

``A ⇛_C B`` is witnessed by a homomorphism ``C(A) -> B``; ``A ≡#_C B`` by a pair of
mutually inverse Kleisli morphisms. Given a Kleisli law for an operation ``H``,
witnesses for the arguments compose into a witness for ``H`` applied to them.
The game oracles decide the corresponding relations without going through
comonads and are used to cross-check the comonadic side.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache

from fvm.comonads import Comonad
from fvm.structures import (
    Structure,
    StructMap,
    is_homomorphism,
    iter_homomorphisms,
    search_homomorphism,
)
from fvm.util import (
    BudgetExceeded,
    EndpointMismatchError,
    IntegrityError,
    InvalidWitnessError,
    NotAHomomorphismError,
    SearchBudget,
    SignatureMismatchError,
    Verdict,
    ordered_map,
    structure_id,
)

log = logging.getLogger(__name__)


#########################
#       Witnesses       #
#########################


@dataclass(frozen=True)
class PEWitness:
    """A homomorphism ``C(source) -> target``, witnessing ``source ⇛_C target``."""

    comonad: Comonad
    source: Structure
    target: Structure
    map: StructMap

    def __post_init__(self):
        if self.map.source != self.comonad.build(self.source) or self.map.target != self.target:
            raise EndpointMismatchError(
                f"A witness for {self.comonad.label} must go from {self.comonad.label}(source) to target"
            )
        if not is_homomorphism(self.map):
            raise NotAHomomorphismError("The witness map is not a homomorphism")

    def to_doc(self):
        return {
            "comonad": self.comonad.to_doc(),
            "source": self.source.to_doc(),
            "target": self.target.to_doc(),
            "map": dict(sorted(self.map.assignment.items())),
        }


@dataclass(frozen=True)
class CountingWitness:
    """Mutually inverse Kleisli morphisms ``f: C(source) -> target`` and ``g: C(target) -> source``."""

    comonad: Comonad
    source: Structure
    target: Structure
    forward: StructMap
    backward: StructMap

    def to_doc(self):
        return {
            "comonad": self.comonad.to_doc(),
            "source": self.source.to_doc(),
            "target": self.target.to_doc(),
            "forward": dict(sorted(self.forward.assignment.items())),
            "backward": dict(sorted(self.backward.assignment.items())),
        }


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a budget-limited search: PASS with a witness, FAIL, or INDETERMINATE."""

    verdict: Verdict
    witness: object = None

    @property
    def found(self):
        return self.verdict is Verdict.PASS


def verify_kleisli_inverse(C, f, g):
    """Whether ``g ∘ f* = ε_A`` and ``f ∘ g* = ε_B`` for ``f: C(A) -> B`` and ``g: C(B) -> A``."""
    A, B = g.target, f.target
    if f.source != C.build(A) or g.source != C.build(B):
        raise EndpointMismatchError("f and g do not form a pair C(A) -> B, C(B) -> A")
    try:
        for w in f.source.universe:
            if g(C.coextend_element(f, w)) != C.counit_element(w):
                return False
        for v in g.source.universe:
            if f(C.coextend_element(g, v)) != C.counit_element(v):
                return False
    except KeyError:
        return False
    return True


def _check_alignment(L, ws):
    if len(ws) != L.arity:
        raise EndpointMismatchError(f"{L.name} takes {L.arity} witnesses, got {len(ws)}")
    for i, (C, w) in enumerate(zip(L.sources, ws), start=1):
        if w.comonad != C:
            raise EndpointMismatchError(
                f"Witness {i} is for {w.comonad.label}, the law expects {C.label}"
            )


def _compose_leg(L, sources, targets, maps):
    """``H(f⃗) ∘ κ_{A⃗}`` as a StructMap ``D(H(A⃗)) -> H(B⃗)``."""
    H, D = L.operation, L.target
    DH = D.build(H.apply(sources))
    HB = H.apply(targets)
    points = [A.point for A in sources]
    target_points = [B.point for B in targets]
    return StructMap(
        DH, HB, {w: H.map_element(maps, L.kappa(points, w), target_points) for w in DH.universe}
    )


def compose_pe_witness(L, ws):
    """Witness ``H(A⃗) ⇛_D H(B⃗)`` built from witnesses ``A_i ⇛_{C_i} B_i``."""
    _check_alignment(L, ws)
    sources = [w.source for w in ws]
    targets = [w.target for w in ws]
    try:
        composite = _compose_leg(L, sources, targets, [w.map for w in ws])
    except (KeyError, SignatureMismatchError) as e:
        raise IntegrityError(f"Composing through {L.name} left the target: {e}") from e
    if not is_homomorphism(composite):
        raise IntegrityError(f"The composite through {L.name} is not a homomorphism")
    log.debug(f"Composed a {L.target.label} witness through {L.name}")
    return PEWitness(L.target, L.operation.apply(sources), L.operation.apply(targets), composite)


def compose_counting_witness(L, ws):
    """Kleisli isomorphism ``H(A⃗) ≅ H(B⃗)`` built from Kleisli isomorphisms ``A_i ≅ B_i``."""
    _check_alignment(L, ws)
    for i, w in enumerate(ws, start=1):
        if not verify_kleisli_inverse(w.comonad, w.forward, w.backward):
            raise InvalidWitnessError(f"Witness {i} is not a pair of Kleisli inverses")
    sources = [w.source for w in ws]
    targets = [w.target for w in ws]
    try:
        forward = _compose_leg(L, sources, targets, [w.forward for w in ws])
        backward = _compose_leg(L, targets, sources, [w.backward for w in ws])
    except (KeyError, SignatureMismatchError) as e:
        raise IntegrityError(f"Composing through {L.name} left the target: {e}") from e
    D = L.target
    if not (is_homomorphism(forward) and is_homomorphism(backward)):
        raise IntegrityError(f"A composite through {L.name} is not a homomorphism")
    if not verify_kleisli_inverse(D, forward, backward):
        raise IntegrityError(f"The composites through {L.name} are not Kleisli inverses")
    H = L.operation
    return CountingWitness(D, H.apply(sources), H.apply(targets), forward, backward)


#########################
#        Searches       #
#########################


def search_pe_witness(C, A, B, budget=None):
    """A witness of ``A ⇛_C B`` by complete homomorphism search, or None."""
    CA = C.build(A)
    f = search_homomorphism(CA, B, budget=budget)
    if f is None:
        return None
    return PEWitness(C, A, B, f)


def search_kleisli_iso(C, A, B, budget=None):
    """Search for Kleisli inverses ``f: C(A) -> B``, ``g: C(B) -> A``.

    For a fixed ``f`` the equation ``g ∘ f* = ε_A`` pins ``g`` on the image of ``f*``,
    so ``g`` is searched with those values preassigned. The image of ``f`` has to
    contain the image of ``ε_B`` since ``f ∘ g* = ε_B``.
    """
    budget = budget if isinstance(budget, SearchBudget) else SearchBudget(budget)
    CA, CB = C.build(A), C.build(B)
    if A.signature != B.signature:
        return SearchResult(Verdict.FAIL)
    needed = frozenset(C.counit_element(v) for v in CB.universe)
    try:
        for f in iter_homomorphisms(CA, B, budget=budget):
            if not needed <= f.image:
                continue
            pinned = {}
            consistent = True
            for w in CA.universe:
                v = C.coextend_element(f, w)
                a = C.counit_element(w)
                if pinned.setdefault(v, a) != a:
                    consistent = False
                    break
            if not consistent:
                continue
            for g in iter_homomorphisms(CB, A, preassigned=pinned, budget=budget):
                if all(f(C.coextend_element(g, v)) == C.counit_element(v) for v in CB.universe):
                    return SearchResult(Verdict.PASS, CountingWitness(C, A, B, f, g))
    except BudgetExceeded:
        log.info(
            f"Kleisli isomorphism search {structure_id(A)} -> {structure_id(B)} ran out of budget"
        )
        return SearchResult(Verdict.INDETERMINATE)
    return SearchResult(Verdict.FAIL)


#########################
#      Game oracles     #
#########################


def _atomic_ok(A, B, pairs, reflect, equality):
    """Whether the relation ``pairs`` between A and B is a partial homomorphism.

    With ``reflect`` relations must also be reflected, with ``equality`` the
    relation must be a partial injection.
    """
    if equality:
        left = {}
        right = {}
        for a, b in pairs:
            if left.setdefault(a, b) != b or right.setdefault(b, a) != a:
                return False
    for name, arity in A.signature.symbols:
        for combo in itertools.product(pairs, repeat=arity):
            in_A = A.holds(name, tuple(a for a, _ in combo))
            in_B = B.holds(name, tuple(b for _, b in combo))
            if in_A and not in_B:
                return False
            if reflect and in_B and not in_A:
                return False
    return True


def _check_same_signature(A, B):
    if A.signature != B.signature:
        raise SignatureMismatchError(f"Signatures differ: {A.signature} and {B.signature}")


def decide_pe_game(k, A, B):
    """Duplicator wins the k-round existential game from A to B (no equality atoms).

    Agrees with ``A ⇛_{E_k} B``: every positive existential sentence of quantifier
    depth at most k true in A is true in B.
    """
    _check_same_signature(A, B)

    @lru_cache(maxsize=None)
    def wins(rounds, position):
        if rounds == 0:
            return True
        for a in A.universe:
            if not any(
                _atomic_ok(A, B, position | {(a, b)}, False, False)
                and wins(rounds - 1, position | {(a, b)})
                for b in B.universe
            ):
                return False
        return True

    return wins(k, frozenset())


def _back_and_forth(k, A, B, equality):
    _check_same_signature(A, B)

    @lru_cache(maxsize=None)
    def wins(rounds, position):
        if rounds == 0:
            return True
        for a in A.universe:
            if not any(
                _atomic_ok(A, B, position | {(a, b)}, True, equality)
                and wins(rounds - 1, position | {(a, b)})
                for b in B.universe
            ):
                return False
        for b in B.universe:
            if not any(
                _atomic_ok(A, B, position | {(a, b)}, True, equality)
                and wins(rounds - 1, position | {(a, b)})
                for a in A.universe
            ):
                return False
        return True

    return wins(k, frozenset())


def decide_fo_noeq_equiv(k, A, B):
    """k-round back-and-forth game without equality: positions must preserve and reflect relations."""
    return _back_and_forth(k, A, B, equality=False)


def decide_fo_eq_equiv(k, A, B):
    """The k-round Ehrenfeucht-Fraïssé game: positions must be partial isomorphisms."""
    return _back_and_forth(k, A, B, equality=True)


def decide_modal_sim(k, A, B):
    """Depth-k simulation of the pointed structure A by B, respecting unary predicates."""
    _check_same_signature(A, B)
    if not A.signature.is_modal:
        raise SignatureMismatchError(f"{A.signature} is not a modal signature")
    if not (A.is_pointed and B.is_pointed):
        raise SignatureMismatchError("Simulation needs pointed structures")
    unary = A.signature.unary_symbols
    binary = A.signature.binary_symbols

    def successors(X, x, name):
        return [y for source, y in X.relations[name] if source == x]

    @lru_cache(maxsize=None)
    def simulates(rounds, a, b):
        if any(A.holds(name, (a,)) and not B.holds(name, (b,)) for name in unary):
            return False
        if rounds == 0:
            return True
        return all(
            any(simulates(rounds - 1, a2, b2) for b2 in successors(B, b, name))
            for name in binary
            for a2 in successors(A, a, name)
        )

    return simulates(k, A.point, B.point)


#########################
#  Counterexample search #
#########################


@dataclass(frozen=True)
class Counterexample:
    """Componentwise related inputs whose images under the operation are unrelated."""

    A1: Structure
    B1: Structure
    A2: Structure
    B2: Structure
    image_A: Structure
    image_B: Structure

    def lines(self):
        return [
            f"A1 {self.A1.to_json()}",
            f"B1 {self.B1.to_json()}",
            f"A2 {self.A2.to_json()}",
            f"B2 {self.B2.to_json()}",
            f"H(A1,A2) {self.image_A.to_json()}",
            f"H(B1,B2) {self.image_B.to_json()}",
        ]


def find_fvm_counterexample(op, relation, family, chunk=256):
    """Search quadruples ``(A1, B1, A2, B2)`` from ``family`` with ``A1 R B1`` and ``A2 R B2``
    but not ``op(A1, A2) R op(B1, B2)``.

    Candidates are visited by largest structure, then total size, then position in
    ``family``, so the first counterexample returned is a smallest one. Returns None
    when the family holds no counterexample, which is no proof of absence beyond it.
    """
    if op.arity != 2:
        raise EndpointMismatchError("Counterexample search is implemented for binary operations")
    buckets = {}
    for A, B in itertools.product(family, repeat=2):
        if relation(A, B):
            buckets.setdefault((len(A), len(B)), []).append((A, B))
    log.info(
        f"Counterexample search: {sum(map(len, buckets.values()))} related pairs "
        f"in a family of {len(family)}"
    )
    shapes = sorted(
        itertools.product(buckets, repeat=2),
        key=lambda shape: (max(shape[0] + shape[1]), sum(shape[0] + shape[1]), shape),
    )

    def examine(quad):
        (A1, B1), (A2, B2) = quad
        image_A = op.apply([A1, A2])
        image_B = op.apply([B1, B2])
        if relation(image_A, image_B):
            return None
        return Counterexample(A1, B1, A2, B2, image_A, image_B)

    for first, second in shapes:
        # within a shape, product order is the order of the family
        quads = itertools.product(buckets[first], buckets[second])
        while batch := list(itertools.islice(quads, chunk)):
            for found in ordered_map(examine, batch):
                if found is not None:
                    return found
    return None
