"""Coalgebras of the game comonads and the lifting of operations to them.

A coalgebra ``(X, α)`` assigns to each element ``x`` a play ``α(x)`` ending in
``x``; ordering elements by prefixes of their plays gives a forest. The
down-set ``↓v`` of an element is a chain, and every path embedding into ``X``
is isomorphic to the inclusion of such a down-set: a coalgebra morphism from a
chain lands on a down-closed chain. The quantifiers over path embeddings below
therefore range over down-sets only.
"""

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property

from fvm.comonads import Comonad, functor_map
from fvm.structures import (
    MapClass,
    Structure,
    StructMap,
    classify_map,
    is_homomorphism,
    iter_homomorphisms,
)
from fvm.util import (
    CheckReport,
    EndpointMismatchError,
    FVMError,
    IntegrityError,
    InvalidWitnessError,
    MalformedMapError,
    NotAHomomorphismError,
    UnsupportedComonadError,
    Verdict,
    ordered_map,
    structure_id,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Coalgebra:
    """A structure ``carrier`` with ``alpha`` mapping each element to an element of ``C(carrier)``.

    ``base`` is set on cofree coalgebras and records the structure they are cofree on.
    """

    comonad: Comonad
    carrier: Structure
    alpha: dict
    base: Structure | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.comonad.has_prefix_order:
            raise UnsupportedComonadError(
                f"{self.comonad.label} has no coalgebras: its elements are not ordered by prefixes"
            )
        missing = [x for x in self.carrier.universe if x not in self.alpha]
        if missing:
            raise MalformedMapError(f"The coalgebra map has no value on {missing[:5]}")
        object.__setattr__(
            self, "alpha", {x: self.alpha[x] for x in self.carrier.universe}
        )

    def __call__(self, x):
        return self.alpha[x]

    def __len__(self):
        return len(self.carrier)

    @property
    def universe(self):
        return self.carrier.universe

    @cached_property
    def order(self):
        """The pairs ``(x, y)`` with ``x ⊑ y``."""
        C = self.comonad
        return frozenset(
            (x, y)
            for x in self.universe
            for y in self.universe
            if C.is_prefix(self.alpha[x], self.alpha[y])
        )

    def le(self, x, y):
        return (x, y) in self.order

    def down_set(self, v):
        return frozenset(u for u in self.universe if self.le(u, v))

    def restrict(self, elements):
        """The sub-coalgebra on a set of elements closed under taking prefixes."""
        elements = frozenset(elements)
        return Coalgebra(
            self.comonad,
            self.carrier.substructure(elements),
            {x: self.alpha[x] for x in elements},
        )


@dataclass(frozen=True)
class CoalgebraMorphism:
    """A homomorphism ``f`` of carriers with ``β ∘ f = C(f) ∘ α``."""

    source: Coalgebra
    target: Coalgebra
    map: StructMap

    def __post_init__(self):
        if not is_coalgebra_morphism(self.source, self.target, self.map):
            raise NotAHomomorphismError("The map is not a morphism of coalgebras")

    def __call__(self, x):
        return self.map(x)


def is_coalgebra_morphism(x, y, f):
    if f.source != x.carrier or f.target != y.carrier:
        raise EndpointMismatchError("The map does not go between the carriers")
    if not is_homomorphism(f):
        return False
    C = x.comonad
    try:
        return all(y.alpha[f(a)] == C.functor_element(f, x.alpha[a]) for a in x.universe)
    except KeyError:
        return False


@dataclass(frozen=True)
class PathEmbedding:
    """Inclusion of the down-set of ``top`` as a path coalgebra."""

    top: str
    path: Coalgebra
    embed: CoalgebraMorphism


#########################
#      Construction     #
#########################


def cofree(C, A):
    """``(C(A), δ_A)``."""
    CA = C.build(A)
    return Coalgebra(C, CA, {w: C.delta_element(w) for w in CA.universe}, base=A)


def check_coalgebra(x):
    """Both coalgebra equations, ``α`` being a homomorphism, and the forest order."""
    C = x.comonad
    A = x.carrier
    subject = structure_id(A)
    report = CheckReport("COALG")

    outside = [a for a in A.universe if not C.contains(A, x.alpha[a])]
    report.add_check("alpha_values", subject, not outside, f"outside {C.label}: {outside[:3]}" if outside else "")
    if outside:
        return report

    broken = [
        (name, tup)
        for name, tuples in A.relations.items()
        for tup in sorted(tuples)
        if not C.holds(A, name, [x.alpha[a] for a in tup])
    ]
    if A.is_pointed and x.alpha[A.point] != C.point_element(A.point):
        broken.append(("point", (A.point,)))
    report.add_check("alpha_hom", subject, not broken, f"{broken[0]}" if broken else "")

    wrong = [a for a in A.universe if C.counit_element(x.alpha[a]) != a]
    report.add_check("counit_after_alpha", subject, not wrong, f"at {wrong[:3]}" if wrong else "")

    wrong = [
        a
        for a in A.universe
        if C.functor_element(x.alpha.__getitem__, x.alpha[a]) != C.delta_element(x.alpha[a])
    ]
    report.add_check("alpha_coassociative", subject, not wrong, f"at {wrong[:3]}" if wrong else "")

    report.add_check("forest_order", subject, is_forest(x))
    return report


def forest_order(x):
    return set(x.order)


def is_forest(x):
    """Partial order whose down-sets are chains."""
    universe = x.universe
    for a in universe:
        if not x.le(a, a):
            return False
    for a, b in x.order:
        if a != b and x.le(b, a):
            return False
    for a, b in x.order:
        for c in universe:
            if x.le(b, c) and not x.le(a, c):
                return False
    for v in universe:
        below = sorted(x.down_set(v))
        for a, b in itertools.combinations(below, 2):
            if not (x.le(a, b) or x.le(b, a)):
                return False
    return True


def is_path(x):
    """A nonempty coalgebra whose order is a chain."""
    if not x.universe:
        return False
    return all(x.le(a, b) or x.le(b, a) for a, b in itertools.combinations(x.universe, 2))


def canonical_path_embeddings(x):
    """One path embedding per element: the inclusion of its down-set."""
    embeddings = []
    for v in x.universe:
        below = x.down_set(v)
        path = x.restrict(below)
        inclusion = StructMap(path.carrier, x.carrier, {u: u for u in below})
        embeddings.append(PathEmbedding(v, path, CoalgebraMorphism(path, x, inclusion)))
    return embeddings


#########################
#  Embeddings, openness #
#########################


def _restriction(f, elements):
    sub = f.source.carrier.substructure(elements)
    return StructMap(sub, f.target.carrier, {u: f(u) for u in elements})


def is_pathwise_embedding(f):
    """``f`` composed with every path embedding is an embedding."""
    return all(
        classify_map(_restriction(f, f.source.down_set(v))).is_embedding
        for v in f.source.universe
    )


def _filler(f, x, y):
    """A diagonal for the square ``↓x -> ↓y`` given by ``f``, or None."""
    X, Y = f.source, f.target
    target_path = Y.down_set(y)
    for x2 in X.universe:
        if f(x2) != y or not X.le(x, x2):
            continue
        below = X.down_set(x2)
        images = {f(u): u for u in below}
        if len(images) != len(below) or set(images) != target_path:
            continue
        path = Y.restrict(target_path)
        inverse = StructMap(path.carrier, X.carrier, images)
        if is_homomorphism(inverse) and is_coalgebra_morphism(path, X, inverse):
            return inverse
    return None


def open_squares(f):
    """The commuting squares between down-set embeddings, as pairs ``(x, y)`` with ``f(x) ⊑ y``."""
    X, Y = f.source, f.target
    return [(x, y) for x in X.universe for y in Y.universe if Y.le(f(x), y)]


def is_open(f):
    """Every square from a path embedding into ``X`` to one into ``Y`` has a diagonal filler."""
    return all(_filler(f, x, y) is not None for x, y in open_squares(f))


def factor_coalgebra_morphism(f):
    """Surjective coalgebra morphism onto the image followed by the inclusion of the image."""
    image = f.target.restrict(f.map.image)
    q = CoalgebraMorphism(f.source, image, StructMap(f.source.carrier, image.carrier, f.map.assignment))
    e = CoalgebraMorphism(
        image, f.target, StructMap(image.carrier, f.target.carrier, {u: u for u in image.universe})
    )
    return q, e


#########################
#        Lifting        #
#########################


def _check_inputs(L, xs):
    if len(xs) != L.arity:
        raise EndpointMismatchError(f"{L.name} takes {L.arity} coalgebras, got {len(xs)}")
    for i, (C, x) in enumerate(zip(L.sources, xs), start=1):
        if x.comonad != C:
            raise EndpointMismatchError(
                f"Coalgebra {i} is for {x.comonad.label}, the law expects {C.label}"
            )


def lift_operation(L, xs):
    """``Ĥ(X⃗)``: the equalizer of ``D(H(α⃗))`` and ``κ*`` inside ``D(H(A⃗))``, with ``δ`` as structure map."""
    _check_inputs(L, xs)
    H, D = L.operation, L.target
    args = [x.carrier for x in xs]
    ambient = D.build(H.apply(args))
    points = [A.point for A in args]
    H_alpha = H.map_function([x.alpha.__getitem__ for x in xs], L.lifted_points(args))
    kappa = L.kappa_function(points)
    carrier = {
        w
        for w in ambient.universe
        if D.functor_element(H_alpha, w) == D.coextend_element(kappa, w)
    }
    for w in carrier:
        if not set(D.prefixes(w)) <= carrier:
            raise IntegrityError(f"The lifted carrier of {L.name} is not closed under δ at {w}")
    log.debug(f"Lifted {L.name}: {len(carrier)} of {len(ambient)} elements")
    return Coalgebra(D, ambient.substructure(carrier), {w: D.delta_element(w) for w in carrier})


def lifting_counit(L, lifted, xs):
    """``u``: the counit of ``D`` restricted to the lifted carrier, into ``H(A⃗)``."""
    target = L.operation.apply([x.carrier for x in xs])
    D = L.target
    return StructMap(lifted.carrier, target, {w: D.counit_element(w) for w in lifted.universe})


def lift_morphism(L, fs, source=None, target=None):
    """``Ĥ(f⃗) = D(H(f⃗))`` restricted to the lifted carriers."""
    source = source or lift_operation(L, [f.source for f in fs])
    target = target or lift_operation(L, [f.target for f in fs])
    H, D = L.operation, L.target
    H_f = H.map_function([f.map for f in fs], [f.target.carrier.point for f in fs])
    try:
        assignment = StructMap(
            source.carrier, target.carrier, {w: D.functor_element(H_f, w) for w in source.universe}
        )
        return CoalgebraMorphism(source, target, assignment)
    except (MalformedMapError, NotAHomomorphismError) as e:
        raise IntegrityError(f"Lifting morphisms through {L.name} failed: {e}") from e


@dataclass(frozen=True)
class LiftingIso:
    """``Ĥ`` of cofree coalgebras is cofree: an explicit pair of inverse coalgebra morphisms."""

    lifted: Coalgebra
    cofree: Coalgebra
    forward: CoalgebraMorphism
    inverse: CoalgebraMorphism


def lifting_iso(L, structures):
    """Compute and verify ``Ĥ(C⃗(A⃗)) ≅ D(H(A⃗))``.

    The forward map is ``D(H(ε⃗))`` and the inverse is ``κ*``.
    """
    structures = list(structures)
    H, D = L.operation, L.target
    lifted = lift_operation(L, [cofree(C, A) for C, A in zip(L.sources, structures)])
    target = cofree(D, H.apply(structures))
    points = [A.point for A in structures]
    H_counit = H.map_function([C.counit_element for C in L.sources], points)
    kappa = L.kappa_function(points)
    try:
        forward = StructMap(
            lifted.carrier, target.carrier, {w: D.functor_element(H_counit, w) for w in lifted.universe}
        )
        inverse = StructMap(
            target.carrier, lifted.carrier, {v: D.coextend_element(kappa, v) for v in target.universe}
        )
    except MalformedMapError as e:
        raise IntegrityError(f"The lifting of {L.name} is not cofree: {e}") from e
    if forward.compose(inverse) != StructMap.identity(target.carrier) or inverse.compose(
        forward
    ) != StructMap.identity(lifted.carrier):
        raise IntegrityError(f"The lifting maps of {L.name} are not mutually inverse")
    try:
        return LiftingIso(
            lifted,
            target,
            CoalgebraMorphism(lifted, target, forward),
            CoalgebraMorphism(target, lifted, inverse),
        )
    except NotAHomomorphismError as e:
        raise IntegrityError(f"The lifting maps of {L.name} are not coalgebra morphisms") from e


#########################
#      Bimorphisms      #
#########################


def check_bimorphism(f, x, ys, L):
    """Whether ``H(β⃗) ∘ f = κ ∘ D(f) ∘ α`` for a homomorphism ``f: X -> H(Y⃗)``."""
    _check_inputs(L, ys)
    if x.comonad != L.target:
        raise EndpointMismatchError(f"The source coalgebra must be for {L.target.label}")
    if not is_homomorphism(f):
        return False
    H, D = L.operation, L.target
    args = [y.carrier for y in ys]
    H_beta = H.map_function([y.alpha.__getitem__ for y in ys], L.lifted_points(args))
    kappa = L.kappa_function([A.point for A in args])
    try:
        return all(
            H_beta(f(a)) == kappa(D.functor_element(f, x.alpha[a])) for a in x.universe
        )
    except KeyError:
        return False


def from_bimorphism(f, x, ys, L, lifted=None):
    """The coalgebra morphism ``f^o: X -> Ĥ(Y⃗)`` with ``u ∘ f^o = f``."""
    lifted = lifted or lift_operation(L, ys)
    D = L.target
    assignment = {a: D.functor_element(f, x.alpha[a]) for a in x.universe}
    escaped = [a for a, w in assignment.items() if w not in lifted.carrier]
    if escaped:
        raise IntegrityError(f"The bimorphism leaves the lifted carrier at {escaped[:3]}")
    if any(D.counit_element(w) != f(a) for a, w in assignment.items()):
        raise IntegrityError("The corestricted map does not factor the bimorphism")
    return CoalgebraMorphism(x, lifted, StructMap(x.carrier, lifted.carrier, assignment))


#########################
#      Decompositions   #
#########################


def _slot_options(x):
    options = {x.down_set(v) for v in x.universe}
    if not x.carrier.is_pointed:
        options.add(frozenset())
    return sorted(options, key=lambda s: (len(s), sorted(s)))


def _decomposes(L, xs, path, image, choice):
    """Whether the path's image lies in ``H`` of the chosen down-sets, through a bimorphism."""
    subs = [x.restrict(s) for x, s in zip(xs, choice)]
    try:
        target = L.operation.apply([s.carrier for s in subs])
    except FVMError:
        return False
    if not image <= target.members:
        return False
    D = L.target
    f = StructMap(path.carrier, target, {w: D.counit_element(w) for w in path.universe})
    return check_bimorphism(f, path, subs, L)


def check_s2prime(L, xs):
    """Every path in ``Ĥ(X⃗)``, mapped into ``H(X⃗)`` by ``u``, has a least decomposition
    through ``H`` of path embeddings into the ``X_i``.

    Least means contained, slot by slot, in every other decomposition; for plain
    structures a slot may be empty.
    """
    lifted = lift_operation(L, xs)
    D = L.target
    subject = "+".join(structure_id(x.carrier) for x in xs)
    report = CheckReport("FULL")
    options = [_slot_options(x) for x in xs]
    failure = None
    for embedding in canonical_path_embeddings(lifted):
        path = embedding.path
        image = frozenset(D.counit_element(w) for w in path.universe)
        valid = [
            choice
            for choice in itertools.product(*options)
            if _decomposes(L, xs, path, image, choice)
        ]
        least = [
            choice
            for choice in valid
            if all(all(a <= b for a, b in zip(choice, other)) for other in valid)
        ]
        if not least:
            failure = f"path to {embedding.top}: {len(valid)} decompositions, none least"
            break
    report.add_check(f"{L.name}:S2prime", subject, failure is None, failure or "")
    return report


#########################
#   Full-logic witnesses #
#########################


@dataclass(frozen=True)
class FullWitness:
    """A span of open pathwise-embeddings ``D(H(A⃗)) <- Ĥ(X⃗) -> D(H(B⃗))``."""

    apex: Coalgebra
    left: CoalgebraMorphism
    right: CoalgebraMorphism


def _check_span_leg(leg, i, side):
    if leg.target.base is None:
        raise InvalidWitnessError(f"Span {i}: the {side} leg must end in a cofree coalgebra")
    if not (is_open(leg) and is_pathwise_embedding(leg)):
        raise InvalidWitnessError(f"Span {i}: the {side} leg is not an open pathwise-embedding")


def _same_coalgebra(x, y):
    return x is y or (x.comonad == y.comonad and x.carrier == y.carrier and x.alpha == y.alpha)


def _compose_morphisms(g, f):
    return CoalgebraMorphism(f.source, g.target, g.map.compose(f.map))


def iso_span(C, h):
    """The span ``cofree(A) <- cofree(A) -> cofree(B)`` of the identity and ``C(h)``
    for an isomorphism ``h: A -> B``."""
    if classify_map(h) is not MapClass.ISO:
        raise InvalidWitnessError("An isomorphism span needs an isomorphism")
    x, y = cofree(C, h.source), cofree(C, h.target)
    identity = CoalgebraMorphism(x, x, StructMap.identity(x.carrier))
    return x, identity, CoalgebraMorphism(x, y, functor_map(C, h))


def compose_full_witness(L, spans):
    """Compose spans ``cofree(A_i) <- X_i -> cofree(B_i)`` into a span for ``H``.

    ``spans`` holds triples ``(X_i, f_i, g_i)``.
    """
    if len(spans) != L.arity:
        raise EndpointMismatchError(f"{L.name} takes {L.arity} spans, got {len(spans)}")
    for i, (x, f, g) in enumerate(spans, start=1):
        for leg, side in ((f, "left"), (g, "right")):
            if not _same_coalgebra(leg.source, x):
                raise EndpointMismatchError(f"Span {i}: the {side} leg does not start at the apex")
        _check_span_leg(f, i, "left")
        _check_span_leg(g, i, "right")
    apex = lift_operation(L, [x for x, _, _ in spans])
    legs = []
    for side in (1, 2):
        maps = [span[side] for span in spans]
        iso = lifting_iso(L, [m.target.base for m in maps])
        lifted_leg = lift_morphism(L, maps, source=apex, target=iso.lifted)
        leg = _compose_morphisms(iso.forward, lifted_leg)
        if not (is_open(leg) and is_pathwise_embedding(leg)):
            raise IntegrityError(f"The composite leg through {L.name} is not an open pathwise-embedding")
        legs.append(leg)
    return FullWitness(apex, legs[0], legs[1])


#########################
#    Suite checks       #
#########################


def coalgebra_family(C, family):
    """Cofree coalgebras over the accepted members of ``family`` and the paths inside them."""
    coalgebras = []
    seen = set()
    for A in family:
        if not C.accepts(A):
            continue
        x = cofree(C, A)
        for y in [x] + [e.path for e in canonical_path_embeddings(x)]:
            key = (y.carrier, tuple(sorted(y.alpha.items())))
            if key not in seen:
                seen.add(key)
                coalgebras.append(y)
    return coalgebras


def cofree_morphisms(C, family, predicate):
    """``C(h): cofree(A) -> cofree(B)`` for homomorphisms ``h`` between family members
    with ``predicate(C(h))``."""
    members = [A for A in family if C.accepts(A)]
    found = []
    for A, B in itertools.product(members, repeat=2):
        for h in iter_homomorphisms(A, B):
            f = CoalgebraMorphism(cofree(C, A), cofree(C, B), functor_map(C, h))
            if predicate(f):
                found.append(f)
    return found


def morphisms_into_cofree(C, sources, targets, limit=None):
    """The coalgebra morphisms ``C(h) ∘ α: X -> cofree(B)``, one per homomorphism ``h: X -> B``.

    These are all coalgebra morphisms into a cofree coalgebra. ``targets`` must be cofree.
    """

    def generate():
        for x in sources:
            for y in targets:
                if x.carrier.signature != y.base.signature:
                    continue
                for h in iter_homomorphisms(x.carrier, y.base):
                    assignment = {a: C.functor_element(h, x.alpha[a]) for a in x.universe}
                    try:
                        yield CoalgebraMorphism(x, y, StructMap(x.carrier, y.carrier, assignment))
                    except (MalformedMapError, NotAHomomorphismError) as e:
                        raise IntegrityError(
                            f"The transpose of a homomorphism into {structure_id(y.base)} "
                            f"is not a coalgebra morphism: {e}"
                        ) from e

    return list(itertools.islice(generate(), limit))


def _split_family(C, family):
    coalgebras = coalgebra_family(C, family)
    cofrees = [x for x in coalgebras if x.base is not None]
    return coalgebras, cofrees


def check_surjective_path_image(C, family):
    """Every surjective coalgebra morphism out of a path lands on a path."""
    report = CheckReport("FULL")
    coalgebras = coalgebra_family(C, family)
    paths = [x for x in coalgebras if is_path(x)]
    for P in paths:
        subject = structure_id(P.carrier)
        failure = None
        for Y in coalgebras:
            if len(Y) > len(P) or Y.carrier.signature != P.carrier.signature:
                continue
            for f in iter_homomorphisms(P.carrier, Y.carrier):
                if len(f.image) != len(Y) or not is_coalgebra_morphism(P, Y, f):
                    continue
                if not is_path(Y):
                    failure = f"onto {structure_id(Y.carrier)}, which is not a path"
                    break
            if failure:
                break
        report.add_check(f"{C.label}:surjective_path_image", subject, failure is None, failure or "")
    return report


def _factorization_failure(f):
    try:
        q, e = factor_coalgebra_morphism(f)
    except (MalformedMapError, NotAHomomorphismError) as err:
        return f"{structure_id(f.source.carrier)}: {err}"
    if not classify_map(q.map).is_surjective:
        return f"{structure_id(f.source.carrier)}: the first factor is not surjective"
    if not classify_map(e.map).is_embedding:
        return f"{structure_id(f.source.carrier)}: the second factor is not an embedding"
    if e.map.compose(q.map) != f.map:
        return f"{structure_id(f.source.carrier)}: the factors do not compose to the morphism"
    return None


def check_coalgebra_morphisms(C, family, cap=64):
    """Factorization and the embedding laws on coalgebra morphisms into cofree coalgebras.

    Every morphism factors as a surjective morphism followed by an embedding, and
    embeddings are left-cancellable, compose, and are embeddings whenever a
    composite they start is.
    """
    report = CheckReport("FULL")
    coalgebras, cofrees = _split_family(C, family)
    try:
        morphisms = morphisms_into_cofree(C, coalgebras, cofrees, cap)
    except IntegrityError as e:
        report.add_check(f"{C.label}:coalgebra_morphisms", "morphisms", False, str(e))
        return report
    if not morphisms:
        report.add_check(f"{C.label}:coalgebra_morphisms", "morphisms", Verdict.SKIP, "none in the family")
        return report
    detail = f"{len(morphisms)} morphisms"

    failures = [failure for failure in map(_factorization_failure, morphisms) if failure]
    report.add_check(f"{C.label}:factorization", "morphisms", not failures, failures[0] if failures else detail)

    embeddings = [f for f in morphisms if classify_map(f.map).is_embedding]
    incoming = defaultdict(list)
    outgoing = defaultdict(list)
    for f in morphisms:
        incoming[f.target].append(f)
        outgoing[f.source].append(f)

    failure = None
    for e in embeddings:
        seen = {}
        for g in incoming[e.source]:
            if seen.setdefault(e.map.compose(g.map), g.map) != g.map:
                failure = f"two morphisms into {structure_id(e.source.carrier)} agree after an embedding"
                break
        if failure:
            break
    report.add_check(f"{C.label}:embeddings_cancel", "morphisms", failure is None, failure or detail)

    failure = None
    for e1 in embeddings:
        for e2 in outgoing[e1.target]:
            if e2 in embeddings and not classify_map(e2.map.compose(e1.map)).is_embedding:
                failure = f"embeddings out of {structure_id(e1.source.carrier)} compose to a non-embedding"
                break
        if failure:
            break
    report.add_check(f"{C.label}:embeddings_compose", "morphisms", failure is None, failure or detail)

    failure = None
    for f in morphisms:
        if classify_map(f.map).is_embedding:
            continue
        for g in outgoing[f.target]:
            if classify_map(g.map.compose(f.map)).is_embedding:
                failure = f"a composite out of {structure_id(f.source.carrier)} is an embedding"
                break
        if failure:
            break
    report.add_check(f"{C.label}:embedding_left_factor", "morphisms", failure is None, failure or detail)
    return report


def _law_tuples(L, members):
    return [list(t) for t in itertools.product(members, repeat=L.arity) if L.accepts(list(t))]


def check_lifting_isos(L, family):
    report = CheckReport("FULL")

    def check(args):
        subject = "+".join(structure_id(A) for A in args)
        try:
            iso = lifting_iso(L, args)
            ok = check_coalgebra(iso.lifted).passed
            return subject, ok, "" if ok else "lifted coalgebra fails its axioms"
        except IntegrityError as e:
            return subject, False, str(e)

    for subject, ok, detail in ordered_map(check, _law_tuples(L, list(family))):
        report.add_check(f"{L.name}:lifting_iso", subject, ok, detail)
    return report


def _argument(x):
    return x.base if x.base is not None else x.carrier


def _morphism_tuples(L, morphisms, cap):
    tuples = []
    for combo in itertools.product(morphisms, repeat=L.arity):
        sources = [_argument(f.source) for f in combo]
        targets = [_argument(f.target) for f in combo]
        if L.accepts(sources) and L.accepts(targets):
            tuples.append(list(combo))
            if len(tuples) >= cap:
                break
    return tuples


def check_embedding_preservation(L, family, cap=64):
    """``Ĥ`` sends tuples of coalgebra embeddings to embeddings."""
    report = CheckReport("FULL")
    C = L.sources[0]
    embeddings = cofree_morphisms(C, family, lambda f: classify_map(f.map).is_embedding)
    for fs in _morphism_tuples(L, embeddings, cap):
        subject = "+".join(structure_id(f.source.carrier) for f in fs)
        lifted = lift_morphism(L, fs)
        report.add_check(
            f"{L.name}:embedding_preservation", subject, classify_map(lifted.map).is_embedding
        )
    return report


def _open_pathwise(f):
    return is_open(f) and is_pathwise_embedding(f)


def check_open_preservation(L, family, cap=64):
    """``Ĥ`` sends tuples of open pathwise-embeddings to open pathwise-embeddings.

    The tuples mix the ``C(h)`` between cofree coalgebras with the open
    pathwise-embeddings out of their path sub-coalgebras.
    """
    report = CheckReport("FULL")
    C = L.sources[0]
    opens = cofree_morphisms(C, family, _open_pathwise)
    coalgebras, cofrees = _split_family(C, family)
    paths = [x for x in coalgebras if x.base is None]
    opens += [f for f in morphisms_into_cofree(C, paths, cofrees, 4 * cap) if _open_pathwise(f)]
    for fs in _morphism_tuples(L, opens, cap):
        subject = "+".join(structure_id(f.source.carrier) for f in fs)
        lifted = lift_morphism(L, fs)
        report.add_check(
            f"{L.name}:open_preservation",
            subject,
            _open_pathwise(lifted),
        )
    return report


def check_bimorphism_correspondence(L, xs):
    """The counit ``u`` after a path embedding into ``Ĥ(X⃗)`` is a bimorphism, and
    ``from_bimorphism`` gives the path embedding back."""
    report = CheckReport("FULL")
    lifted = lift_operation(L, xs)
    u = lifting_counit(L, lifted, xs)
    subject = "+".join(structure_id(x.carrier) for x in xs)
    failure = None
    for embedding in canonical_path_embeddings(lifted):
        g = embedding.embed
        f = u.compose(g.map)
        if not check_bimorphism(f, embedding.path, xs, L):
            failure = f"u after the path to {embedding.top} is not a bimorphism"
            break
        try:
            corestricted = from_bimorphism(f, embedding.path, xs, L, lifted=lifted)
        except IntegrityError as e:
            failure = str(e)
            break
        if corestricted.map != g.map:
            failure = f"the path to {embedding.top} is not recovered from its bimorphism"
            break
    report.add_check(f"{L.name}:bimorphism_correspondence", subject, failure is None, failure or "")
    return report


def check_full_logic(L, family, cap=64):
    """(S1), (S2'), the lifting isomorphisms, openness preservation and the
    factorization of coalgebra morphisms for one law."""
    report = CheckReport("FULL")
    members = [A for A in family if all(C.accepts(A) for C in L.sources)]
    for C in dict.fromkeys(L.sources):
        if members:
            report.extend(check_coalgebra_morphisms(C, members, cap))
    report.extend(check_embedding_preservation(L, members, cap))
    for args in _law_tuples(L, members):
        xs = [cofree(C, A) for C, A in zip(L.sources, args)]
        report.extend(check_s2prime(L, xs))
        report.extend(check_bimorphism_correspondence(L, xs))
    report.extend(check_lifting_isos(L, members))
    report.extend(check_open_preservation(L, members, cap))
    if not report.check_lines:
        report.add_check(f"{L.name}:full", "-", Verdict.SKIP, "no argument tuples in the family")
    return report
