"""Finite relational structures, the maps between them and the operations combining them.

A pointed structure is a :class:`Structure` whose ``point`` is set. Maps between
pointed structures have to send the point to the point to count as homomorphisms.
"""

import itertools
import logging
import random
import string
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import networkx as nx
import simplejson as json

from fvm.util import (
    STAR,
    EmptyFamilyError,
    EndpointMismatchError,
    MalformedMapError,
    NotAHomomorphismError,
    SearchBudget,
    SignatureMismatchError,
    StructureFormatError,
    encode,
    encode_tagged,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Signature:
    """A finite relational vocabulary: symbol name to arity."""

    symbols: tuple = ()

    def __post_init__(self):
        names = [name for name, _ in self.symbols]
        if len(set(names)) != len(names):
            raise SignatureMismatchError(f"Duplicate relation symbols in {names}")
        for name, arity in self.symbols:
            if not isinstance(arity, int) or arity < 1:
                raise SignatureMismatchError(
                    f"Relation symbol {name} has arity {arity!r}, arities must be positive integers"
                )
        object.__setattr__(self, "symbols", tuple(sorted(self.symbols)))

    @classmethod
    def of(cls, symbols=None):
        if symbols is None:
            return cls()
        if isinstance(symbols, Signature):
            return symbols
        return cls(tuple(dict(symbols).items()))

    @property
    def names(self):
        return tuple(name for name, _ in self.symbols)

    def arity(self, name):
        for symbol, arity in self.symbols:
            if symbol == name:
                return arity
        raise SignatureMismatchError(f"Relation symbol {name} is not in the signature")

    def __contains__(self, name):
        return name in self.names

    def __len__(self):
        return len(self.symbols)

    @property
    def is_modal(self):
        return all(arity in (1, 2) for _, arity in self.symbols)

    @property
    def binary_symbols(self):
        return tuple(name for name, arity in self.symbols if arity == 2)

    @property
    def unary_symbols(self):
        return tuple(name for name, arity in self.symbols if arity == 1)

    def issubset(self, other):
        return all(name in other and other.arity(name) == arity for name, arity in self.symbols)

    def extend(self, extra):
        extra = dict(extra)
        clash = [name for name in extra if name in self]
        if clash:
            raise SignatureMismatchError(f"Symbols {clash} already belong to the signature")
        return Signature(self.symbols + tuple(extra.items()))

    def to_dict(self):
        return dict(self.symbols)

    def __str__(self):
        return "{" + ", ".join(f"{name}/{arity}" for name, arity in self.symbols) + "}"


@dataclass(frozen=True, eq=False)
class Structure:
    """A finite sigma-structure, optionally pointed.

    The universe is kept sorted and relations are stored as frozensets of tuples,
    so two structures are equal exactly when their canonical documents agree.
    """

    signature: Signature
    universe: tuple = ()
    relations: dict = field(default_factory=dict)
    point: str | None = None

    def __post_init__(self):
        signature = Signature.of(self.signature)
        universe = tuple(sorted(set(self.universe)))
        members = set(universe)
        unknown = set(self.relations) - set(signature.names)
        if unknown:
            raise SignatureMismatchError(
                f"Relations {sorted(unknown)} are not declared in the signature {signature}"
            )
        relations = {}
        for name, arity in signature.symbols:
            tuples = set()
            for index, tup in enumerate(self.relations.get(name, ())):
                tup = tuple(tup)
                if len(tup) != arity:
                    raise StructureFormatError(
                        f"relations.{name}[{index}]: tuple {list(tup)} has length {len(tup)}, expected arity {arity}"
                    )
                missing = [x for x in tup if x not in members]
                if missing:
                    raise StructureFormatError(
                        f"relations.{name}[{index}]: elements {missing} are not in the universe"
                    )
                tuples.add(tup)
            relations[name] = frozenset(tuples)
        if self.point is not None and self.point not in members:
            raise StructureFormatError(f"point: {self.point!r} is not in the universe")
        object.__setattr__(self, "signature", signature)
        object.__setattr__(self, "universe", universe)
        object.__setattr__(self, "relations", relations)

    @cached_property
    def key(self):
        return (
            self.signature.symbols,
            self.universe,
            tuple((name, tuple(sorted(self.relations[name]))) for name in self.signature.names),
            self.point,
        )

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __len__(self):
        return len(self.universe)

    def __contains__(self, element):
        return element in self.members

    def __repr__(self):
        return f"Structure({self.to_json()})"

    @cached_property
    def members(self):
        return frozenset(self.universe)

    @property
    def is_pointed(self):
        return self.point is not None

    def holds(self, name, tup):
        return tuple(tup) in self.relations[name]

    @cached_property
    def incidence(self):
        """Element to the relation tuples it occurs in."""
        index = {x: [] for x in self.universe}
        for name, tuples in self.relations.items():
            for tup in tuples:
                for x in set(tup):
                    index[x].append((name, tup))
        return index

    def tuple_count(self, name):
        return len(self.relations[name])

    def base(self):
        """The underlying unpointed structure."""
        if self.point is None:
            return self
        return Structure(self.signature, self.universe, self.relations)

    def with_point(self, point):
        return Structure(self.signature, self.universe, self.relations, point)

    def substructure(self, elements):
        """Induced substructure; keeps the point when it is among ``elements``."""
        keep = frozenset(elements)
        relations = {
            name: [tup for tup in tuples if all(x in keep for x in tup)]
            for name, tuples in self.relations.items()
        }
        point = self.point if self.point in keep else None
        return Structure(self.signature, tuple(keep), relations, point)

    def to_doc(self):
        doc = {
            "signature": self.signature.to_dict(),
            "universe": list(self.universe),
            "relations": {
                name: [list(tup) for tup in sorted(self.relations[name])]
                for name in self.signature.names
            },
        }
        if self.point is not None:
            doc["point"] = self.point
        return doc

    def to_json(self):
        return json.dumps(self.to_doc(), separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_doc(cls, doc):
        return cls(
            Signature.of(doc["signature"]),
            tuple(doc["universe"]),
            {name: [tuple(t) for t in tuples] for name, tuples in doc.get("relations", {}).items()},
            doc.get("point"),
        )


def structure(signature, universe, relations=None, point=None):
    """Shorthand constructor: ``structure({"E": 2}, "ab", {"E": [("a", "b")]})``."""
    return Structure(Signature.of(signature), tuple(universe), dict(relations or {}), point)


@dataclass(frozen=True, eq=False)
class StructMap:
    """A total function between the universes of two structures."""

    source: Structure
    target: Structure
    assignment: dict

    def __post_init__(self):
        assignment = dict(self.assignment)
        missing = [x for x in self.source.universe if x not in assignment]
        if missing:
            raise MalformedMapError(f"Malformed map, elements {missing[:5]} have no image")
        extra = [x for x in assignment if x not in self.source.members]
        if extra:
            raise MalformedMapError(
                f"Malformed map, elements {extra[:5]} are not in the source universe"
            )
        outside = [y for y in assignment.values() if y not in self.target.members]
        if outside:
            raise MalformedMapError(
                f"Malformed map, images {outside[:5]} are not in the target universe"
            )
        object.__setattr__(self, "assignment", assignment)

    @classmethod
    def identity(cls, structure):
        return cls(structure, structure, {x: x for x in structure.universe})

    @classmethod
    def from_function(cls, source, target, func):
        return cls(source, target, {x: func(x) for x in source.universe})

    def __call__(self, x):
        return self.assignment[x]

    def __eq__(self, other):
        if not isinstance(other, StructMap):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.assignment == other.assignment
        )

    def __hash__(self):
        return hash((self.source, self.target, tuple(sorted(self.assignment.items()))))

    def compose(self, other):
        """``self`` after ``other``."""
        if other.target.universe != self.source.universe:
            raise EndpointMismatchError(
                "Cannot compose maps, the target of the first is not the source of the second"
            )
        return StructMap(
            other.source, self.target, {x: self.assignment[y] for x, y in other.assignment.items()}
        )

    @property
    def image(self):
        return frozenset(self.assignment.values())

    def to_doc(self):
        return {
            "source": self.source.to_doc(),
            "target": self.target.to_doc(),
            "map": dict(sorted(self.assignment.items())),
        }


#########################
#  Map classification   #
#########################


class MapClass(Enum):
    NOT_HOM = "not_hom"
    HOM = "hom"
    EMBEDDING = "embedding"
    SURJECTIVE_HOM = "surjective_hom"
    ISO = "iso"

    @property
    def is_hom(self):
        return self is not MapClass.NOT_HOM

    @property
    def is_embedding(self):
        return self in (MapClass.EMBEDDING, MapClass.ISO)

    @property
    def is_surjective(self):
        return self in (MapClass.SURJECTIVE_HOM, MapClass.ISO)


def _check_signatures(source, target):
    if source.signature != target.signature:
        raise SignatureMismatchError(
            f"Signatures differ: {source.signature} and {target.signature}"
        )


def is_homomorphism(f):
    _check_signatures(f.source, f.target)
    if f.source.is_pointed and f.target.is_pointed and f(f.source.point) != f.target.point:
        return False
    for name, tuples in f.source.relations.items():
        target_tuples = f.target.relations[name]
        for tup in tuples:
            if tuple(f.assignment[x] for x in tup) not in target_tuples:
                return False
    return True


def _reflects_relations(f):
    """Assumes ``f`` is an injective homomorphism."""
    image = f.image
    for name, tuples in f.target.relations.items():
        inside = sum(1 for tup in tuples if all(x in image for x in tup))
        if inside != len(f.source.relations[name]):
            return False
    return True


def classify_map(f):
    """Strongest class of ``f`` among not_hom < hom < {embedding, surjective_hom} < iso."""
    if not is_homomorphism(f):
        return MapClass.NOT_HOM
    injective = len(f.image) == len(f.source)
    surjective = len(f.image) == len(f.target)
    embedding = injective and _reflects_relations(f)
    if embedding and surjective:
        return MapClass.ISO
    if embedding:
        return MapClass.EMBEDDING
    if surjective:
        return MapClass.SURJECTIVE_HOM
    return MapClass.HOM


def is_embedding(f):
    return classify_map(f).is_embedding


def factor_morphism(f):
    """Split a homomorphism into a surjection onto its image followed by an embedding."""
    if not is_homomorphism(f):
        raise NotAHomomorphismError("Cannot factor a map that is not a homomorphism")
    image = f.target.substructure(f.image)
    q = StructMap(f.source, image, f.assignment)
    e = StructMap(image, f.target, {x: x for x in image.universe})
    return q, e


#########################
#  Operations           #
#########################


def reduct(A, tau):
    tau = Signature.of(tau)
    if not tau.issubset(A.signature):
        raise SignatureMismatchError(f"{tau} is not contained in {A.signature}")
    return Structure(tau, A.universe, {name: A.relations[name] for name in tau.names}, A.point)


def _common_signature(family):
    if not family:
        raise EmptyFamilyError("The family of structures is empty")
    signature = family[0].signature
    for member in family[1:]:
        if member.signature != signature:
            raise SignatureMismatchError(
                f"Signatures differ: {signature} and {member.signature}"
            )
    return signature


def disjoint_union(family):
    """Tagged union; components are numbered from 1 and points are dropped."""
    signature = _common_signature(family)
    universe = []
    relations = {name: [] for name in signature.names}
    for tag, member in enumerate(family, start=1):
        universe.extend(encode_tagged(tag, x) for x in member.universe)
        for name, tuples in member.relations.items():
            relations[name].extend(tuple(encode_tagged(tag, x) for x in tup) for tup in tuples)
    return Structure(signature, tuple(universe), relations)


def pointed_coproduct(A, B):
    """Disjoint union of two pointed structures with the two points identified."""
    signature = _common_signature([A, B])
    if not (A.is_pointed and B.is_pointed):
        raise SignatureMismatchError("The pointed coproduct needs two pointed structures")
    points = {encode_tagged(1, A.point), encode_tagged(2, B.point)}
    union = disjoint_union([A, B])

    def glue(x):
        return STAR if x in points else x

    relations = {
        name: [tuple(glue(x) for x in tup) for tup in tuples]
        for name, tuples in union.relations.items()
    }
    return Structure(signature, tuple(glue(x) for x in union.universe), relations, STAR)


def product(family):
    """Categorical product; pointed when every factor is pointed."""
    signature = _common_signature(family)
    universe = tuple(encode(list(xs)) for xs in itertools.product(*(m.universe for m in family)))
    relations = {}
    for name in signature.names:
        tuples = []
        for combo in itertools.product(*(sorted(m.relations[name]) for m in family)):
            tuples.append(tuple(encode(list(column)) for column in zip(*combo)))
        relations[name] = tuples
    point = None
    if all(m.is_pointed for m in family):
        point = encode([m.point for m in family])
    return Structure(signature, universe, relations, point)


def _check_modal_pair(A, B):
    signature = _common_signature([A, B])
    if not signature.is_modal:
        raise SignatureMismatchError(f"{signature} is not a modal signature")
    if not (A.is_pointed and B.is_pointed):
        raise SignatureMismatchError("Both structures must be pointed")
    return signature


def merge(A, B, R):
    """Add a fresh root with an R-transition to each of the two points."""
    signature = _check_modal_pair(A, B)
    if R not in signature or signature.arity(R) != 2:
        raise SignatureMismatchError(f"{R} is not a binary symbol of {signature}")
    union = disjoint_union([A, B])
    relations = {name: list(tuples) for name, tuples in union.relations.items()}
    relations[R] += [(STAR, encode_tagged(1, A.point)), (STAR, encode_tagged(2, B.point))]
    return Structure(signature, (STAR,) + union.universe, relations, STAR)


def vee(A, B):
    """Add a fresh root copying the outgoing transitions of both points."""
    signature = _check_modal_pair(A, B)
    union = disjoint_union([A, B])
    relations = {name: list(tuples) for name, tuples in union.relations.items()}
    for tag, member in ((1, A), (2, B)):
        for name in signature.binary_symbols:
            for source, target in member.relations[name]:
                if source == member.point:
                    relations[name].append((STAR, encode_tagged(tag, target)))
    return Structure(signature, (STAR,) + union.universe, relations, STAR)


def gaifman_graph(A):
    graph = nx.Graph()
    graph.add_nodes_from(A.universe)
    for tuples in A.relations.values():
        for tup in tuples:
            graph.add_edges_from(zip(tup, tup[1:]))
    return graph


def gaifman_closure(A):
    """Pairs of elements lying in the same component of the Gaifman graph."""
    pairs = set()
    for component in nx.connected_components(gaifman_graph(A)):
        pairs.update(itertools.product(component, repeat=2))
    return pairs


#########################
#  Homomorphism search  #
#########################


class HomomorphismSearch:
    """Backtracking enumeration of homomorphisms ``source -> target``.

    Elements are assigned in an order that follows the Gaifman graph, and each
    relation tuple is checked as soon as its last element gets an image.
    """

    def __init__(
        self, source, target, injective=False, preassigned=None, rng=None, budget=None
    ):
        _check_signatures(source, target)
        self.source = source
        self.target = target
        self.injective = injective
        self.rng = rng
        self.budget = budget or SearchBudget()
        self.preassigned = dict(preassigned or {})
        if source.is_pointed and target.is_pointed:
            self.preassigned.setdefault(source.point, target.point)
        self.order = self._search_order()
        position = {x: i for i, x in enumerate(self.order)}
        self.constraints = {x: [] for x in self.order}
        for name, tuples in source.relations.items():
            for tup in tuples:
                last = max(tup, key=position.__getitem__)
                self.constraints[last].append((name, tup))

    def _search_order(self):
        graph = gaifman_graph(self.source)
        fixed = [x for x in self.source.universe if x in self.preassigned]
        order = list(fixed)
        seen = set(fixed)
        rest = sorted(
            (x for x in self.source.universe if x not in seen),
            key=lambda x: (-graph.degree(x), x),
        )
        queue = list(fixed)
        while len(order) < len(self.source):
            if not queue:
                start = next(x for x in rest if x not in seen)
                seen.add(start)
                order.append(start)
                queue.append(start)
            current = queue.pop(0)
            for y in sorted(graph.neighbors(current), key=lambda x: (-graph.degree(x), x)):
                if y not in seen:
                    seen.add(y)
                    order.append(y)
                    queue.append(y)
        return order

    def _candidates(self, x):
        if x in self.preassigned:
            value = self.preassigned[x]
            return [value] if value in self.target.members else []
        candidates = list(self.target.universe)
        if self.rng is not None:
            self.rng.shuffle(candidates)
        return candidates

    def _consistent(self, x, assignment):
        relations = self.target.relations
        for name, tup in self.constraints[x]:
            if tuple(assignment[y] for y in tup) not in relations[name]:
                return False
        return True

    def __iter__(self):
        order = self.order
        n = len(order)
        if n == 0:
            yield {}
            return
        assignment = {}
        used = set()
        iterators = [None] * n
        iterators[0] = iter(self._candidates(order[0]))
        depth = 0
        while depth >= 0:
            x = order[depth]
            if x in assignment:
                used.discard(assignment.pop(x))
            chosen = None
            for y in iterators[depth]:
                if self.injective and y in used:
                    continue
                self.budget.tick()
                assignment[x] = y
                if self._consistent(x, assignment):
                    chosen = y
                    break
                del assignment[x]
            if chosen is None:
                depth -= 1
                continue
            if self.injective:
                used.add(chosen)
            if depth == n - 1:
                yield dict(assignment)
            else:
                depth += 1
                iterators[depth] = iter(self._candidates(order[depth]))


def iter_homomorphisms(A, B, injective=False, preassigned=None, rng=None, budget=None):
    for assignment in HomomorphismSearch(A, B, injective, preassigned, rng, budget):
        yield StructMap(A, B, assignment)


def search_homomorphism(A, B, preassigned=None, budget=None):
    """First homomorphism found by a complete search, or None."""
    return next(iter_homomorphisms(A, B, preassigned=preassigned, budget=budget), None)


def sample_homomorphisms(A, B, count, rng=None, budget_per_sample=None):
    """Up to ``count`` distinct homomorphisms found by randomised searches."""
    rng = rng or random.Random(0)
    found = {}
    for _ in range(count):
        budget = SearchBudget(budget_per_sample)
        try:
            f = search_homomorphism_randomised(A, B, rng, budget)
        except Exception as e:
            log.debug(f"Randomised homomorphism search stopped: {e}")
            continue
        if f is None:
            break
        found.setdefault(tuple(sorted(f.assignment.items())), f)
    return list(found.values())


def search_homomorphism_randomised(A, B, rng, budget=None):
    return next(iter_homomorphisms(A, B, rng=rng, budget=budget), None)


def homomorphisms(A, B, limit, rng=None):
    """All homomorphisms when there are few enough maps, otherwise a sample.

    Returns the maps and the mode used, "exhaustive" or "sampled".
    """
    if len(B) ** len(A) <= limit:
        return list(iter_homomorphisms(A, B)), "exhaustive"
    first = search_homomorphism(A, B, budget=SearchBudget(limit))
    sample = sample_homomorphisms(A, B, 4, rng=rng, budget_per_sample=limit)
    maps = {}
    for f in ([first] if first is not None else []) + sample:
        maps.setdefault(tuple(sorted(f.assignment.items())), f)
    return list(maps.values()), "sampled"


def _same_shape(A, B):
    return (
        A.signature == B.signature
        and len(A) == len(B)
        and A.is_pointed == B.is_pointed
        and all(A.tuple_count(name) == B.tuple_count(name) for name in A.signature.names)
    )


def search_isomorphism(A, B, budget=None):
    """An isomorphism found by brute-force search over bijections, or None.

    An injective homomorphism between structures with equally many elements and
    equally many tuples in every relation is an isomorphism.
    """
    if not _same_shape(A, B):
        return None
    return next(iter_homomorphisms(A, B, injective=True, budget=budget), None)


def are_isomorphic(A, B):
    return search_isomorphism(A, B) is not None


#########################
#  Structure families   #
#########################


def element_names(n):
    if n <= len(string.ascii_lowercase):
        return tuple(string.ascii_lowercase[:n])
    return tuple(f"e{i}" for i in range(n))


def _canonical_form(A):
    """Smallest relabelling of ``A`` onto its own element names; fixes the point."""
    names = A.universe
    movable = [x for x in names if x != A.point]
    best = None
    for perm in itertools.permutations(movable):
        relabel = dict(zip(movable, perm))
        if A.point is not None:
            relabel[A.point] = A.point
        form = tuple(
            (name, tuple(sorted(tuple(relabel[x] for x in tup) for tup in A.relations[name])))
            for name in A.signature.names
        )
        if best is None or form < best:
            best = form
    return best


def enumerate_structures(signature, sizes, pointed=False, up_to_iso=False):
    """Every structure over ``signature`` on the universes {a}, {a,b}, ... of the given sizes.

    Pointed structures use ``a`` as their point; pointed structures need at least one element.
    """
    signature = Signature.of(signature)
    family = []
    for n in sizes:
        if pointed and n == 0:
            continue
        universe = element_names(n)
        slots = [
            (name, tup)
            for name, arity in signature.symbols
            for tup in itertools.product(universe, repeat=arity)
        ]
        seen = set()
        for mask in range(2 ** len(slots)):
            relations = {name: [] for name in signature.names}
            for bit, (name, tup) in enumerate(slots):
                if mask >> bit & 1:
                    relations[name].append(tup)
            member = Structure(signature, universe, relations, universe[0] if pointed else None)
            if up_to_iso:
                form = _canonical_form(member)
                if form in seen:
                    continue
                seen.add(form)
            family.append(member)
    return family


def graph_structure(graph):
    """Loopless undirected ``networkx`` graph as an {E/2}-structure."""
    names = {node: f"v{node}" for node in graph.nodes}
    edges = []
    for u, v in graph.edges:
        if u == v:
            continue
        edges += [(names[u], names[v]), (names[v], names[u])]
    return Structure(Signature.of({"E": 2}), tuple(names.values()), {"E": edges})


def graph_family(max_vertices):
    """All loopless undirected graphs with at most ``max_vertices`` vertices, up to isomorphism."""
    if max_vertices > 7:
        raise ValueError("The graph atlas only covers graphs with up to 7 vertices")
    return [
        graph_structure(graph)
        for graph in nx.graph_atlas_g()
        if graph.number_of_nodes() <= max_vertices
    ]
