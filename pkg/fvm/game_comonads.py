"""The concrete comonads: Ehrenfeucht-Fraïssé, pebbling, modal and closed-walk comonads.

Elements of ``C(A)`` are JSON-encoded:

* ``E_k``: words ``[a1, ..., an]`` with ``1 <= n <= k``;
* ``P_{k,len}``: words ``[[p1, a1], ..., [pn, an]]`` with pebbles ``0 <= pi < k``
  and ``1 <= n <= len``;
* ``M_k``: paths ``[a0, R1, a1, ..., Rn, an]`` from the point with ``n <= k``;
* ``Cos_len``: walk points ``[[v0, ..., vn], i]`` on closed walks with
  ``2 <= n + 1 <= len``.
"""

import itertools
import logging

from fvm.comonads import Comonad
from fvm.structures import Signature, Structure
from fvm.util import (
    NotAGraphError,
    SignatureMismatchError,
    UnsupportedComonadError,
    decode,
    encode,
)

log = logging.getLogger(__name__)

GRAPH_SIGNATURE = Signature.of({"E": 2})


def _check_positive(**params):
    for name, value in params.items():
        if not isinstance(value, int) or value < 1:
            raise ValueError(f"Parameter {name} must be a positive integer, got {value!r}")


def _word_prefixes(letters):
    return [letters[: i + 1] for i in range(len(letters))]


def _is_prefix(u, v):
    return len(u) <= len(v) and v[: len(u)] == u


class _WordComonad(Comonad):
    """Shared machinery of ``E_k`` and ``P_{k,len}``: words ordered by prefixes."""

    max_length = None

    def _letters(self, A):
        raise NotImplementedError

    def _element(self, letter):
        raise NotImplementedError

    def _compatible(self, words):
        """Extra condition on a tuple of pairwise comparable words."""
        return True

    def _build(self, A):
        letters = self._letters(A)
        words = [
            list(word)
            for n in range(1, self.max_length + 1)
            for word in itertools.product(letters, repeat=n)
        ]
        relations = {name: set() for name in A.signature.names}
        for name, arity in A.signature.symbols:
            tuples = A.relations[name]
            if not tuples:
                continue
            for word in words:
                chain = _word_prefixes(word)
                # tuples whose longest word is ``word`` itself
                for combo in itertools.product(chain, repeat=arity):
                    if max(len(u) for u in combo) != len(word):
                        continue
                    if tuple(self._element(u[-1]) for u in combo) not in tuples:
                        continue
                    if self._compatible(combo):
                        relations[name].add(tuple(encode(u) for u in combo))
        point = self.lift_point(A)
        return Structure(A.signature, tuple(encode(w) for w in words), relations, point)

    def counit_element(self, w):
        return self._element(decode(w)[-1])

    def prefixes(self, w):
        return [encode(u) for u in _word_prefixes(decode(w))]

    def is_prefix(self, v, w):
        return _is_prefix(decode(v), decode(w))

    def holds(self, A, name, elements):
        words = [decode(x) for x in elements]
        for u, v in itertools.combinations(words, 2):
            if not (_is_prefix(u, v) or _is_prefix(v, u)):
                return False
        if not self._compatible(words):
            return False
        return A.holds(name, tuple(self._element(u[-1]) for u in words))


class EFComonad(_WordComonad):
    """``E_k``: plays of the k-round Ehrenfeucht-Fraïssé game as words of elements."""

    name = "E"

    def __init__(self, k):
        _check_positive(k=k)
        super().__init__()
        self.k = k
        self.max_length = k

    @property
    def params(self):
        return {"k": self.k}

    def _letters(self, A):
        return A.universe

    def _element(self, letter):
        return letter

    def point_element(self, point):
        return encode([point])

    def coextend_element(self, h, w):
        letters = decode(w)
        return encode([h(encode(u)) for u in _word_prefixes(letters)])

    def contains(self, A, w):
        letters = decode(w)
        return (
            isinstance(letters, list)
            and 1 <= len(letters) <= self.k
            and all(isinstance(a, str) and a in A for a in letters)
        )


class PebbleComonad(_WordComonad):
    """``P_{k,len}``: plays of the k-pebble game, truncated to ``len`` moves.

    Coextension keeps lengths and pebbles, so the truncation is closed under all
    comonad operations.
    """

    name = "P"

    def __init__(self, k, length):
        _check_positive(k=k, length=length)
        super().__init__()
        self.k = k
        self.length = length
        self.max_length = length

    @property
    def params(self):
        return {"k": self.k, "len": self.length}

    def _letters(self, A):
        return [[p, a] for p in range(self.k) for a in A.universe]

    def _element(self, letter):
        return letter[1]

    def _compatible(self, words):
        # The pebble placed last in a shorter word must not be moved again in a longer one.
        for u, v in itertools.permutations(words, 2):
            if len(u) < len(v) and _is_prefix(u, v):
                pebble = u[-1][0]
                if any(p == pebble for p, _ in v[len(u):]):
                    return False
        return True

    def point_element(self, point):
        return encode([[0, point]])

    def coextend_element(self, h, w):
        letters = decode(w)
        return encode(
            [[letter[0], h(encode(u))] for letter, u in zip(letters, _word_prefixes(letters))]
        )

    def contains(self, A, w):
        letters = decode(w)
        if not isinstance(letters, list) or not 1 <= len(letters) <= self.length:
            return False
        return all(
            isinstance(letter, list)
            and len(letter) == 2
            and letter[0] in range(self.k)
            and letter[1] in A
            for letter in letters
        )


class ModalComonad(Comonad):
    """``M_k``: paths of length at most k from the point of a pointed modal structure."""

    name = "M"
    kind = "pointed"

    def __init__(self, k):
        _check_positive(k=k)
        super().__init__()
        self.k = k

    @property
    def params(self):
        return {"k": self.k}

    def check_input(self, A):
        if not A.signature.is_modal:
            raise SignatureMismatchError(
                f"{self.label} needs a modal signature (arities 1 and 2), got {A.signature}"
            )
        if not A.is_pointed:
            raise SignatureMismatchError(f"{self.label} needs a pointed structure")

    def _paths(self, A):
        successors = {x: [] for x in A.universe}
        for name in A.signature.binary_symbols:
            for source, target in sorted(A.relations[name]):
                successors[source].append((name, target))
        layer = [[A.point]]
        paths = list(layer)
        for _ in range(self.k):
            layer = [path + [name, y] for path in layer for name, y in successors[path[-1]]]
            paths.extend(layer)
        return paths

    def _build(self, A):
        paths = self._paths(A)
        relations = {name: [] for name in A.signature.names}
        for path in paths:
            if len(path) > 1:
                relations[path[-2]].append((encode(path[:-2]), encode(path)))
            for name in A.signature.unary_symbols:
                if A.holds(name, (path[-1],)):
                    relations[name].append((encode(path),))
        return Structure(
            A.signature, tuple(encode(p) for p in paths), relations, self.point_element(A.point)
        )

    def counit_element(self, w):
        return decode(w)[-1]

    def coextend_element(self, h, w):
        path = decode(w)
        return encode(
            [h(encode(path[: i + 1])) if i % 2 == 0 else step for i, step in enumerate(path)]
        )

    def point_element(self, point):
        return encode([point])

    def prefixes(self, w):
        path = decode(w)
        return [encode(path[: i + 1]) for i in range(0, len(path), 2)]

    def is_prefix(self, v, w):
        return _is_prefix(decode(v), decode(w))

    def contains(self, A, w):
        path = decode(w)
        if not isinstance(path, list) or len(path) % 2 == 0 or len(path) > 2 * self.k + 1:
            return False
        if path[0] != A.point:
            return False
        for i in range(1, len(path), 2):
            name = path[i]
            if name not in A.signature.binary_symbols:
                return False
            if not A.holds(name, (path[i - 1], path[i + 1])):
                return False
        return True

    def holds(self, A, name, elements):
        paths = [decode(x) for x in elements]
        if A.signature.arity(name) == 1:
            return A.holds(name, (paths[0][-1],))
        s, t = paths
        return len(t) == len(s) + 2 and t[: len(s)] == s and t[-2] == name


def check_graph(A):
    """Raise NotAGraphError unless ``A`` is a loopless undirected graph over {E/2}."""
    if A.signature != GRAPH_SIGNATURE:
        raise NotAGraphError(f"Expected the signature {GRAPH_SIGNATURE}, got {A.signature}")
    edges = A.relations["E"]
    loops = [x for x, y in edges if x == y]
    if loops:
        raise NotAGraphError(f"The graph has loops at {sorted(loops)[:5]}")
    asymmetric = [(x, y) for x, y in edges if (y, x) not in edges]
    if asymmetric:
        raise NotAGraphError(f"The edge relation is not symmetric, e.g. {sorted(asymmetric)[0]}")


class CospectralComonad(Comonad):
    """``Cos_len``: points on closed walks of length at most ``len``.

    Two walk points are adjacent when they lie on the same walk at neighbouring
    positions (cyclically).

    Walk points are not ordered by prefixes, so ``Cos_len`` has no coalgebras here:
    ``cofree``, ``full-check`` and every other coalgebra operation reject it with
    UnsupportedComonadError.
    """

    name = "Cos"
    has_prefix_order = False

    def __init__(self, length):
        _check_positive(length=length)
        super().__init__()
        self.length = length

    @property
    def params(self):
        return {"len": self.length}

    def check_input(self, A):
        check_graph(A)

    def _closed_walks(self, A):
        neighbours = {x: [] for x in A.universe}
        for x, y in sorted(A.relations["E"]):
            neighbours[x].append(y)
        walks = []
        for m in range(2, self.length + 1):
            layer = [[x] for x in A.universe]
            for _ in range(m - 1):
                layer = [walk + [y] for walk in layer for y in neighbours[walk[-1]]]
            walks.extend(walk for walk in layer if walk[0] in neighbours[walk[-1]])
        return walks

    def _build(self, A):
        universe = []
        edges = []
        for walk in self._closed_walks(A):
            m = len(walk)
            universe.extend(encode([walk, i]) for i in range(m))
            for i in range(m):
                j = (i + 1) % m
                edges.append((encode([walk, i]), encode([walk, j])))
                edges.append((encode([walk, j]), encode([walk, i])))
        return Structure(A.signature, tuple(universe), {"E": edges})

    def counit_element(self, w):
        walk, i = decode(w)
        return walk[i]

    def coextend_element(self, h, w):
        walk, i = decode(w)
        return encode([[h(encode([walk, j])) for j in range(len(walk))], i])

    def point_element(self, point):
        raise UnsupportedComonadError(f"{self.label} acts on unpointed graphs only")

    def contains(self, A, w):
        walk, i = decode(w)
        m = len(walk)
        if not 2 <= m <= self.length or i not in range(m):
            return False
        return all(A.holds("E", (walk[j], walk[(j + 1) % m])) for j in range(m))

    def holds(self, A, name, elements):
        (c, i), (d, j) = (decode(x) for x in elements)
        m = len(c)
        return c == d and i != j and (j == (i + 1) % m or i == (j + 1) % m)


#########################
#       Registry        #
#########################


COMONADS = {
    "E": lambda k, length: EFComonad(k),
    "P": lambda k, length: PebbleComonad(k, length),
    "M": lambda k, length: ModalComonad(k),
    "Cos": lambda k, length: CospectralComonad(length),
}


def comonad_by_name(name, k=2, length=3):
    if name not in COMONADS:
        raise UnsupportedComonadError(
            f"Unknown comonad {name!r}, expected one of {sorted(COMONADS)}"
        )
    return COMONADS[name](k, length)


def comonad_from_doc(doc):
    return comonad_by_name(doc["name"], doc.get("k", 2), doc.get("len", 3))
