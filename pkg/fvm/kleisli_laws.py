"""Operations on structures, Kleisli laws for them and the law checker.

A Kleisli law for an n-ary operation ``H`` is a family of homomorphisms
``κ: D(H(A1, ..., An)) -> H(C1(A1), ..., Cn(An))``. Comonad morphisms are the
Kleisli laws for the identity operation.
"""

import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import Callable

from fvm.game_comonads import (
    CospectralComonad,
    EFComonad,
    ModalComonad,
    PebbleComonad,
    comonad_by_name,
)
from fvm.structures import (
    Signature,
    StructMap,
    disjoint_union,
    homomorphisms,
    is_homomorphism,
    merge,
    pointed_coproduct,
    product,
    reduct,
    vee,
)
from fvm.util import (
    STAR,
    BudgetExceeded,
    CheckReport,
    EndpointMismatchError,
    FVMError,
    MalformedMapError,
    TruncationError,
    Verdict,
    decode,
    decode_tagged,
    encode,
    encode_tagged,
    first_mismatch,
    ordered_map,
    structure_id,
)

log = logging.getLogger(__name__)


#########################
#      Operations       #
#########################


@dataclass(frozen=True)
class OperationSpec:
    """An n-ary operation ``H`` on structures with its action on maps.

    ``element_map(fs, x, points)`` sends an element ``x`` of ``H(A1, ..., An)`` to
    ``H(f1, ..., fn)(x)``; ``points`` are the points of the target structures and
    only matter for operations that glue points together.
    """

    name: str
    arity: int
    construct: Callable = field(repr=False)
    element_map: Callable = field(repr=False)

    def apply(self, structures):
        structures = list(structures)
        if len(structures) != self.arity:
            raise EndpointMismatchError(
                f"Operation {self.name} takes {self.arity} structures, got {len(structures)}"
            )
        return self.construct(structures)

    def map_element(self, fs, x, points=None):
        return self.element_map(fs, x, points)

    def map_function(self, fs, points=None):
        return lambda x: self.element_map(fs, x, points)

    def apply_map(self, maps):
        maps = list(maps)
        source = self.apply([f.source for f in maps])
        target = self.apply([f.target for f in maps])
        points = [f.target.point for f in maps]
        return StructMap(
            source, target, {x: self.element_map(maps, x, points) for x in source.universe}
        )


def _unary_map(fs, x, points):
    return fs[0](x)


def _tagged_map(fs, x, points):
    tag, inner = decode_tagged(x)
    return encode_tagged(tag, fs[tag - 1](inner))


def _rooted_map(fs, x, points):
    if x == STAR:
        return STAR
    return _tagged_map(fs, x, points)


def _glued_map(fs, x, points):
    if x == STAR:
        return STAR
    tag, inner = decode_tagged(x)
    image = fs[tag - 1](inner)
    if points is not None and image == points[tag - 1]:
        return STAR
    return encode_tagged(tag, image)


def _product_map(fs, x, points):
    return encode([f(a) for f, a in zip(fs, decode(x))])


def identity_operation():
    return OperationSpec("identity", 1, lambda structures: structures[0], _unary_map)


def reduct_operation(tau):
    tau = Signature.of(tau)
    return OperationSpec(
        f"reduct{tau}", 1, lambda structures: reduct(structures[0], tau), _unary_map
    )


def coproduct_operation(m=2):
    return OperationSpec(f"coproduct{m}", m, disjoint_union, _tagged_map)


def product_operation(m=2):
    return OperationSpec(f"product{m}", m, product, _product_map)


def merge_operation(R):
    return OperationSpec(f"merge[{R}]", 2, lambda structures: merge(*structures, R), _rooted_map)


def vee_operation():
    return OperationSpec("vee", 2, lambda structures: vee(*structures), _rooted_map)


def pointed_coproduct_operation():
    return OperationSpec(
        "pointed_coproduct", 2, lambda structures: pointed_coproduct(*structures), _glued_map
    )


#########################
#     Kleisli laws      #
#########################


class KleisliLaw:
    """A Kleisli law ``κ: D∘H => H∘(C1 × ... × Cn)`` given element by element.

    ``kappa(points, w)`` maps an element ``w`` of ``D(H(A1, ..., An))``, where
    ``points`` are the points of the ``Ai`` (``None`` when unpointed).
    """

    def __init__(self, name, operation, sources, target, kappa):
        if len(sources) != operation.arity:
            raise EndpointMismatchError(
                f"{operation.name} has arity {operation.arity} but {len(sources)} comonads were given"
            )
        self.name = name
        self.operation = operation
        self.sources = list(sources)
        self.target = target
        self.kappa = kappa

    def __repr__(self):
        sources = ",".join(C.label for C in self.sources)
        return f"KleisliLaw({self.name}: {self.target.label}∘{self.operation.name} => {sources})"

    @property
    def arity(self):
        return self.operation.arity

    @property
    def is_comonad_morphism(self):
        return self.operation.name == "identity"

    def accepts(self, structures):
        try:
            self.check_arguments(structures)
        except FVMError:
            return False
        return True

    def check_arguments(self, structures):
        for C, A in zip(self.sources, structures):
            C.check_input(A)
        self.target.check_input(self.operation.apply(structures))

    def kappa_function(self, points):
        return lambda w: self.kappa(points, w)

    def lifted_points(self, structures):
        return [C.lift_point(A) for C, A in zip(self.sources, structures)]

    def component(self, structures):
        """The homomorphism ``κ_{A⃗}`` as a StructMap."""
        structures = list(structures)
        DH = self.target.build(self.operation.apply(structures))
        HC = self.operation.apply([C.build(A) for C, A in zip(self.sources, structures)])
        points = [A.point for A in structures]
        return StructMap(DH, HC, {w: self.kappa(points, w) for w in DH.universe})


def _coproduct_kappa_words(restrict):
    def kappa(points, w):
        letters = [decode_tagged(x) for x in decode(w)]
        tag = letters[-1][0]
        if restrict:
            return encode_tagged(tag, encode([a for t, a in letters if t == tag]))
        return encode_tagged(tag, encode([a for _, a in letters]))

    return kappa


def _coproduct_kappa_pebbles(restrict):
    def kappa(points, w):
        letters = [(p, *decode_tagged(x)) for p, x in decode(w)]
        tag = letters[-1][1]
        return encode_tagged(
            tag, encode([[p, a] for p, t, a in letters if t == tag or not restrict])
        )

    return kappa


def kappa_coproduct(C, m=2, restrict=True):
    """Coproduct law for ``E_k`` or ``P_{k,len}``: a word goes to the component of its last
    letter, keeping only the letters from that component.

    ``restrict=False`` keeps every letter; that variant is not a Kleisli law.
    """
    if m < 2:
        raise ValueError("Coproducts need at least two components")
    if isinstance(C, EFComonad):
        kappa = _coproduct_kappa_words(restrict)
    elif isinstance(C, PebbleComonad):
        kappa = _coproduct_kappa_pebbles(restrict)
    else:
        raise FVMError(f"No coproduct law for {C.label}")
    name = f"coproduct-{C.name}" + ("" if restrict else "-unrestricted")
    return KleisliLaw(name, coproduct_operation(m), [C] * m, C, kappa)


def kappa_product(C, m=2):
    """Product law for any comonad: the tupling of ``C(π_i)``."""

    def kappa(points, w):
        return encode(
            [C.functor_element(lambda x, i=i: decode(x)[i], w) for i in range(m)]
        )

    return KleisliLaw(f"product-{C.name}", product_operation(m), [C] * m, C, kappa)


def kappa_reduct(k, tau):
    """``E_k`` commutes with taking reducts: words are sent to themselves."""
    E = EFComonad(k)
    return KleisliLaw("reduct", reduct_operation(tau), [E], E, lambda points, w: w)


def kappa_merge(k, R="R"):
    """``M_{k+1}(merge(A, B)) -> merge(M_k(A), M_k(B))``: the first step into a component is dropped."""

    def kappa(points, w):
        path = decode(w)
        if len(path) == 1:
            return STAR
        tag, start = decode_tagged(path[2])
        out = [start]
        for i in range(3, len(path), 2):
            out += [path[i], decode_tagged(path[i + 1])[1]]
        return encode_tagged(tag, encode(out))

    return KleisliLaw("merge", merge_operation(R), [ModalComonad(k)] * 2, ModalComonad(k + 1), kappa)


def kappa_vee(k):
    """``M_k(A ∨ B) -> M_k(A) ∨ M_k(B)``: the fresh root is replaced by the point of the component."""

    def kappa(points, w):
        path = decode(w)
        if len(path) == 1:
            return STAR
        tag, _ = decode_tagged(path[2])
        out = [points[tag - 1]]
        for i in range(1, len(path), 2):
            out += [path[i], decode_tagged(path[i + 1])[1]]
        return encode_tagged(tag, encode(out))

    return KleisliLaw("vee", vee_operation(), [ModalComonad(k)] * 2, ModalComonad(k), kappa)


def _require_length(needed, length, law):
    if length < needed:
        raise TruncationError(f"{law} needs words of length {needed}, the truncation is {length}")


def morph_ef_to_pebble(k, length=None):
    """``E_k => P_{k,len}``: the j-th letter is placed with pebble j."""
    length = k if length is None else length
    _require_length(k, length, "ef-to-pebble")

    def kappa(points, w):
        return encode([[j, a] for j, a in enumerate(decode(w))])

    return KleisliLaw(
        "ef-to-pebble", identity_operation(), [PebbleComonad(k, length)], EFComonad(k), kappa
    )


def morph_modal_to_pebble2(k, length=None):
    """``M_k => P_{2,len}``: path elements are pebbled by the parity of their position."""
    length = k + 1 if length is None else length
    _require_length(k + 1, length, "modal-to-pebble2")

    def kappa(points, w):
        path = decode(w)
        return encode([[j % 2, a] for j, a in enumerate(path[::2])])

    return KleisliLaw(
        "modal-to-pebble2", identity_operation(), [PebbleComonad(2, length)], ModalComonad(k), kappa
    )


def morph_cos_to_pebble3(length, pebble_length=None):
    """``Cos_len => P_{3,len'}``: a walk point ``(c, v_i)`` becomes the walk up to ``v_i``,
    with the start on pebble 2 and the rest alternating between pebbles 1 and 0."""
    pebble_length = length if pebble_length is None else pebble_length
    _require_length(length, pebble_length, "cos-to-pebble3")

    def kappa(points, w):
        walk, i = decode(w)
        return encode([[2, walk[0]]] + [[j % 2, walk[j]] for j in range(1, i + 1)])

    return KleisliLaw(
        "cos-to-pebble3",
        identity_operation(),
        [PebbleComonad(3, pebble_length)],
        CospectralComonad(length),
        kappa,
    )


def identity_law(C):
    return KleisliLaw(f"identity-{C.name}", identity_operation(), [C], C, lambda points, w: w)


#########################
#      Law checking     #
#########################


def _hom_tuples(sources, targets, limit, rng, cap):
    """Tuples of homomorphisms ``A_i -> B_i``; at most ``cap`` of them."""
    choices = []
    mode = "exhaustive"
    for A, B in zip(sources, targets):
        try:
            maps, found_mode = homomorphisms(A, B, limit, rng=rng)
        except BudgetExceeded:
            maps, found_mode = [], "sampled"
        if found_mode == "sampled":
            mode = found_mode
        choices.append(maps)
    tuples = list(itertools.islice(itertools.product(*choices), cap + 1))
    if len(tuples) > cap:
        mode = "sampled"
        rng.shuffle(tuples)
        tuples = tuples[:cap]
    return tuples, mode


@dataclass
class _Instance:
    law: KleisliLaw
    args: list
    members: list
    limit: int
    seed: int
    targets: int
    cap: int


def _check_instance(inst):
    L, args = inst.law, inst.args
    H, D, Cs = L.operation, L.target, L.sources
    subject = "+".join(structure_id(A) for A in args)
    report = CheckReport("LAW")
    rng = random.Random(inst.seed)
    points = [A.point for A in args]
    lifted = L.lifted_points(args)
    kappa = L.kappa_function(points)
    kappa_lifted = L.kappa_function(lifted)

    identities = [StructMap.identity(A) for A in args]
    report.add_check(
        f"{L.name}:functor_identity",
        subject,
        H.apply_map(identities) == StructMap.identity(H.apply(args)),
    )

    try:
        component = L.component(args)
        component_ok = is_homomorphism(component)
        report.add_check(f"{L.name}:component_hom", subject, component_ok)
    except MalformedMapError as e:
        report.add_check(f"{L.name}:component_hom", subject, False, str(e))
        return report, False, False
    elements = component.source.universe

    counits = [C.counit_element for C in Cs]
    detail = first_mismatch(
        elements, lambda w: H.map_element(counits, kappa(w), points), D.counit_element
    )
    k1 = detail is None
    report.add_check(f"{L.name}:K1", subject, k1, detail or "")

    deltas = [C.delta_element for C in Cs]
    detail = first_mismatch(
        elements,
        lambda w: H.map_element(deltas, kappa(w), lifted),
        lambda w: kappa_lifted(D.functor_element(kappa, D.delta_element(w))),
    )
    k2 = detail is None
    report.add_check(f"{L.name}:K2", subject, k2, detail or "")

    # naturality over homomorphisms between family members
    naturality = None
    modes = set()
    targets = [list(args)] + [
        list(t) for t in itertools.islice(itertools.product(inst.members, repeat=L.arity), inst.targets)
    ]
    for target_args in targets:
        if not L.accepts(target_args):
            continue
        hom_tuples, mode = _hom_tuples(args, target_args, inst.limit, rng, inst.cap)
        modes.add(mode)
        target_points = [B.point for B in target_args]
        kappa_target = L.kappa_function(target_points)
        for hs in hom_tuples:
            lifted_hs = [lambda v, C=C, h=h: C.functor_element(h, v) for C, h in zip(Cs, hs)]
            detail = first_mismatch(
                elements,
                lambda w: H.map_element(lifted_hs, kappa(w), L.lifted_points(target_args)),
                lambda w: kappa_target(D.functor_element(H.map_function(hs, target_points), w)),
            )
            if detail and naturality is None:
                naturality = detail
    report.add_check(f"{L.name}:naturality", subject, naturality is None, naturality or "")

    # the same law in coextension form, on identities, counits and sampled Kleisli morphisms
    instances = [
        ([lambda v: v for _ in Cs], lifted),
        ([C.counit_element for C in Cs], points),
    ]
    built = [C.build(A) for C, A in zip(Cs, args)]
    for target_args in targets[1:]:
        if not all(C.accepts(B) for C, B in zip(Cs, target_args)):
            continue
        if [B.is_pointed for B in target_args] != [CA.is_pointed for CA in built]:
            continue
        hom_tuples, mode = _hom_tuples(built, target_args, inst.limit, rng, 2)
        modes.add(mode)
        instances.extend((list(fs), [B.point for B in target_args]) for fs in hom_tuples)
    coextension = None
    for fs, target_points in instances:
        kappa_target = L.kappa_function(target_points)
        extended = [lambda v, C=C, f=f: C.coextend_element(f, v) for C, f in zip(Cs, fs)]
        detail = first_mismatch(
            elements,
            lambda w: H.map_element(extended, kappa(w), None),
            lambda w: kappa_target(
                D.coextend_element(lambda u: H.map_element(fs, kappa(u), target_points), w)
            ),
        )
        if detail and coextension is None:
            coextension = detail
    report.add_check(f"{L.name}:coextension_form", subject, coextension is None, coextension or "")

    axioms = component_ok and k1 and k2 and naturality is None
    coextension_form = component_ok and k1 and coextension is None
    report.add_check(
        f"{L.name}:formulations_agree",
        subject,
        axioms == coextension_form,
        f"axioms={axioms} coextension={coextension_form}",
    )
    report.record_mode(f"{L.name}:naturality", "sampled" if "sampled" in modes else "exhaustive")
    return report, axioms, coextension_form


def check_kleisli_law(L, family, limit=10**5, seed=0, targets=4, cap=8):
    """Check naturality, (K1), (K2) and the coextension form of ``L`` on every argument
    tuple drawn from ``family``."""
    report = CheckReport("LAW")
    members = list(family)
    tuples = [list(args) for args in itertools.product(members, repeat=L.arity)]
    accepted = []
    for args in tuples:
        if L.accepts(args):
            accepted.append(args)
        else:
            subject = "+".join(structure_id(A) for A in args)
            report.add_check(f"{L.name}:domain", subject, Verdict.SKIP, "outside the domain")
    usable = [A for A in members if all(C.accepts(A) for C in L.sources)]
    instances = [
        _Instance(L, args, usable, limit, seed, targets, cap) for args in accepted
    ]
    for result, _, _ in ordered_map(_check_instance, instances):
        report.extend(result)
    log.info(
        f"Checked {L.name} on {len(accepted)} argument tuples: {report.count(Verdict.FAIL)} failures"
    )
    return report


def check_comonad_morphism(L, family, **kwargs):
    """A comonad morphism is a Kleisli law for the identity operation."""
    if L.arity != 1 or not L.is_comonad_morphism:
        raise EndpointMismatchError(f"{L.name} is not a law for the identity operation")
    return check_kleisli_law(L, family, **kwargs)


#########################
#       Registry        #
#########################


def law_by_name(name, k=2, length=3, tau=None, relation="R", m=2):
    """Build a shipped law from its command-line name."""
    laws = {
        "reduct": lambda: kappa_reduct(k, tau or {}),
        "coproduct-E": lambda: kappa_coproduct(EFComonad(k), m),
        "coproduct-P": lambda: kappa_coproduct(PebbleComonad(k, length), m),
        "coproduct-E-unrestricted": lambda: kappa_coproduct(EFComonad(k), m, restrict=False),
        "coproduct-P-unrestricted": lambda: kappa_coproduct(
            PebbleComonad(k, length), m, restrict=False
        ),
        "product-E": lambda: kappa_product(comonad_by_name("E", k, length), m),
        "product-P": lambda: kappa_product(comonad_by_name("P", k, length), m),
        "product-M": lambda: kappa_product(comonad_by_name("M", k, length), m),
        "product-Cos": lambda: kappa_product(comonad_by_name("Cos", k, length), m),
        "merge": lambda: kappa_merge(k, relation),
        "vee": lambda: kappa_vee(k),
        "ef-to-pebble": lambda: morph_ef_to_pebble(k, max(k, length)),
        "modal-to-pebble2": lambda: morph_modal_to_pebble2(k, max(k + 1, length)),
        "cos-to-pebble3": lambda: morph_cos_to_pebble3(length),
        "identity-E": lambda: identity_law(EFComonad(k)),
    }
    if name not in laws:
        raise FVMError(f"Unknown law {name!r}, expected one of {sorted(laws)}")
    return laws[name]()


LAW_NAMES = (
    "reduct",
    "coproduct-E",
    "coproduct-P",
    "coproduct-E-unrestricted",
    "coproduct-P-unrestricted",
    "product-E",
    "product-P",
    "product-M",
    "product-Cos",
    "merge",
    "vee",
    "ef-to-pebble",
    "modal-to-pebble2",
    "cos-to-pebble3",
    "identity-E",
)
