"""Command line surface: structure files, single checks and the verification suites.

Every command prints machine-parsable report lines on stdout and returns an exit
code: 0 when everything checked passes (or the relation holds), 1 on a failed
check, 2 on unusable input and 3 when a budget-limited search was inconclusive.
"""

import functools
import logging
import sys

import simplejson as json
from pydantic import BaseModel, ConfigDict, PositiveInt, ValidationError, field_validator
from tornado.log import LogFormatter, define_logging_options
from tornado.options import Error as OptionsError
from tornado.options import OptionParser

from fvm.coalgebras import check_full_logic, check_surjective_path_image
from fvm.fvm_engine import (
    CountingWitness,
    PEWitness,
    compose_counting_witness,
    compose_pe_witness,
    decide_fo_eq_equiv,
    decide_fo_noeq_equiv,
    decide_modal_sim,
    decide_pe_game,
    find_fvm_counterexample,
    search_kleisli_iso,
    search_pe_witness,
)
from fvm.game_comonads import EFComonad, ModalComonad, comonad_by_name, comonad_from_doc
from fvm.kleisli_laws import (
    LAW_NAMES,
    check_kleisli_law,
    coproduct_operation,
    pointed_coproduct_operation,
    product_operation,
)
from fvm.spectra import spectra_report
from fvm.structures import Signature, Structure, StructMap
from fvm.suites import build_law, law_family, load_suite_config, run_suite, structure_family
from fvm.translations import WEAK_VARIANTS, translation_by_name
from fvm.util import (
    BudgetExceeded,
    FVMError,
    IntegrityError,
    InvalidWitnessError,
    SearchBudget,
    StructureFormatError,
    UnsupportedComonadError,
    Verdict,
    structure_id,
    validation_message,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INDETERMINATE = 3

#########################
#    Structure files    #
#########################


class StructureDoc(BaseModel):
    """The on-disk form of a structure; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    signature: dict[str, PositiveInt]
    universe: list[str]
    relations: dict[str, list[list[str]]]
    point: str | None = None

    @field_validator("universe")
    @classmethod
    def distinct_elements(cls, value):
        seen = set()
        for index, element in enumerate(value):
            if element in seen:
                raise ValueError(f"element {element!r} at position {index} is listed twice")
            seen.add(element)
        return value


class WitnessDoc(BaseModel):
    """A positive-existential witness carries ``map``, a counting witness ``forward`` and ``backward``."""

    model_config = ConfigDict(extra="forbid")

    comonad: dict
    source: dict
    target: dict
    map: dict[str, str] | None = None
    forward: dict[str, str] | None = None
    backward: dict[str, str] | None = None


def _load_json(data, source):
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise StructureFormatError(f"{source}: byte {e.start}: not valid UTF-8") from e
    try:
        return json.loads(data)
    except json.JSONDecodeError as e:
        raise StructureFormatError(f"{source}: line {e.lineno} column {e.colno}: {e.msg}") from e


def structure_from_doc(doc, source="<structure>"):
    try:
        model = StructureDoc.model_validate(doc)
    except ValidationError as e:
        raise StructureFormatError(validation_message(source, e)) from e
    try:
        return Structure.from_doc(model.model_dump())
    except FVMError as e:
        raise StructureFormatError(f"{source}: {e}") from e


def parse_structure(data, source="<structure>"):
    """Parse a structure document given as bytes or text."""
    return structure_from_doc(_load_json(data, source), source)


def load_structure(path):
    with open(path, "rb") as structure_file:
        return parse_structure(structure_file.read(), path)


def load_witness(path):
    with open(path, "rb") as witness_file:
        doc = _load_json(witness_file.read(), path)
    try:
        model = WitnessDoc.model_validate(doc)
    except ValidationError as e:
        raise InvalidWitnessError(validation_message(path, e)) from e
    C = comonad_from_doc(model.comonad)
    A = structure_from_doc(model.source, f"{path}: source")
    B = structure_from_doc(model.target, f"{path}: target")
    try:
        if model.map is not None:
            return PEWitness(C, A, B, StructMap(C.build(A), B, model.map))
        if model.forward is None or model.backward is None:
            raise InvalidWitnessError(f"{path}: expected either map or forward and backward")
        forward = StructMap(C.build(A), B, model.forward)
        backward = StructMap(C.build(B), A, model.backward)
    except InvalidWitnessError:
        raise
    except FVMError as e:
        raise InvalidWitnessError(f"{path}: {e}") from e
    return CountingWitness(C, A, B, forward, backward)


def write_document(path, doc):
    with open(path, "w") as out_file:
        json.dump(doc, out_file, indent=2, sort_keys=True)
        out_file.write("\n")


#########################
#       Commands        #
#########################


def make_options():
    """Option parser of the command line; flags use the ``--name=value`` form."""
    parser = OptionParser()
    define_logging_options(parser)
    parser.define("k", default=2, type=int, help="Resource parameter: rounds, pebbles or modal depth")
    parser.define("len", default=3, type=int, help="Truncation length of P and Cos")
    parser.define("size", default=2, type=int, help="Largest structure in generated families")
    parser.define("graph_size", default=4, type=int, help="Most vertices in generated graph families")
    parser.define("comonad", default="E", help="Comonad of the pe and counting fragments")
    parser.define("fragment", default="pe", help="pe, counting, full-oracle or modal")
    parser.define("equality", default=False, type=bool, help="Use equality atoms in full-oracle")
    parser.define(
        "law",
        default=None,
        type=str,
        help=f"One of {', '.join(LAW_NAMES)}; full-check rejects laws involving Cos",
    )
    parser.define("witness", default=[], type=str, multiple=True, help="Witness files to compose")
    parser.define("output", default=None, type=str, help="Where to write a witness document")
    parser.define("tr", default="eq", help="eq, con, global or weak:S")
    parser.define("weak_variant", default="hide", help=f"One of {', '.join(WEAK_VARIANTS)}")
    parser.define("op", default="pointed_coproduct", help="pointed_coproduct, coproduct or product")
    parser.define("relation", default="modal", help="modal, pe or counting")
    parser.define("signature", default=None, type=str, help="Signature as R:2,P:1")
    parser.define("budget", default=None, type=int, help="Search node budget")
    parser.define("config", default="suite_settings.yaml", help="Suite settings file")
    parser.define("suite", default=[], type=str, multiple=True, help="Suites to run")
    parser.define("seed", default=None, type=int, help="Seed of sampled quantifiers")
    parser.define("mutate", default=False, type=bool, help="Add deliberately broken instances")
    parser.define("summary_json", default=None, type=str, help="Also write a JSON summary here")
    return parser


def parse_signature(text):
    symbols = {}
    for item in text.split(","):
        name, _, arity = item.partition(":")
        if not name or not arity.isdigit():
            raise FVMError(f"Cannot read signature item {item!r}, expected NAME:ARITY")
        symbols[name] = int(arity)
    return Signature.of(symbols)


def _verdict_exit(verdict):
    return {
        Verdict.PASS: EXIT_OK,
        Verdict.FAIL: EXIT_FAILED,
        Verdict.INDETERMINATE: EXIT_INDETERMINATE,
    }[verdict]


def _verdict_word(verdict):
    return {Verdict.PASS: "yes", Verdict.FAIL: "no", Verdict.INDETERMINATE: "indeterminate"}[verdict]


def _expect(args, count, usage):
    if len(args) != count:
        raise FVMError(f"usage: {usage}")
    return args


def cmd_comonad(options, args):
    _expect(args, 3, "comonad build NAME STRUCTURE.json [--k=K] [--len=L]")
    action, name, path = args
    if action != "build":
        raise FVMError(f"Unknown comonad action {action!r}, expected build")
    C = comonad_by_name(name, options["k"], options["len"])
    return EXIT_OK, [C.build(load_structure(path)).to_json()]


def cmd_check_law(options, args):
    (name,) = _expect(args, 1, "check-law LAW [--size=N] [--k=K] [--len=L]")
    signature = parse_signature(options["signature"]).to_dict() if options["signature"] else {"E": 2}
    L = build_law(name, options["k"], options["len"], signature)
    family = law_family(name, signature, options["size"], options["graph_size"])
    report = check_kleisli_law(L, family)
    lines = [f"LAWCHECK {name} k={options['k']} len={options['len']} size={options['size']}"]
    return (EXIT_OK if report.passed else EXIT_FAILED), lines + report.lines()


def cmd_equiv(options, args):
    path_A, path_B = _expect(args, 2, "equiv --fragment=F --k=K [--len=L] A.json B.json")
    A, B = load_structure(path_A), load_structure(path_B)
    k, fragment = options["k"], options["fragment"]
    budget = SearchBudget(options["budget"])
    lines = [f"EQUIV fragment={fragment} k={k} len={options['len']} A={structure_id(A)} B={structure_id(B)}"]
    witness = None
    if fragment in ("pe", "modal"):
        C = ModalComonad(k) if fragment == "modal" else comonad_by_name(options["comonad"], k, options["len"])
        try:
            witness = search_pe_witness(C, A, B, budget)
            verdict = Verdict.PASS if witness is not None else Verdict.FAIL
        except BudgetExceeded:
            verdict = Verdict.INDETERMINATE
        lines.append(f"COMONAD {C.label}")
        if fragment == "modal":
            lines.append(f"ORACLE simulation {'yes' if decide_modal_sim(k, A, B) else 'no'}")
        elif isinstance(C, EFComonad):
            lines.append(f"ORACLE pe_game {'yes' if decide_pe_game(k, A, B) else 'no'}")
    elif fragment == "counting":
        C = comonad_by_name(options["comonad"], k, options["len"])
        result = search_kleisli_iso(C, A, B, budget)
        verdict, witness = result.verdict, result.witness
        lines.append(f"COMONAD {C.label}")
    elif fragment == "full-oracle":
        decide = decide_fo_eq_equiv if options["equality"] else decide_fo_noeq_equiv
        verdict = Verdict.PASS if decide(k, A, B) else Verdict.FAIL
        lines.append(f"ORACLE {'fo_eq' if options['equality'] else 'fo_noeq'}")
    else:
        raise FVMError(f"Unknown fragment {fragment!r}, expected pe, counting, full-oracle or modal")
    lines.append(f"VERDICT {_verdict_word(verdict)}")
    if witness is not None and options["output"]:
        write_document(options["output"], witness.to_doc())
        lines.append(f"WITNESS {options['output']}")
    return _verdict_exit(verdict), lines


def cmd_compose(options, args):
    if not options["law"]:
        raise FVMError("usage: compose --law=NAME --witness=w1.json,w2.json")
    paths = list(options["witness"]) + list(args)
    L = build_law(options["law"], options["k"], options["len"])
    ws = [load_witness(path) for path in paths]
    kinds = {type(w) for w in ws}
    if len(kinds) != 1:
        raise InvalidWitnessError("Witnesses of different kinds cannot be composed")
    lines = [f"COMPOSE law={L.name} witnesses={len(ws)}"]
    try:
        if kinds == {PEWitness}:
            composite = compose_pe_witness(L, ws)
            lines.append("CHECK composite_hom PASS")
        else:
            composite = compose_counting_witness(L, ws)
            lines.append("CHECK kleisli_inverse PASS")
    except IntegrityError as e:
        lines.append(f"CHECK composite FAIL {e}")
        return EXIT_FAILED, lines
    if options["output"]:
        write_document(options["output"], composite.to_doc())
        lines.append(f"WITNESS {options['output']}")
    else:
        lines.append("WITNESS " + json.dumps(composite.to_doc(), sort_keys=True))
    return EXIT_OK, lines


def cmd_full_check(options, args):
    """Coalgebra checks of one law; laws involving Cos are rejected, Cos has no coalgebras."""
    if not options["law"]:
        raise FVMError("usage: full-check --law=NAME [--size=N], NAME a law over E, P or M")
    name = options["law"]
    signature = parse_signature(options["signature"]).to_dict() if options["signature"] else {"E": 2}
    L = build_law(name, options["k"], options["len"], signature)
    unsupported = [C.label for C in [*L.sources, L.target] if not C.has_prefix_order]
    if unsupported:
        raise UnsupportedComonadError(
            f"full-check needs coalgebras and {unsupported[0]} has none, its elements are not ordered by prefixes"
        )
    family = law_family(name, signature, options["size"], options["graph_size"])
    report = check_full_logic(L, family)
    for C in dict.fromkeys(L.sources):
        report.extend(check_surjective_path_image(C, family))
    lines = [f"FULLCHECK {name} k={options['k']} size={options['size']}"]
    return (EXIT_OK if report.passed else EXIT_FAILED), lines + report.lines()


def cmd_translate(options, args):
    (path,) = _expect(args, 1, "translate --tr=eq|con|global|weak:S A.json")
    translation = translation_by_name(options["tr"], options["weak_variant"])
    return EXIT_OK, [translation(load_structure(path)).to_json()]


def cmd_spectra(options, args):
    path_G, path_H = _expect(args, 2, "spectra G.json H.json")
    return EXIT_OK, spectra_report(load_structure(path_G), load_structure(path_H))


def cmd_counterexample(options, args):
    k, size = options["k"], options["size"]
    operations = {
        "pointed_coproduct": pointed_coproduct_operation(),
        "coproduct": coproduct_operation(2),
        "product": product_operation(2),
    }
    if options["op"] not in operations:
        raise FVMError(f"Unknown operation {options['op']!r}, expected one of {sorted(operations)}")
    relation_name = options["relation"]
    if relation_name == "modal":
        C = ModalComonad(k)
        relation = lambda A, B: search_pe_witness(C, A, B) is not None  # noqa: E731
    elif relation_name == "pe":
        C = comonad_by_name(options["comonad"], k, options["len"])
        relation = lambda A, B: search_pe_witness(C, A, B) is not None  # noqa: E731
    elif relation_name == "counting":
        C = comonad_by_name(options["comonad"], k, options["len"])
        relation = lambda A, B: search_kleisli_iso(C, A, B, SearchBudget(options["budget"])).found  # noqa: E731
    else:
        raise FVMError(f"Unknown relation {relation_name!r}, expected modal, pe or counting")
    if options["signature"]:
        signature = parse_signature(options["signature"])
    else:
        signature = Signature.of({"R": 2, "P": 1} if relation_name == "modal" else {"E": 2})
    pointed = options["op"] == "pointed_coproduct" or relation_name == "modal"
    family = structure_family(signature.to_dict(), size, pointed=pointed)
    found = find_fvm_counterexample(
        operations[options["op"]], functools.lru_cache(maxsize=None)(relation), family
    )
    lines = [f"COUNTEREXAMPLE op={options['op']} relation={relation_name} comonad={C.label} size={size}"]
    if found is None:
        return EXIT_OK, lines + [f"NONE within {len(family)} structures"]
    lines += found.lines()
    if relation_name == "modal":
        for left, right, label in (
            (found.A1, found.B1, "A1=>B1"),
            (found.A2, found.B2, "A2=>B2"),
            (found.image_A, found.image_B, "H(A)=>H(B)"),
        ):
            lines.append(f"CERT simulation {label} {'yes' if decide_modal_sim(k, left, right) else 'no'}")
    return EXIT_OK, lines


def cmd_suite(options, args):
    overrides = {}
    if options["suite"]:
        overrides["suites"] = list(options["suite"])
    if options["seed"] is not None:
        overrides["seed"] = options["seed"]
    if options["mutate"]:
        overrides["mutate"] = True
    cfg = load_suite_config(options["config"], overrides)
    code, lines, report = run_suite(cfg)
    if options["summary_json"]:
        write_document(
            options["summary_json"],
            {
                "seed": cfg.seed,
                "suites": cfg.suites,
                "passed": report.passed,
                "counts": {verdict.value: report.count(verdict) for verdict in Verdict},
            },
        )
    return code, lines


COMMANDS = {
    "comonad": cmd_comonad,
    "check-law": cmd_check_law,
    "equiv": cmd_equiv,
    "compose": cmd_compose,
    "full-check": cmd_full_check,
    "translate": cmd_translate,
    "spectra": cmd_spectra,
    "counterexample": cmd_counterexample,
    "suite": cmd_suite,
}


def _configure_logging():
    handlers = logging.getLogger().handlers
    if not handlers:
        return
    logging_format = "%(color)s[%(levelname)1.1s %(asctime)s %(module)s:%(lineno)d]%(end_color)s %(message)s"
    handlers[0].setFormatter(LogFormatter(fmt=logging_format, color=True))


def main(argv=None, out=None):
    """Entry point; options may appear before or after the positional arguments."""
    argv = list(sys.argv if argv is None else argv)
    out = out or sys.stdout
    options = make_options()
    flags = [arg for arg in argv[1:] if arg.startswith("--")]
    positionals = [arg for arg in argv[1:] if not arg.startswith("--")]
    try:
        options.parse_command_line([argv[0]] + flags)
    except OptionsError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_USAGE
    _configure_logging()
    if not positionals or positionals[0] not in COMMANDS:
        sys.stderr.write(f"usage: {argv[0]} {{{','.join(COMMANDS)}}} [options] ARGS\n")
        return EXIT_USAGE
    command, *args = positionals
    try:
        code, lines = COMMANDS[command](options, args)
    except (FVMError, OSError, ValueError) as e:
        log.error(str(e))
        return EXIT_USAGE
    for line in lines:
        out.write(line + "\n")
    return code
