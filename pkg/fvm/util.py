"""Shared helpers: element identifiers, errors, verification reports and the worker pool."""

import hashlib
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from enum import Enum

import simplejson as json

log = logging.getLogger(__name__)

#########################
#  Element identifiers  #
#########################

# Composite elements (tagged pairs, tuples, words, paths, walk points) are
# stored as compact JSON strings so that every structure keeps a single
# representation: a sorted tuple of strings.


def encode(value):
    """Encode a nested list of strings and ints as a canonical element id."""
    return json.dumps(value, separators=(",", ":"), ensure_ascii=False)


def decode(element):
    return json.loads(element)


def encode_tagged(tag, element):
    return encode([tag, element])


def decode_tagged(element):
    tag, inner = decode(element)
    return tag, inner


# Fresh point used by merge, vee and the glued point of pointed coproducts.
# Tag 0 never occurs for components, which are numbered from 1.
STAR = encode_tagged(0, "*")


def structure_id(structure):
    """Short stable identifier used in report lines."""
    digest = hashlib.sha1(structure.to_json().encode("utf-8")).hexdigest()
    return f"n{len(structure)}-{digest[:8]}"


#########################
#        Errors         #
#########################


class FVMError(Exception):
    """Base class of every error raised by the fvm package."""


class SignatureMismatchError(FVMError):
    pass


class MalformedMapError(FVMError):
    pass


class NotAHomomorphismError(FVMError):
    pass


class StructureFormatError(FVMError):
    """Raised when a structure document cannot be parsed.

    The message always names the position (line/column or key path) of the problem.
    """


class EndpointMismatchError(FVMError):
    pass


class EmptyFamilyError(FVMError):
    pass


class NotAGraphError(FVMError):
    """The structure is not a loopless undirected graph over {E/2}."""


class InvalidWitnessError(FVMError):
    pass


class IntegrityError(FVMError):
    """A constructed witness failed its own verification.

    This only happens when one of the Kleisli laws or liftings is broken.
    """


class TruncationError(FVMError):
    pass


class UnsupportedComonadError(FVMError):
    pass


class BudgetExceeded(FVMError):
    pass


#########################
#  Verification reports #
#########################


class Verdict(Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INDETERMINATE = "INDETERMINATE"
    SKIP = "SKIP"


class SearchBudget:
    """Counts search nodes and raises BudgetExceeded once the limit is reached."""

    def __init__(self, limit=None):
        self.limit = limit
        self.spent = 0

    def tick(self, amount=1):
        self.spent += amount
        if self.limit is not None and self.spent > self.limit:
            raise BudgetExceeded(f"Search budget of {self.limit} nodes exceeded")


def validation_message(source, error):
    """First problem of a pydantic ValidationError, prefixed by its key path."""
    first = error.errors()[0]
    path = ".".join(str(part) for part in first["loc"]) or "document"
    return f"{source}: {path}: {first['msg']}"


def first_mismatch(elements, left, right):
    """First element on which two element functions disagree, as a report detail.

    A side that cannot be evaluated (an element outside the domain of a map)
    counts as a disagreement.
    """
    for w in elements:
        try:
            lhs, rhs = left(w), right(w)
        except (KeyError, IndexError, TypeError, ValueError, FVMError) as e:
            return f"at {w}: {type(e).__name__} {e}"
        if lhs != rhs:
            return f"at {w}: {lhs} != {rhs}"
    return None


class CheckReport:
    """Collects the outcome of a batch of checks.

    Every check contributes one line of the form
    ``<KIND> <name> <subject> PASS|FAIL|INDETERMINATE|SKIP <detail>``.
    Failures are also grouped in ``validation_msgs`` by subject and check name.
    """

    def __init__(self, kind="LAW"):
        self.kind = kind
        self.check_lines = []
        self.validation_msgs = {}
        self.validation_result = True
        self.modes = {}

    def _add_validation_msg(self, subject, error_type, msg):
        if subject not in self.validation_msgs:
            self.validation_msgs[subject] = dict()
        if error_type not in self.validation_msgs[subject]:
            self.validation_msgs[subject][error_type] = []

        self.validation_msgs[subject][error_type].append(msg)

    def add_check(self, name, subject, verdict, detail=""):
        if not isinstance(verdict, Verdict):
            verdict = Verdict.PASS if verdict else Verdict.FAIL
        self.check_lines.append((self.kind, name, subject, verdict, detail))
        if verdict is Verdict.FAIL:
            self.validation_result = False
            self._add_validation_msg(subject, name, detail)
            log.debug(f"{self.kind} {name} failed on {subject}: {detail}")

    def record_mode(self, name, mode):
        """Remember whether a quantifier was checked exhaustively or by sampling."""
        self.modes[name] = mode

    def extend(self, other):
        for kind, name, subject, verdict, detail in other.check_lines:
            self.check_lines.append((kind, name, subject, verdict, detail))
        for subject, msgs in other.validation_msgs.items():
            for error_type, errors in msgs.items():
                for msg in errors:
                    self._add_validation_msg(subject, error_type, msg)
        self.modes.update(other.modes)
        self.validation_result = self.validation_result and other.validation_result
        return self

    @property
    def passed(self):
        return self.validation_result

    def count(self, verdict):
        return sum(1 for line in self.check_lines if line[3] is verdict)

    def failures(self):
        return [line for line in self.check_lines if line[3] is Verdict.FAIL]

    def lines(self):
        out = []
        for kind, name, subject, verdict, detail in self.check_lines:
            line = f"{kind} {name} {subject} {verdict.value}"
            if detail:
                line += f" {detail}"
            out.append(line)
        for name, mode in sorted(self.modes.items()):
            out.append(f"MODE {name} {mode}")
        return out

    def __str__(self):
        return "\n".join(self.lines())


#########################
#      Worker pool      #
#########################


def worker_count():
    """Number of worker threads, capped by the FVM_THREADS environment variable."""
    default = os.cpu_count() or 1
    try:
        return max(1, int(os.environ.get("FVM_THREADS", default)))
    except ValueError:
        log.warning(
            f"Ignoring FVM_THREADS={os.environ['FVM_THREADS']!r}, not an integer"
        )
        return default


def ordered_map(func, items):
    """Map ``func`` over ``items`` with the worker pool, keeping input order."""
    items = list(items)
    workers = worker_count()
    if workers == 1 or len(items) < 2:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
