"""Exception hierarchy shared by all hpk modules."""

from __future__ import annotations

from dataclasses import dataclass


class HpkError(Exception):
    """Base class for every error raised by the toolkit."""


class UnboundVariable(HpkError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable {name!r}")
        self.name = name


class DivisionByZero(HpkError, ZeroDivisionError):
    def __init__(self, term=None):
        super().__init__("division by zero")
        self.term = term


class UnsupportedConstruct(HpkError):
    def __init__(self, construct: str):
        super().__init__(f"unsupported construct: {construct}")
        self.construct = construct


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 0

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError(f"invalid span {self.line}:{self.column}")

    def __str__(self):
        return f"{self.line}:{self.column}"


class ParseError(HpkError):
    """Raised for malformed input text; always carries a span."""

    def __init__(self, message: str, span: SourceSpan, expected=()):
        self.message = message
        self.span = span
        self.expected = frozenset(expected)
        detail = message
        if self.expected:
            detail += " (expected " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(f"{span}: {detail}")


class UndeclaredVariable(ParseError):
    def __init__(self, name: str, span: SourceSpan):
        super().__init__(f"undeclared variable {name!r}", span)
        self.name = name


class ConstantWritten(ParseError):
    def __init__(self, name: str, span: SourceSpan):
        super().__init__(f"constant {name!r} is written by the program", span)
        self.name = name


class DanglingEdge(ParseError):
    def __init__(self, edge_id: str, endpoint: str, span: SourceSpan):
        super().__init__(f"edge {edge_id} refers to unknown node {endpoint!r}", span)
        self.edge_id = edge_id
        self.endpoint = endpoint


class DuplicateNodeId(ParseError):
    def __init__(self, node_id: str, span: SourceSpan):
        super().__init__(f"duplicate node id {node_id!r}", span)
        self.node_id = node_id


class ModelError(HpkError):
    """A constructed model violates a declaration rule."""


class NotWellStructured(HpkError):
    def __init__(self, report):
        reasons = "; ".join(f"{where}: {why}" for where, why in report.violations)
        super().__init__(f"activity graph is not well-structured: {reasons}")
        self.report = report


class PlaceholderExecuted(HpkError):
    def __init__(self, label: str, trace=None):
        super().__init__(f"placeholder {label!r} has no executable meaning")
        self.label = label
        self.trace = trace


class InitUnsatisfiableAfterRetries(HpkError):
    def __init__(self, retries: int):
        super().__init__(f"no initial state satisfying init found after {retries} samples")
        self.retries = retries


class QuantifierInProgram(HpkError):
    def __init__(self, where: str):
        super().__init__(f"quantifier or modality in executable position: {where}")


class ContinuousPresent(HpkError):
    def __init__(self):
        super().__init__("discrete enumeration does not support continuous evolution")


class KindMismatch(HpkError):
    def __init__(self, left: str, right: str):
        def article(kind):
            return ("an " if kind[0] in "aeiou" else "a ") + kind
        super().__init__(f"cannot compare {article(left)} with {article(right)}")
        self.left, self.right = left, right


class UnknownName(HpkError, KeyError):
    def __init__(self, name: str):
        super().__init__(f"unknown corpus entry {name!r}")
        self.name = name

    def __str__(self):
        return self.args[0]


class ReplayExhausted(HpkError):
    """A replay log ran out of recorded decisions or did not match the program."""
