"""Abstract syntax of differential dynamic logic: terms, formulas, hybrid
programs and models, plus a reference evaluator over float valuations.

All node classes are frozen dataclasses, so structural equality is plain
``==`` and nodes can be shared freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Union

from .errors import DivisionByZero, ModelError, UnboundVariable, UnsupportedConstruct

Valuation = Mapping[str, float]
Path = tuple  # tuple[int, ...] of child indices from the program root

# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Number:
    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v) or v < 0 or math.copysign(1.0, v) < 0:
            raise ValueError(f"number literals are finite and non-negative, got {self.value!r}")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # only "-" (negation)
    arg: "Term"

    def __post_init__(self):
        if self.op != "-":
            raise ValueError(f"unknown unary operator {self.op!r}")


BINARY_OPS = ("+", "-", "*", "/")


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Term"
    right: "Term"

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown binary operator {self.op!r}")


CALL_ARITY = {"abs": 1, "max": 2, "min": 2}


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if CALL_ARITY.get(self.fn) != len(self.args):
            raise ValueError(f"{self.fn} takes {CALL_ARITY.get(self.fn)} argument(s), got {len(self.args)}")


Term = Union[Number, Variable, Unary, Binary, Call]

# ------------------------------------------------------------- formulas

RELATIONS = ("<", "<=", "=", ">=", ">")


@dataclass(frozen=True)
class Compare:
    rel: str
    left: Term
    right: Term

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Equiv:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Box:
    program: "HybridProgram"
    post: "Formula"


@dataclass(frozen=True)
class Diamond:
    program: "HybridProgram"
    post: "Formula"


@dataclass(frozen=True)
class TrueFormula:
    pass


@dataclass(frozen=True)
class FalseFormula:
    pass


TRUE = TrueFormula()
FALSE = FalseFormula()

Formula = Union[Compare, Not, And, Or, Implies, Equiv, Forall, Exists, Box, Diamond,
                TrueFormula, FalseFormula]

# ------------------------------------------------------------- programs


@dataclass(frozen=True)
class Chop:
    first: "HybridProgram"
    second: "HybridProgram"


@dataclass(frozen=True)
class Choice:
    left: "HybridProgram"
    right: "HybridProgram"


@dataclass(frozen=True)
class Star:
    body: "HybridProgram"


@dataclass(frozen=True)
class Assign:
    var: str
    term: Term


@dataclass(frozen=True)
class AssignAny:
    var: str


@dataclass(frozen=True)
class ContinuousEvolution:
    equations: tuple  # of (var, rhs) pairs
    domain: Formula = TRUE

    def __post_init__(self):
        eqs = tuple((str(v), rhs) for v, rhs in self.equations)
        if not eqs:
            raise ValueError("a continuous evolution needs at least one equation")
        names = [v for v, _ in eqs]
        if len(set(names)) != len(names):
            raise ValueError(f"variable evolved twice in {names}")
        object.__setattr__(self, "equations", eqs)


@dataclass(frozen=True)
class Quest:
    cond: Formula


@dataclass(frozen=True)
class IfThenElse:
    cond: Formula
    then: "HybridProgram"
    orelse: Optional["HybridProgram"] = None


@dataclass(frozen=True)
class WhileSym:
    cond: Formula
    body: "HybridProgram"


@dataclass(frozen=True)
class Placeholder:
    label: str

    def __post_init__(self):
        if not self.label:
            raise ValueError("placeholder label must be non-empty")


HybridProgram = Union[Chop, Choice, Star, Assign, AssignAny, ContinuousEvolution, Quest,
                      IfThenElse, WhileSym, Placeholder]

TERM_TYPES = (Number, Variable, Unary, Binary, Call)
FORMULA_TYPES = (Compare, Not, And, Or, Implies, Equiv, Forall, Exists, Box, Diamond,
                 TrueFormula, FalseFormula)
PROGRAM_TYPES = (Chop, Choice, Star, Assign, AssignAny, ContinuousEvolution, Quest,
                 IfThenElse, WhileSym, Placeholder)


@dataclass(frozen=True)
class Model:
    name: str
    variables: tuple
    constants: tuple
    init: Formula
    program: HybridProgram
    safety: Formula
    loop_invariants: dict = field(default_factory=dict)  # Path -> Formula

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constants", tuple(self.constants))
        # a literal-true invariant says nothing, so it is not stored
        invs = {tuple(p): f for p, f in dict(self.loop_invariants).items()
                if not isinstance(f, TrueFormula)}
        stars = set(star_paths(self.program))
        for p in invs:
            if p not in stars:
                raise ValueError(f"loop invariant attached to {p}, which is not a Star")
        object.__setattr__(self, "loop_invariants", dict(sorted(invs.items())))

    @property
    def symbols(self) -> tuple:
        return self.variables + self.constants


# ---------------------------------------------------------- convenience


def seq(*items: HybridProgram) -> HybridProgram:
    """Left-nested sequential composition; ``seq(a, b, c)`` is ``(a; b); c``."""
    if not items:
        return Quest(TRUE)
    out = items[0]
    for item in items[1:]:
        out = Chop(out, item)
    return out


def choice(*items: HybridProgram) -> HybridProgram:
    """Right-nested nondeterministic choice."""
    if not items:
        raise ValueError("choice of zero programs")
    out = items[-1]
    for item in reversed(items[:-1]):
        out = Choice(item, out)
    return out


def conj(*parts: Formula) -> Formula:
    """Right-nested conjunction, the shape the parser produces for ``a & b & c``."""
    if not parts:
        return TRUE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def flatten_chop(p: HybridProgram) -> list:
    if isinstance(p, Chop):
        return flatten_chop(p.first) + flatten_chop(p.second)
    return [p]


def program_children(p: HybridProgram) -> list:
    """Child programs in path order (used for Star paths and diffs)."""
    if isinstance(p, Chop):
        return [p.first, p.second]
    if isinstance(p, Choice):
        return [p.left, p.right]
    if isinstance(p, Star):
        return [p.body]
    if isinstance(p, IfThenElse):
        return [p.then] if p.orelse is None else [p.then, p.orelse]
    if isinstance(p, WhileSym):
        return [p.body]
    return []


def walk_programs(p: HybridProgram, path: Path = ()) -> Iterator[tuple]:
    """Preorder (path, node) pairs over program nodes."""
    yield path, p
    for i, child in enumerate(program_children(p)):
        yield from walk_programs(child, path + (i,))


def star_paths(p: HybridProgram) -> list:
    return [path for path, node in walk_programs(p) if isinstance(node, Star)]


def node_at(p: HybridProgram, path: Path) -> HybridProgram:
    for i in path:
        p = program_children(p)[i]
    return p


# ---------------------------------------------------------- evaluation


def eval_term(t: Term, v: Valuation) -> float:
    if isinstance(t, Number):
        return t.value
    if isinstance(t, Variable):
        try:
            return float(v[t.name])
        except KeyError:
            raise UnboundVariable(t.name) from None
    if isinstance(t, Unary):
        return -eval_term(t.arg, v)
    if isinstance(t, Binary):
        a = eval_term(t.left, v)
        b = eval_term(t.right, v)
        if t.op == "+":
            return a + b
        if t.op == "-":
            return a - b
        if t.op == "*":
            return a * b
        if b == 0.0:
            raise DivisionByZero(t)
        return a / b
    if isinstance(t, Call):
        args = [eval_term(a, v) for a in t.args]
        if t.fn == "abs":
            return abs(args[0])
        if t.fn == "max":
            return max(args[0], args[1])
        return min(args[0], args[1])
    raise TypeError(f"not a term: {t!r}")


_REL = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


def eval_formula(f: Formula, v: Valuation) -> bool:
    """Two-valued evaluation of a quantifier- and modality-free formula."""
    if isinstance(f, Compare):
        return _REL[f.rel](eval_term(f.left, v), eval_term(f.right, v))
    if isinstance(f, TrueFormula):
        return True
    if isinstance(f, FalseFormula):
        return False
    if isinstance(f, Not):
        return not eval_formula(f.arg, v)
    if isinstance(f, And):
        return eval_formula(f.left, v) and eval_formula(f.right, v)
    if isinstance(f, Or):
        return eval_formula(f.left, v) or eval_formula(f.right, v)
    if isinstance(f, Implies):
        return (not eval_formula(f.left, v)) or eval_formula(f.right, v)
    if isinstance(f, Equiv):
        return eval_formula(f.left, v) == eval_formula(f.right, v)
    if isinstance(f, (Forall, Exists, Box, Diamond)):
        raise UnsupportedConstruct(type(f).__name__)
    raise TypeError(f"not a formula: {f!r}")


def is_first_order_qf(f: Formula) -> bool:
    """True when ``f`` contains no quantifier and no modality."""
    if isinstance(f, (Forall, Exists, Box, Diamond)):
        return False
    if isinstance(f, Not):
        return is_first_order_qf(f.arg)
    if isinstance(f, (And, Or, Implies, Equiv)):
        return is_first_order_qf(f.left) and is_first_order_qf(f.right)
    return True


# ------------------------------------------------------------ variables


def free_variables(node) -> frozenset:
    """Variables read or written by ``node``, minus quantifier-bound ones."""
    if isinstance(node, Number):
        return frozenset()
    if isinstance(node, Variable):
        return frozenset([node.name])
    if isinstance(node, Unary):
        return free_variables(node.arg)
    if isinstance(node, (Binary, Compare)):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Call):
        return frozenset().union(*(free_variables(a) for a in node.args))
    if isinstance(node, (TrueFormula, FalseFormula)):
        return frozenset()
    if isinstance(node, Not):
        return free_variables(node.arg)
    if isinstance(node, (And, Or, Implies, Equiv)):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, (Forall, Exists)):
        return free_variables(node.body) - {node.var}
    if isinstance(node, (Box, Diamond)):
        return free_variables(node.program) | free_variables(node.post)
    if isinstance(node, Chop):
        return free_variables(node.first) | free_variables(node.second)
    if isinstance(node, Choice):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, (Star, WhileSym)):
        extra = free_variables(node.cond) if isinstance(node, WhileSym) else frozenset()
        return free_variables(node.body) | extra
    if isinstance(node, Assign):
        return free_variables(node.term) | {node.var}
    if isinstance(node, AssignAny):
        return frozenset([node.var])
    if isinstance(node, ContinuousEvolution):
        out = set(free_variables(node.domain))
        for var, rhs in node.equations:
            out.add(var)
            out |= free_variables(rhs)
        return frozenset(out)
    if isinstance(node, Quest):
        return free_variables(node.cond)
    if isinstance(node, IfThenElse):
        out = free_variables(node.cond) | free_variables(node.then)
        return out | free_variables(node.orelse) if node.orelse is not None else out
    if isinstance(node, Placeholder):
        return frozenset()
    raise TypeError(f"not an AST node: {node!r}")


def written_variables(p: HybridProgram) -> frozenset:
    """Variables on the left of assignments or evolved by differential equations."""
    out = set()
    for _, node in walk_programs(p):
        if isinstance(node, (Assign, AssignAny)):
            out.add(node.var)
        elif isinstance(node, ContinuousEvolution):
            out.update(var for var, _ in node.equations)
    out |= _modal_writes(p)
    return frozenset(out)


def _modal_writes(p: HybridProgram) -> set:
    # programs nested in box/diamond formulas inside tests also write
    out = set()
    for _, node in walk_programs(p):
        conds = []
        if isinstance(node, (Quest, IfThenElse, WhileSym)):
            conds.append(node.cond)
        elif isinstance(node, ContinuousEvolution):
            conds.append(node.domain)
        for c in conds:
            for sub in _modal_programs(c):
                out |= written_variables(sub)
    return out


def _modal_programs(f: Formula) -> list:
    if isinstance(f, (Box, Diamond)):
        return [f.program] + _modal_programs(f.post)
    if isinstance(f, Not):
        return _modal_programs(f.arg)
    if isinstance(f, (And, Or, Implies, Equiv)):
        return _modal_programs(f.left) + _modal_programs(f.right)
    if isinstance(f, (Forall, Exists)):
        return _modal_programs(f.body)
    return []


def validate_model(m: Model) -> None:
    """Raise ModelError if constants are written or symbols are undeclared."""
    written = written_variables(m.program)
    for f in (m.init, m.safety, *m.loop_invariants.values()):
        for sub in _modal_programs(f):
            written |= written_variables(sub)
    bad = sorted(written & set(m.constants))
    if bad:
        raise ModelError(f"model {m.name}: constants written by the program: {', '.join(bad)}")
    used = free_variables(m.init) | free_variables(m.safety) | free_variables(m.program)
    for inv in m.loop_invariants.values():
        used |= free_variables(inv)
    undeclared = sorted(used - set(m.symbols))
    if undeclared:
        raise ModelError(f"model {m.name}: undeclared symbols: {', '.join(undeclared)}")
    dup = {s for s in m.symbols if m.symbols.count(s) > 1}
    if dup:
        raise ModelError(f"model {m.name}: symbols declared twice: {', '.join(sorted(dup))}")
