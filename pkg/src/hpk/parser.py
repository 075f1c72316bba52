"""Recursive-descent parser for ``.hpk`` models and ``.hpg`` activity graphs.

Errors report the furthest position any alternative reached, together with
the set of tokens that would have been accepted there.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .errors import (
    ConstantWritten, DanglingEdge, DuplicateNodeId, ParseError, SourceSpan, UndeclaredVariable,
)
from .graph import ActivityGraph, Edge, Node
from .syntax import (
    CALL_ARITY, FALSE, TRUE, And, Assign, AssignAny, Binary, Box, Call, Chop, Choice, Compare,
    ContinuousEvolution, Diamond, Equiv, Exists, Forall, IfThenElse, Implies, Model, Not, Number,
    Or, Placeholder, Quest, Star, Unary, Variable, WhileSym, flatten_chop, free_variables,
    star_paths, written_variables,
)

KEYWORDS = frozenset("""
    true false forall exists if else fi while end placeholder
    model vars consts init prog safe invariant
    graph node edge action repeat diffinv initial final decision merge
""".split())

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<op><->|->|<=|>=|:=|\+\+|[-+*/<>=!&|;?()\[\]{},.'])
""", re.VERBOSE)

_RELATIONS = ("<", "<=", "=", ">=", ">")
_TERM_START = ("num", "ident")


@dataclass(frozen=True)
class Token:
    kind: str  # num | ident | str | op | eof
    text: str
    line: int
    column: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column, len(self.text))


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = SourceSpan(line, pos - line_start + 1, 1)
            if text[pos] == '"':
                raise ParseError("unterminated string literal", span)
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        newlines = m.group().count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + m.group().rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Fail(Exception):
    """Internal backtracking signal; converted to ParseError at the top."""


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == "eof" else repr(tok.text)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.far = -1
        self.expected = set()
        self.memo = {}

    # ---------------------------------------------------------- helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, offset: int = 1) -> Token:
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def fail(self, *expected):
        if self.i > self.far:
            self.far, self.expected = self.i, set()
        if self.i == self.far:
            self.expected.update(expected)
        raise _Fail()

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        if self.i >= self.far:
            # remember it as an alternative at this position
            if self.i > self.far:
                self.far, self.expected = self.i, set()
            self.expected.add(repr(text))
        return False

    def expect(self, text: str) -> Token:
        t = self.tok
        if not self.accept(text):
            self.fail(repr(text))
        return t

    def ident(self) -> str:
        t = self.tok
        if t.kind == "ident" and t.text not in KEYWORDS:
            self.i += 1
            return t.text
        self.fail("identifier")

    def error(self) -> ParseError:
        tok = self.toks[max(self.far, 0)]
        return ParseError(f"unexpected {_describe(tok)}", tok.span, self.expected)

    def memoized(self, rule: str, fn):
        key = (rule, self.i)
        if key in self.memo:
            result, end = self.memo[key]
            if end is None:
                raise _Fail()
            self.i = end
            return result
        start = self.i
        try:
            result = fn()
        except _Fail:
            self.memo[key] = (None, None)
            self.i = start
            raise
        self.memo[key] = (result, self.i)
        return result

    # ------------------------------------------------------------ terms

    def term(self):
        return self.memoized("term", self._additive)

    def _additive(self):
        left = self._multiplicative()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            left = Binary(op, left, self._multiplicative())
        return left

    def _multiplicative(self):
        left = self._unary()
        while self.at("*") or self.at("/"):
            nxt = self.peek()
            # "x := y*" leaves the star to the program level
            if self.at("*") and not (nxt.kind in _TERM_START or nxt.text in ("(", "-")):
                break
            op = self.tok.text
            self.i += 1
            left = Binary(op, left, self._unary())
        return left

    def _unary(self):
        if self.accept("-"):
            return Unary("-", self._unary())
        return self._primary()

    def _primary(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Number(float(t.text))
        if self.accept("("):
            inner = self.term()
            self.expect(")")
            return inner
        if t.kind == "ident" and t.text in CALL_ARITY and self.peek().text == "(":
            self.i += 2
            args = [self.term()]
            while self.accept(","):
                args.append(self.term())
            self.expect(")")
            if len(args) != CALL_ARITY[t.text]:
                raise ParseError(f"{t.text} takes {CALL_ARITY[t.text]} argument(s)", t.span)
            return Call(t.text, tuple(args))
        if t.kind != "ident":
            self.fail("number", "identifier", "'('", "'-'")
        return Variable(self.ident())

    # --------------------------------------------------------- formulas

    def formula(self):
        return self.memoized("formula", self._equiv)

    def _equiv(self):
        left = self._implies()
        if self.accept("<->"):
            return Equiv(left, self._equiv())
        return left

    def _implies(self):
        left = self._or()
        if self.accept("->"):
            return Implies(left, self._implies())
        return left

    def _or(self):
        left = self._and()
        if self.accept("|"):
            return Or(left, self._or())
        return left

    def _and(self):
        left = self._prefix()
        if self.accept("&"):
            return And(left, self._and())
        return left

    def _prefix(self):
        if self.accept("!"):
            return Not(self._prefix())
        for word, cls in (("forall", Forall), ("exists", Exists)):
            if self.accept(word):
                var = self.ident()
                self.expect(".")
                return cls(var, self._prefix())
        if self.accept("["):
            prog = self.program()
            self.expect("]")
            return Box(prog, self._prefix())
        if self.accept("<"):
            prog = self.program()
            self.expect(">")
            return Diamond(prog, self._prefix())
        return self._atom()

    def _atom(self):
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        if self.at("("):
            start = self.i
            try:
                self.i += 1
                inner = self.formula()
                self.expect(")")
                return inner
            except _Fail:
                self.i = start  # maybe a parenthesised term instead
        left = self.term()
        t = self.tok
        if t.kind == "op" and t.text in _RELATIONS:
            self.i += 1
            return Compare(t.text, left, self.term())
        self.fail(*(repr(r) for r in _RELATIONS))

    # --------------------------------------------------------- programs

    def program(self):
        return self.memoized("program", self._choice)

    def _choice(self):
        left = self._seq()
        if self.accept("++"):
            return Choice(left, self._choice())
        return left

    def _seq(self):
        out = self._postfix()
        while self.accept(";"):
            out = Chop(out, self._postfix())
        return out

    def _postfix(self):
        out = self._patom()
        while self.accept("*"):
            out = Star(out)
        return out

    def _patom(self):
        t = self.tok
        if self.accept("?"):
            return Quest(self.formula())
        if self.accept("{"):
            return self._ode()
        if self.accept("if"):
            self.expect("(")
            cond = self.formula()
            self.expect(")")
            then = self.program()
            orelse = self.program() if self.accept("else") else None
            self.expect("fi")
            return IfThenElse(cond, then, orelse)
        if self.accept("while"):
            self.expect("(")
            cond = self.formula()
            self.expect(")")
            body = self.program()
            self.expect("end")
            return WhileSym(cond, body)
        if self.accept("placeholder"):
            self.expect("(")
            label = self.string()
            self.expect(")")
            if not label:
                raise ParseError("placeholder label must be non-empty", t.span)
            return Placeholder(label)
        if self.accept("("):
            inner = self.program()
            self.expect(")")
            return inner
        if t.kind == "ident" and t.text not in KEYWORDS:
            var = self.ident()
            self.expect(":=")
            if self.accept("*"):
                return AssignAny(var)
            return Assign(var, self.term())
        self.fail("identifier", "'?'", "'{'", "'('", "'if'", "'while'", "'placeholder'")

    def _ode(self):
        eqs = []
        seen = set()
        while True:
            t = self.tok
            var = self.ident()
            self.expect("'")
            self.expect("=")
            if var in seen:
                raise ParseError(f"variable {var!r} evolved twice", t.span)
            seen.add(var)
            eqs.append((var, self.term()))
            if not self.accept(","):
                break
        domain = self.formula() if self.accept("&") else TRUE
        self.expect("}")
        return ContinuousEvolution(tuple(eqs), domain)

    def string(self) -> str:
        t = self.tok
        if t.kind != "str":
            self.fail("string")
        self.i += 1
        return json.loads(t.text)

    def ident_list(self) -> list:
        names = [self.ident()]
        while self.accept(","):
            names.append(self.ident())
        return names

    def eof(self):
        if self.tok.kind != "eof":
            self.fail("end of input")

    def run(self, fn):
        try:
            return fn()
        except _Fail:
            raise self.error() from None


# ----------------------------------------------------------- declarations


def _first_use(toks, name, written=False):
    """Index of the first token naming ``name`` (as an assignment target if ``written``)."""
    for k, t in enumerate(toks):
        if t.kind == "ident" and t.text == name:
            if not written or toks[k + 1].text in (":=", "'"):
                return k
    return len(toks) - 1


def _check_declarations(toks, symbols, constants, header_end, reads, writes):
    seen = set()
    for k, t in enumerate(toks[:header_end]):
        if t.kind == "ident" and k >= 2 and t.text in symbols:
            if t.text in seen:
                raise ParseError(f"symbol {t.text!r} declared twice", t.span)
            seen.add(t.text)
    body = toks[header_end:]
    undeclared = reads - seen
    if undeclared:
        k = min(_first_use(body, n) for n in undeclared)
        raise UndeclaredVariable(body[k].text, body[k].span)
    bad = writes & set(constants)
    if bad:
        k = min(_first_use(body, n, written=True) for n in bad)
        raise ConstantWritten(body[k].text, body[k].span)


def _header(p: _Parser, keyword: str):
    p.expect(keyword)
    name = p.ident()
    variables = p.ident_list() if p.accept("vars") else []
    constants = p.ident_list() if p.accept("consts") else []
    return name, variables, constants


def _writes(program, *formulas) -> frozenset:
    """Variables written by ``program`` or by programs inside modal ``formulas``."""
    parts = ([program] if program is not None else []) + [Quest(f) for f in formulas]
    return frozenset().union(*(written_variables(q) for q in parts))


def parse_model(text: str) -> Model:
    """Parse ``.hpk`` text into a :class:`Model`."""
    p = _Parser(text)

    def body():
        name, variables, constants = _header(p, "model")
        header_end = p.i
        p.expect("init")
        init = p.formula()
        p.expect("prog")
        prog = p.program()
        p.expect("safe")
        safe = p.formula()
        invs = []
        while True:
            t = p.tok
            if not p.accept("invariant"):
                break
            invs.append((t, p.formula()))
        p.eof()
        return name, variables, constants, header_end, init, prog, safe, invs

    name, variables, constants, header_end, init, prog, safe, invs = p.run(body)
    stars = star_paths(prog)
    if len(invs) > len(stars):
        raise ParseError(f"{len(invs)} invariants but only {len(stars)} loops",
                         invs[len(stars)][0].span)
    loop_invariants = {path: f for path, (_, f) in zip(stars, invs)}
    reads = free_variables(init) | free_variables(prog) | free_variables(safe)
    for f in loop_invariants.values():
        reads |= free_variables(f)
    writes = _writes(prog, init, safe, *loop_invariants.values())
    _check_declarations(p.toks, variables + constants, constants, header_end, reads, writes)
    return Model(name, variables, constants, init, prog, safe, loop_invariants)


_STEREOTYPE_SHAPES = {
    "AssignAny": "a single nondeterministic assignment",
    "AssignTerm": "a single assignment",
    "Dynamics": "assignments followed by one continuous evolution",
}


def _body_ok(stereotype: str, body) -> bool:
    if stereotype == "AssignAny":
        return isinstance(body, AssignAny)
    if stereotype == "AssignTerm":
        return isinstance(body, Assign)
    parts = flatten_chop(body)
    return (isinstance(parts[-1], ContinuousEvolution)
            and all(isinstance(x, Assign) for x in parts[:-1]))


def parse_activity_graph(text: str) -> ActivityGraph:
    """Parse ``.hpg`` text into an :class:`ActivityGraph`."""
    p = _Parser(text)
    node_toks, edge_toks = {}, []

    def node():
        id_tok = p.tok
        node_id = p.ident()
        if node_id in node_toks:
            raise DuplicateNodeId(node_id, id_tok.span)
        node_toks[node_id] = id_tok
        for kind in ("initial", "final", "decision", "merge"):
            if p.accept(kind):
                return Node(node_id, kind)
        p.expect("action")
        st_tok = p.tok
        if p.accept("Placeholder"):
            label = p.string()
            if not label:
                raise ParseError("placeholder label must be non-empty", st_tok.span)
            return Node(node_id, "action", "Placeholder", label=label)
        for stereo in ("AssignAny", "AssignTerm", "Dynamics"):
            if p.accept(stereo):
                break
        else:
            p.fail("'AssignAny'", "'AssignTerm'", "'Dynamics'", "'Placeholder'")
        p.expect("{")
        body = p.program()
        p.expect("}")
        if not _body_ok(stereo, body):
            raise ParseError(f"{stereo} action body must be {_STEREOTYPE_SHAPES[stereo]}",
                             st_tok.span)
        diffinv = None
        if stereo == "Dynamics" and p.accept("diffinv"):
            diffinv = p.formula()
        return Node(node_id, "action", stereo, body, diffinv)

    def edge():
        start = p.tok
        source = p.ident()
        p.expect("->")
        target_tok = p.tok
        target = p.ident()
        guard = None
        if p.accept("["):
            guard = p.formula()
            p.expect("]")
        repeat = p.accept("repeat")
        invariant = None
        if repeat and p.accept("invariant"):
            invariant = p.formula()
        edge_toks.append((start, target_tok))
        return Edge(source, target, guard, repeat, invariant)

    def body():
        name, variables, constants = _header(p, "graph")
        header_end = p.i
        p.expect("init")
        init = p.formula()
        p.expect("safe")
        safe = p.formula()
        nodes, edges = [], []
        while True:
            if p.accept("node"):
                nodes.append(node())
            elif p.accept("edge"):
                edges.append(edge())
            else:
                break
        p.eof()
        return name, variables, constants, header_end, init, safe, nodes, edges

    name, variables, constants, header_end, init, safe, nodes, edges = p.run(body)
    for k, (e, (src_tok, dst_tok)) in enumerate(zip(edges, edge_toks)):
        for endpoint, tok in ((e.source, src_tok), (e.target, dst_tok)):
            if endpoint not in node_toks:
                raise DanglingEdge(f"e{k + 1}", endpoint, tok.span)
    reads = free_variables(init) | free_variables(safe)
    writes = set(_writes(None, init, safe))
    for n in nodes:
        if n.body is not None:
            reads |= free_variables(n.body)
            writes |= written_variables(n.body)
        if n.diff_invariant is not None:
            reads |= free_variables(n.diff_invariant)
    for e in edges:
        for f in (e.guard, e.invariant):
            if f is not None:
                reads |= free_variables(f)
                writes |= _writes(None, f)
    _check_declarations(p.toks, variables + constants, constants, header_end, reads, writes)
    return ActivityGraph(name, variables, constants, init, safe, nodes, edges)


def _fragment(text: str, rule: str):
    p = _Parser(text)

    def body():
        out = getattr(p, rule)()
        p.eof()
        return out

    return p.run(body)


def parse_term(text: str):
    return _fragment(text, "term")


def parse_formula(text: str):
    return _fragment(text, "formula")


def parse_program(text: str):
    return _fragment(text, "program")
