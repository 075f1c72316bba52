"""Canonical concrete syntax for terms, formulas, programs, models and graphs.

Output uses the minimal parenthesisation that re-parses to the same tree:
``+ - * /`` are left-associative, ``& | -> <->`` right-associative, ``;``
left-associative and ``++`` right-associative.
"""

from __future__ import annotations

import json

from .graph import ActivityGraph, Edge, Node
from .syntax import (
    And, Assign, AssignAny, Binary, Box, Call, Chop, Choice, Compare, ContinuousEvolution,
    Diamond, Equiv, Exists, FalseFormula, Forall, IfThenElse, Implies, Model, Not, Number,
    Or, Placeholder, Quest, Star, TrueFormula, Unary, Variable, WhileSym, star_paths,
)

_TERM_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_FORMULA_PREC = {Equiv: 1, Implies: 2, Or: 3, And: 4}
_FORMULA_OP = {Equiv: "<->", Implies: "->", Or: "|", And: "&"}


def format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _term(t, min_prec: int) -> str:
    if isinstance(t, Number):
        text, prec = format_number(t.value), 4
    elif isinstance(t, Variable):
        text, prec = t.name, 4
    elif isinstance(t, Call):
        text, prec = f"{t.fn}(" + ", ".join(_term(a, 1) for a in t.args) + ")", 4
    elif isinstance(t, Unary):
        text, prec = "-" + _term(t.arg, 3), 3
    elif isinstance(t, Binary):
        prec = _TERM_PREC[t.op]
        text = f"{_term(t.left, prec)} {t.op} {_term(t.right, prec + 1)}"
    else:
        raise TypeError(f"not a term: {t!r}")
    return f"({text})" if prec < min_prec else text


def _formula(f, min_prec: int) -> str:
    kind = type(f)
    if kind in _FORMULA_PREC:
        prec = _FORMULA_PREC[kind]
        text = f"{_formula(f.left, prec + 1)} {_FORMULA_OP[kind]} {_formula(f.right, prec)}"
    elif isinstance(f, Compare):
        text, prec = f"{_term(f.left, 1)} {f.rel} {_term(f.right, 1)}", 6
    elif isinstance(f, TrueFormula):
        text, prec = "true", 6
    elif isinstance(f, FalseFormula):
        text, prec = "false", 6
    elif isinstance(f, Not):
        # "!(a = b)" reads better than the equally valid "!a = b"
        text, prec = "!" + _formula(f.arg, 7 if isinstance(f.arg, Compare) else 5), 5
    elif isinstance(f, Forall):
        text, prec = f"forall {f.var} . {_formula(f.body, 5)}", 5
    elif isinstance(f, Exists):
        text, prec = f"exists {f.var} . {_formula(f.body, 5)}", 5
    elif isinstance(f, Box):
        text, prec = f"[{_program(f.program, 1)}] {_formula(f.post, 5)}", 5
    elif isinstance(f, Diamond):
        text, prec = f"<{_program(f.program, 1)}> {_formula(f.post, 5)}", 5
    else:
        raise TypeError(f"not a formula: {f!r}")
    return f"({text})" if prec < min_prec else text


# Program atoms that end in a closing token and can take a postfix star.
_CLOSED = (ContinuousEvolution, IfThenElse, WhileSym, Placeholder)


def _program(p, min_prec: int) -> str:
    if isinstance(p, Choice):
        text, prec = f"{_program(p.left, 2)} ++ {_program(p.right, 1)}", 1
    elif isinstance(p, Chop):
        text, prec = f"{_program(p.first, 2)}; {_program(p.second, 3)}", 2
    elif isinstance(p, Star):
        body = _program(p.body, 4)
        if not isinstance(p.body, _CLOSED) and not body.startswith("("):
            body = f"({body})"
        text, prec = body + "*", 3
    elif isinstance(p, Assign):
        text, prec = f"{p.var} := {_term(p.term, 1)}", 4
    elif isinstance(p, AssignAny):
        text, prec = f"{p.var} := *", 4
    elif isinstance(p, Quest):
        text, prec = "?" + _formula(p.cond, 1), 4
    elif isinstance(p, ContinuousEvolution):
        eqs = ", ".join(f"{v}' = {_term(rhs, 1)}" for v, rhs in p.equations)
        if not isinstance(p.domain, TrueFormula):
            eqs += " & " + _formula(p.domain, 1)
        text, prec = "{" + eqs + "}", 4
    elif isinstance(p, IfThenElse):
        text = f"if ({_formula(p.cond, 1)}) {_program(p.then, 1)}"
        if p.orelse is not None:
            text += f" else {_program(p.orelse, 1)}"
        text, prec = text + " fi", 4
    elif isinstance(p, WhileSym):
        text, prec = f"while ({_formula(p.cond, 1)}) {_program(p.body, 1)} end", 4
    elif isinstance(p, Placeholder):
        text, prec = f"placeholder({json.dumps(p.label)})", 4
    else:
        raise TypeError(f"not a hybrid program: {p!r}")
    if prec < min_prec:
        return f"({text})"
    return text


def _model(m: Model) -> str:
    lines = [f"model {m.name}"]
    if m.variables:
        lines.append("vars " + ", ".join(m.variables))
    if m.constants:
        lines.append("consts " + ", ".join(m.constants))
    lines.append("init " + _formula(m.init, 1))
    lines.append("prog " + _program(m.program, 1))
    lines.append("safe " + _formula(m.safety, 1))
    stars = star_paths(m.program)
    annotated = [i for i, path in enumerate(stars) if path in m.loop_invariants]
    if annotated:
        # invariants bind to stars by preorder position, so gaps print as true
        for path in stars[: annotated[-1] + 1]:
            inv = m.loop_invariants.get(path)
            lines.append("invariant " + ("true" if inv is None else _formula(inv, 1)))
    return "\n".join(lines) + "\n"


def _node(n: Node) -> str:
    if n.kind != "action":
        return f"node {n.id} {n.kind}"
    if n.stereotype == "Placeholder":
        return f"node {n.id} action Placeholder {json.dumps(n.label)}"
    text = f"node {n.id} action {n.stereotype} {{ {_program(n.body, 1)} }}"
    if n.diff_invariant is not None:
        text += " diffinv " + _formula(n.diff_invariant, 1)
    return text


def _edge(e: Edge) -> str:
    text = f"edge {e.source} -> {e.target}"
    if e.guard is not None:
        text += f" [{_formula(e.guard, 1)}]"
    if e.repeat:
        text += " repeat"
        if e.invariant is not None:
            text += " invariant " + _formula(e.invariant, 1)
    return text


def _graph(g: ActivityGraph) -> str:
    lines = [f"graph {g.name}"]
    if g.variables:
        lines.append("vars " + ", ".join(g.variables))
    if g.constants:
        lines.append("consts " + ", ".join(g.constants))
    lines.append("init " + _formula(g.init, 1))
    lines.append("safe " + _formula(g.safety, 1))
    lines.extend(_node(n) for n in g.nodes)
    lines.extend(_edge(e) for e in g.edges)
    return "\n".join(lines) + "\n"


def pretty_print(node) -> str:
    """Render any AST node, model or activity graph as canonical text."""
    if isinstance(node, Model):
        return _model(node)
    if isinstance(node, ActivityGraph):
        return _graph(node)
    if isinstance(node, (Number, Variable, Unary, Binary, Call)):
        return _term(node, 1)
    if isinstance(node, (Compare, Not, And, Or, Implies, Equiv, Forall, Exists, Box, Diamond,
                         TrueFormula, FalseFormula)):
        return _formula(node, 1)
    if isinstance(node, Node):
        return _node(node)
    if isinstance(node, Edge):
        return _edge(node)
    return _program(node, 1)
