"""Translate terms and formulas into Python source for fast repeated evaluation.

Generated functions take the valuation as positional arguments in a fixed
column order. Arithmetic is emitted operator-for-operator, so results are
bitwise identical to :func:`hpk.syntax.eval_term`.
"""

from __future__ import annotations

from functools import lru_cache

from .errors import DivisionByZero, UnboundVariable, UnsupportedConstruct
from .syntax import (
    And, Binary, Call, Compare, Equiv, FalseFormula, Implies, Not, Number, Or, TrueFormula,
    Unary, Variable,
)


def _div(a, b):
    if b == 0.0:
        raise DivisionByZero()
    return a / b


_GLOBALS = {"_div": _div, "abs": abs, "max": max, "min": min, "__builtins__": {}}
_PY_REL = {"<": "<", "<=": "<=", "=": "==", ">=": ">=", ">": ">"}


def term_source(t, names: dict) -> str:
    if isinstance(t, Number):
        return repr(t.value)
    if isinstance(t, Variable):
        try:
            return names[t.name]
        except KeyError:
            raise UnboundVariable(t.name) from None
    if isinstance(t, Unary):
        return f"(-{term_source(t.arg, names)})"
    if isinstance(t, Binary):
        a, b = term_source(t.left, names), term_source(t.right, names)
        if t.op == "/":
            return f"_div({a}, {b})"
        return f"({a} {t.op} {b})"
    if isinstance(t, Call):
        return f"{t.fn}(" + ", ".join(term_source(a, names) for a in t.args) + ")"
    raise TypeError(f"not a term: {t!r}")


def formula_source(f, names: dict) -> str:
    if isinstance(f, Compare):
        return f"({term_source(f.left, names)} {_PY_REL[f.rel]} {term_source(f.right, names)})"
    if isinstance(f, TrueFormula):
        return "True"
    if isinstance(f, FalseFormula):
        return "False"
    if isinstance(f, Not):
        return f"(not {formula_source(f.arg, names)})"
    if isinstance(f, And):
        return f"({formula_source(f.left, names)} and {formula_source(f.right, names)})"
    if isinstance(f, Or):
        return f"({formula_source(f.left, names)} or {formula_source(f.right, names)})"
    if isinstance(f, Implies):
        return f"((not {formula_source(f.left, names)}) or {formula_source(f.right, names)})"
    if isinstance(f, Equiv):
        return f"({formula_source(f.left, names)} == {formula_source(f.right, names)})"
    raise UnsupportedConstruct(type(f).__name__)


def _build(name: str, args: list, body: list):
    src = f"def {name}({', '.join(args)}):\n" + "".join(f"    {line}\n" for line in body)
    namespace = {}
    exec(compile(src, f"<hpk:{name}>", "exec"), dict(_GLOBALS), namespace)
    return namespace[name]


def _arg_names(columns) -> tuple:
    return {c: f"v{i}" for i, c in enumerate(columns)}, [f"v{i}" for i in range(len(columns))]


@lru_cache(maxsize=512)
def compile_term(t, columns: tuple):
    names, args = _arg_names(columns)
    return _build("term", args, [f"return {term_source(t, names)}"])


@lru_cache(maxsize=512)
def compile_formula(f, columns: tuple):
    names, args = _arg_names(columns)
    return _build("formula", args, [f"return {formula_source(f, names)}"])


@lru_cache(maxsize=256)
def compile_domain(domain, columns: tuple, evolved: tuple):
    """Domain test that also rejects NaN in any evolved variable."""
    names, args = _arg_names(columns)
    nan_free = " and ".join(f"{names[v]} == {names[v]}" for v in evolved) or "True"
    return _build("domain", args, [f"return {nan_free} and {formula_source(domain, names)}"])


@lru_cache(maxsize=256)
def compile_rk4(equations: tuple, columns: tuple):
    """One classical Runge-Kutta step ``step(h, *values) -> values``."""
    names, args = _arg_names(columns)
    evolved = {v: names[v] for v, _ in equations}
    body = []
    stage_names = names
    for stage in range(1, 5):
        for v, rhs in equations:
            body.append(f"k{stage}_{evolved[v]} = {term_source(rhs, stage_names)}")
        if stage == 4:
            break
        frac = "h" if stage == 3 else "0.5 * h"
        stage_names = dict(names)
        for v, _ in equations:
            arg = evolved[v]
            body.append(f"s{stage}_{arg} = {arg} + {frac} * k{stage}_{arg}")
            stage_names[v] = f"s{stage}_{arg}"
    out = []
    for c in columns:
        arg = names[c]
        if c in evolved:
            out.append(f"{arg} + h / 6.0 * (k1_{arg} + 2.0 * k2_{arg} + 2.0 * k3_{arg} + k4_{arg})")
        else:
            out.append(arg)
    body.append("return (" + ", ".join(out) + ",)")
    return _build("rk4_step", ["h"] + args, body)
