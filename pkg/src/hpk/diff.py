"""Positional structural diff of models and activity graphs.

Both inputs are lowered to generic trees of ``(kind, attrs, children)``.
Nodes at the same path with the same kind are aligned; differing attributes
give one ``Modify``, a kind change gives ``Remove`` plus ``Add`` of the whole
subtrees, and surplus children give ``Add`` or ``Remove``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import KindMismatch
from .graph import ActivityGraph
from .printer import pretty_print
from .syntax import (
    FORMULA_TYPES, PROGRAM_TYPES, TERM_TYPES, Chop, Choice, IfThenElse, Model, Star, WhileSym,
    star_paths,
)


@dataclass(frozen=True)
class DiffEntry:
    kind: str  # Add | Remove | Modify
    path: tuple  # of (child index, element kind)
    element_kind: str
    before: Optional[str] = None
    after: Optional[str] = None

    def __post_init__(self):
        ok = {
            "Add": self.before is None and self.after is not None,
            "Remove": self.before is not None and self.after is None,
            "Modify": self.before is not None and self.after is not None,
        }
        if not ok.get(self.kind, False):
            raise ValueError(f"malformed {self.kind} entry")

    @property
    def path_text(self) -> str:
        return "/".join(f"{i}:{k}" for i, k in self.path) or "/"


@dataclass(frozen=True)
class _Tree:
    kind: str
    attrs: tuple
    children: tuple
    fragment: str  # printed form of the attributes, used by Modify
    whole: str  # printed form of the subtree, used by Add/Remove


def _leaf(kind, text):
    return _Tree(kind, (text,), (), text, text)


def _program_tree(p) -> _Tree:
    text = pretty_print(p)
    if isinstance(p, Chop):
        return _Tree("Chop", (), (_program_tree(p.first), _program_tree(p.second)), "", text)
    if isinstance(p, Choice):
        return _Tree("Choice", (), (_program_tree(p.left), _program_tree(p.right)), "", text)
    if isinstance(p, Star):
        return _Tree("Star", (), (_program_tree(p.body),), "", text)
    if isinstance(p, IfThenElse):
        cond = pretty_print(p.cond)
        kids = (_program_tree(p.then),) + ((_program_tree(p.orelse),) if p.orelse else ())
        return _Tree("IfThenElse", (cond, p.orelse is None), kids, cond, text)
    if isinstance(p, WhileSym):
        cond = pretty_print(p.cond)
        return _Tree("WhileSym", (cond,), (_program_tree(p.body),), cond, text)
    return _leaf(type(p).__name__, text)


def _names(kind, names) -> _Tree:
    text = ", ".join(names)
    return _Tree(kind, tuple(names), (), text, text)


def _model_tree(m: Model) -> _Tree:
    invs = []
    for k, path in enumerate(star_paths(m.program)):
        if path in m.loop_invariants:
            text = f"{k}: {pretty_print(m.loop_invariants[path])}"
            invs.append(_leaf("Invariant", text))
    kids = (
        _names("Variables", m.variables),
        _names("Constants", m.constants),
        _leaf("Init", pretty_print(m.init)),
        _Tree("Program", (), (_program_tree(m.program),), "", pretty_print(m.program)),
        _leaf("Safety", pretty_print(m.safety)),
        _Tree("Invariants", (), tuple(invs), "", "\n".join(i.whole for i in invs)),
    )
    return _Tree("Model", (m.name,), kids, m.name, pretty_print(m))


def _graph_parts(g: ActivityGraph):
    nodes = {n.id: _leaf("Node", pretty_print(n)) for n in g.nodes}
    edges, seen = {}, {}
    for e in g.edges:
        guard = pretty_print(e.guard) if e.guard is not None else ""
        base = (e.source, e.target, guard)
        seen[base] = seen.get(base, 0) + 1
        edges[base + (seen[base],)] = _leaf("Edge", pretty_print(e))
    header = (
        _names("Variables", g.variables),
        _names("Constants", g.constants),
        _leaf("Init", pretty_print(g.init)),
        _leaf("Safety", pretty_print(g.safety)),
    )
    return header, nodes, edges


def _union(a: dict, b: dict) -> list:
    return list(a) + [k for k in b if k not in a]


def _diff_graphs(a: ActivityGraph, b: ActivityGraph) -> list:
    out = []
    if a.name != b.name:
        out.append(DiffEntry("Modify", (), "Graph", a.name, b.name))
    ha, na, ea = _graph_parts(a)
    hb, nb, eb = _graph_parts(b)
    for i, (x, y) in enumerate(zip(ha, hb)):
        _diff(x, y, ((i, x.kind),), out)
    for slot, (kind, xa, xb) in enumerate((("Nodes", na, nb), ("Edges", ea, eb)), start=4):
        for i, key in enumerate(_union(xa, xb)):
            path = ((slot, kind), (i, kind[:-1]))
            _diff(xa.get(key), xb.get(key), path, out)
    return out


def _diff(x: Optional[_Tree], y: Optional[_Tree], path: tuple, out: list):
    if x is None and y is None:
        return
    if x is None:
        out.append(DiffEntry("Add", path[:-1] + ((path[-1][0], y.kind),), y.kind, None, y.whole))
        return
    if y is None:
        out.append(DiffEntry("Remove", path, x.kind, x.whole, None))
        return
    if x.kind != y.kind:
        out.append(DiffEntry("Remove", path, x.kind, x.whole, None))
        out.append(DiffEntry("Add", path[:-1] + ((path[-1][0], y.kind),), y.kind, None, y.whole))
        return
    if x.attrs != y.attrs:
        out.append(DiffEntry("Modify", path, x.kind, x.fragment, y.fragment))
    for i in range(max(len(x.children), len(y.children))):
        cx = x.children[i] if i < len(x.children) else None
        cy = y.children[i] if i < len(y.children) else None
        kind = (cx or cy).kind
        _diff(cx, cy, path + ((i, kind),), out)


def _tree(node) -> _Tree:
    if isinstance(node, Model):
        return _model_tree(node)
    if isinstance(node, PROGRAM_TYPES):
        return _program_tree(node)
    if isinstance(node, FORMULA_TYPES):
        return _leaf("Formula", pretty_print(node))
    if isinstance(node, TERM_TYPES):
        return _leaf("Term", pretty_print(node))
    raise TypeError(f"cannot diff {type(node).__name__}")


def _top_kind(node) -> str:
    if isinstance(node, ActivityGraph):
        return "activity graph"
    if isinstance(node, Model):
        return "model"
    if isinstance(node, PROGRAM_TYPES):
        return "hybrid program"
    if isinstance(node, FORMULA_TYPES):
        return "formula"
    if isinstance(node, TERM_TYPES):
        return "term"
    return type(node).__name__


_ORDER = {"Remove": 0, "Add": 1, "Modify": 2}


def diff_trees(a, b) -> list:
    """Structural differences turning ``a`` into ``b``, ordered by path."""
    if _top_kind(a) != _top_kind(b):
        raise KindMismatch(_top_kind(a), _top_kind(b))
    if isinstance(a, ActivityGraph):
        out = _diff_graphs(a, b)
    else:
        out = []
        ta, tb = _tree(a), _tree(b)
        if isinstance(a, Model):
            if ta.attrs != tb.attrs:
                out.append(DiffEntry("Modify", (), "Model", a.name, b.name))
            for i, (x, y) in enumerate(zip(ta.children, tb.children)):
                _diff(x, y, ((i, x.kind),), out)
        else:
            _diff(ta, tb, ((0, ta.kind),), out)
    return sorted(out, key=lambda e: (tuple(i for i, _ in e.path), _ORDER[e.kind]))


def _clean(text: Optional[str]) -> str:
    return "" if text is None else text.replace("\t", " ").replace("\n", " | ")


def format_diff(entries: list, fmt: str = "text") -> str:
    if fmt == "tsv":
        return "".join(f"{e.kind}\t{e.path_text}\t{e.element_kind}\t{_clean(e.before)}\t"
                       f"{_clean(e.after)}\n" for e in entries)
    lines = []
    for e in entries:
        lines.append(f"{e.kind} {e.element_kind} at {e.path_text}")
        if e.before is not None:
            lines.append(f"  - {_clean(e.before)}")
        if e.after is not None:
            lines.append(f"  + {_clean(e.after)}")
    return "".join(line + "\n" for line in lines)
