"""Activity graph to hybrid program, in two flavours.

``to_hybrid_program`` recovers the nested loop/branch structure of a
well-structured graph and emits the matching composite program.
``to_automaton_embedding`` works on any graph: every location gets an id, and
the program is one loop over a choice of guarded location blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .errors import NotWellStructured
from .graph import ActivityGraph, Edge
from .syntax import (
    FALSE, TRUE, And, Assign, Chop, Compare, IfThenElse, Model, Not, Number, Quest, Star,
    Variable, choice, seq, walk_programs,
)


@dataclass
class StructureReport:
    violations: list = field(default_factory=list)  # (node or edge id, reason)
    loop_pairs: list = field(default_factory=list)  # (decision, merge, back edge id)
    branch_pairs: list = field(default_factory=list)  # (decision, merge)

    @property
    def well_structured(self) -> bool:
        return not self.violations

    def add(self, where: str, why: str):
        if (where, why) not in self.violations:
            self.violations.append((where, why))


def _forward_graph(g: ActivityGraph) -> nx.DiGraph:
    fwd = nx.DiGraph()
    fwd.add_nodes_from(n.id for n in g.nodes)
    fwd.add_edges_from((e.source, e.target) for e in g.edges if not e.repeat)
    return fwd


def _degree_checks(g: ActivityGraph, report: StructureReport):
    initials = [n.id for n in g.nodes if n.kind == "initial"]
    finals = [n.id for n in g.nodes if n.kind == "final"]
    if not initials:
        report.add(g.name, "no initial node")
    if len(initials) > 1:
        report.add(initials[1], "multiple initial nodes")
    if not finals:
        report.add(g.name, "no final node")
    if len(finals) > 1:
        report.add(finals[1], "multiple final nodes")
    for n in g.nodes:
        ins, outs = g.in_edges(n.id), g.out_edges(n.id)
        fwd_in = [e for e in ins if not e.repeat]
        fwd_out = [e for e in outs if not e.repeat]
        if n.kind == "initial" and (ins or len(outs) != 1):
            report.add(n.id, "initial node needs in-degree 0 and out-degree 1")
        elif n.kind == "final" and outs:
            report.add(n.id, "final node has outgoing edges")
        elif n.kind == "final" and not ins:
            report.add(n.id, "final node is unreachable")
        elif n.kind == "action" and (len(ins) != 1 or len(outs) != 1):
            report.add(n.id, "action needs in-degree 1 and out-degree 1")
        elif n.kind == "decision" and (len(fwd_in) != 1 or not fwd_out):
            report.add(n.id, "decision needs one forward incoming edge and outgoing edges")
        elif n.kind == "merge" and (len(fwd_out) != 1 or not fwd_in):
            report.add(n.id, "merge needs incoming edges and one forward outgoing edge")
    for e in g.edges:
        eid = g.edge_id(e)
        if not e.repeat:
            continue
        src, dst = g.node(e.source), g.node(e.target)
        if src.kind != "merge" or dst.kind != "decision":
            report.add(eid, "repetition edge must lead from a merge back to a decision")
        if e.guard is not None:
            report.add(eid, "repetition edge cannot carry a guard")
        if sum(1 for o in g.out_edges(e.source) if o.repeat) > 1:
            report.add(e.source, "merge has several repetition edges")
        if sum(1 for i in g.in_edges(e.target) if i.repeat) > 1:
            report.add(e.target, "decision is the target of several repetition edges")
    return initials, finals


def _region(fwd: nx.DiGraph, head: str, tail: str) -> set:
    seen, stack = set(), [s for s in fwd.successors(head) if s != tail]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(s for s in fwd.successors(v) if s != tail)
    return seen


def validate_well_structured(g: ActivityGraph) -> StructureReport:
    """Check the nesting discipline required by :func:`to_hybrid_program`.

    Violations are reported as data; the function never raises.
    """
    report = StructureReport()
    initials, finals = _degree_checks(g, report)
    if len(initials) != 1 or len(finals) != 1:
        return report
    initial, final = initials[0], finals[0]
    fwd = _forward_graph(g)
    if not nx.is_directed_acyclic_graph(fwd):
        cycle = nx.find_cycle(fwd)
        report.add(cycle[0][0], "cycle without a repetition edge")
        return report
    reachable = nx.descendants(fwd, initial) | {initial}
    coreachable = nx.ancestors(fwd, final) | {final}
    before = len(report.violations)
    for n in g.nodes:
        if n.id not in reachable:
            report.add(n.id, "unreachable from the initial node")
        elif n.id not in coreachable:
            report.add(n.id, "cannot reach the final node")
    if len(report.violations) > before:
        return report

    dom = nx.immediate_dominators(fwd, initial)
    pdom = nx.immediate_dominators(fwd.reverse(copy=False), final)

    def dominates(a, b, tree):
        while True:
            if a == b:
                return True
            if tree[b] == b:
                return False
            b = tree[b]

    back = {e.target: e for e in g.edges if e.repeat}
    paired_merges = {}
    for n in g.nodes:
        if n.kind != "decision":
            continue
        if n.id in back:
            e = back[n.id]
            merge = e.source
            if not dominates(n.id, merge, dom) or not dominates(merge, n.id, pdom):
                report.add(g.edge_id(e), "unstructured jump")
                continue
            report.loop_pairs.append((n.id, merge, g.edge_id(e)))
        else:
            if len(g.out_edges(n.id)) < 2:
                report.add(n.id, "decision with a single outgoing edge")
                continue
            merge = pdom[n.id]
            if g.node(merge).kind != "merge" or not dominates(n.id, merge, dom):
                report.add(n.id, "no matching merge node")
                continue
            report.branch_pairs.append((n.id, merge))
        if merge in paired_merges:
            report.add(merge, f"merge shared by decisions {paired_merges[merge]} and {n.id}")
            continue
        paired_merges[merge] = n.id
        region = _region(fwd, n.id, merge)
        for e in g.edges:
            if e.repeat:
                continue
            inside_src = e.source in region or e.source == n.id
            if inside_src and e.target not in region and e.target != merge:
                report.add(g.edge_id(e), "unstructured jump")
            if e.target in region and not inside_src:
                report.add(g.edge_id(e), "unstructured jump")
        if n.id in back:
            for e in g.out_edges(n.id):
                if e.target == merge and e.guard is not None:
                    report.add(g.edge_id(e), "loop bypass edge cannot carry a guard")
    for n in g.nodes:
        if n.kind == "merge" and n.id not in paired_merges:
            report.add(n.id, "merge without a matching decision")
    return report


# ------------------------------------------------ structured transformation


def _negates(a, b) -> bool:
    return a is not None and b is not None and (a == Not(b) or b == Not(a))


def _compose_branches(branches):
    """branches: list of (guard or None, list of program items)."""
    if len(branches) == 2:
        (g1, b1), (g2, b2) = branches
        if _negates(g1, g2) and (b1 or b2):
            if not b2:
                return IfThenElse(g1, seq(*b1))
            if not b1:
                return IfThenElse(g2, seq(*b2))
            if g2 == Not(g1):
                return IfThenElse(g1, seq(*b1), seq(*b2))
            return IfThenElse(g2, seq(*b2), seq(*b1))
    alts = []
    for guard, body in branches:
        items = ([Quest(guard)] if guard is not None else []) + body
        alts.append(seq(*items) if items else Quest(TRUE))
    return choice(*alts)


class _Structurer:
    def __init__(self, g: ActivityGraph, report: StructureReport):
        self.g = g
        self.loops = {d: (m, eid) for d, m, eid in report.loop_pairs}
        self.branches = dict(report.branch_pairs)
        self.invariants = {}  # id(Star) -> Formula

    def follow(self, edge: Edge, stop: str) -> list:
        """Items from ``edge`` (its guard included) up to the node ``stop``."""
        items = [Quest(edge.guard)] if edge.guard is not None else []
        cur = edge.target
        while cur != stop:
            node = self.g.node(cur)
            if node.kind == "final":
                break
            if node.kind == "action":
                items.append(node.program)
                nxt = self.g.out_edges(cur)[0]
            else:
                merge = self.loops[cur][0] if cur in self.loops else self.branches[cur]
                items.append(self.loop(cur) if cur in self.loops else self.branch(cur))
                nxt = next(e for e in self.g.out_edges(merge) if not e.repeat)
            if nxt.guard is not None:
                items.append(Quest(nxt.guard))
            cur = nxt.target
        return items

    def _arms(self, decision: str, merge: str) -> list:
        arms = []
        for e in self.g.out_edges(decision):
            body = self.follow(Edge(e.source, e.target), merge) if e.target != merge else []
            arms.append((e.guard, body))
        return arms

    def branch(self, decision: str):
        return _compose_branches(self._arms(decision, self.branches[decision]))

    def loop(self, decision: str):
        merge, eid = self.loops[decision]
        arms = self._arms(decision, merge)
        skips = [a for a in arms if a[0] is None and not a[1]]
        body_arms = [a for a in arms if a[0] is not None or a[1]]
        body = _compose_branches(body_arms) if body_arms else Quest(TRUE)
        star = Star(body)
        back = next(e for e in self.g.out_edges(merge) if e.repeat)
        if back.invariant is not None:
            self.invariants[id(star)] = back.invariant
        return star if skips else Chop(body, star)


def _placeholder_safety(g: ActivityGraph):
    return And(g.safety, FALSE) if g.has_placeholder else g.safety


def to_hybrid_program(g: ActivityGraph) -> Model:
    """Structured transformation of a well-structured activity graph."""
    report = validate_well_structured(g)
    if not report.well_structured:
        raise NotWellStructured(report)
    s = _Structurer(g, report)
    initial = next(n for n in g.nodes if n.kind == "initial")
    final = next(n for n in g.nodes if n.kind == "final")
    items = s.follow(g.out_edges(initial.id)[0], final.id)
    program = seq(*items)
    invariants = {path: s.invariants[id(node)] for path, node in walk_programs(program)
                  if isinstance(node, Star) and id(node) in s.invariants}
    return Model(g.name, g.variables, g.constants, g.init, program,
                 _placeholder_safety(g), invariants)


# ------------------------------------------------------ automaton embedding


@dataclass(frozen=True)
class EmbeddingContext:
    location_var: str
    ids: dict  # node id -> positive int

    def test(self, node_id: str):
        return Quest(Compare("=", Variable(self.location_var), Number(self.ids[node_id])))

    def goto(self, node_id: str):
        return Assign(self.location_var, Number(self.ids[node_id]))


def embedding_context(g: ActivityGraph, base: str = "s") -> EmbeddingContext:
    taken = set(g.variables) | set(g.constants)
    name, k = base, 0
    while name in taken:
        k += 1
        name = f"{base}_{k}"
    ids = {}
    for n in g.nodes:
        if n.kind != "initial":
            ids[n.id] = len(ids) + 1
    return EmbeddingContext(name, ids)


def _transitions(ctx: EmbeddingContext, edges: list) -> list:
    """Program items moving to the successor location(s)."""
    alts = []
    for e in edges:
        guard = [Quest(e.guard)] if e.guard is not None else []
        alts.append(guard + [ctx.goto(e.target)])
    return alts[0] if len(alts) == 1 else [choice(*(seq(*a) for a in alts))]


def to_automaton_embedding(g: ActivityGraph) -> Model:
    """Hybrid-automaton embedding; the graph need not be well-structured."""
    ctx = embedding_context(g)
    blocks = []
    lead = None
    for n in g.nodes:
        outs = g.out_edges(n.id)
        if n.kind == "initial":
            if outs:
                lead = seq(*_transitions(ctx, outs))
            continue
        if n.kind == "final" or not outs:
            continue
        if n.kind == "action":
            blocks.append(seq(ctx.test(n.id), n.program, *_transitions(ctx, outs)))
        else:
            blocks.append(seq(ctx.test(n.id), *_transitions(ctx, outs)))
    parts = [lead] if lead is not None else []
    if blocks:
        parts.append(Star(choice(*blocks)))
    program = seq(*parts) if parts else Quest(TRUE)
    return Model(g.name, g.variables + (ctx.location_var,), g.constants, g.init, program,
                 _placeholder_safety(g), {})
