"""Seeded generator of random well-structured activity graphs with discrete bodies.

Bodies only copy, reflect (``2 - x``), reset or re-pick variables, so every
value stays inside {0, 1, 2} and bounded enumeration reaches a fixpoint.
"""

import random

from hpk.graph import ActivityGraph, Edge, Node
from hpk.syntax import (
    TRUE, Assign, AssignAny, Binary, Compare, Not, Number, Variable,
)

VALUES = (0.0, 1.0, 2.0)


class _Builder:
    def __init__(self, rng: random.Random, variables):
        self.rng = rng
        self.vars = variables
        self.nodes = [Node("start", "initial")]
        self.edges = []
        self.count = 0

    def fresh(self, kind, stereotype=None, body=None):
        self.count += 1
        node = Node(f"n{self.count}", kind, stereotype, body)
        self.nodes.append(node)
        return node.id

    def guard(self):
        rng = self.rng
        left = Variable(rng.choice(self.vars))
        right = rng.choice([Number(rng.choice(VALUES)), Variable(rng.choice(self.vars))])
        return Compare(rng.choice(["<", "<=", "=", ">=", ">"]), left, right)

    def action(self, prev, guard=None):
        rng = self.rng
        var = rng.choice(self.vars)
        pick = rng.random()
        if pick < 0.25:
            nid = self.fresh("action", "AssignAny", AssignAny(var))
        else:
            if pick < 0.5:
                term = Number(rng.choice(VALUES))
            elif pick < 0.75:
                term = Variable(rng.choice(self.vars))
            else:
                term = Binary("-", Number(2), Variable(rng.choice(self.vars)))
            nid = self.fresh("action", "AssignTerm", Assign(var, term))
        self.edges.append(Edge(prev, nid, guard))
        return nid

    def block(self, prev, depth, guard=None):
        """Emit 1-3 items after ``prev``; ``guard`` labels the entering edge."""
        for _ in range(self.rng.randint(1, 3)):
            roll = self.rng.random() if depth > 0 else 0.0
            if roll < 0.5:
                prev = self.action(prev, guard)
            elif roll < 0.75:
                prev = self.branch(prev, depth - 1, guard)
            else:
                prev = self.loop(prev, depth - 1, guard)
            guard = self.guard() if self.rng.random() < 0.2 else None
        if guard is not None:
            prev = self.action(prev, guard)
        return prev

    def branch(self, prev, depth, guard):
        d = self.fresh("decision")
        self.edges.append(Edge(prev, d, guard))
        arms = self.rng.randint(2, 3)
        negated = arms == 2 and self.rng.random() < 0.4
        g = self.guard()
        guards = [g, Not(g)] if negated else [
            self.guard() if self.rng.random() < 0.5 else None for _ in range(arms)]
        ends, empty_used = [], False
        for k in range(arms):
            if not empty_used and k > 0 and self.rng.random() < 0.3:
                ends.append((d, guards[k]))
                empty_used = True
            else:
                ends.append((self.block(d, depth, guards[k]), None))
        m = self.fresh("merge")
        for src, g2 in ends:
            self.edges.append(Edge(src, m, g2))
        return m

    def loop(self, prev, depth, guard):
        d = self.fresh("decision")
        self.edges.append(Edge(prev, d, guard))
        inner = self.guard() if self.rng.random() < 0.3 else None
        end = self.block(d, depth, inner)
        m = self.fresh("merge")
        self.edges.append(Edge(end, m))
        if self.rng.random() < 0.6:
            self.edges.append(Edge(d, m))
        self.edges.append(Edge(m, d, repeat=True))
        return m


def random_graph(seed: int, max_depth: int = 2) -> ActivityGraph:
    rng = random.Random(seed)
    variables = tuple(["x", "y", "z"][: rng.randint(1, 3)])
    b = _Builder(rng, variables)
    last = b.block("start", max_depth)
    b.nodes.append(Node("stop", "final"))
    b.edges.append(Edge(last, "stop"))
    return ActivityGraph(f"g{seed}", variables, (), TRUE, TRUE, tuple(b.nodes), tuple(b.edges))
