"""Activity-graph representation of Hybrid Program UML behaviour diagrams."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .syntax import Formula, HybridProgram, Placeholder

NODE_KINDS = ("initial", "final", "decision", "merge", "action")
STEREOTYPES = ("AssignAny", "AssignTerm", "Dynamics", "Placeholder")


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    stereotype: Optional[str] = None
    body: Optional[HybridProgram] = None
    diff_invariant: Optional[Formula] = None
    label: Optional[str] = None

    def __post_init__(self):
        if self.kind not in NODE_KINDS:
            raise ValueError(f"unknown node kind {self.kind!r}")
        if self.kind == "action":
            if self.stereotype not in STEREOTYPES:
                raise ValueError(f"unknown stereotype {self.stereotype!r}")
            if self.stereotype == "Placeholder":
                if not self.label:
                    raise ValueError("placeholder action needs a label")
            elif self.body is None:
                raise ValueError(f"action {self.id} has no body")
        elif self.stereotype is not None or self.body is not None:
            raise ValueError(f"{self.kind} node {self.id} cannot carry a body")
        if self.diff_invariant is not None and self.stereotype != "Dynamics":
            raise ValueError("only Dynamics actions carry a differential invariant")

    @property
    def program(self) -> HybridProgram:
        """The hybrid program an action contributes."""
        if self.stereotype == "Placeholder":
            return Placeholder(self.label)
        return self.body


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    guard: Optional[Formula] = None
    repeat: bool = False
    invariant: Optional[Formula] = None

    def __post_init__(self):
        if self.invariant is not None and not self.repeat:
            raise ValueError("only NondetRepetition edges carry a loop invariant")


@dataclass(frozen=True)
class ActivityGraph:
    name: str
    variables: tuple
    constants: tuple
    init: Formula
    safety: Formula
    nodes: tuple
    edges: tuple

    def __post_init__(self):
        for attr in ("variables", "constants", "nodes", "edges"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("node ids must be unique")
        known = set(ids)
        for e in self.edges:
            if e.source not in known or e.target not in known:
                raise ValueError(f"edge {e.source} -> {e.target} has an unknown endpoint")

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def edge_id(self, edge: Edge) -> str:
        return f"e{self.edges.index(edge) + 1}"

    def out_edges(self, node_id: str) -> list:
        return [e for e in self.edges if e.source == node_id]

    def in_edges(self, node_id: str) -> list:
        return [e for e in self.edges if e.target == node_id]

    @property
    def has_placeholder(self) -> bool:
        return any(n.stereotype == "Placeholder" for n in self.nodes)
