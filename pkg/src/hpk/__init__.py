"""Hybrid programs and activity graphs: parsing, printing, transformation,
simulation-based falsification and structural diff."""

from .corpus import CorpusEntry, get_model, list_models
from .diff import DiffEntry, diff_trees, format_diff
from .errors import HpkError, ModelError, ParseError
from .graph import ActivityGraph, Edge, Node
from .parser import parse_activity_graph, parse_formula, parse_model, parse_program, parse_term
from .printer import pretty_print
from .simulate import (
    CheckResult, SimPolicy, Trace, check_diamond, check_safety, enumerate_reachable_discrete,
    replay, simulate_run,
)
from .syntax import Model
from .transform import (
    StructureReport, to_automaton_embedding, to_hybrid_program, validate_well_structured,
)

__all__ = [
    "ActivityGraph", "CheckResult", "CorpusEntry", "DiffEntry", "Edge", "HpkError", "Model",
    "ModelError", "Node", "ParseError", "SimPolicy", "StructureReport", "Trace",
    "check_diamond", "check_safety", "diff_trees", "enumerate_reachable_discrete",
    "format_diff", "get_model", "list_models", "parse_activity_graph", "parse_formula",
    "parse_model", "parse_program", "parse_term", "pretty_print", "replay", "simulate_run",
    "to_automaton_embedding", "to_hybrid_program", "validate_well_structured",
]
