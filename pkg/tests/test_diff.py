import dataclasses
from collections import Counter

import pytest
from hypothesis import HealthCheck, given, settings

from hpk.corpus import NAMES, get_model, model_text
from hpk.diff import DiffEntry, diff_trees, format_diff
from hpk.errors import KindMismatch
from hpk.parser import parse_activity_graph, parse_formula, parse_model, parse_program
from hpk.syntax import Quest
from strategies import models, programs

SLOW = settings(max_examples=200, deadline=None, suppress_health_check=list(HealthCheck))


def mirrored(entries):
    flip = {"Add": "Remove", "Remove": "Add", "Modify": "Modify"}
    return Counter((flip[e.kind], e.element_kind, e.after, e.before) for e in entries)


def plain(entries):
    return Counter((e.kind, e.element_kind, e.before, e.after) for e in entries)


@pytest.mark.parametrize("name", NAMES)
def test_corpus_entry_against_itself(name):
    m = get_model(name).model
    assert diff_trees(m, m) == []


@SLOW
@given(models(4))
def test_fuzzed_model_against_itself(m):
    assert diff_trees(m, m) == []


@SLOW
@given(models(3), models(3))
def test_swapping_inputs_swaps_adds_and_removes(a, b):
    assert plain(diff_trees(b, a)) == mirrored(diff_trees(a, b))


@SLOW
@given(programs(4), programs(4))
def test_nonempty_exactly_when_different(p, q):
    assert (diff_trees(p, q) == []) == (p == q)


def test_changed_tank_guard_is_one_modify():
    text = model_text("watertank")
    changed = parse_model(text.replace("(M - x) / eps", "(M - x) / (2 * eps)"))
    entries = diff_trees(get_model("watertank").model, changed)
    assert len(entries) == 1
    e = entries[0]
    assert (e.kind, e.element_kind) == ("Modify", "Quest")
    assert e.before == "?f <= (M - x) / eps" and e.after == "?f <= (M - x) / (2 * eps)"


def test_extra_graph_branch():
    text = model_text("watertank_graph")
    extra = text.replace(
        "node join merge\n", "node join merge\nnode idle action AssignTerm { f := 0 }\n"
    ).replace("edge loop -> join\n", "edge loop -> join\nedge loop -> idle\nedge idle -> join\n")
    entries = diff_trees(parse_activity_graph(text), parse_activity_graph(extra))
    assert Counter((e.kind, e.element_kind) for e in entries) == {("Add", "Node"): 1,
                                                                   ("Add", "Edge"): 2}


def test_changed_edge_guard_is_remove_and_add():
    text = model_text("watertank_graph")
    g = parse_activity_graph(text)
    h = parse_activity_graph(text.replace("[f <= (M - x) / eps]", "[f <= M - x]"))
    assert Counter(e.kind for e in diff_trees(g, h)) == {"Remove": 1, "Add": 1}


def test_safety_and_invariant_changes():
    m = get_model("watertank").model
    n = dataclasses.replace(m, safety=parse_formula("x <= M"),
                            loop_invariants={(): parse_formula("x >= 0")})
    kinds = {e.element_kind: e for e in diff_trees(m, n)}
    assert set(kinds) == {"Safety", "Invariant"}
    assert kinds["Invariant"].after == "0: x >= 0"


def test_kind_change_replaces_the_subtree():
    entries = diff_trees(parse_program("x := 1; y := 2"), parse_program("x := 1 ++ y := 2"))
    assert [(e.kind, e.element_kind) for e in entries] == [("Remove", "Chop"), ("Add", "Choice")]


def test_model_against_graph():
    with pytest.raises(KindMismatch, match="cannot compare a model with an activity graph"):
        diff_trees(get_model("watertank").model, get_model("watertank_graph").model)


def test_program_against_formula():
    with pytest.raises(KindMismatch):
        diff_trees(Quest(parse_formula("true")), parse_formula("true"))


def test_entry_shapes_are_checked():
    with pytest.raises(ValueError):
        DiffEntry("Add", (), "Node", "x", "y")
    with pytest.raises(ValueError):
        DiffEntry("Rename", (), "Node", "x", "y")


def test_formats():
    a, b = parse_program("x := 1; y := 2"), parse_program("x := 3; y := 2")
    entries = diff_trees(a, b)
    assert format_diff(entries, "tsv") == "Modify\t0:Chop/0:Assign\tAssign\tx := 1\tx := 3\n"
    assert format_diff(entries) == "Modify Assign at 0:Chop/0:Assign\n  - x := 1\n  + x := 3\n"
    assert format_diff([]) == ""
