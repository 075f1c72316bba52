import itertools

import pytest

from graphgen import VALUES, random_graph
from hpk.corpus import get_model
from hpk.errors import NotWellStructured
from hpk.graph import Edge
from hpk.parser import parse_activity_graph, parse_formula, parse_program
from hpk.printer import pretty_print
from hpk.simulate import enumerate_reachable_discrete, project_out
from hpk.syntax import (
    FALSE, And, Chop, Choice, IfThenElse, Placeholder, Quest, Star, eval_formula, walk_programs,
)
from hpk.transform import (
    embedding_context, to_automaton_embedding, to_hybrid_program, validate_well_structured,
)

HEAD = "graph G\nvars x, y\ninit true\nsafe x >= 0\nnode i initial\nnode f final\n"


def graph(body: str):
    return parse_activity_graph(HEAD + body)


def act(node_id, code):
    kind = "AssignAny" if code.endswith("*") else "AssignTerm"
    return f"node {node_id} action {kind} {{ {code} }}\n"


def P(text):
    return parse_program(text)


def F(text):
    return parse_formula(text)


def program_of(body):
    return to_hybrid_program(graph(body)).program


# ------------------------------------------------- structured, one per row


def test_row1_direct_flow_is_sequence():
    body = act("a", "x := 1") + act("b", "y := 2") + "edge i -> a\nedge a -> b\nedge b -> f\n"
    assert program_of(body) == Chop(P("x := 1"), P("y := 2"))


def test_row2_guarded_flow_inserts_a_test():
    body = act("a", "x := 1") + act("b", "y := 2") + \
        "edge i -> a\nedge a -> b [x > 0]\nedge b -> f\n"
    assert program_of(body) == Chop(Chop(P("x := 1"), Quest(F("x > 0"))), P("y := 2"))


LOOP = "node d decision\nnode m merge\n" + act("a", "x := x + 1")


def test_row3_back_and_forward_edge_is_star():
    body = LOOP + "edge i -> d\nedge d -> a\nedge a -> m\nedge d -> m\nedge m -> f\n" \
        "edge m -> d repeat invariant x >= 0\n"
    m = to_hybrid_program(graph(body))
    assert m.program == Star(P("x := x + 1"))
    assert m.loop_invariants == {(): F("x >= 0")}


def test_row4_back_edge_only_repeats_at_least_once():
    body = LOOP + "edge i -> d\nedge d -> a\nedge a -> m\nedge m -> f\nedge m -> d repeat\n"
    a = P("x := x + 1")
    assert program_of(body) == Chop(a, Star(a))


BRANCH = "node d decision\nnode m merge\n"


def test_row5_guard_with_negated_bypass_is_if():
    body = BRANCH + act("a", "x := 0") + \
        "edge i -> d\nedge d -> a [x > 5]\nedge a -> m\nedge d -> m [!(x > 5)]\nedge m -> f\n"
    assert program_of(body) == IfThenElse(F("x > 5"), P("x := 0"))


def test_row6_complementary_guards_give_if_else():
    body = BRANCH + act("a", "x := 0") + act("b", "x := 1") + \
        "edge i -> d\nedge d -> a [x > 5]\nedge d -> b [!(x > 5)]\n" \
        "edge a -> m\nedge b -> m\nedge m -> f\n"
    assert program_of(body) == IfThenElse(F("x > 5"), P("x := 0"), P("x := 1"))


def test_row7_unguarded_fan_out_is_right_nested_choice():
    body = BRANCH + act("a", "x := 0") + act("b", "x := 1") + act("c", "y := *") + \
        "edge i -> d\nedge d -> a\nedge d -> b\nedge d -> c\n" \
        "edge a -> m\nedge b -> m\nedge c -> m\nedge m -> f\n"
    assert program_of(body) == Choice(P("x := 0"), Choice(P("x := 1"), P("y := *")))


# ------------------------------------------------------ structured, extra


def test_unrelated_guards_fall_back_to_choice_with_tests():
    body = BRANCH + act("a", "x := 0") + \
        "edge i -> d\nedge d -> a [x > 5]\nedge a -> m\nedge d -> m [y > 5]\nedge m -> f\n"
    assert program_of(body) == P("?x > 5; x := 0 ++ ?y > 5")


def test_unguarded_bypass_is_an_empty_branch():
    body = BRANCH + act("a", "x := 0") + \
        "edge i -> d\nedge d -> a\nedge a -> m\nedge d -> m\nedge m -> f\n"
    assert program_of(body) == P("x := 0 ++ ?true")


def test_water_tank_golden():
    wt = to_hybrid_program(get_model("watertank_graph").model)
    assert wt == get_model("watertank").model
    assert pretty_print(wt.program) == (
        "(f := *; ?f <= (M - x) / eps; (c := 0; {x' = f, c' = 1 & c <= eps & x >= 0}))*")
    assert pretty_print(wt.loop_invariants[()]) == "0 <= x & x <= M"


def test_robot_golden():
    assert to_hybrid_program(get_model("robot2d_graph").model) == get_model("robot2d").model


def test_nested_loops_keep_their_invariants():
    body = ("node d1 decision\nnode d2 decision\nnode m2 merge\nnode m1 merge\n"
            + act("a", "x := 1") +
            "edge i -> d1\nedge d1 -> d2\nedge d2 -> a\nedge a -> m2\nedge d2 -> m2\n"
            "edge m2 -> m1\nedge d1 -> m1\nedge m1 -> f\n"
            "edge m2 -> d2 repeat invariant x = 1\nedge m1 -> d1 repeat invariant y = 0\n")
    m = to_hybrid_program(graph(body))
    assert m.program == Star(Star(P("x := 1")))
    assert m.loop_invariants == {(): F("y = 0"), (0,): F("x = 1")}


def test_placeholder_lowering():
    body = "node p action Placeholder \"dynamics\"\nedge i -> p\nedge p -> f\n"
    m = to_hybrid_program(graph(body))
    assert m.program == Placeholder("dynamics")
    assert m.safety == And(F("x >= 0"), FALSE)


def test_placeholder_safety_is_unsatisfiable_everywhere():
    body = "node p action Placeholder \"later\"\nedge i -> p\nedge p -> f\n"
    for m in (to_hybrid_program(graph(body)), to_automaton_embedding(graph(body))):
        for x, y in itertools.product([-1.0, 0.0, 3.0], repeat=2):
            assert eval_formula(m.safety, {"x": x, "y": y, "s": 0.0}) is False


def test_diff_invariants_are_not_carried_over():
    g = graph("node a action Dynamics { {x' = 1 & x <= 2} } diffinv x >= 0\n"
              "edge i -> a\nedge a -> f\n")
    assert to_hybrid_program(g).program == P("{x' = 1 & x <= 2}")


# ----------------------------------------------------------- validation


def test_water_tank_is_well_structured():
    r = validate_well_structured(get_model("watertank_graph").model)
    assert r.well_structured and len(r.loop_pairs) == 1 and r.branch_pairs == []


def test_two_final_nodes():
    r = validate_well_structured(graph("node g final\nedge i -> f\n"))
    assert ("g", "multiple final nodes") in r.violations
    assert not r.well_structured


def test_jump_out_of_a_loop_body():
    g = get_model("watertank_graph").model
    jumped = type(g)(g.name, g.variables, g.constants, g.init, g.safety, g.nodes,
                     g.edges + (Edge("ctrl", "stop"),))
    r = validate_well_structured(jumped)
    assert any(why == "unstructured jump" for _, why in r.violations)
    with pytest.raises(NotWellStructured) as info:
        to_hybrid_program(jumped)
    assert info.value.report.violations == r.violations


@pytest.mark.parametrize("body, reason", [
    ("edge i -> f\nedge i -> f\n", "initial node needs in-degree 0 and out-degree 1"),
    (act("a", "x := 1") + "edge i -> a\nedge a -> f\nedge a -> f\n",
     "action needs in-degree 1 and out-degree 1"),
    (BRANCH + act("a", "x := 1") + act("b", "x := 2") +
     "edge i -> d\nedge d -> a\nedge d -> b\nedge a -> m\nedge b -> f\nedge m -> f\n",
     "no matching merge node"),
    (act("a", "x := 1") + act("b", "x := 2") +
     "edge i -> a\nedge a -> b\nedge b -> a\nedge b -> f\n", None),
    (BRANCH + act("a", "x := 1") +
     "edge i -> d\nedge d -> a\nedge a -> m\nedge d -> m\nedge m -> f\nedge m -> d [x > 0] repeat\n",
     "repetition edge cannot carry a guard"),
    (LOOP + "edge i -> d\nedge d -> a\nedge a -> m\nedge d -> m [x > 0]\nedge m -> f\n"
     "edge m -> d repeat\n", "loop bypass edge cannot carry a guard"),
])
def test_structure_violations(body, reason):
    r = validate_well_structured(graph(body))
    assert not r.well_structured
    if reason is not None:
        assert reason in [why for _, why in r.violations]


def test_shared_merge_is_refused():
    body = ("node d1 decision\nnode d2 decision\nnode m merge\n" + act("a", "x := 1")
            + act("b", "x := 2") + act("c", "x := 3") +
            "edge i -> d1\nedge d1 -> a\nedge d1 -> d2\nedge d2 -> b\nedge d2 -> c\n"
            "edge a -> m\nedge b -> m\nedge c -> m\nedge m -> f\n")
    r = validate_well_structured(graph(body))
    assert not r.well_structured


def _stars(p):
    return sum(isinstance(n, Star) for _, n in walk_programs(p))


@pytest.mark.parametrize("seed", range(40))
def test_random_graphs_are_well_structured_with_one_star_per_loop(seed):
    g = random_graph(seed)
    r = validate_well_structured(g)
    assert r.well_structured, r.violations
    p = to_hybrid_program(g).program
    if not r.loop_pairs:
        assert _stars(p) == 0
    # a loop without bypass duplicates its body, so nested stars may be copied
    assert _stars(p) >= len(r.loop_pairs)
    bypassed = {d for d, m, _ in r.loop_pairs
                if any(e.target == m for e in g.out_edges(d))}
    if len(bypassed) == len(r.loop_pairs):
        assert _stars(p) == len(r.loop_pairs)


def test_transforms_are_deterministic():
    g = random_graph(3)
    assert to_hybrid_program(g) == to_hybrid_program(g)
    assert to_automaton_embedding(g) == to_automaton_embedding(g)


# ------------------------------------------------ embedding, one per row


def test_embedding_row1_action_to_action():
    body = act("a", "x := 1") + act("b", "y := 2") + "edge i -> a\nedge a -> b\nedge b -> f\n"
    m = to_automaton_embedding(graph(body))
    assert m.program == P("s := 2; (?s = 2; x := 1; s := 3 ++ ?s = 3; y := 2; s := 1)*")
    assert m.variables == ("x", "y", "s")


def test_embedding_row2_action_to_decision():
    body = BRANCH + act("a", "x := 1") + act("b", "y := 1") + \
        "edge i -> a\nedge a -> d\nedge d -> b\nedge d -> m\nedge b -> m\nedge m -> f\n"
    m = to_automaton_embedding(graph(body))
    ids = embedding_context(graph(body)).ids
    assert ids == {"f": 1, "d": 2, "m": 3, "a": 4, "b": 5}
    blocks = m.program.second.body
    assert P("?s = 4; x := 1; s := 2") in _alternatives(blocks)


def test_embedding_row3_guard_precedes_location_update():
    body = act("a", "x := 1") + act("b", "y := 2") + \
        "edge i -> a\nedge a -> b [x > 0]\nedge b -> f\n"
    m = to_automaton_embedding(graph(body))
    assert P("?s = 2; x := 1; ?x > 0; s := 3") in _alternatives(m.program.second.body)


def test_embedding_row4_decision_fans_out_to_a_choice():
    body = BRANCH + act("a", "x := 0") + act("b", "x := 1") + \
        "edge i -> d\nedge d -> a\nedge d -> b\nedge a -> m\nedge b -> m\nedge m -> f\n"
    g = graph(body)
    ids = embedding_context(g).ids
    assert (ids["d"], ids["a"], ids["b"]) == (2, 4, 5)
    blocks = _alternatives(to_automaton_embedding(g).program.second.body)
    assert P("?s = 2; (s := 4 ++ s := 5)") in blocks


def _alternatives(p):
    out = []
    while isinstance(p, Choice):
        out.append(p.left)
        p = p.right
    return out + [p]


def test_single_action_embedding_exact():
    g = parse_activity_graph("graph G\nvars x\ninit true\nsafe true\nnode i initial\n"
                             "node a action AssignTerm { x := 1 }\nnode f final\n"
                             "edge i -> a\nedge a -> f\n")
    m = to_automaton_embedding(g)
    assert embedding_context(g).ids == {"a": 1, "f": 2}
    assert m.program == P("s := 1; (?s = 1; x := 1; s := 2)*")


def test_final_location_has_no_block():
    g = get_model("watertank_graph").model
    ctx = embedding_context(g)
    blocks = _alternatives(to_automaton_embedding(g).program.second.body)
    tested = {int(_first(b).cond.right.value) for b in blocks}
    assert ctx.ids["stop"] not in tested
    assert tested == set(ctx.ids.values()) - {ctx.ids["stop"]}


def _first(p):
    while isinstance(p, Chop):
        p = p.first
    return p


def test_loop_of_choices_wrapper():
    m = to_automaton_embedding(get_model("watertank_graph").model)
    assert isinstance(m.program, Chop)
    assert m.program.first == P("s := 1")
    assert isinstance(m.program.second, Star)
    assert isinstance(m.program.second.body, Choice)
    assert m.loop_invariants == {}


def test_location_variable_is_freshened():
    g = parse_activity_graph("graph G\nvars s, s_1\ninit true\nsafe true\nnode i initial\n"
                             "node f final\nedge i -> f\n")
    assert embedding_context(g).location_var == "s_2"


def test_initial_edge_guard_becomes_a_test():
    body = act("a", "x := 1") + "edge i -> a [y = 0]\nedge a -> f\n"
    m = to_automaton_embedding(graph(body))
    assert m.program.first == P("?y = 0; s := 2")


def test_embedding_accepts_unstructured_graphs():
    body = act("a", "x := 1") + act("b", "x := 2") + \
        "edge i -> a\nedge a -> b\nedge b -> a\nedge b -> f\n"
    g = graph(body)
    assert not validate_well_structured(g).well_structured
    to_automaton_embedding(g)


# --------------------------------------------------------- equivalence


def reachable_both_ways(g, depth=5):
    ctx = embedding_context(g)
    start = [dict(zip(g.variables, c)) for c in itertools.product(VALUES, repeat=len(g.variables))]
    structured = enumerate_reachable_discrete(to_hybrid_program(g).program, start, VALUES, depth)
    embedded = enumerate_reachable_discrete(
        to_automaton_embedding(g).program, [{**s, ctx.location_var: 0.0} for s in start],
        VALUES, depth * len(ctx.ids))
    final = float(ctx.ids[next(n.id for n in g.nodes if n.kind == "final")])
    at_final = {s for s in embedded if dict(s)[ctx.location_var] == final}
    return structured, project_out(at_final, ctx.location_var)


def interesting_graphs(count):
    seed = 0
    while count:
        g = random_graph(seed)
        seed += 1
        r = validate_well_structured(g)
        if not (r.loop_pairs or r.branch_pairs):
            continue
        structured, embedded = reachable_both_ways(g)
        if structured:
            count -= 1
            yield g, structured, embedded


@pytest.mark.parametrize("case", list(interesting_graphs(12)), ids=lambda c: c[0].name)
def test_structured_and_embedded_reach_the_same_states(case):
    _, structured, embedded = case
    assert structured == embedded


def test_water_tank_controller_reachability_matches():
    # the controller alone (flow fixed to a finite set, dynamics replaced by a reset)
    g = get_model("watertank_graph").model
    nodes = tuple(n if n.id != "dyn" else type(n)("dyn", "action", "AssignTerm",
                                                   P("c := 0"))
                  for n in g.nodes)
    g2 = type(g)(g.name, g.variables, g.constants, g.init, g.safety, nodes, g.edges)
    ctx = embedding_context(g2)
    start = [{"x": x, "f": 0.0, "c": 1.0, "M": 1.0, "eps": 0.5} for x in (0.0, 0.5, 1.0)]
    values = (0.0, 1.0, 2.0)
    a = enumerate_reachable_discrete(to_hybrid_program(g2).program, start, values, 5)
    b = enumerate_reachable_discrete(to_automaton_embedding(g2).program,
                                     [{**s, "s": 0.0} for s in start], values, 50)
    b = project_out({s for s in b if dict(s)["s"] == float(ctx.ids["stop"])}, "s")
    assert a == b and len(a) > 3
