"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line."""

import dataclasses
import time

import pytest
from hypothesis import HealthCheck, given, settings

import test_transform as tt
from graphgen import random_graph
from hpk import corpus
from hpk.corpus import NAMES, get_model, model_text
from hpk.diff import diff_trees
from hpk.graph import ActivityGraph, Edge, Node
from hpk.parser import parse_activity_graph, parse_formula, parse_model
from hpk.printer import pretty_print
from hpk.simulate import (
    SimPolicy, check_safety, describe, enumerate_reachable_discrete, integrate_ode, project_out,
    replay, simulate_run,
)
from hpk.syntax import AssignAny, Star, eval_formula, seq
from hpk.transform import to_automaton_embedding, to_hybrid_program
from strategies import models
from test_corpus import grid


def run_all(checks):
    """Call each zero-argument check; return the names of those that failed."""
    failed = []
    for check in checks:
        try:
            check()
        except AssertionError:
            failed.append(check.__name__)
    return failed


def parse_any(text):
    return parse_activity_graph(text) if text.startswith("graph") else parse_model(text)


def test_criterion_1_roundtrip(verdict):
    start = time.perf_counter()
    corpus_ok = all(parse_any(pretty_print(get_model(n).model)) == get_model(n).model
                    for n in NAMES)
    seen, bad = [0], []

    @settings(max_examples=500, deadline=None, derandomize=True, database=None,
              suppress_health_check=list(HealthCheck))
    @given(models(8))
    def fuzz(m):
        seen[0] += 1
        if parse_model(pretty_print(m)) != m:
            bad.append(m)

    fuzz()
    took = time.perf_counter() - start
    ok = corpus_ok and not bad and seen[0] >= 500 and took < 5
    verdict(1, ok, f"{len(NAMES)} corpus entries, {seen[0]} fuzzed models, "
                   f"{len(bad)} mismatches, {took:.1f}s")
    assert ok


def test_criterion_2_structured_rows(verdict):
    rows = [tt.test_row1_direct_flow_is_sequence, tt.test_row2_guarded_flow_inserts_a_test,
            tt.test_row3_back_and_forward_edge_is_star,
            tt.test_row4_back_edge_only_repeats_at_least_once,
            tt.test_row5_guard_with_negated_bypass_is_if,
            tt.test_row6_complementary_guards_give_if_else,
            tt.test_row7_unguarded_fan_out_is_right_nested_choice, tt.test_water_tank_golden]
    failed = run_all(rows)
    verdict(2, not failed, f"7 row shapes + water tank golden; failed: {failed or 'none'}")
    assert not failed


def test_criterion_3_embedding_rows(verdict):
    rows = [tt.test_embedding_row1_action_to_action, tt.test_embedding_row2_action_to_decision,
            tt.test_embedding_row3_guard_precedes_location_update,
            tt.test_embedding_row4_decision_fans_out_to_a_choice,
            tt.test_final_location_has_no_block, tt.test_loop_of_choices_wrapper]
    failed = run_all(rows)
    verdict(3, not failed, f"4 row shapes + final rule + wrapper; failed: {failed or 'none'}")
    assert not failed


def test_criterion_4_structured_equals_embedded(verdict):
    start = time.perf_counter()
    cases = list(tt.interesting_graphs(12))
    agree = sum(structured == embedded for _, structured, embedded in cases)
    took = time.perf_counter() - start
    ok = len(cases) >= 10 and agree == len(cases) and took < 30
    verdict(4, ok, f"{agree}/{len(cases)} random graphs agree, {took:.1f}s")
    assert ok


def test_criterion_5_water_tank(verdict):
    start = time.perf_counter()
    e = get_model("watertank")
    policy = SimPolicy(seed=42)
    safe = check_safety(e.model, 1000, policy, box=e.box)
    body = e.model.program.body
    mutant = dataclasses.replace(e.model, program=Star(seq(AssignAny("f"), body.second)))
    broken = check_safety(mutant, 1000, policy, box=e.box)
    took = time.perf_counter() - start
    ok = (safe.verdict == "no_counterexample_found" and broken.verdict == "counterexample"
          and took < 60)
    verdict(5, ok, f"original: {describe(safe)}; without the test: "
                   f"{broken.verdict} in run {broken.run_index}; {took:.1f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="the obstacle may speed up after the robot commits to "
                   "braking, so the stoppable invariant is not preserved by the simulated "
                   "semantics; see the decision ledger")
def test_criterion_6_single_wheel_drive(verdict):
    start = time.perf_counter()
    e = get_model("swd1d")
    r = check_safety(e.model, 500, SimPolicy(seed=42), box=e.box)
    took = time.perf_counter() - start
    ok = r.verdict == "no_counterexample_found" and took < 120
    if ok:
        detail = describe(r)
    else:
        what = ("'r stoppable' loop invariant" if r.violated_at[1] == corpus.R_STOPPABLE
                else "safety conjunction")
        detail = (f"{what} violated in run {r.run_index} at t={r.violated_at[0]:.4f} "
                  f"(seed {r.run_seed})")
    verdict(6, ok, f"{detail}; {took:.1f}s")
    assert ok


def test_criterion_7_variant_encodings(verdict):
    start = time.perf_counter()
    points = list(grid())
    safe_agree = sum(eval_formula(corpus.SAFE_DISJUNCTION, env) ==
                     eval_formula(corpus.SAFE_ARITHMETIC, env) for env in points)
    antecedent_agree = sum(eval_formula(corpus.ANTECEDENT_DISJUNCTION, env) ==
                           eval_formula(corpus.ANTECEDENT_ARITHMETIC, env) for env in points)
    starts = [{"o_r": o, "v_r": v, "a_r": a} for o in (-1, 1) for v in (0, 1)
              for a in (-1, 0, 1)]
    reach = [project_out(enumerate_reachable_discrete(p, starts, (-1, 0, 1), 5), "a_r")
             for p in (corpus.TURN_BY_TEST, corpus.TURN_BY_CHOICE)]
    took = time.perf_counter() - start
    n = len(points)
    ok = (n == 10_000 and safe_agree == n and antecedent_agree == n and reach[0] == reach[1]
          and took < 10)
    verdict(7, ok, f"safe {safe_agree}/{n}, antecedent {antecedent_agree}/{n}, "
                   f"turning sets equal: {reach[0] == reach[1]}; {took:.1f}s")
    assert ok


def test_criterion_8_numerics(verdict):
    policy = SimPolicy(ode_max_duration=10)
    worst = 0.0
    for k, x0 in ((1.0, 0.0), (-2.5, 3.0), (0.3, -1.0), (7.0, 100.0)):
        rate = parse_formula(f"x = {k!r}").right
        seg, _ = integrate_ode([("x", rate)], {"x": x0}, parse_formula("true"), policy)
        worst = max(worst, max(abs(s.values[0] - (x0 + k * s.time)) for s in seg))
    rate = parse_formula("v = -1").right
    seg, why = integrate_ode([("v", rate)], {"v": 1.0}, parse_formula("v >= 0"), SimPolicy())
    event = abs(seg[-1].time - 1.0)
    mismatches = 0
    for name in ("watertank", "swd1d", "robot2d", "swd1d_variant_v"):
        e = get_model(name)
        for seed in range(10):
            trace = simulate_run(e.model, SimPolicy(seed=seed), box=e.box)
            mismatches += replay(e.model, trace, SimPolicy(seed=seed)).samples != trace.samples
    ok = worst <= 1e-9 and why == "domain_boundary" and event <= 1e-6 and mismatches == 0
    verdict(8, ok, f"constant-rate error {worst:.1e}, stop-event error {event:.1e}, "
                   f"{mismatches}/40 replays differ")
    assert ok


def with_placeholder(g: ActivityGraph, node_id: str) -> ActivityGraph:
    nodes = tuple(Node(n.id, "action", "Placeholder", label=f"todo {n.id}")
                  if n.id == node_id else n for n in g.nodes)
    return dataclasses.replace(g, nodes=nodes)


def placeholder_at_entry(g: ActivityGraph) -> ActivityGraph:
    first = next(e for e in g.edges if e.source == "start")
    hole = Node("hole", "action", "Placeholder", label="not yet designed")
    edges = tuple(e for e in g.edges if e is not first)
    return dataclasses.replace(g, nodes=g.nodes + (hole,), edges=(
        Edge("start", "hole"), dataclasses.replace(first, source="hole")) + edges)


def test_criterion_9_placeholder_lowering(verdict):
    graphs = []
    for name in ("watertank_graph", "robot2d_graph"):
        g = get_model(name).model
        graphs += [with_placeholder(g, n.id) for n in g.nodes if n.kind == "action"]
    graphs += [placeholder_at_entry(random_graph(seed)) for seed in range(30)]
    total, first_run = 0, 0
    for g in graphs:
        box = get_model("robot2d").box if g.name == "robot2d" else get_model("watertank").box
        for lower in (to_hybrid_program, to_automaton_embedding):
            r = check_safety(lower(g), 5, SimPolicy(seed=1), box=box)
            total += 1
            first_run += r.verdict == "counterexample" and r.runs_executed == 1
    ok = first_run == total
    verdict(9, ok, f"{first_run}/{total} lowered models fail on run 1")
    assert ok


def test_criterion_10_diff(verdict):
    identity = sum(diff_trees(get_model(n).model, get_model(n).model) == [] for n in NAMES)
    edited = parse_model(model_text("watertank").replace("/ eps", "/ (2 * eps)"))
    entries = diff_trees(get_model("watertank").model, edited)
    where = ((3, "Program"), (0, "Star"), (0, "Chop"), (0, "Chop"), (1, "Quest"))
    single = len(entries) == 1 and entries[0].kind == "Modify" and entries[0].path == where
    ok = identity == len(NAMES) and single
    verdict(10, ok, f"{identity}/{len(NAMES)} identity diffs empty; single edit gives "
                    f"{[(e.kind, e.path_text) for e in entries]}")
    assert ok
