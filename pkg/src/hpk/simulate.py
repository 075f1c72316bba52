"""Numerical execution of hybrid programs and simulation-based falsification.

Nondeterminism (choices, repetition counts, ``x := *`` values, evolution
stop times) is resolved by a resolver. :class:`RandomResolver` draws from a
seeded generator and logs every decision; :class:`ReplayResolver` feeds a
recorded log back, reproducing the run bit for bit.
"""

from __future__ import annotations

import hashlib
import io
import itertools
import math
import random
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .codegen import compile_domain, compile_formula, compile_rk4
from .errors import (
    ContinuousPresent, DivisionByZero, InitUnsatisfiableAfterRetries, PlaceholderExecuted,
    QuantifierInProgram, ReplayExhausted, UnsupportedConstruct,
)
from .printer import pretty_print
from .syntax import (
    And, Assign, AssignAny, Binary, Chop, Choice, Compare, ContinuousEvolution, IfThenElse,
    Model, Or, Placeholder, Quest, Star, Variable, WhileSym, eval_formula, eval_term,
    free_variables, is_first_order_qf, walk_programs,
)

TAGS = ("sample", "loop_boundary", "domain_exit", "test_pass", "test_fail", "end")
WHILE_LIMIT = 100_000


@dataclass(frozen=True)
class SimPolicy:
    seed: int = 0
    assign_any_range: tuple = (-10.0, 10.0)
    assign_any_retries: int = 100
    max_star_iterations: int = 10
    ode_step: float = 1e-3
    ode_max_duration: float = 100.0
    event_tolerance: float = 1e-6
    init_retries: int = 1000
    boundary_stop_probability: float = 0.5
    discard_retries: int = 100

    def __post_init__(self):
        lo, hi = (float(x) for x in self.assign_any_range)
        object.__setattr__(self, "assign_any_range", (lo, hi))
        for name in ("ode_step", "ode_max_duration", "event_tolerance",
                     "boundary_stop_probability"):
            object.__setattr__(self, name, float(getattr(self, name)))
        for name in ("seed", "assign_any_retries", "max_star_iterations", "init_retries",
                     "discard_retries"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if not lo < hi:
            raise ValueError("assign_any_range needs lo < hi")
        if min(self.assign_any_retries, self.init_retries, self.discard_retries) < 1:
            raise ValueError("retry limits must be at least 1")
        if self.max_star_iterations < 0:
            raise ValueError("max_star_iterations must be non-negative")
        if not (self.ode_step > 0 and self.event_tolerance > 0 and self.ode_max_duration > 0):
            raise ValueError("ode_step, ode_max_duration and event_tolerance must be positive")
        if not 0.0 <= self.boundary_stop_probability <= 1.0:
            raise ValueError("boundary_stop_probability must lie in [0, 1]")


class Sample(NamedTuple):
    time: float
    values: tuple
    tag: str
    path: Optional[tuple] = None


@dataclass
class Trace:
    columns: tuple
    samples: list = field(default_factory=list)
    decisions: list = field(default_factory=list)  # (kind, value) pairs

    def valuation(self, sample: Sample) -> dict:
        return dict(zip(self.columns, sample.values))

    @property
    def completed(self) -> bool:
        return bool(self.samples) and self.samples[-1].tag == "end"

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(("time",) + tuple(self.columns) + ("tag",)) + "\n")
        for s in self.samples:
            row = [format(s.time, ".17g")] + [format(v, ".17g") for v in s.values] + [s.tag]
            out.write(",".join(row) + "\n")
        return out.getvalue()


@dataclass
class CheckResult:
    verdict: str  # no_counterexample_found | counterexample | witness_found | no_witness_found
    runs_executed: int
    trace: Optional[Trace] = None
    violated_at: Optional[tuple] = None  # (time, formula)
    run_index: Optional[int] = None
    run_seed: Optional[int] = None


def run_seed(seed: int, index: int, attempt: int = 0) -> int:
    """Independent 64-bit seed for run ``index`` of a batch (resample ``attempt``)."""
    key = f"{seed}:{index}" if attempt == 0 else f"{seed}:{index}:{attempt}"
    digest = hashlib.sha256(key.encode()).digest()
    return int.from_bytes(digest[:8], "big")


# ---------------------------------------------------------------- resolvers


class RandomResolver:
    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.log = []

    def _note(self, kind, value):
        self.log.append((kind, value))
        return value

    def choose(self, n: int) -> int:
        return self._note("choice", self.rng.randrange(n))

    def star(self, limit: int) -> int:
        return self._note("star", self.rng.randint(0, limit))

    def init(self, sampler) -> tuple:
        return self._note("init", sampler(self.rng))

    def assign_any(self, sampler):
        return self._note("assign_any", sampler(self.rng))

    def stop(self, duration: float, p_boundary: float) -> float:
        if self.rng.random() < p_boundary:
            return self._note("stop", duration)
        return self._note("stop", self.rng.uniform(0.0, duration))


class ReplayResolver:
    """Feeds back a decision log recorded by :class:`RandomResolver`."""

    def __init__(self, decisions):
        self.decisions = list(decisions)
        self.log = []
        self._pos = 0

    def _next(self, kind):
        if self._pos >= len(self.decisions):
            raise ReplayExhausted(f"log exhausted while resolving {kind}")
        got, value = self.decisions[self._pos]
        if got != kind:
            raise ReplayExhausted(f"log has {got} where the program needs {kind}")
        self._pos += 1
        self.log.append((kind, value))
        return value

    def choose(self, n):
        return self._next("choice")

    def star(self, limit):
        return self._next("star")

    def init(self, sampler):
        return self._next("init")

    def assign_any(self, sampler):
        return self._next("assign_any")

    def stop(self, duration, p_boundary):
        return self._next("stop")


# ---------------------------------------------------------------- ODE


def _conjuncts(f) -> list:
    if isinstance(f, And):
        return _conjuncts(f.left) + _conjuncts(f.right)
    return [f]


def _safe_call(fn, values) -> bool:
    try:
        return bool(fn(*values))
    except DivisionByZero:
        return False


def _snap(ode, columns, good, bad):
    """Move an evolved variable exactly onto the boundary of the conjunct that
    became false, so later exact tests such as ``?v = 0`` can succeed."""
    evolved = {v for v, _ in ode.equations}
    values = list(good)
    for atom in _conjuncts(ode.domain):
        if not isinstance(atom, Compare) or atom.rel not in ("<=", ">=", "="):
            continue
        if isinstance(atom.left, Variable) and atom.left.name in evolved:
            var, other = atom.left.name, atom.right
        elif isinstance(atom.right, Variable) and atom.right.name in evolved:
            var, other = atom.right.name, atom.left
        else:
            continue
        if var in free_variables(other):
            continue
        test = compile_formula(atom, columns)
        if not _safe_call(test, good) or _safe_call(test, bad):
            continue
        try:
            target = eval_term(other, dict(zip(columns, values)))
        except DivisionByZero:
            continue
        idx = columns.index(var)
        old = values[idx]
        values[idx] = target
        if not _safe_call(compile_domain(ode.domain, columns, tuple(sorted(evolved))), values):
            values[idx] = old
    return tuple(values)


def _integrate(ode: ContinuousEvolution, columns: tuple, start: tuple, policy: SimPolicy):
    evolved = tuple(sorted(v for v, _ in ode.equations))
    step = compile_rk4(ode.equations, columns)
    inside = compile_domain(ode.domain, columns, evolved)
    h = policy.ode_step
    segment = [Sample(0.0, start, "sample")]
    if not _safe_call(inside, start):
        return [Sample(0.0, start, "domain_exit")], "domain_boundary"
    n_steps = max(1, math.ceil(policy.ode_max_duration / h - 1e-9))
    y, t = start, 0.0
    for k in range(1, n_steps + 1):
        t_next = k * h if k < n_steps else policy.ode_max_duration
        dt = t_next - t
        try:
            y_next = step(dt, *y)
        except DivisionByZero:
            return segment, "division_by_zero"
        if _safe_call(inside, y_next):
            y, t = y_next, t_next
            segment.append(Sample(t, y, "sample"))
            continue
        # bisect the failing step to localise the boundary crossing
        lo, hi = 0.0, dt
        while hi - lo > policy.event_tolerance:
            mid = 0.5 * (lo + hi)
            try:
                ok = _safe_call(inside, step(mid, *y))
            except DivisionByZero:
                ok = False
            if ok:
                lo = mid
            else:
                hi = mid
        if lo > 0.0:
            good = step(lo, *y)
        else:
            good = y
        try:
            bad = step(hi, *y)
        except DivisionByZero:
            bad = None
        if bad is not None:
            good = _snap(ode, columns, good, bad)
        if lo > 0.0 or segment[-1].values != good:
            segment.append(Sample(t + lo, good, "domain_exit"))
        else:
            segment[-1] = segment[-1]._replace(tag="domain_exit")
        return segment, "domain_boundary"
    return segment, "max_duration"


def integrate_ode(eqs, start: dict, domain, policy: SimPolicy):
    """Integrate ``eqs`` from ``start`` until the domain boundary or the time limit.

    Returns ``(segment, exit)`` where ``segment`` is a list of :class:`Sample`
    with times relative to the start and ``exit`` is one of
    ``domain_boundary``, ``max_duration`` or ``division_by_zero``.
    """
    ode = ContinuousEvolution(tuple(eqs), domain)
    columns = tuple(start)
    values = tuple(float(start[c]) for c in columns)
    return _integrate(ode, columns, values, policy)


# -------------------------------------------------------------- sampling


def _interval_hints(atoms, name: str, env: dict):
    """Bounds and equality candidates for ``name`` implied by comparison atoms
    whose other side is already evaluable in ``env``."""
    lo, hi, candidates = -math.inf, math.inf, []
    for atom in atoms:
        if isinstance(atom, Or):
            # each disjunct may pin the value; its bounds hold only on that side
            for side in (atom.left, atom.right):
                candidates.extend(_interval_hints(_conjuncts(side), name, env)[2])
            continue
        if not isinstance(atom, Compare):
            continue
        rel, left, right = atom.rel, atom.left, atom.right
        if left != Variable(name):
            if right == Variable(name):
                left, right = right, left
                rel = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "="}[rel]
            elif left == Binary("*", Variable(name), Variable(name)) and rel == "=":
                pass
            else:
                continue
        if not free_variables(right) <= env.keys() or name in free_variables(right):
            continue
        try:
            bound = eval_term(right, env)
        except DivisionByZero:
            continue
        if isinstance(left, Binary):
            if bound >= 0:
                root = math.sqrt(bound)
                candidates.extend([root, -root] if root else [root])
        elif rel in ("<", "<="):
            hi = min(hi, bound)
        elif rel in (">", ">="):
            lo = max(lo, bound)
        else:
            candidates.append(bound)
    return lo, hi, candidates


def _draw(rng, base, atoms, name, env):
    lo, hi, candidates = _interval_hints(atoms, name, env)
    if candidates and rng.random() < 0.5:
        return rng.choice(candidates)
    lo, hi = max(lo, base[0]), min(hi, base[1])
    if lo > hi:
        lo, hi = base
    return rng.uniform(lo, hi)


def _init_sampler(m: Model, policy: SimPolicy, box: dict):
    atoms = _conjuncts(m.init)
    order = list(m.constants) + list(m.variables)

    def sample(rng):
        for _ in range(policy.init_retries):
            env = {}
            for name in order:
                base = tuple(box.get(name, policy.assign_any_range))
                if base[0] == base[1]:
                    env[name] = float(base[0])
                else:
                    env[name] = _draw(rng, base, atoms, name, env)
            try:
                if eval_formula(m.init, env):
                    return tuple(env[c] for c in m.symbols)
            except DivisionByZero:
                pass
        raise InitUnsatisfiableAfterRetries(policy.init_retries)

    return sample


# ------------------------------------------------------------- execution


class _TestFailed(Exception):
    pass


def _chop_items(p, path):
    if isinstance(p, Chop):
        return _chop_items(p.first, path + (0,)) + _chop_items(p.second, path + (1,))
    return [(p, path)]


def _choice_items(p, path):
    if isinstance(p, Choice):
        return _choice_items(p.left, path + (0,)) + _choice_items(p.right, path + (1,))
    return [(p, path)]


def _check_executable(m: Model):
    for path, node in walk_programs(m.program):
        conds = []
        if isinstance(node, (Quest, IfThenElse, WhileSym)):
            conds.append(node.cond)
        elif isinstance(node, ContinuousEvolution):
            conds.append(node.domain)
        if any(not is_first_order_qf(c) for c in conds):
            raise QuantifierInProgram(f"{type(node).__name__} at {path}")
        if isinstance(node, WhileSym):
            for _, inner in walk_programs(node.body):
                if isinstance(inner, ContinuousEvolution) and \
                        not any(isinstance(a, Compare) for a in _conjuncts(inner.domain)):
                    raise UnsupportedConstruct("unbounded continuous evolution inside while")


class _Run:
    def __init__(self, m: Model, policy: SimPolicy, resolver, box):
        self.m = m
        self.policy = policy
        self.resolver = resolver
        self.box = box or {}
        self.columns = m.symbols
        self.env = {}
        self.t = 0.0
        self.trace = Trace(self.columns, decisions=resolver.log)

    def emit(self, tag, path=None):
        values = tuple(self.env[c] for c in self.columns)
        self.trace.samples.append(Sample(self.t, values, tag, path))

    def test(self, cond) -> bool:
        try:
            return eval_formula(cond, self.env)
        except DivisionByZero:
            return False

    def mark(self):
        return dict(self.env), self.t, len(self.trace.samples)

    def rollback(self, mark):
        env, self.t, n = mark
        self.env = dict(env)
        del self.trace.samples[n:]

    def fail(self):
        self.emit("test_fail")
        raise _TestFailed()

    def execute(self) -> Trace:
        values = self.resolver.init(_init_sampler(self.m, self.policy, self.box))
        self.env = dict(zip(self.columns, values))
        self.emit("sample")
        try:
            self.run(self.m.program, ())
        except _TestFailed:
            return self.trace
        except PlaceholderExecuted as exc:
            exc.trace = self.trace
            raise
        self.emit("end")
        return self.trace

    def run(self, p, path):
        if isinstance(p, Chop):
            self.sequence(_chop_items(p, path))
        elif isinstance(p, Choice):
            # A branch whose test fails has no runs; roll back and try the others.
            options = _choice_items(p, path)
            while options:
                branch, sub = options.pop(self.resolver.choose(len(options)))
                mark = self.mark()
                try:
                    self.run(branch, sub)
                    return
                except _TestFailed:
                    self.rollback(mark)
            self.fail()
        elif isinstance(p, Star):
            count = self.resolver.star(self.policy.max_star_iterations)
            self.emit("loop_boundary", path)
            for _ in range(count):
                mark = self.mark()
                try:
                    self.run(p.body, path + (0,))
                except _TestFailed:
                    # fewer iterations are an equally legal run
                    self.rollback(mark)
                    break
                self.emit("loop_boundary", path)
        elif isinstance(p, Assign):
            try:
                self.env[p.var] = eval_term(p.term, self.env)
            except DivisionByZero:
                self.fail()
        elif isinstance(p, AssignAny):
            self.assign_any(p.var, [])
        elif isinstance(p, Quest):
            if not self.test(p.cond):
                self.fail()
            self.emit("test_pass")
        elif isinstance(p, ContinuousEvolution):
            self.evolve(p)
        elif isinstance(p, IfThenElse):
            if self.test(p.cond):
                self.run(p.then, path + (0,))
            elif p.orelse is not None:
                self.run(p.orelse, path + (1,))
        elif isinstance(p, WhileSym):
            for _ in range(WHILE_LIMIT):
                if not self.test(p.cond):
                    return
                self.run(p.body, path + (0,))
            raise UnsupportedConstruct(f"while loop exceeded {WHILE_LIMIT} iterations")
        elif isinstance(p, Placeholder):
            self.emit("sample", path)
            raise PlaceholderExecuted(p.label)
        else:
            raise TypeError(f"not a hybrid program: {p!r}")

    def sequence(self, items):
        k = 0
        while k < len(items):
            node, path = items[k]
            if isinstance(node, AssignAny):
                j = k + 1
                while j < len(items) and isinstance(items[j][0], Quest):
                    j += 1
                self.assign_any(node.var, [q.cond for q, _ in items[k + 1:j]])
            else:
                self.run(node, path)
            k += 1

    def assign_any(self, var, chain):
        atoms = [a for cond in chain for a in _conjuncts(cond)]
        base = self.policy.assign_any_range
        env = dict(self.env)
        others = {k: v for k, v in env.items() if k != var}

        def sampler(rng):
            for _ in range(self.policy.assign_any_retries):
                env[var] = _draw(rng, base, atoms, var, others)
                if all(self.test_in(c, env) for c in chain):
                    return env[var]
            return None

        value = self.resolver.assign_any(sampler)
        if value is None:
            self.fail()
        self.env[var] = value

    @staticmethod
    def test_in(cond, env) -> bool:
        try:
            return eval_formula(cond, env)
        except DivisionByZero:
            return False

    def evolve(self, ode: ContinuousEvolution):
        if not self.test(ode.domain):
            self.fail()
        start = tuple(self.env[c] for c in self.columns)
        segment, _ = _integrate(ode, self.columns, start, self.policy)
        duration = segment[-1].time
        stop = self.resolver.stop(duration, self.policy.boundary_stop_probability)
        if stop >= duration:
            kept = segment[1:]
        else:
            j = max(i for i, s in enumerate(segment) if s.time <= stop)
            kept = [s._replace(tag="sample") for s in segment[1:j + 1]]
            base = segment[j]
            if stop > base.time:
                step = compile_rk4(ode.equations, self.columns)
                inside = compile_domain(ode.domain, self.columns,
                                        tuple(sorted(v for v, _ in ode.equations)))
                try:
                    end = step(stop - base.time, *base.values)
                    if _safe_call(inside, end):
                        kept.append(Sample(stop, end, "sample"))
                except DivisionByZero:
                    pass
        t0 = self.t
        for s in kept:
            self.trace.samples.append(Sample(t0 + s.time, s.values, s.tag))
        final = kept[-1] if kept else segment[0]
        self.env = dict(zip(self.columns, final.values))
        self.t = t0 + final.time


def simulate_run(m: Model, policy: SimPolicy, resolver=None, box=None) -> Trace:
    """Execute one run of ``m.program`` from a sampled initial state."""
    _check_executable(m)
    if resolver is None:
        resolver = RandomResolver(policy.seed)
    return _Run(m, policy, resolver, box).execute()


def replay(m: Model, trace: Trace, policy: Optional[SimPolicy] = None) -> Trace:
    return simulate_run(m, policy or SimPolicy(), ReplayResolver(trace.decisions))


# ---------------------------------------------------------------- checks


def tail_star_paths(p, path=()) -> set:
    """Stars whose loop boundaries are end states of the whole program."""
    if isinstance(p, Star):
        return {path} | tail_star_paths(p.body, path + (0,))
    if isinstance(p, Chop):
        return tail_star_paths(p.second, path + (1,))
    if isinstance(p, Choice):
        return tail_star_paths(p.left, path + (0,)) | tail_star_paths(p.right, path + (1,))
    if isinstance(p, IfThenElse):
        out = tail_star_paths(p.then, path + (0,))
        if p.orelse is not None:
            out |= tail_star_paths(p.orelse, path + (1,))
        return out
    return set()


def _first_violation(m: Model, trace: Trace, goal, tails):
    for s in trace.samples:
        obligations = []
        if s.tag == "end" or (s.tag == "loop_boundary" and s.path in tails):
            obligations.append(goal)
        if s.tag == "loop_boundary" and s.path in m.loop_invariants:
            obligations.append(m.loop_invariants[s.path])
        env = trace.valuation(s)
        for f in obligations:
            try:
                holds = eval_formula(f, env)
            except DivisionByZero:
                holds = False
            if not holds:
                return s.time, f
    return None


def _attempts(m: Model, policy: SimPolicy, box, index: int):
    """Traces for run ``index`` of a batch: runs aborted by a failed test are
    resampled, up to ``policy.discard_retries`` attempts, until one completes.

    Aborted prefixes are yielded too; the loop boundaries they reached are
    reachable states all the same.
    """
    for attempt in range(policy.discard_retries):
        seed = run_seed(policy.seed, index, attempt)
        try:
            trace = simulate_run(m, policy, RandomResolver(seed), box)
        except PlaceholderExecuted as exc:
            exc.seed = seed
            raise
        yield seed, trace
        if trace.completed:
            return


def _require_qf(f, what):
    if not is_first_order_qf(f):
        raise UnsupportedConstruct(f"{what} must be quantifier- and modality-free")


def check_safety(m: Model, runs: int, policy: SimPolicy, box=None) -> CheckResult:
    """Search for a run that reaches an end state violating ``m.safety`` or
    a loop boundary violating that loop's invariant.

    Finding nothing is inconclusive; it is never a proof.
    """
    _require_qf(m.safety, "safety")
    tails = tail_star_paths(m.program)
    for i in range(runs):
        try:
            for seed, trace in _attempts(m, policy, box, i):
                hit = _first_violation(m, trace, m.safety, tails)
                if hit is not None:
                    return CheckResult("counterexample", i + 1, trace, hit, i, seed)
        except PlaceholderExecuted as exc:
            trace, seed = exc.trace, exc.seed
            hit = _first_violation(m, trace, m.safety, tails)
            if hit is None:
                last = trace.samples[-1]
                if not eval_formula(m.safety, trace.valuation(last)):
                    hit = (last.time, m.safety)
            if hit is None:
                raise
            return CheckResult("counterexample", i + 1, trace, hit, i, seed)
    return CheckResult("no_counterexample_found", runs)


def check_diamond(m: Model, runs: int, policy: SimPolicy, goal=None, box=None) -> CheckResult:
    """Search for a run whose end state satisfies ``goal`` (default: ``m.safety``)."""
    goal = m.safety if goal is None else goal
    _require_qf(goal, "goal")
    tails = tail_star_paths(m.program)
    for i in range(runs):
        for seed, trace in _attempts(m, policy, box, i):
            for s in trace.samples:
                if s.tag == "end" or (s.tag == "loop_boundary" and s.path in tails):
                    try:
                        if eval_formula(goal, trace.valuation(s)):
                            return CheckResult("witness_found", i + 1, trace, (s.time, goal),
                                               i, seed)
                    except DivisionByZero:
                        pass
    return CheckResult("no_witness_found", runs)


def describe(result: CheckResult) -> str:
    if result.verdict == "no_counterexample_found":
        return f"no counterexample in {result.runs_executed} runs"
    if result.verdict == "no_witness_found":
        return f"no witness in {result.runs_executed} runs"
    time, formula = result.violated_at
    what = "counterexample" if result.verdict == "counterexample" else "witness"
    return (f"{what} in run {result.run_index} (seed {result.run_seed}) at t={time:.17g}: "
            f"{pretty_print(formula)}")


# ------------------------------------------------------ discrete reachability


def _state(env: dict) -> frozenset:
    return frozenset(env.items())


def _post(p, states: set, values: tuple, depth: int) -> set:
    if isinstance(p, Chop):
        return _post(p.second, _post(p.first, states, values, depth), values, depth)
    if isinstance(p, Choice):
        return _post(p.left, states, values, depth) | _post(p.right, states, values, depth)
    if isinstance(p, Star):
        reached, frontier = set(states), set(states)
        for _ in range(depth):
            frontier = _post(p.body, frontier, values, depth) - reached
            if not frontier:
                break
            reached |= frontier
        return reached
    if isinstance(p, Assign):
        out = set()
        for s in states:
            env = dict(s)
            try:
                env[p.var] = eval_term(p.term, env)
            except DivisionByZero:
                continue
            out.add(_state(env))
        return out
    if isinstance(p, AssignAny):
        return {_state({**dict(s), p.var: v}) for s in states for v in values}
    if isinstance(p, Quest):
        return {s for s in states if _holds(p.cond, s)}
    if isinstance(p, IfThenElse):
        yes = {s for s in states if _holds(p.cond, s)}
        no = states - yes
        out = _post(p.then, yes, values, depth)
        return out | (_post(p.orelse, no, values, depth) if p.orelse is not None else no)
    if isinstance(p, WhileSym):
        done, current, seen = set(), set(states), set()
        for _ in range(depth + 1):
            yes = {s for s in current if _holds(p.cond, s)}
            done |= current - yes
            seen |= yes
            current = _post(p.body, yes, values, depth) - seen
            if not current:
                break
        return done
    if isinstance(p, ContinuousEvolution):
        raise ContinuousPresent()
    if isinstance(p, Placeholder):
        raise PlaceholderExecuted(p.label)
    raise TypeError(f"not a hybrid program: {p!r}")


def _holds(cond, state) -> bool:
    try:
        return eval_formula(cond, dict(state))
    except DivisionByZero:
        return False


def enumerate_reachable_discrete(p, initial, domain_values, star_depth: int) -> set:
    """Exact set of end states of ``p`` from the ``initial`` valuations.

    States are returned as frozensets of ``(name, value)`` pairs. ``x := *``
    ranges over ``domain_values``; each loop runs at most ``star_depth``
    iterations or until no new state appears.
    """
    for _, node in walk_programs(p):
        if isinstance(node, ContinuousEvolution):
            raise ContinuousPresent()
    values = tuple(float(v) for v in domain_values)
    start = {_state({k: float(v) for k, v in dict(s).items()}) for s in initial}
    return _post(p, start, values, star_depth)


def project_out(states, name: str) -> set:
    return {frozenset((k, v) for k, v in s if k != name) for s in states}


def initial_states(m: Model, domain_values) -> list:
    """All valuations of ``m``'s symbols over ``domain_values`` satisfying ``m.init``."""
    values = tuple(float(v) for v in domain_values)
    out = []
    for combo in itertools.product(values, repeat=len(m.symbols)):
        env = dict(zip(m.symbols, combo))
        if _holds(m.init, env):
            out.append(env)
    return out
