"""Example models: a water tank, a 2-D robot avoiding an obstacle, and a 1-D
single-wheel-drive robot with five modelling variants.

Every entry is built here from AST constructors; the files under
``hpk/models`` are their printed form and must parse back to the same trees.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .errors import ModelError, UnknownName
from .graph import ActivityGraph, Edge, Node
from .syntax import (
    And, Assign, AssignAny, Binary, Call, Compare, ContinuousEvolution, Implies, Model, Not,
    Number, Or, Quest, Star, Unary, Variable, choice, conj, seq, validate_model,
    written_variables,
)

# ------------------------------------------------------------ term helpers


def _v(name):
    return Variable(name)


def _n(value):
    return Number(value)


def _add(a, b):
    return Binary("+", a, b)


def _sub(a, b):
    return Binary("-", a, b)


def _mul(a, b):
    return Binary("*", a, b)


def _div(a, b):
    return Binary("/", a, b)


def _sq(a):
    return _mul(a, a)


def _cmp(rel):
    return lambda a, b: Compare(rel, a, b)


_lt, _le, _eq, _ge, _gt = (_cmp(r) for r in ("<", "<=", "=", ">=", ">"))

# ------------------------------------------------------------- water tank

_x, _f, _c, _M, _eps = (_v(s) for s in ("x", "f", "c", "M", "eps"))

WATERTANK_LEVEL = conj(_le(_n(0), _x), _le(_x, _M))
WATERTANK_GUARD = _le(_f, _div(_sub(_M, _x), _eps))
WATERTANK_DYNAMICS = seq(
    Assign("c", _n(0)),
    ContinuousEvolution((("x", _f), ("c", _n(1))), conj(_le(_c, _eps), _ge(_x, _n(0)))),
)
_WT_INIT = conj(_le(_n(0), _x), _le(_x, _M), _gt(_eps, _n(0)))


def _watertank_model() -> Model:
    body = seq(AssignAny("f"), Quest(WATERTANK_GUARD), WATERTANK_DYNAMICS)
    return Model("watertank", ("x", "f", "c"), ("M", "eps"), _WT_INIT, Star(body),
                 WATERTANK_LEVEL, {(): WATERTANK_LEVEL})


def _watertank_graph() -> ActivityGraph:
    nodes = (
        Node("start", "initial"),
        Node("loop", "decision"),
        Node("ctrl", "action", "AssignAny", AssignAny("f")),
        Node("dyn", "action", "Dynamics", WATERTANK_DYNAMICS),
        Node("join", "merge"),
        Node("stop", "final"),
    )
    edges = (
        Edge("start", "loop"),
        Edge("loop", "ctrl"),
        Edge("ctrl", "dyn", WATERTANK_GUARD),
        Edge("dyn", "join"),
        Edge("join", "stop"),
        Edge("join", "loop", repeat=True, invariant=WATERTANK_LEVEL),
        Edge("loop", "join"),
    )
    return ActivityGraph("watertank", ("x", "f", "c"), ("M", "eps"), _WT_INIT,
                         WATERTANK_LEVEL, nodes, edges)


# ------------------------------------------------------------ 2-D robot

_rx, _ry, _v_, _A, _B = (_v(s) for s in ("x", "y", "v", "A", "B"))
_xo, _yo = _v("xo"), _v("yo")


def _braking(v, B):
    return _div(_sq(v), _mul(_n(2), B))


def _reaction(v, A, B, eps):
    # (A/B + 1) * (A/2 * eps^2 + eps * v)
    return _mul(_add(_div(A, B), _n(1)),
                _add(_mul(_mul(_div(A, _n(2)), eps), eps), _mul(eps, v)))


_INF_DIST = Call("max", (Call("abs", (_sub(_rx, _xo),)), Call("abs", (_sub(_ry, _yo),))))
ROBOT_SAFE_TEST = _gt(_INF_DIST, _add(_braking(_v_, _B), _reaction(_v_, _A, _B, _eps)))
ROBOT_INVARIANT = conj(_ge(_v_, _n(0)), _gt(_INF_DIST, _braking(_v_, _B)))
ROBOT_SAFETY = _gt(_add(_sq(_sub(_rx, _xo)), _sq(_sub(_ry, _yo))), _n(0))
ROBOT_INIT = conj(_ge(_A, _n(0)), _gt(_B, _n(0)), _gt(_eps, _n(0)), _ge(_v_, _n(0)),
                  _gt(_INF_DIST, _braking(_v_, _B)))
ROBOT_ACC_RANGE = conj(_le(Unary("-", _B), _v("a")), _le(_v("a"), _A))
ROBOT_CURVE_TEST = Not(_eq(_v("r"), _n(0)))
_dx, _dy, _r = _v("dx"), _v("dy"), _v("r")
ROBOT_DYNAMICS = seq(
    Assign("c", _n(0)),
    ContinuousEvolution(
        (
            ("x", _mul(_v_, _dx)),
            ("y", _mul(_v_, _dy)),
            ("dx", _div(_mul(Unary("-", _v_), _dy), _r)),
            ("dy", _div(_mul(_v_, _dx), _r)),
            ("v", _v("a")),
            ("c", _n(1)),
        ),
        conj(_ge(_v_, _n(0)), _le(_c, _eps)),
    ),
)
_ROBOT_VARS = ("x", "y", "v", "dx", "dy", "a", "r", "xo", "yo", "c")
_ROBOT_CONSTS = ("A", "B", "eps")


def _robot_model() -> Model:
    sense = seq(AssignAny("xo"), AssignAny("yo"), Quest(ROBOT_SAFE_TEST),
                AssignAny("r"), Quest(ROBOT_CURVE_TEST),
                AssignAny("a"), Quest(ROBOT_ACC_RANGE))
    brake = Assign("a", Unary("-", _B))
    stay = seq(Quest(_eq(_v_, _n(0))), Assign("a", _n(0)))
    body = seq(choice(sense, brake, stay), ROBOT_DYNAMICS)
    program = seq(body, Star(body))
    return Model("robot2d", _ROBOT_VARS, _ROBOT_CONSTS, ROBOT_INIT, program, ROBOT_SAFETY,
                 {(1,): ROBOT_INVARIANT})


def _robot_graph() -> ActivityGraph:
    nodes = (
        Node("start", "initial"),
        Node("loop", "decision"),
        Node("cdec", "decision"),
        Node("sense_x", "action", "AssignAny", AssignAny("xo")),
        Node("sense_y", "action", "AssignAny", AssignAny("yo")),
        Node("curve", "action", "AssignAny", AssignAny("r")),
        Node("acc", "action", "AssignAny", AssignAny("a")),
        Node("brake", "action", "AssignTerm", Assign("a", Unary("-", _B))),
        Node("stop", "action", "AssignTerm", Assign("a", _n(0))),
        Node("cjoin", "merge"),
        Node("dyn", "action", "Dynamics", ROBOT_DYNAMICS),
        Node("join", "merge"),
        Node("done", "final"),
    )
    edges = (
        Edge("start", "loop"),
        Edge("loop", "cdec"),
        Edge("cdec", "sense_x"),
        Edge("cdec", "brake"),
        Edge("cdec", "stop", _eq(_v_, _n(0))),
        Edge("sense_x", "sense_y"),
        Edge("sense_y", "curve", ROBOT_SAFE_TEST),
        Edge("curve", "acc", ROBOT_CURVE_TEST),
        Edge("acc", "cjoin", ROBOT_ACC_RANGE),
        Edge("brake", "cjoin"),
        Edge("stop", "cjoin"),
        Edge("cjoin", "dyn"),
        Edge("dyn", "join"),
        Edge("join", "done"),
        Edge("join", "loop", repeat=True, invariant=ROBOT_INVARIANT),
    )
    return ActivityGraph("robot2d", _ROBOT_VARS, _ROBOT_CONSTS, ROBOT_INIT, ROBOT_SAFETY,
                         nodes, edges)


# ----------------------------------------------- 1-D single wheel drive

_xr, _vr, _ar, _or = (_v(s) for s in ("x_r", "v_r", "a_r", "o_r"))
_xo1, _vo, _oo, _t = (_v(s) for s in ("x_o", "v_o", "o_o", "t"))
_V, _xlo, _xhi = _v("V"), _v("x_lo"), _v("x_hi")

SWD_MARGIN = _add(_braking(_vr, _B), _reaction(_vr, _A, _B, _eps))
_BACKWARD = _div(_sub(_n(1), _or), _n(2))  # (1 - o_r)/2
_FORWARD = _div(_add(_n(1), _or), _n(2))  # (1 + o_r)/2

SAFE_ARITHMETIC = conj(
    _lt(_add(_xlo, _mul(_BACKWARD, SWD_MARGIN)), _xr),
    _lt(_xr, _sub(_xhi, _mul(_FORWARD, SWD_MARGIN))),
)
SAFE_DISJUNCTION = Or(
    And(_eq(_or, Unary("-", _n(1))), _lt(_add(_xlo, SWD_MARGIN), _xr)),
    And(_eq(_or, _n(1)), _lt(_xr, _sub(_xhi, SWD_MARGIN))),
)
OBSTACLE_CLEARANCE = _ge(
    Call("abs", (_sub(_xr, _xo1),)),
    _add(SWD_MARGIN, _mul(_V, _add(_eps, _div(_add(_vr, _mul(_A, _eps)), _B)))),
)
SWD_SAFE = And(SAFE_ARITHMETIC, OBSTACLE_CLEARANCE)

_BOUNDS_STOPPABLE = conj(
    _lt(_add(_xlo, _mul(_BACKWARD, _braking(_vr, _B))), _xr),
    _lt(_xr, _sub(_xhi, _mul(_FORWARD, _braking(_vr, _B)))),
)
R_STOPPABLE = conj(
    _ge(Call("abs", (_sub(_xr, _xo1),)), _add(_braking(_vr, _B), _div(_mul(_vo, _V), _B))),
    _BOUNDS_STOPPABLE,
    _ge(_vr, _n(0)),
    _eq(_sq(_or), _n(1)),
    _eq(_sq(_oo), _n(1)),
    _le(_n(0), _vo),
    _le(_vo, _V),
)
SWD_SAFETY = conj(
    Implies(_gt(_vr, _n(0)), _gt(Call("abs", (_sub(_xr, _xo1),)), _n(0))),
    _lt(_xlo, _xr),
    _lt(_xr, _xhi),
)
_SWD_PARAMS = conj(_ge(_A, _n(0)), _gt(_B, _n(0)), _gt(_eps, _n(0)), _ge(_V, _n(0)))

_BRAKE = Assign("a_r", Unary("-", _B))
_ACC_RANGE = conj(_le(Unary("-", _B), _ar), _le(_ar, _A))
TURN_BY_TEST = seq(Quest(_eq(_vr, _n(0))), Assign("a_r", _n(0)), AssignAny("o_r"),
                   Quest(_eq(_sq(_or), _n(1))))
TURN_BY_CHOICE = choice(
    seq(Quest(_eq(_vr, _n(0))), Assign("a_r", _n(0)), Assign("o_r", Unary("-", _or))),
    seq(Quest(_eq(_vr, _n(0))), Assign("a_r", _n(0))),
)


def _ctrl_r(safe, turn):
    return choice(_BRAKE, seq(Quest(safe), AssignAny("a_r"), Quest(_ACC_RANGE)), turn)


CTRL_R = _ctrl_r(SWD_SAFE, TURN_BY_TEST)
CTRL_O = choice(
    seq(Quest(_eq(_vo, _n(0))), AssignAny("o_o"), Quest(_eq(_sq(_oo), _n(1)))),
    seq(AssignAny("v_o"), Quest(conj(_le(_n(0), _vo), _le(_vo, _V)))),
)


def parallel_as_sequence(left, right):
    """Sequential reading of a parallel composition of two controllers.

    Only valid when they write disjoint variables, so that order is immaterial.
    """
    clash = written_variables(left) & written_variables(right)
    if clash:
        raise ModelError(f"parallel controllers both write {', '.join(sorted(clash))}")
    return seq(left, right)


SWD_DYNAMICS = seq(
    Assign("t", _n(0)),
    ContinuousEvolution(
        (("x_r", _mul(_or, _vr)), ("v_r", _ar), ("x_o", _mul(_oo, _vo)), ("t", _n(1))),
        conj(_ge(_vr, _n(0)), _ge(_vo, _n(0)), _le(_t, _eps)),
    ),
)


def _swd_model() -> Model:
    body = seq(parallel_as_sequence(CTRL_R, CTRL_O), SWD_DYNAMICS)
    return Model(
        "swd1d",
        ("x_r", "v_r", "a_r", "o_r", "x_o", "v_o", "o_o", "t"),
        ("A", "B", "V", "eps", "x_lo", "x_hi"),
        And(_SWD_PARAMS, R_STOPPABLE),
        Star(body),
        SWD_SAFETY,
        {(): R_STOPPABLE},
    )


# variants without the obstacle
BOUNDS_SAFETY = conj(_lt(_xlo, _xr), _lt(_xr, _xhi))
VARIANT_INVARIANT = conj(_ge(_vr, _n(0)), _eq(_sq(_or), _n(1)), _BOUNDS_STOPPABLE)
VARIANT_DYNAMICS = seq(
    Assign("t", _n(0)),
    ContinuousEvolution(
        (("x_r", _mul(_or, _vr)), ("v_r", _ar), ("t", _n(1))),
        conj(_ge(_vr, _n(0)), _le(_t, _eps)),
    ),
)
_VARIANT_PARAMS = conj(_ge(_A, _n(0)), _gt(_B, _n(0)), _gt(_eps, _n(0)))
ANTECEDENT_FORWARD = _eq(_or, _n(1))
ANTECEDENT_DISJUNCTION = Or(_eq(_or, _n(1)), _eq(_or, Unary("-", _n(1))))
ANTECEDENT_ARITHMETIC = _eq(_sq(_or), _n(1))

_VARIANTS = {
    # name: (start direction, safe encoding, turning action, description)
    "i": (ANTECEDENT_FORWARD, SAFE_DISJUNCTION, TURN_BY_CHOICE,
          "assumed starting direction, orientation by disjunction"),
    "ii": (ANTECEDENT_FORWARD, SAFE_ARITHMETIC, TURN_BY_CHOICE,
           "orientation by arithmetic"),
    "iii": (ANTECEDENT_DISJUNCTION, SAFE_ARITHMETIC, TURN_BY_CHOICE,
            "arbitrary starting direction by disjunction"),
    "iv": (ANTECEDENT_ARITHMETIC, SAFE_ARITHMETIC, TURN_BY_CHOICE,
           "arbitrary starting direction by arithmetic"),
    "v": (ANTECEDENT_ARITHMETIC, SAFE_ARITHMETIC, TURN_BY_TEST,
          "turning choice replaced by arithmetic"),
}


def _variant_model(key: str) -> Model:
    start, safe, turn, _ = _VARIANTS[key]
    body = seq(_ctrl_r(safe, turn), VARIANT_DYNAMICS)
    return Model(
        f"swd1d_variant_{key}",
        ("x_r", "v_r", "a_r", "o_r", "t"),
        ("A", "B", "eps", "x_lo", "x_hi"),
        conj(_VARIANT_PARAMS, start, _ge(_vr, _n(0)), _BOUNDS_STOPPABLE),
        Star(body),
        BOUNDS_SAFETY,
        {(): VARIANT_INVARIANT},
    )


# ---------------------------------------------------------------- registry


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    model: object  # Model or ActivityGraph
    box: dict  # symbol -> (lo, hi) for initial-state sampling
    description: str

    @property
    def filename(self) -> str:
        ext = "hpg" if isinstance(self.model, ActivityGraph) else "hpk"
        return f"{self.name.removesuffix('_graph')}.{ext}"


_WT_BOX = {"M": (1.0, 1.0), "eps": (0.5, 0.5), "x": (0.0, 1.0)}
_ROBOT_BOX = {"A": (1.0, 1.0), "B": (1.0, 1.0), "eps": (0.5, 0.5), "v": (0.0, 2.0),
              "dx": (1.0, 1.0), "dy": (0.0, 0.0), "r": (0.5, 10.0), "a": (-1.0, 1.0),
              "x": (-10.0, 10.0), "y": (-10.0, 10.0), "xo": (-10.0, 10.0),
              "yo": (-10.0, 10.0), "c": (0.0, 0.5)}
_SWD_BOX = {"A": (1.0, 1.0), "B": (1.0, 1.0), "V": (0.5, 0.5), "eps": (0.5, 0.5),
            "x_lo": (0.0, 0.0), "x_hi": (20.0, 20.0), "x_r": (0.0, 20.0), "x_o": (0.0, 20.0),
            "v_r": (0.0, 2.0), "v_o": (0.0, 0.5), "o_r": (-1.0, 1.0), "o_o": (-1.0, 1.0),
            "a_r": (-1.0, 1.0), "t": (0.0, 0.5)}
_VARIANT_BOX = {k: v for k, v in _SWD_BOX.items() if k not in ("V", "x_o", "v_o", "o_o")}


def _build() -> dict:
    entries = [
        CorpusEntry("watertank", _watertank_model(), _WT_BOX,
                    "water tank: the controller picks an inflow f that cannot overfill "
                    "the tank within one cycle of length eps"),
        CorpusEntry("watertank_graph", _watertank_graph(), _WT_BOX,
                    "the water tank as an activity graph"),
        CorpusEntry("robot2d", _robot_model(), _ROBOT_BOX,
                    "ground robot on circular arcs avoiding a static obstacle"),
        CorpusEntry("robot2d_graph", _robot_graph(), _ROBOT_BOX,
                    "the obstacle-avoiding robot as an activity graph with the controller "
                    "inlined"),
        CorpusEntry("swd1d", _swd_model(), _SWD_BOX,
                    "single wheel drive on a bounded track with a moving obstacle"),
    ]
    for key, (*_, text) in _VARIANTS.items():
        entries.append(CorpusEntry(f"swd1d_variant_{key}", _variant_model(key), _VARIANT_BOX,
                                   f"single wheel drive without obstacle: {text}"))
    for e in entries:
        if isinstance(e.model, Model):
            validate_model(e.model)
    return {e.name: e for e in entries}


_ENTRIES = _build()
NAMES = tuple(_ENTRIES)


def get_model(name: str) -> CorpusEntry:
    try:
        return _ENTRIES[name]
    except KeyError:
        raise UnknownName(name) from None


def list_models() -> list:
    return list(NAMES)


def box_for(model_name: str) -> dict:
    """Parameter box of the corpus entry whose model carries ``model_name``."""
    for e in _ENTRIES.values():
        if e.model.name == model_name:
            return dict(e.box)
    return {}


def model_text(name: str) -> str:
    """Contents of the shipped file for corpus entry ``name``."""
    entry = get_model(name)
    return resources.files("hpk").joinpath("models").joinpath(entry.filename).read_text()
