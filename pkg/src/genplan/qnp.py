"""Qualitative numerical problems: a STRIPS core plus non-negative numeric
variables with increment/decrement effect descriptors.

A QNP denotes a family of concrete problems, one per choice of initial
values and of concrete increment/decrement semantics.  Only the booleans
``X=0`` / ``X>0`` are observable for a numeric variable, so every concrete
instance projects onto the same boolean abstraction, built here directly
from the syntax.  The commitment transformation (``close``) makes the
abstraction's nondeterministic decrements safe for fair FOND planning.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    BoundTooSmallError,
    NotClosureEligibleError,
    OutOfRangeError,
    QnpParseError,
    QnpSemanticError,
)
from .model import FiniteTrajectory, Pondp, SeededResolver
from .projection import Fondp

# literals are ("fluent", name, positive) or ("var", name, "zero"|"pos")


@dataclass(frozen=True)
class InitDescriptor:
    """Possible initial values: a finite set or a closed interval."""

    kind: str  # "set" | "interval"
    values: tuple  # sorted Fractions, or (lo, hi)

    @property
    def zero_possible(self):
        if self.kind == "set":
            return Fraction(0) in self.values
        return self.values[0] == 0

    @property
    def positive_possible(self):
        if self.kind == "set":
            return any(v > 0 for v in self.values)
        return self.values[1] > 0

    def contains(self, v):
        if self.kind == "set":
            return v in self.values
        return self.values[0] <= v <= self.values[1]

    def sample(self, rng):
        if self.kind == "set":
            return self.values[rng.randrange(len(self.values))]
        lo, hi = self.values
        span = int(hi - lo)
        return lo + rng.randint(0, max(span, 0))


@dataclass(frozen=True)
class ConcreteSemantics:
    """Concrete increment/decrement behavior for one variable.

    unit: +/- 1 with a floor at 0 for decrements.
    bounded: any multiple of ``grid`` in [lo, hi], floored at 0; increments
    must be positive when the variable is 0.
    two_valued: DEC(x) = {0, x} and INC = {1}; the canonical instance whose
    behaviors mirror the boolean abstraction exactly.
    """

    mode: str = "unit"
    lo: Fraction = Fraction(0)
    hi: Fraction = Fraction(1)
    grid: Fraction = Fraction(1)

    def dec_outcomes(self, x):
        if self.mode == "unit":
            return {max(Fraction(0), x - 1)}
        if self.mode == "two_valued":
            return {Fraction(0), x}
        out = set()
        step = self._ceil_grid(self.lo)
        while step <= self.hi:
            out.add(max(Fraction(0), x - step))
            step += self.grid
        return out or {x}

    def inc_outcomes(self, x):
        if self.mode == "unit":
            return {x + 1}
        if self.mode == "two_valued":
            return {Fraction(1)}
        out = set()
        step = self._ceil_grid(self.lo)
        while step <= self.hi:
            if x > 0 or step > 0:
                out.add(x + step)
            step += self.grid
        return out or {x + self.grid}

    def _ceil_grid(self, v):
        """Smallest grid multiple at or above v."""
        n = v / self.grid
        k = int(n)
        if k < n:
            k += 1
        return k * self.grid


@dataclass(frozen=True)
class QnpAction:
    name: str
    pre: tuple = ()
    add: frozenset = frozenset()
    delete: frozenset = frozenset()
    numeric: dict = field(default_factory=dict)  # var -> "inc" | "dec"


@dataclass(frozen=True, eq=False)
class Qnp:
    fluents: frozenset
    init_fluents: frozenset
    actions: tuple
    goal: tuple
    variables: tuple
    init_values: dict  # var -> InitDescriptor
    semantics: dict = field(default_factory=dict)  # var -> ConcreteSemantics

    def action(self, name):
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def semantics_for(self, var):
        return self.semantics.get(var, ConcreteSemantics())


def _check_condition_set(literals, where):
    pos = {(l[1]) for l in literals if l[0] == "var" and l[2] == "zero"}
    neg = {(l[1]) for l in literals if l[0] == "var" and l[2] == "pos"}
    both = pos & neg
    if both:
        raise QnpSemanticError(f"{where}: X=0 and X>0 both required for {sorted(both)}")


def validate_qnp(q):
    """Raise QnpSemanticError on structural violations; returns closure
    eligibility diagnostics (non-fatal)."""
    declared = set(q.variables)
    for a in q.actions:
        for v, eff in a.numeric.items():
            if v not in declared:
                raise QnpSemanticError(f"action {a.name}: unknown variable {v!r}")
            if eff not in ("inc", "dec"):
                raise QnpSemanticError(f"action {a.name}: bad effect {eff!r} on {v!r}")
        _check_condition_set(a.pre, f"action {a.name} precondition")
        for lit in a.pre:
            if lit[0] == "fluent" and lit[1] not in q.fluents:
                raise QnpSemanticError(f"action {a.name}: unknown fluent {lit[1]!r}")
            if lit[0] == "var" and lit[1] not in declared:
                raise QnpSemanticError(f"action {a.name}: unknown variable {lit[1]!r}")
        for f in (a.add | a.delete):
            if f not in q.fluents:
                raise QnpSemanticError(f"action {a.name}: unknown fluent {f!r}")
    _check_condition_set(q.goal, "goal")
    for lit in q.goal:
        if lit[0] == "fluent" and lit[1] not in q.fluents:
            raise QnpSemanticError(f"goal: unknown fluent {lit[1]!r}")
        if lit[0] == "var" and lit[1] not in declared:
            raise QnpSemanticError(f"goal: unknown variable {lit[1]!r}")
    for v in q.variables:
        if v not in q.init_values:
            raise QnpSemanticError(f"variable {v!r} has no initial-value descriptor")
    return closure_diagnostics(q)


def closure_diagnostics(q):
    out = []
    for a in q.actions:
        decs = [v for v, eff in a.numeric.items() if eff == "dec"]
        if len(decs) > 1:
            out.append((a.name, f"decrements {len(decs)} variables"))
        for v in decs:
            if ("var", v, "pos") not in a.pre:
                out.append((a.name, f"decrements {v!r} without precondition {v}>0"))
    return out


# ---------------------------------------------------------------------------
# Concrete syntax
# ---------------------------------------------------------------------------

_NAME = r"[A-Za-z_][A-Za-z0-9_()']*"


def _parse_literal(tok, where):
    m = re.fullmatch(rf"({_NAME})=0", tok)
    if m:
        return ("var", m.group(1), "zero")
    m = re.fullmatch(rf"({_NAME})>0", tok)
    if m:
        return ("var", m.group(1), "pos")
    m = re.fullmatch(rf"!({_NAME})", tok)
    if m:
        return ("fluent", m.group(1), False)
    m = re.fullmatch(_NAME, tok)
    if m:
        return ("fluent", tok, True)
    raise QnpParseError(f"{where}: cannot parse literal {tok!r}")


def _parse_value(tok, where):
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise QnpParseError(f"{where}: bad value {tok!r}")


def parse_qnp(text):
    """Parse the declarative QNP format; see the problems/ directory for
    examples.  Raises QnpParseError / QnpSemanticError."""
    fluents = set()
    init_fluents = set()
    variables = []
    init_values = {}
    semantics = {}
    actions = []
    goal = None
    current = None  # mutable action under construction

    def finish_action():
        nonlocal current
        if current is not None:
            if set(current["inc"]) & set(current["dec"]):
                raise QnpSemanticError(
                    f"action {current['name']}: Inc and Dec on the same variable"
                )
            numeric = {v: "inc" for v in current["inc"]}
            numeric.update({v: "dec" for v in current["dec"]})
            actions.append(
                QnpAction(
                    name=current["name"],
                    pre=tuple(current["pre"]),
                    add=frozenset(current["add"]),
                    delete=frozenset(current["del"]),
                    numeric=numeric,
                )
            )
            current = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        toks = line.split()
        head, rest = toks[0], toks[1:]
        if head == "fluents":
            fluents.update(rest)
        elif head == "vars":
            variables.extend(rest)
        elif head == "init":
            for tok in rest:
                lit = _parse_literal(tok, where)
                if lit[0] != "fluent" or not lit[2]:
                    raise QnpParseError(f"{where}: init lists true fluents only")
                init_fluents.add(lit[1])
        elif head == "init_values":
            if len(rest) < 3 or rest[1] != "in":
                raise QnpParseError(f"{where}: expected 'init_values X in ...'")
            var = rest[0]
            spec = "".join(rest[2:])
            if spec.startswith("{") and spec.endswith("}"):
                vals = tuple(sorted(_parse_value(v, where) for v in spec[1:-1].split(",")))
                init_values[var] = InitDescriptor(kind="set", values=vals)
            elif spec.startswith("[") and spec.endswith("]"):
                lo, hi = (s.strip() for s in spec[1:-1].split(","))
                lo, hi = _parse_value(lo, where), _parse_value(hi, where)
                if lo > hi:
                    raise QnpParseError(f"{where}: empty interval")
                init_values[var] = InitDescriptor(kind="interval", values=(lo, hi))
            else:
                raise QnpParseError(f"{where}: expected {{..}} or [lo,hi]")
            if any(v < 0 for v in init_values[var].values):
                raise QnpSemanticError(f"{where}: negative initial value for {var}")
        elif head == "semantics":
            if not rest:
                raise QnpParseError(f"{where}: expected 'semantics X mode ...'")
            var, mode = rest[0], (rest[1] if len(rest) > 1 else "unit")
            if mode == "unit":
                semantics[var] = ConcreteSemantics(mode="unit")
            elif mode == "two_valued":
                semantics[var] = ConcreteSemantics(mode="two_valued")
            elif mode == "bounded":
                args = rest[2:]
                if len(args) not in (2, 4):
                    raise QnpParseError(f"{where}: bounded needs 'lo hi [grid g]'")
                lo, hi = _parse_value(args[0], where), _parse_value(args[1], where)
                grid = _parse_value(args[3], where) if len(args) == 4 else Fraction(1)
                semantics[var] = ConcreteSemantics(mode="bounded", lo=lo, hi=hi, grid=grid)
            else:
                raise QnpParseError(f"{where}: unknown semantics mode {mode!r}")
        elif head == "action":
            finish_action()
            if len(rest) != 1:
                raise QnpParseError(f"{where}: expected 'action NAME'")
            current = {"name": rest[0], "pre": [], "add": [], "del": [], "inc": [], "dec": []}
        elif head in ("pre", "add", "del", "inc", "dec"):
            if current is None:
                raise QnpParseError(f"{where}: {head!r} outside an action block")
            if head == "pre":
                current["pre"].extend(_parse_literal(t, where) for t in rest)
            elif head in ("inc", "dec"):
                current[head].extend(rest)
            else:
                current[head].extend(rest)
        elif head == "goal":
            finish_action()
            goal = tuple(_parse_literal(t, where) for t in rest)
        else:
            raise QnpParseError(f"{where}: unknown directive {head!r}")
    finish_action()
    if goal is None:
        raise QnpParseError("missing goal")
    q = Qnp(
        fluents=frozenset(fluents),
        init_fluents=frozenset(init_fluents),
        actions=tuple(actions),
        goal=goal,
        variables=tuple(variables),
        init_values=init_values,
        semantics=semantics,
    )
    validate_qnp(q)
    return q


def qnp_to_text(q):
    lines = []
    if q.fluents:
        lines.append("fluents " + " ".join(sorted(q.fluents)))
    if q.variables:
        lines.append("vars " + " ".join(q.variables))
    if q.init_fluents:
        lines.append("init " + " ".join(sorted(q.init_fluents)))
    for v in q.variables:
        d = q.init_values[v]
        if d.kind == "set":
            lines.append(f"init_values {v} in {{{','.join(str(x) for x in d.values)}}}")
        else:
            lines.append(f"init_values {v} in [{d.values[0]},{d.values[1]}]")
    for v in q.variables:
        s = q.semantics_for(v)
        if s.mode == "bounded":
            lines.append(f"semantics {v} bounded {s.lo} {s.hi} grid {s.grid}")
        elif s.mode != "unit":
            lines.append(f"semantics {v} {s.mode}")
    for a in q.actions:
        lines.append(f"action {a.name}")
        if a.pre:
            lines.append("  pre " + " ".join(_literal_text(l) for l in a.pre))
        if a.add:
            lines.append("  add " + " ".join(sorted(a.add)))
        if a.delete:
            lines.append("  del " + " ".join(sorted(a.delete)))
        incs = sorted(v for v, e in a.numeric.items() if e == "inc")
        decs = sorted(v for v, e in a.numeric.items() if e == "dec")
        if incs:
            lines.append("  inc " + " ".join(incs))
        if decs:
            lines.append("  dec " + " ".join(decs))
    lines.append("goal " + " ".join(_literal_text(l) for l in q.goal))
    return "\n".join(lines) + "\n"


def _literal_text(lit):
    if lit[0] == "fluent":
        return lit[1] if lit[2] else f"!{lit[1]}"
    return f"{lit[1]}=0" if lit[2] == "zero" else f"{lit[1]}>0"


# ---------------------------------------------------------------------------
# Concrete states and identifiers
# ---------------------------------------------------------------------------


def _obs_id(q, fluent_set, bits):
    """Observation id: true fluents then one atom per variable."""
    parts = sorted(fluent_set)
    parts += [f"{v}=0" if bits[i] else f"{v}>0" for i, v in enumerate(q.variables)]
    return ",".join(parts)


def _state_id(q, fluent_set, values):
    parts = sorted(fluent_set)
    parts += [f"{v}={values[i]}" for i, v in enumerate(q.variables)]
    return ",".join(parts)


def _holds(lit, fluent_set, values, variables):
    if lit[0] == "fluent":
        return (lit[1] in fluent_set) == lit[2]
    x = values[variables.index(lit[1])]
    return (x == 0) if lit[2] == "zero" else (x > 0)


def _strips_apply(a, fluent_set):
    return frozenset((fluent_set - a.delete) | a.add)


def qnp_annotations(q):
    """Effect tags and declared variables, consumed by constraint binding."""
    return {
        "variables": list(q.variables),
        "action_effects": {a.name: dict(a.numeric) for a in q.actions},
    }


# ---------------------------------------------------------------------------
# Instantiation (concrete PONDP) and unbounded simulation
# ---------------------------------------------------------------------------


def instantiate(q, chosen, bound):
    """The concrete finite problem for one choice of initial values.

    States pair a fluent valuation with a variable valuation; observations
    collapse values to the zero/positive booleans.  Values above ``bound``
    are capped (recorded in the annotations, since capping can cut
    behaviors); with unit semantics and integer values the instance is
    deterministic.
    """
    validate_qnp(q)
    bound = Fraction(bound)
    values0 = []
    for v in q.variables:
        if v not in chosen:
            raise OutOfRangeError(f"no initial value chosen for {v!r}")
        val = Fraction(chosen[v])
        if not q.init_values[v].contains(val):
            raise OutOfRangeError(f"{v}={val} outside the declared descriptor")
        if val > bound:
            raise BoundTooSmallError(f"bound {bound} below initial {v}={val}")
        values0.append(val)

    start = (q.init_fluents, tuple(values0))
    capped = False
    states = {}
    succ = {}
    avail = {}
    queue = [start]
    states[start] = _state_id(q, *start)
    while queue:
        st = queue.pop()
        fl, vals = st
        sid = states[st]
        acts = []
        for a in q.actions:
            if not all(_holds(l, fl, vals, q.variables) for l in a.pre):
                continue
            acts.append(a.name)
            fl2 = _strips_apply(a, fl)
            value_options = []
            for i, v in enumerate(q.variables):
                x = vals[i]
                eff = a.numeric.get(v)
                sem = q.semantics_for(v)
                if eff == "inc":
                    opts = sem.inc_outcomes(x)
                elif eff == "dec":
                    opts = sem.dec_outcomes(x)
                else:
                    opts = {x}
                clipped = set()
                for o in opts:
                    if o > bound:
                        capped = True
                        o = bound
                    clipped.add(o)
                value_options.append(sorted(clipped))
            targets = set()
            def expand(i, acc):
                if i == len(value_options):
                    targets.add((fl2, tuple(acc)))
                    return
                for o in value_options[i]:
                    expand(i + 1, acc + [o])
            expand(0, [])
            ids = set()
            for t in targets:
                if t not in states:
                    states[t] = _state_id(q, *t)
                    queue.append(t)
                ids.add(states[t])
            succ[(a.name, sid)] = frozenset(ids)
        avail[sid] = frozenset(acts)

    goal_states = {
        sid
        for (fl, vals), sid in states.items()
        if all(_holds(l, fl, vals, q.variables) for l in q.goal)
    }
    obs_fn = {}
    obs_zero = {}
    for (fl, vals), sid in states.items():
        bits = tuple(x == 0 for x in vals)
        o = _obs_id(q, fl, bits)
        obs_fn[sid] = o
        obs_zero[o] = sorted(v for i, v in enumerate(q.variables) if bits[i])
    annotations = dict(qnp_annotations(q))
    annotations["obs_zero"] = obs_zero
    if capped:
        annotations["capped"] = True
    return Pondp(
        states=frozenset(states.values()),
        init=frozenset({states[start]}),
        observations=frozenset(obs_fn.values()),
        actions=frozenset(a.name for a in q.actions),
        goal_states=frozenset(goal_states),
        avail=avail,
        obs_fn=obs_fn,
        succ=succ,
        annotations=annotations,
    )


def simulate(q, mu, chosen, seed=0, max_steps=100000, stop_at_goal=True):
    """Unbounded symbolic walk of a policy on a concrete instance; numeric
    values are exact rationals and are never truncated.  Nondeterministic
    outcomes are resolved by a seeded RNG."""
    validate_qnp(q)
    rng = SeededResolver(seed).rng
    fl = q.init_fluents
    vals = tuple(Fraction(chosen[v]) for v in q.variables)
    for i, v in enumerate(q.variables):
        if not q.init_values[v].contains(vals[i]):
            raise OutOfRangeError(f"{v}={vals[i]} outside the declared descriptor")
    mem = mu.initial
    states = [_state_id(q, fl, vals)]
    actions = []
    by_name = {a.name: a for a in q.actions}
    while len(actions) < max_steps:
        goal_now = all(_holds(l, fl, vals, q.variables) for l in q.goal)
        if stop_at_goal and goal_now:
            return FiniteTrajectory(states=tuple(states), actions=tuple(actions))
        bits = tuple(x == 0 for x in vals)
        obs = _obs_id(q, fl, bits)
        name = mu.output.get((mem, obs))
        if name is None:
            return FiniteTrajectory(states=tuple(states), actions=tuple(actions))
        mem = mu.next_memory(mem, obs)
        a = by_name[name]
        if not all(_holds(l, fl, vals, q.variables) for l in a.pre):
            from .errors import InvalidPolicyError

            raise InvalidPolicyError(
                f"policy picked inapplicable action {name!r} at {states[-1]!r}"
            )
        fl = _strips_apply(a, fl)
        new_vals = []
        for i, v in enumerate(q.variables):
            eff = a.numeric.get(v)
            sem = q.semantics_for(v)
            if eff == "inc":
                opts = sorted(sem.inc_outcomes(vals[i]))
            elif eff == "dec":
                opts = sorted(sem.dec_outcomes(vals[i]))
            else:
                opts = [vals[i]]
            new_vals.append(opts[rng.randrange(len(opts))])
        vals = tuple(new_vals)
        actions.append(name)
        states.append(_state_id(q, fl, vals))
    return FiniteTrajectory(
        states=tuple(states), actions=tuple(actions), truncated=True
    )


# ---------------------------------------------------------------------------
# Syntactic projection
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SyntacticProjection:
    """The boolean abstraction as a FONDP plus its STRIPS-style description
    with nondeterministic conditional effects."""

    fondp: Fondp
    description: dict


def syntactic_projection(q):
    """Boolean problem over F plus the atoms X=0 / X>0: increments set the
    positive atom, decrements branch 'if X>0 then X>0 | X=0'.  Grounded by
    reachability from the initial boolean states (several when both values
    are initially possible for some variable)."""
    validate_qnp(q)
    n = len(q.variables)

    init_bit_options = []
    for v in q.variables:
        d = q.init_values[v]
        opts = []
        if d.zero_possible:
            opts.append(True)
        if d.positive_possible:
            opts.append(False)
        init_bit_options.append(opts)

    inits = set()
    def expand_init(i, acc):
        if i == n:
            inits.add((q.init_fluents, tuple(acc)))
            return
        for b in init_bit_options[i]:
            expand_init(i + 1, acc + [b])
    expand_init(0, [])

    def holds(lit, fl, bits):
        if lit[0] == "fluent":
            return (lit[1] in fl) == lit[2]
        b = bits[q.variables.index(lit[1])]
        return b if lit[2] == "zero" else not b

    states = {}
    succ = {}
    avail = {}
    queue = list(inits)
    for st in inits:
        states[st] = _obs_id(q, *st)
    while queue:
        st = queue.pop()
        fl, bits = st
        sid = states[st]
        acts = []
        for a in q.actions:
            if not all(holds(l, fl, bits) for l in a.pre):
                continue
            acts.append(a.name)
            fl2 = _strips_apply(a, fl)
            options = []
            for i, v in enumerate(q.variables):
                eff = a.numeric.get(v)
                if eff == "inc":
                    options.append([False])  # X>0
                elif eff == "dec":
                    options.append([False, True] if not bits[i] else [True])
                else:
                    options.append([bits[i]])
            targets = set()
            def expand(i, acc):
                if i == n:
                    targets.add((fl2, tuple(acc)))
                    return
                for b in options[i]:
                    expand(i + 1, acc + [b])
            expand(0, [])
            ids = set()
            for t in targets:
                if t not in states:
                    states[t] = _obs_id(q, *t)
                    queue.append(t)
                ids.add(states[t])
            succ[(a.name, sid)] = frozenset(ids)
        avail[sid] = frozenset(acts)

    goal_states = {
        sid for (fl, bits), sid in states.items()
        if all(holds(l, fl, bits) for l in q.goal)
    }
    obs_zero = {
        sid: sorted(v for i, v in enumerate(q.variables) if bits[i])
        for (fl, bits), sid in states.items()
    }
    annotations = dict(qnp_annotations(q))
    annotations["obs_zero"] = obs_zero
    all_ids = frozenset(states.values())
    fondp = Fondp(
        states=all_ids,
        init=frozenset(states[st] for st in inits),
        observations=all_ids,
        actions=frozenset(a.name for a in q.actions),
        goal_states=frozenset(goal_states),
        avail=avail,
        obs_fn={sid: sid for sid in all_ids},
        succ=succ,
        annotations=annotations,
    )
    description = {
        "atoms": sorted(q.fluents) + [f"{v}=0" for v in q.variables] + [f"{v}>0" for v in q.variables],
        "actions": {
            a.name: {
                "pre": [_literal_text(l) for l in a.pre],
                "add": sorted(a.add),
                "del": sorted(a.delete),
                "numeric": {
                    v: (f"{v}>0" if e == "inc" else f"if {v}>0 then {v}>0 | {v}=0")
                    for v, e in sorted(a.numeric.items())
                },
            }
            for a in q.actions
        },
    }
    return SyntacticProjection(fondp=fondp, description=description)


# ---------------------------------------------------------------------------
# Similarity, the two-valued variant, closure
# ---------------------------------------------------------------------------


def similar(q1, q2):
    """Similar QNPs differ at most in concrete semantics and initial-value
    descriptors, with matching zero/positive possibility flags."""
    if q1.fluents != q2.fluents or q1.init_fluents != q2.init_fluents:
        return False
    if q1.goal != q2.goal or q1.variables != q2.variables:
        return False
    if q1.actions != q2.actions:
        return False
    for v in q1.variables:
        d1, d2 = q1.init_values[v], q2.init_values[v]
        if d1.zero_possible != d2.zero_possible:
            return False
        if d1.positive_possible != d2.positive_possible:
            return False
    return True


def two_valued_variant(q):
    """The similar QNP whose variables range over {0, 1} with DEC = {0, x}
    and INC = {1}; its instances mirror the syntactic projection."""
    init_values = {}
    for v in q.variables:
        d = q.init_values[v]
        vals = []
        if d.zero_possible:
            vals.append(Fraction(0))
        if d.positive_possible:
            vals.append(Fraction(1))
        init_values[v] = InitDescriptor(kind="set", values=tuple(vals))
    return Qnp(
        fluents=q.fluents,
        init_fluents=q.init_fluents,
        actions=q.actions,
        goal=q.goal,
        variables=q.variables,
        init_values=init_values,
        semantics={v: ConcreteSemantics(mode="two_valued") for v in q.variables},
    )


def close_qnp(q):
    """The commitment transformation enabling fair FOND planning.

    Requires every decrementing action to decrement a single variable with
    the observable precondition X>0.  Adds a commitment fluent per variable
    with set/unset actions; decrements then require the commitment and
    increments its absence, so an unfair decrement loop would have to
    observe X=0 to release the commitment.
    """
    for a in q.actions:
        decs = [v for v, e in a.numeric.items() if e == "dec"]
        if len(decs) > 1:
            raise NotClosureEligibleError(
                f"action {a.name!r} decrements more than one variable", action=a.name
            )
        for v in decs:
            if ("var", v, "pos") not in a.pre:
                raise NotClosureEligibleError(
                    f"action {a.name!r} decrements {v!r} without precondition {v}>0",
                    action=a.name,
                )

    def qflag(v):
        return f"q_{v}"

    new_actions = []
    for a in q.actions:
        pre = list(a.pre)
        for v, e in sorted(a.numeric.items()):
            if e == "dec":
                pre.append(("fluent", qflag(v), True))
            else:
                pre.append(("fluent", qflag(v), False))
        new_actions.append(
            QnpAction(name=a.name, pre=tuple(pre), add=a.add, delete=a.delete,
                      numeric=dict(a.numeric))
        )
    for v in q.variables:
        new_actions.append(
            QnpAction(name=f"set({v})", pre=(), add=frozenset({qflag(v)}))
        )
        new_actions.append(
            QnpAction(
                name=f"unset({v})",
                pre=(("var", v, "zero"),),
                delete=frozenset({qflag(v)}),
            )
        )
    return Qnp(
        fluents=q.fluents | {qflag(v) for v in q.variables},
        init_fluents=q.init_fluents,
        actions=tuple(new_actions),
        goal=q.goal,
        variables=q.variables,
        init_values=q.init_values,
        semantics=q.semantics,
    )
