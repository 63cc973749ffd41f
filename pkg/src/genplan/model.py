"""Finite partially observable nondeterministic problems and their policies.

The model follows a set-valued successor semantics: applying an available
action yields a nonempty set of possible successor states, observations
are a total function of the state, and goals are a state subset.  Policies
are finite-memory observation-to-action transducers; all infinite-behavior
checks are witnessed by lassos over the finite product of a problem with a
policy.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .errors import (
    InvalidPolicyError,
    NotATrajectoryError,
    ResolverExhaustedError,
    UnavailableActionError,
)


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Pondp:
    """A finite PONDP: states, initial subset, observations, actions, goal
    states, per-state available actions, observation function, and the
    set-valued successor function defined exactly on available pairs.

    ``annotations`` carries optional free-form metadata (numeric-effect
    tags per action, zero atoms per observation, truncation markers) used
    by constraint binding and diagnostics.  Instances are immutable after
    construction and safe to share.
    """

    states: frozenset
    init: frozenset
    observations: frozenset
    actions: frozenset
    goal_states: frozenset
    avail: dict  # state -> frozenset of actions
    obs_fn: dict  # state -> observation
    succ: dict  # (action, state) -> frozenset of states
    annotations: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "states", frozenset(self.states))
        object.__setattr__(self, "init", frozenset(self.init))
        object.__setattr__(self, "observations", frozenset(self.observations))
        object.__setattr__(self, "actions", frozenset(self.actions))
        object.__setattr__(self, "goal_states", frozenset(self.goal_states))
        object.__setattr__(
            self, "avail", {s: frozenset(a) for s, a in self.avail.items()}
        )
        object.__setattr__(
            self, "succ", {k: frozenset(v) for k, v in self.succ.items()}
        )


@dataclass(frozen=True, eq=False)
class PondpClass:
    """An explicit finite class of PONDPs sharing actions, observations,
    goal observations, and per-observation available actions."""

    actions: frozenset
    observations: frozenset
    goal_observations: frozenset
    avail_by_obs: dict  # observation -> frozenset of actions
    members: tuple  # of Pondp


def validate(p, cls=None):
    """Check the structural invariants; returns a list of diagnostics,
    empty iff the problem (and its class fit, when given) is valid.
    Each diagnostic is a (code, message, witness) triple."""
    out = []
    if not p.init:
        out.append(("empty init", "no initial state", None))
    for s in p.init - p.states:
        out.append(("init not a state", f"initial state {s!r} not in states", s))
    for s in p.goal_states - p.states:
        out.append(("goal not a state", f"goal state {s!r} not in states", s))
    for s in p.states:
        if s not in p.obs_fn:
            out.append(("missing observation", f"state {s!r} has no observation", s))
        elif p.obs_fn[s] not in p.observations:
            out.append(
                ("unknown observation", f"obs({s!r}) not in observations", s)
            )
        for a in p.avail.get(s, ()):
            if a not in p.actions:
                out.append(("unknown action", f"avail({s!r}) lists {a!r}", (s, a)))
            if not p.succ.get((a, s)):
                out.append(
                    ("empty successor set", f"succ({a!r}, {s!r}) empty or missing", (s, a))
                )
    for (a, s), targets in p.succ.items():
        if a not in p.avail.get(s, frozenset()):
            out.append(
                ("successor for unavailable action", f"succ({a!r}, {s!r}) defined", (s, a))
            )
        for t in targets - p.states:
            out.append(("unknown successor", f"succ({a!r}, {s!r}) contains {t!r}", t))
    if cls is not None:
        if not p.actions <= cls.actions:
            out.append(("foreign actions", "member actions outside the class pool", None))
        if not p.observations <= cls.observations:
            out.append(
                ("foreign observations", "member observations outside the class pool", None)
            )
        for s in p.states:
            obs = p.obs_fn.get(s)
            in_goal = s in p.goal_states
            if obs is not None and in_goal != (obs in cls.goal_observations):
                out.append(
                    ("goal not observable", f"state {s!r}: goal membership disagrees with T_Omega", s)
                )
            if obs is not None and p.avail.get(s, frozenset()) != cls.avail_by_obs.get(
                obs, frozenset()
            ):
                out.append(
                    (
                        "precondition not observable",
                        f"state {s!r}: avail differs from A_omega({obs!r})",
                        s,
                    )
                )
    return out


def validate_class(cls):
    out = []
    for i, p in enumerate(cls.members):
        for code, msg, wit in validate(p, cls):
            out.append((code, f"member {i}: {msg}", wit))
    return out


def infer_class(members):
    """Assemble a PondpClass from members, inferring the shared goal
    observations and per-observation action sets; validation then reports
    any member that breaks observability of goals or preconditions."""
    members = tuple(members)
    actions = frozenset().union(*(p.actions for p in members)) if members else frozenset()
    observations = (
        frozenset().union(*(p.observations for p in members)) if members else frozenset()
    )
    goal_obs = set()
    avail_by_obs = {}
    for p in members:
        for s in p.states:
            if s in p.goal_states:
                goal_obs.add(p.obs_fn[s])
            avail_by_obs.setdefault(p.obs_fn[s], p.avail.get(s, frozenset()))
    return PondpClass(
        actions=actions,
        observations=observations,
        goal_observations=frozenset(goal_obs),
        avail_by_obs=avail_by_obs,
        members=members,
    )


def step(p, s, a):
    """Successor set of applying ``a`` in ``s``; the action must be available."""
    if a not in p.avail.get(s, frozenset()):
        raise UnavailableActionError(f"action {a!r} not available in state {s!r}")
    return p.succ[(a, s)]


# ---------------------------------------------------------------------------
# Trajectories and lassos
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteTrajectory:
    """An alternating state-action sequence s0 a0 s1 ... s_n."""

    states: tuple
    actions: tuple
    level: str = "state"  # "state" or "observation"
    truncated: bool = False

    def __post_init__(self):
        if len(self.states) != len(self.actions) + 1:
            raise ValueError("need exactly one more state than actions")

    @property
    def is_finite(self):
        return True

    def visited_states(self):
        return self.states

    def word_letters(self):
        out = []
        for s, a in zip(self.states, self.actions):
            out.extend((s, a))
        out.append(self.states[-1])
        return tuple(out)


@dataclass(frozen=True)
class Lasso:
    """An ultimately periodic trajectory: finite prefix plus a nonempty cycle
    that closes back to its first state.  The canonical witness object for
    all infinite-behavior checks."""

    prefix_states: tuple
    prefix_actions: tuple
    cycle_states: tuple
    cycle_actions: tuple
    level: str = "state"

    def __post_init__(self):
        if len(self.prefix_states) != len(self.prefix_actions):
            raise ValueError("prefix must alternate state action ... state action")
        if not self.cycle_states or len(self.cycle_states) != len(self.cycle_actions):
            raise ValueError("cycle must be a nonempty alternating sequence")

    @property
    def is_finite(self):
        return False

    def visited_states(self):
        return self.prefix_states + self.cycle_states

    def cycle_transitions(self):
        """Transitions (s, a, s') occurring in the cycle, with wraparound."""
        n = len(self.cycle_states)
        out = []
        for i in range(n):
            s = self.cycle_states[i]
            a = self.cycle_actions[i]
            t = self.cycle_states[(i + 1) % n]
            out.append((s, a, t))
        return out

    def word(self):
        """The induced infinite word over states/observations and actions."""
        from .ltl import Word

        pre = []
        for s, a in zip(self.prefix_states, self.prefix_actions):
            pre.extend((s, a))
        cyc = []
        for s, a in zip(self.cycle_states, self.cycle_actions):
            cyc.extend((s, a))
        return Word(tuple(pre), tuple(cyc))


def check_trajectory(p, t):
    """Raise NotATrajectoryError unless t's adjacent triples are transitions
    of ``p`` and t starts in an initial state."""
    if isinstance(t, FiniteTrajectory):
        states, actions = t.states, t.actions
        pairs = list(zip(states, actions, states[1:]))
    else:
        flat_states = t.prefix_states + t.cycle_states
        flat_actions = t.prefix_actions + t.cycle_actions
        pairs = list(zip(flat_states, flat_actions, flat_states[1:]))
        pairs.append((t.cycle_states[-1], t.cycle_actions[-1], t.cycle_states[0]))
    first = (t.states if isinstance(t, FiniteTrajectory) else t.prefix_states + t.cycle_states)[0]
    if first not in p.init:
        raise NotATrajectoryError(f"trajectory starts outside init: {first!r}")
    for s, a, s2 in pairs:
        if a not in p.avail.get(s, frozenset()) or s2 not in p.succ.get((a, s), frozenset()):
            raise NotATrajectoryError(f"({s!r}, {a!r}, {s2!r}) is not a transition")


def is_goal_reaching(p, t):
    """A trajectory is goal reaching iff it visits a goal state anywhere."""
    check_trajectory(p, t)
    return any(s in p.goal_states for s in t.visited_states())


def is_fair(p, t):
    """Finite trajectories are fair.  A lasso is fair iff for every
    transition in its cycle, every sibling outcome of the same state-action
    pair also occurs in the cycle."""
    if isinstance(t, FiniteTrajectory):
        return True
    check_trajectory(p, t)
    occurring = set(t.cycle_transitions())
    for s, a, _ in occurring:
        for sibling in p.succ[(a, s)]:
            if (s, a, sibling) not in occurring:
                return False
    return True


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Policy:
    """Finite-memory observation-to-action transducer.

    ``update`` is total on memory x observations, ``output`` is partial
    (missing entries mean the policy stops).  A memoryless policy has a
    single memory state."""

    memory_states: tuple
    initial: object
    update: dict  # (memory, observation) -> memory
    output: dict  # (memory, observation) -> action

    @staticmethod
    def memoryless(mapping):
        m = "m0"
        return Policy(
            memory_states=(m,),
            initial=m,
            update={},
            output={(m, o): a for o, a in mapping.items()},
        )

    @property
    def is_memoryless(self):
        return len(self.memory_states) <= 1

    def next_memory(self, m, obs):
        return self.update.get((m, obs), m)

    def action(self, obs_sequence):
        """The denoted partial function on nonempty observation sequences."""
        m = self.initial
        for obs in obs_sequence[:-1]:
            m = self.next_memory(m, obs)
        return self.output.get((m, obs_sequence[-1]))

    def as_memoryless_mapping(self):
        if not self.is_memoryless:
            raise ValueError("policy is not memoryless")
        return {obs: a for (_, obs), a in self.output.items()}


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


class SeededResolver:
    """Resolves nondeterministic choices with a seeded RNG; reproducible."""

    def __init__(self, seed=0):
        self.rng = random.Random(seed)

    def choose(self, options):
        return options[self.rng.randrange(len(options))]


class ScriptedResolver:
    """Resolves choices from a fixed list of indices."""

    def __init__(self, script):
        self.script = list(script)
        self.pos = 0

    def choose(self, options):
        if self.pos >= len(self.script):
            raise ResolverExhaustedError("scripted resolver ran out of choices")
        idx = self.script[self.pos]
        self.pos += 1
        return options[idx % len(options)]


class FirstResolver:
    """Always picks the first option in the canonical order."""

    def choose(self, options):
        return options[0]


def run_policy(p, mu, resolver=None, max_steps=10000, stop_at_goal=False):
    """Generate a maximal trajectory of ``mu`` from a resolved initial state.

    Returns a FiniteTrajectory when the policy stops (output undefined, or
    a goal state with ``stop_at_goal``), a Lasso as soon as a state-memory
    pair repeats, or a truncated FiniteTrajectory after ``max_steps``.
    """
    resolver = resolver or FirstResolver()
    start = resolver.choose(sorted(p.init, key=str))
    s = start
    m = mu.initial
    states = [s]
    actions = []
    seen = {}
    while len(actions) < max_steps:
        if stop_at_goal and s in p.goal_states:
            return FiniteTrajectory(states=tuple(states), actions=tuple(actions))
        key = (s, m)
        if key in seen:
            k = seen[key]
            return Lasso(
                prefix_states=tuple(states[:k]),
                prefix_actions=tuple(actions[:k]),
                cycle_states=tuple(states[k:-1]),
                cycle_actions=tuple(actions[k:]),
            )
        seen[key] = len(actions)
        obs = p.obs_fn[s]
        a = mu.output.get((m, obs))
        if a is None:
            return FiniteTrajectory(states=tuple(states), actions=tuple(actions))
        if a not in p.avail.get(s, frozenset()):
            raise InvalidPolicyError(
                f"policy picked unavailable action {a!r} at state {s!r}",
                witness=FiniteTrajectory(states=tuple(states), actions=tuple(actions)),
            )
        m = mu.next_memory(m, obs)
        s = resolver.choose(sorted(p.succ[(a, s)], key=str))
        actions.append(a)
        states.append(s)
    return FiniteTrajectory(
        states=tuple(states), actions=tuple(actions), truncated=True
    )


def is_generated_by(p, mu, t):
    """True iff the trajectory's actions match the policy's outputs along
    its own observation history (replay check for counterexamples)."""
    if isinstance(t, FiniteTrajectory):
        states, actions = list(t.states), list(t.actions)
    else:
        states = list(t.prefix_states + t.cycle_states)
        actions = list(t.prefix_actions + t.cycle_actions)
    m = mu.initial
    for i, a in enumerate(actions):
        obs = p.obs_fn[states[i]]
        if mu.output.get((m, obs)) != a:
            return False
        m = mu.next_memory(m, obs)
    if isinstance(t, FiniteTrajectory) and not t.truncated:
        obs = p.obs_fn[states[-1]]
        if mu.output.get((m, obs)) is not None:
            if mu.output[(m, obs)] in p.avail.get(states[-1], frozenset()):
                return False  # not maximal
    return True


# ---------------------------------------------------------------------------
# Verdicts and solution checking
# ---------------------------------------------------------------------------

STRONG = "STRONG"
FAIR = "FAIR"


@dataclass(frozen=True)
class Under:
    """Mode marker: solve relative to a trajectory constraint."""

    constraint: object


@dataclass(frozen=True, eq=False)
class Verdict:
    kind: str  # STRONG_SOLUTION | FAIR_SOLUTION | SOLVES_UNDER_CONSTRAINT |
    #            NOT_A_SOLUTION | INVALID_POLICY
    constraint: str = None
    counterexample: object = None
    witness: object = None

    @property
    def is_solution(self):
        return self.kind in ("STRONG_SOLUTION", "FAIR_SOLUTION", "SOLVES_UNDER_CONSTRAINT")

    def to_json_dict(self):
        doc = {"verdict": self.kind}
        if self.constraint is not None:
            doc["constraint"] = self.constraint
        if self.counterexample is not None:
            doc["counterexample"] = trajectory_to_json_dict(self.counterexample)
        if self.witness is not None:
            doc["witness"] = trajectory_to_json_dict(self.witness)
        return doc


def _policy_product(p, mu):
    """BFS the product of problem and policy from the initial states.

    Returns (nodes, edges, stops, invalid) where nodes are (state, memory)
    pairs, edges map node -> list of successor nodes, stops collects nodes
    with undefined output, and invalid is a witness pair (node, action) if
    the policy picks an unavailable action somewhere reachable.
    """
    start = [(s, mu.initial) for s in sorted(p.init, key=str)]
    nodes = set(start)
    edges = {}
    stops = set()
    invalid = None
    queue = list(start)
    while queue:
        node = queue.pop()
        s, m = node
        obs = p.obs_fn[s]
        a = mu.output.get((m, obs))
        if a is None:
            stops.add(node)
            edges[node] = []
            continue
        if a not in p.avail.get(s, frozenset()):
            if invalid is None:
                invalid = (node, a)
            edges[node] = []
            continue
        m2 = mu.next_memory(m, obs)
        outs = []
        for s2 in sorted(p.succ[(a, s)], key=str):
            node2 = (s2, m2)
            outs.append((a, node2))
            if node2 not in nodes:
                nodes.add(node2)
                queue.append(node2)
        edges[node] = outs
    return start, nodes, edges, stops, invalid


def _trace_to(start_nodes, edges, target):
    """Shortest product path from an initial node to ``target``; returns the
    (states, actions) pair including the target state."""
    parent = {n: None for n in start_nodes}
    queue = list(start_nodes)
    while queue:
        node = queue.pop(0)
        if node == target:
            rev_states = [node[0]]
            rev_actions = []
            while parent[node] is not None:
                prev, a = parent[node]
                rev_actions.append(a)
                rev_states.append(prev[0])
                node = prev
            return list(reversed(rev_states)), list(reversed(rev_actions))
        for a, node2 in edges.get(node, ()):
            if node2 not in parent:
                parent[node2] = (node, a)
                queue.append(node2)
    raise KeyError(f"unreachable product node {target!r}")


def _lasso_from_product(start_nodes, edges, cycle_nodes_path):
    """Build a Lasso from a product cycle (list of nodes, closing implicitly)."""
    head = cycle_nodes_path[0]
    pre_states, pre_actions = _trace_to(start_nodes, edges, head)
    cyc_states = [n[0] for n in cycle_nodes_path]
    cyc_actions = []
    for i, n in enumerate(cycle_nodes_path):
        n2 = cycle_nodes_path[(i + 1) % len(cycle_nodes_path)]
        a = next(a for a, m in edges[n] if m == n2)
        cyc_actions.append(a)
    return Lasso(
        prefix_states=tuple(pre_states[:-1]),
        prefix_actions=tuple(pre_actions),
        cycle_states=tuple(cyc_states),
        cycle_actions=tuple(cyc_actions),
    )


def check_solution(p, mu, mode):
    """Decide whether ``mu`` solves ``p`` in the requested mode.

    STRONG: no reachable goal-free cycle and no goal-free stop.
    FAIR: the strong-cyclic condition (goal reachable from every reachable
    goal-free node, no goal-free stops).
    Under(c): every goal-avoiding infinite behavior of the product violates
    the constraint, decided through the automaton product (module omega);
    goal-free stops are counterexamples since finite trajectories satisfy
    every constraint.
    """
    from .ltl import _sccs

    start, nodes, edges, stops, invalid = _policy_product(p, mu)
    if invalid is not None:
        node, a = invalid
        states, actions = _trace_to(start, edges, node)
        return Verdict(
            kind="INVALID_POLICY",
            witness=FiniteTrajectory(states=tuple(states), actions=tuple(actions)),
        )

    goal_free = {n for n in nodes if n[0] not in p.goal_states}
    # restrict to the goal-free region reachable without passing a goal
    reach = set()
    queue = [n for n in start if n in goal_free]
    reach.update(queue)
    while queue:
        node = queue.pop()
        for a, n2 in edges[node]:
            if n2 in goal_free and n2 not in reach:
                reach.add(n2)
                queue.append(n2)

    for node in sorted(stops & reach, key=str):
        states, actions = _trace_to(start, edges, node)
        return Verdict(
            kind="NOT_A_SOLUTION",
            counterexample=FiniteTrajectory(states=tuple(states), actions=tuple(actions)),
        )

    def succ_gf(n):
        return [m for _, m in edges[n] if m in reach]

    if mode == STRONG:
        for comp in _sccs(sorted(reach, key=str), succ_gf):
            comp_set = set(comp)
            if len(comp) > 1 or any(n in succ_gf(n) for n in comp):
                cycle = _cycle_in_component(comp_set, succ_gf)
                return Verdict(
                    kind="NOT_A_SOLUTION",
                    counterexample=_lasso_from_product(start, edges, cycle),
                )
        return Verdict(kind="STRONG_SOLUTION")

    if mode == FAIR:
        # every reachable goal-free node must reach a goal node
        can_reach_goal = set()
        changed = True
        while changed:
            changed = False
            for n in reach:
                if n in can_reach_goal:
                    continue
                for _, m in edges[n]:
                    if m not in goal_free or m in can_reach_goal:
                        can_reach_goal.add(n)
                        changed = True
                        break
        trapped = reach - can_reach_goal
        if trapped:
            lasso = _fair_trap_lasso(start, edges, trapped)
            return Verdict(kind="NOT_A_SOLUTION", counterexample=lasso)
        return Verdict(kind="FAIR_SOLUTION")

    if isinstance(mode, Under):
        from .constraints import counterexample_search

        lasso = counterexample_search(p, mode.constraint, start, edges, reach)
        if lasso is not None:
            return Verdict(
                kind="NOT_A_SOLUTION",
                constraint=getattr(mode.constraint, "name", None),
                counterexample=lasso,
            )
        return Verdict(
            kind="SOLVES_UNDER_CONSTRAINT",
            constraint=getattr(mode.constraint, "name", None),
        )

    raise ValueError(f"unknown mode {mode!r}")


def _cycle_in_component(comp, succ):
    """A concrete cycle inside a strongly connected node set."""
    v0 = sorted(comp, key=str)[0]
    parent = {v0: None}
    queue = [v0]
    while queue:
        u = queue.pop(0)
        for w in succ(u):
            if w == v0:
                path = [u]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return list(reversed(path))
            if w in comp and w not in parent:
                parent[w] = u
                queue.append(w)
    raise AssertionError("component without cycle")


def _fair_trap_lasso(start, edges, trapped):
    """A fair counterexample lasso: reach a bottom SCC of the goal-unreachable
    region and cover all its policy transitions in one closed walk."""
    from .ltl import _sccs

    def succ(n):
        return [m for _, m in edges[n] if m in trapped]

    comps = _sccs(sorted(trapped, key=str), succ)
    # bottom component: no edges leaving it within trapped
    comp_of = {}
    for i, comp in enumerate(comps):
        for n in comp:
            comp_of[n] = i
    bottom = None
    for i, comp in enumerate(comps):
        if all(comp_of[m] == i for n in comp for m in succ(n)):
            bottom = set(comp)
            break
    assert bottom is not None
    # closed walk covering every edge inside the bottom component
    edges_to_cover = [(n, m) for n in sorted(bottom, key=str) for m in succ(n) if m in bottom]
    walk = [sorted(bottom, key=str)[0]]

    def path(u, v):
        parent = {u: None}
        queue = [u]
        while queue:
            x = queue.pop(0)
            if x == v:
                out = []
                while parent[x] is not None:
                    out.append(x)
                    x = parent[x]
                return list(reversed(out))
            for y in succ(x):
                if y in bottom and y not in parent:
                    parent[y] = x
                    queue.append(y)
        raise AssertionError("bottom SCC not strongly connected")

    for n, m in edges_to_cover:
        walk.extend(path(walk[-1], n))
        walk.append(m)
    walk.extend(path(walk[-1], walk[0]))
    cycle = walk[:-1] if len(walk) > 1 else walk
    return _lasso_from_product(start, edges, cycle)


# ---------------------------------------------------------------------------
# JSON and DOT serialization
# ---------------------------------------------------------------------------


def pondp_to_json_dict(p, cls=None):
    """JSON document for a problem; state, observation and action ids are
    stringified, so round-trips are exact for string-identified problems."""
    doc = {
        "states": [str(s) for s in sorted(p.states, key=str)],
        "init": [str(s) for s in sorted(p.init, key=str)],
        "observations": [str(o) for o in sorted(p.observations, key=str)],
        "actions": [str(a) for a in sorted(p.actions, key=str)],
        "goal_states": [str(s) for s in sorted(p.goal_states, key=str)],
        "obs": {str(s): str(p.obs_fn[s]) for s in sorted(p.states, key=str)},
        "avail": {
            str(s): [str(a) for a in sorted(p.avail.get(s, ()), key=str)]
            for s in sorted(p.states, key=str)
        },
        "succ": {
            f"{a}|{s}": [str(t) for t in sorted(v, key=str)]
            for (a, s), v in sorted(p.succ.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1])))
        },
    }
    if p.annotations:
        doc["annotations"] = p.annotations
    if cls is not None:
        doc["class"] = {
            "goal_observations": sorted(cls.goal_observations, key=str),
            "avail_by_obs": {
                str(o): sorted(a, key=str) for o, a in sorted(cls.avail_by_obs.items(), key=str)
            },
        }
    return doc


def pondp_from_json_dict(doc):
    succ = {}
    for key, targets in doc["succ"].items():
        a, _, s = key.partition("|")
        succ[(a, s)] = frozenset(targets)
    return Pondp(
        states=frozenset(doc["states"]),
        init=frozenset(doc["init"]),
        observations=frozenset(doc["observations"]),
        actions=frozenset(doc["actions"]),
        goal_states=frozenset(doc["goal_states"]),
        avail={s: frozenset(v) for s, v in doc["avail"].items()},
        obs_fn=dict(doc["obs"]),
        succ=succ,
        annotations=doc.get("annotations", {}),
    )


def policy_to_json_dict(mu):
    return {
        "memory_states": [str(m) for m in mu.memory_states],
        "initial": str(mu.initial),
        "update": [
            [str(m), str(o), str(m2)]
            for (m, o), m2 in sorted(mu.update.items(), key=str)
        ],
        "output": [
            [str(m), str(o), str(a)]
            for (m, o), a in sorted(mu.output.items(), key=str)
        ],
    }


def policy_from_json_dict(doc):
    return Policy(
        memory_states=tuple(doc["memory_states"]),
        initial=doc["initial"],
        update={(m, o): m2 for m, o, m2 in doc.get("update", [])},
        output={(m, o): a for m, o, a in doc.get("output", [])},
    )


def load_pondp(path):
    with open(path) as fh:
        return pondp_from_json_dict(json.load(fh))


def save_json(doc, path):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def trajectory_to_json_dict(t):
    if isinstance(t, FiniteTrajectory):
        return {
            "kind": "finite",
            "level": t.level,
            "states": [str(s) for s in t.states],
            "actions": [str(a) for a in t.actions],
            "truncated": t.truncated,
        }
    return {
        "kind": "lasso",
        "level": t.level,
        "prefix_states": [str(s) for s in t.prefix_states],
        "prefix_actions": [str(a) for a in t.prefix_actions],
        "cycle_states": [str(s) for s in t.cycle_states],
        "cycle_actions": [str(a) for a in t.cycle_actions],
    }


def product_to_dot(p, mu, name="product", highlight=()):
    """DOT export of the policy product graph; ``highlight`` marks the
    states of a counterexample."""
    hi = set(highlight)
    start, nodes, edges, stops, invalid = _policy_product(p, mu)
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    ids = {n: i for i, n in enumerate(sorted(nodes, key=str))}
    for n, i in ids.items():
        s, m = n
        shape = "doublecircle" if s in p.goal_states else "circle"
        color = ',style=filled,fillcolor="#ffdddd"' if s in hi else ""
        lines.append(f'  n{i} [shape={shape},label="{s}\\n{m}"{color}];')
    for n in start:
        lines.append(f"  init_{ids[n]} [shape=point]; init_{ids[n]} -> n{ids[n]};")
    for n in sorted(nodes, key=str):
        for a, n2 in edges.get(n, ()):
            lines.append(f'  n{ids[n]} -> n{ids[n2]} [label="{a}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def pondp_to_dot(p, name="pondp", highlight=()):
    """DOT export; ``highlight`` may carry states of a counterexample."""
    hi = set(highlight)
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for s in sorted(p.states, key=str):
        shape = "doublecircle" if s in p.goal_states else "circle"
        color = ',style=filled,fillcolor="#ffdddd"' if s in hi else ""
        lines.append(f'  "{s}" [shape={shape},label="{s}\\n{p.obs_fn[s]}"{color}];')
    for s in sorted(p.init, key=str):
        lines.append(f'  "init_{s}" [shape=point]; "init_{s}" -> "{s}";')
    for (a, s), targets in sorted(p.succ.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
        for t in sorted(targets, key=str):
            lines.append(f'  "{s}" -> "{t}" [label="{a}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
