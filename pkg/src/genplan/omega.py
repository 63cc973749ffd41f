"""Deterministic parity automata, parity games, and policy synthesis.

Implements the back half of the synthesis pipeline: determinization of
Buchi automata into parity word automata via compact Safra trees, the
product of an observation projection with a DPW as a two-player parity
game, Zielonka's recursive solver, strategy extraction into a policy
transducer, and the direct small DPW for qualitative-numerical
constraints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import ltl
from .errors import AlphabetMismatchError, SizeBudgetExceededError
from .ltl import Word, _sccs

DEFAULT_BUDGET = ltl.DEFAULT_BUDGET


# ---------------------------------------------------------------------------
# Deterministic parity word automata
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Dpw:
    """Deterministic parity word automaton with max-even acceptance.

    ``delta`` is total on states x alphabet.  A word is accepted iff the
    largest priority among the states visited infinitely often is even.
    """

    states: tuple
    alphabet: frozenset
    delta: dict
    initial: object
    priority: dict

    def run_from(self, q, letters):
        for a in letters:
            q = self.delta[(q, a)]
        return q

    def to_json_dict(self):
        states = [str(q) for q in self.states]
        return {
            "states": states,
            "alphabet": sorted(self.alphabet),
            "delta": {
                f"{q}|{a}": str(self.delta[(q, a)])
                for q in self.states
                for a in sorted(self.alphabet)
            },
            "initial": str(self.initial),
            "priority": {str(q): self.priority[q] for q in self.states},
        }


def dpw_from_json_dict(doc):
    states = tuple(doc["states"])
    alphabet = frozenset(doc["alphabet"])
    delta = {}
    for key, tgt in doc["delta"].items():
        q, _, a = key.rpartition("|")
        delta[(q, a)] = tgt
    return Dpw(
        states=states,
        alphabet=alphabet,
        delta=delta,
        initial=doc["initial"],
        priority={q: int(p) for q, p in doc["priority"].items()},
    )


def dpw_accepts(d, w):
    """Run the unique run over prefix then cycle until the state at the
    cycle boundary repeats; accept iff the max priority on the run's
    recurring part is even."""
    extra = w.symbol_set() - set(d.alphabet)
    if extra:
        raise AlphabetMismatchError(f"word symbols outside alphabet: {sorted(extra)}")
    q = d.run_from(d.initial, w.prefix)
    seen = {}
    maxes = []
    while q not in seen:
        seen[q] = len(maxes)
        best = 0
        for a in w.cycle:
            q = d.delta[(q, a)]
            best = max(best, d.priority[q])
        maxes.append(best)
    start = seen[q]
    return max(maxes[start:]) % 2 == 0


def normalize_priorities(d):
    """Compact priorities into a contiguous range preserving order and parity."""
    used = sorted(set(d.priority.values()))
    remap = {}
    cur = None
    prev = None
    for p in used:
        if cur is None:
            cur = p % 2
        elif (p - prev) % 2 == 1:
            cur += 1
        remap[p] = cur
        prev = p
    return Dpw(
        states=d.states,
        alphabet=d.alphabet,
        delta=d.delta,
        initial=d.initial,
        priority={q: remap[p] for q, p in d.priority.items()},
    )


# ---------------------------------------------------------------------------
# Determinization: compact Safra trees with parity output
# ---------------------------------------------------------------------------
#
# A tree is a nested tuple (name, label, children).  Node names encode
# seniority: ancestors are older than descendants and siblings are ordered
# oldest first.  Each transition records e = the least name that died and
# f = the least name whose label collapsed onto its children (a green
# flash).  With min-even parity, 2f if f < e, else 2e - 1, else neutral;
# a name that is eventually stable and flashes infinitely often yields an
# even dominant priority exactly when the underlying Buchi automaton has
# an accepting run.  State-based priorities are recovered by pairing each
# tree with the priority of its incoming transition.


def _tree_step(tree, sigma, nba):
    """One Safra-tree transition; returns (tree', min-parity priority)."""
    died = []
    greened = []
    counter = itertools.count(_max_name(tree) + 1)

    def move_and_spawn(node):
        name, label, kids = node
        new_label = frozenset(
            r for q in label for r in nba.successors(q, sigma)
        )
        new_kids = [move_and_spawn(k) for k in kids]
        burst = new_label & nba.accepting
        if burst:
            new_kids.append((next(counter), burst, ()))
        return (name, new_label, tuple(new_kids))

    def dedup(node, stolen):
        name, label, kids = node
        label = label - stolen
        claimed = set()
        new_kids = []
        for k in kids:
            k2 = dedup(k, stolen | claimed)
            claimed |= k2[1]
            new_kids.append(k2)
        return (name, label, tuple(new_kids))

    def drop_empty(node):
        name, label, kids = node
        kids = tuple(k2 for k in kids for k2 in [drop_empty(k)] if k2 is not None)
        if not label:
            died.append(name)
            return None
        return (name, label, kids)

    def breakpoint_pass(node):
        name, label, kids = node
        if kids and label == frozenset().union(*(k[1] for k in kids)):
            greened.append(name)
            return (name, label, ())
        return (name, label, tuple(breakpoint_pass(k) for k in kids))

    if tree is None:
        out = None
    else:
        t = move_and_spawn(tree)
        t = dedup(t, frozenset())
        t = drop_empty(t)
        if t is not None:
            t = breakpoint_pass(t)
        out = t

    e = min(died) if died else None
    f = min(greened) if greened else None
    n = len(nba.states)
    neutral = 4 * n + 1
    if f is not None and (e is None or f < e):
        pri = 2 * f
    elif e is not None:
        pri = 2 * e - 1
    else:
        pri = neutral
    return _compact_names(out), pri


def _max_name(tree):
    if tree is None:
        return 0
    best = tree[0]
    for k in tree[2]:
        best = max(best, _max_name(k))
    return best


def _all_names(tree, out):
    if tree is None:
        return
    out.append(tree[0])
    for k in tree[2]:
        _all_names(k, out)


def _compact_names(tree):
    names = []
    _all_names(tree, names)
    remap = {nm: i + 1 for i, nm in enumerate(sorted(names))}

    def rename(node):
        name, label, kids = node
        return (remap[name], label, tuple(rename(k) for k in kids))

    return rename(tree) if tree is not None else None


def nba_to_dpw(a, budget=DEFAULT_BUDGET):
    """Determinize via the compact-tree construction.  ``L(Dpw) = L(Nba)``;
    the number of priorities is linear in the number of Buchi states.

    Trees are paired with the priority of their incoming transition to get
    state-based priorities; the result is reduced by a priority-respecting
    bisimulation quotient (safe, not canonical minimization) and relabeled
    with integer states.
    """
    n = len(a.states)
    neutral = 4 * n + 1
    init_tree = (1, frozenset(a.initial), ()) if a.initial else None

    step_cache = {}

    def step(tree, sigma):
        key = (tree, sigma)
        if key not in step_cache:
            step_cache[key] = _tree_step(tree, sigma, a)
        return step_cache[key]

    initial = (init_tree, neutral)
    states = [initial]
    index = {initial: 0}
    delta = {}
    queue = [initial]
    while queue:
        st = queue.pop()
        tree, _ = st
        for sigma in sorted(a.alphabet):
            nxt = step(tree, sigma)
            if nxt not in index:
                if len(states) >= budget:
                    raise SizeBudgetExceededError(
                        f"determinization exceeded budget of {budget} states"
                    )
                index[nxt] = len(states)
                states.append(nxt)
                queue.append(nxt)
            delta[(st, sigma)] = nxt

    # convert min-parity to the max-even convention
    k = 4 * n + 2
    d = Dpw(
        states=tuple(states),
        alphabet=a.alphabet,
        delta=delta,
        initial=initial,
        priority={st: k - st[1] for st in states},
    )
    return normalize_priorities(quotient_dpw(d))


def quotient_dpw(d):
    """Quotient by the coarsest partition refining priorities and respecting
    the transition function; preserves the language and relabels states with
    integers."""
    letters = sorted(d.alphabet)
    block = {q: d.priority[q] for q in d.states}
    while True:
        sig = {
            q: (block[q], tuple(block[d.delta[(q, a)]] for a in letters))
            for q in d.states
        }
        classes = {}
        for q in d.states:
            classes.setdefault(sig[q], len(classes))
        new_block = {q: classes[sig[q]] for q in d.states}
        if new_block == block:
            break
        block = new_block
    rep = {}
    for q in d.states:
        rep.setdefault(block[q], q)
    n_classes = len(rep)
    delta = {
        (b, a): block[d.delta[(rep[b], a)]] for b in range(n_classes) for a in letters
    }
    return Dpw(
        states=tuple(range(n_classes)),
        alphabet=d.alphabet,
        delta=delta,
        initial=block[d.initial],
        priority={b: d.priority[rep[b]] for b in range(n_classes)},
    )


# ---------------------------------------------------------------------------
# Parity games
# ---------------------------------------------------------------------------

CONTROLLER = 0
ENVIRONMENT = 1


@dataclass(frozen=True, eq=False)
class ParityGame:
    """Two-player max-parity game.  ``owner`` maps node -> 0 (controller,
    wins on even) or 1 (environment); every node has at least one edge."""

    nodes: tuple
    owner: dict
    priority: dict
    edges: dict  # node -> tuple of successor nodes
    initial: tuple
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        for v in self.nodes:
            if not self.edges.get(v):
                raise ValueError(f"dead-end node {v!r} in parity game")


@dataclass(frozen=True, eq=False)
class GameSolution:
    region: dict  # node -> winning player
    strategy: dict  # node -> chosen successor, for the node owner's winning region


def _attractor(nodes, edges, owner, player, target):
    """Player-``player`` attractor to ``target``; returns (set, strategy)."""
    preds = {v: [] for v in nodes}
    for v in nodes:
        for w in edges[v]:
            preds[w].append(v)
    out_deg = {v: len(edges[v]) for v in nodes}
    attr = set(target)
    strategy = {}
    queue = list(target)
    while queue:
        w = queue.pop()
        for v in preds[w]:
            if v in attr:
                continue
            if owner[v] == player:
                attr.add(v)
                strategy[v] = w
                queue.append(v)
            else:
                out_deg[v] -= 1
                if out_deg[v] == 0:
                    attr.add(v)
                    queue.append(v)
    return attr, strategy


def solve_parity(g):
    """Zielonka's recursive algorithm; returns winning regions and positional
    strategies for both players."""
    region = {}
    strategy = {}

    def rec(nodes):
        if not nodes:
            return set(), set(), {}, {}
        edges = {v: tuple(w for w in g.edges[v] if w in nodes) for v in nodes}
        d = max(g.priority[v] for v in nodes)
        player = d % 2
        z = {v for v in nodes if g.priority[v] == d}
        attr, attr_strat = _attractor(nodes, edges, g.owner, player, z)
        w0, w1, s0, s1 = rec(nodes - attr)
        win = (w0, w1)[player]
        lose = (w0, w1)[1 - player]
        strat_win = (s0, s1)[player]
        strat_lose = (s0, s1)[1 - player]
        if not lose:
            # player takes everything: attractor strategy, plus any move
            # that stays inside for the priority-d nodes the player owns
            strat = dict(strat_win)
            strat.update(attr_strat)
            for v in z:
                if g.owner[v] == player and v not in strat:
                    strat[v] = edges[v][0]
            if player == 0:
                return set(nodes), set(), strat, {}
            return set(), set(nodes), {}, strat
        b, b_strat = _attractor(nodes, edges, g.owner, 1 - player, lose)
        w0b, w1b, s0b, s1b = rec(nodes - b)
        if 1 - player == 0:
            win0 = w0b | b
            strat0 = dict(s0b)
            strat0.update(b_strat)
            strat0.update(strat_lose)
            return win0, w1b, strat0, s1b
        win1 = w1b | b
        strat1 = dict(s1b)
        strat1.update(b_strat)
        strat1.update(strat_lose)
        return w0b, win1, s0b, strat1

    w0, w1, s0, s1 = rec(set(g.nodes))
    for v in w0:
        region[v] = 0
    for v in w1:
        region[v] = 1
    strategy.update(s0)
    strategy.update(s1)
    # ensure every winning node of its owner has a move recorded
    for v in g.nodes:
        if g.owner[v] == region[v] and v not in strategy:
            same = [w for w in g.edges[v] if region[w] == region[v]]
            strategy[v] = same[0] if same else g.edges[v][0]
    return GameSolution(region=region, strategy=strategy)


def cycle_with_max_parity(nodes, succ, priority, parity):
    """Find a cycle whose maximum priority has the given parity, restricted
    to ``nodes``; returns the cycle as a node list or None.

    Works by fixing a candidate dominant priority p of the right parity,
    restricting to priorities <= p, and looking for a strongly connected
    component that contains a p-node and a cycle.
    """
    prios = sorted({priority[v] for v in nodes if priority[v] % 2 == parity}, reverse=True)
    for p in prios:
        sub = {v for v in nodes if priority[v] <= p}

        def s(v):
            return [w for w in succ(v) if w in sub]

        for comp in _sccs(sorted(sub, key=repr), s):
            comp_set = set(comp)
            if not any(priority[v] == p for v in comp_set):
                continue
            has_cycle = len(comp) > 1 or any(v in s(v) for v in comp)
            if not has_cycle:
                continue
            # build a concrete cycle through some p-node
            top = next(v for v in comp if priority[v] == p)
            cyc = _cycle_through(top, comp_set, s)
            if cyc is not None:
                return cyc
    return None


def _cycle_through(v, comp, succ):
    """A cycle from v back to v inside comp (nonempty; None if impossible)."""
    parent = {v: None}
    queue = [v]
    while queue:
        u = queue.pop(0)
        for w in succ(u):
            if w == v:
                path = [u]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return list(reversed(path))
            if w in comp and w not in parent:
                parent[w] = u
                queue.append(w)
    return None


def verify_strategy(g, solution, player):
    """Cycle analysis: within the player's region, with the player's moves
    fixed and the opponent free, every cycle's max priority must favor the
    player.  Returns True when the strategy is winning."""
    region = {v for v, p in solution.region.items() if p == player}

    def succ(v):
        if g.owner[v] == player:
            w = solution.strategy.get(v)
            return [w] if w is not None and w in region else []
        return [w for w in g.edges[v] if w in region]

    for v in region:
        if g.owner[v] == player:
            w = solution.strategy.get(v)
            if w is None or solution.region.get(w) != player:
                return False
        else:
            # the opponent must not be able to leave the region
            if any(solution.region[w] != player for w in g.edges[v]):
                return False
    bad = cycle_with_max_parity(region, succ, g.priority, 1 - player)
    return bad is None


# ---------------------------------------------------------------------------
# The synthesis game: projection x DPW
# ---------------------------------------------------------------------------

WIN = ("sink", "win")
LOSE = ("sink", "lose")


def build_parity_game(p, d):
    """Product of a fully observable projection with a DPW over its
    observation-action alphabet.

    Controller nodes (s, q) pick an available action after the DPW reads
    the observation letter; environment nodes (s, q', a) pick a successor
    state.  Goal observations collapse into an even sink: any play that
    visits the goal satisfies the reachability disjunct, and a policy may
    stop there, so continuations are irrelevant.  Non-goal nodes with no
    available action are losing sinks.
    """
    sigma = set(p.observations) | set(p.actions)
    if not sigma <= set(d.alphabet):
        raise AlphabetMismatchError(
            "DPW alphabet does not cover the projection's observations and actions"
        )
    maxpri = max(d.priority.values())
    even_hi = maxpri if maxpri % 2 == 0 else maxpri + 1
    odd_hi = even_hi + 1

    nodes = []
    owner = {}
    priority = {}
    edges = {}
    payload = {}

    def add(v, own, pri, pl):
        if v not in owner:
            nodes.append(v)
            owner[v] = own
            priority[v] = pri
            payload[v] = pl
        return v

    def win():
        add(WIN, CONTROLLER, 0, ("win",))
        edges[WIN] = (WIN,)
        return WIN

    def lose():
        add(LOSE, CONTROLLER, 1, ("lose",))
        edges[LOSE] = (LOSE,)
        return LOSE

    initial = []
    queue = []

    def ctrl_node(s, q):
        if s in p.goal_states:
            return win()
        v = ("c", s, q)
        if v not in owner:
            add(v, CONTROLLER, d.priority[q], (s, q, None))
            queue.append(v)
        return v

    for s in sorted(p.init, key=str):
        initial.append(ctrl_node(s, d.initial))

    while queue:
        v = queue.pop()
        _, s, q = v
        q1 = d.delta[(q, s)]
        outs = []
        for a in sorted(p.avail.get(s, ()), key=str):
            e = ("e", s, q1, a)
            if e not in owner:
                add(e, ENVIRONMENT, d.priority[q1], (s, q1, a))
                q2 = d.delta[(q1, a)]
                succs = tuple(
                    ctrl_node(s2, q2) for s2 in sorted(p.succ[(a, s)], key=str)
                )
                edges[e] = succs
            outs.append(e)
        edges[v] = tuple(outs) if outs else (lose(),)

    return ParityGame(
        nodes=tuple(nodes),
        owner=owner,
        priority=priority,
        edges=edges,
        initial=tuple(initial),
        payload=payload,
    )


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    realizable: bool
    policy: object = None
    counterstrategy: dict = None
    game: ParityGame = None
    solution: GameSolution = None
    dpw: Dpw = None
    formula: object = None


def synthesize(p, psi, budget=DEFAULT_BUDGET, direct=None):
    """Solve the projection under an observation-level LTL constraint.

    Builds ``constraint -> eventually goal`` over the projection's
    observation-action alphabet, determinizes it, and solves the resulting
    parity game, extracting a transducer policy whose memory is the
    reachable automaton states.

    The automaton comes from the generic pipeline (tableau NBA, then
    compact-tree determinization).  When the constraint is a conjunction
    of per-variable counter constraints, the hand-built record automaton
    (`qnp_dpw_direct`) recognizes the same language with exponentially
    fewer states, and is used instead; ``direct`` forces the choice.
    """
    from .constraints import constraint_formula
    from .model import Policy

    sigma = frozenset(set(p.observations) | set(p.actions))
    psi_f = constraint_formula(psi, p) if not isinstance(psi, ltl.Formula) else psi
    goal_f = ltl.lor(*[ltl.Letter(g) for g in sorted(p.goal_states, key=str)])
    phi = ltl.implies(psi_f, ltl.eventually(goal_f))
    if direct is None:
        direct = _qnp_template_vars(psi) is not None
    if direct:
        variables = _qnp_template_vars(psi)
        if variables is None:
            raise ValueError("constraint is not a conjunction of counter constraints")
        dpw = _qnp_direct_for_problem(p, variables)
    else:
        nba = ltl.ltl_to_nba(phi, sigma, budget=budget)
        dpw = nba_to_dpw(nba, budget=budget)
    game = build_parity_game(p, dpw)
    sol = solve_parity(game)

    if all(sol.region[v] == CONTROLLER for v in game.initial):
        strategy = _improve_strategy(game, sol)
        played = _played_region(game, strategy)
        memory = sorted(
            {v[2] for v in played if v[0] == "c"} | {dpw.initial}, key=str
        )
        halt = "halt"
        update = {}
        output = {}
        for q in memory:
            for obs in sorted(p.observations, key=str):
                q1 = dpw.delta[(q, obs)]
                v = ("c", obs, q)
                move = strategy.get(v) if v in played else None
                if obs not in p.goal_states and move is not None and move != LOSE:
                    a = move[3]
                    output[(q, obs)] = a
                    update[(q, obs)] = dpw.delta[(q1, a)]
                else:
                    update[(q, obs)] = halt
        for obs in sorted(p.observations, key=str):
            update[(halt, obs)] = halt
        policy = Policy(
            memory_states=tuple(list(memory) + [halt]),
            initial=dpw.initial,
            update=update,
            output=output,
        )
        return SynthesisResult(
            realizable=True, policy=policy, game=game, solution=sol, dpw=dpw, formula=phi
        )
    counter = {
        v: sol.strategy[v]
        for v in game.nodes
        if game.owner[v] == ENVIRONMENT and sol.region[v] == ENVIRONMENT and v in sol.strategy
    }
    return SynthesisResult(
        realizable=False,
        counterstrategy=counter,
        game=game,
        solution=sol,
        dpw=dpw,
        formula=phi,
    )


def _qnp_template_vars(psi):
    """Variables of a (conjunction of) weak counter-constraint templates, or
    None when the constraint has any other shape."""
    template = getattr(psi, "template", None)
    if template is None:
        return None
    if template[0] == "qnp":
        _, var, strong = template
        return None if strong else (var,)
    if template[0] == "and":
        out = []
        for c in template[1:]:
            sub = _qnp_template_vars(c)
            if sub is None:
                return None
            out.extend(sub)
        return tuple(out)
    return None


def _qnp_direct_for_problem(p, variables):
    sigma = frozenset(set(p.observations) | set(p.actions))
    effects = p.annotations.get("action_effects", {})
    obs_zero = {
        o: set(p.annotations.get("obs_zero", {}).get(o, ()))
        for o in p.observations
    }
    inc_letters = {
        v: {a for a in p.actions if effects.get(a, {}).get(v) == "inc"}
        for v in variables
    }
    dec_letters = {
        v: {a for a in p.actions if effects.get(a, {}).get(v) == "dec"}
        for v in variables
    }
    return qnp_dpw_direct(
        variables, frozenset(p.goal_states), obs_zero, inc_letters, dec_letters, sigma
    )


def _played_region(game, strategy):
    """Nodes reachable from the initial nodes when the controller follows
    ``strategy`` and the environment moves freely."""
    reach = set(game.initial)
    queue = list(game.initial)
    while queue:
        v = queue.pop()
        if game.owner[v] == CONTROLLER and v in strategy:
            outs = [strategy[v]]
        else:
            outs = game.edges[v]
        for w in outs:
            if w not in reach:
                reach.add(w)
                queue.append(w)
    return reach


def _play_is_winning(game, strategy):
    reach = _played_region(game, strategy)

    def succ(v):
        if game.owner[v] == CONTROLLER and v in strategy:
            return [strategy[v]] if strategy[v] in reach else []
        return [w for w in game.edges[v] if w in reach]

    return cycle_with_max_parity(reach, succ, game.priority, 1) is None


def _improve_strategy(game, sol):
    """Deterministic tie-breaking: greedily lower each reachable controller
    node's move to the least-indexed alternative that keeps the played game
    winning.  Edge order encodes action order, so this prefers the
    lowest-indexed winning action."""
    strategy = {
        v: w for v, w in sol.strategy.items()
        if game.owner[v] == CONTROLLER and sol.region[v] == CONTROLLER
    }
    rank = {v: {w: i for i, w in enumerate(game.edges[v])} for v in game.nodes}
    while True:
        changed = False
        for v in sorted(_played_region(game, strategy), key=str):
            if game.owner[v] != CONTROLLER or v not in strategy:
                continue
            current = rank[v][strategy[v]]
            for w in game.edges[v]:
                if rank[v][w] >= current:
                    break
                if sol.region.get(w) != CONTROLLER:
                    continue
                trial = dict(strategy)
                trial[v] = w
                if _play_is_winning(game, trial):
                    strategy = trial
                    changed = True
                    break
            if changed:
                break
        if not changed:
            return strategy


def refute_policy(result, p, policy, max_steps=100000):
    """Play a candidate policy against the environment counterstrategy of an
    unrealizable instance; returns a violating trajectory (finite or lasso)
    or None when the policy cannot be refuted from any initial state."""
    from .model import FiniteTrajectory, Lasso

    game = result.game
    sol = result.solution
    start = None
    for v in game.initial:
        if v != WIN and sol.region[v] == ENVIRONMENT:
            start = v
            break
    if start is None:
        return None
    s = start[1]
    q = result.dpw.initial
    mem = policy.initial
    states = [s]
    actions = []
    seen = {}
    for _ in range(max_steps):
        if s in p.goal_states:
            return None
        key = (s, q, mem)
        if key in seen:
            k = seen[key]
            return Lasso(
                prefix_states=tuple(states[:k]),
                prefix_actions=tuple(actions[:k]),
                cycle_states=tuple(states[k:-1]),
                cycle_actions=tuple(actions[k:]),
                level="state",
            )
        seen[key] = len(actions)
        obs = p.obs_fn[s]
        a = policy.output.get((mem, obs))
        if a is None:
            # maximal finite non-goal trajectory: already a counterexample
            return FiniteTrajectory(states=tuple(states), actions=tuple(actions), level="state")
        mem = policy.update.get((mem, obs), mem)
        q1 = result.dpw.delta[(q, s)]
        move = result.counterstrategy.get(("e", s, q1, a))
        q = result.dpw.delta[(q1, a)]
        if move is not None and move not in (WIN, LOSE):
            s = move[1]
        else:
            s = sorted(p.succ[(a, s)], key=str)[0]
        actions.append(a)
        states.append(s)
    return FiniteTrajectory(
        states=tuple(states), actions=tuple(actions), level="state", truncated=True
    )


def dpw_language_difference(d1, d2):
    """Exact language comparison of two DPWs over the same alphabet.

    Returns None when L(d1) = L(d2); otherwise an ultimately periodic
    witness word accepted by exactly one of them.  Works on the synchronous
    product: a difference exists iff some reachable cycle has an even
    dominant priority on one side and an odd one on the other.
    """
    if set(d1.alphabet) != set(d2.alphabet):
        raise AlphabetMismatchError("DPW alphabets differ")
    letters = sorted(d1.alphabet)
    init = (d1.initial, d2.initial)
    nodes = {init}
    edges = {}
    queue = [init]
    while queue:
        v = queue.pop()
        q1, q2 = v
        outs = []
        for a in letters:
            w = (d1.delta[(q1, a)], d2.delta[(q2, a)])
            outs.append((a, w))
            if w not in nodes:
                nodes.add(w)
                queue.append(w)
        edges[v] = outs

    def pri1(v):
        return d1.priority[v[0]]

    def pri2(v):
        return d2.priority[v[1]]

    for pa, pb, side in _parity_pairs(d1, d2, nodes):
        sub = {v for v in nodes if pri1(v) <= pa and pri2(v) <= pb}

        def succ(v):
            return [w for _, w in edges[v] if w in sub]

        for comp in _sccs(sorted(sub, key=repr), succ):
            comp_set = set(comp)
            has_cycle = len(comp) > 1 or any(v in succ(v) for v in comp)
            if not has_cycle:
                continue
            if not any(pri1(v) == pa for v in comp_set):
                continue
            if not any(pri2(v) == pb for v in comp_set):
                continue
            word = _difference_witness(init, edges, comp_set, pa, pb, pri1, pri2)
            if word is not None:
                return word
    return None


def _parity_pairs(d1, d2, nodes):
    p1s = sorted({d1.priority[v[0]] for v in nodes})
    p2s = sorted({d2.priority[v[1]] for v in nodes})
    for pa in p1s:
        for pb in p2s:
            if pa % 2 != pb % 2:
                yield pa, pb, None


def _difference_witness(init, edges, comp, pa, pb, pri1, pri2):
    """Prefix to the component plus a cycle visiting a pa-node and a pb-node."""
    parent = {init: None}
    queue = [init]
    entry = None
    while queue:
        v = queue.pop(0)
        if v in comp:
            entry = v
            break
        for a, w in edges[v]:
            if w not in parent:
                parent[w] = (v, a)
                queue.append(w)
    if entry is None:
        return None
    prefix = []
    v = entry
    while parent[v] is not None:
        u, a = parent[v]
        prefix.append(a)
        v = u
    prefix.reverse()

    cycle = []
    cur = entry
    for want in (lambda v: pri1(v) == pa, lambda v: pri2(v) == pb, lambda v: v == entry):
        hop = _letters_to(cur, want, edges, comp, allow_empty=True)
        if hop is None:
            return None
        letters, cur = hop
        cycle.extend(letters)
    if not cycle:
        hop = _letters_to(entry, lambda v: v == entry, edges, comp, allow_empty=False)
        if hop is None:
            return None
        cycle = hop[0]
    return Word(tuple(prefix), tuple(cycle))


def _letters_to(src, want, edges, comp, allow_empty):
    """Shortest in-component letter path from src to a node satisfying
    ``want`` (nonempty unless allow_empty and src qualifies)."""
    if allow_empty and want(src):
        return [], src
    parent = {}
    queue = [src]
    seen = {src}
    while queue:
        u = queue.pop(0)
        for a, w in edges[u]:
            if w not in comp:
                continue
            if want(w):
                letters = [a]
                uu = u
                while uu in parent:
                    p, la = parent[uu]
                    letters.append(la)
                    uu = p
                letters.reverse()
                return letters, w
            if w not in seen:
                seen.add(w)
                parent[w] = (u, a)
                queue.append(w)
    return None


# ---------------------------------------------------------------------------
# Direct DPW for qualitative numerical constraints
# ---------------------------------------------------------------------------


def qnp_dpw_direct(variables, goal_letters, obs_zero, inc_letters, dec_letters, alphabet):
    """Hand-built DPW for ``(AND_X Psi_X) -> eventually goal``.

    ``obs_zero`` maps each observation letter to the set of variables that
    are zero under it; ``inc_letters``/``dec_letters`` map each variable
    to the action letters carrying the corresponding effect.

    Goal letters collapse into an accepting sink.  Otherwise the state is
    an index appearance record: variables ordered by how recently an
    increment or a zero observation reset them.  A reset at depth k
    emits 2k+1, a decrement at depth k emits 2k; a variable that is
    eventually never reset and keeps decrementing dominates with an even
    priority.  For one variable this is the classic 5-state, 3-priority
    automaton; in general it uses 2|V|+1 priorities (a 3-priority DPW
    does not exist for two or more independently controlled variables).
    """
    variables = tuple(variables)
    n = len(variables)
    goal_letters = frozenset(goal_letters)
    alphabet = frozenset(alphabet)

    resets = {a: set() for a in alphabet}
    goods = {a: set() for a in alphabet}
    for x in variables:
        for a in inc_letters.get(x, ()):
            resets[a].add(x)
        for a in dec_letters.get(x, ()):
            goods[a].add(x)
    for a, zeros in obs_zero.items():
        for x in zeros:
            if x in variables:
                resets[a].add(x)

    sink = ("goal",)
    initial = ("rec", tuple(variables), 0)
    states = [initial]
    index = {initial: 0}
    delta = {}
    priority = {initial: 1, sink: 2}
    queue = [initial]

    def intern(st):
        if st not in index:
            index[st] = len(states)
            states.append(st)
            queue.append(st)
        return st

    while queue:
        st = queue.pop()
        if st == sink:
            for a in sorted(alphabet):
                delta[(st, a)] = sink
            continue
        _, record, _ = st
        for a in sorted(alphabet):
            if a in goal_letters:
                delta[(st, a)] = intern(sink)
                continue
            rs = resets[a]
            gs = goods[a]
            # depth = 1-based position from the front (most recently reset);
            # deeper positions are more senior and dominate.
            e = max((i + 1 for i, x in enumerate(record) if x in rs), default=0)
            g = max((i + 1 for i, x in enumerate(record) if x in gs), default=0)
            if e or g:
                pri = max(2 * e + 1 if e else 0, 2 * g if g else 0)
            else:
                pri = 1
            new_record = tuple(x for x in record if x in rs) + tuple(
                x for x in record if x not in rs
            )
            nxt = intern(("rec", new_record, pri))
            priority[nxt] = pri
            delta[(st, a)] = nxt

    d = Dpw(
        states=tuple(states),
        alphabet=alphabet,
        delta=delta,
        initial=initial,
        priority=priority,
    )
    return normalize_priorities(d)


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------


def nba_to_dot(a, name="nba"):
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for q in a.states:
        shape = "doublecircle" if q in a.accepting else "circle"
        lines.append(f'  "{q}" [shape={shape}];')
    for q in a.initial:
        lines.append(f'  "init_{q}" [shape=point]; "init_{q}" -> "{q}";')
    for (q, sym), tgts in sorted(a.transitions.items(), key=repr):
        for r in tgts:
            lines.append(f'  "{q}" -> "{r}" [label="{sym}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dpw_to_dot(d, name="dpw"):
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    ids = {q: i for i, q in enumerate(d.states)}
    for q in d.states:
        lines.append(f'  n{ids[q]} [shape=circle,label="{ids[q]}:{d.priority[q]}"];')
    lines.append(f"  init [shape=point]; init -> n{ids[d.initial]};")
    for (q, sym), r in sorted(d.delta.items(), key=repr):
        lines.append(f'  n{ids[q]} -> n{ids[r]} [label="{sym}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def game_to_dot(g, name="game"):
    lines = [f"digraph {name} {{"]
    ids = {v: i for i, v in enumerate(g.nodes)}
    for v in g.nodes:
        shape = "box" if g.owner[v] == CONTROLLER else "diamond"
        label = f"{g.priority[v]}"
        lines.append(f'  n{ids[v]} [shape={shape},label="{label}"];')
    for v in g.nodes:
        for w in g.edges[v]:
            lines.append(f"  n{ids[v]} -> n{ids[w]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
