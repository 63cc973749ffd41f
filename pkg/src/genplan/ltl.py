"""Linear-time temporal logic over a finite alphabet of symbols.

Words assign exactly one alphabet symbol to each position, so a letter
formula holds iff it is the symbol at the current position.  The module
provides the concrete syntax, evaluation on ultimately periodic words
(the semantic oracle used to test every automaton in the pipeline), and
the closure-tableau translation to nondeterministic Buchi automata.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import (
    AlphabetMismatchError,
    LtlParseError,
    SizeBudgetExceededError,
    UnknownLetterError,
)

DEFAULT_BUDGET = 10**6


# ---------------------------------------------------------------------------
# Ultimately periodic words
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Word:
    """An ultimately periodic word: ``prefix`` followed by ``cycle`` forever."""

    prefix: tuple
    cycle: tuple

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("word cycle must be nonempty")
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))

    @property
    def letters(self):
        return self.prefix + self.cycle

    def symbol_set(self):
        return set(self.letters)

    def at(self, i):
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]


# ---------------------------------------------------------------------------
# Abstract syntax
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Formula:
    @property
    def size(self):
        """Node count of the syntax tree."""
        return 1 + sum(c.size for c in children(self))


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class Letter(Formula):
    name: str


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


TRUE = TrueF()
FALSE = Not(TRUE)


def children(f):
    if isinstance(f, (TrueF, Letter)):
        return ()
    if isinstance(f, (Not, Next)):
        return (f.operand,)
    return (f.left, f.right)


def lnot(f):
    """Negation, collapsing double negations."""
    if isinstance(f, Not):
        return f.operand
    return Not(f)


def land(*fs):
    fs = [f for f in fs if f != TRUE]
    if not fs:
        return TRUE
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def lor(*fs):
    return lnot(land(*[lnot(f) for f in fs])) if fs else FALSE


def implies(f, g):
    return lnot(And(f, lnot(g)))


def eventually(f):
    return Until(TRUE, f)


def always(f):
    return lnot(Until(TRUE, lnot(f)))


def release(f, g):
    return lnot(Until(lnot(f), lnot(g)))


def letters_of(f):
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Letter):
            out.add(g.name)
        stack.extend(children(g))
    return out


def subformulas(f):
    """All distinct subformulas, children before parents."""
    seen = {}

    def visit(g):
        if g in seen:
            return
        for c in children(g):
            visit(c)
        seen[g] = len(seen)

    visit(f)
    return sorted(seen, key=seen.get)


# ---------------------------------------------------------------------------
# Concrete syntax
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<quoted>"[^"]*")
      | (?P<arrow>->)
      | (?P<punct>[!&|()])
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    )""",
    re.VERBOSE,
)

_RESERVED = {"X", "U", "F", "G", "true", "false"}


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:].lstrip()
            if not rest:
                break
            raise LtlParseError(f"unexpected character {rest[0]!r}", position=pos)
        if m.group("quoted"):
            tokens.append(("letter", m.group("quoted")[1:-1], m.start()))
        elif m.group("arrow"):
            tokens.append(("op", "->", m.start()))
        elif m.group("punct"):
            tokens.append(("op", m.group("punct"), m.start()))
        else:
            name = m.group("ident")
            if name in _RESERVED:
                tokens.append(("kw", name, m.start()))
            else:
                tokens.append(("letter", name, m.start()))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent with precedence unary > U > & > | > ->."""

    def __init__(self, tokens, alphabet):
        self.tokens = tokens
        self.alphabet = alphabet
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            raise LtlParseError(f"expected {value!r}, found {val!r}", position=pos)

    def parse(self):
        f = self.impl()
        kind, val, pos = self.peek()
        if kind != "end":
            raise LtlParseError(f"trailing input at {val!r}", position=pos)
        return f

    def impl(self):
        left = self.disj()
        if self.peek()[1] == "->":
            self.take()
            return implies(left, self.impl())
        return left

    def disj(self):
        out = self.conj()
        while self.peek()[1] == "|":
            self.take()
            out = lor(out, self.conj())
        return out

    def conj(self):
        out = self.until()
        while self.peek()[1] == "&":
            self.take()
            out = And(out, self.until())
        return out

    def until(self):
        left = self.unary()
        if self.peek()[0] == "kw" and self.peek()[1] == "U":
            self.take()
            return Until(left, self.until())
        return left

    def unary(self):
        kind, val, pos = self.peek()
        if val == "!":
            self.take()
            return lnot(self.unary())
        if kind == "kw" and val == "X":
            self.take()
            return Next(self.unary())
        if kind == "kw" and val == "F":
            self.take()
            return eventually(self.unary())
        if kind == "kw" and val == "G":
            self.take()
            return always(self.unary())
        if val == "(":
            self.take()
            f = self.impl()
            self.expect(")")
            return f
        if kind == "kw" and val == "true":
            self.take()
            return TRUE
        if kind == "kw" and val == "false":
            self.take()
            return FALSE
        if kind == "letter":
            self.take()
            if self.alphabet is not None and val not in self.alphabet:
                raise UnknownLetterError(f"letter {val!r} not in alphabet", position=pos)
            return Letter(val)
        raise LtlParseError(f"unexpected token {val!r}", position=pos)


def parse_ltl(text, alphabet=None):
    """Parse LTL text over ``alphabet``; letters are bare identifiers or quoted."""
    return _Parser(_tokenize(text), alphabet).parse()


_BARE_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def _letter_text(name):
    if _BARE_RE.match(name) and name not in _RESERVED:
        return name
    return f'"{name}"'


def pretty(f):
    """Render a formula; ``parse_ltl(pretty(f))`` rebuilds exactly ``f``."""
    return _pretty(f, 0)


# precedence levels: 0 impl, 1 or, 2 and, 3 until, 4 unary/atom
def _pretty(f, level):
    if f == TRUE:
        return "true"
    if f == FALSE:
        return "false"
    if isinstance(f, Letter):
        return _letter_text(f.name)
    if isinstance(f, Until) and f.left == TRUE:
        return _wrap(f"F {_pretty(f.right, 4)}", 4, level)
    if isinstance(f, Not):
        g = f.operand
        if isinstance(g, Until) and g.left == TRUE and isinstance(g.right, Not):
            return _wrap(f"G {_pretty(g.right.operand, 4)}", 4, level)
        if isinstance(g, And) and isinstance(g.left, Not) and isinstance(g.right, Not):
            # !(!a & !b) prints as a | b
            return _wrap(
                f"{_pretty(g.left.operand, 1)} | {_pretty(g.right.operand, 2)}", 1, level
            )
        if isinstance(g, And) and isinstance(g.right, Not):
            # !(a & !b) prints as a -> b
            return _wrap(f"{_pretty(g.left, 1)} -> {_pretty(g.right.operand, 0)}", 0, level)
        return _wrap(f"! {_pretty(g, 4)}", 4, level)
    if isinstance(f, Next):
        return _wrap(f"X {_pretty(f.operand, 4)}", 4, level)
    if isinstance(f, And):
        return _wrap(f"{_pretty(f.left, 2)} & {_pretty(f.right, 3)}", 2, level)
    if isinstance(f, Until):
        return _wrap(f"{_pretty(f.left, 4)} U {_pretty(f.right, 3)}", 3, level)
    raise TypeError(f"not a formula: {f!r}")


def _wrap(text, prec, level):
    return f"({text})" if prec < level else text


# ---------------------------------------------------------------------------
# Semantics on ultimately periodic words
# ---------------------------------------------------------------------------


def eval_lasso(f, w, alphabet=None):
    """Decide ``prefix . cycle^omega |= f`` by tabulating subformula truth.

    Until is a least fixpoint; on the loop it is solved exactly by a
    backward pass over two unrollings of the cycle (a minimal witness for
    U lies within one period).  This function is the semantic oracle for
    all automata in the pipeline and shares no code with them.
    """
    if alphabet is not None:
        extra = w.symbol_set() - set(alphabet)
        if extra:
            raise AlphabetMismatchError(f"word symbols outside alphabet: {sorted(extra)}")
    subs = subformulas(f)
    np, nc = len(w.prefix), len(w.cycle)
    letters = w.prefix + w.cycle
    val = {}  # sub -> list of truth values over the np + nc positions

    def nxt(i):
        return i + 1 if i + 1 < np + nc else np

    for g in subs:
        if isinstance(g, TrueF):
            val[g] = [True] * (np + nc)
        elif isinstance(g, Letter):
            val[g] = [letters[i] == g.name for i in range(np + nc)]
        elif isinstance(g, Not):
            val[g] = [not v for v in val[g.operand]]
        elif isinstance(g, And):
            val[g] = [a and b for a, b in zip(val[g.left], val[g.right])]
        elif isinstance(g, Next):
            sub = val[g.operand]
            val[g] = [sub[nxt(i)] for i in range(np + nc)]
        elif isinstance(g, Until):
            lv, rv = val[g.left], val[g.right]
            cyc = [False] * nc
            acc = False
            for k in range(2 * nc - 1, -1, -1):
                i = k % nc
                acc = rv[np + i] or (lv[np + i] and acc)
                if k < nc:
                    cyc[i] = acc
            out = [False] * np + cyc
            for i in range(np - 1, -1, -1):
                out[i] = rv[i] or (lv[i] and out[i + 1])
            val[g] = out
        else:
            raise TypeError(f"not a formula: {g!r}")
    return val[f][0]


# ---------------------------------------------------------------------------
# Nondeterministic Buchi automata
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Nba:
    """Nondeterministic Buchi automaton over explicit letters.

    ``transitions`` maps (state, letter) to a tuple of successor states;
    missing entries mean no move.  A run is accepting iff it visits
    ``accepting`` infinitely often.
    """

    states: tuple
    alphabet: frozenset
    transitions: dict
    initial: frozenset
    accepting: frozenset

    def successors(self, q, a):
        return self.transitions.get((q, a), ())


def _consistent_states(f, alphabet):
    """Enumerate maximally consistent truth assignments over the closure.

    A state is an assignment to all subformulas that respects boolean
    structure, assigns at most one closure letter (matching a concrete
    alphabet symbol), and satisfies the local expansion of Until.
    Returns (states, untils) where each state is a dict with keys
    'val' (sub -> bool) and 'letters' (compatible alphabet symbols).
    """
    subs = subformulas(f)
    cl_letters = [g for g in subs if isinstance(g, Letter)]
    nexts = [g for g in subs if isinstance(g, Next)]
    untils = [g for g in subs if isinstance(g, Until)]
    free = nexts + untils

    # letter assignment options: one per alphabet symbol; symbols not in
    # the closure collapse to a single "no closure letter true" option.
    options = []
    other = sorted(a for a in alphabet if a not in {l.name for l in cl_letters})
    for l in cl_letters:
        if l.name in alphabet:
            options.append(({m: m == l for m in cl_letters}, (l.name,)))
    if other:
        options.append(({m: False for m in cl_letters}, tuple(other)))

    states = []
    for letter_val, symbols in options:
        for mask in range(1 << len(free)):
            val = {}
            ok = True
            for g in subs:
                if isinstance(g, TrueF):
                    val[g] = True
                elif isinstance(g, Letter):
                    val[g] = letter_val[g]
                elif isinstance(g, Not):
                    val[g] = not val[g.operand]
                elif isinstance(g, And):
                    val[g] = val[g.left] and val[g.right]
                else:
                    val[g] = bool(mask & (1 << free.index(g)))
            for u in untils:
                if val[u.right] and not val[u]:
                    ok = False
                    break
                if val[u] and not val[u.right] and not val[u.left]:
                    ok = False
                    break
            if ok:
                states.append({"val": val, "letters": symbols})
    return states, untils, nexts


def _disjuncts(f):
    """Top-level disjunctive decomposition (¬(g ∧ h) = ¬g ∨ ¬h)."""
    if isinstance(f, Not) and isinstance(f.operand, And):
        yield from _disjuncts(lnot(f.operand.left))
        yield from _disjuncts(lnot(f.operand.right))
    else:
        yield f


def ltl_to_nba(f, alphabet=None, budget=DEFAULT_BUDGET):
    """Closure-tableau translation; ``L(result) = mod(f)`` over the alphabet.

    The formula is decomposed along its top-level boolean structure first:
    disjuncts become an automaton union and conjuncts a synchronized Buchi
    product, so each closure tableau stays small.  Tableau states are the
    maximally consistent closure subsets with generalized-Buchi acceptance
    (one set per Until obligation), degeneralized with a counter.
    """
    if alphabet is None:
        alphabet = letters_of(f)
    alphabet = frozenset(alphabet)
    missing = letters_of(f) - alphabet
    if missing:
        raise UnknownLetterError(f"formula letters outside alphabet: {sorted(missing)}")
    nba = trim_nba(_nba_for(f, alphabet, budget))
    if len(nba.states) > 60:
        nba = trim_nba(simulation_reduce(nba))
    return nba


def _nba_for(f, alphabet, budget):
    branches = list(_disjuncts(f))
    if len(branches) > 1:
        return _union_nba([_nba_for(g, alphabet, budget) for g in branches], alphabet)
    if isinstance(f, And):
        left = trim_nba(_nba_for(f.left, alphabet, budget))
        right = trim_nba(_nba_for(f.right, alphabet, budget))
        return _product_nba(left, right, alphabet, budget)
    return _tableau_nba(f, alphabet, budget)


def _product_nba(a, b, alphabet, budget):
    """Synchronized product with a two-phase counter: accepting iff both
    components accept."""
    if not a.initial or not b.initial:
        return Nba(
            states=(), alphabet=alphabet, transitions={},
            initial=frozenset(), accepting=frozenset(),
        )
    states = []
    index = {}

    def sid(qa, qb, i):
        key = (qa, qb, i)
        if key not in index:
            if len(states) >= budget:
                raise SizeBudgetExceededError("conjunction product exceeded budget")
            index[key] = len(states)
            states.append(key)
        return index[key]

    initial = frozenset(sid(qa, qb, 0) for qa in a.initial for qb in b.initial)
    transitions = {}
    queue = list(initial)
    seen = set(queue)
    while queue:
        s = queue.pop()
        qa, qb, i = states[s]
        if i == 0 and qa in a.accepting:
            i2 = 1
        elif i == 1 and qb in b.accepting:
            i2 = 0
        else:
            i2 = i
        for sym in alphabet:
            tgts = []
            for ra in a.successors(qa, sym):
                for rb in b.successors(qb, sym):
                    t = sid(ra, rb, i2)
                    tgts.append(t)
                    if t not in seen:
                        seen.add(t)
                        queue.append(t)
            if tgts:
                transitions[(s, sym)] = tuple(sorted(tgts))
    accepting = frozenset(
        s for s, (qa, qb, i) in enumerate(states) if i == 0 and qa in a.accepting
    )
    return Nba(
        states=tuple(range(len(states))),
        alphabet=alphabet,
        transitions=transitions,
        initial=initial,
        accepting=accepting,
    )


def _union_nba(parts, alphabet):
    states = []
    transitions = {}
    initial = set()
    accepting = set()
    for part in parts:
        offset = len(states)
        states.extend(range(offset, offset + len(part.states)))
        for (q, a), tgts in part.transitions.items():
            transitions[(q + offset, a)] = tuple(t + offset for t in tgts)
        initial.update(q + offset for q in part.initial)
        accepting.update(q + offset for q in part.accepting)
    return Nba(
        states=tuple(states),
        alphabet=alphabet,
        transitions=transitions,
        initial=frozenset(initial),
        accepting=frozenset(accepting),
    )


def _tableau_nba(f, alphabet, budget):
    atoms, untils, nexts = _consistent_states(f, alphabet)
    if len(atoms) * max(1, len(untils)) > budget:
        raise SizeBudgetExceededError(
            f"tableau would need {len(atoms)} x {max(1, len(untils))} states"
        )

    def may_follow(a, b):
        va, vb = a["val"], b["val"]
        for x in nexts:
            if vb[x.operand] != va[x]:
                return False
        for u in untils:
            if va[u] and not va[u.right] and not vb[u]:
                return False
            if not va[u] and va[u.left] and vb[u]:
                return False
        return True

    # reachable tableau exploration
    initial_atoms = [i for i, a in enumerate(atoms) if a["val"][f]]
    reach = set(initial_atoms)
    frontier = list(initial_atoms)
    succs = {}
    while frontier:
        i = frontier.pop()
        a = atoms[i]
        nxt = tuple(j for j, b in enumerate(atoms) if may_follow(a, b))
        succs[i] = nxt
        for j in nxt:
            if j not in reach:
                reach.add(j)
                frontier.append(j)
        if len(reach) > budget:
            raise SizeBudgetExceededError("tableau exploration exceeded budget")

    # degeneralization counter over the Until acceptance sets
    k = max(1, len(untils))

    def acc_ok(i, idx):
        if not untils:
            return True
        u = untils[idx]
        return (not atoms[i]["val"][u]) or atoms[i]["val"][u.right]

    states = []
    index = {}

    def sid(i, c):
        key = (i, c)
        if key not in index:
            index[key] = len(states)
            states.append(key)
        return index[key]

    transitions = {}
    initial = frozenset(sid(i, 0) for i in initial_atoms)
    pending = list(initial)
    seen = set(pending)
    while pending:
        s = pending.pop()
        i, c = states[s]
        c2 = (c + 1) % k if acc_ok(i, c) else c
        for sym in atoms[i]["letters"]:
            tgts = []
            for j in succs[i]:
                t = sid(j, c2)
                tgts.append(t)
                if t not in seen:
                    seen.add(t)
                    pending.append(t)
            if tgts:
                transitions[(s, sym)] = tuple(sorted(tgts))
    accepting = frozenset(
        s for s, (i, c) in enumerate(states) if c == 0 and acc_ok(i, 0)
    )
    return Nba(
        states=tuple(range(len(states))),
        alphabet=alphabet,
        transitions=transitions,
        initial=initial,
        accepting=accepting,
    )


# ---------------------------------------------------------------------------
# NBA analysis
# ---------------------------------------------------------------------------


def _sccs(nodes, succ):
    """Tarjan's algorithm, iterative; returns list of strongly connected components."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    out = []
    counter = [0]
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def trim_nba(nba):
    """Language-preserving reduction: prune states that are unreachable or
    cannot reach an accepting cycle, then alternate forward and backward
    bisimulation quotients to a fixpoint."""
    while True:
        before = len(nba.states)
        nba = _prune_nba(nba)
        nba = _bisim_quotient(nba, backward=False)
        nba = _bisim_quotient(nba, backward=True)
        if len(nba.states) >= before:
            return nba


def _prune_nba(nba):
    reach = set(nba.initial)
    frontier = list(nba.initial)
    while frontier:
        q = frontier.pop()
        for a in nba.alphabet:
            for r in nba.successors(q, a):
                if r not in reach:
                    reach.add(r)
                    frontier.append(r)

    def succ_all(q):
        out = []
        for a in nba.alphabet:
            out.extend(r for r in nba.successors(q, a) if r in reach)
        return out

    comps = _sccs(sorted(reach), succ_all)
    good = set()
    for comp in comps:
        has_cycle = len(comp) > 1 or comp[0] in succ_all(comp[0])
        if has_cycle and any(q in nba.accepting for q in comp):
            good.update(comp)
    live = set(good)
    changed = True
    while changed:
        changed = False
        for q in reach:
            if q in live:
                continue
            if any(r in live for r in succ_all(q)):
                live.add(q)
                changed = True
    live &= reach
    if not (live & set(nba.initial)):
        return Nba(
            states=(), alphabet=nba.alphabet, transitions={},
            initial=frozenset(), accepting=frozenset(),
        )
    keep = sorted(live)
    index = {q: i for i, q in enumerate(keep)}
    transitions = {}
    for q in keep:
        for a in sorted(nba.alphabet):
            tgts = tuple(sorted(index[r] for r in nba.successors(q, a) if r in live))
            if tgts:
                transitions[(index[q], a)] = tgts
    return Nba(
        states=tuple(range(len(keep))),
        alphabet=nba.alphabet,
        transitions=transitions,
        initial=frozenset(index[q] for q in nba.initial if q in live),
        accepting=frozenset(index[q] for q in keep if q in nba.accepting),
    )


def _bisim_quotient(nba, backward):
    """Quotient by forward or backward bisimulation.

    Both preserve the language: forward-bisimilar states have the same
    futures; backward-bisimilar states (same acceptance, same initial
    status, same per-letter predecessor classes) have interchangeable
    pasts, so merging them cannot create new runs.
    """
    if not nba.states:
        return nba
    letters = sorted(nba.alphabet)
    if backward:
        preds = {(q, a): set() for q in nba.states for a in letters}
        for (q, a), tgts in nba.transitions.items():
            for r in tgts:
                preds[(r, a)].add(q)

        def neighbors(q, a):
            return preds[(q, a)]

        block = {
            q: (q in nba.accepting, q in nba.initial) for q in nba.states
        }
    else:
        def neighbors(q, a):
            return nba.successors(q, a)

        block = {q: (q in nba.accepting,) for q in nba.states}

    while True:
        sig = {}
        for q in nba.states:
            sig[q] = (
                block[q],
                tuple(frozenset(block[r] for r in neighbors(q, a)) for a in letters),
            )
        classes = {}
        for q in nba.states:
            classes.setdefault(sig[q], len(classes))
        new_block = {q: classes[sig[q]] for q in nba.states}
        if new_block == block:
            break
        block = new_block

    n_classes = len(set(block.values()))
    if n_classes == len(nba.states):
        return nba
    transitions = {}
    for (q, a), tgts in nba.transitions.items():
        key = (block[q], a)
        transitions.setdefault(key, set()).update(block[r] for r in tgts)
    return Nba(
        states=tuple(range(n_classes)),
        alphabet=nba.alphabet,
        transitions={k: tuple(sorted(v)) for k, v in transitions.items()},
        initial=frozenset(block[q] for q in nba.initial),
        accepting=frozenset(block[q] for q in nba.accepting),
    )


def simulation_reduce(nba):
    """Quotient by mutual direct simulation and drop dominated transitions.

    Direct simulation: q <= r when acceptance transfers (q in F implies
    r in F) and every move of q is matched by a move of r to a simulating
    state, coinductively.  Quotienting by mutual simulation and removing
    strictly dominated siblings both preserve the language.
    """
    states = list(nba.states)
    n = len(states)
    if n == 0:
        return nba
    idx = {q: i for i, q in enumerate(states)}
    letters = sorted(nba.alphabet)
    succ = {
        (i, a): [idx[r] for r in nba.successors(states[i], a)]
        for i in range(n)
        for a in letters
    }
    acc = [states[i] in nba.accepting for i in range(n)]

    succ_mask = {
        key: sum(1 << j for j in tgts) for key, tgts in succ.items()
    }
    # sim[i] = bitmask of j with  i <= j
    sim = []
    for i in range(n):
        mask = 0
        for j in range(n):
            if not acc[i] or acc[j]:
                mask |= 1 << j
        sim.append(mask)
    changed = True
    while changed:
        changed = False
        for i in range(n):
            mask = sim[i]
            if not mask:
                continue
            new_mask = mask
            for a in letters:
                for ip in succ[(i, a)]:
                    # j survives only if some a-successor of j simulates ip
                    keep = 0
                    m = new_mask
                    while m:
                        low = m & -m
                        j = low.bit_length() - 1
                        m ^= low
                        if succ_mask[(j, a)] & sim[ip]:
                            keep |= low
                    new_mask &= keep
                    if not new_mask:
                        break
                if not new_mask:
                    break
            if new_mask != sim[i]:
                sim[i] = new_mask
                changed = True

    def simulates(a, b):
        return sim[a] >> b & 1

    # mutual-simulation classes
    block = {}
    reps = []
    for i in range(n):
        for r in reps:
            if simulates(i, r) and simulates(r, i):
                block[i] = block[r]
                break
        else:
            block[i] = len(reps)
            reps.append(i)

    transitions = {}
    for i in reps:
        b = block[i]
        for a in letters:
            tgts = set(succ[(i, a)])
            # little brothers: drop targets strictly dominated by a sibling
            kept = set()
            for t in tgts:
                if any(
                    u != t and simulates(t, u) and not simulates(u, t)
                    for u in tgts
                ):
                    continue
                kept.add(block[t])
            if kept:
                transitions[(b, a)] = tuple(sorted(kept))
    return Nba(
        states=tuple(range(len(reps))),
        alphabet=nba.alphabet,
        transitions=transitions,
        initial=frozenset(block[idx[q]] for q in nba.initial),
        accepting=frozenset(block[i] for i in range(n) if acc[i]),
    )


def nba_accepts_lasso(nba, w):
    """Membership of an ultimately periodic word, decided by searching an
    accepting cycle in the product of the word's one-loop structure with
    the automaton.  Independent of eval_lasso."""
    extra = w.symbol_set() - set(nba.alphabet)
    if extra:
        raise AlphabetMismatchError(f"word symbols outside alphabet: {sorted(extra)}")
    np, nc = len(w.prefix), len(w.cycle)
    total = np + nc

    def pos_next(i):
        return i + 1 if i + 1 < total else np

    start = {(0, q) for q in nba.initial}
    reach = set(start)
    frontier = list(start)
    while frontier:
        i, q = frontier.pop()
        for r in nba.successors(q, w.at(i)):
            node = (pos_next(i), r)
            if node not in reach:
                reach.add(node)
                frontier.append(node)
    loop_nodes = [nd for nd in reach if nd[0] >= np]

    def succ(nd):
        i, q = nd
        j = pos_next(i)
        return [(j, r) for r in nba.successors(q, w.at(i)) if (j, r) in reach]

    for comp in _sccs(sorted(loop_nodes), succ):
        comp_set = set(comp)
        has_cycle = len(comp) > 1 or any(nd in succ(nd) for nd in comp)
        if has_cycle and any(q in nba.accepting for _, q in comp_set):
            return True
    return False
