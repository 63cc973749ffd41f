"""Tests for the LTL module: parsing, lasso semantics, and the tableau
translation to Buchi automata."""

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genplan import ltl as L
from genplan.errors import AlphabetMismatchError, LtlParseError, UnknownLetterError
from genplan.ltl import (
    TRUE,
    And,
    Letter,
    Next,
    Until,
    Word,
    eval_lasso,
    eventually,
    always,
    implies,
    lnot,
    lor,
    ltl_to_nba,
    nba_accepts_lasso,
    parse_ltl,
    pretty,
)

from .helpers import rand_formula, rand_word

SIGMA = {"Inc", "Dec", "X=0", "X>0"}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def test_parse_constraint_formula():
    """The running example parses with implication at lowest precedence."""
    f = parse_ltl('F G ! Inc & G F Dec -> G F "X=0"', SIGMA)
    expected = implies(
        And(
            eventually(always(lnot(Letter("Inc")))),
            always(eventually(Letter("Dec"))),
        ),
        always(eventually(Letter("X=0"))),
    )
    assert f == expected


def test_parse_true():
    assert parse_ltl("true", SIGMA) == TRUE


def test_parse_until_right_nested():
    f = parse_ltl("a U (b U c)", {"a", "b", "c"})
    assert f == Until(Letter("a"), Until(Letter("b"), Letter("c")))
    # and U is right-associative without parentheses
    assert parse_ltl("a U b U c", {"a", "b", "c"}) == f


def test_parse_precedence():
    f = parse_ltl("! a & b | c -> X d", {"a", "b", "c", "d"})
    expected = implies(
        lor(And(lnot(Letter("a")), Letter("b")), Letter("c")), Next(Letter("d"))
    )
    assert f == expected


def test_parse_error_position():
    with pytest.raises(LtlParseError):
        parse_ltl("a U ", {"a"})
    with pytest.raises(LtlParseError):
        parse_ltl("(a", {"a"})


def test_unknown_letter():
    with pytest.raises(UnknownLetterError):
        parse_ltl("a & z", {"a"})


def test_quoted_letters():
    f = parse_ltl('"X=0" U "X>0"', SIGMA)
    assert f == Until(Letter("X=0"), Letter("X>0"))


def test_formula_size():
    f = parse_ltl("a U b", {"a", "b"})
    assert f.size == 3
    assert TRUE.size == 1


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**30))
def test_pretty_roundtrip(seed):
    """The printer and parser are mutually inverse on the AST."""
    rng = random.Random(seed)
    letters = ["a", "b", "X=0"]
    f = rand_formula(rng, 4, letters)
    assert parse_ltl(pretty(f), set(letters)) == f


# ---------------------------------------------------------------------------
# Semantics on lassos: one test per inductive clause
# ---------------------------------------------------------------------------

AB = {"a", "b"}


def test_semantics_true():
    assert eval_lasso(TRUE, Word((), ("a",)), AB)


def test_semantics_letter():
    """A letter holds iff it is the symbol at the first position."""
    assert eval_lasso(Letter("a"), Word(("a",), ("b",)), AB)
    assert not eval_lasso(Letter("a"), Word(("b",), ("a",)), AB)


def test_semantics_and():
    f = And(Letter("a"), lnot(Letter("b")))
    assert eval_lasso(f, Word(("a",), ("b",)), AB)
    assert not eval_lasso(f, Word(("b",), ("b",)), AB)


def test_semantics_not():
    assert eval_lasso(lnot(Letter("a")), Word(("b",), ("a",)), AB)
    assert not eval_lasso(lnot(Letter("a")), Word(("a",), ("a",)), AB)


def test_semantics_next():
    f = Next(Letter("b"))
    assert eval_lasso(f, Word(("a", "b"), ("a",)), AB)
    assert not eval_lasso(f, Word(("a", "a"), ("b",)), AB)
    # wraparound: at the last cycle position, next is the cycle start
    assert eval_lasso(Next(Letter("a")), Word((), ("a",)), AB)


def test_semantics_until():
    f = Until(Letter("a"), Letter("b"))
    assert eval_lasso(f, Word(("a", "a", "b"), ("a",)), AB)
    assert not eval_lasso(f, Word(("a", "a"), ("a",)), AB)  # b never arrives
    assert eval_lasso(f, Word(("b",), ("a",)), AB)  # j = 0 allowed
    # the a-chain must be unbroken
    assert not eval_lasso(f, Word(("a", "b2", "b"), ("a",)), {"a", "b", "b2"})


def test_until_least_fixpoint_on_cycle():
    """F b is false on a pure a-loop even though the loop is consistent with
    carrying the obligation forever."""
    assert not eval_lasso(eventually(Letter("b")), Word((), ("a",)), AB)
    assert eval_lasso(eventually(Letter("b")), Word((), ("a", "b")), AB)


def test_spec_examples():
    psi = parse_ltl('F G ! Inc & G F Dec -> G F "X=0"', SIGMA)
    # unfair decrement loop: antecedent holds, consequent fails
    assert not eval_lasso(psi, Word((), ("X>0", "Dec")), SIGMA)
    # prefix reaching zero then looping on zero
    w = Word(("X>0", "Dec"), ("X=0", "Dec"))
    assert eval_lasso(eventually(Letter("X=0")), w, SIGMA)
    # no decrement at all
    assert not eval_lasso(always(eventually(Letter("Dec"))), Word((), ("X>0", "Inc")), SIGMA)
    # increment loop: the antecedent fails, so the constraint holds
    assert eval_lasso(psi, Word((), ("X>0", "Inc")), SIGMA)


def test_alphabet_mismatch():
    with pytest.raises(AlphabetMismatchError):
        eval_lasso(TRUE, Word((), ("z",)), AB)


# ---------------------------------------------------------------------------
# Tableau NBA
# ---------------------------------------------------------------------------


def test_nba_eventually_goal():
    nba = ltl_to_nba(eventually(Letter("goal")), {"goal", "other"})
    assert len(nba.states) <= 4
    assert nba_accepts_lasso(nba, Word(("other", "other"), ("goal",)))
    assert nba_accepts_lasso(nba, Word(("goal",), ("other",)))
    assert not nba_accepts_lasso(nba, Word((), ("other",)))


def test_nba_true_universal():
    nba = ltl_to_nba(TRUE, {"a", "b"})
    assert len(nba.states) == 1
    for cycle in itertools.product("ab", repeat=2):
        assert nba_accepts_lasso(nba, Word((), cycle))


def test_nba_empty_language():
    nba = ltl_to_nba(L.FALSE, {"a", "b"})
    assert len(nba.states) == 0
    assert not nba_accepts_lasso(nba, Word((), ("a",)))


def test_nba_exhaustive_small():
    """NBA membership matches the semantic oracle on every lasso up to
    3+3 over a two-letter alphabet, for a basket of formulas."""
    a, b = Letter("a"), Letter("b")
    formulas = [
        eventually(a),
        always(a),
        Until(a, b),
        lnot(Until(a, b)),
        eventually(always(a)),
        always(eventually(a)),
        Next(And(a, Next(b))),
        implies(always(eventually(a)), always(eventually(b))),
    ]
    for f in formulas:
        nba = ltl_to_nba(f, AB)
        for pl in range(4):
            for prefix in itertools.product("ab", repeat=pl):
                for cl in range(1, 4):
                    for cycle in itertools.product("ab", repeat=cl):
                        w = Word(prefix, cycle)
                        assert nba_accepts_lasso(nba, w) == eval_lasso(f, w, AB), (
                            f"{pretty(f)} on {w}"
                        )


def test_nba_sampling_agreement():
    """Oracle agreement on random formulas and lassos (the larger sweep runs
    in the acceptance suite)."""
    rng = random.Random(7)
    letters = ["a", "b", "c"]
    for _ in range(60):
        f = rand_formula(rng, 4, letters)
        nba = ltl_to_nba(f, set(letters))
        for _ in range(25):
            w = rand_word(rng, letters)
            assert nba_accepts_lasso(nba, w) == eval_lasso(f, w, set(letters))


def test_nba_negation_duality():
    rng = random.Random(11)
    letters = ["a", "b"]
    for _ in range(40):
        f = rand_formula(rng, 3, letters)
        pos = ltl_to_nba(f, AB)
        neg = ltl_to_nba(lnot(f), AB)
        for _ in range(20):
            w = rand_word(rng, letters, 4, 4)
            assert nba_accepts_lasso(pos, w) != nba_accepts_lasso(neg, w)


def test_nba_budget():
    from genplan.errors import SizeBudgetExceededError

    f = parse_ltl("G F a & F G b & G F c", {"a", "b", "c"})
    with pytest.raises(SizeBudgetExceededError):
        ltl_to_nba(f, {"a", "b", "c"}, budget=2)
