import random

import pytest
from hypothesis import given, settings

from gen import bodies, formulas, naive_body, random_body, traces
from hyrep.errors import DuplicateVariable, ParseError, UnboundVariable
from hyrep.formula import (
    TRUE,
    And,
    Atom,
    Eventually,
    Fragment,
    Globally,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    Quantifier,
    Until,
    classify_fragment,
    desugar,
    format_body,
    format_formula,
    free_vars,
    negate_body,
    nnf,
    parse_body,
    parse_formula,
    props,
)

EDAS = "forall p. forall q. G ((pending[p] & pending[q]) -> (session[p] <-> session[q]))"
GNI = "forall p. forall q. exists r. G (h[p] <-> h[r]) & G (o[q] <-> o[r])"


def test_parse_simple_existential():
    f = parse_formula("exists p. F b[p]")
    assert f.prefix == ((Quantifier.EXISTS, "p"),)
    assert f.body == Eventually(Atom("b", "p"))


def test_parse_edas_formula():
    f = parse_formula(EDAS)
    assert f.prefix_string == "AA"
    pend = And(Atom("pending", "p"), Atom("pending", "q"))
    sess = Iff(Atom("session", "p"), Atom("session", "q"))
    assert f.body == Globally(Implies(pend, sess))


def test_parse_gni():
    f = parse_formula(GNI)
    assert f.prefix_string == "AAE"
    assert f.variables == ("p", "q", "r")
    assert free_vars(f.body) == {"p", "q", "r"}
    assert props(f.body) == {"h", "o"}


@pytest.mark.parametrize("text, expected", [
    ("a[p] | b[p] & c[p]", Or(Atom("a", "p"), And(Atom("b", "p"), Atom("c", "p")))),
    ("a[p] -> b[p] -> c[p]", Implies(Atom("a", "p"), Implies(Atom("b", "p"), Atom("c", "p")))),
    ("a[p] U b[p] U c[p]", Until(Atom("a", "p"), Until(Atom("b", "p"), Atom("c", "p")))),
    ("!a[p] U X b[p]", Until(Not(Atom("a", "p")), Next(Atom("b", "p")))),
    ("a[p] & b[p] U c[p]", And(Atom("a", "p"), Until(Atom("b", "p"), Atom("c", "p")))),
    ("G F a[p] <-> true", Iff(Globally(Eventually(Atom("a", "p"))), TRUE)),
])
def test_precedence(text, expected):
    assert parse_body(text, ("p",)) == expected


def test_comments_and_whitespace():
    f = parse_formula("exists p. # pick one\n  F   a[p]")
    assert f.body == Eventually(Atom("a", "p"))


def test_syntax_error_reports_position():
    with pytest.raises(ParseError) as info:
        parse_formula("exists p. a[p] &")
    assert info.value.position == len("exists p. a[p] &")


@pytest.mark.parametrize("text", ["F a[p]", "exists p a[p]", "exists p. a[p] b[p]", "exists p. a[p", "exists p. $"])
def test_syntax_errors(text):
    with pytest.raises(ParseError):
        parse_formula(text)


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        parse_formula("exists p. a[q]")


def test_duplicate_variable():
    with pytest.raises(DuplicateVariable):
        parse_formula("exists p. forall p. a[p]")


@pytest.mark.parametrize("text", [EDAS, GNI, "exists p. (a[p] U b[p]) U c[p]", "forall p. !(a[p] -> b[p]) & X X false"])
def test_round_trip_examples(text):
    f = parse_formula(text)
    assert parse_formula(format_formula(f)) == f


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_round_trip_random(f):
    assert parse_formula(format_formula(f)) == f


@pytest.mark.parametrize("prefix, tag, alt, leading", [
    ("E", Fragment.E_STAR, 0, Quantifier.EXISTS),
    ("AA", Fragment.A_STAR, 0, Quantifier.FORALL),
    ("EEAA", Fragment.E_STAR_A_STAR, 1, Quantifier.EXISTS),
    ("EAA", Fragment.E_LE1_A_STAR, 1, Quantifier.EXISTS),
    ("AE", Fragment.A_E_STAR, 1, Quantifier.FORALL),
    ("AAE", Fragment.A_STAR_E_STAR, 1, Quantifier.FORALL),
    ("EAEA", Fragment.EA_K, 3, Quantifier.EXISTS),
    ("AEA", Fragment.AE_K, 2, Quantifier.FORALL),
])
def test_classify_fragment(prefix, tag, alt, leading):
    names = [f"v{i}" for i in range(len(prefix))]
    text = " ".join(f"{'exists' if c == 'E' else 'forall'} {v}." for c, v in zip(prefix, names)) + " true"
    fc = classify_fragment(parse_formula(text))
    assert (fc.tag, fc.alternations, fc.leading) == (tag, alt, leading)


def test_gni_fragment():
    fc = classify_fragment(parse_formula(GNI))
    assert fc.family == "AE_k(1)"
    assert fc.alternations == 1 and fc.leading is Quantifier.FORALL
    assert fc.member_of(Fragment.AE_K, 1)
    assert fc.member_of(Fragment.A_STAR_E_STAR)
    assert not fc.member_of(Fragment.A_E_STAR)


def test_alternation_free_families():
    assert classify_fragment(parse_formula("exists p. exists q. true")).family == "EA_k(0)"
    assert classify_fragment(parse_formula("forall p. true")).family == "AE_k(0)"


def test_negate_double_negation():
    b = parse_body("a[p] U (b[p] & X a[p])", ("p",))
    assert negate_body(negate_body(b)) == nnf(b)


@settings(max_examples=300, deadline=None)
@given(bodies(("p", "q")), traces(), traces())
def test_negation_is_complement(body, t1, t2):
    assign = {"p": t1, "q": t2}
    assert naive_body(assign, negate_body(body)) == (not naive_body(assign, body))


@settings(max_examples=300, deadline=None)
@given(bodies(("p", "q")), traces(), traces())
def test_desugar_and_nnf_preserve_meaning(body, t1, t2):
    assign = {"p": t1, "q": t2}
    expected = naive_body(assign, body)
    assert naive_body(assign, desugar(body)) == expected
    assert naive_body(assign, nnf(body)) == expected


def test_format_body_is_stable():
    rng = random.Random(3)
    for _ in range(200):
        b = random_body(rng, ["p", "q"], 4)
        text = format_body(b)
        assert format_body(parse_body(text, ("p", "q"))) == text
