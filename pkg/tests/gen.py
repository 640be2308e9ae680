"""Random generators and a naive reference evaluator shared by the tests."""

from __future__ import annotations

import itertools
import math
import random

from hypothesis import strategies as st

from hyrep.formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    Eventually,
    Globally,
    HyperFormula,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    Quantifier,
    Release,
    TrueF,
    Until,
)
from hyrep.kripke import KripkeStructure, Trace

PROPS = ("a", "b")


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


def random_body(rng: random.Random, variables, depth: int = 3, props=PROPS):
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.1:
            return rng.choice([TRUE, FALSE])
        return Atom(rng.choice(props), rng.choice(variables))
    kind = rng.randrange(9)
    sub = lambda: random_body(rng, variables, depth - 1, props)  # noqa: E731
    if kind == 0:
        return Not(sub())
    if kind == 1:
        return And(sub(), sub())
    if kind == 2:
        return Or(sub(), sub())
    if kind == 3:
        return Next(sub())
    if kind == 4:
        return Until(sub(), sub())
    if kind == 5:
        return Eventually(sub())
    if kind == 6:
        return Globally(sub())
    if kind == 7:
        return Implies(sub(), sub())
    return Iff(sub(), sub())


def random_formula(rng: random.Random, max_quantifiers: int = 3, depth: int = 3, prefix=None):
    if prefix is None:
        n = rng.randint(1, max_quantifiers)
        prefix = "".join(rng.choice("EA") for _ in range(n))
    variables = [f"p{i}" for i in range(len(prefix))]
    quants = [(Quantifier.EXISTS if c == "E" else Quantifier.FORALL, v) for c, v in zip(prefix, variables)]
    return HyperFormula(tuple(quants), random_body(rng, variables, depth))


def bodies(variables, props=PROPS, max_leaves=12):
    atoms = st.sampled_from([Atom(p, v) for p in props for v in variables]) | st.just(TRUE)

    def extend(children):
        return (
            st.builds(Not, children)
            | st.builds(Next, children)
            | st.builds(Eventually, children)
            | st.builds(Globally, children)
            | st.builds(And, children, children)
            | st.builds(Or, children, children)
            | st.builds(Implies, children, children)
            | st.builds(Iff, children, children)
            | st.builds(Until, children, children)
        )

    return st.recursive(atoms, extend, max_leaves=max_leaves)


def formulas(max_quantifiers=3, max_leaves=10):
    @st.composite
    def build(draw):
        prefix = draw(st.text(alphabet="EA", min_size=1, max_size=max_quantifiers))
        variables = [f"p{i}" for i in range(len(prefix))]
        body = draw(bodies(variables, max_leaves=max_leaves))
        quants = tuple((Quantifier.EXISTS if c == "E" else Quantifier.FORALL, v)
                       for c, v in zip(prefix, variables))
        return HyperFormula(quants, body)

    return build()


# ---------------------------------------------------------------------------
# Traces and structures
# ---------------------------------------------------------------------------


def letters(props=PROPS):
    return st.frozensets(st.sampled_from(props))


def traces(max_stem=3, max_loop=3, props=PROPS):
    return st.builds(
        Trace,
        st.lists(letters(props), max_size=max_stem).map(tuple),
        st.lists(letters(props), min_size=1, max_size=max_loop).map(tuple),
    )


def _labels(rng, states, props):
    return {s: frozenset(p for p in props if rng.random() < 0.5) for s in states}


def random_tree(rng: random.Random, n: int, props=PROPS) -> KripkeStructure:
    """Random tree on ``n`` states: every non-root state has one parent, leaves self-loop."""
    states = [f"s{i}" for i in range(n)]
    trans = [(states[rng.randrange(i)], states[i]) for i in range(1, n)]
    parents = {a for a, _ in trans}
    trans += [(s, s) for s in states if s not in parents]
    return KripkeStructure(tuple(states), states[0], tuple(trans), _labels(rng, states, props))


def random_acyclic(rng: random.Random, n: int, props=PROPS, density: float = 0.4) -> KripkeStructure:
    """Random DAG reachable from ``s0``, terminal states self-looping."""
    states = [f"s{i}" for i in range(n)]
    trans = set()
    for j in range(1, n):
        trans.add((states[rng.randrange(j)], states[j]))
        for i in range(j):
            if rng.random() < density:
                trans.add((states[i], states[j]))
    sources = {a for a, _ in trans}
    trans |= {(s, s) for s in states if s not in sources}
    return KripkeStructure(tuple(states), states[0], tuple(sorted(trans)), _labels(rng, states, props))


def random_general(rng: random.Random, n: int, props=PROPS, density: float = 0.35) -> KripkeStructure:
    """Random total graph with at least one non-self-loop cycle."""
    states = [f"s{i}" for i in range(n)]
    trans = {(states[i], states[(i + 1) % n]) for i in range(n)} if n > 1 else {(states[0], states[0])}
    for a, b in itertools.product(states, states):
        if rng.random() < density:
            trans.add((a, b))
    return KripkeStructure(tuple(states), states[0], tuple(sorted(trans)), _labels(rng, states, props))


# ---------------------------------------------------------------------------
# Naive reference semantics
# ---------------------------------------------------------------------------


class NaiveWord:
    """A trace assignment unrolled to explicit positions.

    The window covers the longest stem plus three common periods; position
    ``n - 1`` continues at ``n - period``.  Until is decided by scanning
    forward along successors, straight from its definition.
    """

    def __init__(self, assign: dict, periods: int = 3):
        stems = [len(t.stem) for t in assign.values()] or [0]
        period = math.lcm(*(len(t.loop) for t in assign.values())) if assign else 1
        self.n = max(stems) + periods * period
        self.back = self.n - period
        self.assign = assign

    def succ(self, i: int) -> int:
        return i + 1 if i + 1 < self.n else self.back

    def holds(self, node, i: int = 0) -> bool:
        if isinstance(node, TrueF):
            return True
        if isinstance(node, Atom):
            return node.prop in self.assign[node.var].letter(i)
        if isinstance(node, Not):
            return not self.holds(node.arg, i)
        if isinstance(node, And):
            return self.holds(node.left, i) and self.holds(node.right, i)
        if isinstance(node, Or):
            return self.holds(node.left, i) or self.holds(node.right, i)
        if isinstance(node, Implies):
            return not self.holds(node.left, i) or self.holds(node.right, i)
        if isinstance(node, Iff):
            return self.holds(node.left, i) == self.holds(node.right, i)
        if isinstance(node, Next):
            return self.holds(node.arg, self.succ(i))
        if isinstance(node, Eventually):
            return self.holds(Until(TRUE, node.arg), i)
        if isinstance(node, Globally):
            return not self.holds(Until(TRUE, Not(node.arg)), i)
        if isinstance(node, Release):
            return not self.holds(Until(Not(node.left), Not(node.right)), i)
        if isinstance(node, Until):
            j = i
            for _ in range(self.n + 1):
                if self.holds(node.right, j):
                    return True
                if not self.holds(node.left, j):
                    return False
                j = self.succ(j)
            return False
        raise TypeError(node)


def naive_holds(trace_set, f: HyperFormula, periods: int = 3) -> bool:
    trace_set = list(trace_set)

    def go(i, assign):
        if i == len(f.prefix):
            return NaiveWord(assign, periods).holds(f.body)
        q, v = f.prefix[i]
        results = (go(i + 1, {**assign, v: t}) for t in trace_set)
        return any(results) if q is Quantifier.EXISTS else all(results)

    return go(0, {})


def naive_body(assign: dict, body, position: int = 0) -> bool:
    word = NaiveWord(assign)
    period = word.n - word.back
    while position >= word.n:
        position -= period
    return word.holds(body, position)


__all__ = ["FALSE", "TRUE", "naive_holds", "naive_body", "random_body", "random_formula",
           "random_tree", "random_acyclic", "random_general", "bodies", "formulas", "traces"]
