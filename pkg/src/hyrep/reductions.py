"""Hardness reductions as instance generators, plus naive reference solvers.

Each ``reduce_*`` function maps a propositional instance to a Kripke
structure and a HyperLTL sentence such that the structure has a repair
iff the instance is satisfiable (true, for QBF).  The brute-force solvers
provide the ground truth those equivalences are tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2

import numpy as np

from .errors import TooLarge, TooManyVariables, UnsupportedShape
from .formula import (
    And,
    Atom,
    Body,
    HyperFormula,
    Iff,
    Implies,
    Next,
    Not,
    Quantifier,
    Until,
    conj,
    disj,
    next_n,
    parse_formula,
)
from .kripke import KripkeStructure, add_terminal_loops, validate

TOP = "⊤"
BOT = "⊥"
BRUTE_LIMIT = 20
QBF_BRUTE_LIMIT = 12
DEFAULT_WIDTH = 16


def _bits(value: int, width: int) -> list:
    return [(value >> j) & 1 == 1 for j in range(width)]


def _counter_width(count: int) -> int:
    return max(0, ceil(log2(count))) if count > 1 else 0


def _structure(states, labels, transitions) -> KripkeStructure:
    k = KripkeStructure(tuple(states), states[0], tuple(transitions), labels)
    validate(k)
    return k


# ---------------------------------------------------------------------------
# Horn satisfiability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HornInstance:
    """Horn clauses ``!neg1 | !neg2 | pos``; entries are variables or ``TOP``/``BOT``."""

    variables: tuple
    clauses: tuple

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        known = set(self.variables) | {TOP, BOT}
        for c in self.clauses:
            if len(c) != 3:
                raise ValueError(f"Horn clause {c!r} must have the form (neg1, neg2, pos)")
            for x in c:
                if x not in known:
                    raise ValueError(f"unknown variable {x!r} in clause {c!r}")


def normalize_horn(variables, clauses) -> HornInstance:
    """Bring general Horn clauses into the two-negatives-one-positive shape.

    ``clauses`` holds pairs ``(negatives, positive)`` where ``positive`` is a
    variable, ``TOP``, ``BOT`` or ``None`` (no positive literal).  Long clauses
    are split with fresh variables; short ones repeat a negative literal or
    use ``!TOP``.  Satisfiability is preserved.
    """
    variables = list(variables)
    out = []
    fresh = 0
    for negs, pos in clauses:
        pos = BOT if pos is None else pos
        negs = list(dict.fromkeys(n for n in negs if n != TOP))
        if pos == TOP or BOT in negs or pos in negs:
            continue
        if not negs:
            out.append((TOP, TOP, pos))
        elif len(negs) == 1:
            out.append((negs[0], negs[0], pos))
        else:
            a, b = negs[0], negs[1]
            for lit in negs[2:]:
                fresh += 1
                while f"_y{fresh}" in variables:
                    fresh += 1
                y = f"_y{fresh}"
                variables.append(y)
                out.append((a, b, y))
                a, b = y, lit
            out.append((a, b, pos))
    return HornInstance(tuple(variables), tuple(out))


def solve_horn_brute(h: HornInstance) -> bool:
    n = len(h.variables)
    if n > BRUTE_LIMIT:
        raise TooLarge(f"{n} variables exceed the brute-force limit of {BRUTE_LIMIT}")
    rows = 1 << n
    table = ((np.arange(rows)[:, None] >> np.arange(n)) & 1).astype(bool)
    index = {v: i for i, v in enumerate(h.variables)}

    def value(x):
        if x == TOP:
            return np.ones(rows, dtype=bool)
        if x == BOT:
            return np.zeros(rows, dtype=bool)
        return table[:, index[x]]

    ok = np.ones(rows, dtype=bool)
    for a, b, p in h.clauses:
        ok &= ~value(a) | ~value(b) | value(p)
    return bool(ok.any())


HORN_FORMULA = parse_formula(
    "forall p1. exists p2. exists p3. exists p4. "
    "(G (pos[p1] <-> pos[p2]) & "
    " X (((c[p1] & !c[p2]) U (!c[p1] & c[p2] & X ((c[p1] <-> c[p2]) U h[p1]))) "
    "    | ((c[p1] & !c[p2]) U h[p1]))) "
    "& (F z1[p1] | F z2[p1] | G (neg1[p1] <-> pos[p3]) | G (neg2[p1] <-> pos[p3])) "
    "& G !pos[p4]"
)


def reduce_horn(h: HornInstance, max_width: int = DEFAULT_WIDTH):
    """Tree with one branch per clause and the AE* sentence ``HORN_FORMULA``.

    A kept branch means its positive literal is false.  Clauses sharing a
    positive literal form a block with its own ``c``/``h`` counter, which the
    formula closes under successor, so blocks survive or vanish as a whole.
    ``z1``/``z2`` flag negative literals that are false in every least model
    (``BOT`` or never positive).
    """
    width = ceil(log2(len(h.variables) + 2))
    if width > max_width:
        raise TooManyVariables(f"{len(h.variables)} variables need {width} bits, limit is {max_width}")
    code = {v: i + 1 for i, v in enumerate(h.variables)}
    code[BOT] = 0
    code[TOP] = (1 << width) - 1

    clauses = [c for c in h.clauses if c[2] != TOP]
    if not any(c[2] == BOT for c in clauses):
        clauses.append((BOT, BOT, BOT))
    positive = {c[2] for c in clauses}

    def certainly_false(x):
        return x == BOT or (x != TOP and x not in positive)

    blocks: dict = {}
    for c in clauses:
        blocks.setdefault(c[2], []).append(c)
    branches = []
    for pos in sorted(blocks, key=lambda p: code[p]):
        members = blocks[pos]
        size = 1 << _counter_width(len(members))
        for i in range(size):
            branches.append((members[i % len(members)], i, _counter_width(len(members))))

    length = max(width, max(w for _, _, w in branches) + 1) + 1
    states = ["init"]
    labels = {"init": set()}
    trans = []
    for b, ((n1, n2, p), counter, cw) in enumerate(branches):
        chain = [f"b{b}_{j}" for j in range(length)]
        trans.append(("init", chain[0]))
        trans.extend(zip(chain, chain[1:]))
        trans.append((chain[-1], chain[-1]))
        for j, s in enumerate(chain):
            lab = set()
            if j < width:
                if _bits(code[n1], width)[j]:
                    lab.add("neg1")
                if _bits(code[n2], width)[j]:
                    lab.add("neg2")
                if _bits(code[p], width)[j]:
                    lab.add("pos")
            if j < cw and _bits(counter, cw)[j]:
                lab.add("c")
            if j == cw:
                lab.add("h")
            if j == 0 and certainly_false(n1):
                lab.add("z1")
            if j == 0 and certainly_false(n2):
                lab.add("z2")
            states.append(s)
            labels[s] = lab
    return _structure(states, labels, trans), HORN_FORMULA


# ---------------------------------------------------------------------------
# 3SAT
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CnfInstance:
    """Clauses of exactly three DIMACS-style literals over variables ``1..variables``."""

    variables: int
    clauses: tuple

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        for c in self.clauses:
            if len(c) != 3:
                raise ValueError(f"clause {c!r} does not have exactly three literals")
            for lit in c:
                if lit == 0 or abs(lit) > self.variables:
                    raise ValueError(f"literal {lit} out of range in clause {c!r}")


def to_three_literals(variables: int, clauses) -> CnfInstance:
    """Pad short clauses by repeating their last literal."""
    out = []
    for c in clauses:
        c = tuple(c)
        if not c or len(c) > 3:
            raise ValueError(f"clause {c!r} cannot be written with exactly three literals")
        out.append(c + (c[-1],) * (3 - len(c)))
    return CnfInstance(variables, tuple(out))


def solve_3sat_brute(c: CnfInstance) -> bool:
    n = c.variables
    if n > BRUTE_LIMIT:
        raise TooLarge(f"{n} variables exceed the brute-force limit of {BRUTE_LIMIT}")
    rows = 1 << n
    table = ((np.arange(rows)[:, None] >> np.arange(n)) & 1).astype(bool)
    ok = np.ones(rows, dtype=bool)
    for clause in c.clauses:
        sat = np.zeros(rows, dtype=bool)
        for lit in clause:
            col = table[:, abs(lit) - 1]
            sat |= col if lit > 0 else ~col
        ok &= sat
    return bool(ok.any())


PHI_MAP = parse_formula(
    "forall p1. forall p2. exists p3. "
    "G (!pos[p1] | !neg[p2]) & "
    "X (((c[p2] & !c[p3]) U (!c[p2] & c[p3] & X ((c[p2] <-> c[p3]) U h[p2]))) "
    "   | ((c[p2] & !c[p3]) U h[p2]))"
)


def reduce_3sat(c: CnfInstance):
    """One branch per clause, one sub-branch per literal, and ``PHI_MAP``.

    A clause branch starts with its counter bits (``c``, lowest bit first)
    followed by an ``h`` state; each literal sub-branch has one state per
    variable and carries ``pos``/``neg`` at the depth of its variable.  The
    clause list is padded to a power of two by repeating clauses.
    """
    m = len(c.clauses)
    if m == 0:
        raise ValueError("a 3SAT instance needs at least one clause")
    w = _counter_width(m)
    n = c.variables
    states = ["init"]
    labels = {"init": set()}
    trans = []
    for i in range(1 << w):
        clause = c.clauses[i % m]
        head = [f"k{i}_{b}" for b in range(w)] + [f"k{i}_h"]
        for b, s in enumerate(head[:-1]):
            labels[s] = {"c"} if _bits(i, w)[b] else set()
        labels[head[-1]] = {"h"}
        states.extend(head)
        trans.append(("init", head[0]))
        trans.extend(zip(head, head[1:]))
        for slot, lit in enumerate(clause):
            chain = [f"k{i}_l{slot}_{j}" for j in range(1, n + 1)]
            for j, s in enumerate(chain, 1):
                labels[s] = {"pos" if lit > 0 else "neg"} if abs(lit) == j else set()
            states.extend(chain)
            trans.append((head[-1], chain[0]))
            trans.extend(zip(chain, chain[1:]))
            trans.append((chain[-1], chain[-1]))
    return _structure(states, labels, trans), PHI_MAP


def assignment_witness(k: KripkeStructure, c: CnfInstance, assignment) -> frozenset:
    """Transitions kept when every clause retains exactly its satisfied literal sub-branches.

    ``assignment`` maps variable index to bool.  Returns the kept set, to be
    wrapped in a ``RepairCandidate``; raises ``ValueError`` if some clause is
    falsified.
    """
    kept = set()
    for a, b in k.transitions:
        if "_l" in b and b.endswith("_1") and a.endswith("_h"):
            i = int(a[1:].split("_")[0])
            slot = int(b.split("_l")[1].split("_")[0])
            lit = c.clauses[i % len(c.clauses)][slot]
            if assignment[abs(lit)] != (lit > 0):
                continue
        kept.add((a, b))
    sources = {a for a, _ in kept}
    missing = [s for s in k.states if s not in sources]
    if missing:
        raise ValueError(f"assignment falsifies the clause at {missing[0]}")
    return frozenset(kept)


# ---------------------------------------------------------------------------
# QBF
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QbfInstance:
    """Prenex QBF: alternating ``(Quantifier, variables)`` blocks over a CNF matrix."""

    blocks: tuple
    clauses: tuple

    def __post_init__(self):
        blocks = tuple((Quantifier(q) if not isinstance(q, Quantifier) else q, tuple(vs))
                       for q, vs in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        seen = set()
        for (q, vs), nxt in zip(blocks, blocks[1:] + ((None, ()),)):
            if not vs:
                raise ValueError("quantifier blocks must be nonempty")
            if q is nxt[0]:
                raise ValueError("quantifier blocks must alternate")
            for v in vs:
                if v <= 0 or v in seen:
                    raise ValueError(f"variable {v} is invalid or quantified twice")
                seen.add(v)
        for c in self.clauses:
            if not c:
                raise ValueError("empty clause")
            for lit in c:
                if abs(lit) not in seen:
                    raise ValueError(f"literal {lit} uses an unquantified variable")

    @property
    def variables(self) -> tuple:
        return tuple(v for _, vs in self.blocks for v in vs)


def solve_qbf_brute(q: QbfInstance) -> bool:
    order = q.variables
    n = len(order)
    if n > QBF_BRUTE_LIMIT:
        raise TooLarge(f"{n} variables exceed the QBF brute-force limit of {QBF_BRUTE_LIMIT}")
    axis = {v: i for i, v in enumerate(order)}
    grids = np.indices((2,) * n, dtype=np.int8).astype(bool) if n else np.zeros((0,), dtype=bool)
    val = np.ones((2,) * n, dtype=bool)
    for clause in q.clauses:
        sat = np.zeros((2,) * n, dtype=bool)
        for lit in clause:
            g = grids[axis[abs(lit)]]
            sat |= g if lit > 0 else ~g
        val &= sat
    # innermost variable is the last axis
    for quant, vs in reversed(q.blocks):
        for _ in vs:
            val = val.any(axis=-1) if quant is Quantifier.EXISTS else val.all(axis=-1)
    return bool(val)


def _clause_count_padding(m: int) -> int:
    return 1 << _counter_width(m)


def reduce_qbf(q: QbfInstance):
    """Acyclic diamond chain plus one path per clause, with an alternating sentence.

    The outermost existential block is decided by the repair: pruning one
    side of its diamonds fixes those values.  Every other valuation of the
    diamond chain and every clause path must survive, which the sentence
    enforces with successor constraints witnessed by ``bd`` and ``bc``.
    """
    if not q.blocks or q.blocks[0][0] is not Quantifier.EXISTS:
        raise UnsupportedShape("the QBF construction needs a leading existential block")
    order = q.variables
    n = len(order)
    pos_of = {v: 2 * (j + 1) for j, v in enumerate(order)}
    outer = set(q.blocks[0][1])

    # structure -------------------------------------------------------------
    states = ["init", "d0"]
    labels = {"init": set(), "d0": set()}
    trans = [("init", "d0")]
    for j in range(1, n + 1):
        t, f, join = f"d{j}t", f"d{j}f", f"d{j}"
        labels[t] = {f"q{j}", "p"}
        labels[f] = {f"q{j}", "np"}
        labels[join] = set()
        states += [t, f, join]
        trans += [(f"d{j - 1}", t), (f"d{j - 1}", f), (t, join), (f, join)]
    trans.append((f"d{n}", f"d{n}"))

    m = len(q.clauses)
    w = _counter_width(m)
    length = max(2 * n + 1, w + 2)
    for i in range(_clause_count_padding(m)):
        clause = set(q.clauses[i % m])
        chain = [f"u{i}_{x}" for x in range(1, length + 1)]
        for x, s in enumerate(chain, 1):
            lab = set()
            if x == 1:
                lab.add("c")
            if x % 2 == 0 and x // 2 <= n:
                j = x // 2
                v = order[j - 1]
                lab.add(f"q{j}")
                if v in clause:
                    lab.add("p")
                if -v in clause:
                    lab.add("np")
            if 2 <= x < 2 + w and _bits(i, w)[x - 2]:
                lab.add("k")
            if x == 2 + w:
                lab.add("h")
            labels[s] = lab
        states += chain
        trans.append(("init", chain[0]))
        trans += list(zip(chain, chain[1:]))
        trans.append((chain[-1], chain[-1]))
    k = _structure(states, labels, trans)

    # formula ---------------------------------------------------------------
    def at(x, prop, var):
        return next_n(Atom(prop, var), x)

    def diamond(var):
        return Next(Not(Atom("c", var)))

    def clause_path(var):
        return Next(Atom("c", var))

    inner = [v for v in order if v not in outer]
    if inner:
        terms = []
        for i, v in enumerate(inner):
            lower = [conj(at(pos_of[u], "p", "a"), Not(at(pos_of[u], "p", "bd"))) for u in inner[:i]]
            upper = [Iff(at(pos_of[u], "p", "a"), at(pos_of[u], "p", "bd")) for u in inner[i + 1:]]
            flip = [Not(at(pos_of[v], "p", "a")), at(pos_of[v], "p", "bd")]
            terms.append(conj(*lower, *flip, *upper))
        terms.append(conj(*[conj(at(pos_of[u], "p", "a"), Not(at(pos_of[u], "p", "bd"))) for u in inner]))
        dsucc = disj(*terms)
    else:
        dsucc = None
    a_k, b_k, a_h = Atom("k", "a"), Atom("k", "bc"), Atom("h", "a")
    csucc = next_n(disj(
        Until(conj(a_k, Not(b_k)),
              conj(Not(a_k), b_k, Next(Until(Iff(a_k, b_k), a_h)))),
        Until(conj(a_k, Not(b_k)), a_h)), 2)
    keep = [diamond("bd"), clause_path("bc"), Implies(clause_path("a"), csucc)]
    if dsucc is not None:
        keep.append(Implies(diamond("a"), dsucc))

    owner = {}
    names = []
    for b, (quant, vs) in enumerate(q.blocks):
        var = "a" if b == 0 else f"t{b}"
        if b:
            names.append((quant, var))
        for v in vs:
            owner[v] = var
    literals = []
    for v in order:
        x = pos_of[v]
        literals.append(conj(at(x, "p", "pc"), at(x, "p", owner[v])))
        literals.append(conj(at(x, "np", "pc"), at(x, "np", owner[v])))
    game: Body = Implies(clause_path("pc"), disj(*literals))
    for quant, var in reversed(names):
        game = Implies(diamond(var), game) if quant is Quantifier.FORALL else conj(diamond(var), game)
    game = Implies(diamond("a"), game)

    prefix = [(Quantifier.FORALL, "a")]
    placed = False
    for quant, var in names:
        prefix.append((quant, var))
        if quant is Quantifier.EXISTS and not placed:
            prefix += [(Quantifier.EXISTS, "bd"), (Quantifier.EXISTS, "bc")]
            placed = True
    if not placed:
        prefix += [(Quantifier.EXISTS, "bd"), (Quantifier.EXISTS, "bc")]
    # a universal clause variable closes the prefix
    prefix.append((Quantifier.FORALL, "pc"))
    f = HyperFormula(tuple(prefix), And(conj(*keep), game))
    return k, f


# ---------------------------------------------------------------------------
# Reachability
# ---------------------------------------------------------------------------

REACH_EXISTS = parse_formula("exists p. F (s[p] & F t[p])")
REACH_FORALL = parse_formula("forall p. F (s[p] & F t[p])")


def reduce_reachability(vertices, edges, s, t):
    """Start at ``s``; returns the structure and both quantifier variants."""
    vertices = [str(v) for v in vertices]
    s, t = str(s), str(t)
    if s not in vertices or t not in vertices:
        raise ValueError("source and target must be vertices of the graph")
    order = [s] + [v for v in vertices if v != s]
    labels = {v: set() for v in order}
    labels[s].add("s")
    labels[t].add("t")
    k = KripkeStructure(tuple(order), s, tuple((str(a), str(b)) for a, b in edges), labels)
    k = add_terminal_loops(k)
    validate(k)
    return k, REACH_EXISTS, REACH_FORALL
