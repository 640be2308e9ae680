"""HyperLTL syntax: AST, text parser, printer and fragment classification.

Concrete grammar::

    formula  := ("exists" | "forall") VAR "." formula | body
    body     := iff
    iff      := imp ("<->" imp)*            (left associative)
    imp      := or ("->" imp)?              (right associative)
    or       := and ("|" and)*
    and      := until ("&" until)*
    until    := unary ("U" until)?          (right associative)
    unary    := ("!" | "X" | "F" | "G") unary | atom
    atom     := "true" | "false" | NAME "[" VAR "]" | "(" body ")"

``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import DuplicateVariable, ParseError, UnboundVariable


class Quantifier(enum.Enum):
    EXISTS = "exists"
    FORALL = "forall"

    @property
    def letter(self) -> str:
        return "E" if self is Quantifier.EXISTS else "A"

    def dual(self) -> "Quantifier":
        return Quantifier.FORALL if self is Quantifier.EXISTS else Quantifier.EXISTS


# ---------------------------------------------------------------------------
# LTL body nodes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class Atom:
    prop: str
    var: str


@dataclass(frozen=True)
class Not:
    arg: "Body"


@dataclass(frozen=True)
class And:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Or:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Implies:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Iff:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Next:
    arg: "Body"


@dataclass(frozen=True)
class Until:
    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Release:
    """Dual of until; produced by negation normal form, never by the parser."""

    left: "Body"
    right: "Body"


@dataclass(frozen=True)
class Eventually:
    arg: "Body"


@dataclass(frozen=True)
class Globally:
    arg: "Body"


Body = Union[TrueF, Atom, Not, And, Or, Implies, Iff, Next, Until, Release, Eventually, Globally]

FALSE = Not(TrueF())
TRUE = TrueF()

_UNARY = (Not, Next, Eventually, Globally)
_BINARY = (And, Or, Implies, Iff, Until, Release)


def children(node: Body) -> tuple:
    if isinstance(node, _UNARY):
        return (node.arg,)
    if isinstance(node, _BINARY):
        return (node.left, node.right)
    return ()


def walk(node: Body) -> Iterator[Body]:
    """Pre-order traversal of a body."""
    stack = [node]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(reversed(children(cur)))


def free_vars(node: Body) -> frozenset:
    return frozenset(n.var for n in walk(node) if isinstance(n, Atom))


def props(node: Body) -> frozenset:
    return frozenset(n.prop for n in walk(node) if isinstance(n, Atom))


def conj(*parts: Body) -> Body:
    """Left-nested conjunction; ``conj()`` is ``true``."""
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(*parts: Body) -> Body:
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def next_n(node: Body, n: int) -> Body:
    for _ in range(n):
        node = Next(node)
    return node


@dataclass(frozen=True)
class HyperFormula:
    prefix: tuple  # ((Quantifier, var), ...)
    body: Body

    def __post_init__(self):
        seen = set()
        for _, var in self.prefix:
            if var in seen:
                raise DuplicateVariable(var)
            seen.add(var)
        for var in sorted(free_vars(self.body)):
            if var not in seen:
                raise UnboundVariable(var)

    @property
    def variables(self) -> tuple:
        return tuple(v for _, v in self.prefix)

    @property
    def quantifiers(self) -> tuple:
        return tuple(q for q, _ in self.prefix)

    @property
    def prefix_string(self) -> str:
        return "".join(q.letter for q in self.quantifiers)

    def core_body(self) -> Body:
        return desugar(self.body)

    def __str__(self) -> str:
        return format_formula(self)


# ---------------------------------------------------------------------------
# Desugaring and negation
# ---------------------------------------------------------------------------


def _neg(node: Body) -> Body:
    return node.arg if isinstance(node, Not) else Not(node)


def desugar(node: Body) -> Body:
    """Rewrite into the core {true, atom, !, |, X, U}."""
    if isinstance(node, (TrueF, Atom)):
        return node
    if isinstance(node, Not):
        return _neg(desugar(node.arg))
    if isinstance(node, Or):
        return Or(desugar(node.left), desugar(node.right))
    if isinstance(node, And):
        return Not(Or(_neg(desugar(node.left)), _neg(desugar(node.right))))
    if isinstance(node, Implies):
        return Or(_neg(desugar(node.left)), desugar(node.right))
    if isinstance(node, Iff):
        a, b = desugar(node.left), desugar(node.right)
        both = Not(Or(_neg(a), _neg(b)))
        neither = Not(Or(a, b))
        return Or(both, neither)
    if isinstance(node, Next):
        return Next(desugar(node.arg))
    if isinstance(node, Until):
        return Until(desugar(node.left), desugar(node.right))
    if isinstance(node, Release):
        return Not(Until(_neg(desugar(node.left)), _neg(desugar(node.right))))
    if isinstance(node, Eventually):
        return Until(TRUE, desugar(node.arg))
    if isinstance(node, Globally):
        return Not(Until(TRUE, _neg(desugar(node.arg))))
    raise TypeError(f"not a body node: {node!r}")


def nnf(node: Body) -> Body:
    """Negation normal form; negation only in front of ``true`` and atoms."""
    if isinstance(node, Not):
        return negate_body(node.arg)
    if isinstance(node, (TrueF, Atom)):
        return node
    if isinstance(node, Implies):
        return Or(negate_body(node.left), nnf(node.right))
    if isinstance(node, Iff):
        return Or(And(nnf(node.left), nnf(node.right)),
                  And(negate_body(node.left), negate_body(node.right)))
    if isinstance(node, Eventually):
        return Until(TRUE, nnf(node.arg))
    if isinstance(node, Globally):
        return Release(FALSE, nnf(node.arg))
    if isinstance(node, _UNARY):
        return type(node)(nnf(node.arg))
    return type(node)(nnf(node.left), nnf(node.right))


def negate_body(node: Body) -> Body:
    """Return the negation of ``node`` in negation normal form."""
    if isinstance(node, (TrueF, Atom)):
        return Not(node)
    if isinstance(node, Not):
        return nnf(node.arg)
    if isinstance(node, And):
        return Or(negate_body(node.left), negate_body(node.right))
    if isinstance(node, Or):
        return And(negate_body(node.left), negate_body(node.right))
    if isinstance(node, Implies):
        return And(nnf(node.left), negate_body(node.right))
    if isinstance(node, Iff):
        return Or(And(nnf(node.left), negate_body(node.right)),
                  And(negate_body(node.left), nnf(node.right)))
    if isinstance(node, Next):
        return Next(negate_body(node.arg))
    if isinstance(node, Until):
        return Release(negate_body(node.left), negate_body(node.right))
    if isinstance(node, Release):
        return Until(negate_body(node.left), negate_body(node.right))
    if isinstance(node, Eventually):
        return Release(FALSE, negate_body(node.arg))
    if isinstance(node, Globally):
        return Until(TRUE, negate_body(node.arg))
    raise TypeError(f"not a body node: {node!r}")


# ---------------------------------------------------------------------------
# Fragments
# ---------------------------------------------------------------------------


class Fragment(enum.Enum):
    E_STAR = "EStar"
    A_STAR = "AStar"
    E_STAR_A_STAR = "EStarAStar"
    E_LE1_A_STAR = "ELe1AStar"
    A_E_STAR = "AEStar"
    A_STAR_E_STAR = "AStarEStar"
    EA_K = "EA_k"
    AE_K = "AE_k"
    GENERAL = "General"


_FRAGMENT_PATTERNS = {
    Fragment.E_STAR: r"E*",
    Fragment.A_STAR: r"A*",
    Fragment.E_STAR_A_STAR: r"E*A*",
    Fragment.E_LE1_A_STAR: r"E?A*",
    Fragment.A_E_STAR: r"AE*",
    Fragment.A_STAR_E_STAR: r"A*E*",
    Fragment.GENERAL: r"[EA]*",
}


@dataclass(frozen=True)
class FragmentClass:
    tag: Fragment
    alternations: int
    leading: Quantifier
    prefix: str

    @property
    def family(self) -> str:
        """``EA_k(k)`` or ``AE_k(k)`` according to the leading quantifier."""
        head = "EA_k" if self.leading is Quantifier.EXISTS else "AE_k"
        return f"{head}({self.alternations})"

    def member_of(self, tag: Fragment, k: int | None = None) -> bool:
        if tag is Fragment.EA_K:
            return self.leading is Quantifier.EXISTS and (k is None or self.alternations == k)
        if tag is Fragment.AE_K:
            return self.leading is Quantifier.FORALL and (k is None or self.alternations == k)
        return re.fullmatch(_FRAGMENT_PATTERNS[tag], self.prefix) is not None

    def __str__(self) -> str:
        if self.tag in (Fragment.EA_K, Fragment.AE_K):
            return self.family
        return self.tag.value


def count_alternations(quantifiers) -> int:
    qs = list(quantifiers)
    return sum(1 for a, b in zip(qs, qs[1:]) if a is not b)


def classify_fragment(f: HyperFormula) -> FragmentClass:
    prefix = f.prefix_string
    alt = count_alternations(f.quantifiers)
    leading = f.quantifiers[0] if f.prefix else Quantifier.EXISTS
    n_e = prefix.count("E")
    n_a = prefix.count("A")
    if n_a == 0:
        tag = Fragment.E_STAR
    elif n_e == 0:
        tag = Fragment.A_STAR
    elif alt == 1 and leading is Quantifier.EXISTS:
        tag = Fragment.E_LE1_A_STAR if n_e == 1 else Fragment.E_STAR_A_STAR
    elif alt == 1:
        tag = Fragment.A_E_STAR if n_a == 1 else Fragment.A_STAR_E_STAR
    else:
        tag = Fragment.EA_K if leading is Quantifier.EXISTS else Fragment.AE_K
    return FragmentClass(tag, alt, leading, prefix)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<op><->|->|[!&|()\[\].])
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"exists", "forall", "true", "false", "X", "F", "G", "U"}


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        if m.lastgroup != "ws":
            out.append((m.group(), m.start()))
        pos = m.end()
    out.append(("<eof>", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def pos(self) -> int:
        return self.tokens[self.i][1]

    def take(self, expected: str | None = None) -> str:
        tok, pos = self.tokens[self.i]
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok!r}", pos, self.text)
        self.i += 1
        return tok

    def name(self, what: str) -> str:
        tok, pos = self.tokens[self.i]
        if tok in _KEYWORDS or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", tok):
            raise ParseError(f"expected {what}, found {tok!r}", pos, self.text)
        self.i += 1
        return tok

    def formula(self) -> HyperFormula:
        prefix = []
        seen = set()
        while self.peek() in ("exists", "forall"):
            q = Quantifier(self.take())
            var = self.name("trace variable")
            if var in seen:
                raise DuplicateVariable(var)
            seen.add(var)
            self.take(".")
            prefix.append((q, var))
        if not prefix:
            raise ParseError("a sentence needs at least one quantifier", self.pos(), self.text)
        body = self.iff()
        if self.peek() != "<eof>":
            raise ParseError(f"unexpected token {self.peek()!r}", self.pos(), self.text)
        for node in walk(body):
            if isinstance(node, Atom) and node.var not in seen:
                raise UnboundVariable(node.var)
        return HyperFormula(tuple(prefix), body)

    def iff(self) -> Body:
        left = self.imp()
        while self.peek() == "<->":
            self.take()
            left = Iff(left, self.imp())
        return left

    def imp(self) -> Body:
        left = self.or_()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.imp())
        return left

    def or_(self) -> Body:
        left = self.and_()
        while self.peek() == "|":
            self.take()
            left = Or(left, self.and_())
        return left

    def and_(self) -> Body:
        left = self.until()
        while self.peek() == "&":
            self.take()
            left = And(left, self.until())
        return left

    def until(self) -> Body:
        left = self.unary()
        if self.peek() == "U":
            self.take()
            return Until(left, self.until())
        return left

    def unary(self) -> Body:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok == "X":
            self.take()
            return Next(self.unary())
        if tok == "F":
            self.take()
            return Eventually(self.unary())
        if tok == "G":
            self.take()
            return Globally(self.unary())
        return self.atom()

    def atom(self) -> Body:
        tok = self.peek()
        if tok == "true":
            self.take()
            return TRUE
        if tok == "false":
            self.take()
            return FALSE
        if tok == "(":
            self.take()
            inner = self.iff()
            self.take(")")
            return inner
        prop = self.name("proposition")
        self.take("[")
        var = self.name("trace variable")
        self.take("]")
        return Atom(prop, var)


def parse_formula(text: str) -> HyperFormula:
    """Parse a prenex HyperLTL sentence."""
    return _Parser(text).formula()


def parse_body(text: str, variables=()) -> Body:
    """Parse a quantifier-free body; used by tests and generators."""
    p = _Parser(text)
    body = p.iff()
    if p.peek() != "<eof>":
        raise ParseError(f"unexpected token {p.peek()!r}", p.pos(), text)
    if variables:
        for v in free_vars(body):
            if v not in variables:
                raise UnboundVariable(v)
    return body


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

# binding strength; higher binds tighter
_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Until: 5}
_SYMBOL = {Iff: "<->", Implies: "->", Or: "|", And: "&", Until: "U", Release: "R"}
_UNARY_SYMBOL = {Not: "!", Next: "X", Eventually: "F", Globally: "G"}


def format_body(node: Body) -> str:
    return _fmt(node, 0)


def _fmt(node: Body, ctx: int) -> str:
    if isinstance(node, TrueF):
        return "true"
    if node == FALSE:
        return "false"
    if isinstance(node, Atom):
        return f"{node.prop}[{node.var}]"
    if isinstance(node, _UNARY):
        return _UNARY_SYMBOL[type(node)] + " " + _fmt(node.arg, 6)
    if isinstance(node, Release):
        # not part of the surface grammar: print its desugared meaning
        return _fmt(Not(Until(negate_body(node.left), negate_body(node.right))), ctx)
    prec = _PREC[type(node)]
    if isinstance(node, (Implies, Until)):  # right associative
        left, right = _fmt(node.left, prec + 1), _fmt(node.right, prec)
    else:
        left, right = _fmt(node.left, prec), _fmt(node.right, prec + 1)
    text = f"{left} {_SYMBOL[type(node)]} {right}"
    return f"({text})" if prec < ctx else text


def format_formula(f: HyperFormula) -> str:
    head = " ".join(f"{q.value} {v}." for q, v in f.prefix)
    return f"{head} {format_body(f.body)}"
