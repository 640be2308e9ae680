"""Readers for DIMACS CNF, QDIMACS and a line-based Horn clause format."""

from __future__ import annotations

from pathlib import Path

from .errors import ParseError
from .formula import Quantifier
from .reductions import CnfInstance, HornInstance, QbfInstance, normalize_horn, to_three_literals


def _text(source) -> str:
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).exists()):
        return Path(source).read_text(encoding="utf-8")
    return str(source)


def _dimacs_body(text: str, kind: str):
    header = None
    prefix = []
    clauses = []
    current: list = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != kind:
                raise ParseError(f"line {lineno}: expected 'p {kind} <vars> <clauses>'")
            header = (int(parts[2]), int(parts[3]))
            continue
        if header is None:
            raise ParseError(f"line {lineno}: clause before the problem line")
        if line[0] in "ae":
            if clauses or current:
                raise ParseError(f"line {lineno}: quantifier line after clauses")
            nums = [int(x) for x in line[1:].split()]
            if not nums or nums[-1] != 0:
                raise ParseError(f"line {lineno}: quantifier line must end with 0")
            q = Quantifier.EXISTS if line[0] == "e" else Quantifier.FORALL
            prefix.append((q, tuple(nums[:-1])))
            continue
        try:
            nums = [int(x) for x in line.split()]
        except ValueError:
            raise ParseError(f"line {lineno}: not a clause: {raw!r}") from None
        for x in nums:
            if x == 0:
                clauses.append(tuple(current))
                current = []
            else:
                if abs(x) > header[0]:
                    raise ParseError(f"line {lineno}: literal {x} exceeds {header[0]} variables")
                current.append(x)
    if header is None:
        raise ParseError("missing problem line")
    if current:
        clauses.append(tuple(current))
    return header, prefix, clauses


def read_dimacs(source) -> CnfInstance:
    """DIMACS CNF; clauses shorter than three literals are padded by repetition."""
    (n, _), _, clauses = _dimacs_body(_text(source), "cnf")
    return to_three_literals(n, clauses)


def read_qdimacs(source) -> QbfInstance:
    """QDIMACS; unquantified variables join an outermost existential block."""
    (n, _), prefix, clauses = _dimacs_body(_text(source), "cnf")
    merged = []
    for q, vs in prefix:
        if merged and merged[-1][0] is q:
            merged[-1] = (q, merged[-1][1] + vs)
        else:
            merged.append((q, vs))
    bound = {v for _, vs in merged for v in vs}
    used = sorted({abs(x) for c in clauses for x in c} - bound)
    if used:
        if merged and merged[0][0] is Quantifier.EXISTS:
            merged[0] = (Quantifier.EXISTS, tuple(used) + merged[0][1])
        else:
            merged.insert(0, (Quantifier.EXISTS, tuple(used)))
    return QbfInstance(tuple(merged), tuple(clauses))


def read_horn(source) -> HornInstance:
    """One clause per line: ``-a -b c`` means ``!a | !b | c``.

    At most one positive literal per line; a line without one is a goal
    clause.  ``#`` starts a comment.
    """
    variables: dict = {}
    clauses = []
    for lineno, raw in enumerate(_text(source).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        negs, pos = [], None
        for tok in line.split():
            name = tok[1:] if tok.startswith("-") else tok
            if not name:
                raise ParseError(f"line {lineno}: empty literal")
            variables.setdefault(name, None)
            if tok.startswith("-"):
                negs.append(name)
            elif pos is not None:
                raise ParseError(f"line {lineno}: more than one positive literal, not a Horn clause")
            else:
                pos = name
        clauses.append((negs, pos))
    return normalize_horn(tuple(variables), clauses)
