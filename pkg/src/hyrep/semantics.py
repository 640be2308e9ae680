"""Exact HyperLTL evaluation over finite sets of ultimately periodic traces.

LTL bodies are compiled to op tables and evaluated in batches by the
kernels in ``_kernels``.  Quantifiers are handled by a miniscoped
quantifier tree: each quantifier is pushed as deep into the boolean
structure of the body as its polarity allows, so independent parts of the
body are tabulated over only the variables they mention.  The tree is
folded over one or more *candidate masks*, boolean vectors selecting a
subset of the trace universe.  A single all-true mask is plain
evaluation; many masks at once is how the repair strategies check whole
batches of substructures against one trace universe.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache, reduce
from itertools import islice
from math import lcm
from typing import Iterable, Mapping

import numpy as np

from . import _kernels
from .errors import EmptyTraceSet, TooLarge, UnboundVariable
from .formula import (
    And,
    Atom,
    Body,
    HyperFormula,
    Implies,
    Next,
    Not,
    Or,
    Quantifier,
    TrueF,
    Until,
    desugar,
    free_vars,
    props,
)
from .kripke import (
    FrameShape,
    KripkeStructure,
    Trace,
    classify_frame,
    enumerate_lassos,
    enumerate_traces,
    sorted_traces,
)

TraceAssignment = Mapping[str, Trace]

MAX_PROPS = 62
# beyond this window width rows are evaluated on their own windows
MAX_SHARED_WIDTH = 4096
ROW_CHUNK = 1 << 15
CANDIDATE_CHUNK = 256


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------


def compile_body(body: Body, slots: Mapping[str, int], bits: Mapping[str, int]) -> np.ndarray:
    """Compile ``body`` into a postfix op table; the root is the last row.

    Structurally equal subformulas share one row.
    """
    index: dict = {}
    rows: list = []

    def emit(node) -> int:
        if node in index:
            return index[node]
        if isinstance(node, TrueF):
            row = (_kernels.OP_TRUE, 0, 0)
        elif isinstance(node, Atom):
            row = (_kernels.OP_ATOM, slots[node.var], bits[node.prop])
        elif isinstance(node, Not):
            row = (_kernels.OP_NOT, emit(node.arg), 0)
        elif isinstance(node, Or):
            row = (_kernels.OP_OR, emit(node.left), emit(node.right))
        elif isinstance(node, Next):
            row = (_kernels.OP_NEXT, emit(node.arg), 0)
        elif isinstance(node, Until):
            row = (_kernels.OP_UNTIL, emit(node.left), emit(node.right))
        else:  # pragma: no cover - desugar guarantees the core
            raise TypeError(f"not a core node: {node!r}")
        index[node] = len(rows)
        rows.append(row)
        return index[node]

    emit(desugar(body))
    return np.asarray(rows, dtype=np.int64).reshape(-1, 3)


def _prop_bits(names: Iterable[str]) -> dict:
    names = sorted(set(names))
    if len(names) > MAX_PROPS:
        raise TooLarge(f"{len(names)} propositions exceed the limit of {MAX_PROPS}")
    return {p: i for i, p in enumerate(names)}


def _encode(a: frozenset, bits: Mapping[str, int]) -> int:
    code = 0
    for p in a:
        b = bits.get(p)
        if b is not None:
            code |= 1 << b
    return code


# ---------------------------------------------------------------------------
# Horizons and single assignments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalHorizon:
    """Positions ``>= stabilization`` repeat with ``period``."""

    stabilization: int
    period: int

    @property
    def width(self) -> int:
        return self.stabilization + self.period

    def fold(self, position: int) -> int:
        if position < self.width:
            return position
        return self.stabilization + (position - self.stabilization) % self.period


def horizon(assign: TraceAssignment | Iterable[Trace]) -> EvalHorizon:
    traces = list(assign.values()) if isinstance(assign, Mapping) else list(assign)
    if not traces:
        return EvalHorizon(0, 1)
    return EvalHorizon(max(len(t.stem) for t in traces),
                       lcm(*(len(t.loop) for t in traces)))


def _unroll(traces, bits, width) -> np.ndarray:
    out = np.zeros((len(traces), width), dtype=np.int64)
    for r, t in enumerate(traces):
        out[r] = [_encode(t.letter(i), bits) for i in range(width)]
    return out


def evaluate_body(assign: TraceAssignment, body: Body, position: int = 0) -> bool:
    """Truth of ``body`` at ``position`` under the trace assignment."""
    if position < 0:
        raise ValueError("position must be non-negative")
    names = sorted(free_vars(body))
    for v in names:
        if v not in assign:
            raise UnboundVariable(v)
    used = {v: assign[v] for v in names}
    hz = horizon(used)
    bits = _prop_bits(props(body))
    ops = compile_body(body, {v: i for i, v in enumerate(names)}, bits)
    letters = _unroll([used[v] for v in names], bits, hz.width)
    table = _kernels.eval_table(ops, letters, hz.stabilization, hz.width)
    return bool(table[-1, hz.fold(position)])


# ---------------------------------------------------------------------------
# Quantifier trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QLeaf:
    body: Body
    vars: frozenset


@dataclass(frozen=True)
class QAnd:
    parts: tuple
    vars: frozenset


@dataclass(frozen=True)
class QOr:
    parts: tuple
    vars: frozenset


@dataclass(frozen=True)
class QQuant:
    quantifier: Quantifier
    var: str
    child: object
    vars: frozenset


def _leaf(body: Body) -> QLeaf:
    return QLeaf(body, free_vars(body))


def _join(cls, parts) -> object:
    flat = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, cls) else (p,))
    if len(flat) == 1:
        return flat[0]
    return cls(tuple(flat), frozenset().union(*(p.vars for p in flat)))


def split_body(body: Body, positive: bool = True):
    """Expose the top-level boolean structure of ``body`` as a tree."""
    if isinstance(body, Not):
        return split_body(body.arg, not positive)
    if isinstance(body, (And, Or)):
        conjunctive = isinstance(body, And) == positive
        parts = (split_body(body.left, positive), split_body(body.right, positive))
        return _join(QAnd if conjunctive else QOr, parts)
    if isinstance(body, Implies):
        parts = (split_body(body.left, not positive), split_body(body.right, positive))
        return _join(QOr if positive else QAnd, parts)
    return _leaf(body if positive else Not(body))


def quantify(q: Quantifier, var: str, node):
    """Bind ``var`` in ``node``, scoping the quantifier as narrowly as possible."""
    if var not in node.vars:
        return node
    distributes = QAnd if q is Quantifier.FORALL else QOr
    if isinstance(node, distributes):
        return _join(distributes, [quantify(q, var, p) for p in node.parts])
    if isinstance(node, (QAnd, QOr)):
        inside = [p for p in node.parts if var in p.vars]
        outside = [p for p in node.parts if var not in p.vars]
        if outside:
            bound = quantify(q, var, _join(type(node), inside))
            return _join(type(node), outside + [bound])
    return QQuant(q, var, node, node.vars - {var})


def quantifier_tree(f: HyperFormula):
    node = split_body(f.body)
    for q, var in reversed(f.prefix):
        node = quantify(q, var, node)
    return node


def _leaves(node) -> Iterable[QLeaf]:
    if isinstance(node, QLeaf):
        yield node
    elif isinstance(node, QQuant):
        yield from _leaves(node.child)
    else:
        for p in node.parts:
            yield from _leaves(p)


def _quantifier_free(node) -> bool:
    if isinstance(node, QLeaf):
        return True
    if isinstance(node, QQuant):
        return False
    return all(_quantifier_free(p) for p in node.parts)


def _quantify(q: Quantifier, val: np.ndarray, axis: int, masks: np.ndarray) -> np.ndarray:
    """Fold one tensor axis against the candidate masks.

    ``val`` has a leading candidate axis of size 1 or C.  Forall is
    ``all(val | ~mask)`` and exists ``any(val & mask)``; both are computed
    as counts through a matrix product, which beats broadcasting the full
    (C, ..., n) boolean tensor.
    """
    c = masks.shape[0]
    if val.shape[axis] == 1:
        # the variable does not occur below: only nonemptiness matters
        nonempty = masks.any(axis=1).reshape((c,) + (1,) * (val.ndim - 1))
        return val | ~nonempty if q is Quantifier.FORALL else val & nonempty
    lhs = np.moveaxis(val, axis, -1)
    if q is Quantifier.FORALL:
        lhs = ~lhs
    m = masks.astype(np.float32)
    if lhs.shape[0] == 1:
        rows = lhs.reshape(-1, lhs.shape[-1]).astype(np.float32)
        counts = (rows @ m.T).T.reshape((c,) + lhs.shape[1:-1])
    else:
        counts = np.matmul(lhs.reshape(c, -1, lhs.shape[-1]).astype(np.float32), m[:, :, None])
        counts = counts.reshape((c,) + lhs.shape[1:-1])
    out = counts == 0 if q is Quantifier.FORALL else counts > 0
    return np.expand_dims(out, axis)


# ---------------------------------------------------------------------------
# Trace universes
# ---------------------------------------------------------------------------


class TraceContext:
    """A fixed, ordered trace universe prepared for one evaluator.

    Leaf tables are memoized here, so a context is cheap to query many
    times with different candidate masks.
    """

    def __init__(self, evaluator: "Evaluator", traces: Iterable[Trace]):
        self.evaluator = evaluator
        self.traces = tuple(traces)
        self.horizon = horizon(self.traces)
        self.shared = self.horizon.width <= MAX_SHARED_WIDTH
        width = self.horizon.width if self.shared else max(len(t.stem) + len(t.loop) for t in self.traces)
        self.letters = _unroll(self.traces, evaluator.bits, width) if self.traces else None
        self._tables: dict = {}

    def __len__(self) -> int:
        return len(self.traces)

    def memo(self, node, compute) -> np.ndarray:
        key = id(node)
        if key not in self._tables:
            self._tables[key] = compute()
        return self._tables[key]

    def leaf_table(self, leaf: QLeaf) -> np.ndarray:
        """Truth of ``leaf`` over all traces for its free variables, in prefix order."""
        key = id(leaf)
        if key not in self._tables:
            self._tables[key] = self._compute(leaf)
        return self._tables[key]

    def _compute(self, leaf: QLeaf) -> np.ndarray:
        ev = self.evaluator
        names = [v for v in ev.variables if v in leaf.vars]
        ops = ev.ops(leaf)
        n = len(self.traces)
        k = len(names)
        shape = (n,) * k
        rows = n ** k
        out = np.empty(rows, dtype=bool)
        hz = self.horizon
        for start in range(0, rows, ROW_CHUNK):
            stop = min(rows, start + ROW_CHUNK)
            idx = np.stack(np.unravel_index(np.arange(start, stop), shape), axis=1) if k else \
                np.zeros((stop - start, 0), dtype=np.int64)
            if self.shared:
                out[start:stop] = _kernels.eval_batch(ops, self.letters[idx], hz.stabilization, hz.width)
            else:
                for r, combo in enumerate(idx, start):
                    local = horizon(self.traces[i] for i in combo)
                    letters = _unroll([self.traces[i] for i in combo], ev.bits, local.width)
                    out[r] = _kernels.eval_batch(ops, letters[None], local.stabilization, local.width)[0]
        table = out.reshape(shape)
        # one axis per prefix variable, singleton where the leaf does not depend on it
        full = [n if v in leaf.vars else 1 for v in ev.variables]
        return table.reshape(full)


class Evaluator:
    """Compiled form of one sentence, reusable across trace universes."""

    def __init__(self, f: HyperFormula):
        self.formula = f
        self.variables = f.variables
        self.axis = {v: i for i, v in enumerate(self.variables)}
        self.bits = _prop_bits(props(f.body))
        self.tree = quantifier_tree(f)
        self.open_tree = split_body(f.body)
        self._ops: dict = {}

    def ops(self, leaf: QLeaf) -> np.ndarray:
        key = leaf.body
        if key not in self._ops:
            names = [v for v in self.variables if v in leaf.vars]
            self._ops[key] = compile_body(leaf.body, {v: i for i, v in enumerate(names)}, self.bits)
        return self._ops[key]

    def context(self, traces: Iterable[Trace]) -> TraceContext:
        return TraceContext(self, traces)

    def _fold(self, ctx: TraceContext, node, masks: np.ndarray) -> np.ndarray:
        if isinstance(node, QLeaf):
            return ctx.leaf_table(node)[None]
        if isinstance(node, (QAnd, QOr)):
            if _quantifier_free(node):
                return ctx.memo(node, lambda: self._combine(ctx, node, masks))
            return self._combine(ctx, node, masks)
        return _quantify(node.quantifier, self._fold(ctx, node.child, masks), 1 + self.axis[node.var], masks)

    def _combine(self, ctx, node, masks):
        op = np.logical_and if isinstance(node, QAnd) else np.logical_or
        return reduce(op, (self._fold(ctx, p, masks) for p in node.parts))

    def check_masks(self, ctx: TraceContext, masks: np.ndarray) -> np.ndarray:
        """Truth of the sentence on each trace subset selected by a row of ``masks``."""
        masks = np.asarray(masks, dtype=bool).reshape(-1, len(ctx))
        out = np.empty(masks.shape[0], dtype=bool)
        for start in range(0, masks.shape[0], CANDIDATE_CHUNK):
            chunk = masks[start:start + CANDIDATE_CHUNK]
            val = self._fold(ctx, self.tree, chunk)
            out[start:start + len(chunk)] = np.broadcast_to(val.reshape(val.shape[0]), (len(chunk),))
        return out

    def holds(self, ctx: TraceContext) -> bool:
        if not len(ctx):
            raise EmptyTraceSet()
        return bool(self.check_masks(ctx, np.ones((1, len(ctx)), dtype=bool))[0])

    def body_table(self, ctx: TraceContext) -> np.ndarray:
        """Truth of the quantifier-free body for every assignment of the prefix variables."""
        full = (len(ctx),) * len(self.variables)
        dummy = np.ones((1, len(ctx)), dtype=bool)
        return np.broadcast_to(self._fold(ctx, self.open_tree, dummy)[0], full)

    def diagonal(self, ctx: TraceContext) -> np.ndarray:
        """Truth of the body with every variable mapped to the same trace."""
        n = len(ctx)
        val = self._fold(ctx, self.open_tree, np.ones((1, n), dtype=bool))[0]
        if not self.variables:
            return np.broadcast_to(val, (n,))
        idx = tuple(np.arange(n) if s == n else np.zeros(n, dtype=np.int64) for s in val.shape)
        return val[idx]


@lru_cache(maxsize=256)
def evaluator(f: HyperFormula) -> Evaluator:
    return Evaluator(f)


def evaluate(traces: Iterable[Trace], f: HyperFormula) -> bool:
    """Decide ``T |= f`` for a finite, nonempty trace set ``T``."""
    traces = sorted_traces(traces)
    if not traces:
        raise EmptyTraceSet()
    ev = evaluator(f)
    return ev.holds(ev.context(traces))


# ---------------------------------------------------------------------------
# Model checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LassoBounds:
    stem: int
    loop: int

    def as_dict(self) -> dict:
        return {"stem": self.stem, "loop": self.loop}


def default_bounds(k: KripkeStructure, f: HyperFormula) -> LassoBounds:
    """Witness bounds for General frames; ``HYREP_DEFAULT_BOUNDS=stem,loop`` overrides."""
    env = os.environ.get("HYREP_DEFAULT_BOUNDS")
    if env:
        try:
            stem, loop = (int(x) for x in env.split(","))
        except ValueError:
            raise ValueError(f"HYREP_DEFAULT_BOUNDS must be 'stem,loop', got {env!r}") from None
        return LassoBounds(stem, loop)
    size = len(k.states) ** max(1, len(f.prefix))
    return LassoBounds(size, size)


def lasso_traces(k: KripkeStructure, bounds: LassoBounds, limit: int = 100_000) -> tuple:
    found = list(islice(enumerate_lassos(k, bounds.stem, bounds.loop), limit + 1))
    if len(found) > limit:
        raise TooLarge(f"more than {limit} lasso traces within bounds {bounds}")
    return sorted_traces(found)


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    bounded: bool
    bounds: LassoBounds | None
    trace_count: int


def check(k: KripkeStructure, f: HyperFormula, bounds: LassoBounds | None = None) -> CheckResult:
    """Model check ``k`` against ``f``; General frames use bounded lasso search."""
    if classify_frame(k) is FrameShape.GENERAL:
        bounds = bounds or default_bounds(k, f)
        traces = lasso_traces(k, bounds)
        if not traces:
            return CheckResult(False, True, bounds, 0)
        return CheckResult(evaluate(traces, f), True, bounds, len(traces))
    traces = enumerate_traces(k)
    return CheckResult(evaluate(traces, f), False, None, len(traces))


def model_check(k: KripkeStructure, f: HyperFormula, bounds: LassoBounds | None = None) -> bool:
    return check(k, f, bounds).holds
