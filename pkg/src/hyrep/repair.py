"""Repair by transition pruning: decision procedures and witness construction.

``repair`` dispatches on the pair (fragment of the formula, frame of the
structure) to a specialized strategy:

=====================  ==========================  ==================
fragment               frame                       strategy
=====================  ==========================  ==================
E*                     any                         ``mc-only``
A*, E<=1 A*            tree, acyclic               ``single-trace``
E* A*                  tree                        ``exist-enum``
A E*                   tree                        ``marking``
anything else          tree, acyclic               ``guess-check``
anything else          general                     ``bounded``
=====================  ==========================  ==================

``brute`` enumerates every candidate and model checks each one
separately; it is the reference the other strategies are tested against.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import StrategyMismatch
from .formula import Fragment, HyperFormula, Quantifier, classify_fragment
from .kripke import (
    FrameShape,
    KripkeStructure,
    RepairCandidate,
    apply_repair,
    classify_frame,
    count_repairs,
    enumerate_repairs,
    identity_candidate,
    repair_masks,
    trace_paths,
    validate,
)
from .semantics import LassoBounds, check, default_bounds, evaluate, evaluator, lasso_traces

CHUNK = 1 << 14
# candidate spaces up to this size get exactly optimal witnesses
EXACT_POLISH = 1 << 16


class Verdict(enum.Enum):
    REPAIRABLE = "repairable"
    NOT_REPAIRABLE = "not-repairable"
    BOUNDED_UNKNOWN = "bounded-unknown"

    def __str__(self) -> str:
        return self.value


class Strategy(enum.Enum):
    MC_ONLY = "mc-only"
    SINGLE_TRACE = "single-trace"
    EXIST_ENUM = "exist-enum"
    MARKING = "marking"
    GUESS_CHECK = "guess-check"
    BRUTE = "brute"
    BOUNDED = "bounded"

    def __str__(self) -> str:
        return self.value


class Prefer(enum.Enum):
    MAX = "max"
    MIN = "min"
    ANY = "any"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RepairResult:
    verdict: Verdict
    witness: RepairCandidate | None
    strategy: Strategy
    certificate: dict = field(default_factory=dict)
    bounds: LassoBounds | None = None

    @property
    def repairable(self) -> bool:
        return self.verdict is Verdict.REPAIRABLE

    def repaired(self, k: KripkeStructure) -> KripkeStructure | None:
        return None if self.witness is None else apply_repair(k, self.witness)


def _prefer(p) -> Prefer:
    return p if isinstance(p, Prefer) else Prefer(str(p).lower())


# ---------------------------------------------------------------------------
# Candidate oracles
# ---------------------------------------------------------------------------


class _PathOracle:
    """Checks transition masks of a tree or acyclic structure in batches.

    A maximal path survives a repair iff all its edges are kept, so the
    trace subset of every candidate is one matrix product away.  Candidates
    with equal trace subsets are checked once.
    """

    def __init__(self, k: KripkeStructure, f: HyperFormula):
        self.k = k
        self.paths = trace_paths(k)
        self.ev = evaluator(f)
        self.ctx = self.ev.context(self.paths.traces)
        n_paths = len(self.paths.paths)
        self.incidence = np.zeros((n_paths, len(k.transitions)), dtype=np.int32)
        for i, edges in enumerate(self.paths.paths):
            self.incidence[i, list(edges)] = 1
        self.path_trace = np.zeros((n_paths, len(self.paths.traces)), dtype=np.int32)
        self.path_trace[np.arange(n_paths), self.paths.path_trace] = 1
        self.trace_sets = 0

    def present(self, masks: np.ndarray) -> np.ndarray:
        missing = (~masks).astype(np.int32) @ self.incidence.T
        return ((missing == 0).astype(np.int32) @ self.path_trace) > 0

    def holds(self, masks: np.ndarray) -> np.ndarray:
        pres = self.present(np.atleast_2d(masks))
        uniq, inverse = np.unique(pres, axis=0, return_inverse=True)
        self.trace_sets += len(uniq)
        return self.ev.check_masks(self.ctx, uniq)[inverse.ravel()]


class _LassoOracle:
    """Bounded checks for General frames, one candidate at a time."""

    def __init__(self, k: KripkeStructure, f: HyperFormula, bounds: LassoBounds):
        self.k = k
        self.f = f
        self.bounds = bounds
        self._seen: dict = {}

    def holds(self, masks: np.ndarray) -> np.ndarray:
        out = []
        for row in np.atleast_2d(masks):
            sub = self.k.with_transitions(t for t, keep in zip(self.k.transitions, row) if keep)
            traces = lasso_traces(sub, self.bounds)
            if traces not in self._seen:
                self._seen[traces] = bool(traces) and evaluate(traces, self.f)
            out.append(self._seen[traces])
        return np.array(out, dtype=bool)


def _sources(k: KripkeStructure) -> np.ndarray:
    index = {s: i for i, s in enumerate(k.states)}
    return np.array([index[a] for a, _ in k.transitions], dtype=np.int64)


def _extend(k: KripkeStructure, oracle, mask: np.ndarray) -> np.ndarray:
    """Add transitions back, lowest id first, while the formula keeps holding."""
    mask = mask.copy()
    while True:
        missing = np.flatnonzero(~mask)
        if not len(missing):
            return mask
        trials = np.repeat(mask[None], len(missing), axis=0)
        trials[np.arange(len(missing)), missing] = True
        ok = np.flatnonzero(oracle.holds(trials))
        if not len(ok):
            return mask
        mask[missing[ok[0]]] = True


def _shrink(k: KripkeStructure, oracle, mask: np.ndarray) -> np.ndarray:
    """Drop transitions, lowest id first, while totality and the formula survive."""
    mask = mask.copy()
    src = _sources(k)
    while True:
        out_deg = np.bincount(src[mask], minlength=len(k.states))
        removable = np.flatnonzero(mask & (out_deg[src] > 1))
        if not len(removable):
            return mask
        trials = np.repeat(mask[None], len(removable), axis=0)
        trials[np.arange(len(removable)), removable] = False
        ok = np.flatnonzero(oracle.holds(trials))
        if not len(ok):
            return mask
        mask[removable[ok[0]]] = False


def _polish(k, oracle, mask, prefer: Prefer) -> np.ndarray:
    """Honor ``prefer``: exactly when the candidate space is small, greedily otherwise."""
    if prefer is Prefer.ANY:
        return mask
    if count_repairs(k) <= EXACT_POLISH:
        best, _ = _scan(k, oracle, prefer)
        if best is not None:
            return best
    if prefer is Prefer.MAX:
        return _extend(k, oracle, mask)
    if prefer is Prefer.MIN:
        return _shrink(k, oracle, mask)
    return mask


def _branch_mask(k: KripkeStructure, edge_paths) -> np.ndarray:
    """Keep exactly the given paths; states off those paths keep every edge."""
    mask = np.zeros(len(k.transitions), dtype=bool)
    on_path = set()
    for edges in edge_paths:
        for e in edges:
            mask[e] = True
            on_path.add(k.transitions[e][0])
    for s in k.states:
        if s not in on_path:
            mask[k.out_edges[s]] = True
    return mask


def _first_path(oracle: _PathOracle, trace_index: int) -> tuple:
    return oracle.paths.paths[oracle.paths.path_trace.index(trace_index)]


def _result(k, oracle, mask, strategy, certificate, prefer) -> RepairResult:
    mask = _polish(k, oracle, mask, prefer)
    return RepairResult(Verdict.REPAIRABLE, RepairCandidate.from_mask(k, mask), strategy, certificate)


# ---------------------------------------------------------------------------
# Preconditions
# ---------------------------------------------------------------------------


def _require_fragment(f: HyperFormula, strategy: Strategy, *tags: Fragment) -> None:
    frag = classify_fragment(f)
    if not any(frag.member_of(t) for t in tags):
        need = " or ".join(t.value for t in tags)
        raise StrategyMismatch(
            f"strategy {strategy} needs a formula in {need}; prefix {f.prefix_string} is {frag.tag.value}")


def _require_frame(k: KripkeStructure, strategy: Strategy, *shapes: FrameShape) -> FrameShape:
    frame = classify_frame(k)
    if frame not in shapes:
        need = " or ".join(s.value for s in shapes)
        raise StrategyMismatch(f"strategy {strategy} needs a {need} frame, got {frame}")
    return frame


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------


def repair_existential(k: KripkeStructure, f: HyperFormula, prefer="max",
                       bounds: LassoBounds | None = None) -> RepairResult:
    """E* formulas: pruning never helps, so repair is model checking."""
    _require_fragment(f, Strategy.MC_ONLY, Fragment.E_STAR)
    validate(k)
    res = check(k, f, bounds)
    cert = {"traces": res.trace_count}
    if res.holds:
        witness = identity_candidate(k)
        if _prefer(prefer) is Prefer.MIN and not res.bounded:
            mask = _polish(k, _PathOracle(k, f), witness.mask(k), Prefer.MIN)
            witness = RepairCandidate.from_mask(k, mask)
        return RepairResult(Verdict.REPAIRABLE, witness, Strategy.MC_ONLY, cert, res.bounds)
    verdict = Verdict.BOUNDED_UNKNOWN if res.bounded else Verdict.NOT_REPAIRABLE
    return RepairResult(verdict, None, Strategy.MC_ONLY, cert, res.bounds)


def repair_single_trace(k: KripkeStructure, f: HyperFormula, prefer="max") -> RepairResult:
    """A* and E<=1 A*: some single trace satisfying the diagonal body suffices."""
    _require_fragment(f, Strategy.SINGLE_TRACE, Fragment.A_STAR, Fragment.E_LE1_A_STAR)
    validate(k)
    _require_frame(k, Strategy.SINGLE_TRACE, FrameShape.TREE, FrameShape.ACYCLIC)
    oracle = _PathOracle(k, f)
    good = np.flatnonzero(oracle.ev.diagonal(oracle.ctx))
    if not len(good):
        return RepairResult(Verdict.NOT_REPAIRABLE, None, Strategy.SINGLE_TRACE, {"traces": len(oracle.ctx)})
    t = int(good[0])
    path = _first_path(oracle, t)
    cert = {"trace": str(oracle.paths.traces[t]), "path": _path_states(k, path)}
    return _result(k, oracle, _branch_mask(k, [path]), Strategy.SINGLE_TRACE, cert, _prefer(prefer))


def _path_states(k: KripkeStructure, edges) -> list:
    return [k.transitions[edges[0]][0]] + [k.transitions[e][1] for e in edges[:-1]]


def _split_prefix(f: HyperFormula):
    lead = f.prefix[0][0]
    n = 0
    while n < len(f.prefix) and f.prefix[n][0] is lead:
        n += 1
    return n


def repair_tree_exist_enum(k: KripkeStructure, f: HyperFormula, prefer="max") -> RepairResult:
    """E* A* on trees: guess the existential traces; universals range over them."""
    _require_fragment(f, Strategy.EXIST_ENUM, Fragment.E_STAR_A_STAR)
    validate(k)
    _require_frame(k, Strategy.EXIST_ENUM, FrameShape.TREE)
    m = _split_prefix(f) if f.prefix[0][0] is Quantifier.EXISTS else 0
    if m == 0:
        res = repair_single_trace(k, f, prefer)
        return RepairResult(res.verdict, res.witness, Strategy.EXIST_ENUM, res.certificate)
    oracle = _PathOracle(k, f)
    n = len(oracle.ctx)
    table = oracle.ev.body_table(oracle.ctx)
    u = len(f.prefix) - m
    combos = list(itertools.product(range(n), repeat=m))
    if _prefer(prefer) is Prefer.MIN:
        combos.sort(key=lambda c: (len(set(c)), c))
    for combo in combos:
        chosen = sorted(set(combo))
        sub = table[combo]
        if u:
            sub = sub[np.ix_(*([chosen] * u))]
        if sub.all():
            paths = [_first_path(oracle, t) for t in chosen]
            cert = {"existential": [str(oracle.paths.traces[t]) for t in combo]}
            return _result(k, oracle, _branch_mask(k, paths), Strategy.EXIST_ENUM, cert, _prefer(prefer))
    return RepairResult(Verdict.NOT_REPAIRABLE, None, Strategy.EXIST_ENUM, {"assignments": len(combos)})


def repair_tree_marking(k: KripkeStructure, f: HyperFormula, prefer="max") -> RepairResult:
    """A E* on trees: greatest fixpoint of leaves whose universal instance has marked witnesses."""
    _require_fragment(f, Strategy.MARKING, Fragment.A_E_STAR)
    validate(k)
    _require_frame(k, Strategy.MARKING, FrameShape.TREE)
    oracle = _PathOracle(k, f)
    n = len(oracle.ctx)
    table = oracle.ev.body_table(oracle.ctx)
    marked = np.ones(n, dtype=bool)
    rounds = 0
    while True:
        rounds += 1
        ok = table
        for axis in range(table.ndim - 1, 0, -1):
            shape = [1] * ok.ndim
            shape[axis] = n
            ok = np.any(ok & marked.reshape(shape), axis=axis)
        nxt = marked & ok
        if np.array_equal(nxt, marked):
            break
        marked = nxt
    survivors = np.flatnonzero(marked)
    cert = {"surviving": [str(oracle.paths.traces[t]) for t in survivors], "rounds": rounds}
    if not len(survivors):
        return RepairResult(Verdict.NOT_REPAIRABLE, None, Strategy.MARKING, cert)
    paths = [p for p, t in zip(oracle.paths.paths, oracle.paths.path_trace) if marked[t]]
    cert["leaves"] = sorted({k.transitions[p[-1]][0] for p in paths})
    return _result(k, oracle, _branch_mask(k, paths), Strategy.MARKING, cert, _prefer(prefer))


def _scan(k, oracle, prefer: Prefer):
    masks = repair_masks(k, "min" if prefer is Prefer.MIN else "max")
    # chunks grow geometrically so an early hit stays cheap
    start, size = 0, 1
    while start < len(masks):
        chunk = masks[start:start + size]
        hits = np.flatnonzero(oracle.holds(chunk))
        if len(hits):
            return chunk[hits[0]], start + int(hits[0]) + 1
        start += len(chunk)
        size = min(size * 8, CHUNK)
    return None, len(masks)


def repair_guess_check(k: KripkeStructure, f: HyperFormula, prefer="max") -> RepairResult:
    """Full logic on trees and acyclic frames: check every candidate in preference order."""
    validate(k)
    _require_frame(k, Strategy.GUESS_CHECK, FrameShape.TREE, FrameShape.ACYCLIC)
    oracle = _PathOracle(k, f)
    mask, checked = _scan(k, oracle, _prefer(prefer))
    cert = {"candidates_checked": checked, "trace_sets_checked": oracle.trace_sets}
    if mask is None:
        return RepairResult(Verdict.NOT_REPAIRABLE, None, Strategy.GUESS_CHECK, cert)
    return RepairResult(Verdict.REPAIRABLE, RepairCandidate.from_mask(k, mask), Strategy.GUESS_CHECK, cert)


def repair_bounded_general(k: KripkeStructure, f: HyperFormula, bounds: LassoBounds | None = None,
                           prefer="max") -> RepairResult:
    """General frames: every candidate gets a bounded lasso check; failure stays inconclusive."""
    validate(k)
    _require_frame(k, Strategy.BOUNDED, FrameShape.GENERAL)
    bounds = bounds or default_bounds(k, f)
    oracle = _LassoOracle(k, f, bounds)
    mask, checked = _scan(k, oracle, _prefer(prefer))
    cert = {"candidates_checked": checked}
    if mask is None:
        return RepairResult(Verdict.BOUNDED_UNKNOWN, None, Strategy.BOUNDED, cert, bounds)
    return RepairResult(Verdict.REPAIRABLE, RepairCandidate.from_mask(k, mask), Strategy.BOUNDED, cert, bounds)


def repair_brute(k: KripkeStructure, f: HyperFormula, prefer="max",
                 bounds: LassoBounds | None = None) -> RepairResult:
    """Apply and model check every candidate on its own; the reference strategy."""
    validate(k)
    general = classify_frame(k) is FrameShape.GENERAL
    if general:
        bounds = bounds or default_bounds(k, f)
    order = "min" if _prefer(prefer) is Prefer.MIN else "max"
    checked = 0
    for cand in enumerate_repairs(k, order):
        checked += 1
        if check(apply_repair(k, cand), f, bounds).holds:
            return RepairResult(Verdict.REPAIRABLE, cand, Strategy.BRUTE,
                                {"candidates_checked": checked}, bounds)
    verdict = Verdict.BOUNDED_UNKNOWN if general else Verdict.NOT_REPAIRABLE
    return RepairResult(verdict, None, Strategy.BRUTE, {"candidates_checked": checked}, bounds)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def select_strategy(k: KripkeStructure, f: HyperFormula) -> Strategy:
    frag = classify_fragment(f)
    frame = classify_frame(k)
    if frag.member_of(Fragment.E_STAR):
        return Strategy.MC_ONLY
    if frame is FrameShape.GENERAL:
        return Strategy.BOUNDED
    if frag.member_of(Fragment.E_LE1_A_STAR):
        return Strategy.SINGLE_TRACE
    if frame is FrameShape.TREE and frag.member_of(Fragment.E_STAR_A_STAR):
        return Strategy.EXIST_ENUM
    if frame is FrameShape.TREE and frag.member_of(Fragment.A_E_STAR):
        return Strategy.MARKING
    return Strategy.GUESS_CHECK


def repair(k: KripkeStructure, f: HyperFormula, prefer="max", strategy="auto",
           bounds: LassoBounds | None = None) -> RepairResult:
    """Decide whether pruning transitions of ``k`` can make it satisfy ``f``."""
    validate(k)
    strategy = select_strategy(k, f) if strategy in ("auto", None) else Strategy(str(strategy))
    if strategy is Strategy.MC_ONLY:
        return repair_existential(k, f, prefer, bounds)
    if strategy is Strategy.SINGLE_TRACE:
        return repair_single_trace(k, f, prefer)
    if strategy is Strategy.EXIST_ENUM:
        return repair_tree_exist_enum(k, f, prefer)
    if strategy is Strategy.MARKING:
        return repair_tree_marking(k, f, prefer)
    if strategy is Strategy.GUESS_CHECK:
        return repair_guess_check(k, f, prefer)
    if strategy is Strategy.BOUNDED:
        return repair_bounded_general(k, f, bounds, prefer)
    return repair_brute(k, f, prefer, bounds)
