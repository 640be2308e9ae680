"""Kripke structures, frame shapes, traces and repair candidates."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from math import prod
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import (
    DeadlockState,
    MissingInit,
    NotAcyclic,
    StructureError,
    TooLarge,
    UnknownState,
    WouldDeadlock,
)

# hard ceiling on materialized repair candidates
MAX_CANDIDATES = 4_000_000


def letter(labels: Iterable[str]) -> frozenset:
    return frozenset(labels)


def _letter_key(a: frozenset) -> tuple:
    return tuple(sorted(a))


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------


def _primitive_root(word: tuple) -> tuple:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


@dataclass(frozen=True, order=False)
class UltimatelyPeriodicTrace:
    """The infinite word ``stem . loop^omega`` in canonical form."""

    stem: tuple
    loop: tuple

    def __post_init__(self):
        if not self.loop:
            raise ValueError("the loop of an ultimately periodic trace must be nonempty")
        stem = tuple(frozenset(a) for a in self.stem)
        loop = _primitive_root(tuple(frozenset(a) for a in self.loop))
        while stem and stem[-1] == loop[-1]:
            stem = stem[:-1]
            loop = (loop[-1],) + loop[:-1]
        object.__setattr__(self, "stem", stem)
        object.__setattr__(self, "loop", loop)

    def letter(self, i: int) -> frozenset:
        if i < len(self.stem):
            return self.stem[i]
        return self.loop[(i - len(self.stem)) % len(self.loop)]

    def prefix(self, n: int) -> tuple:
        return tuple(self.letter(i) for i in range(n))

    @property
    def sort_key(self) -> tuple:
        return (len(self.stem) + len(self.loop),
                tuple(_letter_key(a) for a in self.stem),
                tuple(_letter_key(a) for a in self.loop))

    def __str__(self) -> str:
        def fmt(a):
            return "{" + ",".join(sorted(a)) + "}"

        stem = "".join(fmt(a) for a in self.stem)
        loop = "".join(fmt(a) for a in self.loop)
        return f"{stem}({loop})^w"


Trace = UltimatelyPeriodicTrace


def sorted_traces(traces: Iterable[Trace]) -> tuple:
    return tuple(sorted(set(traces), key=lambda t: t.sort_key))


# ---------------------------------------------------------------------------
# Structures
# ---------------------------------------------------------------------------


class FrameShape(enum.Enum):
    TREE = "tree"
    ACYCLIC = "acyclic"
    GENERAL = "general"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, eq=True)
class KripkeStructure:
    states: tuple
    init: str | None
    transitions: tuple
    labels: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "transitions", tuple(sorted({tuple(t) for t in self.transitions})))
        object.__setattr__(self, "labels",
                           {s: frozenset(self.labels.get(s, ())) for s in self.states})

    __hash__ = None

    @cached_property
    def edge_index(self) -> dict:
        return {t: i for i, t in enumerate(self.transitions)}

    @cached_property
    def successors(self) -> dict:
        out = {s: [] for s in self.states}
        for a, b in self.transitions:
            out.setdefault(a, []).append(b)
        return out

    @cached_property
    def out_edges(self) -> dict:
        out = {s: [] for s in self.states}
        for i, (a, _) in enumerate(self.transitions):
            out.setdefault(a, []).append(i)
        return out

    @cached_property
    def predecessors(self) -> dict:
        out = {s: [] for s in self.states}
        for a, b in self.transitions:
            out.setdefault(b, []).append(a)
        return out

    def label(self, state) -> frozenset:
        return self.labels[state]

    def reachable(self) -> list:
        seen = {self.init}
        order = [self.init]
        for s in order:
            for t in self.successors.get(s, ()):
                if t not in seen:
                    seen.add(t)
                    order.append(t)
        return order

    def with_transitions(self, kept: Iterable) -> "KripkeStructure":
        return KripkeStructure(self.states, self.init, tuple(kept), self.labels)

    @property
    def propositions(self) -> frozenset:
        return frozenset().union(*self.labels.values()) if self.labels else frozenset()


def validate(k: KripkeStructure) -> None:
    """Raise unless ``k`` is a well-formed, deadlock-free Kripke structure."""
    if not k.states or k.init is None:
        raise MissingInit("structure has no initial state")
    states = set(k.states)
    if len(states) != len(k.states):
        raise StructureError("duplicate state ids")
    if k.init not in states:
        raise UnknownState(k.init)
    for a, b in k.transitions:
        if a not in states:
            raise UnknownState(a)
        if b not in states:
            raise UnknownState(b)
    for s in k.states:
        if not k.successors.get(s):
            raise DeadlockState(s)


def is_terminal(k: KripkeStructure, s) -> bool:
    """A state whose only transition is a self-loop."""
    return k.successors[s] == [s]


def classify_frame(k: KripkeStructure) -> FrameShape:
    for s in k.states:
        succ = k.successors[s]
        if s in succ and len(succ) > 1:
            return FrameShape.GENERAL
    # Kahn's algorithm on the frame without self-loops
    indeg = {s: 0 for s in k.states}
    for a, b in k.transitions:
        if a != b:
            indeg[b] += 1
    queue = [s for s in k.states if indeg[s] == 0]
    seen = 0
    while queue:
        s = queue.pop()
        seen += 1
        for t in k.successors[s]:
            if t != s:
                indeg[t] -= 1
                if indeg[t] == 0:
                    queue.append(t)
    if seen != len(k.states):
        return FrameShape.GENERAL
    for s in k.states:
        preds = [p for p in k.predecessors[s] if p != s]
        if s == k.init:
            if preds:
                return FrameShape.ACYCLIC
        elif len(preds) != 1:
            return FrameShape.ACYCLIC
    return FrameShape.TREE


def add_terminal_loops(k: KripkeStructure) -> KripkeStructure:
    """Give every state without successors a self-loop."""
    extra = [(s, s) for s in k.states if not k.successors.get(s)]
    return k.with_transitions(list(k.transitions) + extra)


# ---------------------------------------------------------------------------
# Trace enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TracePaths:
    """Maximal paths of an acyclic structure with their label traces."""

    traces: tuple
    paths: tuple  # tuple of edge-id tuples
    path_trace: tuple  # trace index of each path


def trace_paths(k: KripkeStructure) -> TracePaths:
    if classify_frame(k) is FrameShape.GENERAL:
        raise NotAcyclic("trace enumeration needs a tree or acyclic frame")
    raw = []
    stack = [(k.init, (), ())]
    while stack:
        s, states, edges = stack.pop()
        states = states + (s,)
        if is_terminal(k, s):
            raw.append((states, edges + (k.edge_index[(s, s)],)))
            continue
        for t in reversed(k.successors[s]):
            stack.append((t, states, edges + (k.edge_index[(s, t)],)))
    lookup = {}
    path_trace = []
    for states, _ in raw:
        tr = Trace(tuple(k.labels[s] for s in states[:-1]), (k.labels[states[-1]],))
        lookup.setdefault(tr, None)
        path_trace.append(tr)
    traces = sorted_traces(lookup)
    index = {t: i for i, t in enumerate(traces)}
    return TracePaths(traces, tuple(e for _, e in raw), tuple(index[t] for t in path_trace))


def enumerate_traces(k: KripkeStructure) -> tuple:
    """All traces of a tree or acyclic structure, deduplicated by labels."""
    return trace_paths(k).traces


def enumerate_lassos(k: KripkeStructure, stem_bound: int, loop_bound: int) -> Iterator[Trace]:
    """Label traces realized by lassos with bounded stem and loop length."""
    loops = {}

    def cycles(q):
        # label words of closed walks q -> ... -> q, by length
        if q not in loops:
            found = []
            layer = {((k.labels[q],), q)}
            for _ in range(loop_bound):
                nxt = set()
                for word, s in layer:
                    for t in k.successors[s]:
                        if t == q:
                            found.append(word)
                        if len(word) < loop_bound:
                            nxt.add((word + (k.labels[t],), t))
                layer = nxt
            loops[q] = sorted(set(found), key=lambda w: (len(w), [_letter_key(a) for a in w]))
        return loops[q]

    seen = set()
    prefixes = {((), None)}
    for m in range(stem_bound + 1):
        starts = {}
        for word, last in prefixes:
            nexts = [k.init] if last is None else k.successors[last]
            for q in nexts:
                starts.setdefault(q, set()).add(word)
        for q in sorted(starts):
            for stem in sorted(starts[q], key=lambda w: [_letter_key(a) for a in w]):
                for loop in cycles(q):
                    tr = Trace(stem, loop)
                    if tr not in seen:
                        seen.add(tr)
                        yield tr
        if m == stem_bound:
            break
        nxt = set()
        for word, last in prefixes:
            for q in ([k.init] if last is None else k.successors[last]):
                nxt.add((word + (k.labels[q],), q))
        prefixes = nxt


# ---------------------------------------------------------------------------
# Repairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RepairCandidate:
    kept: frozenset

    @classmethod
    def from_mask(cls, k: KripkeStructure, mask) -> "RepairCandidate":
        return cls(frozenset(t for t, keep in zip(k.transitions, mask) if keep))

    def mask(self, k: KripkeStructure) -> np.ndarray:
        return np.array([t in self.kept for t in k.transitions], dtype=bool)

    def removed(self, k: KripkeStructure) -> list:
        return [t for t in k.transitions if t not in self.kept]

    def __len__(self) -> int:
        return len(self.kept)


def identity_candidate(k: KripkeStructure) -> RepairCandidate:
    return RepairCandidate(frozenset(k.transitions))


def count_repairs(k: KripkeStructure) -> int:
    return prod(2 ** len(k.out_edges[s]) - 1 for s in k.states)


def _state_options(k: KripkeStructure, s) -> np.ndarray:
    edges = k.out_edges[s]
    n = len(edges)
    opts = np.zeros((2 ** n - 1, len(k.transitions)), dtype=bool)
    for code in range(1, 2 ** n):
        for j, e in enumerate(edges):
            if code >> j & 1:
                opts[code - 1, e] = True
    return opts


def _order(masks: np.ndarray, prefer: str) -> np.ndarray:
    card = masks.sum(axis=1)
    primary = -card if prefer in ("max", "any") else card
    # ties: lexicographically smallest sorted tuple of kept ids first,
    # i.e. the mask with the earliest True comes first
    keys = [~masks[:, j] for j in reversed(range(masks.shape[1]))]
    keys.append(primary)
    return masks[np.lexsort(keys)]


def repair_masks(k: KripkeStructure, prefer: str = "max", limit: int = MAX_CANDIDATES) -> np.ndarray:
    """Every totality-preserving transition subset as a boolean matrix.

    Rows are ordered by cardinality (descending for ``max``/``any``,
    ascending for ``min``) with ties broken by the lexicographically
    smallest set of kept transition ids.
    """
    total = count_repairs(k)
    if total > limit:
        raise TooLarge(f"{total} repair candidates exceed the limit of {limit}")
    masks = np.zeros((1, len(k.transitions)), dtype=bool)
    for s in k.states:
        if not k.out_edges[s]:
            raise DeadlockState(s)
        opts = _state_options(k, s)
        masks = (masks[:, None, :] | opts[None, :, :]).reshape(-1, len(k.transitions))
    return _order(masks, prefer)


def enumerate_repairs(k: KripkeStructure, prefer: str = "max") -> Iterator[RepairCandidate]:
    """Yield all repair candidates, the identity first for ``max``."""
    validate(k)
    for row in repair_masks(k, prefer):
        yield RepairCandidate.from_mask(k, row)


def apply_repair(k: KripkeStructure, c: RepairCandidate) -> KripkeStructure:
    for t in c.kept:
        if t not in k.edge_index:
            raise StructureError(f"transition {t!r} is not part of the structure")
    kept_src = {a for a, _ in c.kept}
    for s in k.states:
        if s not in kept_src:
            raise WouldDeadlock(s)
    return k.with_transitions(sorted(c.kept))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def structure_from_dict(data: Mapping, normalize_terminals: bool = False) -> KripkeStructure:
    try:
        raw_states = data["states"]
        init = data.get("init")
        raw_trans = data.get("transitions", [])
    except (TypeError, KeyError) as exc:
        raise StructureError(f"malformed structure document: {exc}") from None
    # states are either {"id", "labels"} objects or bare ids with a top-level label map
    label_map = data.get("labels", {})
    states = []
    labels = {}
    for entry in raw_states:
        if isinstance(entry, Mapping):
            if "id" not in entry:
                raise StructureError(f"state entry {entry!r} has no id")
            sid, lab = str(entry["id"]), entry.get("labels", [])
        else:
            sid = str(entry)
            lab = label_map.get(sid, [])
        if sid in labels:
            raise StructureError(f"duplicate state id {sid!r}")
        states.append(sid)
        labels[sid] = frozenset(str(x) for x in lab)
    seen = set()
    trans = []
    for pair in raw_trans:
        if isinstance(pair, str) or len(pair) != 2:
            raise StructureError(f"transition {pair!r} is not a pair")
        t = (str(pair[0]), str(pair[1]))
        if t in seen:
            raise StructureError(f"duplicate transition {t!r}")
        seen.add(t)
        trans.append(t)
    k = KripkeStructure(tuple(states), None if init is None else str(init), tuple(trans), labels)
    if normalize_terminals:
        k = add_terminal_loops(k)
    validate(k)
    return k


def structure_to_dict(k: KripkeStructure) -> dict:
    return {
        "states": [{"id": s, "labels": sorted(k.labels[s])} for s in k.states],
        "init": k.init,
        "transitions": [list(t) for t in k.transitions],
    }


def load_structure(path, normalize_terminals: bool = False) -> KripkeStructure:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StructureError(f"{path}: {exc}") from None
    return structure_from_dict(data, normalize_terminals)


def dump_structure(k: KripkeStructure, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(structure_to_dict(k), fh, indent=2, sort_keys=True)
        fh.write("\n")


def to_dot(k: KripkeStructure, removed: Iterable = ()) -> str:
    removed = set(map(tuple, removed))
    lines = ["digraph K {", "  rankdir=TB;", '  __init [shape=point];',
             f'  __init -> "{k.init}";']
    for s in k.states:
        lab = ",".join(sorted(k.labels[s]))
        lines.append(f'  "{s}" [label="{s}\\n{{{lab}}}"];')
    for a, b in k.transitions:
        style = " [style=dashed, color=gray]" if (a, b) in removed else ""
        lines.append(f'  "{a}" -> "{b}"{style};')
    lines.append("}")
    return "\n".join(lines) + "\n"
