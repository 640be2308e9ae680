"""Exhaustive small-instance enumeration for the reduction round-trips.

Instances are enumerated once per symmetry class.  Renaming variables and
flipping their polarity maps satisfiable instances to satisfiable ones,
so one representative per class covers the whole space.  Classes are
closed under these maps, so a representative is the least encoding in
its orbit.
"""

from __future__ import annotations

import itertools

import numpy as np

from hyrep.formula import Quantifier
from hyrep.reductions import CnfInstance, QbfInstance, normalize_horn, to_three_literals

E, A = Quantifier.EXISTS, Quantifier.FORALL


def _literals(n):
    return [lit for v in range(1, n + 1) for lit in (v, -v)]


def _lit_index(lit):
    return 2 * (abs(lit) - 1) + (lit < 0)


def _clause_masks(n, max_len):
    lits = _literals(n)
    out = []
    for size in range(1, max_len + 1):
        for combo in itertools.combinations(lits, size):
            out.append(sum(1 << _lit_index(x) for x in combo))
    return sorted(out)


def _mask_literals(mask, n):
    return tuple(lit for lit in _literals(n) if mask >> _lit_index(lit) & 1)


def _literal_maps(n, perms, flips=True):
    """Each group element as a table literal-index -> literal-index."""
    maps = []
    for perm in perms:
        for signs in itertools.product((False, True), repeat=n) if flips else [(False,) * n]:
            table = np.empty(2 * n, dtype=np.int64)
            for v in range(n):
                for neg in (0, 1):
                    table[2 * v + neg] = 2 * perm[v] + (neg ^ signs[v])
            maps.append(table)
    return maps


def _canonical_sets(n, clause_masks, max_clauses, maps):
    """Representatives of clause sets (1..max_clauses distinct clauses) under ``maps``."""
    img = np.stack([_apply(t, np.arange(1 << (2 * n))) for t in maps])
    width = 2 * n
    reps = []
    for m in range(1, max_clauses + 1):
        sets = np.array(list(itertools.combinations(clause_masks, m)), dtype=np.int64)
        best = None
        for g in range(len(maps)):
            mapped = np.sort(img[g][sets], axis=1)
            code = np.zeros(len(sets), dtype=np.int64)
            for j in range(m):
                code = (code << width) | mapped[:, j]
            best = code if best is None else np.minimum(best, code)
        own = np.zeros(len(sets), dtype=np.int64)
        for j in range(m):
            own = (own << width) | sets[:, j]
        reps.extend(tuple(int(x) for x in row) for row in sets[own == best])
    return reps


def _apply(table, masks):
    out = np.zeros_like(masks)
    for i, j in enumerate(table):
        out |= ((masks >> i) & 1) << j
    return out


def cnf_instances(max_vars=4, max_clauses=3):
    """3SAT instances: clauses are sets of 1-3 literals, padded to three by repetition."""
    for n in range(1, max_vars + 1):
        maps = _literal_maps(n, itertools.permutations(range(n)))
        for rep in _canonical_sets(n, _clause_masks(n, 3), max_clauses, maps):
            yield to_three_literals(n, [_mask_literals(c, n) for c in rep])


def _horn_key(combo, perm):
    # goal clauses (no positive literal) use -1
    return tuple(sorted((tuple(sorted(perm[x] for x in negs)), -1 if pos is None else perm[pos])
                        for negs, pos in combo))


def horn_instances(max_vars=4, max_clauses=3):
    """Horn instances: any set of negatives with at most one positive literal.

    Only variable renaming is factored out; polarity flips do not preserve
    the Horn shape.
    """
    for n in range(1, max_vars + 1):
        names = [f"x{i}" for i in range(1, n + 1)]
        clauses = [(negs, pos) for r in range(n + 1) for negs in itertools.combinations(range(n), r)
                   for pos in [None, *range(n)]]
        perms = list(itertools.permutations(range(n)))
        for m in range(1, max_clauses + 1):
            for combo in itertools.combinations(clauses, m):
                if _horn_key(combo, perms[0]) != min(_horn_key(combo, p) for p in perms):
                    continue
                yield normalize_horn(names, [([names[x] for x in negs], None if pos is None else names[pos])
                                             for negs, pos in combo])


def _prefixes(n, max_blocks):
    """Alternating block structures over variables 1..n in prefix order."""
    for parts in range(1, min(n, max_blocks) + 1):
        for cuts in itertools.combinations(range(1, n), parts - 1):
            bounds = (0, *cuts, n)
            sizes = [b - a for a, b in zip(bounds, bounds[1:])]
            for lead in (E, A):
                blocks, start = [], 1
                for i, size in enumerate(sizes):
                    q = lead if i % 2 == 0 else (A if lead is E else E)
                    blocks.append((q, tuple(range(start, start + size))))
                    start += size
                yield tuple(blocks)


def qbf_instances(max_vars=3, max_blocks=3, max_clauses=2):
    """Alternating QBF; clauses are nonempty literal sets (complementary pairs allowed)."""
    for n in range(1, max_vars + 1):
        masks = _clause_masks(n, 2 * n)
        for blocks in _prefixes(n, max_blocks):
            perms = []
            for combo in itertools.product(*(itertools.permutations(vs) for _, vs in blocks)):
                perms.append([v - 1 for vs in combo for v in vs])
            maps = _literal_maps(n, perms)
            for rep in _canonical_sets(n, masks, max_clauses, maps):
                yield QbfInstance(blocks, tuple(_mask_literals(c, n) for c in rep))


def with_leading_exists(q: QbfInstance) -> QbfInstance:
    """Prefix a fresh, unused existential variable when the first block is universal."""
    if q.blocks[0][0] is E:
        return q
    fresh = max(q.variables) + 1
    return QbfInstance(((E, (fresh,)), *q.blocks), q.clauses)


__all__ = ["CnfInstance", "cnf_instances", "horn_instances", "qbf_instances", "with_leading_exists"]
