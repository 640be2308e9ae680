"""Batch evaluation of compiled LTL bodies over lasso-shaped letter windows.

A body is compiled to a postfix op table (see ``semantics.compile_body``)
and evaluated on a common window of ``width`` positions whose successor
function wraps position ``width - 1`` back to ``stab``.  Each row of the
letter tensor holds one assignment of traces to the body's variable
slots, letters encoded as proposition bitmasks.

Two interchangeable backends exist: numba-compiled loops (default) and a
pure numpy path vectorized over the batch.  Set ``HYREP_DISABLE_NUMBA=1``
to force numpy.  Even with numba active, narrow windows and small batches
go to numpy: there the vectorized path is as fast and skips JIT start-up.
"""

from __future__ import annotations

import os

import numpy as np

OP_TRUE, OP_ATOM, OP_NOT, OP_OR, OP_NEXT, OP_UNTIL = range(6)


def _numpy_tables(ops, letters, stab, width):
    m = ops.shape[0]
    batch = letters.shape[0]
    vals = np.zeros((m, batch, width), dtype=bool)
    succ = np.arange(1, width + 1)
    succ[-1] = stab
    for k in range(m):
        op, a, b = ops[k]
        if op == OP_TRUE:
            vals[k] = True
        elif op == OP_ATOM:
            vals[k] = (letters[:, a, :] >> b) & 1
        elif op == OP_NOT:
            vals[k] = ~vals[a]
        elif op == OP_OR:
            vals[k] = vals[a] | vals[b]
        elif op == OP_NEXT:
            vals[k] = vals[a][:, succ]
        else:
            left, right = vals[a], vals[b]
            x = right.copy()
            while True:
                before = x.copy()
                for i in range(width - 1, -1, -1):
                    x[:, i] = right[:, i] | (left[:, i] & x[:, succ[i]])
                if np.array_equal(before, x):
                    break
            vals[k] = x
    return vals


def numpy_eval_batch(ops, letters, stab, width):
    return _numpy_tables(ops, letters, stab, width)[-1][:, 0].copy()


def numpy_eval_table(ops, letters, stab, width):
    return _numpy_tables(ops, letters[None, :, :], stab, width)[:, 0, :]


def _py_row(ops, row, stab, width, vals):
    m = ops.shape[0]
    for k in range(m):
        op = ops[k, 0]
        a = ops[k, 1]
        b = ops[k, 2]
        if op == OP_TRUE:
            for i in range(width):
                vals[k, i] = True
        elif op == OP_ATOM:
            for i in range(width):
                vals[k, i] = (row[a, i] >> b) & 1 == 1
        elif op == OP_NOT:
            for i in range(width):
                vals[k, i] = not vals[a, i]
        elif op == OP_OR:
            for i in range(width):
                vals[k, i] = vals[a, i] or vals[b, i]
        elif op == OP_NEXT:
            for i in range(width - 1):
                vals[k, i] = vals[a, i + 1]
            vals[k, width - 1] = vals[a, stab]
        else:
            for i in range(width):
                vals[k, i] = vals[b, i]
            changed = True
            while changed:
                changed = False
                for i in range(width - 1, -1, -1):
                    j = i + 1 if i + 1 < width else stab
                    if not vals[k, i] and vals[a, i] and vals[k, j]:
                        vals[k, i] = True
                        changed = True


HAVE_NUMBA = False
if os.environ.get("HYREP_DISABLE_NUMBA", "") not in ("1", "true", "yes"):
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        pass
    else:
        HAVE_NUMBA = True
        _row = njit(cache=True)(_py_row)

        @njit(cache=True)
        def numba_eval_batch(ops, letters, stab, width):
            batch = letters.shape[0]
            out = np.zeros(batch, dtype=np.bool_)
            vals = np.zeros((ops.shape[0], width), dtype=np.bool_)
            for r in range(batch):
                _row(ops, letters[r], stab, width, vals)
                out[r] = vals[ops.shape[0] - 1, 0]
            return out

        @njit(cache=True)
        def numba_eval_table(ops, letters, stab, width):
            vals = np.zeros((ops.shape[0], width), dtype=np.bool_)
            _row(ops, letters, stab, width, vals)
            return vals


BACKEND = "numba" if HAVE_NUMBA else "numpy"
# numba pays off only past both limits (see benchmarks/bench_kernels.py)
NUMBA_MIN_WIDTH = 64
NUMBA_MIN_CELLS = 1 << 17


def use_backend(name: str) -> None:
    """Switch the active backend (``"numba"`` or ``"numpy"``)."""
    global BACKEND
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend unavailable")
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    BACKEND = name


def eval_batch(ops: np.ndarray, letters: np.ndarray, stab: int, width: int) -> np.ndarray:
    """Truth value at position 0 of the root op, one per letter row."""
    if BACKEND == "numba" and width >= NUMBA_MIN_WIDTH and letters.shape[0] * width >= NUMBA_MIN_CELLS:
        return numba_eval_batch(ops, letters, stab, width)
    return numpy_eval_batch(ops, letters, stab, width)


def eval_table(ops: np.ndarray, letters: np.ndarray, stab: int, width: int) -> np.ndarray:
    """Full (op, position) truth table for a single assignment."""
    if BACKEND == "numba" and width >= NUMBA_MIN_WIDTH:
        return numba_eval_table(ops, letters, stab, width)
    return numpy_eval_table(ops, letters, stab, width)
