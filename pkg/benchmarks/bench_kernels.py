"""Compare the numba and numpy evaluation backends.

    python3 benchmarks/bench_kernels.py --batch 20000 --width 24

Times ``eval_batch`` on random letter windows for a few bodies, then an
end-to-end repair of a reduced 3SAT instance under each backend.  Numba
compile time is paid once in a warm-up call and reported separately.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hyrep import _kernels
from hyrep.formula import parse_body
from hyrep.reductions import CnfInstance, reduce_3sat
from hyrep.repair import repair
from hyrep.semantics import compile_body

BODIES = {
    "safety": ("G (a[p] <-> a[q])", ("p", "q")),
    "until": ("(a[p] & !b[q]) U (b[p] & X a[q])", ("p", "q")),
    "nested": ("G F (a[p] -> X (b[q] U (a[r] | c[p])))", ("p", "q", "r")),
}


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(batch, width, repeat, rng):
    bits = {"a": 0, "b": 1, "c": 2}
    stab = width // 3
    rows = []
    for name, (text, variables) in BODIES.items():
        body = parse_body(text, variables)
        ops = compile_body(body, {v: i for i, v in enumerate(variables)}, bits)
        letters = rng.integers(0, 8, size=(batch, len(variables), width), dtype=np.int64)
        timings = {}
        results = {}
        for backend in ("numpy", "numba"):
            if backend == "numba" and not _kernels.HAVE_NUMBA:
                continue
            fn = getattr(_kernels, f"{backend}_eval_batch")
            t0 = time.perf_counter()
            fn(ops, letters[:2], stab, width)
            warm = time.perf_counter() - t0
            timings[backend] = _time(lambda: fn(ops, letters, stab, width), repeat)
            results[backend] = fn(ops, letters, stab, width)
            timings[backend + "_warmup"] = warm
        if len(results) == 2:
            assert np.array_equal(results["numpy"], results["numba"]), name
        rows.append((name, ops.shape[0], timings))
    return rows


def bench_repair(repeat):
    """End-to-end repair: numpy only, numba forced on every batch, and the default routing."""
    inst = CnfInstance(5, ((-1, -2, 3), (1, 2, -4), (2, 4, 5), (-3, -5, 1)))
    k, f = reduce_3sat(inst)
    limits = (_kernels.NUMBA_MIN_WIDTH, _kernels.NUMBA_MIN_CELLS)
    out = {}
    for label, backend, forced in (("numpy", "numpy", False), ("numba", "numba", True), ("auto", "numba", False)):
        if backend == "numba" and not _kernels.HAVE_NUMBA:
            continue
        _kernels.use_backend(backend)
        if forced:
            _kernels.NUMBA_MIN_WIDTH = _kernels.NUMBA_MIN_CELLS = 0
        try:
            repair(k, f)
            out[label] = _time(lambda: repair(k, f), repeat)
        finally:
            _kernels.NUMBA_MIN_WIDTH, _kernels.NUMBA_MIN_CELLS = limits
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=20000)
    ap.add_argument("--width", type=int, default=24)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    print(f"numba available: {_kernels.HAVE_NUMBA}")
    print(f"{'body':<8} {'ops':>4} {'numpy s':>10} {'numba s':>10} {'speedup':>8} {'jit s':>8}")
    for name, m, t in bench_kernels(args.batch, args.width, args.repeat, rng):
        nb = t.get("numba")
        speed = f"{t['numpy'] / nb:8.1f}" if nb else "     n/a"
        print(f"{name:<8} {m:>4} {t['numpy']:>10.4f} {nb or float('nan'):>10.4f} {speed} "
              f"{t.get('numba_warmup', float('nan')):>8.3f}")
    rep = bench_repair(args.repeat)
    print("repair of a 5-variable 3SAT reduction: "
          + ", ".join(f"{b} {s:.3f}s" for b, s in rep.items()))


if __name__ == "__main__":
    main()
