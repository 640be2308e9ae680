"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line (with timing) that is printed in the
pytest terminal summary; the assertion itself is never softened.
"""

import random
import time
from collections import Counter
from pathlib import Path

import pytest

import sweep
import test_semantics as sem
from gen import random_acyclic, random_formula, random_general, random_tree
from hyrep import edas
from hyrep.cli import main
from hyrep.errors import StrategyMismatch
from hyrep.formula import Quantifier, classify_fragment, parse_formula
from hyrep.kripke import (
    FrameShape,
    KripkeStructure,
    RepairCandidate,
    apply_repair,
    classify_frame,
    load_structure,
)
from hyrep.reductions import (
    CnfInstance,
    QbfInstance,
    assignment_witness,
    reduce_3sat,
    reduce_horn,
    reduce_qbf,
    solve_3sat_brute,
    solve_horn_brute,
    solve_qbf_brute,
)
from hyrep.repair import Verdict, repair, repair_brute
from hyrep.semantics import LassoBounds, model_check

DATA = Path(__file__).parent / "data"
E, A = Quantifier.EXISTS, Quantifier.FORALL
CNF_SAMPLE = CnfInstance(4, ((-1, -2, 3), (1, 2, -4)))
QBF_SAMPLE = QbfInstance(((E, (1,)), (A, (2,)), (E, (3,))), ((1, -2, 3), (-1, 2, -3)))
SPECIALIZED = ("mc-only", "single-trace", "exist-enum", "marking")


def _run(criterion, number, body):
    start = time.perf_counter()
    try:
        detail = body()
    except AssertionError as exc:
        criterion(number, False, f"{time.perf_counter() - start:.2f}s  {exc}")
        raise
    criterion(number, True, f"{time.perf_counter() - start:.2f}s  {detail}")


def test_criterion_1_edas(criterion, capsys):
    def body():
        start = time.perf_counter()
        code = main(["demo-edas", "--pretty"])
        elapsed = time.perf_counter() - start
        out = capsys.readouterr().out
        assert code == 0, out
        assert "Before repair: violated" in out and "After repair: satisfied" in out
        k = edas.sketch()
        res = repair(k, edas.FORMULA)
        rows = {r["paper"]: (r["status"], r["session"]) for r in edas.output_table(apply_repair(k, res.witness))}
        assert rows == {"foo1": ("Accept", "Yes"), "bar1": ("Reject", "No"),
                        "foo2": ("Pending", "No"), "bar2": ("Pending", "No")}, rows
        assert elapsed < 1.0, f"demo took {elapsed:.2f}s"
        return f"demo {elapsed:.3f}s, table matches"

    _run(criterion, 1, body)


@pytest.mark.slow
def test_criterion_2_round_trips(criterion):
    def body():
        counts = {}
        start = time.perf_counter()
        for name, instances, reduce, solve in (
            ("horn", sweep.horn_instances(4, 3), reduce_horn, solve_horn_brute),
            ("3sat", sweep.cnf_instances(4, 3), reduce_3sat, solve_3sat_brute),
            ("qbf", map(sweep.with_leading_exists, sweep.qbf_instances(3, 3, 2)), reduce_qbf, solve_qbf_brute),
        ):
            n = bad = 0
            for inst in instances:
                k, f = reduce(inst)
                n += 1
                if repair(k, f).repairable != solve(inst):
                    bad += 1
            assert bad == 0, f"{name}: {bad} mismatches"
            counts[name] = n
        elapsed = time.perf_counter() - start
        assert elapsed < 300, f"sweep took {elapsed:.0f}s"
        return ", ".join(f"{k} {v} classes" for k, v in counts.items()) + f", {elapsed:.0f}s total"

    _run(criterion, 2, body)


def _agreement(k, f):
    """Disagreements between brute and every applicable specialized strategy."""
    truth = repair_brute(k, f)
    ran, problems = [], []
    for name in SPECIALIZED:
        try:
            res = repair(k, f, strategy=name)
        except StrategyMismatch:
            continue
        ran.append(name)
        if res.verdict is not truth.verdict:
            problems.append((name, k, f))
        if res.repairable and not model_check(apply_repair(k, res.witness), f):
            problems.append((name, "witness", k, f))
    return ran, problems


def test_criterion_3_strategy_agreement(criterion):
    def body():
        rng = random.Random(2024)
        ran = Counter()
        structures = 0
        problems = []
        prefixes = ["E", "EE", "A", "AA", "EA", "EAA", "EEA", "AE", "AEE", "AAE", "EAE"]
        for i in range(800):
            if i < 500:
                k = random_tree(rng, rng.randint(1, 8))
            else:
                k = random_acyclic(rng, rng.randint(1, 7))
            f = random_formula(rng, 3, depth=2, prefix=rng.choice(prefixes))
            names, bad = _agreement(k, f)
            ran.update(names)
            structures += 1
            problems += bad
        assert not problems, problems[:3]
        assert set(ran) == set(SPECIALIZED), ran
        runs = ", ".join(f"{name} {ran[name]}" for name in SPECIALIZED)
        return f"{structures} structures ({runs}), 0 disagreements"

    _run(criterion, 3, body)


@pytest.mark.slow
def test_criterion_4_semantics(criterion):
    def body():
        for suite in (sem.test_quantifier_duality, sem.test_shift_coherence, sem.test_periodicity,
                      sem.test_body_matches_naive, sem.test_sentence_matches_naive):
            suite()
        sem.test_structures_match_naive()
        return "duality, shift, periodicity, naive-body, naive-sentence x1000; 1500 structures"

    _run(criterion, 4, body)


def test_criterion_5_classification(criterion):
    def body():
        assert classify_frame(load_structure(DATA / "sample_dag.json")) is FrameShape.ACYCLIC
        from test_reductions import HORN_SAMPLE
        assert classify_frame(reduce_horn(HORN_SAMPLE)[0]) is FrameShape.TREE
        assert classify_frame(reduce_3sat(CNF_SAMPLE)[0]) is FrameShape.TREE
        assert classify_frame(reduce_qbf(QBF_SAMPLE)[0]) is FrameShape.ACYCLIC
        gni = classify_fragment(parse_formula((DATA / "gni.hltl").read_text()))
        assert gni.alternations == 1 and gni.leading is A, gni
        return "sample DAG acyclic, Horn and 3SAT encodings tree, QBF encoding acyclic, GNI AE_k(1)"

    _run(criterion, 5, body)


def test_criterion_6_3sat_witness(criterion):
    def body():
        k, f = reduce_3sat(CNF_SAMPLE)
        res = repair(k, f, prefer="max")
        assert res.repairable
        kept = {(a, b) for a, b in res.witness.kept if a.endswith("_h")}
        lits = {(a, b): CNF_SAMPLE.clauses[int(a[1:].split("_")[0]) % 2][int(b.split("_l")[1].split("_")[0])]
                for a, b in k.transitions if a.endswith("_h")}
        matches = []
        for bits in range(16):
            val = {v: bool(bits >> (v - 1) & 1) for v in range(1, 5)}
            if {e for e, lit in lits.items() if val[abs(lit)] == (lit > 0)} == kept:
                matches.append(val)
        assert matches, "max repair is not the branch set of any assignment"
        reference = RepairCandidate(assignment_witness(k, CNF_SAMPLE, {1: True, 2: False, 3: False, 4: False}))
        assert model_check(apply_repair(k, reference), f)
        return f"max repair = assignment {matches[0]}; reference assignment re-verifies"

    _run(criterion, 6, body)


def test_criterion_7_general(criterion):
    def body():
        rng = random.Random(99)
        found = 0
        for _ in range(150):
            k = random_general(rng, rng.randint(2, 4))
            assert classify_frame(k) is FrameShape.GENERAL
            f = random_formula(rng, 2, depth=2)
            bounds = LassoBounds(rng.randint(0, 2), rng.randint(1, 3))
            res = repair(k, f, bounds=bounds)
            assert res.verdict is not Verdict.NOT_REPAIRABLE, (k, f)
            if res.repairable:
                found += 1
                assert model_check(apply_repair(k, res.witness), f, res.bounds), (k, f)
        two = KripkeStructure(("u", "v"), "u", (("u", "v"), ("v", "u")), {"u": frozenset("a")})
        res = repair(two, parse_formula("forall p. G F a[p]"), bounds=LassoBounds(0, 2))
        assert res.repairable and res.bounds == LassoBounds(0, 2)
        return f"150 general frames, {found} repairable re-verified, 2-cycle at loop 2"

    _run(criterion, 7, body)
