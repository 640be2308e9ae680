"""Command-line front end: ``hyrep classify|check|repair|reduce|demo-edas``.

Every command prints a JSON report (stable key order) or, with
``--pretty``, a short human-readable summary.  Exit codes: 0 satisfied or
repairable, 1 violated or not repairable, 2 inconclusive within lasso
bounds, 3 usage, parse or validation errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from . import edas
from .errors import HyrepError
from .formula import HyperFormula, classify_fragment, format_formula, parse_formula
from .instances import read_dimacs, read_horn, read_qdimacs
from .kripke import (
    FrameShape,
    KripkeStructure,
    apply_repair,
    classify_frame,
    dump_structure,
    load_structure,
    structure_to_dict,
    to_dot,
)
from .reductions import reduce_3sat, reduce_horn, reduce_qbf, reduce_reachability
from .repair import Verdict, repair
from .semantics import LassoBounds, check, default_bounds

EXIT_OK, EXIT_FAIL, EXIT_BOUNDED, EXIT_USAGE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load(args) -> tuple:
    k = load_structure(args.structure, normalize_terminals=args.add_terminal_loops)
    f = parse_formula(Path(args.formula).read_text(encoding="utf-8"))
    inputs = {"structure": {"path": str(args.structure), "sha256": _digest(args.structure)},
              "formula": {"path": str(args.formula), "sha256": _digest(args.formula)}}
    return k, f, inputs


def _classification(k: KripkeStructure, f: HyperFormula) -> dict:
    frag = classify_fragment(f)
    return {
        "frame": classify_frame(k).value,
        "fragment": {"tag": frag.tag.value, "family": frag.family, "alternations": frag.alternations,
                     "leading": frag.leading.value, "prefix": frag.prefix},
    }


def _bounds(args, k, f) -> LassoBounds | None:
    if classify_frame(k) is not FrameShape.GENERAL:
        return None
    base = default_bounds(k, f)
    return LassoBounds(args.stem_bound if args.stem_bound is not None else base.stem,
                       args.loop_bound if args.loop_bound is not None else base.loop)


def _write_dot(args, k, removed=()):
    if getattr(args, "dot", None):
        Path(args.dot).write_text(to_dot(k, removed), encoding="utf-8")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_classify(args) -> tuple:
    k, f, inputs = _load(args)
    report = {"command": "classify", "inputs": inputs, **_classification(k, f)}
    _write_dot(args, k)
    return report, classification_line(report), EXIT_OK


def classification_line(report: dict) -> str:
    """``tree / AE_k(1) with prefix ∀∀∃``; alternation-free prefixes show their tag."""
    frag = report["fragment"]
    name = frag["tag"] if frag["alternations"] == 0 else frag["family"]
    symbols = frag["prefix"].replace("A", "∀").replace("E", "∃")
    return f"{report['frame']} / {name} with prefix {symbols}"


def cmd_check(args) -> tuple:
    k, f, inputs = _load(args)
    res = check(k, f, _bounds(args, k, f))
    if res.holds:
        verdict, code = "satisfied", EXIT_OK
    elif res.bounded:
        verdict, code = "bounded-unknown", EXIT_BOUNDED
    else:
        verdict, code = "violated", EXIT_FAIL
    report = {"command": "check", "inputs": inputs, **_classification(k, f), "verdict": verdict,
              "bounded": res.bounded, "traces": res.trace_count,
              "bounds": res.bounds.as_dict() if res.bounds else None}
    _write_dot(args, k)
    text = verdict + (f" (lasso bounds stem={res.bounds.stem}, loop={res.bounds.loop})" if res.bounded else "")
    return report, text, code


def _repair_report(k, f, res) -> dict:
    witness = None
    if res.witness is not None:
        witness = {"kept": [list(t) for t in sorted(res.witness.kept)],
                   "removed": [list(t) for t in res.witness.removed(k)]}
    return {"verdict": res.verdict.value, "strategy": res.strategy.value, "witness": witness,
            "certificate": res.certificate, "bounds": res.bounds.as_dict() if res.bounds else None}


_VERDICT_CODE = {Verdict.REPAIRABLE: EXIT_OK, Verdict.NOT_REPAIRABLE: EXIT_FAIL,
                 Verdict.BOUNDED_UNKNOWN: EXIT_BOUNDED}


def cmd_repair(args) -> tuple:
    k, f, inputs = _load(args)
    res = repair(k, f, prefer=args.prefer, strategy=args.strategy, bounds=_bounds(args, k, f))
    report = {"command": "repair", "inputs": inputs, "prefer": args.prefer,
              **_classification(k, f), **_repair_report(k, f, res)}
    removed = res.witness.removed(k) if res.witness else ()
    if res.witness is not None and args.out:
        dump_structure(apply_repair(k, res.witness), args.out)
        report["output"] = str(args.out)
    _write_dot(args, k, removed)
    text = f"{res.verdict} via {res.strategy}"
    if removed:
        text += "; removed " + ", ".join(f"{a}->{b}" for a, b in removed)
    return report, text, _VERDICT_CODE[res.verdict]


def cmd_reduce(args) -> tuple:
    path = Path(args.instance)
    stats: dict = {}
    formulas = {}
    if args.kind == "horn":
        inst = read_horn(path)
        k, f = reduce_horn(inst, max_width=args.max_width)
        stats = {"variables": len(inst.variables), "clauses": len(inst.clauses)}
    elif args.kind == "3sat":
        inst = read_dimacs(path)
        k, f = reduce_3sat(inst)
        stats = {"variables": inst.variables, "clauses": len(inst.clauses)}
    elif args.kind == "qbf":
        inst = read_qdimacs(path)
        k, f = reduce_qbf(inst)
        stats = {"variables": len(inst.variables), "clauses": len(inst.clauses), "blocks": len(inst.blocks)}
    else:
        data = json.loads(path.read_text(encoding="utf-8"))
        k, f_exists, f_forall = reduce_reachability(data["vertices"], data["edges"], data["s"], data["t"])
        f = f_forall if args.variant == "forall" else f_exists
        formulas = {"exists": format_formula(f_exists), "forall": format_formula(f_forall)}
        stats = {"vertices": len(data["vertices"]), "edges": len(data["edges"])}
    stats.update(states=len(k.states), transitions=len(k.transitions))
    if args.out_structure:
        dump_structure(k, args.out_structure)
    if args.out_formula:
        Path(args.out_formula).write_text(format_formula(f) + "\n", encoding="utf-8")
    report = {"command": "reduce", "kind": args.kind,
              "inputs": {"instance": {"path": str(path), "sha256": _digest(path)}},
              "statistics": stats, **_classification(k, f), "formula": format_formula(f)}
    if formulas:
        report["formulas"] = formulas
    if not args.out_structure:
        report["structure"] = structure_to_dict(k)
    text = f"{args.kind}: {stats['states']} states, {stats['transitions']} transitions, " \
           + classification_line(report)
    return report, text, EXIT_OK


def cmd_demo_edas(args) -> tuple:
    k = edas.sketch()
    before = check(k, edas.FORMULA).holds
    report = {"command": "demo-edas", "formula": edas.FORMULA_TEXT, "before": {
        "satisfied": before, "table": edas.output_table(k)}}
    lines = ["Before repair: " + ("satisfied" if before else "violated"), edas.render_table(edas.output_table(k))]
    if args.no_repair:
        return report, "\n".join(lines), EXIT_OK if before else EXIT_FAIL
    res = repair(k, edas.FORMULA, prefer=args.prefer)
    report["repair"] = _repair_report(k, edas.FORMULA, res)
    code = _VERDICT_CODE[res.verdict]
    if res.witness is not None:
        fixed = apply_repair(k, res.witness)
        after = check(fixed, edas.FORMULA).holds
        report["after"] = {"satisfied": after, "table": edas.output_table(fixed)}
        lines += ["", f"Repair ({res.strategy}) removes: "
                  + ", ".join(f"{a}->{b}" for a, b in res.witness.removed(k)),
                  "After repair: " + ("satisfied" if after else "violated"),
                  edas.render_table(edas.output_table(fixed))]
        code = EXIT_OK if after else EXIT_FAIL
        _write_dot(args, k, res.witness.removed(k))
    return report, "\n".join(lines), code


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyrep", description="Repair Kripke structures against HyperLTL sentences.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, bounds=False):
        p.add_argument("structure", help="structure JSON file")
        p.add_argument("formula", help="formula text file")
        p.add_argument("--add-terminal-loops", action="store_true",
                       help="give states without successors a self-loop instead of rejecting them")
        p.add_argument("--dot", metavar="PATH", help="also write the structure as Graphviz DOT")
        p.add_argument("--pretty", action="store_true", help="human-readable output instead of JSON")
        if bounds:
            p.add_argument("--stem-bound", type=int, help="lasso stem bound for general frames")
            p.add_argument("--loop-bound", type=int, help="lasso loop bound for general frames")

    p = sub.add_parser("classify", help="frame shape and formula fragment")
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("check", help="model check a structure")
    common(p, bounds=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("repair", help="search for a repair by transition pruning")
    common(p, bounds=True)
    p.add_argument("--strategy", default="auto",
                   choices=["auto", "brute", "marking", "single-trace", "exist-enum", "mc-only",
                            "guess-check", "bounded"])
    p.add_argument("--prefer", default="max", choices=["max", "min", "any"])
    p.add_argument("--out", metavar="PATH", help="write the repaired structure here")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("reduce", help="generate a structure and formula from a problem instance")
    p.add_argument("kind", choices=["horn", "3sat", "qbf", "reach"])
    p.add_argument("instance", help="Horn lines, DIMACS, QDIMACS, or reachability JSON")
    p.add_argument("--out-structure", metavar="PATH")
    p.add_argument("--out-formula", metavar="PATH")
    p.add_argument("--variant", choices=["exists", "forall"], default="forall",
                   help="formula written for reachability instances")
    p.add_argument("--max-width", type=int, default=16, help="bit width limit for Horn variable codes")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("demo-edas", help="the conference-manager session leak, before and after repair")
    p.add_argument("--no-repair", action="store_true", help="only check the sketch")
    p.add_argument("--prefer", default="max", choices=["max", "min", "any"])
    p.add_argument("--dot", metavar="PATH")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_demo_edas)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        report, text, code = args.func(args)
    except (HyrepError, OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"hyrep: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report["wall_time"] = round(time.perf_counter() - start, 6)
    report["exit_code"] = code
    if args.pretty:
        print(text)
    else:
        print(json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
