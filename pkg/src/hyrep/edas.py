"""Built-in conference-manager sketch: a session display that leaks decisions.

Each submitted paper is one branch below the root.  The branch state
carries the internal decisions (``ntf``, ``dec``, ``ses``); its children
are the possible outputs.  The session display is a hole: a paper that is
scheduled may show ``Yes`` or ``No``, an unscheduled one only ``No``.
Repair resolves the hole by pruning output edges.
"""

from __future__ import annotations

from dataclasses import dataclass

from .formula import parse_formula
from .kripke import KripkeStructure, validate

FORMULA_TEXT = (
    "forall p. forall q. "
    "G ((pending[p] & pending[q]) -> (sessionYes[p] <-> sessionYes[q]))"
)
FORMULA = parse_formula(FORMULA_TEXT)


@dataclass(frozen=True)
class Paper:
    name: str
    ntf: bool
    dec: bool
    ses: bool

    @property
    def status(self) -> str:
        if not self.ntf:
            return "Pending"
        return "Accept" if self.dec else "Reject"


PAPERS = (
    Paper("foo1", True, True, True),
    Paper("bar1", True, False, False),
    Paper("foo2", False, False, False),
    Paper("bar2", False, True, True),
)


def _names(p: Paper) -> tuple:
    # "init" < "out_" < "paper_" keeps the root edges first in transition order
    return f"paper_{p.name}", f"out_{p.name}_yes", f"out_{p.name}_no"


def sketch() -> KripkeStructure:
    states = ["init"]
    labels = {"init": set()}
    trans = []
    for p in PAPERS:
        row, yes, no = _names(p)
        labels[row] = {name for name, on in (("ntf", p.ntf), ("dec", p.dec), ("ses", p.ses)) if on}
        status = p.status.lower()
        states.append(row)
        trans.append(("init", row))
        outs = [(yes, {status, "sessionYes"}), (no, {status})] if p.ses else [(no, {status})]
        for s, lab in outs:
            states.append(s)
            labels[s] = lab
            trans += [(row, s), (s, s)]
    k = KripkeStructure(tuple(states), "init", tuple(trans), labels)
    validate(k)
    return k


def output_table(k: KripkeStructure) -> list:
    """One row per paper still reachable: decisions, status and session display.

    Session reads ``Yes`` when the structure can still print ``Yes`` for that
    paper, matching the leaky implementation that follows ``ses``.
    """
    rows = []
    for p in PAPERS:
        row, yes, _ = _names(p)
        if ("init", row) not in k.edge_index:
            continue
        session = "Yes" if (row, yes) in k.edge_index else "No"
        rows.append({"paper": p.name, "ntf": p.ntf, "dec": p.dec, "ses": p.ses,
                     "status": p.status, "session": session})
    return rows


def render_table(rows: list) -> str:
    head = ("Paper", "ntf", "dec", "ses", "Status", "Session")
    body = [(r["paper"], str(r["ntf"]).lower(), str(r["dec"]).lower(), str(r["ses"]).lower(),
             r["status"], r["session"]) for r in rows]
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(x.ljust(w) for x, w in zip(line, widths)).rstrip() for line in [head, *body]]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
