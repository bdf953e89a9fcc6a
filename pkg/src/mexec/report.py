"""Coverage reporting: four gcov-style metrics, a text table, and a
versioned JSON form that round-trips losslessly."""

import json
from dataclasses import dataclass, field, asdict
from typing import Optional

from .interp import call_sites, executable_lines

SCHEMA = "mexec/1"


@dataclass
class CoverageReport:
    mode: str = "cover"
    entry: str = ""
    line_pct: float = 0.0
    condition_pct: float = 0.0
    branch_pct: float = 0.0
    call_pct: Optional[float] = None    # None when no call sites exist
    covered_lines: int = 0
    total_lines: int = 0
    covered_conditionals: int = 0
    total_conditionals: int = 0
    covered_branches: int = 0
    total_branches: int = 0
    covered_calls: int = 0
    total_calls: int = 0
    uninstrumentable: int = 0
    branch_status: dict = field(default_factory=dict)   # "0T" -> status
    inputs: list = field(default_factory=list)
    starts_used: int = 0
    eval_count: int = 0
    wall_time: float = 0.0


def _branch_key(branch):
    return f"{branch[0]}{branch[1]}"


def _pct(num, den):
    return 100.0 * num / den if den else 0.0


def coverage_report(result, program, entry="", uninstrumentable=0):
    """Aggregate a search result's traces into the four coverage metrics."""
    graph = result.graph
    lines = set()
    conditionals = set()
    branches = set()
    calls = set()
    for trace in result.traces:
        lines |= trace.covered_lines
        conditionals |= trace.covered_conditionals
        branches |= trace.covered_branches
        calls |= trace.covered_calls

    state = result.state
    if state is not None:
        branches = set(state.covered)
        infeasible = set(state.infeasible)
        saturated = set(state.explored)
    else:
        infeasible = set()
        saturated = set()

    total_lines = executable_lines(program)
    total_calls = call_sites(program)
    labels = sorted(graph.labels) if graph is not None else []
    total_branches = 2 * len(labels)

    status = {}
    for label in labels:
        for side in ("T", "F"):
            b = (label, side)
            if b in branches:
                status[_branch_key(b)] = ("saturated" if b in saturated
                                          else "covered")
            elif b in infeasible:
                status[_branch_key(b)] = "infeasible"
            else:
                status[_branch_key(b)] = "uncovered"

    return CoverageReport(
        mode=result.mode,
        entry=entry,
        line_pct=_pct(len(lines), len(total_lines)),
        condition_pct=_pct(len(conditionals), len(labels)),
        branch_pct=_pct(len(branches), total_branches),
        call_pct=_pct(len(calls), len(total_calls)) if total_calls else None,
        covered_lines=len(lines),
        total_lines=len(total_lines),
        covered_conditionals=len(conditionals),
        total_conditionals=len(labels),
        covered_branches=len(branches),
        total_branches=total_branches,
        covered_calls=len(calls),
        total_calls=len(total_calls),
        uninstrumentable=uninstrumentable,
        branch_status=status,
        inputs=[list(x) for x in result.inputs],
        starts_used=result.starts_used,
        eval_count=result.eval_count,
        wall_time=result.wall_time,
    )


def to_json(report):
    payload = {"schema": SCHEMA}
    payload.update(asdict(report))
    return json.dumps(payload, indent=2, sort_keys=True)


def from_json(text):
    payload = json.loads(text)
    if payload.pop("schema", None) != SCHEMA:
        raise ValueError("unrecognized report schema")
    return CoverageReport(**payload)


def _fmt_pct(value):
    return "n/a" if value is None else f"{value:.2f}%"


def format_text(report):
    rows = [
        ("Lines executed", _fmt_pct(report.line_pct),
         f"{report.covered_lines} of {report.total_lines}"),
        ("Conditions executed", _fmt_pct(report.condition_pct),
         f"{report.covered_conditionals} of {report.total_conditionals}"),
        ("Branches taken", _fmt_pct(report.branch_pct),
         f"{report.covered_branches} of {report.total_branches}"),
        ("Calls executed", _fmt_pct(report.call_pct),
         f"{report.covered_calls} of {report.total_calls}"),
    ]
    out = [f"entry {report.entry or '?'} ({report.mode} mode)"]
    for name, pct, detail in rows:
        out.append(f"  {name:<22} {pct:>8}  ({detail})")
    if report.uninstrumentable:
        out.append(f"  ignored conditionals   {report.uninstrumentable} "
                   "(pointer comparisons)")
    infeasible = [k for k, v in report.branch_status.items()
                  if v == "infeasible"]
    if infeasible:
        out.append(f"  deemed infeasible      {', '.join(sorted(infeasible))}")
    uncovered = [k for k, v in report.branch_status.items()
                 if v == "uncovered"]
    if uncovered:
        out.append(f"  not taken              {', '.join(sorted(uncovered))}")
    out.append(f"  test inputs            {len(report.inputs)}")
    out.append(f"  wall time              {report.wall_time:.3f}s")
    return "\n".join(out)
