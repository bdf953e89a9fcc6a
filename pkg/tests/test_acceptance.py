"""End-to-end acceptance checks.

Each test records one PASS/FAIL line (echoed after the pytest summary)
and asserts the same condition.
"""

import math
import random
import time

from mexec.cfg import build_cfg
from mexec.distance import COMPARATORS, branch_distance, compare
from mexec.driver import SearchConfig, run_bva, run_coverage, run_path
from mexec.interp import coverage_config, execute
from mexec.optimize import metropolis_accept
from mexec.report import coverage_report
from mexec.satcheck import check_sat, parse_constraint
from mexec.saturation import goal_reached, new_state, update_saturation

from conftest import ACCEPTANCE_LINES, load


def _emit(num, ok, detail):
    verdict = "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES.append(f"criterion {num:>2}: {verdict} ({detail})")
    assert ok, f"criterion {num}: {detail}"


def _state(program, entry, covered):
    return update_saturation(new_state(build_cfg(program, entry)), covered)


def test_criterion_1_two_conditional_saturation_and_shapes():
    program = load("foo.mx")
    started = time.perf_counter()
    result = run_coverage(program, "FOO", SearchConfig(seed=42))
    elapsed = time.perf_counter() - started

    def value_at(covered, x):
        return execute(program, [x], coverage_config(),
                       _state(program, "FOO", covered), entry="FOO").final_r

    fresh_ok = all(value_at([], x) == 0.0 for x in (-5.2, 0.7, 1.0, 1.1))
    row2 = value_at([(1, "F")], 0.7)
    row3 = value_at([(0, "T"), (1, "T"), (1, "F")], 0.5)
    full = [(0, "T"), (0, "F"), (1, "T"), (1, "F")]
    row4_ok = all(value_at(full, x) == 1.0 for x in (-5.2, 0.7, 1.0, 1.1))

    ok = (goal_reached(result.state)
          and len(result.state.covered) == 4
          and result.starts_used <= 10
          and elapsed < 5.0
          and fresh_ok
          and abs(row2 - 1.2321) <= 1e-9
          and abs(row3 - 0.250001) <= 1e-9
          and row4_ok)
    _emit(1, ok,
          f"saturated in {result.starts_used} starts, {elapsed:.2f}s; "
          f"probes {row2:.6f} / {row3:.6f}")


def test_criterion_2_cosine_kernel_coverage():
    program = load("k_cos.mx")
    started = time.perf_counter()
    result = run_coverage(program, "kernel_cos", SearchConfig(seed=42))
    elapsed = time.perf_counter() - started
    report = coverage_report(result, program, "kernel_cos")
    ok = (report.line_pct == 100.0
          and report.branch_pct == 87.5
          and result.state.infeasible == {(1, "F")}
          and elapsed < 60.0)
    _emit(2, ok,
          f"line {report.line_pct:.1f}%, branch {report.branch_pct:.1f}%, "
          f"infeasible {sorted(result.state.infeasible)}, {elapsed:.2f}s")


def test_criterion_3_path_reachability():
    program = load("foo.mx")
    result = run_path(program, "FOO", [(0, "T"), (1, "T")],
                      SearchConfig(seed=1))
    ok = result.found is not None
    x = result.found[0] if ok else math.nan
    if ok:
        ok = min(abs(x + 3.0), abs(x - 1.0)) <= 1e-4
        trace = result.traces[0]
        ok = ok and trace.final_r == 0.0
        ok = ok and trace.path[:2] == [(0, "T"), (1, "T")]
    _emit(3, ok, f"input {x!r}")


def test_criterion_4_boundary_values():
    program = load("foo.mx")
    hits = set()
    for seed in range(20):
        result = run_bva(program, "FOO",
                         SearchConfig(seed=seed, n_start=5))
        for x in result.inputs:
            for root in (-3.0, 1.0, 2.0):
                if abs(x[0] - root) <= 1e-4:
                    hits.add(root)
    ok = hits == {-3.0, 1.0, 2.0}
    _emit(4, ok, f"boundaries found {sorted(hits)}")


def test_criterion_5_satisfiability():
    started = time.perf_counter()
    sat = check_sat(parse_constraint("2 ^ x <= 5 && x * x >= 5 && x >= 0"),
                    SearchConfig(seed=11, n_start=100))
    elapsed = time.perf_counter() - started
    unknown = check_sat(parse_constraint("x == x + 1"),
                        SearchConfig(seed=0, n_start=3))
    lo = math.sqrt(5.0) - 1e-6
    hi = math.log2(5.0) + 1e-6
    ok = (sat.verdict == "sat"
          and lo <= sat.model[0] <= hi
          and elapsed < 5.0
          and unknown.verdict == "unknown"
          and unknown.residual == 1.0)
    model = sat.model[0] if sat.model else math.nan
    _emit(5, ok, f"model {model!r} in [{lo:.7f}, {hi:.7f}], "
                 f"offset residual {unknown.residual!r}, {elapsed:.2f}s")


def test_criterion_6_distance_laws_bulk():
    rng = random.Random(606)
    failures = 0
    for i in range(100_000):
        op = rng.choice(COMPARATORS)
        a = rng.uniform(-1e6, 1e6)
        b = a if i % 10 == 0 else rng.uniform(-1e6, 1e6)
        d = branch_distance(op, a, b)
        if d < 0.0:
            failures += 1
        elif (d == 0.0) != compare(op, a, b):
            failures += 1
        elif branch_distance(">=", a, b) != branch_distance("<=", b, a):
            failures += 1
        elif branch_distance(">", a, b) != branch_distance("<", b, a):
            failures += 1
    _emit(6, failures == 0, f"{failures} violations in 100000 triples")


def test_criterion_7_root_iff_saturation_grows():
    program = load("foo.mx")
    graph = build_cfg(program, "FOO")
    branches = sorted(graph.branches)
    grid = [-10.0 + 20.0 * i / 9999 for i in range(10_000)]
    counterexamples = 0
    subsets = []
    for mask in range(16):
        subsets.append([b for i, b in enumerate(branches) if mask >> i & 1])
    for subset in subsets:
        state = update_saturation(new_state(graph), subset)
        for x in grid:
            trace = execute(program, [x], coverage_config(), state,
                            entry="FOO")
            grown = update_saturation(state, trace.covered_branches)
            if (trace.final_r == 0.0) != (grown.explored > state.explored):
                counterexamples += 1
    _emit(7, counterexamples == 0,
          f"{counterexamples} counterexamples over 16 subsets x 10000 inputs")


def test_criterion_8_metropolis_acceptance():
    rng = random.Random(808)
    gap = math.log(2.0)
    accepted = sum(metropolis_accept(1.0, 1.0 + gap, 1.0, rng)
                   for _ in range(10_000))
    rate = accepted / 10_000
    ok = abs(rate - 0.5) <= 0.05
    _emit(8, ok, f"acceptance rate {rate:.4f} for a ln 2 gap")


def test_criterion_9_saturated_minimum_is_one():
    program = load("foo.mx")
    full = [(0, "T"), (0, "F"), (1, "T"), (1, "F")]
    state = _state(program, "FOO", full)
    grid = [-10.0 + 20.0 * i / 9999 for i in range(10_000)]
    values = {execute(program, [x], coverage_config(), state,
                      entry="FOO").final_r for x in grid}
    ok = values == {1.0}
    _emit(9, ok, f"grid minimum {min(values)!r}, maximum {max(values)!r}")


CORPUS = (
    ("k_cos.mx", "kernel_cos"),
    ("ceil_like.mx", "ceil_like"),
    ("atan_like.mx", "atan_like"),
    ("expm1_like.mx", "expm1_like"),
    ("tanh_like.mx", "tanh_like"),
    ("log1p_like.mx", "log1p_like"),
    ("hypot_like.mx", "hypot_like"),
    ("cbrt_like.mx", "cbrt_like"),
)


def test_criterion_10_corpus_coverage():
    started = time.perf_counter()
    coverages = []
    for name, entry in CORPUS:
        program = load(name)
        result = run_coverage(program, entry, SearchConfig(seed=42))
        report = coverage_report(result, program, entry)
        coverages.append(report.branch_pct)
        ACCEPTANCE_LINES.append(
            f"  corpus {entry:<12} branch {report.branch_pct:6.2f}%  "
            f"line {report.line_pct:6.2f}%  starts "
            f"{result.starts_used:3d}  {result.wall_time:6.2f}s")
    elapsed = time.perf_counter() - started
    mean = sum(coverages) / len(coverages)
    ok = mean >= 85.0 and elapsed < 600.0 and len(CORPUS) >= 8
    _emit(10, ok, f"mean branch coverage {mean:.2f}% over "
                  f"{len(CORPUS)} functions, {elapsed:.1f}s total")
