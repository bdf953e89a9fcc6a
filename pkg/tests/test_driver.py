import random

import pytest

from mexec.driver import (
    SearchConfig, mark_infeasible, run_bva, run_coverage, run_path,
    sample_start, snap_to_zero,
)
from mexec.errors import MalformedPath
from mexec.interp import ExecutionTrace, coverage_config, execute
from mexec.lang import parse
from mexec.saturation import goal_reached, new_state, update_saturation
from mexec.cfg import build_cfg
from mexec.transforms import prepare


def small_cfg(seed=0, n_start=40, infeasible_after=3):
    return SearchConfig(n_start=n_start, seed=seed,
                        infeasible_after=infeasible_after)


def test_coverage_saturates_two_conditional_program(foo):
    result = run_coverage(foo, "FOO", small_cfg(seed=42))
    assert goal_reached(result.state)
    assert result.state.covered == result.graph.branches
    assert result.state.infeasible == frozenset()
    # one input per newly saturating run; three suffice here
    assert len(result.inputs) <= 4


def test_coverage_admitted_inputs_replay_to_zero(foo):
    # every admitted input was a root of the objective in force when it
    # was admitted; replay under an incrementally rebuilt state agrees
    result = run_coverage(foo, "FOO", small_cfg(seed=7))
    state = new_state(result.graph)
    for x in result.inputs:
        trace = execute(foo, x, coverage_config(), state, entry="FOO")
        assert trace.final_r == 0.0
        state = update_saturation(state, trace.covered_branches)


def test_coverage_probes_both_square_roots(foo):
    result = run_coverage(foo, "FOO", small_cfg(seed=42))
    xs = [x[0] for x in result.inputs]
    assert any(x > 1 for x in xs)
    assert any(x <= 1 for x in xs)


def test_coverage_marks_unreachable_equality_infeasible(foo_infeasible):
    result = run_coverage(foo_infeasible, "FOO", small_cfg(seed=5))
    assert (1, "T") in result.state.infeasible
    assert goal_reached(result.state)


def test_coverage_stops_early_once_saturated(foo):
    result = run_coverage(foo, "FOO", small_cfg(seed=42, n_start=500))
    assert result.starts_used < 20


def test_branch_free_program_returns_one_sample():
    program = prepare(parse("real f(real x) { return x * 2; }"))
    result = run_coverage(program, "f", small_cfg())
    assert len(result.inputs) == 1
    assert result.starts_used == 1


def test_kernel_cos_deems_tiny_branch_infeasible(k_cos):
    result = run_coverage(k_cos, "kernel_cos", SearchConfig(seed=42))
    assert result.state.infeasible == {(1, "F")}
    assert len(result.state.covered) == 7
    assert goal_reached(result.state)


def test_path_finds_root_of_first_target(foo):
    result = run_path(foo, "FOO", [(0, "T"), (1, "T")], small_cfg(seed=1))
    assert result.found is not None
    x = result.found[0]
    assert min(abs(x + 3.0), abs(x - 1.0)) <= 1e-4


def test_path_already_on_path_is_immediate(foo):
    result = run_path(foo, "FOO", [(0, "T"), (1, "F")], small_cfg(seed=2))
    assert result.found is not None
    assert result.starts_used == 1


def test_path_through_false_side_finds_two(foo):
    result = run_path(foo, "FOO", [(0, "F"), (1, "T")], small_cfg(seed=3))
    assert result.found is not None
    assert result.found[0] == pytest.approx(2.0, abs=1e-4)


def test_path_rejects_bad_branch_ids(foo):
    with pytest.raises(MalformedPath):
        run_path(foo, "FOO", [(9, "T")], small_cfg())
    with pytest.raises(MalformedPath):
        run_path(foo, "FOO", [(0, "X")], small_cfg())


def test_bva_collects_boundary_inputs(foo):
    roots = set()
    for seed in range(8):
        result = run_bva(foo, "FOO", small_cfg(seed=seed, n_start=4))
        for x in result.inputs:
            for root in (-3.0, 1.0, 2.0):
                if abs(x[0] - root) <= 1e-4:
                    roots.add(root)
    assert roots == {-3.0, 1.0, 2.0}


def test_bva_trivial_boundary_admits_anything():
    program = prepare(parse(
        "real f(real x) { if (x == x) { return 1; } return 0; }"))
    result = run_bva(program, "f", small_cfg(n_start=2))
    assert result.inputs


def test_bva_underflow_residual_is_not_a_root():
    # the boundary sits at 1e-20; at x = 0 the squared distance is
    # 1e-40, positive, so 0 must not be admitted as a boundary input
    program = prepare(parse(
        "real f(real x) { if (x == 0.00000000000000000001) "
        "{ return 1; } return 0; }"))
    from mexec.interp import bva_config
    trace = execute(program, [0.0], bva_config(), entry="f")
    assert trace.final_r == 1e-40
    result = run_bva(program, "f", small_cfg(seed=0, n_start=4))
    for x in result.inputs:
        assert x[0] == 1e-20


def test_mark_infeasible_requires_failed_trace(foo):
    graph = build_cfg(foo, "FOO")
    state = new_state(graph)
    ok = ExecutionTrace(path=[(0, "T")], final_r=0.0)
    assert mark_infeasible(state, ok) is state


def test_mark_infeasible_flips_last_taken_branch(foo):
    graph = build_cfg(foo, "FOO")
    state = new_state(graph)
    failed = ExecutionTrace(path=[(0, "T"), (1, "F")], final_r=2.5)
    marked = mark_infeasible(state, failed)
    assert marked.infeasible == {(1, "T")}


def test_mark_infeasible_skips_covered_opposite(foo):
    graph = build_cfg(foo, "FOO")
    state = update_saturation(new_state(graph), [(1, "T")])
    failed = ExecutionTrace(path=[(0, "T"), (1, "F")], final_r=2.5)
    assert mark_infeasible(state, failed) is state


def test_sample_start_stays_in_box():
    rng = random.Random(0)
    box = [(-10.0, 10.0), (0.0, 1.0)]
    for _ in range(2000):
        x = sample_start(rng, box)
        for xi, (lo, hi) in zip(x, box):
            assert lo <= xi <= hi


def test_snap_to_zero_polishes_near_roots():
    def f(x):
        return (x[0] - 2.0) ** 2

    snapped = snap_to_zero(f, [1.9999999823], [(-1000.0, 1000.0)])
    assert snapped == [2.0]


def test_snap_to_zero_returns_none_without_root():
    def f(x):
        return x[0] ** 2 + 1.0

    assert snap_to_zero(f, [0.3], [(-1000.0, 1000.0)]) is None


def test_coverage_determinism(foo):
    a = run_coverage(foo, "FOO", small_cfg(seed=9))
    b = run_coverage(foo, "FOO", small_cfg(seed=9))
    assert a.inputs == b.inputs
    assert a.state.covered == b.state.covered
    assert a.eval_count == b.eval_count
