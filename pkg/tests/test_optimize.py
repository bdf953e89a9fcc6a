import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from mexec.errors import InvalidBracket
from mexec.optimize import (
    LocalMinConfig, MCMCConfig, Objective, SENTINEL, basinhopping,
    bracket_minimum, brent_line_min, metropolis_accept, powell_minimize,
)


def test_objective_sanitizes_nan_and_inf():
    obj = Objective(lambda x: math.nan, 1)
    assert obj([0.0]) == SENTINEL
    obj = Objective(lambda x: math.inf, 1)
    assert obj([0.0]) == SENTINEL
    assert obj.eval_count == 1


def test_brent_quadratic():
    t, ft = brent_line_min(lambda t: (t - 1.0) ** 2, (-10.0, 0.0, 10.0))
    assert t == pytest.approx(1.0, abs=1e-6)
    assert ft == pytest.approx(0.0, abs=1e-12)


def test_brent_absolute_value():
    t, _ = brent_line_min(abs, (-3.0, -1.0, 5.0))
    assert t == pytest.approx(0.0, abs=1e-6)


def test_brent_reaches_zero_plateau():
    def g(t):
        return 0.0 if t <= 1.0 else (t - 1.0) ** 2 + 1e-6

    _, ft = brent_line_min(g, (-2.0, 0.0, 3.0))
    assert ft == 0.0


def test_brent_rejects_bad_bracket():
    with pytest.raises(InvalidBracket):
        brent_line_min(lambda t: t * t, (0.0, 5.0, 1.0))
    with pytest.raises(InvalidBracket):
        brent_line_min(lambda t: t, (0.0, 1.0, 2.0))


def test_bracket_minimum_brackets_a_quadratic():
    g = lambda t: (t - 7.0) ** 2
    lo, mid, hi = bracket_minimum(g)
    assert lo <= mid <= hi
    assert g(mid) <= g(lo) and g(mid) <= g(hi)
    assert lo <= 7.0 <= hi


def test_powell_1d_quadratic():
    x, fx = powell_minimize(Objective(lambda x: (x[0] - 1.0) ** 2, 1),
                            [10.0])
    assert x[0] == pytest.approx(1.0, abs=1e-6)
    assert fx == pytest.approx(0.0, abs=1e-12)


def test_powell_separable_quadratic():
    f = Objective(lambda x: x[0] ** 2 + 10.0 * x[1] ** 2, 2)
    x, fx = powell_minimize(f, [3.0, 3.0])
    assert x[0] == pytest.approx(0.0, abs=1e-5)
    assert x[1] == pytest.approx(0.0, abs=1e-5)


def test_powell_never_increases():
    def f(x):
        return math.sin(x[0]) + 0.01 * x[0] ** 2

    start = [17.0]
    x, fx = powell_minimize(Objective(f, 1), start)
    assert fx <= f(start)


def test_powell_piecewise_objective_reaches_a_root():
    # global structure of the two-sided square check: roots -3, 1, 2
    def f(x):
        v = x[0]
        return (((v + 1) ** 2 - 4) ** 2 if v <= 1.0
                else (v ** 2 - 4) ** 2)

    x, fx = powell_minimize(Objective(f, 1), [0.0])
    assert fx <= f([0.0])
    assert fx >= 0.0
    if fx < 1e-10:
        assert min(abs(x[0] + 3), abs(x[0] - 1), abs(x[0] - 2)) < 1e-4


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.data())
def test_powell_convex_quadratic_rounds(n, data):
    center = [data.draw(st.floats(-5, 5)) for _ in range(n)]
    scales = [data.draw(st.floats(0.5, 4.0)) for _ in range(n)]

    def f(x):
        return sum(s * (xi - c) ** 2
                   for s, xi, c in zip(scales, x, center))

    cfg = LocalMinConfig(max_rounds=n + 2)
    x, fx = powell_minimize(Objective(f, n), [10.0] * n, cfg)
    for xi, c in zip(x, center):
        assert xi == pytest.approx(c, abs=1e-5)


def test_basinhopping_escapes_local_basin():
    def f(x):
        v = x[0]
        return (((v + 1) ** 2 - 4) ** 2 if v <= 1.0
                else (v ** 2 - 4) ** 2)

    rng = random.Random(0)
    found = False
    for attempt in range(20):
        x0 = [rng.uniform(-500.0, 500.0)]
        x, fx = basinhopping(
            Objective(f, 1), x0,
            MCMCConfig(n_iter=5, step_scale=50.0,
                       box=[(-1000.0, 1000.0)]), rng)
        if fx < 1e-9:
            found = True
            break
    assert found
    assert min(abs(x[0] + 3), abs(x[0] - 1), abs(x[0] - 2)) < 1e-3


def test_basinhopping_constant_objective_accepts_proposals():
    f = Objective(lambda x: 1.0, 1)
    x, fx = basinhopping(f, [5.0], MCMCConfig(n_iter=5),
                         random.Random(1))
    assert fx == 1.0


def test_basinhopping_zero_iterations_equals_powell():
    f1 = Objective(lambda x: (x[0] - 1.0) ** 2, 1)
    f2 = Objective(lambda x: (x[0] - 1.0) ** 2, 1)
    bh_x, bh_f = basinhopping(f1, [10.0], MCMCConfig(n_iter=0),
                              random.Random(0))
    pw_x, pw_f = powell_minimize(f2, [10.0])
    assert bh_x == pw_x and bh_f == pw_f


def test_basinhopping_result_never_worse_than_start():
    f = Objective(lambda x: math.cos(x[0]) + 0.001 * x[0] ** 2, 1)
    x0 = [200.0]
    f_at_start = math.cos(200.0) + 0.001 * 200.0 ** 2
    _, fx = basinhopping(f, x0, MCMCConfig(n_iter=3), random.Random(2))
    assert fx <= f_at_start


def test_basinhopping_callback_can_stop_early():
    calls = []

    def callback(iteration, x, fx):
        calls.append(iteration)
        return True

    f = Objective(lambda x: x[0] ** 2, 1)
    basinhopping(f, [3.0], MCMCConfig(n_iter=50), random.Random(0),
                 callback)
    assert calls == [0]


def test_seed_determinism():
    def make():
        return Objective(lambda x: math.sin(3 * x[0]) + 0.01 * x[0] ** 2, 1)

    a = basinhopping(make(), [7.0], MCMCConfig(n_iter=5), random.Random(42))
    b = basinhopping(make(), [7.0], MCMCConfig(n_iter=5), random.Random(42))
    assert a == b


def test_metropolis_always_accepts_downhill():
    rng = random.Random(0)
    for _ in range(100):
        assert metropolis_accept(5.0, 1.0, 1.0, rng)


def test_metropolis_accepts_equal_values():
    rng = random.Random(0)
    for _ in range(100):
        assert metropolis_accept(1.0, 1.0, 1.0, rng)


def test_metropolis_ln2_gap_accepts_half_the_time():
    rng = random.Random(12345)
    gap = math.log(2.0)
    accepted = sum(metropolis_accept(1.0, 1.0 + gap, 1.0, rng)
                   for _ in range(10_000))
    assert accepted / 10_000 == pytest.approx(0.5, abs=0.05)


def test_metropolis_huge_gap_never_accepts():
    rng = random.Random(0)
    assert not any(metropolis_accept(0.0, 1e6, 1.0, rng)
                   for _ in range(1000))
