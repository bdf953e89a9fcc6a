"""Derivative-free minimization: Brent line search, Powell's method, and
a Metropolis basinhopping loop on top.

All routines treat the objective as a black box that returns a finite
value or a large sentinel; none of them require derivatives, which
matters because representing functions are flat on large regions and
discontinuous at branch flips.
"""

import math
import random
from dataclasses import dataclass, field
from typing import Optional

from .errors import InvalidBracket

SENTINEL = 1e300

_GOLD = 1.618034
_CGOLD = 0.3819660
_TINY = 1e-21


class Objective:
    """Callable wrapper that counts evaluations and sanitizes outputs.

    NaN or infinite values from the raw function are mapped to a large
    finite sentinel so acceptance arithmetic stays well defined.
    """

    def __init__(self, fn, arity):
        self.fn = fn
        self.arity = arity
        self.eval_count = 0

    def __call__(self, x):
        self.eval_count += 1
        value = self.fn(x)
        if math.isnan(value) or math.isinf(value) or value > SENTINEL:
            return SENTINEL
        return value


@dataclass
class LocalMinConfig:
    xtol: float = 1e-8
    ftol: float = 1e-8
    max_rounds: int = 60
    bracket_growth: float = 2.0


@dataclass
class MCMCConfig:
    n_iter: int = 5
    step_scale: float = 50.0
    temperature: float = 1.0
    local: LocalMinConfig = field(default_factory=LocalMinConfig)
    box: Optional[list] = None     # per-dimension (lo, hi) or None


def bracket_minimum(g, t0=0.0, step=1.0, growth=2.0, max_expand=80):
    """Bracket a minimum of g by stepping outward from t0.

    Returns (lo, mid, hi) with g(mid) <= g(lo) and g(mid) <= g(hi).
    """
    a = t0
    b = t0 + step
    fa = g(a)
    fb = g(b)
    if fb > fa:
        a, b = b, a
        fa, fb = fb, fa
    c = b + growth * (b - a)
    fc = g(c)
    expansions = 0
    while fc < fb:
        expansions += 1
        if expansions > max_expand:
            break
        a, b, c = b, c, c + growth * (c - b)
        fa, fb, fc = fb, fc, g(c)
    lo, hi = (a, c) if a < c else (c, a)
    return lo, b, hi


def brent_line_min(g, bracket, xtol=1e-8, max_iter=100):
    """Brent's parabolic-interpolation line minimizer on a bracket."""
    lo, mid, hi = bracket
    if not (lo <= mid <= hi) or not (lo < hi):
        raise InvalidBracket(f"bad bracket ordering {bracket!r}")
    f_mid = g(mid)
    if f_mid > g(lo) or f_mid > g(hi):
        raise InvalidBracket(f"midpoint is not lowest in {bracket!r}")

    a, b = lo, hi
    x = w = v = mid
    fx = fw = fv = f_mid
    d = e = 0.0
    for _ in range(max_iter):
        xm = 0.5 * (a + b)
        tol1 = xtol * abs(x) + _TINY
        tol2 = 2.0 * tol1
        if abs(x - xm) <= tol2 - 0.5 * (b - a):
            break
        use_golden = True
        if abs(e) > tol1:
            # try a parabolic step through x, w, v
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            e_prev = e
            e = d
            if (abs(p) < abs(0.5 * q * e_prev) and p > q * (a - x)
                    and p < q * (b - x)):
                d = p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = math.copysign(tol1, xm - x)
                use_golden = False
        if use_golden:
            e = (b - x) if x < xm else (a - x)
            d = _CGOLD * e
        u = x + d if abs(d) >= tol1 else x + math.copysign(tol1, d)
        fu = g(u)
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx


def _line_minimize(f, x, direction, cfg):
    """Minimize f along x + t*direction; returns (new x, new f, decrease)."""
    def g(t):
        return f([xi + t * di for xi, di in zip(x, direction)])

    f0 = g(0.0)
    bracket = bracket_minimum(g, 0.0, 1.0, cfg.bracket_growth)
    try:
        t, ft = brent_line_min(g, bracket, cfg.xtol)
    except InvalidBracket:
        # runaway bracketing (objective decreasing off to huge magnitudes)
        return list(x), f0, 0.0
    if ft >= f0:
        return list(x), f0, 0.0
    new_x = [xi + t * di for xi, di in zip(x, direction)]
    return new_x, ft, f0 - ft


def powell_minimize(f, x0, cfg=None):
    """Powell's conjugate-direction minimization without derivatives.

    Directions start as the coordinate axes; after each sweep the axis of
    largest decrease may be replaced by the overall displacement, and the
    direction set is reset to the axes periodically to avoid degeneracy.
    """
    if cfg is None:
        cfg = LocalMinConfig()
    n = len(x0)
    x = [float(v) for v in x0]
    fx = f(x)
    if n == 0:
        return x, fx
    directions = [[1.0 if i == j else 0.0 for j in range(n)]
                  for i in range(n)]
    for round_no in range(cfg.max_rounds):
        f_start = fx
        x_start = list(x)
        biggest = 0.0
        biggest_idx = 0
        for i, direction in enumerate(directions):
            x, fx, decrease = _line_minimize(f, x, direction, cfg)
            if decrease > biggest:
                biggest = decrease
                biggest_idx = i
        if 2.0 * (f_start - fx) <= cfg.ftol * (abs(f_start) + abs(fx)) + _TINY:
            break
        # try the average displacement direction; the magnitude guard
        # keeps sentinel-sized values out of the extrapolation products
        if f_start < 1e150 and fx < 1e150:
            extrapolated = [2.0 * xi - si for xi, si in zip(x, x_start)]
            f_e = f(extrapolated)
            if f_e < f_start:
                t = (2.0 * (f_start - 2.0 * fx + f_e)
                     * (f_start - fx - biggest) ** 2
                     - biggest * (f_start - f_e) ** 2)
                if t < 0.0:
                    new_dir = [xi - si for xi, si in zip(x, x_start)]
                    if any(d != 0.0 for d in new_dir):
                        x, fx, _ = _line_minimize(f, x, new_dir, cfg)
                        directions[biggest_idx] = new_dir
        if (round_no + 1) % (2 * n) == 0:
            directions = [[1.0 if i == j else 0.0 for j in range(n)]
                          for i in range(n)]
    return x, fx


def metropolis_accept(f_current, f_proposal, temperature, rng):
    """Accept rule of the basinhopping chain: always accept downhill,
    accept uphill with probability exp(-gap / T)."""
    if f_proposal < f_current:
        return True
    gap = f_proposal - f_current
    try:
        threshold = math.exp(-gap / temperature)
    except OverflowError:
        threshold = 0.0
    return rng.random() < threshold


def _clamp(x, box):
    if box is None:
        return list(x)
    return [min(max(xi, lo), hi) for xi, (lo, hi) in zip(x, box)]


def basinhopping(f, x0, cfg=None, rng=None, callback=None):
    """Global minimization: local minimize, then repeatedly perturb the
    incumbent, re-minimize, and Metropolis-accept the proposal.

    Returns (best x, best f).  The callback, if given, runs once per
    iteration with (iteration, incumbent x, incumbent f) and may return
    True to stop early.
    """
    if cfg is None:
        cfg = MCMCConfig()
    if rng is None:
        rng = random.Random()
    x_l, f_l = powell_minimize(f, _clamp(x0, cfg.box), cfg.local)
    best_x, best_f = list(x_l), f_l
    if callback is not None and callback(0, x_l, f_l):
        return best_x, best_f
    for iteration in range(1, cfg.n_iter + 1):
        delta = [rng.uniform(-cfg.step_scale, cfg.step_scale)
                 for _ in range(len(x_l))]
        proposal = _clamp([xi + di for xi, di in zip(x_l, delta)], cfg.box)
        x_t, f_t = powell_minimize(f, proposal, cfg.local)
        if metropolis_accept(f_l, f_t, cfg.temperature, rng):
            x_l, f_l = x_t, f_t
        if f_l < best_f:
            best_x, best_f = list(x_l), f_l
        if callback is not None and callback(iteration, x_l, f_l):
            break
    return best_x, best_f
