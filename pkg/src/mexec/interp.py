"""Tracing interpreter for prepared programs.

Runs the entry function on a concrete real vector, records coverage
facts (lines, conditionals, branches, call sites, the branch path), and
threads the representing value r through every labeled conditional
according to the configured mode.
"""

import math
import struct
from dataclasses import dataclass, field
from typing import Optional

from .distance import branch_distance, compare, negate_op
from .errors import (
    ArityMismatch, NaNOperand, StepBudgetExceeded, UnknownFunction,
)
from .lang import (
    Assign, Binary, Block, Call, Compare, Decl, Deref, ExprStmt, If, Incr,
    Num, Promote, Return, Unary, Var, While,
)
from .saturation import pen

SENTINEL = 1e300

COVERAGE = "coverage"
PATH = "path"
BVA = "bva"
PLAIN = "plain"


@dataclass
class RepFunConfig:
    mode: str = COVERAGE
    r0: float = 1.0
    update: str = "assign"
    epsilon: float = 1e-6
    target_path: Optional[tuple] = None


def coverage_config(epsilon=1e-6):
    return RepFunConfig(mode=COVERAGE, r0=1.0, update="assign",
                        epsilon=epsilon)


def path_config(target_path, epsilon=1e-6):
    return RepFunConfig(mode=PATH, r0=0.0, update="add", epsilon=epsilon,
                        target_path=tuple(target_path))


def bva_config(epsilon=1e-6):
    return RepFunConfig(mode=BVA, r0=1.0, update="multiply", epsilon=epsilon)


def plain_config():
    return RepFunConfig(mode=PLAIN, r0=0.0, update="assign")


@dataclass
class ExecutionTrace:
    path: list = field(default_factory=list)
    covered_lines: set = field(default_factory=set)
    covered_conditionals: set = field(default_factory=set)
    covered_branches: set = field(default_factory=set)
    covered_calls: set = field(default_factory=set)
    final_r: float = 0.0
    steps: int = 0
    return_value: Optional[float] = None
    aborted: Optional[str] = None


class _ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


def _hiword(x):
    hi, _lo = struct.unpack(">II", struct.pack(">d", x))
    return float(hi)


def _loword(x):
    _hi, lo = struct.unpack(">II", struct.pack(">d", x))
    return float(lo)


def _pow(a, b):
    try:
        return math.pow(a, b)
    except OverflowError:
        # sign of an overflowed power: negative base with odd integer
        # exponent flips the sign
        if a < 0 and b == int(b) and int(b) % 2 == 1:
            return -math.inf
        return math.inf
    except ValueError:
        return math.nan


def _call_builtin(name, args):
    try:
        if name == "sin":
            return math.sin(args[0])
        if name == "cos":
            return math.cos(args[0])
        if name == "tan":
            return math.tan(args[0])
        if name == "exp":
            return math.exp(args[0])
        if name == "log":
            return math.log(args[0])
        if name == "sqrt":
            return math.sqrt(args[0])
        if name == "fabs":
            return math.fabs(args[0])
        if name == "floor":
            return math.floor(args[0]) if math.isfinite(args[0]) else args[0]
        if name == "pow":
            return _pow(args[0], args[1])
        if name == "hiword":
            return _hiword(args[0]) if not math.isnan(args[0]) else math.nan
        if name == "loword":
            return _loword(args[0]) if not math.isnan(args[0]) else math.nan
    except OverflowError:
        return math.inf
    except ValueError:
        return math.nan
    raise UnknownFunction(f"unknown builtin {name!r}")


class _Interp:
    def __init__(self, program, cfg, sat_state, step_budget):
        self.program = program
        self.cfg = cfg
        self.sat_state = sat_state
        self.step_budget = step_budget
        self.trace = ExecutionTrace()
        self.r = cfg.r0
        self.path_cursor = 0

    # -- expressions

    def eval_expr(self, expr, env):
        if isinstance(expr, Num):
            return expr.value
        if isinstance(expr, Var):
            return env[expr.name]
        if isinstance(expr, Deref):
            return env[expr.name]
        if isinstance(expr, Promote):
            # all runtime values are already 64-bit reals
            return self.eval_expr(expr.operand, env)
        if isinstance(expr, Unary):
            return -self.eval_expr(expr.operand, env)
        if isinstance(expr, Binary):
            a = self.eval_expr(expr.lhs, env)
            b = self.eval_expr(expr.rhs, env)
            if expr.op == "+":
                return a + b
            if expr.op == "-":
                return a - b
            if expr.op == "*":
                try:
                    return a * b
                except OverflowError:
                    return math.inf if (a > 0) == (b > 0) else -math.inf
            if expr.op == "/":
                try:
                    return a / b
                except ZeroDivisionError:
                    if a == 0 or math.isnan(a):
                        return math.nan
                    return math.copysign(math.inf, a) * math.copysign(1.0, b)
            if expr.op == "^":
                return _pow(a, b)
            raise ValueError(f"unhandled operator {expr.op!r}")
        if isinstance(expr, Call):
            args = [self.eval_expr(a, env) for a in expr.args]
            fn = self.program.function(expr.name)
            if fn is None:
                return _call_builtin(expr.name, args)
            self.trace.covered_calls.add((expr.line, expr.col))
            return self.call_function(fn, args)
        raise ValueError(f"unhandled expression {expr!r}")

    def call_function(self, fn, args):
        if len(args) != len(fn.params):
            raise ArityMismatch(
                f"{fn.name} expects {len(fn.params)} arguments, "
                f"got {len(args)}")
        env = {name: float(v) for (name, _k), v in zip(fn.params, args)}
        try:
            self.exec_stmt(fn.body, env)
        except _ReturnSignal as ret:
            return ret.value
        return 0.0

    # -- statements

    def tick(self, stmt):
        self.trace.steps += 1
        if self.trace.steps > self.step_budget:
            raise StepBudgetExceeded(
                f"more than {self.step_budget} statements executed")
        if stmt.line:
            self.trace.covered_lines.add(stmt.line)

    def exec_stmt(self, stmt, env):
        if isinstance(stmt, Block):
            for s in stmt.stmts:
                self.exec_stmt(s, env)
            return
        if isinstance(stmt, Decl):
            self.tick(stmt)
            env[stmt.name] = (self.eval_expr(stmt.init, env)
                              if stmt.init is not None else 0.0)
            return
        if isinstance(stmt, Assign):
            self.tick(stmt)
            value = self.eval_expr(stmt.expr, env)
            env[stmt.target.name] = value
            return
        if isinstance(stmt, Incr):
            self.tick(stmt)
            env[stmt.target.name] = env[stmt.target.name] + stmt.delta
            return
        if isinstance(stmt, ExprStmt):
            self.tick(stmt)
            self.eval_expr(stmt.expr, env)
            return
        if isinstance(stmt, Return):
            self.tick(stmt)
            value = (self.eval_expr(stmt.expr, env)
                     if stmt.expr is not None else 0.0)
            raise _ReturnSignal(value)
        if isinstance(stmt, If):
            self.tick(stmt)
            outcome = self.eval_condition(stmt.cond, env)
            if outcome:
                self.exec_stmt(stmt.then, env)
            elif stmt.els is not None:
                self.exec_stmt(stmt.els, env)
            return
        if isinstance(stmt, While):
            while True:
                self.tick(stmt)
                if not self.eval_condition(stmt.cond, env):
                    break
                self.exec_stmt(stmt.body, env)
            return
        raise TypeError(f"unhandled statement {stmt!r}")

    def eval_condition(self, cond, env):
        a = self.eval_expr(cond.lhs, env)
        b = self.eval_expr(cond.rhs, env)
        if not cond.instrumentable or cond.label is None:
            return compare(cond.op, a, b)
        label = cond.label
        eps = self.cfg.epsilon
        self.trace.covered_conditionals.add(label)
        mode = self.cfg.mode
        if mode == COVERAGE:
            self.r = pen(label, cond.op, a, b, self.sat_state, self.r, eps)
        elif mode == PATH:
            target = self.cfg.target_path
            if (self.path_cursor < len(target)
                    and target[self.path_cursor][0] == label):
                side = target[self.path_cursor][1]
                op = cond.op if side == "T" else negate_op(cond.op)
                self.r += branch_distance(op, a, b, eps)
                self.path_cursor += 1
        elif mode == BVA:
            self.r *= branch_distance("==", a, b, eps)
        outcome = compare(cond.op, a, b)
        branch = (label, "T" if outcome else "F")
        self.trace.path.append(branch)
        self.trace.covered_branches.add(branch)
        return outcome


def execute(program, inputs, cfg, sat_state=None, entry=None,
            step_budget=1_000_000):
    """Run `entry` on `inputs` and return the execution trace.

    The trace's final_r is the representing value at termination; a NaN
    comparison operand or an exhausted step budget aborts the run and
    reports a large sentinel so the optimizer steers away.
    """
    if entry is None:
        entry = program.functions[-1].name
    fn = program.function(entry)
    if fn is None:
        raise UnknownFunction(f"no function named {entry!r}")
    if len(inputs) != len(fn.params):
        raise ArityMismatch(
            f"{entry} expects {len(fn.params)} inputs, got {len(inputs)}")
    interp = _Interp(program, cfg, sat_state, step_budget)
    try:
        interp.trace.return_value = interp.call_function(fn, list(inputs))
        interp.trace.final_r = interp.r
        if math.isnan(interp.r) or math.isinf(interp.r):
            interp.trace.final_r = SENTINEL
            interp.trace.aborted = "non-finite representing value"
    except NaNOperand:
        interp.trace.final_r = SENTINEL
        interp.trace.aborted = "nan operand"
    except StepBudgetExceeded:
        interp.trace.final_r = SENTINEL
        interp.trace.aborted = "step budget exceeded"
    return interp.trace


def executable_lines(program):
    """Line numbers of all executable statements in the program."""
    lines = set()

    def visit(stmt):
        if isinstance(stmt, Block):
            for s in stmt.stmts:
                visit(s)
            return
        if stmt.line:
            lines.add(stmt.line)
        if isinstance(stmt, If):
            visit(stmt.then)
            if stmt.els is not None:
                visit(stmt.els)
        elif isinstance(stmt, While):
            visit(stmt.body)

    for fn in program.functions:
        visit(fn.body)
    return lines


def call_sites(program):
    """Static (line, col) positions of user-function call expressions."""
    user = {f.name for f in program.functions}
    sites = set()

    def visit_expr(expr):
        if expr is None or isinstance(expr, (Num, Var, Deref)):
            return
        if isinstance(expr, (Unary, Promote)):
            visit_expr(expr.operand)
        elif isinstance(expr, (Binary, Compare)):
            visit_expr(expr.lhs)
            visit_expr(expr.rhs)
        elif isinstance(expr, Call):
            for a in expr.args:
                visit_expr(a)
            if expr.name in user:
                sites.add((expr.line, expr.col))

    def visit(stmt):
        if isinstance(stmt, Block):
            for s in stmt.stmts:
                visit(s)
        elif isinstance(stmt, Decl):
            visit_expr(stmt.init)
        elif isinstance(stmt, Assign):
            visit_expr(stmt.expr)
        elif isinstance(stmt, ExprStmt):
            visit_expr(stmt.expr)
        elif isinstance(stmt, Return):
            visit_expr(stmt.expr)
        elif isinstance(stmt, If):
            visit_expr(stmt.cond)
            visit(stmt.then)
            if stmt.els is not None:
                visit(stmt.els)
        elif isinstance(stmt, While):
            visit_expr(stmt.cond)
            visit(stmt.body)

    for fn in program.functions:
        visit(fn.body)
    return sites


def conditional_counts(program):
    """(instrumentable, uninstrumentable) conditional counts."""
    instrumentable = 0
    other = 0

    def visit(stmt):
        nonlocal instrumentable, other
        if isinstance(stmt, Block):
            for s in stmt.stmts:
                visit(s)
        elif isinstance(stmt, If):
            if stmt.cond.instrumentable:
                instrumentable += 1
            else:
                other += 1
            visit(stmt.then)
            if stmt.els is not None:
                visit(stmt.els)
        elif isinstance(stmt, While):
            if stmt.cond.instrumentable:
                instrumentable += 1
            else:
                other += 1
            visit(stmt.body)

    for fn in program.functions:
        visit(fn.body)
    return instrumentable, other
