"""Front end for the .mx mini-language: lexer, AST, parser, printer.

The language is a small C-like subset over 64-bit reals: function
definitions, declarations, assignments, if/else, while, return, calls,
and arithmetic expressions with `^` for exponentiation.  Pointer-to-real
parameters are accepted so that library-style signatures can be written
down; a later pass rewrites them to scalars.

Every conditional whose two operands are numeric receives a dense label
0..N-1 in source order.  Conditionals comparing pointers keep label None
and are excluded from instrumentation and coverage denominators.
"""

from dataclasses import dataclass, field
from typing import Optional

from .distance import COMPARATORS
from .errors import (
    DuplicateFunction,
    ParseError,
    UndeclaredIdentifier,
)

BUILTINS = (
    "sin", "cos", "tan", "exp", "log", "sqrt", "fabs", "floor", "pow",
    "hiword", "loword",
)

BUILTIN_ARITY = {name: 1 for name in BUILTINS}
BUILTIN_ARITY["pow"] = 2


# ---------------------------------------------------------------------------
# Tokens

KEYWORDS = ("real", "void", "if", "else", "while", "return")

_PUNCT = (
    "++", "--", "==", "!=", "<=", ">=", "<", ">", "=", "+", "-", "*", "/",
    "^", "(", ")", "{", "}", ",", ";",
)


@dataclass
class Token:
    kind: str           # 'num', 'ident', 'kw', or the punctuation itself
    text: str
    line: int
    col: int


def tokenize(source):
    tokens = []
    i = 0
    line = 1
    col = 1
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            if j < 0:
                break
            col += j - i
            i = j
            continue
        if source.startswith("/*", i):
            j = source.find("*/", i + 2)
            if j < 0:
                raise ParseError("unterminated comment", line, col)
            chunk = source[i:j + 2]
            nl = chunk.count("\n")
            if nl:
                line += nl
                col = len(chunk) - chunk.rfind("\n")
            else:
                col += len(chunk)
            i = j + 2
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            if source.startswith(("0x", "0X"), i):
                j = i + 2
                while j < n and source[j] in "0123456789abcdefABCDEF":
                    j += 1
                if j == i + 2:
                    raise ParseError("malformed hex literal", line, col)
            else:
                while j < n and source[j].isdigit():
                    j += 1
                if j < n and source[j] == ".":
                    j += 1
                    while j < n and source[j].isdigit():
                        j += 1
                if j < n and source[j] in "eE":
                    k = j + 1
                    if k < n and source[k] in "+-":
                        k += 1
                    if k < n and source[k].isdigit():
                        j = k
                        while j < n and source[j].isdigit():
                            j += 1
            tokens.append(Token("num", source[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "kw" if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if source.startswith(p, i):
                tokens.append(Token(p, p, line, col))
                col += len(p)
                i += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# AST

@dataclass
class Node:
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass
class Num(Node):
    value: float = 0.0
    text: str = field(default="", compare=False)
    is_int: bool = False


@dataclass
class Var(Node):
    name: str = ""


@dataclass
class Deref(Node):
    """Read through a pointer parameter, `*p`."""
    name: str = ""


@dataclass
class Unary(Node):
    op: str = "-"
    operand: Optional[Node] = None


@dataclass
class Binary(Node):
    op: str = "+"
    lhs: Optional[Node] = None
    rhs: Optional[Node] = None


@dataclass
class Call(Node):
    name: str = ""
    args: list = field(default_factory=list)


@dataclass
class Promote(Node):
    """Explicit to-real conversion, printed as a (real) cast."""
    operand: Optional[Node] = None


@dataclass
class Compare(Node):
    op: str = "=="
    lhs: Optional[Node] = None
    rhs: Optional[Node] = None
    label: Optional[int] = field(default=None, compare=False)
    instrumentable: bool = field(default=True, compare=False)


@dataclass
class Decl(Node):
    name: str = ""
    init: Optional[Node] = None


@dataclass
class Assign(Node):
    target: Optional[Node] = None   # Var or Deref
    expr: Optional[Node] = None


@dataclass
class Incr(Node):
    """x++ or x-- as a statement."""
    target: Optional[Node] = None
    delta: float = 1.0


@dataclass
class If(Node):
    cond: Optional[Compare] = None
    then: Optional[Node] = None
    els: Optional[Node] = None


@dataclass
class While(Node):
    cond: Optional[Compare] = None
    body: Optional[Node] = None


@dataclass
class Return(Node):
    expr: Optional[Node] = None


@dataclass
class ExprStmt(Node):
    expr: Optional[Node] = None


@dataclass
class Block(Node):
    stmts: list = field(default_factory=list)


@dataclass
class FunctionDef(Node):
    name: str = ""
    rettype: str = "real"
    params: list = field(default_factory=list)   # (name, 'real' | 'ptr')
    body: Optional[Block] = None


@dataclass
class Program:
    functions: list
    num_conditionals: int = 0

    def function(self, name):
        for f in self.functions:
            if f.name == name:
                return f
        return None


# ---------------------------------------------------------------------------
# Parser

class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead=0):
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind, what=None):
        tok = self.peek()
        if tok.kind != kind:
            want = what or repr(kind)
            raise ParseError(
                f"expected {want}, found {tok.text or 'end of input'!r}",
                tok.line, tok.col)
        return self.next()

    def expect_kw(self, word):
        tok = self.peek()
        if tok.kind != "kw" or tok.text != word:
            raise ParseError(
                f"expected {word!r}, found {tok.text or 'end of input'!r}",
                tok.line, tok.col)
        return self.next()

    # -- program structure

    def parse_program(self):
        functions = []
        while self.peek().kind != "eof":
            functions.append(self.parse_function())
        seen = set()
        for f in functions:
            if f.name in seen:
                raise DuplicateFunction(
                    f"function {f.name!r} defined twice", f.line, f.col)
            seen.add(f.name)
        program = Program(functions)
        _validate(program)
        _assign_labels(program)
        return program

    def parse_function(self):
        tok = self.peek()
        if tok.kind != "kw" or tok.text not in ("real", "void"):
            raise ParseError(
                f"expected function definition, found {tok.text!r}",
                tok.line, tok.col)
        rettype = self.next().text
        name = self.expect("ident", "function name")
        self.expect("(")
        params = []
        if self.peek().kind != ")":
            while True:
                self.expect_kw("real")
                kind = "real"
                if self.peek().kind == "*":
                    self.next()
                    kind = "ptr"
                pname = self.expect("ident", "parameter name")
                if any(p[0] == pname.text for p in params):
                    raise ParseError(
                        f"duplicate parameter {pname.text!r}",
                        pname.line, pname.col)
                params.append((pname.text, kind))
                if self.peek().kind == ",":
                    self.next()
                    continue
                break
        self.expect(")")
        body = self.parse_block()
        return FunctionDef(line=tok.line, col=tok.col, name=name.text,
                           rettype=rettype, params=params, body=body)

    # -- statements

    def parse_block(self):
        tok = self.expect("{")
        stmts = []
        while self.peek().kind != "}":
            if self.peek().kind == "eof":
                raise ParseError("unterminated block", tok.line, tok.col)
            stmts.append(self.parse_stmt())
        self.expect("}")
        return Block(line=tok.line, col=tok.col, stmts=stmts)

    def parse_stmt(self):
        tok = self.peek()
        if tok.kind == "{":
            return self.parse_block()
        if tok.kind == "kw":
            if tok.text == "if":
                return self.parse_if()
            if tok.text == "while":
                return self.parse_while()
            if tok.text == "return":
                self.next()
                expr = None
                if self.peek().kind != ";":
                    expr = self.parse_expr()
                self.expect(";")
                return Return(line=tok.line, col=tok.col, expr=expr)
            if tok.text == "real":
                self.next()
                name = self.expect("ident", "variable name")
                init = None
                if self.peek().kind == "=":
                    self.next()
                    init = self.parse_expr()
                self.expect(";")
                return Decl(line=tok.line, col=tok.col,
                            name=name.text, init=init)
        if tok.kind == "ident" or tok.kind == "*":
            target = self.parse_lvalue()
            nxt = self.peek()
            if nxt.kind == "++" or nxt.kind == "--":
                self.next()
                self.expect(";")
                delta = 1.0 if nxt.kind == "++" else -1.0
                return Incr(line=tok.line, col=tok.col,
                            target=target, delta=delta)
            if nxt.kind == "=":
                self.next()
                expr = self.parse_expr()
                self.expect(";")
                return Assign(line=tok.line, col=tok.col,
                              target=target, expr=expr)
            if nxt.kind == "(" and isinstance(target, Var):
                call = self.finish_call(target.name, tok)
                self.expect(";")
                return ExprStmt(line=tok.line, col=tok.col, expr=call)
            raise ParseError(
                f"expected assignment or call, found {nxt.text!r}",
                nxt.line, nxt.col)
        raise ParseError(
            f"unexpected token {tok.text or 'end of input'!r}",
            tok.line, tok.col)

    def parse_lvalue(self):
        tok = self.peek()
        if tok.kind == "*":
            self.next()
            name = self.expect("ident", "pointer name")
            return Deref(line=tok.line, col=tok.col, name=name.text)
        name = self.expect("ident", "variable name")
        return Var(line=tok.line, col=tok.col, name=name.text)

    def parse_if(self):
        tok = self.expect_kw("if")
        self.expect("(")
        cond = self.parse_compare()
        self.expect(")")
        then = self.parse_stmt()
        els = None
        nxt = self.peek()
        if nxt.kind == "kw" and nxt.text == "else":
            self.next()
            els = self.parse_stmt()
        return If(line=tok.line, col=tok.col, cond=cond, then=then, els=els)

    def parse_while(self):
        tok = self.expect_kw("while")
        self.expect("(")
        cond = self.parse_compare()
        self.expect(")")
        body = self.parse_stmt()
        return While(line=tok.line, col=tok.col, cond=cond, body=body)

    def parse_compare(self):
        lhs = self.parse_expr()
        tok = self.peek()
        if tok.kind not in COMPARATORS:
            raise ParseError(
                f"expected comparison operator, found {tok.text!r}",
                tok.line, tok.col)
        op = self.next().kind
        rhs = self.parse_expr()
        return Compare(line=tok.line, col=tok.col, op=op, lhs=lhs, rhs=rhs)

    # -- expressions

    def parse_expr(self):
        return self.parse_additive()

    def parse_additive(self):
        node = self.parse_term()
        while self.peek().kind in ("+", "-"):
            tok = self.next()
            rhs = self.parse_term()
            node = Binary(line=tok.line, col=tok.col,
                          op=tok.kind, lhs=node, rhs=rhs)
        return node

    def parse_term(self):
        node = self.parse_unary()
        while self.peek().kind in ("*", "/"):
            tok = self.next()
            rhs = self.parse_unary()
            node = Binary(line=tok.line, col=tok.col,
                          op=tok.kind, lhs=node, rhs=rhs)
        return node

    def parse_unary(self):
        tok = self.peek()
        if tok.kind in ("-", "+"):
            self.next()
            operand = self.parse_unary()
            if tok.kind == "+":
                return operand
            return Unary(line=tok.line, col=tok.col, op="-", operand=operand)
        if (tok.kind == "(" and self.peek(1).kind == "kw"
                and self.peek(1).text == "real" and self.peek(2).kind == ")"):
            self.next()
            self.next()
            self.next()
            operand = self.parse_unary()
            return Promote(line=tok.line, col=tok.col, operand=operand)
        return self.parse_power()

    def parse_power(self):
        base = self.parse_primary()
        if self.peek().kind == "^":
            tok = self.next()
            # right associative, and the exponent may be signed
            exponent = self.parse_unary()
            return Binary(line=tok.line, col=tok.col,
                          op="^", lhs=base, rhs=exponent)
        return base

    def parse_primary(self):
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            text = tok.text
            if text.startswith(("0x", "0X")):
                return Num(line=tok.line, col=tok.col,
                           value=float(int(text, 16)), text=text, is_int=True)
            if "." in text or "e" in text or "E" in text:
                return Num(line=tok.line, col=tok.col,
                           value=float(text), text=text, is_int=False)
            return Num(line=tok.line, col=tok.col,
                       value=float(int(text)), text=text, is_int=True)
        if tok.kind == "ident":
            self.next()
            if self.peek().kind == "(":
                return self.finish_call(tok.text, tok)
            return Var(line=tok.line, col=tok.col, name=tok.text)
        if tok.kind == "*":
            self.next()
            name = self.expect("ident", "pointer name")
            return Deref(line=tok.line, col=tok.col, name=name.text)
        if tok.kind == "(":
            self.next()
            node = self.parse_expr()
            self.expect(")")
            return node
        raise ParseError(
            f"expected expression, found {tok.text or 'end of input'!r}",
            tok.line, tok.col)

    def finish_call(self, name, tok):
        self.expect("(")
        args = []
        if self.peek().kind != ")":
            while True:
                args.append(self.parse_expr())
                if self.peek().kind == ",":
                    self.next()
                    continue
                break
        self.expect(")")
        return Call(line=tok.line, col=tok.col, name=name, args=args)


def parse(source):
    """Parse .mx source text into a labeled, validated Program."""
    return _Parser(tokenize(source)).parse_program()


# ---------------------------------------------------------------------------
# Validation and labeling

def _validate(program):
    names = {f.name for f in program.functions}

    def check_expr(expr, scope, fn):
        if isinstance(expr, Num):
            return
        if isinstance(expr, Var):
            if expr.name not in scope:
                raise UndeclaredIdentifier(
                    f"undeclared identifier {expr.name!r}",
                    expr.line, expr.col)
            return
        if isinstance(expr, Deref):
            if expr.name not in scope:
                raise UndeclaredIdentifier(
                    f"undeclared identifier {expr.name!r}",
                    expr.line, expr.col)
            return
        if isinstance(expr, Unary) or isinstance(expr, Promote):
            check_expr(expr.operand, scope, fn)
            return
        if isinstance(expr, (Binary, Compare)):
            check_expr(expr.lhs, scope, fn)
            check_expr(expr.rhs, scope, fn)
            return
        if isinstance(expr, Call):
            if expr.name not in names and expr.name not in BUILTINS:
                raise UndeclaredIdentifier(
                    f"call to unknown function {expr.name!r}",
                    expr.line, expr.col)
            for a in expr.args:
                check_expr(a, scope, fn)
            return
        raise ParseError(f"unhandled expression node {expr!r}")

    def check_stmt(stmt, scope, fn):
        if isinstance(stmt, Block):
            for s in stmt.stmts:
                check_stmt(s, scope, fn)
        elif isinstance(stmt, Decl):
            if stmt.init is not None:
                check_expr(stmt.init, scope, fn)
            scope.add(stmt.name)
        elif isinstance(stmt, Assign):
            check_expr(stmt.expr, scope, fn)
            if isinstance(stmt.target, Deref):
                check_expr(stmt.target, scope, fn)
            else:
                # assignment may introduce a variable, C-style locals are
                # expected to be declared but we accept first-write binding
                scope.add(stmt.target.name)
        elif isinstance(stmt, Incr):
            check_expr(stmt.target, scope, fn)
        elif isinstance(stmt, If):
            check_expr(stmt.cond, scope, fn)
            check_stmt(stmt.then, set(scope), fn)
            if stmt.els is not None:
                check_stmt(stmt.els, set(scope), fn)
        elif isinstance(stmt, While):
            check_expr(stmt.cond, scope, fn)
            check_stmt(stmt.body, set(scope), fn)
        elif isinstance(stmt, Return):
            if stmt.expr is not None:
                check_expr(stmt.expr, scope, fn)
        elif isinstance(stmt, ExprStmt):
            check_expr(stmt.expr, scope, fn)
        else:
            raise ParseError(f"unhandled statement node {stmt!r}")

    for f in program.functions:
        scope = {p[0] for p in f.params}
        check_stmt(f.body, scope, f)


def _pointer_params(fn):
    return {name for name, kind in fn.params if kind == "ptr"}


def _expr_mentions_pointer(expr, pointers):
    """True if the expression reads a pointer value itself (not through *)."""
    if isinstance(expr, Var):
        return expr.name in pointers
    if isinstance(expr, (Unary, Promote)):
        return _expr_mentions_pointer(expr.operand, pointers)
    if isinstance(expr, (Binary, Compare)):
        return (_expr_mentions_pointer(expr.lhs, pointers)
                or _expr_mentions_pointer(expr.rhs, pointers))
    if isinstance(expr, Call):
        return any(_expr_mentions_pointer(a, pointers) for a in expr.args)
    return False


def _assign_labels(program):
    """Number instrumentable conditionals 0..N-1 in source order."""
    counter = 0

    def visit(stmt, pointers):
        nonlocal counter
        if isinstance(stmt, Block):
            for s in stmt.stmts:
                visit(s, pointers)
        elif isinstance(stmt, (If, While)):
            cond = stmt.cond
            if (_expr_mentions_pointer(cond.lhs, pointers)
                    or _expr_mentions_pointer(cond.rhs, pointers)):
                cond.instrumentable = False
                cond.label = None
            else:
                cond.instrumentable = True
                cond.label = counter
                counter += 1
            visit(stmt.then if isinstance(stmt, If) else stmt.body, pointers)
            if isinstance(stmt, If) and stmt.els is not None:
                visit(stmt.els, pointers)

    for f in program.functions:
        visit(f.body, _pointer_params(f))
    program.num_conditionals = counter


def relabel(program):
    """Recompute dense labels after a transform (labels stay stable when
    the set of instrumentable conditionals is unchanged)."""
    _assign_labels(program)
    return program


# ---------------------------------------------------------------------------
# Printing

def _fmt_expr(expr, parent_prec=0):
    prec = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
    if isinstance(expr, Num):
        return expr.text if expr.text else repr(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Deref):
        return f"*{expr.name}"
    if isinstance(expr, Unary):
        inner = _fmt_expr(expr.operand, 3)
        s = f"-{inner}"
        return f"({s})" if parent_prec > 3 else s
    if isinstance(expr, Promote):
        return f"(real) {_fmt_expr(expr.operand, 3)}"
    if isinstance(expr, Binary):
        p = prec[expr.op]
        left = _fmt_expr(expr.lhs, p if expr.op != "^" else p + 1)
        right = _fmt_expr(expr.rhs, p + 1 if expr.op != "^" else p)
        s = f"{left} {expr.op} {right}"
        return f"({s})" if p < parent_prec else s
    if isinstance(expr, Call):
        args = ", ".join(_fmt_expr(a) for a in expr.args)
        return f"{expr.name}({args})"
    if isinstance(expr, Compare):
        return f"{_fmt_expr(expr.lhs)} {expr.op} {_fmt_expr(expr.rhs)}"
    raise ValueError(f"unhandled expression {expr!r}")


def _fmt_stmt(stmt, indent, out, annotate=None):
    pad = "    " * indent
    if isinstance(stmt, Block):
        out.append(pad + "{")
        for s in stmt.stmts:
            _fmt_stmt(s, indent + 1, out, annotate)
        out.append(pad + "}")
    elif isinstance(stmt, Decl):
        if stmt.init is not None:
            out.append(f"{pad}real {stmt.name} = {_fmt_expr(stmt.init)};")
        else:
            out.append(f"{pad}real {stmt.name};")
    elif isinstance(stmt, Assign):
        out.append(f"{pad}{_fmt_expr(stmt.target)} = {_fmt_expr(stmt.expr)};")
    elif isinstance(stmt, Incr):
        suffix = "++" if stmt.delta > 0 else "--"
        out.append(f"{pad}{_fmt_expr(stmt.target)}{suffix};")
    elif isinstance(stmt, If):
        if annotate is not None:
            annotate(stmt.cond, pad, out)
        out.append(f"{pad}if ({_fmt_expr(stmt.cond)})")
        _fmt_stmt(_as_block(stmt.then), indent, out, annotate)
        if stmt.els is not None:
            out.append(f"{pad}else")
            _fmt_stmt(_as_block(stmt.els), indent, out, annotate)
    elif isinstance(stmt, While):
        if annotate is not None:
            annotate(stmt.cond, pad, out)
        out.append(f"{pad}while ({_fmt_expr(stmt.cond)})")
        _fmt_stmt(_as_block(stmt.body), indent, out, annotate)
    elif isinstance(stmt, Return):
        if stmt.expr is not None:
            out.append(f"{pad}return {_fmt_expr(stmt.expr)};")
        else:
            out.append(f"{pad}return;")
    elif isinstance(stmt, ExprStmt):
        out.append(f"{pad}{_fmt_expr(stmt.expr)};")
    else:
        raise ValueError(f"unhandled statement {stmt!r}")


def _as_block(stmt):
    return stmt if isinstance(stmt, Block) else Block(stmts=[stmt])


def to_source(program):
    """Render a Program back to parseable .mx text."""
    out = []
    for f in program.functions:
        params = ", ".join(
            f"real {'*' if kind == 'ptr' else ''}{name}"
            for name, kind in f.params)
        out.append(f"{f.rettype} {f.name}({params})")
        _fmt_stmt(f.body, 0, out)
        out.append("")
    return "\n".join(out)


def render_instrumented(program, entry):
    """Render the entry function with the penalty assignment that the
    interpreter applies at each labeled conditional shown inline."""
    fn = program.function(entry)
    if fn is None:
        raise ValueError(f"no function named {entry!r}")

    def annotate(cond, pad, out):
        if cond.instrumentable and cond.label is not None:
            out.append(
                f"{pad}r = pen({cond.label}, \"{cond.op}\", "
                f"{_fmt_expr(cond.lhs)}, {_fmt_expr(cond.rhs)});")

    out = []
    params = ", ".join(
        f"real {'*' if kind == 'ptr' else ''}{name}"
        for name, kind in fn.params)
    out.append(f"{fn.rettype} {fn.name}_I({params})")
    _fmt_stmt(fn.body, 0, out, annotate)
    return "\n".join(out)
