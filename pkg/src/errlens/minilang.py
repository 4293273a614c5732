"""MiniLang: the small imperative demo language the inspection fixtures use.

Hand-written lexer and recursive-descent parser producing a span-annotated
AST, plus structural classification of arithmetic expressions into model
families (constant folding first, so `(4+4)*n` reads as `8*n`).
"""

from __future__ import annotations

from dataclasses import dataclass, field


class MiniLangError(Exception):
    """Syntax or structural error in MiniLang source, with position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Span:
    """Half-open source region; lines and columns are 1-based."""

    line: int
    column: int
    end_line: int
    end_column: int

    def to_json(self) -> dict:
        return {
            "line": self.line,
            "column": self.column,
            "end_line": self.end_line,
            "end_column": self.end_column,
        }


# ---------------------------------------------------------------------------
# Lexer

KEYWORDS = {
    "func", "for", "to", "while", "if", "else", "print", "println", "return",
}

_SYMBOLS = [
    "**", "==", "!=", "<=", ">=",
    "+", "-", "*", "/", "%", "(", ")", "{", "}", ",", ";", "=", "<", ">",
]


@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER, STRING, IDENT, keyword or symbol literal, EOF
    text: str
    line: int
    column: int
    value: object = None


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            buf = []
            while i < n and source[i] != '"':
                c = source[i]
                if c == "\n":
                    raise MiniLangError("unterminated string literal", start_line, start_col)
                if c == "\\" and i + 1 < n:
                    esc = source[i + 1]
                    buf.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    i += 2
                    col += 2
                    continue
                buf.append(c)
                i += 1
                col += 1
            if i >= n:
                raise MiniLangError("unterminated string literal", start_line, start_col)
            i += 1
            col += 1
            tokens.append(Token("STRING", "".join(buf), start_line, start_col, "".join(buf)))
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            start_col = col
            j = i
            seen_dot = False
            while j < n and (source[j].isdigit() or (source[j] == "." and not seen_dot)):
                if source[j] == ".":
                    # two dots in a row would be a malformed number
                    if j + 1 >= n or not source[j + 1].isdigit():
                        break
                    seen_dot = True
                j += 1
            text = source[i:j]
            value: object = float(text) if "." in text else int(text)
            tokens.append(Token("NUMBER", text, line, start_col, value))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            start_col = col
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = text if text in KEYWORDS else "IDENT"
            tokens.append(Token(kind, text, line, start_col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token(sym, sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise MiniLangError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Expr:
    span: Span


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Str(Expr):
    value: str


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class CallExpr(Expr):
    name: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Stmt:
    span: Span


@dataclass(frozen=True)
class Assign(Stmt):
    target: str
    expr: Expr


@dataclass(frozen=True)
class For(Stmt):
    var: str
    start: Expr
    stop: Expr
    body: tuple[Stmt, ...]


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: tuple[Stmt, ...]


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then_body: tuple[Stmt, ...]
    else_body: tuple[Stmt, ...]


@dataclass(frozen=True)
class CallStmt(Stmt):
    call: CallExpr


@dataclass(frozen=True)
class Print(Stmt):
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Println(Stmt):
    pass


@dataclass(frozen=True)
class Return(Stmt):
    expr: Expr


@dataclass(frozen=True)
class Function:
    name: str
    params: tuple[str, ...]
    body: tuple[Stmt, ...]
    span: Span


@dataclass
class Program:
    functions: list[Function]
    source: str
    path: str | None = None

    def function(self, name: str) -> Function | None:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def source_map(self) -> dict[str, Span]:
        """Anchor string -> span for every statement in the program."""
        out: dict[str, Span] = {}
        for f in self.functions:
            out[f.name] = f.span
            for stmt in walk_statements(f.body):
                out[anchor_for(f.name, stmt)] = stmt.span
        return out


def anchor_for(func_name: str, stmt: Stmt) -> str:
    """Stable, human-readable anchor for a statement: `func@line:col`."""
    return f"{func_name}@{stmt.span.line}:{stmt.span.column}"


def anchor_function(anchor: str) -> str:
    """Function part of an anchor string (`draw@3:5` -> `draw`)."""
    return anchor.split("@", 1)[0]


def anchor_line(anchor: str) -> int | None:
    if "@" not in anchor:
        return None
    pos = anchor.split("@", 1)[1]
    try:
        return int(pos.split(":", 1)[0])
    except ValueError:
        return None


def walk_statements(body: tuple[Stmt, ...]):
    for stmt in body:
        yield stmt
        if isinstance(stmt, For):
            yield from walk_statements(stmt.body)
        elif isinstance(stmt, While):
            yield from walk_statements(stmt.body)
        elif isinstance(stmt, If):
            yield from walk_statements(stmt.then_body)
            yield from walk_statements(stmt.else_body)


# ---------------------------------------------------------------------------
# Parser

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise MiniLangError(
                f"expected {kind!r}, found {tok.text or 'end of input'!r}",
                tok.line, tok.column,
            )
        return self.advance()

    def parse_program(self, source: str, path: str | None) -> Program:
        functions: list[Function] = []
        seen: dict[str, Token] = {}
        while self.peek().kind != "EOF":
            fn = self.parse_function()
            if fn.name in seen:
                raise MiniLangError(
                    f"duplicate function name {fn.name!r}", fn.span.line, fn.span.column
                )
            seen[fn.name] = self.peek()
            functions.append(fn)
        return Program(functions, source, path)

    def parse_function(self) -> Function:
        start = self.expect("func")
        name = self.expect("IDENT")
        self.expect("(")
        params: list[str] = []
        if self.peek().kind != ")":
            params.append(self.expect("IDENT").text)
            while self.peek().kind == ",":
                self.advance()
                params.append(self.expect("IDENT").text)
        self.expect(")")
        body, end = self.parse_block()
        span = Span(start.line, start.column, end.line, end.column + 1)
        return Function(name.text, tuple(params), body, span)

    def parse_block(self) -> tuple[tuple[Stmt, ...], Token]:
        self.expect("{")
        stmts: list[Stmt] = []
        while self.peek().kind != "}":
            if self.peek().kind == "EOF":
                tok = self.peek()
                raise MiniLangError("unexpected end of input inside block", tok.line, tok.column)
            stmts.append(self.parse_statement())
        end = self.expect("}")
        return tuple(stmts), end

    def parse_statement(self) -> Stmt:
        tok = self.peek()
        if tok.kind == "for":
            return self.parse_for()
        if tok.kind == "while":
            return self.parse_while()
        if tok.kind == "if":
            return self.parse_if()
        if tok.kind == "print":
            return self.parse_print()
        if tok.kind == "println":
            self.advance()
            self.expect("(")
            self.expect(")")
            end = self.expect(";")
            return Println(_span(tok, end))
        if tok.kind == "return":
            self.advance()
            expr = self.parse_expr()
            end = self.expect(";")
            return Return(_span(tok, end), expr)
        if tok.kind == "IDENT":
            name = self.advance()
            nxt = self.peek()
            if nxt.kind == "=":
                self.advance()
                expr = self.parse_expr()
                end = self.expect(";")
                return Assign(_span(name, end), name.text, expr)
            if nxt.kind == "(":
                call = self.finish_call(name)
                end = self.expect(";")
                return CallStmt(_span(name, end), call)
            raise MiniLangError(
                f"expected '=' or '(' after {name.text!r}", nxt.line, nxt.column
            )
        raise MiniLangError(f"unexpected token {tok.text!r}", tok.line, tok.column)

    def parse_for(self) -> For:
        start = self.expect("for")
        var = self.expect("IDENT")
        self.expect("=")
        lo = self.parse_expr()
        self.expect("to")
        hi = self.parse_expr()
        body, end = self.parse_block()
        return For(_span(start, end), var.text, lo, hi, body)

    def parse_while(self) -> While:
        start = self.expect("while")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        body, end = self.parse_block()
        return While(_span(start, end), cond, body)

    def parse_if(self) -> If:
        start = self.expect("if")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then_body, end = self.parse_block()
        else_body: tuple[Stmt, ...] = ()
        if self.peek().kind == "else":
            self.advance()
            if self.peek().kind == "if":
                nested = self.parse_if()
                else_body = (nested,)
                end_tok = nested
                return If(Span(start.line, start.column, nested.span.end_line,
                               nested.span.end_column), cond, then_body, else_body)
            else_body, end = self.parse_block()
        return If(_span(start, end), cond, then_body, else_body)

    def parse_print(self) -> Print:
        start = self.expect("print")
        self.expect("(")
        args: list[Expr] = []
        if self.peek().kind != ")":
            args.append(self.parse_expr())
            while self.peek().kind == ",":
                self.advance()
                args.append(self.parse_expr())
        self.expect(")")
        end = self.expect(";")
        return Print(_span(start, end), tuple(args))

    def finish_call(self, name: Token) -> CallExpr:
        self.expect("(")
        args: list[Expr] = []
        if self.peek().kind != ")":
            args.append(self.parse_expr())
            while self.peek().kind == ",":
                self.advance()
                args.append(self.parse_expr())
        end = self.expect(")")
        return CallExpr(_span(name, end), name.text, tuple(args))

    # Expression precedence: comparison < additive < multiplicative < unary < power
    def parse_expr(self) -> Expr:
        left = self.parse_additive()
        while self.peek().kind in ("==", "!=", "<", "<=", ">", ">="):
            op = self.advance()
            right = self.parse_additive()
            left = BinOp(_espan(left, right), op.kind, left, right)
        return left

    def parse_additive(self) -> Expr:
        left = self.parse_multiplicative()
        while self.peek().kind in ("+", "-"):
            op = self.advance()
            right = self.parse_multiplicative()
            left = BinOp(_espan(left, right), op.kind, left, right)
        return left

    def parse_multiplicative(self) -> Expr:
        left = self.parse_unary()
        while self.peek().kind in ("*", "/", "%"):
            op = self.advance()
            right = self.parse_unary()
            left = BinOp(_espan(left, right), op.kind, left, right)
        return left

    def parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "-":
            self.advance()
            operand = self.parse_unary()
            return Unary(Span(tok.line, tok.column, operand.span.end_line,
                              operand.span.end_column), "-", operand)
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_primary()
        if self.peek().kind == "**":
            self.advance()
            exponent = self.parse_unary()  # right associative
            return BinOp(_espan(base, exponent), "**", base, exponent)
        return base

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            return Num(_tok_span(tok), tok.value)  # type: ignore[arg-type]
        if tok.kind == "STRING":
            self.advance()
            return Str(_tok_span(tok), tok.value)  # type: ignore[arg-type]
        if tok.kind == "IDENT":
            name = self.advance()
            if self.peek().kind == "(":
                return self.finish_call(name)
            return Var(_tok_span(name), name.text)
        if tok.kind == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        raise MiniLangError(f"unexpected token {tok.text or 'end of input'!r}",
                            tok.line, tok.column)


def _tok_span(tok: Token) -> Span:
    return Span(tok.line, tok.column, tok.line, tok.column + max(len(tok.text), 1))


def _span(start: Token, end: Token) -> Span:
    return Span(start.line, start.column, end.line, end.column + max(len(end.text), 1))


def _espan(left: Expr, right: Expr) -> Span:
    return Span(left.span.line, left.span.column, right.span.end_line, right.span.end_column)


def parse_program(source: str, path: str | None = None) -> Program:
    """Parse MiniLang source into a Program; raises MiniLangError with position."""
    return _Parser(tokenize(source)).parse_program(source, path)


# ---------------------------------------------------------------------------
# Expression classification

@dataclass(frozen=True)
class ExpressionForm:
    """Which model family an expression realizes with respect to one variable.

    family is one of: constant, linear, polynomial, exponential, other.
    For exponential forms, `variable_operand` records which operand of `**`
    holds the variable (the scale/base live in the coefficients).
    """

    variable: str
    family: str
    coefficients: dict = field(default_factory=dict)
    variable_operand: str | None = None

    def to_json(self) -> dict:
        out = {"variable": self.variable, "family": self.family,
               "coefficients": dict(self.coefficients)}
        if self.variable_operand is not None:
            out["variable_operand"] = self.variable_operand
        return out

    def label(self) -> str:
        c = self.coefficients
        if self.family == "constant":
            return f"constant{{{_num(c.get('value'))}}}"
        if self.family == "linear":
            return f"linear{{a={_num(c.get('a'))}, b={_num(c.get('b'))}}}"
        if self.family == "polynomial":
            return f"polynomial{{degree={c.get('degree')}, a={_num(c.get('a'))}}}"
        if self.family == "exponential":
            return f"exponential{{a={_num(c.get('a'))}, d={_num(c.get('d'))}}}"
        return "other"


def _num(v) -> str:
    if v is None:
        return "?"
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


def fold_constants(expr: Expr) -> Expr:
    """Evaluate literal subtrees; leaves anything non-constant untouched."""
    if isinstance(expr, (Num, Str, Var)):
        return expr
    if isinstance(expr, Unary):
        inner = fold_constants(expr.operand)
        if isinstance(inner, Num):
            return Num(expr.span, -inner.value)
        return Unary(expr.span, expr.op, inner)
    if isinstance(expr, BinOp):
        left = fold_constants(expr.left)
        right = fold_constants(expr.right)
        if isinstance(left, Num) and isinstance(right, Num):
            value = _apply_op(expr.op, left.value, right.value)
            if value is not None:
                return Num(expr.span, value)
        return BinOp(expr.span, expr.op, left, right)
    if isinstance(expr, CallExpr):
        return CallExpr(expr.span, expr.name, tuple(fold_constants(a) for a in expr.args))
    return expr


def _apply_op(op: str, a: float, b: float) -> float | None:
    try:
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return a / b
        if op == "%":
            return a % b
        if op == "**":
            result = a ** b
            if isinstance(result, complex):
                return None
            return result
    except (ZeroDivisionError, OverflowError, ValueError):
        return None
    return None


def free_variables(expr: Expr) -> set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Unary):
        return free_variables(expr.operand)
    if isinstance(expr, BinOp):
        return free_variables(expr.left) | free_variables(expr.right)
    if isinstance(expr, CallExpr):
        out: set[str] = set()
        for a in expr.args:
            out |= free_variables(a)
        return out
    return set()


def _as_polynomial(expr: Expr, var: str) -> dict[int, float] | None:
    """Expression as {degree: coefficient} in `var`, or None if not polynomial."""
    if isinstance(expr, Num):
        return {0: float(expr.value)}
    if isinstance(expr, Var):
        if expr.name == var:
            return {1: 1.0}
        return None
    if isinstance(expr, Unary) and expr.op == "-":
        inner = _as_polynomial(expr.operand, var)
        if inner is None:
            return None
        return {d: -c for d, c in inner.items()}
    if isinstance(expr, BinOp):
        if expr.op in ("+", "-"):
            left = _as_polynomial(expr.left, var)
            right = _as_polynomial(expr.right, var)
            if left is None or right is None:
                return None
            sign = 1.0 if expr.op == "+" else -1.0
            out = dict(left)
            for d, c in right.items():
                out[d] = out.get(d, 0.0) + sign * c
            return out
        if expr.op == "*":
            left = _as_polynomial(expr.left, var)
            right = _as_polynomial(expr.right, var)
            if left is None or right is None:
                return None
            out: dict[int, float] = {}
            for d1, c1 in left.items():
                for d2, c2 in right.items():
                    out[d1 + d2] = out.get(d1 + d2, 0.0) + c1 * c2
            return out
        if expr.op == "/":
            left = _as_polynomial(expr.left, var)
            if left is None:
                return None
            if isinstance(expr.right, Num) and expr.right.value != 0:
                div = float(expr.right.value)
                return {d: c / div for d, c in left.items()}
            return None
        if expr.op == "**":
            base = _as_polynomial(expr.left, var)
            if base is None:
                return None
            if isinstance(expr.right, Num):
                exp = expr.right.value
                if isinstance(exp, float) and not exp.is_integer():
                    return None
                exp = int(exp)
                if exp < 0:
                    return None
                out = {0: 1.0}
                for _ in range(exp):
                    nxt: dict[int, float] = {}
                    for d1, c1 in out.items():
                        for d2, c2 in base.items():
                            nxt[d1 + d2] = nxt.get(d1 + d2, 0.0) + c1 * c2
                    out = nxt
                return out
            return None
    return None


def _as_exponential(expr: Expr, var: str) -> dict | None:
    """Match scale * base ** var (the scale possibly split across factors)."""
    factors: list[Expr] = []

    def collect(e: Expr) -> bool:
        if isinstance(e, BinOp) and e.op == "*":
            return collect(e.left) and collect(e.right)
        factors.append(e)
        return True

    if not collect(expr):
        return None
    scale = 1.0
    exp_part: dict | None = None
    for f in factors:
        if isinstance(f, Num):
            scale *= float(f.value)
            continue
        if isinstance(f, BinOp) and f.op == "**" and exp_part is None:
            base, exponent = f.left, f.right
            if isinstance(base, Num) and isinstance(exponent, Var) and exponent.name == var:
                exp_part = {"d": float(base.value), "operand": "exponent"}
                continue
        return None
    if exp_part is None:
        return None
    return {"a": scale, "d": exp_part["d"], "operand": exp_part["operand"]}


def classify_expression(expr: Expr, var: str) -> ExpressionForm:
    """Classify an arithmetic expression's shape as a function of `var`.

    Constant folding runs first. Expressions that do not match one of the
    families (or mention other free variables) come back as `other`.
    The classification is total: it never raises on well-formed expressions.
    """
    folded = fold_constants(expr)
    fv = free_variables(folded)
    if fv - {var}:
        return ExpressionForm(var, "other")
    if not fv:
        if isinstance(folded, Num):
            return ExpressionForm(var, "constant", {"value": float(folded.value)})
        return ExpressionForm(var, "other")

    poly = _as_polynomial(folded, var)
    if poly is not None:
        poly = {d: c for d, c in poly.items() if c != 0.0}
        degree = max(poly) if poly else 0
        if degree == 0:
            return ExpressionForm(var, "constant", {"value": poly.get(0, 0.0)})
        if degree == 1:
            return ExpressionForm(var, "linear",
                                  {"a": poly.get(1, 0.0), "b": poly.get(0, 0.0)})
        return ExpressionForm(var, "polynomial",
                              {"degree": degree, "a": poly[degree],
                               "b": poly.get(0, 0.0)})

    expo = _as_exponential(folded, var)
    if expo is not None:
        return ExpressionForm(var, "exponential", {"a": expo["a"], "d": expo["d"]},
                              variable_operand=expo["operand"])
    return ExpressionForm(var, "other")
