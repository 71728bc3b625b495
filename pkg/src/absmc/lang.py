"""The mini imperative language under analysis.

C-flavored surface syntax:

    program  := "{" decl* stmt* "}" | decl* stmt*
    decl     := ("int" | "double") ident ("," ident)* ";"
    stmt     := ident ("=" | "+=" | "-=") expr ";"
              | ident ("++" | "--") ";"
              | "know" "(" bexpr ")" ";"
              | "if" "(" bexpr ")" block ["else" block]
              | "while" "(" bexpr ")" block
              | block
    block    := "{" stmt* "}"
    expr     := term (("+" | "-") term)*
    term     := factor ("*" factor)*          # one factor must be a literal
    factor   := number | ident | "coin_flip" "(" ")" | "uniform" "(" ")"
              | "-" number | "(" expr ")"
    bexpr    := band ("||" band)*
    band     := batom ("&&" batom)*
    batom    := expr relop expr | "(" bexpr ")"
    relop    := "<" | "<=" | ">" | ">=" | "==" | "!="

Comments are ``/* ... */``.  Integer and real arithmetic never mix inside
one expression; ``coin_flip()`` is an integer generator over {0, 1} and
``uniform()`` a real generator over [0, 1].  ``++``/``--`` desugar to
``+= 1`` / ``-= 1`` of the variable's kind.

The last top-level ``know`` of a source file states the outcome event
whose probability is being bounded; every other ``know`` is an assumption
constraining otherwise unspecified variables.  An explicit query can
replace the outcome, in which case the source's outcome ``know`` is
dropped.

Every statement and generator occurrence carries an integer site
identifier assigned in source order, so re-parsing identical text
reproduces identical sites.  Programs are immutable after construction
and safe to share between threads and processes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Kind(enum.Enum):
    """Scalar kind of a variable or expression."""

    INT = "int"
    REAL = "double"


class LangError(Exception):
    """Syntax or validation error, with a source position when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


_NOPOS = (0, 0)


# ---------------------------------------------------------------------------
# AST
#
# Positions are carried for diagnostics but excluded from equality so that
# structurally identical programs compare equal regardless of layout.
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Expr:
    pass


@dataclass(frozen=True, slots=True)
class IntLit(Expr):
    value: int
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class RealLit(Expr):
    value: float
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Add(Expr):
    left: Expr
    right: Expr
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Sub(Expr):
    left: Expr
    right: Expr
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class MulConst(Expr):
    """Multiplication by a literal coefficient; general products are not
    part of the language, which keeps interval arithmetic exact."""

    coeff: IntLit | RealLit
    expr: Expr
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class CoinFlip(Expr):
    """Random draw, uniform on {0, 1}.  Integer kind."""

    site: int = field(compare=False)
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Uniform(Expr):
    """Random draw, uniform on [0, 1].  Real kind."""

    site: int = field(compare=False)
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class BoolExpr:
    pass


RELOPS = ("<", "<=", ">", ">=", "==", "!=")


@dataclass(frozen=True, slots=True)
class Cmp(BoolExpr):
    left: Expr
    op: str
    right: Expr
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class And(BoolExpr):
    left: BoolExpr
    right: BoolExpr
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Or(BoolExpr):
    left: BoolExpr
    right: BoolExpr
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Stmt:
    pass


@dataclass(frozen=True, slots=True)
class Assign(Stmt):
    site: int = field(compare=False)
    name: str
    expr: Expr
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class AddAssign(Stmt):
    site: int = field(compare=False)
    name: str
    expr: Expr
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class SubAssign(Stmt):
    site: int = field(compare=False)
    name: str
    expr: Expr
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Know(Stmt):
    site: int = field(compare=False)
    cond: BoolExpr
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class If(Stmt):
    site: int = field(compare=False)
    cond: BoolExpr
    then: tuple[Stmt, ...]
    orelse: tuple[Stmt, ...]
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class While(Stmt):
    site: int = field(compare=False)
    cond: BoolExpr
    body: tuple[Stmt, ...]
    pos: tuple[int, int] = field(default=_NOPOS, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Program:
    declarations: tuple[tuple[str, Kind], ...]
    body: tuple[Stmt, ...]
    outcome: BoolExpr | None
    name: str = field(default="<program>", compare=False)

    def kinds(self) -> dict[str, Kind]:
        return dict(self.declarations)


@dataclass(frozen=True, slots=True)
class GeneratorSite:
    """One textual occurrence of a random generator."""

    ordinal: int  # 1-based, source order
    site: int
    coin: bool
    inside_loop: bool


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TWO_CHAR = ("<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "++", "--")
_ONE_CHAR = set("+-*<>=(){};,")
_KEYWORDS = ("int", "double", "know", "if", "else", "while", "coin_flip", "uniform")


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str  # IDENT | INT | REAL | PUNCT | EOF
    text: str
    value: object
    line: int
    col: int


def _tokenize(src: str) -> list[_Token]:
    toks: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c in " \t\r":
            i, col = i + 1, col + 1
            continue
        if src.startswith("/*", i):
            end = src.find("*/", i + 2)
            if end < 0:
                raise LangError("unterminated comment", line, col)
            skipped = src[i : end + 2]
            nl = skipped.count("\n")
            if nl:
                line += nl
                col = len(skipped) - skipped.rfind("\n")
            else:
                col += len(skipped)
            i = end + 2
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            text = src[i:j]
            toks.append(_Token("IDENT", text, text, line, col))
            col += j - i
            i = j
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            is_real = False
            while j < n and src[j].isdigit():
                j += 1
            if j < n and src[j] == ".":
                is_real = True
                j += 1
                while j < n and src[j].isdigit():
                    j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    is_real = True
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            text = src[i:j]
            if is_real:
                toks.append(_Token("REAL", text, float(text), line, col))
            else:
                toks.append(_Token("INT", text, int(text), line, col))
            col += j - i
            i = j
            continue
        two = src[i : i + 2]
        if two in _TWO_CHAR:
            toks.append(_Token("PUNCT", two, two, line, col))
            i, col = i + 2, col + 2
            continue
        if c in _ONE_CHAR:
            toks.append(_Token("PUNCT", c, c, line, col))
            i, col = i + 1, col + 1
            continue
        raise LangError(f"unexpected character {c!r}", line, col)
    toks.append(_Token("EOF", "", None, line, col))
    return toks


# ---------------------------------------------------------------------------
# Kind inference
# ---------------------------------------------------------------------------


def infer_kind(expr: Expr, kinds: dict[str, Kind]) -> Kind:
    """Kind of an expression, raising on undeclared variables or on mixed
    integer/real operands."""

    if isinstance(expr, IntLit):
        return Kind.INT
    if isinstance(expr, RealLit):
        return Kind.REAL
    if isinstance(expr, CoinFlip):
        return Kind.INT
    if isinstance(expr, Uniform):
        return Kind.REAL
    if isinstance(expr, Var):
        k = kinds.get(expr.name)
        if k is None:
            raise LangError(f"undeclared variable '{expr.name}'", *expr.pos)
        return k
    if isinstance(expr, (Add, Sub)):
        lk = infer_kind(expr.left, kinds)
        rk = infer_kind(expr.right, kinds)
        if lk is not rk:
            raise LangError("mixed integer and real operands", *expr.pos)
        return lk
    if isinstance(expr, MulConst):
        ck = infer_kind(expr.coeff, kinds)
        ek = infer_kind(expr.expr, kinds)
        if ck is not ek:
            raise LangError("mixed integer and real operands", *expr.pos)
        return ek
    raise LangError(f"unknown expression node {type(expr).__name__}")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[_Token], kinds: dict[str, Kind] | None = None):
        self._toks = tokens
        self._i = 0
        self._kinds: dict[str, Kind] = dict(kinds or {})
        self._order: list[tuple[str, Kind]] = []
        self._next_site = 1

    # token plumbing

    def _peek(self) -> _Token:
        return self._toks[self._i]

    def _advance(self) -> _Token:
        t = self._toks[self._i]
        self._i += 1
        return t

    def _accept(self, text: str) -> _Token | None:
        t = self._peek()
        if t.kind == "PUNCT" and t.text == text:
            return self._advance()
        return None

    def _expect(self, text: str) -> _Token:
        t = self._peek()
        if t.kind == "PUNCT" and t.text == text:
            return self._advance()
        raise LangError(f"expected '{text}', found {t.text!r}", t.line, t.col)

    def _accept_word(self, word: str) -> _Token | None:
        t = self._peek()
        if t.kind == "IDENT" and t.text == word:
            return self._advance()
        return None

    def _site(self) -> int:
        s = self._next_site
        self._next_site += 1
        return s

    # grammar

    def program(self) -> tuple[list[tuple[str, Kind]], list[Stmt]]:
        wrapped = self._accept("{") is not None
        while self._peek().kind == "IDENT" and self._peek().text in ("int", "double"):
            self._declaration()
        body: list[Stmt] = []
        while True:
            t = self._peek()
            if t.kind == "EOF":
                break
            if wrapped and t.kind == "PUNCT" and t.text == "}":
                break
            body.extend(self.statement())
        if wrapped:
            self._expect("}")
        t = self._peek()
        if t.kind != "EOF":
            raise LangError(f"unexpected trailing input {t.text!r}", t.line, t.col)
        return self._order, body

    def _declaration(self) -> None:
        kw = self._advance()
        kind = Kind.INT if kw.text == "int" else Kind.REAL
        while True:
            t = self._peek()
            if t.kind != "IDENT":
                raise LangError("expected variable name", t.line, t.col)
            self._advance()
            if t.text in _KEYWORDS:
                raise LangError(f"'{t.text}' is a reserved word", t.line, t.col)
            if t.text in self._kinds:
                raise LangError(f"duplicate declaration of '{t.text}'", t.line, t.col)
            self._kinds[t.text] = kind
            self._order.append((t.text, kind))
            if self._accept(","):
                continue
            self._expect(";")
            return

    def statement(self) -> list[Stmt]:
        t = self._peek()
        if t.kind == "PUNCT" and t.text == "{":
            return list(self._block())
        if t.kind == "IDENT" and t.text == "know":
            self._advance()
            self._expect("(")
            cond = self.bool_expr()
            self._expect(")")
            self._expect(";")
            return [Know(self._site(), cond, pos=(t.line, t.col))]
        if t.kind == "IDENT" and t.text == "if":
            self._advance()
            self._expect("(")
            cond = self.bool_expr()
            self._expect(")")
            then = self._block()
            orelse: tuple[Stmt, ...] = ()
            if self._accept_word("else"):
                orelse = self._block()
            return [If(self._site(), cond, then, orelse, pos=(t.line, t.col))]
        if t.kind == "IDENT" and t.text == "while":
            self._advance()
            self._expect("(")
            cond = self.bool_expr()
            self._expect(")")
            body = self._block()
            return [While(self._site(), cond, body, pos=(t.line, t.col))]
        if t.kind == "IDENT":
            return [self._assignment()]
        raise LangError(f"expected statement, found {t.text!r}", t.line, t.col)

    def _block(self) -> tuple[Stmt, ...]:
        self._expect("{")
        stmts: list[Stmt] = []
        while not (self._peek().kind == "PUNCT" and self._peek().text == "}"):
            if self._peek().kind == "EOF":
                t = self._peek()
                raise LangError("unterminated block", t.line, t.col)
            stmts.extend(self.statement())
        self._expect("}")
        return tuple(stmts)

    def _assignment(self) -> Stmt:
        name_tok = self._advance()
        name = name_tok.text
        kind = self._kinds.get(name)
        if kind is None:
            raise LangError(f"undeclared variable '{name}'", name_tok.line, name_tok.col)
        op = self._peek()
        pos = (name_tok.line, name_tok.col)
        if op.kind == "PUNCT" and op.text in ("++", "--"):
            self._advance()
            self._expect(";")
            one: Expr = IntLit(1, pos=pos) if kind is Kind.INT else RealLit(1.0, pos=pos)
            cls = AddAssign if op.text == "++" else SubAssign
            return cls(self._site(), name, one, pos=pos)
        if op.kind == "PUNCT" and op.text in ("=", "+=", "-="):
            self._advance()
            expr = self.expr()
            self._expect(";")
            ek = infer_kind(expr, self._kinds)
            if ek is not kind:
                raise LangError(
                    f"cannot assign {ek.value} expression to {kind.value} '{name}'",
                    op.line,
                    op.col,
                )
            cls = {"=": Assign, "+=": AddAssign, "-=": SubAssign}[op.text]
            return cls(self._site(), name, expr, pos=pos)
        raise LangError(f"expected assignment operator, found {op.text!r}", op.line, op.col)

    def bool_expr(self) -> BoolExpr:
        node = self._bool_and()
        while True:
            t = self._accept("||")
            if t is None:
                return node
            node = Or(node, self._bool_and(), pos=(t.line, t.col))

    def _bool_and(self) -> BoolExpr:
        node = self._bool_atom()
        while True:
            t = self._accept("&&")
            if t is None:
                return node
            node = And(node, self._bool_atom(), pos=(t.line, t.col))

    def _bool_atom(self) -> BoolExpr:
        # "(" may open either a boolean group or the arithmetic left-hand
        # side of a comparison; try the boolean reading first and back off.
        t = self._peek()
        if t.kind == "PUNCT" and t.text == "(":
            save = self._i
            sites = self._next_site
            try:
                self._advance()
                inner = self.bool_expr()
                self._expect(")")
                return inner
            except LangError:
                self._i = save
                self._next_site = sites
        return self._comparison()

    def _comparison(self) -> BoolExpr:
        left = self.expr()
        t = self._peek()
        if not (t.kind == "PUNCT" and t.text in RELOPS):
            raise LangError(f"expected comparison operator, found {t.text!r}", t.line, t.col)
        self._advance()
        right = self.expr()
        lk = infer_kind(left, self._kinds)
        rk = infer_kind(right, self._kinds)
        if lk is not rk:
            raise LangError("comparison mixes integer and real operands", t.line, t.col)
        return Cmp(left, t.text, right, pos=(t.line, t.col))

    def expr(self) -> Expr:
        node = self.term()
        while True:
            t = self._peek()
            if t.kind == "PUNCT" and t.text in ("+", "-"):
                self._advance()
                right = self.term()
                cls = Add if t.text == "+" else Sub
                node = cls(node, right, pos=(t.line, t.col))
            else:
                return node

    def term(self) -> Expr:
        node = self.factor()
        while True:
            t = self._accept("*")
            if t is None:
                return node
            rhs = self.factor()
            if isinstance(node, (IntLit, RealLit)):
                node = MulConst(node, rhs, pos=(t.line, t.col))
            elif isinstance(rhs, (IntLit, RealLit)):
                node = MulConst(rhs, node, pos=(t.line, t.col))
            else:
                raise LangError("multiplication requires a literal factor", t.line, t.col)

    def factor(self) -> Expr:
        t = self._peek()
        if t.kind == "PUNCT" and t.text == "-":
            self._advance()
            lit = self._peek()
            if lit.kind == "INT":
                self._advance()
                return IntLit(-lit.value, pos=(t.line, t.col))
            if lit.kind == "REAL":
                self._advance()
                return RealLit(-lit.value, pos=(t.line, t.col))
            raise LangError("'-' must precede a numeric literal", t.line, t.col)
        if t.kind == "INT":
            self._advance()
            return IntLit(t.value, pos=(t.line, t.col))
        if t.kind == "REAL":
            self._advance()
            return RealLit(t.value, pos=(t.line, t.col))
        if t.kind == "IDENT" and t.text in ("coin_flip", "uniform"):
            self._advance()
            self._expect("(")
            self._expect(")")
            site = self._site()
            if t.text == "coin_flip":
                return CoinFlip(site, pos=(t.line, t.col))
            return Uniform(site, pos=(t.line, t.col))
        if t.kind == "IDENT":
            if t.text not in self._kinds:
                raise LangError(f"undeclared variable '{t.text}'", t.line, t.col)
            self._advance()
            return Var(t.text, pos=(t.line, t.col))
        if t.kind == "PUNCT" and t.text == "(":
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        raise LangError(f"expected expression, found {t.text!r}", t.line, t.col)


def parse(source: str, *, name: str = "<program>", query: str | None = None) -> Program:
    """Parse and validate a program.

    The last top-level ``know`` becomes the outcome; with ``query`` given,
    the query expression becomes the outcome instead and the source's last
    top-level ``know`` (if any) is dropped.
    """

    parser = _Parser(_tokenize(source))
    order, body = parser.program()
    last_know = None
    for idx, stmt in enumerate(body):
        if isinstance(stmt, Know):
            last_know = idx
    if query is not None:
        outcome = parse_condition(query, dict(order))
        if last_know is not None:
            del body[last_know]
    else:
        if last_know is None:
            raise LangError("missing outcome: no top-level know(...) and no query")
        outcome = body[last_know].cond
        del body[last_know]
    program = Program(tuple(order), tuple(body), outcome, name=name)
    issues = validate(program)
    if issues:
        raise LangError("; ".join(issues))
    return program


def parse_condition(text: str, kinds: dict[str, Kind]) -> BoolExpr:
    """Parse a standalone boolean expression over already-declared variables."""

    parser = _Parser(_tokenize(text), kinds)
    cond = parser.bool_expr()
    t = parser._peek()
    if t.kind != "EOF":
        raise LangError(f"unexpected trailing input {t.text!r}", t.line, t.col)
    return cond


# ---------------------------------------------------------------------------
# Validation and traversal
# ---------------------------------------------------------------------------


def iter_stmts(stmts):
    """All statements, outer before inner."""

    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from iter_stmts(s.then)
            yield from iter_stmts(s.orelse)
        elif isinstance(s, While):
            yield from iter_stmts(s.body)


def iter_exprs(expr: Expr):
    yield expr
    if isinstance(expr, (Add, Sub)):
        yield from iter_exprs(expr.left)
        yield from iter_exprs(expr.right)
    elif isinstance(expr, MulConst):
        yield from iter_exprs(expr.coeff)
        yield from iter_exprs(expr.expr)


def iter_cond_exprs(cond: BoolExpr):
    if isinstance(cond, Cmp):
        yield from iter_exprs(cond.left)
        yield from iter_exprs(cond.right)
    elif isinstance(cond, (And, Or)):
        yield from iter_cond_exprs(cond.left)
        yield from iter_cond_exprs(cond.right)


def _stmt_exprs(stmt: Stmt):
    if isinstance(stmt, (Assign, AddAssign, SubAssign)):
        yield from iter_exprs(stmt.expr)
    elif isinstance(stmt, Know):
        yield from iter_cond_exprs(stmt.cond)
    elif isinstance(stmt, (If, While)):
        yield from iter_cond_exprs(stmt.cond)


def validate(program: Program) -> list[str]:
    """Check every structural invariant; returns human-readable diagnostics,
    empty when the program is well formed."""

    issues: list[str] = []
    seen: set[str] = set()
    for name, _ in program.declarations:
        if name in seen:
            issues.append(f"duplicate declaration of '{name}'")
        seen.add(name)
    kinds = program.kinds()

    def check_cond(cond: BoolExpr, where: str) -> None:
        if isinstance(cond, Cmp):
            try:
                lk = infer_kind(cond.left, kinds)
                rk = infer_kind(cond.right, kinds)
                if lk is not rk:
                    issues.append(f"{where}: comparison mixes integer and real operands")
            except LangError as e:
                issues.append(f"{where}: {e}")
        elif isinstance(cond, (And, Or)):
            check_cond(cond.left, where)
            check_cond(cond.right, where)
        else:
            issues.append(f"{where}: unknown condition node {type(cond).__name__}")

    sites: list[int] = []
    for stmt in iter_stmts(program.body):
        where = f"statement at site {stmt.site}"
        sites.append(stmt.site)
        if isinstance(stmt, (Assign, AddAssign, SubAssign)):
            if stmt.name not in kinds:
                issues.append(f"{where}: undeclared variable '{stmt.name}'")
                continue
            try:
                ek = infer_kind(stmt.expr, kinds)
                if ek is not kinds[stmt.name]:
                    issues.append(
                        f"{where}: cannot assign {ek.value} expression"
                        f" to {kinds[stmt.name].value} '{stmt.name}'"
                    )
            except LangError as e:
                issues.append(f"{where}: {e}")
        elif isinstance(stmt, Know):
            check_cond(stmt.cond, where)
        elif isinstance(stmt, (If, While)):
            check_cond(stmt.cond, where)
        for e in _stmt_exprs(stmt):
            if isinstance(e, (CoinFlip, Uniform)):
                sites.append(e.site)
    if program.outcome is None:
        issues.append("missing outcome")
    else:
        check_cond(program.outcome, "outcome")
    if len(sites) != len(set(sites)):
        issues.append("site identifiers are not unique")
    return issues


def generator_sites(program: Program) -> list[GeneratorSite]:
    """Generator occurrences in the executable body, in source order.

    Occurrences in the outcome expression are excluded: the outcome is a
    predicate on final states, never sampled.
    """

    found: list[GeneratorSite] = []

    def walk_stmts(stmts, in_loop: bool) -> None:
        for s in stmts:
            for e in _stmt_exprs(s):
                if isinstance(e, (CoinFlip, Uniform)):
                    found.append(
                        GeneratorSite(len(found) + 1, e.site, isinstance(e, CoinFlip), in_loop)
                    )
            if isinstance(s, If):
                walk_stmts(s.then, in_loop)
                walk_stmts(s.orelse, in_loop)
            elif isinstance(s, While):
                walk_stmts(s.body, True)

    walk_stmts(program.body, False)
    return found


# ---------------------------------------------------------------------------
# Canonical printing
# ---------------------------------------------------------------------------


def _expr_str(expr: Expr) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, RealLit):
        return repr(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, CoinFlip):
        return "coin_flip()"
    if isinstance(expr, Uniform):
        return "uniform()"
    if isinstance(expr, (Add, Sub)):
        op = "+" if isinstance(expr, Add) else "-"
        right = _expr_str(expr.right)
        if isinstance(expr.right, (Add, Sub)):
            right = f"({right})"
        return f"{_expr_str(expr.left)} {op} {right}"
    if isinstance(expr, MulConst):
        inner = _expr_str(expr.expr)
        if isinstance(expr.expr, (Add, Sub, MulConst)):
            inner = f"({inner})"
        return f"{_expr_str(expr.coeff)} * {inner}"
    raise LangError(f"unknown expression node {type(expr).__name__}")


def _bool_str(cond: BoolExpr) -> str:
    if isinstance(cond, Cmp):
        return f"{_expr_str(cond.left)} {cond.op} {_expr_str(cond.right)}"
    if isinstance(cond, And):
        parts = []
        for side in (cond.left, cond.right):
            s = _bool_str(side)
            if isinstance(side, Or):
                s = f"({s})"
            parts.append(s)
        return " && ".join(parts)
    if isinstance(cond, Or):
        return f"{_bool_str(cond.left)} || {_bool_str(cond.right)}"
    raise LangError(f"unknown condition node {type(cond).__name__}")


def _stmt_lines(stmt: Stmt, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(stmt, Assign):
        return [f"{pad}{stmt.name} = {_expr_str(stmt.expr)};"]
    if isinstance(stmt, AddAssign):
        return [f"{pad}{stmt.name} += {_expr_str(stmt.expr)};"]
    if isinstance(stmt, SubAssign):
        return [f"{pad}{stmt.name} -= {_expr_str(stmt.expr)};"]
    if isinstance(stmt, Know):
        return [f"{pad}know ({_bool_str(stmt.cond)});"]
    if isinstance(stmt, If):
        lines = [f"{pad}if ({_bool_str(stmt.cond)}) {{"]
        for s in stmt.then:
            lines.extend(_stmt_lines(s, indent + 1))
        if stmt.orelse:
            lines.append(f"{pad}}} else {{")
            for s in stmt.orelse:
                lines.extend(_stmt_lines(s, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(stmt, While):
        lines = [f"{pad}while ({_bool_str(stmt.cond)}) {{"]
        for s in stmt.body:
            lines.extend(_stmt_lines(s, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    raise LangError(f"unknown statement node {type(stmt).__name__}")


def to_source(program: Program) -> str:
    """Canonical text rendering; parsing it back yields an equal Program."""

    lines: list[str] = []
    group: list[str] = []
    group_kind: Kind | None = None
    for name, kind in program.declarations:
        if kind is group_kind:
            group.append(name)
        else:
            if group:
                lines.append(f"{group_kind.value} {', '.join(group)};")
            group, group_kind = [name], kind
    if group:
        lines.append(f"{group_kind.value} {', '.join(group)};")
    for stmt in program.body:
        lines.extend(_stmt_lines(stmt, 0))
    if program.outcome is not None:
        lines.append(f"know ({_bool_str(program.outcome)});")
    return "\n".join(lines) + "\n"
