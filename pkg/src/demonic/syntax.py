"""Abstract syntax, concrete grammar, parser and pretty-printer.

Concrete grammar::

    program  ::= { NAME "=" stmt } [ stmt ]
    stmt     ::= unit { ";" stmt }                 (right-associative)
    unit     ::= assigns
               | "skip" | NAME
               | "if" bexp "then" unit "else" unit
               | "[" stmt "]" "(+)" "[" stmt "]"
               | "(" stmt ")"
    assigns  ::= assign { "and" assign }            (desugars to ";")
    assign   ::= "s." FIELD ":=" value | "(" assign ")"
    value    ::= "0" | "1/2" | "1" | "true" | "false" | "w" ("+"|"-") INT | INT
    bexp     ::= conj { "or" conj }
    conj     ::= neg { "and" neg }
    neg      ::= ("not" | "¬") neg | batom
    batom    ::= "true" | "false" | "s.A" | "s.I"
               | "s.A" "=" BOOL | "s.I" "=" BOOL | "s.X" "=" XLIT | "(" bexp ")"

Comments run from ``#`` to end of line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from .thermo import HALF, ONE, PARTICLE_PROBS, ZERO


class DemonicSyntaxError(Exception):
    """Parse or static-check failure, with 1-based line/column."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


class UndefinedMacro(DemonicSyntaxError):
    pass


# -- boolean expressions ----------------------------------------------------

@dataclass(frozen=True)
class Lit:
    value: bool


@dataclass(frozen=True)
class FieldA:
    pass


@dataclass(frozen=True)
class FieldI:
    pass


@dataclass(frozen=True)
class XEquals:
    value: Fraction


@dataclass(frozen=True)
class Not:
    arg: "BExp"


@dataclass(frozen=True)
class Or:
    left: "BExp"
    right: "BExp"


@dataclass(frozen=True)
class And:
    left: "BExp"
    right: "BExp"


BExp = Union[Lit, FieldA, FieldI, XEquals, Not, Or, And]


def eval_bexp(b: BExp, s) -> bool:
    if isinstance(b, Lit):
        return b.value
    if isinstance(b, FieldA):
        return s.A
    if isinstance(b, FieldI):
        return s.I
    if isinstance(b, XEquals):
        return s.X == b.value
    if isinstance(b, Not):
        return not eval_bexp(b.arg, s)
    if isinstance(b, Or):
        return eval_bexp(b.left, s) or eval_bexp(b.right, s)
    if isinstance(b, And):
        return eval_bexp(b.left, s) and eval_bexp(b.right, s)
    raise TypeError(f"not a boolean expression: {b!r}")


# -- statements -------------------------------------------------------------

@dataclass(frozen=True)
class WOffset:
    """``w + offset``."""
    offset: int


@dataclass(frozen=True)
class WLiteral:
    """Absolute work value (not representable by the w-offset abstraction)."""
    value: int


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    field: str
    value: object  # Fraction for X, bool for A/I, WOffset | WLiteral for w

    def __post_init__(self):
        check_assign(self.field, self.value)


@dataclass(frozen=True)
class Seq:
    first: "Statement"
    second: "Statement"


@dataclass(frozen=True)
class If:
    cond: BExp
    then: "Statement"
    orelse: "Statement"


@dataclass(frozen=True)
class Prob:
    left: "Statement"
    right: "Statement"


@dataclass(frozen=True)
class Ref:
    """Reference to a named definition (prelude or program macro)."""
    name: str


Statement = Union[Skip, Assign, Seq, If, Prob, Ref]

SKIP = Skip()
FIELDS = ("X", "A", "I", "w")


def check_assign(field: str, value) -> None:
    if field == "X":
        ok = isinstance(value, Fraction) and value in PARTICLE_PROBS
    elif field in ("A", "I"):
        ok = isinstance(value, bool)
    elif field == "w":
        ok = isinstance(value, (WOffset, WLiteral))
    else:
        raise DemonicSyntaxError(f"unknown field {field!r}")
    if not ok:
        raise DemonicSyntaxError(f"ill-typed assignment s.{field} := {value!r}")


def seq(*stmts: Statement) -> Statement:
    """Right-nested sequence; ``seq()`` is skip."""
    if not stmts:
        return SKIP
    out = stmts[-1]
    for s in reversed(stmts[:-1]):
        out = Seq(s, out)
    return out


def flatten_seq(stmt: Statement) -> list[Statement]:
    """Top-level units of a (right- or left-nested) sequence."""
    if isinstance(stmt, Seq):
        return flatten_seq(stmt.first) + flatten_seq(stmt.second)
    if isinstance(stmt, Skip):
        return []
    return [stmt]


@dataclass(frozen=True)
class Program:
    definitions: tuple[tuple[str, Statement], ...] = ()
    main: Statement | None = None

    def env(self) -> dict[str, Statement]:
        return dict(self.definitions)


# -- tokenizer --------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<oplus>\(\+\)|⊕)
  | (?P<assign>:=)
  | (?P<field>s\.[A-Za-z_]\w*)
  | (?P<frac>\d+/\d+)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_]\w*)
  | (?P<punct>[;()\[\]=+\-¬])
    """,
    re.VERBOSE,
)

KEYWORDS = {"skip", "if", "then", "else", "true", "false", "not", "or", "and", "s", "w"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise DemonicSyntaxError(f"unexpected character {text[pos]!r}",
                                     line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tok = m.group()
            if kind == "name" and tok in KEYWORDS:
                kind = "kw"
            elif kind == "punct" and tok == "¬":
                kind, tok = "kw", "not"
            elif kind == "oplus":
                tok = "(+)"
            toks.append(Token(kind, tok, line, col))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


# -- parser -----------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind in ("kw", "punct", "oplus", "assign") and t.text == text

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek()
        found = tok.text or "end of input"
        return DemonicSyntaxError(f"{msg} (found {found!r})", tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.next()

    def at_definition(self) -> bool:
        return self.peek().kind == "name" and self.at("=", 1)

    # program
    def program(self) -> Program:
        defs: list[tuple[str, Statement]] = []
        seen: set[str] = set()
        main = None
        while self.peek().kind != "eof":
            if self.at_definition():
                name_tok = self.next()
                self.next()
                if name_tok.text in seen:
                    raise self.error(f"duplicate definition {name_tok.text!r}", name_tok)
                body = self.stmt()
                defs.append((name_tok.text, body))
                seen.add(name_tok.text)
            else:
                if main is not None:
                    raise self.error("only one main statement is allowed")
                main = self.stmt()
                if self.peek().kind != "eof" and not self.at_definition():
                    raise self.error("unexpected token")
        return Program(tuple(defs), main)

    def stmt(self) -> Statement:
        first = self.unit()
        if self.at(";"):
            self.next()
            if self.at_definition():
                raise self.error("definition cannot follow ';'")
            return Seq(first, self.stmt())
        return first

    def unit(self) -> Statement:
        t = self.peek()
        if t.kind == "field":
            return self.assigns()
        if self.at("skip"):
            self.next()
            return SKIP
        if t.kind == "name":
            self.next()
            return Ref(t.text)
        if self.at("if"):
            self.next()
            cond = self.bexp()
            self.expect("then")
            then = self.unit()
            self.expect("else")
            return If(cond, then, self.unit())
        if self.at("["):
            self.next()
            left = self.stmt()
            self.expect("]")
            self.expect("(+)")
            self.expect("[")
            right = self.stmt()
            self.expect("]")
            return Prob(left, right)
        if self.at("("):
            start = self.next()
            inner = self.stmt()
            self.expect(")")
            if isinstance(inner, Assign) and self.at("and"):
                return self.assigns(inner, start)
            return inner
        raise self.error("expected a statement")

    def assigns(self, first: Assign | None = None, start: Token | None = None) -> Statement:
        start = start or self.peek()
        group = [first or self.assign()]
        while self.at("and"):
            self.next()
            group.append(self.assign())
        fields = [a.field for a in group]
        dup = {f for f in fields if fields.count(f) > 1}
        if dup:
            raise self.error(f"'and' group assigns s.{sorted(dup)[0]} twice", start)
        return seq(*group)

    def assign(self) -> Assign:
        if self.at("("):
            self.next()
            a = self.assign()
            self.expect(")")
            return a
        tok = self.next()
        if tok.kind != "field":
            raise self.error("expected an assignment 's.<field> := ...'", tok)
        field = tok.text[2:]
        if field not in FIELDS:
            raise DemonicSyntaxError(f"unknown field name {field!r}", tok.line, tok.col)
        self.expect(":=")
        vtok = self.peek()
        value = self.value(field)
        try:
            return Assign(field, value)
        except DemonicSyntaxError as e:
            raise DemonicSyntaxError(str(e), vtok.line, vtok.col) from None

    def value(self, field: str):
        t = self.peek()
        if field == "w":
            if self.at("w"):
                self.next()
                if self.at("+") or self.at("-"):
                    sign = 1 if self.next().text == "+" else -1
                    return WOffset(sign * self.integer())
                raise self.error("expected '+' or '-' after 'w'")
            sign = 1
            if self.at("-"):
                self.next()
                sign = -1
            if self.peek().kind != "int":
                raise self.error("ill-typed value for s.w")
            return WLiteral(sign * self.integer())
        if field == "X":
            if t.kind == "frac" and t.text == "1/2":
                self.next()
                return HALF
            if t.kind == "int" and t.text in ("0", "1"):
                self.next()
                return ONE if t.text == "1" else ZERO
            raise self.error("ill-typed value for s.X (expected 0, 1/2 or 1)")
        if self.at("true") or self.at("false"):
            return self.next().text == "true"
        raise self.error(f"ill-typed value for s.{field} (expected true or false)")

    def integer(self) -> int:
        t = self.next()
        if t.kind != "int":
            raise self.error("expected an integer", t)
        return int(t.text)

    # boolean expressions
    def bexp(self) -> BExp:
        left = self.conj()
        while self.at("or"):
            self.next()
            left = Or(left, self.conj())
        return left

    def conj(self) -> BExp:
        left = self.neg()
        while self.at("and"):
            self.next()
            left = And(left, self.neg())
        return left

    def neg(self) -> BExp:
        if self.at("not"):
            self.next()
            return Not(self.neg())
        return self.batom()

    def batom(self) -> BExp:
        t = self.peek()
        if self.at("true") or self.at("false"):
            return Lit(self.next().text == "true")
        if self.at("("):
            self.next()
            b = self.bexp()
            self.expect(")")
            return b
        if t.kind == "field":
            self.next()
            field = t.text[2:]
            if field in ("A", "I"):
                node = FieldA() if field == "A" else FieldI()
                if self.at("="):
                    self.next()
                    if not (self.at("true") or self.at("false")):
                        raise self.error(f"s.{field} compares with true/false")
                    if self.next().text == "false":
                        return Not(node)
                return node
            if field == "X":
                self.expect("=")
                v = self.peek()
                if (v.kind, v.text) in (("int", "0"), ("int", "1"), ("frac", "1/2")):
                    self.next()
                    return XEquals(Fraction(v.text))
                raise self.error("s.X compares with 0, 1/2 or 1")
            raise DemonicSyntaxError(f"unknown field name {field!r}", t.line, t.col)
        raise self.error("expected a boolean expression")


def parse(text: str, *, env: Mapping[str, Statement] | None = None) -> Program:
    """Parse a program.  References are kept as :class:`Ref` nodes.

    Definitions may only refer to earlier definitions or to names in
    ``env`` (typically the prelude).
    """
    p = _Parser(text)
    prog = p.program()
    names = [name for name, _ in prog.definitions]
    known = set(env or ())
    for i, (name, body) in enumerate(prog.definitions):
        for r in refs(body):
            if r in names[i:]:
                raise DemonicSyntaxError(f"{name} refers to itself or a later definition {r!r}")
            if env is not None and r not in known:
                raise UndefinedMacro(f"reference to undefined macro {r!r} in {name}")
        known.add(name)
    if env is not None and prog.main is not None:
        for r in refs(prog.main):
            if r not in known:
                raise UndefinedMacro(f"reference to undefined macro {r!r}")
    return prog


def parse_statement(text: str) -> Statement:
    prog = parse(text)
    if prog.definitions or prog.main is None:
        raise DemonicSyntaxError("expected a single statement")
    return prog.main


def refs(stmt: Statement) -> set[str]:
    if isinstance(stmt, Ref):
        return {stmt.name}
    if isinstance(stmt, (Seq, Prob)):
        a, b = (stmt.first, stmt.second) if isinstance(stmt, Seq) else (stmt.left, stmt.right)
        return refs(a) | refs(b)
    if isinstance(stmt, If):
        return refs(stmt.then) | refs(stmt.orelse)
    return set()


# -- expansion --------------------------------------------------------------

def expand(p: Program | Statement, env: Mapping[str, Statement] | None = None) -> Statement:
    """Inline every reference, yielding a macro-free statement."""
    if not isinstance(p, Program):
        p = Program((), p)
    scope = dict(env or {})
    for name, body in p.definitions:
        scope[name] = _inline(body, scope, ())
    if p.main is None:
        raise DemonicSyntaxError("program has no main statement")
    return _inline(p.main, scope, ())


def _inline(stmt: Statement, scope, stack) -> Statement:
    if isinstance(stmt, Ref):
        if stmt.name not in scope:
            raise UndefinedMacro(f"undefined macro {stmt.name!r}")
        if stmt.name in stack:
            raise DemonicSyntaxError(f"recursive macro {stmt.name!r}")
        return _inline(scope[stmt.name], scope, stack + (stmt.name,))
    if isinstance(stmt, Seq):
        return Seq(_inline(stmt.first, scope, stack), _inline(stmt.second, scope, stack))
    if isinstance(stmt, Prob):
        return Prob(_inline(stmt.left, scope, stack), _inline(stmt.right, scope, stack))
    if isinstance(stmt, If):
        return If(stmt.cond, _inline(stmt.then, scope, stack), _inline(stmt.orelse, scope, stack))
    return stmt


def fold_names(stmt: Statement, named: Mapping[str, Statement]) -> Statement:
    """Replace subtrees equal to a named (expanded) definition by a reference.

    Used only for display; larger definitions win over smaller ones.
    """
    by_tree: dict[Statement, str] = {}
    for name, body in named.items():
        by_tree.setdefault(body, name)
    return _fold(stmt, by_tree)


def _fold(stmt, by_tree):
    if stmt in by_tree:
        return Ref(by_tree[stmt])
    if isinstance(stmt, Seq):
        # a named sequence may sit as a prefix of a longer right-nested chain
        units = flatten_seq(stmt)
        for n in range(len(units), 1, -1):
            head = seq(*units[:n])
            if head in by_tree:
                rest = units[n:]
                folded = Ref(by_tree[head])
                return folded if not rest else Seq(folded, _fold(seq(*rest), by_tree))
        return Seq(_fold(stmt.first, by_tree), _fold(stmt.second, by_tree))
    if isinstance(stmt, Prob):
        return Prob(_fold(stmt.left, by_tree), _fold(stmt.right, by_tree))
    if isinstance(stmt, If):
        return If(stmt.cond, _fold(stmt.then, by_tree), _fold(stmt.orelse, by_tree))
    return stmt


# -- pretty-printer ---------------------------------------------------------

_PREC = {Or: 1, And: 2, Not: 3}


def pretty_bexp(b: BExp) -> str:
    if isinstance(b, Lit):
        return "true" if b.value else "false"
    if isinstance(b, FieldA):
        return "s.A"
    if isinstance(b, FieldI):
        return "s.I"
    if isinstance(b, XEquals):
        return f"s.X = {b.value}"
    if isinstance(b, Not):
        return "not " + _wrap(b.arg, 3, strict=False)
    word = "or" if isinstance(b, Or) else "and"
    prec = _PREC[type(b)]
    return f"{_wrap(b.left, prec, strict=False)} {word} {_wrap(b.right, prec, strict=True)}"


def _wrap(b: BExp, prec: int, strict: bool) -> str:
    inner = _PREC.get(type(b), 4)
    if isinstance(b, XEquals):
        inner = 3.5  # "not s.X = 1" would read fine, but parenthesise for clarity
    text = pretty_bexp(b)
    if inner < prec or (strict and inner == prec):
        return f"({text})"
    if isinstance(b, XEquals) and prec == 3:
        return f"({text})"
    return text


def pretty_value(field: str, value) -> str:
    if field == "X":
        return str(value)
    if field in ("A", "I"):
        return "true" if value else "false"
    if isinstance(value, WOffset):
        op = "+" if value.offset >= 0 else "-"
        return f"w {op} {abs(value.offset)}"
    return str(value.value)


def pretty_stmt(stmt: Statement) -> str:
    if isinstance(stmt, Skip):
        return "skip"
    if isinstance(stmt, Ref):
        return stmt.name
    if isinstance(stmt, Assign):
        return f"s.{stmt.field} := {pretty_value(stmt.field, stmt.value)}"
    if isinstance(stmt, Seq):
        first = pretty_stmt(stmt.first)
        if isinstance(stmt.first, Seq):
            first = f"({first})"
        return f"{first} ; {pretty_stmt(stmt.second)}"
    if isinstance(stmt, If):
        return (f"if {pretty_bexp(stmt.cond)} then {_unit(stmt.then)} "
                f"else {_unit(stmt.orelse)}")
    if isinstance(stmt, Prob):
        return f"[{pretty_stmt(stmt.left)}] (+) [{pretty_stmt(stmt.right)}]"
    raise TypeError(f"not a statement: {stmt!r}")


def _unit(stmt: Statement) -> str:
    text = pretty_stmt(stmt)
    return f"({text})" if isinstance(stmt, Seq) else text


def pretty(p: Program | Statement) -> str:
    """Canonical text; ``parse(pretty(p)) == p``."""
    if not isinstance(p, Program):
        return pretty_stmt(p)
    lines = [f"{name} = {pretty_stmt(body)}" for name, body in p.definitions]
    if p.main is not None:
        lines.append(pretty_stmt(p.main))
    return "\n".join(lines)
