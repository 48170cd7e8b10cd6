"""Lexer, AST and recursive-descent parser for the Lua-like analysis language."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

KEYWORDS = frozenset(
    {
        "and", "do", "else", "elseif", "end", "false", "function", "if",
        "local", "nil", "not", "or", "return", "then", "true", "while",
    }
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<blockcomment>--\[\[.*?\]\])
  | (?P<comment>--[^\n]*)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<string>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>::|\.\.|==|~=|<=|>=|[-+*/=<>.,;(){}\#])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # name, keyword, number, string, op, eof
    value: str
    line: int


class ParseError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(message)
        self.message = message
        self.line = line


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line = 1
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text.startswith("--[[", pos):
                raise ParseError("unterminated block comment", line)
            ch = text[pos]
            if ch in "\"'":
                raise ParseError("unterminated string", line)
            raise ParseError(f"unexpected character {ch!r}", line)
        kind = m.lastgroup
        value = m.group()
        if kind == "newline":
            line += 1
        elif kind == "blockcomment":
            line += value.count("\n")
        elif kind in ("ws", "comment"):
            pass
        elif kind == "name" and value in KEYWORDS:
            tokens.append(Token("keyword", value, line))
        else:
            tokens.append(Token(kind, value, line))
        pos = m.end()
    tokens.append(Token("eof", "", line))
    return tokens


# -- AST ---------------------------------------------------------------------


@dataclass(eq=False)
class Node:
    line: int
    end_line: int


@dataclass(eq=False)
class Nil(Node):
    pass


@dataclass(eq=False)
class Bool(Node):
    value: bool


@dataclass(eq=False)
class Number(Node):
    value: str


@dataclass(eq=False)
class String(Node):
    value: str


@dataclass(eq=False)
class Name(Node):
    name: str


@dataclass(eq=False)
class Field(Node):
    obj: Node
    name: str


@dataclass(eq=False)
class Call(Node):
    fn: Node
    args: list


@dataclass(eq=False)
class Binary(Node):
    op: str
    left: Node
    right: Node


@dataclass(eq=False)
class Unary(Node):
    op: str
    operand: Node


@dataclass(eq=False)
class TableLit(Node):
    fields: list  # (name, expr)
    items: list  # positional exprs


@dataclass(eq=False)
class FunctionExpr(Node):
    params: list
    body: list
    name: str = "function"


@dataclass(eq=False)
class Cast(Node):
    expr: Node
    type_name: str


@dataclass(eq=False)
class Local(Node):
    names: list
    exprs: list


@dataclass(eq=False)
class LocalFunction(Node):
    name: str
    func: FunctionExpr


@dataclass(eq=False)
class FunctionDecl(Node):
    target: Node  # Name or Field
    func: FunctionExpr


@dataclass(eq=False)
class Assign(Node):
    targets: list
    exprs: list


@dataclass(eq=False)
class CallStmt(Node):
    call: Call


@dataclass(eq=False)
class If(Node):
    branches: list  # (cond, block)
    orelse: Optional[list] = None


@dataclass(eq=False)
class While(Node):
    cond: Node
    body: list


@dataclass(eq=False)
class Return(Node):
    exprs: list


@dataclass
class Chunk:
    body: list = field(default_factory=list)
    n_lines: int = 0


CAST_TYPES = frozenset({"any", "number", "string", "boolean", "nil"})

_BINARY_PRIORITY = {
    "or": (1, 1),
    "and": (2, 2),
    "<": (3, 3), ">": (3, 3), "<=": (3, 3), ">=": (3, 3), "~=": (3, 3), "==": (3, 3),
    "..": (5, 4),  # right associative
    "+": (6, 6), "-": (6, 6),
    "*": (7, 7), "/": (7, 7),
}
_UNARY_PRIORITY = 8


MAX_NESTING = 150


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    def _enter(self) -> None:
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise ParseError("nesting exceeds parser limit", self.tok.line)

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def check(self, value: str) -> bool:
        tok = self.tok
        return tok.kind in ("keyword", "op") and tok.value == value

    def accept(self, value: str) -> Optional[Token]:
        if self.check(value):
            return self.advance()
        return None

    def expect(self, value: str, opener: Optional[Token] = None) -> Token:
        if self.check(value):
            return self.advance()
        got = self.tok.value or "<eof>"
        msg = f"expected '{value}' near '{got}'"
        if opener is not None:
            msg += f" (to close '{opener.value}' at line {opener.line})"
        raise ParseError(msg, self.tok.line)

    def expect_name(self) -> Token:
        if self.tok.kind != "name":
            raise ParseError(f"expected identifier near '{self.tok.value or '<eof>'}'", self.tok.line)
        return self.advance()

    @property
    def prev_line(self) -> int:
        return self.tokens[self.pos - 1].line if self.pos else 1

    # blocks and statements
    def chunk(self) -> list:
        body = self.block()
        if self.tok.kind != "eof":
            raise ParseError(f"unexpected '{self.tok.value}'", self.tok.line)
        return body

    def block(self) -> list:
        stmts = []
        while True:
            tok = self.tok
            if tok.kind == "eof" or (tok.kind == "keyword" and tok.value in ("end", "else", "elseif")):
                return stmts
            stmt = self.statement()
            if stmt is not None:
                stmts.append(stmt)

    def statement(self):
        self._enter()
        try:
            return self._statement()
        finally:
            self.depth -= 1

    def _statement(self):
        tok = self.tok
        if self.accept(";"):
            return None
        if tok.kind == "keyword":
            if tok.value == "local":
                return self.local_stmt()
            if tok.value == "function":
                return self.function_decl()
            if tok.value == "if":
                return self.if_stmt()
            if tok.value == "while":
                return self.while_stmt()
            if tok.value == "return":
                self.advance()
                exprs = []
                if not self._block_end() and not self.check(";"):
                    exprs = self.expr_list()
                return Return(tok.line, self.prev_line, exprs)
        return self.expr_stmt()

    def _block_end(self) -> bool:
        tok = self.tok
        return tok.kind == "eof" or (tok.kind == "keyword" and tok.value in ("end", "else", "elseif"))

    def local_stmt(self):
        start = self.advance()
        if self.accept("function"):
            name = self.expect_name()
            func = self.funcbody(start, name.value)
            return LocalFunction(start.line, func.end_line, name.value, func)
        names = [self.expect_name().value]
        while self.accept(","):
            names.append(self.expect_name().value)
        exprs = []
        if self.accept("="):
            exprs = self.expr_list()
        return Local(start.line, self.prev_line, names, exprs)

    def function_decl(self):
        start = self.advance()
        first = self.expect_name()
        target: Node = Name(first.line, first.line, first.value)
        label = first.value
        while self.accept("."):
            part = self.expect_name()
            target = Field(first.line, part.line, target, part.value)
            label += "." + part.value
        func = self.funcbody(start, label)
        return FunctionDecl(start.line, func.end_line, target, func)

    def funcbody(self, opener: Token, name: str) -> FunctionExpr:
        self.expect("(")
        params = []
        if not self.check(")"):
            params.append(self.expect_name().value)
            while self.accept(","):
                params.append(self.expect_name().value)
        self.expect(")")
        body = self.block()
        end = self.expect("end", opener)
        return FunctionExpr(opener.line, end.line, params, body, name)

    def if_stmt(self):
        start = self.advance()
        branches = []
        cond = self.expr()
        self.expect("then")
        branches.append((cond, self.block()))
        orelse = None
        while True:
            if self.accept("elseif"):
                cond = self.expr()
                self.expect("then")
                branches.append((cond, self.block()))
                continue
            if self.accept("else"):
                orelse = self.block()
            break
        end = self.expect("end", start)
        return If(start.line, end.line, branches, orelse)

    def while_stmt(self):
        start = self.advance()
        cond = self.expr()
        self.expect("do")
        body = self.block()
        end = self.expect("end", start)
        return While(start.line, end.line, cond, body)

    def expr_stmt(self):
        first = self.suffixed()
        if self.check("=") or self.check(","):
            targets = [first]
            while self.accept(","):
                targets.append(self.suffixed())
            for t in targets:
                if not isinstance(t, (Name, Field)):
                    raise ParseError("cannot assign to this expression", t.line)
            self.expect("=")
            exprs = self.expr_list()
            return Assign(first.line, self.prev_line, targets, exprs)
        if not isinstance(first, Call):
            raise ParseError("syntax error near '%s'" % (self.tok.value or "<eof>"), self.tok.line)
        return CallStmt(first.line, first.end_line, first)

    # expressions
    def expr_list(self) -> list:
        exprs = [self.expr()]
        while self.accept(","):
            exprs.append(self.expr())
        return exprs

    def expr(self, limit: int = 0) -> Node:
        self._enter()
        try:
            return self._expr(limit)
        finally:
            self.depth -= 1

    def _expr(self, limit: int) -> Node:
        tok = self.tok
        if (tok.kind == "keyword" and tok.value == "not") or (tok.kind == "op" and tok.value in ("-", "#")):
            self.advance()
            operand = self.expr(_UNARY_PRIORITY)
            left: Node = Unary(tok.line, operand.end_line, tok.value, operand)
        else:
            left = self.simple()
        while True:
            tok = self.tok
            if tok.kind not in ("op", "keyword") or tok.value not in _BINARY_PRIORITY:
                return left
            lprio, rprio = _BINARY_PRIORITY[tok.value]
            if lprio <= limit:
                return left
            self.advance()
            right = self.expr(rprio)
            left = Binary(left.line, right.end_line, tok.value, left, right)

    def simple(self) -> Node:
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return Number(tok.line, tok.line, tok.value)
        if tok.kind == "string":
            self.advance()
            return String(tok.line, tok.line, tok.value[1:-1])
        if tok.kind == "keyword":
            if tok.value == "nil":
                self.advance()
                return Nil(tok.line, tok.line)
            if tok.value in ("true", "false"):
                self.advance()
                return Bool(tok.line, tok.line, tok.value == "true")
            if tok.value == "function":
                self.advance()
                return self.funcbody(tok, "function")
        if tok.kind == "op" and tok.value == "{":
            return self.table()
        return self.suffixed()

    def primary(self) -> Node:
        tok = self.tok
        if tok.kind == "name":
            self.advance()
            return Name(tok.line, tok.line, tok.value)
        if self.check("("):
            self.advance()
            inner = self.expr()
            if self.accept("::"):
                tname = self.tok
                if tname.kind not in ("name", "keyword") or tname.value not in CAST_TYPES:
                    raise ParseError(f"unknown type near '{tname.value or '<eof>'}'", tname.line)
                self.advance()
                inner = Cast(tok.line, tname.line, inner, tname.value)
            close = self.expect(")", tok)
            if isinstance(inner, Cast):
                inner.end_line = close.line
            return inner
        raise ParseError(f"unexpected symbol near '{tok.value or '<eof>'}'", tok.line)

    def suffixed(self) -> Node:
        node = self.primary()
        while True:
            if self.accept("."):
                name = self.expect_name()
                node = Field(node.line, name.line, node, name.value)
            elif self.check("("):
                self.advance()
                args = []
                if not self.check(")"):
                    args = self.expr_list()
                close = self.expect(")")
                node = Call(node.line, close.line, node, args)
            else:
                return node

    def table(self) -> TableLit:
        start = self.expect("{")
        fields = []
        items = []
        while not self.check("}"):
            if self.tok.kind == "name" and self.tokens[self.pos + 1].value == "=" and self.tokens[self.pos + 1].kind == "op":
                key = self.advance().value
                self.advance()
                fields.append((key, self.expr()))
            else:
                items.append(self.expr())
            if not (self.accept(",") or self.accept(";")):
                break
        end = self.expect("}", start)
        return TableLit(start.line, end.line, fields, items)


def parse(text: str) -> Chunk:
    """Parse source text. Raises :class:`ParseError` at the first unrecoverable point."""
    tokens = tokenize(text)
    body = Parser(tokens).chunk()
    return Chunk(body, text.count("\n") + 1 if text else 0)


PRAGMA_RE = re.compile(r"^\s*--!(nocheck|nonstrict|strict)\b")


def pragma_mode(first_line: str) -> Optional[str]:
    m = PRAGMA_RE.match(first_line)
    return m.group(1) if m else None
