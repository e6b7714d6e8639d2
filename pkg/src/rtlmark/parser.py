"""Recursive-descent parser for the synthesizable Verilog-2005 subset.

Supported constructs:
  - Module declarations with ANSI ports and #(parameter ...) headers
  - parameter / localparam (header and item position), with optional ranges
  - wire / reg declarations with packed ranges and optional wire init
  - assign (continuous assignment, possibly comma-chained)
  - always @(edge list), always @* / @(*)
  - begin/end (optionally named), if/else, case, blocking/non-blocking assigns
  - Module instantiation, positional or named, with parameter overrides
  - Expressions: unary/binary/ternary operators, concatenation, replication,
    bit-select, part-select, numeric literals in 4 bases with separators

Out-of-subset constructs (generate, functions, initial blocks, casex/casez,
signed arithmetic, unpacked arrays, preprocessor directives, ...) raise
ParseError: such a document cannot be watermarked and must be reported.

Comments are first-class trivia: each is attached to the following
declaration/statement (own-line comments) or to the construct ending on its
line (trailing comments), so comment-level transformations are expressible
as AST edits and survive printing.
"""

from __future__ import annotations

from .ast_nodes import (
    Assign, Ast, AlwaysBlock, BinaryOp, BitSelect, Block, CaseArm, CaseStmt,
    Concat, Connection, ContinuousAssign, Edge, Expr, Identifier, IfStmt,
    Instance, ModuleDecl, NetDecl, NetName, NumberLiteral, ParamAssign,
    ParamDecl, PartSelect, Port, Range, Replicate, SensitivityList,
    SourceText, Statement, TernaryOp, UnaryOp,
)
from .errors import ParseError
from .lexer import Comment, T, Token, lex

_BASE_RADIX = {"b": 2, "o": 8, "d": 10, "h": 16}

# Binary operator precedence, weakest first. Ternary binds weaker than all.
_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("|",),
    ("^", "^~", "~^"),
    ("&",),
    ("==", "!=", "===", "!=="),
    ("<", "<=", ">", ">="),
    ("<<", ">>", "<<<", ">>>"),
    ("+", "-"),
    ("*", "/", "%"),
    ("**",),
]

_UNARY_OPS = {"~", "!", "-", "+", "&", "|", "^", "~&", "~|", "~^"}


def parse(source: SourceText) -> Ast:
    """Parse a document into an Ast. Raises ParseError outside the subset."""
    return _Parser(source.content, source.origin).parse()


def parse_text(text: str, origin: str = "<input>") -> Ast:
    return parse(SourceText(text, origin))


class _Parser:
    def __init__(self, text: str, origin: str):
        self.text = text
        self.origin = origin
        self.tokens, self.comments = lex(text, origin)
        self.pos = 0
        self.cpos = 0                      # comment consumption cursor

    # ---- token navigation ----

    def _cur(self) -> Token:
        return self.tokens[self.pos]

    def _peek(self, offset: int = 1) -> Token:
        p = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[p]

    def _at(self, text: str) -> bool:
        return self._cur().text == text and self._cur().kind in (T.KEYWORD, T.OP)

    def _at_ident(self) -> bool:
        return self._cur().kind == T.IDENT

    def _eat(self, text: str) -> Token:
        tok = self._cur()
        if not self._at(text):
            raise self._err(f"expected '{text}', got '{tok.text or '<eof>'}'")
        self.pos += 1
        return tok

    def _eat_ident(self) -> Token:
        tok = self._cur()
        if tok.kind != T.IDENT:
            raise self._err(f"expected identifier, got '{tok.text or '<eof>'}'")
        self.pos += 1
        return tok

    def _eat_if(self, text: str) -> Token | None:
        if self._at(text):
            return self._eat(text)
        return None

    def _err(self, msg: str) -> ParseError:
        tok = self._cur()
        return ParseError(msg, tok.line, tok.col, self.origin)

    # ---- comment trivia ----

    def _leading_comments(self) -> tuple[str, ...]:
        """Consume comments that end before the current token."""
        out = []
        limit = self._cur().start
        while self.cpos < len(self.comments) and self.comments[self.cpos].end <= limit:
            out.append(self.comments[self.cpos].text)
            self.cpos += 1
        return tuple(out)

    def _trailing_comment(self, end_tok: Token) -> str | None:
        """Consume a same-line comment right after `end_tok`, if any."""
        if self.cpos < len(self.comments):
            c = self.comments[self.cpos]
            if not c.own_line and c.start >= end_tok.end and c.line == end_tok.line:
                self.cpos += 1
                return c.text
        return None

    def _blank_before(self, first_line: int, prev_end_line: int | None) -> bool:
        return prev_end_line is not None and first_line - prev_end_line >= 2

    # ---- top level ----

    def parse(self) -> Ast:
        modules = []
        while self._cur().kind != T.EOF:
            modules.append(self._module())
        if not modules:
            raise self._err("expected 'module'")
        return Ast(tuple(modules), source=self.text, origin=self.origin,
                   span=(0, len(self.text)))

    def _module(self) -> ModuleDecl:
        leading = self._leading_comments()
        start = self._eat("module")
        name = self._eat_ident().text
        header_params: tuple[ParamDecl, ...] = ()
        if self._at("#"):
            header_params = self._header_params()
        ports: tuple[Port, ...] = ()
        if self._at("("):
            ports = self._port_list()
        self._eat(";")
        items = []
        prev_line: int | None = None
        while not self._at("endmodule"):
            if self._cur().kind == T.EOF:
                raise self._err("unexpected end of input inside module")
            item = self._item(prev_line)
            prev_line = self.tokens[self.pos - 1].line
            items.append(item)
        trailing = self._leading_comments()
        end = self._eat("endmodule")
        return ModuleDecl(name, ports, tuple(items),
                          header_params=header_params,
                          leading_comments=leading,
                          trailing_comments=trailing,
                          span=(start.start, end.end))

    def _header_params(self) -> tuple[ParamDecl, ...]:
        self._eat("#")
        self._eat("(")
        decls = []
        while not self._at(")"):
            start = self._eat("parameter")
            rng = self._range() if self._at("[") else None
            assigns = [self._param_assign()]
            while self._at(",") and self._peek().kind == T.IDENT:
                self._eat(",")
                assigns.append(self._param_assign())
            decls.append(ParamDecl("parameter", tuple(assigns), range=rng,
                                   span=(start.start, self.tokens[self.pos - 1].end)))
            if not self._eat_if(","):
                break
        self._eat(")")
        return tuple(decls)

    def _param_assign(self) -> ParamAssign:
        name = self._eat_ident()
        self._eat("=")
        value = self._expression()
        return ParamAssign(name.text, value,
                           span=(name.start, self.tokens[self.pos - 1].end))

    def _port_list(self) -> tuple[Port, ...]:
        self._eat("(")
        ports: list[Port] = []
        if self._at(")"):
            self._eat(")")
            return ()
        direction = None
        while True:
            leading = self._leading_comments()
            start = self._cur()
            if self._cur().text in ("input", "output", "inout"):
                direction = self._cur().text
                self.pos += 1
                net_type = None
                if self._cur().text in ("wire", "reg"):
                    net_type = self._cur().text
                    self.pos += 1
                rng = self._range() if self._at("[") else None
                self._last_port_decl = (direction, net_type, rng)
            elif direction is None:
                raise self._err(
                    "non-ANSI port declarations are not supported "
                    "(expected input/output/inout)")
            else:
                direction, net_type, rng = self._last_port_decl
            name = self._eat_ident()
            ports.append(Port(direction, name.text, net_type=net_type, range=rng,
                              leading_comments=leading,
                              span=(start.start, name.end)))
            if not self._eat_if(","):
                break
        self._eat(")")
        return tuple(ports)

    def _range(self) -> Range:
        start = self._eat("[")
        msb = self._expression()
        self._eat(":")
        lsb = self._expression()
        end = self._eat("]")
        return Range(msb, lsb, span=(start.start, end.end))

    # ---- items ----

    def _item(self, prev_line: int | None):
        leading = self._leading_comments()
        tok = self._cur()
        blank = self._blank_before(
            tok.line if not leading else self.tokens[self.pos - 1].line, prev_line)
        if tok.text in ("parameter", "localparam"):
            return self._param_item(leading, blank)
        if tok.text in ("wire", "reg"):
            return self._net_decl(leading, blank)
        if tok.text == "assign":
            return self._continuous_assign(leading, blank)
        if tok.text == "always":
            return self._always(leading, blank)
        if tok.kind == T.IDENT:
            return self._instance(leading, blank)
        raise self._err(f"unexpected '{tok.text}' at module level")

    def _param_item(self, leading, blank) -> ParamDecl:
        start = self._cur()
        kind = start.text
        self.pos += 1
        rng = self._range() if self._at("[") else None
        assigns = [self._param_assign()]
        while self._eat_if(","):
            assigns.append(self._param_assign())
        end = self._eat(";")
        return ParamDecl(kind, tuple(assigns), range=rng,
                         leading_comments=leading,
                         trailing_comment=self._trailing_comment(end),
                         blank_before=blank, span=(start.start, end.end))

    def _net_decl(self, leading, blank) -> NetDecl:
        start = self._cur()
        kind = start.text
        self.pos += 1
        rng = self._range() if self._at("[") else None
        names = []
        while True:
            name = self._eat_ident()
            if self._at("["):
                raise self._err("unpacked array declarations are not supported")
            init = None
            if self._eat_if("="):
                init = self._expression()
            names.append(NetName(name.text, init,
                                 span=(name.start, self.tokens[self.pos - 1].end)))
            if not self._eat_if(","):
                break
        end = self._eat(";")
        return NetDecl(kind, tuple(names), range=rng,
                       leading_comments=leading,
                       trailing_comment=self._trailing_comment(end),
                       blank_before=blank, span=(start.start, end.end))

    def _continuous_assign(self, leading, blank) -> ContinuousAssign:
        start = self._eat("assign")
        pairs = []
        while True:
            lhs = self._lvalue()
            self._eat("=")
            rhs = self._expression()
            pairs.append((lhs, rhs))
            if not self._eat_if(","):
                break
        end = self._eat(";")
        return ContinuousAssign(tuple(pairs), leading_comments=leading,
                                trailing_comment=self._trailing_comment(end),
                                blank_before=blank, span=(start.start, end.end))

    def _always(self, leading, blank) -> AlwaysBlock:
        start = self._eat("always")
        self._eat("@")
        sens = self._sensitivity()
        body = self._statement()
        end_tok = self.tokens[self.pos - 1]
        return AlwaysBlock(sens, body, leading_comments=leading,
                           trailing_comment=self._trailing_comment(end_tok),
                           blank_before=blank, span=(start.start, end_tok.end))

    def _sensitivity(self) -> SensitivityList:
        if self._at("*"):
            tok = self._eat("*")
            return SensitivityList(star=True, span=(tok.start, tok.end))
        start = self._eat("(")
        if self._at("*"):
            self._eat("*")
            end = self._eat(")")
            return SensitivityList(star=True, span=(start.start, end.end))
        edges = []
        sep_style = "or"
        first = True
        while True:
            kind = "level"
            if self._cur().text in ("posedge", "negedge"):
                kind = self._cur().text
                self.pos += 1
            sig = self._eat_ident()
            edges.append(Edge(kind, sig.text, span=(sig.start, sig.end)))
            if self._at("or") or self._at(","):
                if first:
                    sep_style = "comma" if self._at(",") else "or"
                    first = False
                self.pos += 1
            else:
                break
        end = self._eat(")")
        return SensitivityList(edges=tuple(edges), sep_style=sep_style,
                               span=(start.start, end.end))

    def _instance(self, leading, blank) -> Instance:
        start = self._eat_ident()
        overrides: tuple[Connection, ...] = ()
        if self._at("#"):
            self._eat("#")
            self._eat("(")
            overrides = self._connection_list()
            self._eat(")")
        inst = self._eat_ident()
        self._eat("(")
        conns = self._connection_list()
        self._eat(")")
        end = self._eat(";")
        return Instance(start.text, inst.text, conns, param_overrides=overrides,
                        leading_comments=leading,
                        trailing_comment=self._trailing_comment(end),
                        blank_before=blank, span=(start.start, end.end))

    def _connection_list(self) -> tuple[Connection, ...]:
        conns = []
        if self._at(")"):
            return ()
        while True:
            if self._at("."):
                dot = self._eat(".")
                port = self._eat_ident().text
                self._eat("(")
                expr = None if self._at(")") else self._expression()
                end = self._eat(")")
                conns.append(Connection(port, expr, span=(dot.start, end.end)))
            else:
                e = self._expression()
                conns.append(Connection(None, e, span=e.span))
            if not self._eat_if(","):
                break
        return tuple(conns)

    # ---- statements ----

    def _statement(self) -> Statement:
        leading = self._leading_comments()
        tok = self._cur()
        if tok.text == "begin":
            return self._block(leading)
        if tok.text == "if":
            return self._if(leading)
        if tok.text == "case":
            return self._case(leading)
        return self._assignment(leading)

    def _block(self, leading) -> Block:
        start = self._eat("begin")
        name = None
        if self._eat_if(":"):
            name = self._eat_ident().text
        stmts = []
        while not self._at("end"):
            if self._cur().kind == T.EOF:
                raise self._err("unexpected end of input inside begin/end")
            stmts.append(self._statement())
        end = self._eat("end")
        return Block(tuple(stmts), name=name, leading_comments=leading,
                     trailing_comment=self._trailing_comment(end),
                     span=(start.start, end.end))

    def _if(self, leading) -> IfStmt:
        start = self._eat("if")
        self._eat("(")
        cond = self._expression()
        self._eat(")")
        then_stmt = self._statement()
        else_stmt = None
        if self._at("else"):
            self._eat("else")
            else_stmt = self._statement()
        end_tok = self.tokens[self.pos - 1]
        return IfStmt(cond, then_stmt, else_stmt, leading_comments=leading,
                      trailing_comment=self._trailing_comment(end_tok),
                      span=(start.start, end_tok.end))

    def _case(self, leading) -> CaseStmt:
        start = self._eat("case")
        self._eat("(")
        subject = self._expression()
        self._eat(")")
        arms = []
        while not self._at("endcase"):
            if self._cur().kind == T.EOF:
                raise self._err("unexpected end of input inside case")
            arms.append(self._case_arm())
        end = self._eat("endcase")
        return CaseStmt(subject, tuple(arms), leading_comments=leading,
                        trailing_comment=self._trailing_comment(end),
                        span=(start.start, end.end))

    def _case_arm(self) -> CaseArm:
        leading = self._leading_comments()
        start = self._cur()
        if self._at("default"):
            self._eat("default")
            self._eat_if(":")
            labels: tuple[Expr, ...] = ()
        else:
            lab = [self._expression()]
            while self._eat_if(","):
                lab.append(self._expression())
            self._eat(":")
            labels = tuple(lab)
        if self._at(";"):
            end = self._eat(";")
            body = None
        else:
            body = self._statement()
            end = self.tokens[self.pos - 1]
        return CaseArm(labels, body, leading_comments=leading,
                       span=(start.start, end.end))

    def _assignment(self, leading) -> Assign:
        start = self._cur()
        lhs = self._lvalue()
        if self._at("="):
            self._eat("=")
            blocking = True
        elif self._at("<="):
            self._eat("<=")
            blocking = False
        else:
            raise self._err("expected '=' or '<=' in assignment")
        rhs = self._expression()
        end = self._eat(";")
        return Assign(lhs, rhs, blocking=blocking, leading_comments=leading,
                      trailing_comment=self._trailing_comment(end),
                      span=(start.start, end.end))

    def _lvalue(self) -> Expr:
        if self._at("{"):
            return self._concat()
        name = self._eat_ident()
        expr: Expr = Identifier(name.text, span=(name.start, name.end))
        return self._selects(expr)

    # ---- expressions ----

    def _expression(self) -> Expr:
        return self._ternary()

    def _ternary(self) -> Expr:
        cond = self._binary(0)
        if self._at("?"):
            self._eat("?")
            then_expr = self._ternary()
            self._eat(":")
            else_expr = self._ternary()
            return TernaryOp(cond, then_expr, else_expr,
                             span=(_start(cond), _end(else_expr)))
        return cond

    def _binary(self, level: int) -> Expr:
        if level >= len(_BINARY_LEVELS):
            return self._unary()
        ops = _BINARY_LEVELS[level]
        lhs = self._binary(level + 1)
        while self._cur().kind == T.OP and self._cur().text in ops:
            op = self._cur().text
            self.pos += 1
            rhs = self._binary(level + 1)
            lhs = BinaryOp(op, lhs, rhs, span=(_start(lhs), _end(rhs)))
        return lhs

    def _unary(self) -> Expr:
        tok = self._cur()
        if tok.kind == T.OP and tok.text in _UNARY_OPS:
            self.pos += 1
            operand = self._unary()
            return UnaryOp(tok.text, operand, span=(tok.start, _end(operand)))
        return self._primary()

    def _primary(self) -> Expr:
        tok = self._cur()
        if tok.kind == T.NUMBER:
            self.pos += 1
            return _number(tok, self.origin)
        if tok.kind == T.IDENT:
            self.pos += 1
            expr: Expr = Identifier(tok.text, span=(tok.start, tok.end))
            return self._selects(expr)
        if self._at("("):
            self._eat("(")
            inner = self._expression()
            self._eat(")")
            return inner
        if self._at("{"):
            return self._concat()
        raise self._err(f"expected expression, got '{tok.text or '<eof>'}'")

    def _selects(self, expr: Expr) -> Expr:
        while self._at("["):
            start = self._eat("[")
            first = self._expression()
            if self._eat_if(":"):
                second = self._expression()
                end = self._eat("]")
                expr = PartSelect(expr, first, second,
                                  span=(_start(expr), end.end))
            else:
                end = self._eat("]")
                expr = BitSelect(expr, first, span=(_start(expr), end.end))
        return expr

    def _concat(self) -> Expr:
        start = self._eat("{")
        first = self._expression()
        if self._at("{"):
            # replication {N{a, b}}
            self._eat("{")
            parts = [self._expression()]
            while self._eat_if(","):
                parts.append(self._expression())
            self._eat("}")
            end = self._eat("}")
            return Replicate(first, tuple(parts), span=(start.start, end.end))
        parts = [first]
        while self._eat_if(","):
            parts.append(self._expression())
        end = self._eat("}")
        return Concat(tuple(parts), span=(start.start, end.end))


def _start(e: Expr) -> int:
    return e.span[0] if e.span else 0


def _end(e: Expr) -> int:
    return e.span[1] if e.span else 0


def _number(tok: Token, origin: str) -> NumberLiteral:
    """Decode a NUMBER token into value/width/base/separators/signed."""
    text = tok.text
    if "'" not in text:
        return NumberLiteral(int(text.replace("_", "")),
                             span=(tok.start, tok.end))
    size_str, rest = text.split("'", 1)
    signed = False
    if rest[0] in "sS":
        signed = True
        rest = rest[1:]
    base = rest[0].lower()
    digits = rest[1:]
    separators = []
    count = 0
    for ch in reversed(digits):
        if ch == "_":
            separators.append(count)
        else:
            count += 1
    value = int(digits.replace("_", ""), _BASE_RADIX[base])
    width = int(size_str.replace("_", "")) if size_str else None
    if width is not None and value >= (1 << width):
        raise ParseError(f"literal value does not fit in {width} bits",
                         tok.line, tok.col, origin)
    return NumberLiteral(value, width=width, base=base,
                         separators=tuple(sorted(separators)), signed=signed,
                         span=(tok.start, tok.end))
