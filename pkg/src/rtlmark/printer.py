"""Deterministic printer for the Verilog AST.

Printing is span-faithful: any node still carrying a span prints as the exact
bytes of its original source, so untouched code is reproduced byte-identically
(including comments and number spelling). Nodes rebuilt by a transformation
have no span and print in a fixed canonical style. The result always reparses
to a structurally identical tree.
"""

from __future__ import annotations

import math

from .ast_nodes import (
    Assign, Ast, AlwaysBlock, BinaryOp, BitSelect, Block, CaseArm, CaseStmt,
    Concat, Connection, ContinuousAssign, Expr, Identifier, IfStmt, Instance,
    ModuleDecl, NetDecl, NumberLiteral, ParamDecl, PartSelect, Port, Range,
    Replicate, SensitivityList, SourceText, TernaryOp, UnaryOp,
)

_INDENT = "    "

# Expression precedence for parenthesization; higher binds tighter.
_PREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "^~": 4, "~^": 4, "&": 5,
    "==": 6, "!=": 6, "===": 6, "!==": 6,
    "<": 7, "<=": 7, ">": 7, ">=": 7,
    "<<": 8, ">>": 8, "<<<": 8, ">>>": 8,
    "+": 9, "-": 9, "*": 10, "/": 10, "%": 10, "**": 11,
}
_PREC_TERNARY = 0
_PREC_UNARY = 12


def print_ast(ast: Ast) -> SourceText:
    """Render the document. Pure: identical Ast gives identical bytes."""
    if ast.span is not None:
        return SourceText(ast.source, ast.origin)
    chunks = []
    for mod in ast.modules:
        chunks.append(_module(mod, ast.source))
    return SourceText("\n".join(chunks), ast.origin)


def print_module(ast: Ast, index: int) -> str:
    """Render a single module of the document."""
    return _module(ast.modules[index], ast.source)


def format_number(lit: NumberLiteral) -> str:
    """Canonical literal spelling: 8'hA5, 8'b1010_0101, 42, ..."""
    if lit.width is None and lit.base == "d" and not lit.signed:
        return str(lit.value)
    if lit.base == "b":
        digits = format(lit.value, "b").zfill(lit.width or 1)
    elif lit.base == "h":
        digits = format(lit.value, "X").zfill(math.ceil((lit.width or 1) / 4))
    elif lit.base == "o":
        digits = format(lit.value, "o").zfill(math.ceil((lit.width or 1) / 3))
    else:
        digits = str(lit.value)
    if lit.separators:
        out = []
        for i, ch in enumerate(reversed(digits)):
            if i in lit.separators and i != 0:
                out.append("_")
            out.append(ch)
        digits = "".join(reversed(out))
    sign = "s" if lit.signed else ""
    size = str(lit.width) if lit.width is not None else ""
    return f"{size}'{sign}{lit.base}{digits}"


def format_expr(e: Expr, context_prec: int = 0, source: str | None = None) -> str:
    """Render an expression; nodes with spans reproduce their original bytes
    (parenthesized when the new context binds tighter than the node)."""
    if source is not None and e.span is not None:
        text = source[e.span[0]:e.span[1]]
        if _node_prec(e) < context_prec:
            return f"({text})"
        return text
    text, prec = _expr(e, source)
    if prec < context_prec:
        return f"({text})"
    return text


def _node_prec(e: Expr) -> int:
    if isinstance(e, BinaryOp):
        return _PREC[e.op]
    if isinstance(e, UnaryOp):
        return _PREC_UNARY
    if isinstance(e, TernaryOp):
        return _PREC_TERNARY
    return 99


def _expr(e: Expr, src: str | None) -> tuple[str, int]:
    if isinstance(e, Identifier):
        return e.name, 99
    if isinstance(e, NumberLiteral):
        return format_number(e), 99
    if isinstance(e, UnaryOp):
        return f"{e.op}{format_expr(e.operand, _PREC_UNARY + 1, src)}", _PREC_UNARY
    if isinstance(e, BinaryOp):
        p = _PREC[e.op]
        lhs = format_expr(e.lhs, p, src)
        rhs = format_expr(e.rhs, p + 1, src)
        return f"{lhs} {e.op} {rhs}", p
    if isinstance(e, TernaryOp):
        cond = format_expr(e.cond, _PREC_TERNARY + 1, src)
        a = format_expr(e.then_expr, _PREC_TERNARY, src)
        b = format_expr(e.else_expr, _PREC_TERNARY, src)
        return f"{cond} ? {a} : {b}", _PREC_TERNARY
    if isinstance(e, Concat):
        return "{" + ", ".join(format_expr(p, 0, src) for p in e.parts) + "}", 99
    if isinstance(e, Replicate):
        inner = ", ".join(format_expr(p, 0, src) for p in e.parts)
        return ("{" + format_expr(e.count, _PREC_UNARY, src)
                + "{" + inner + "}}"), 99
    if isinstance(e, BitSelect):
        return (f"{format_expr(e.base, 99, src)}"
                f"[{format_expr(e.index, 0, src)}]"), 99
    if isinstance(e, PartSelect):
        return (f"{format_expr(e.base, 99, src)}"
                f"[{format_expr(e.msb, 0, src)}:{format_expr(e.lsb, 0, src)}]"), 99
    raise TypeError(f"not an expression: {e!r}")


def _span_text(node, source: str) -> str | None:
    if node.span is not None:
        return source[node.span[0]:node.span[1]]
    return None


def _range_text(rng: Range | None, source: str) -> str:
    if rng is None:
        return ""
    t = _span_text(rng, source)
    if t is None:
        t = f"[{format_expr(rng.msb, 0, source)}:{format_expr(rng.lsb, 0, source)}]"
    return t


def _module(mod: ModuleDecl, source: str) -> str:
    t = _span_text(mod, source)
    if t is not None:
        lines = [*mod.leading_comments, t] if mod.leading_comments else [t]
        return "\n".join(lines) + "\n"
    out: list[str] = list(mod.leading_comments)
    header = f"module {mod.name}"
    if mod.header_params:
        decls = ", ".join(_param_text(p, source, terminator="")
                          for p in mod.header_params)
        header += f" #({decls})"
    multiline_ports = any(p.leading_comments for p in mod.ports)
    if not mod.ports:
        out.append(header + ";")
    elif multiline_ports:
        out.append(header + " (")
        for i, p in enumerate(mod.ports):
            comma = "," if i < len(mod.ports) - 1 else ""
            for c in p.leading_comments:
                out.append(_INDENT + c)
            out.append(_INDENT + _port_text(p, source) + comma)
        out.append(");")
    else:
        ports = ", ".join(_port_text(p, source) for p in mod.ports)
        out.append(f"{header} ({ports});")
    for item in mod.items:
        if item.blank_before:
            out.append("")
        for c in item.leading_comments:
            out.append(_INDENT + c)
        out.extend(_item_lines(item, source))
    for c in mod.trailing_comments:
        out.append(_INDENT + c)
    out.append("endmodule")
    return "\n".join(out) + "\n"


def _port_text(p: Port, source: str) -> str:
    t = _span_text(p, source)
    if t is not None:
        return t
    parts = [p.direction]
    if p.net_type:
        parts.append(p.net_type)
    rng = _range_text(p.range, source)
    if rng:
        parts.append(rng)
    parts.append(p.name)
    return " ".join(parts)


def _param_text(p: ParamDecl, source: str, terminator: str = ";") -> str:
    t = _span_text(p, source)
    if t is not None:
        return t
    rng = _range_text(p.range, source)
    head = p.kind + (f" {rng}" if rng else "")
    assigns = ", ".join(
        _span_text(a, source) or f"{a.name} = {format_expr(a.value, 0, source)}"
        for a in p.assigns)
    return f"{head} {assigns}{terminator}"


def _item_lines(item, source: str) -> list[str]:
    t = _span_text(item, source)
    if t is not None:
        lines = [_INDENT + t]
    elif isinstance(item, ParamDecl):
        lines = [_INDENT + _param_text(item, source)]
    elif isinstance(item, NetDecl):
        rng = _range_text(item.range, source)
        head = item.kind + (f" {rng}" if rng else "")
        names = ", ".join(
            _span_text(n, source)
            or (f"{n.name} = {format_expr(n.init, 0, source)}" if n.init else n.name)
            for n in item.names)
        lines = [f"{_INDENT}{head} {names};"]
    elif isinstance(item, ContinuousAssign):
        pairs = ", ".join(f"{format_expr(l, 0, source)} = {format_expr(r, 0, source)}"
                          for l, r in item.assignments)
        lines = [f"{_INDENT}assign {pairs};"]
    elif isinstance(item, AlwaysBlock):
        sens = _sens_text(item.sensitivity, source)
        body = _stmt_lines(item.body, source, 1)
        if body and body[0].lstrip().startswith("begin"):
            lines = [f"{_INDENT}always @{sens} {body[0].lstrip()}"] + body[1:]
        else:
            lines = [f"{_INDENT}always @{sens}"] + _stmt_lines(item.body, source, 2)
    elif isinstance(item, Instance):
        lines = [_INDENT + _instance_text(item, source)]
    else:
        raise TypeError(f"not a module item: {item!r}")
    if item.trailing_comment:
        lines[-1] = lines[-1] + " " + item.trailing_comment
    return lines


def _sens_text(s: SensitivityList, source: str) -> str:
    t = _span_text(s, source)
    if t is not None:
        return t if t.startswith(("(", "*")) else t
    if s.star:
        return "(*)"
    sep = ", " if s.sep_style == "comma" else " or "
    edges = sep.join(
        e.signal if e.kind == "level" else f"{e.kind} {e.signal}"
        for e in s.edges)
    return f"({edges})"


def _instance_text(inst: Instance, source: str) -> str:
    def conn(c: Connection) -> str:
        if c.port is None:
            return format_expr(c.expr, 0, source)
        inner = format_expr(c.expr, 0, source) if c.expr is not None else ""
        return f".{c.port}({inner})"

    text = inst.module_name
    if inst.param_overrides:
        text += " #(" + ", ".join(conn(c) for c in inst.param_overrides) + ")"
    text += f" {inst.inst_name} ("
    text += ", ".join(conn(c) for c in inst.connections)
    return text + ");"


def _stmt_lines(stmt, source: str, depth: int) -> list[str]:
    pad = _INDENT * depth
    lines: list[str] = []
    for c in stmt.leading_comments:
        lines.append(pad + c)
    t = _span_text(stmt, source)
    if t is not None:
        lines.append(pad + t)
    elif isinstance(stmt, Assign):
        op = "=" if stmt.blocking else "<="
        lines.append(f"{pad}{format_expr(stmt.lhs, 0, source)} {op} {format_expr(stmt.rhs, 0, source)};")
    elif isinstance(stmt, Block):
        head = f"{pad}begin" + (f" : {stmt.name}" if stmt.name else "")
        lines.append(head)
        for s in stmt.stmts:
            lines.extend(_stmt_lines(s, source, depth + 1))
        lines.append(f"{pad}end")
    elif isinstance(stmt, IfStmt):
        lines.extend(_if_lines(stmt, source, depth, prefix="if"))
        return _with_trailing(lines, stmt)
    elif isinstance(stmt, CaseStmt):
        lines.append(f"{pad}case ({format_expr(stmt.subject, 0, source)})")
        for arm in stmt.arms:
            lines.extend(_arm_lines(arm, source, depth + 1))
        lines.append(f"{pad}endcase")
    else:
        raise TypeError(f"not a statement: {stmt!r}")
    return _with_trailing(lines, stmt)


def _with_trailing(lines: list[str], stmt) -> list[str]:
    if getattr(stmt, "trailing_comment", None):
        lines[-1] = lines[-1] + " " + stmt.trailing_comment
    return lines


def _if_lines(stmt: IfStmt, source: str, depth: int, prefix: str) -> list[str]:
    pad = _INDENT * depth
    head = f"{pad}{prefix} ({format_expr(stmt.cond, 0, source)})"
    lines: list[str] = []
    if isinstance(stmt.then_stmt, Block) and not stmt.then_stmt.leading_comments:
        body = _stmt_lines(stmt.then_stmt, source, depth)
        lines.append(head + " " + body[0].lstrip())
        lines.extend(body[1:])
    else:
        lines.append(head)
        lines.extend(_stmt_lines(stmt.then_stmt, source, depth + 1))
    if stmt.else_stmt is not None:
        els = stmt.else_stmt
        if isinstance(els, IfStmt) and els.span is None \
                and not els.leading_comments:
            lines.extend(_if_lines(els, source, depth, prefix="else if"))
        elif isinstance(els, (Block, IfStmt)) and not els.leading_comments:
            body = _stmt_lines(els, source, depth)
            lines.append(f"{pad}else " + body[0].lstrip())
            lines.extend(body[1:])
        else:
            lines.append(f"{pad}else")
            lines.extend(_stmt_lines(els, source, depth + 1))
    return lines


def _arm_lines(arm: CaseArm, source: str, depth: int) -> list[str]:
    pad = _INDENT * depth
    lines: list[str] = []
    for c in arm.leading_comments:
        lines.append(pad + c)
    t = _span_text(arm, source)
    if t is not None:
        lines.append(pad + t)
        return lines
    label = "default" if not arm.labels else \
        ", ".join(format_expr(e, 0, source) for e in arm.labels)
    if arm.body is None:
        lines.append(f"{pad}{label}: ;")
    else:
        body = _stmt_lines(arm.body, source, depth)
        lines.append(f"{pad}{label}: " + body[0].lstrip())
        lines.extend(body[1:])
    return lines
