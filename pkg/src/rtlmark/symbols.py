"""Per-module symbol resolution: kinds, bit widths, use-def counting.

Unresolved names are diagnostics, not failures; LLM-generated RTL leans on
implicit nets often enough that resolution must degrade gracefully.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast_nodes import (
    Assign, Ast, AlwaysBlock, BinaryOp, BitSelect, CaseStmt, Concat,
    ContinuousAssign, Expr, Identifier, IfStmt, Instance, ModuleDecl, NetDecl,
    Node, NumberLiteral, ParamDecl, PartSelect, Range, Replicate, TernaryOp,
    UnaryOp, Block, CaseArm, SensitivityList,
)


@dataclass
class SymbolInfo:
    name: str
    kind: str                      # input/output/inout/wire/reg/parameter/localparam/instance
    width: int | None = None       # resolved bit width, None if not constant
    msb: int | None = None
    lsb: int | None = None
    value: int | None = None       # for parameters
    net_type: str | None = None    # for ports: wire/reg
    reads: int = 0
    writes: int = 0
    decl_count: int = 1


@dataclass
class ModuleSymbols:
    name: str
    symbols: dict[str, SymbolInfo] = field(default_factory=dict)
    params: dict[str, int] = field(default_factory=dict)   # const param env
    diagnostics: list[str] = field(default_factory=list)


@dataclass
class SymbolTable:
    modules: dict[str, ModuleSymbols] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)


def const_eval(expr: Expr, env: dict[str, int] | None = None) -> int | None:
    """Evaluate a constant expression; None when not statically constant."""
    env = env or {}
    if isinstance(expr, NumberLiteral):
        return expr.value
    if isinstance(expr, Identifier):
        return env.get(expr.name)
    if isinstance(expr, UnaryOp):
        v = const_eval(expr.operand, env)
        if v is None:
            return None
        if expr.op == "-":
            return -v
        if expr.op == "+":
            return v
        if expr.op == "!":
            return 0 if v else 1
        return None                 # bit ops need a width context
    if isinstance(expr, BinaryOp):
        a = const_eval(expr.lhs, env)
        b = const_eval(expr.rhs, env)
        if a is None or b is None:
            return None
        try:
            return {
                "+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
                "/": lambda: a // b if b else None,
                "%": lambda: a % b if b else None,
                "<<": lambda: a << b, ">>": lambda: a >> b,
                "**": lambda: a ** b,
                "==": lambda: int(a == b), "!=": lambda: int(a != b),
                "<": lambda: int(a < b), "<=": lambda: int(a <= b),
                ">": lambda: int(a > b), ">=": lambda: int(a >= b),
            }[expr.op]()
        except KeyError:
            return None
    if isinstance(expr, TernaryOp):
        c = const_eval(expr.cond, env)
        if c is None:
            return None
        return const_eval(expr.then_expr if c else expr.else_expr, env)
    return None


def range_bounds(rng: Range | None, env: dict[str, int]) -> tuple[int | None, int | None]:
    if rng is None:
        return None, None
    return const_eval(rng.msb, env), const_eval(rng.lsb, env)


def range_width(rng: Range | None, env: dict[str, int]) -> int | None:
    if rng is None:
        return 1
    msb, lsb = range_bounds(rng, env)
    if msb is None or lsb is None:
        return None
    return abs(msb - lsb) + 1


def resolve(ast: Ast) -> SymbolTable:
    """Build the use-def map for every module."""
    table = SymbolTable()
    for mod in ast.modules:
        table.modules[mod.name] = _resolve_module(mod)
        table.diagnostics.extend(
            f"{mod.name}: {d}" for d in table.modules[mod.name].diagnostics)
    return table


def _resolve_module(mod: ModuleDecl) -> ModuleSymbols:
    ms = ModuleSymbols(mod.name)

    def declare(name: str, kind: str, rng: Range | None, value: int | None = None,
                net_type: str | None = None, width_hint: int | None = None):
        if name in ms.symbols:
            prev = ms.symbols[name]
            # An output redeclared as reg in the body is a merge, not a clash.
            if prev.kind in ("input", "output", "inout") and kind in ("wire", "reg"):
                prev.net_type = kind
                prev.decl_count += 1
                if rng is not None:
                    msb, lsb = range_bounds(rng, ms.params)
                    prev.msb, prev.lsb = msb, lsb
                    prev.width = range_width(rng, ms.params)
                return
            prev.decl_count += 1
            ms.diagnostics.append(f"identifier '{name}' redeclared (shadowing)")
            return
        msb, lsb = range_bounds(rng, ms.params)
        width = range_width(rng, ms.params)
        if rng is None and width_hint is not None:
            width, msb, lsb = width_hint, width_hint - 1, 0
        ms.symbols[name] = SymbolInfo(
            name, kind, width=width, msb=msb, lsb=lsb,
            value=value, net_type=net_type)

    def param_width_hint(a) -> int | None:
        # a rangeless parameter takes the size of its literal value, else 32
        if isinstance(a.value, NumberLiteral) and a.value.width is not None:
            return a.value.width
        return 32

    for pd in mod.header_params:
        for a in pd.assigns:
            v = const_eval(a.value, ms.params)
            if v is not None:
                ms.params[a.name] = v
            declare(a.name, "parameter", pd.range, value=v,
                    width_hint=param_width_hint(a))
    for p in mod.ports:
        declare(p.name, p.direction, p.range, net_type=p.net_type)
    for item in mod.items:
        if isinstance(item, ParamDecl):
            for a in item.assigns:
                v = const_eval(a.value, ms.params)
                if v is not None:
                    ms.params[a.name] = v
                declare(a.name, item.kind, item.range, value=v,
                        width_hint=param_width_hint(a))
        elif isinstance(item, NetDecl):
            for n in item.names:
                declare(n.name, item.kind, item.range)
        elif isinstance(item, Instance):
            declare(item.inst_name, "instance", None)

    def read(name: str):
        info = ms.symbols.get(name)
        if info is None:
            ms.diagnostics.append(f"unresolved identifier '{name}'")
            return
        info.reads += 1

    def write(name: str):
        info = ms.symbols.get(name)
        if info is None:
            ms.diagnostics.append(f"unresolved identifier '{name}'")
            return
        info.writes += 1

    def read_expr(e: Expr | None):
        if e is None:
            return
        if isinstance(e, Identifier):
            read(e.name)
            return
        for _, child in _expr_children(e):
            read_expr(child)

    def write_lhs(e: Expr):
        if isinstance(e, Identifier):
            write(e.name)
        elif isinstance(e, (BitSelect, PartSelect)):
            if isinstance(e.base, Identifier):
                write(e.base.name)
            # select indices are reads
            if isinstance(e, BitSelect):
                read_expr(e.index)
            else:
                read_expr(e.msb)
                read_expr(e.lsb)
        elif isinstance(e, Concat):
            for p in e.parts:
                write_lhs(p)

    def visit_stmt(s):
        if s is None:
            return
        if isinstance(s, Assign):
            write_lhs(s.lhs)
            read_expr(s.rhs)
        elif isinstance(s, Block):
            for x in s.stmts:
                visit_stmt(x)
        elif isinstance(s, IfStmt):
            read_expr(s.cond)
            visit_stmt(s.then_stmt)
            visit_stmt(s.else_stmt)
        elif isinstance(s, CaseStmt):
            read_expr(s.subject)
            for arm in s.arms:
                for lab in arm.labels:
                    read_expr(lab)
                visit_stmt(arm.body)

    for item in mod.items:
        if isinstance(item, NetDecl):
            for n in item.names:
                if n.init is not None:
                    write(n.name)
                    read_expr(n.init)
        elif isinstance(item, ContinuousAssign):
            for lhs, rhs in item.assignments:
                write_lhs(lhs)
                read_expr(rhs)
        elif isinstance(item, AlwaysBlock):
            for e in item.sensitivity.edges:
                read(e.signal)
            visit_stmt(item.body)
        elif isinstance(item, Instance):
            for c in item.connections:
                read_expr(c.expr)
            for c in item.param_overrides:
                read_expr(c.expr)
    return ms


def _expr_children(e: Node):
    from .ast_nodes import iter_children
    return iter_children(e)


def internal_identifiers(mod: ModuleDecl, ms: ModuleSymbols) -> list[str]:
    """Declared names that are not part of the module interface.

    Ports and header parameters are interface: renaming them would change
    how the module is instantiated, so they are never rename candidates.
    """
    interface = {p.name for p in mod.ports}
    for pd in mod.header_params:
        for a in pd.assigns:
            interface.add(a.name)
    return [n for n in ms.symbols if n not in interface]
