"""Shared analysis helpers used by several transformation rules."""

from __future__ import annotations

from dataclasses import dataclass

from ..ast_nodes import (
    Assign, AlwaysBlock, BinaryOp, BitSelect, Block, CaseStmt, Concat,
    ContinuousAssign, Expr, Identifier, IfStmt, ModuleDecl, NetDecl,
    NumberLiteral, ParamDecl, PartSelect, Replicate, TernaryOp, UnaryOp, walk,
)
from ..symbols import ModuleSymbols


def anon_key(e: Expr) -> str:
    """Name-free structural key for an expression.

    Identifier names are erased (rename attacks must not disturb the key);
    literal values and widths are kept, literal base/spelling is not (base
    conversion must not disturb it either).
    """
    if isinstance(e, Identifier):
        return "I"
    if isinstance(e, NumberLiteral):
        return f"N{e.value}w{e.width}"
    if isinstance(e, UnaryOp):
        return f"U{e.op}({anon_key(e.operand)})"
    if isinstance(e, BinaryOp):
        return f"B{e.op}({anon_key(e.lhs)},{anon_key(e.rhs)})"
    if isinstance(e, TernaryOp):
        return (f"T({anon_key(e.cond)},{anon_key(e.then_expr)},"
                f"{anon_key(e.else_expr)})")
    if isinstance(e, Concat):
        return "C(" + ",".join(anon_key(p) for p in e.parts) + ")"
    if isinstance(e, Replicate):
        return (f"R({anon_key(e.count)};"
                + ",".join(anon_key(p) for p in e.parts) + ")")
    if isinstance(e, BitSelect):
        return f"BS({anon_key(e.base)},{anon_key(e.index)})"
    if isinstance(e, PartSelect):
        return f"PS({anon_key(e.base)},{anon_key(e.msb)},{anon_key(e.lsb)})"
    raise TypeError(f"not an expression: {e!r}")


def collect_comments(mod: ModuleDecl) -> list[str]:
    """Every comment attached anywhere in the module, stripped."""
    out = list(mod.leading_comments) + list(mod.trailing_comments)
    for p in mod.ports:
        out.extend(p.leading_comments)
    for node in walk(mod):
        lead = getattr(node, "leading_comments", None)
        if lead and node is not mod:
            out.extend(lead)
        trail = getattr(node, "trailing_comment", None)
        if trail:
            out.append(trail)
    return [c.strip() for c in out]


def iter_value_exprs(mod: ModuleDecl):
    """Yield (path_from_module, expr) for every run-time value expression.

    Excluded positions: lvalues, declaration ranges, parameter values, case
    labels, select indices/bounds, and replication counts. Rewrites there
    would need constant re-evaluation, so rules stay out of them.
    """
    for i, item in enumerate(mod.items):
        base = (("items", i),)
        if isinstance(item, ContinuousAssign):
            for j, (_, rhs) in enumerate(item.assignments):
                yield from _walk_value(rhs, base + (("assignments", j, 1),))
        elif isinstance(item, AlwaysBlock):
            yield from _stmt_value_exprs(item.body, base + (("body",),))


def _stmt_value_exprs(stmt, path):
    if stmt is None:
        return
    if isinstance(stmt, Assign):
        yield from _walk_value(stmt.rhs, path + (("rhs",),))
    elif isinstance(stmt, Block):
        for i, s in enumerate(stmt.stmts):
            yield from _stmt_value_exprs(s, path + (("stmts", i),))
    elif isinstance(stmt, IfStmt):
        yield from _walk_value(stmt.cond, path + (("cond",),))
        yield from _stmt_value_exprs(stmt.then_stmt, path + (("then_stmt",),))
        if stmt.else_stmt is not None:
            yield from _stmt_value_exprs(stmt.else_stmt, path + (("else_stmt",),))
    elif isinstance(stmt, CaseStmt):
        yield from _walk_value(stmt.subject, path + (("subject",),))
        for i, arm in enumerate(stmt.arms):
            if arm.body is not None:
                yield from _stmt_value_exprs(
                    arm.body, path + (("arms", i), ("body",)))


def _walk_value(e: Expr, path):
    yield path, e
    if isinstance(e, UnaryOp):
        yield from _walk_value(e.operand, path + (("operand",),))
    elif isinstance(e, BinaryOp):
        yield from _walk_value(e.lhs, path + (("lhs",),))
        yield from _walk_value(e.rhs, path + (("rhs",),))
    elif isinstance(e, TernaryOp):
        yield from _walk_value(e.cond, path + (("cond",),))
        yield from _walk_value(e.then_expr, path + (("then_expr",),))
        yield from _walk_value(e.else_expr, path + (("else_expr",),))
    elif isinstance(e, (Concat, Replicate)):
        for i, p in enumerate(e.parts):
            yield from _walk_value(p, path + (("parts", i),))
    elif isinstance(e, (BitSelect, PartSelect)):
        yield from _walk_value(e.base, path + (("base",),))


@dataclass
class FsmInfo:
    case_path: tuple                    # path from module to the CaseStmt
    subject_reg: str
    state_regs: tuple[str, ...]         # in declaration order
    state_params: tuple[str, ...]       # in declaration order
    values: dict[str, int]
    width: int
    param_paths: dict[str, tuple]       # name -> path to its ParamAssign
    blocking: bool                      # assignment style inside the arms


def _param_decl_order(mod: ModuleDecl) -> list[str]:
    names = []
    for pd in mod.header_params:
        names.extend(a.name for a in pd.assigns)
    for item in mod.items:
        if isinstance(item, ParamDecl):
            names.extend(a.name for a in item.assigns)
    return names


def _param_literals(mod: ModuleDecl) -> dict[str, tuple[NumberLiteral, tuple]]:
    """Params whose value is a direct sized literal, with their paths."""
    out = {}
    for hp_i, pd in enumerate(mod.header_params):
        for a_i, a in enumerate(pd.assigns):
            if isinstance(a.value, NumberLiteral) and a.value.width is not None:
                out[a.name] = (a.value,
                               (("header_params", hp_i), ("assigns", a_i)))
    for i, item in enumerate(mod.items):
        if isinstance(item, ParamDecl):
            for a_i, a in enumerate(item.assigns):
                if isinstance(a.value, NumberLiteral) and a.value.width is not None:
                    out[a.name] = (a.value, (("items", i), ("assigns", a_i)))
    return out


def find_fsms(mod: ModuleDecl, ms: ModuleSymbols) -> list[FsmInfo]:
    """Detect case-based FSMs safe for re-encoding.

    Requirements: a case statement over a non-port reg whose labels are all
    named parameter constants with direct sized literals of the reg's width;
    every use of any state register is either a case subject, an equality
    comparison against a state constant, or an assignment whose RHS is built
    only from state constants and state registers. Anything else makes
    re-encoding unsafe and the FSM is not reported.
    """
    param_lits = _param_literals(mod)
    port_names = {p.name for p in mod.ports}
    fsms: list[FsmInfo] = []
    claimed: set[str] = set()

    for case_path, case in _find_cases(mod):
        if not isinstance(case.subject, Identifier):
            continue
        subj = case.subject.name
        info = ms.symbols.get(subj)
        if info is None or info.kind != "reg" or subj in port_names:
            continue
        if subj in claimed:
            continue
        label_params = []
        ok = True
        for arm in case.arms:
            for lab in arm.labels:
                if isinstance(lab, Identifier) and lab.name in param_lits:
                    if lab.name not in label_params:
                        label_params.append(lab.name)
                else:
                    ok = False
        if not ok or not label_params:
            continue
        width = ms.symbols[label_params[0]].width or \
            param_lits[label_params[0]][0].width
        state_params = set(label_params)
        state_regs = {subj}
        # closure: regs assigned from state params/regs join the set, and
        # params assigned to state regs join the params
        changed = True
        assigns = _collect_assigns(mod)
        while changed:
            changed = False
            for lhs, rhs, _ in assigns:
                if not isinstance(lhs, Identifier):
                    continue
                names = _rhs_state_names(rhs)
                if names is None:
                    continue
                if names & (state_params | state_regs):
                    tgt = lhs.name
                    tinfo = ms.symbols.get(tgt)
                    if tinfo is not None and tinfo.kind == "reg" \
                            and tgt not in state_regs:
                        state_regs.add(tgt)
                        changed = True
                    for n in names:
                        ninfo = ms.symbols.get(n)
                        if ninfo is None:
                            continue
                        if n in param_lits and n not in state_params:
                            state_params.add(n)
                            changed = True
        if not _validate_fsm(mod, ms, state_regs, state_params, param_lits,
                             port_names, width):
            continue
        order = _param_decl_order(mod)
        params_ordered = tuple(n for n in order if n in state_params)
        decl_order = list(ms.symbols)
        regs_ordered = tuple(n for n in decl_order if n in state_regs)
        blocking = _arm_blocking(case)
        fsms.append(FsmInfo(
            case_path=case_path, subject_reg=subj, state_regs=regs_ordered,
            state_params=params_ordered,
            values={n: param_lits[n][0].value for n in params_ordered},
            width=width,
            param_paths={n: param_lits[n][1] for n in params_ordered},
            blocking=blocking))
        claimed.update(state_regs)
    return fsms


def _find_cases(mod: ModuleDecl):
    for i, item in enumerate(mod.items):
        if isinstance(item, AlwaysBlock):
            yield from _find_cases_stmt(item.body, (("items", i), ("body",)))


def _find_cases_stmt(stmt, path):
    if isinstance(stmt, CaseStmt):
        yield path, stmt
    elif isinstance(stmt, Block):
        for i, s in enumerate(stmt.stmts):
            yield from _find_cases_stmt(s, path + (("stmts", i),))
    elif isinstance(stmt, IfStmt):
        yield from _find_cases_stmt(stmt.then_stmt, path + (("then_stmt",),))
        if stmt.else_stmt is not None:
            yield from _find_cases_stmt(stmt.else_stmt, path + (("else_stmt",),))


def _collect_assigns(mod: ModuleDecl):
    """All procedural assignments as (lhs, rhs, blocking)."""
    out = []

    def visit(s):
        if s is None:
            return
        if isinstance(s, Assign):
            out.append((s.lhs, s.rhs, s.blocking))
        elif isinstance(s, Block):
            for x in s.stmts:
                visit(x)
        elif isinstance(s, IfStmt):
            visit(s.then_stmt)
            visit(s.else_stmt)
        elif isinstance(s, CaseStmt):
            for arm in s.arms:
                visit(arm.body)

    for item in mod.items:
        if isinstance(item, AlwaysBlock):
            visit(item.body)
    return out


def _rhs_state_names(rhs) -> set[str] | None:
    """Names referenced by an RHS made only of identifiers and ternaries of
    identifiers; None when the RHS has any other structure."""
    if isinstance(rhs, Identifier):
        return {rhs.name}
    if isinstance(rhs, TernaryOp):
        a = _rhs_state_names(rhs.then_expr)
        b = _rhs_state_names(rhs.else_expr)
        if a is None or b is None:
            return None
        return a | b
    return None


def _validate_fsm(mod, ms, state_regs, state_params, param_lits, port_names,
                  width) -> bool:
    for r in state_regs:
        if r in port_names:
            return False
        info = ms.symbols.get(r)
        if info is None or info.width != width:
            return False
    for p in state_params:
        lit = param_lits.get(p)
        if lit is None or lit[0].width != width:
            return False
        info = ms.symbols.get(p)
        if info is None or info.value is None:
            return False
    values = [param_lits[p][0].value for p in state_params]
    if len(set(values)) != len(values):
        return False
    # every expression use of a state reg must be re-encoding-safe
    for use in _state_reg_uses(mod, state_regs, state_params):
        if not use:
            return False
    return True


def _state_reg_uses(mod: ModuleDecl, state_regs: set[str],
                    state_params: set[str]):
    """Yield True/False per occurrence of a state reg in an expression,
    True when the surrounding context is re-encoding-safe."""
    state_names = state_params

    def expr_uses(e, safe_ctx: bool):
        if isinstance(e, Identifier):
            if e.name in state_regs:
                yield safe_ctx
            return
        if isinstance(e, BinaryOp) and e.op in ("==", "!="):
            # comparing a state reg is safe only against another state value
            both_state = (
                isinstance(e.lhs, Identifier) and isinstance(e.rhs, Identifier)
                and {e.lhs.name, e.rhs.name} <= (state_regs | state_names))
            for side in (e.lhs, e.rhs):
                yield from expr_uses(side, both_state)
            return
        if isinstance(e, TernaryOp):
            yield from expr_uses(e.cond, False)
            yield from expr_uses(e.then_expr, safe_ctx)
            yield from expr_uses(e.else_expr, safe_ctx)
            return
        for attr in ("operand", "lhs", "rhs", "index", "msb", "lsb", "count",
                     "base"):
            v = getattr(e, attr, None)
            if v is not None and not isinstance(v, (str, int, bool)):
                yield from expr_uses(v, False)
        for p in getattr(e, "parts", ()):
            yield from expr_uses(p, False)

    def stmt_uses(s):
        if s is None:
            return
        if isinstance(s, Assign):
            # writing a state reg is safe; reading it on the RHS is safe only
            # in identifier/ternary-of-identifier form
            if _rhs_state_names(s.rhs) is not None:
                pass
            else:
                yield from expr_uses(s.rhs, False)
        elif isinstance(s, Block):
            for x in s.stmts:
                yield from stmt_uses(x)
        elif isinstance(s, IfStmt):
            yield from expr_uses(s.cond, False)
            yield from stmt_uses(s.then_stmt)
            yield from stmt_uses(s.else_stmt)
        elif isinstance(s, CaseStmt):
            if not isinstance(s.subject, Identifier):
                yield from expr_uses(s.subject, False)
            for arm in s.arms:
                yield from stmt_uses(arm.body)

    for item in mod.items:
        if isinstance(item, ContinuousAssign):
            for _, rhs in item.assignments:
                yield from expr_uses(rhs, False)
        elif isinstance(item, AlwaysBlock):
            yield from stmt_uses(item.body)


def _arm_blocking(case: CaseStmt) -> bool:
    for arm in case.arms:
        for lhs, rhs, blocking in _collect_assigns_stmt(arm.body):
            return blocking
    return False


def _collect_assigns_stmt(stmt):
    out = []

    def visit(s):
        if s is None:
            return
        if isinstance(s, Assign):
            out.append((s.lhs, s.rhs, s.blocking))
        elif isinstance(s, Block):
            for x in s.stmts:
                visit(x)
        elif isinstance(s, IfStmt):
            visit(s.then_stmt)
            visit(s.else_stmt)
        elif isinstance(s, CaseStmt):
            for arm in s.arms:
                visit(arm.body)

    visit(stmt)
    return out
