"""Statement-granularity transformation rules (FSM detours, boolean
rewrites, assignment restructuring, comments, trigger-gated payload)."""

from __future__ import annotations

import dataclasses

from ..ast_nodes import (
    Assign, Ast, AlwaysBlock, BinaryOp, Block, CaseArm, CaseStmt, Concat,
    ContinuousAssign, Identifier, IfStmt, ModuleDecl, NetDecl, NumberLiteral,
    ParamAssign, ParamDecl, Port, SensitivityList, TernaryOp, UnaryOp,
    map_tree, node_at, replace_at, walk,
)
from ..errors import BadFraming, SiteStale
from ..keys import WatermarkKey, derive_bit, derive_hex, derive_int, \
    derive_permutation, derive_suffix
from ..payload import decode_payload
from ..symbols import resolve
from .base import RuleId, Rule, SignatureEvidence, TransformSite, register
from .common import anon_key, collect_comments, find_fsms, iter_value_exprs, \
    _collect_assigns
from .token_rules import _set_module, _replace_in_module


# ---- T8: unreachable keyed detour state ----

def _assigned_param_names(mod: ModuleDecl, params: set[str]) -> set[str]:
    out = set()
    for _, rhs, _ in _collect_assigns(mod):
        for node in walk(rhs):
            if isinstance(node, Identifier) and node.name in params:
                out.add(node.name)
    return out


@register
class StateTransitionPath(Rule):
    id = RuleId.T8

    def applicable(self, ast, mod, ms, key):
        sites = []
        for fsm in find_fsms(mod, ms):
            if (1 << fsm.width) <= len(fsm.state_params):
                continue
            name = "S_" + derive_suffix(key, mod.name, "T8", length=4).upper()
            if name in ms.symbols:
                continue
            sites.append(TransformSite(self.id, mod.name, (),
                                       aux=(fsm.subject_reg,)))
        return sites

    def apply(self, ast, mod_idx, site, key, payload):
        mod = ast.modules[mod_idx]
        ms = resolve(ast).modules[mod.name]
        fsm = next((f for f in find_fsms(mod, ms)
                    if f.subject_reg == site.aux[0]), None)
        if fsm is None:
            raise SiteStale(f"no FSM over '{site.aux[0]}'")
        used = set(fsm.values.values())
        unused = sorted(v for v in range(1 << fsm.width) if v not in used)
        if not unused:
            raise SiteStale("no unused encodings left")
        name = "S_" + derive_suffix(key, mod.name, "T8", length=4).upper()
        if name in ms.symbols:
            raise SiteStale(f"detour state name '{name}' is taken")
        value = unused[derive_int(key, mod.name, "T8", "enc", below=len(unused))]
        reentry = fsm.state_params[
            derive_int(key, mod.name, "T8", "reentry",
                       below=len(fsm.state_params))]

        decl = ParamDecl("localparam", (ParamAssign(
            name, NumberLiteral(value, width=fsm.width, base="b")),))
        last_param_idx = -1
        for i, item in enumerate(mod.items):
            if isinstance(item, ParamDecl):
                last_param_idx = i
        items = list(mod.items)
        items.insert(last_param_idx + 1, decl)
        mod = dataclasses.replace(mod, items=tuple(items), span=None)

        fsm2 = next((f for f in find_fsms(mod, resolve(
            _set_module(ast, mod_idx, mod)).modules[mod.name])
            if f.subject_reg == site.aux[0]), None)
        if fsm2 is None:
            raise SiteStale("FSM lost while inserting detour state")
        case = node_at(mod, fsm2.case_path)
        arm = CaseArm(
            labels=(Identifier(name),),
            body=Assign(Identifier(fsm2.subject_reg), Identifier(reentry),
                        blocking=fsm2.blocking))
        arms = list(case.arms)
        default_pos = next((i for i, a in enumerate(arms) if not a.labels),
                           len(arms))
        arms.insert(default_pos, arm)
        case = dataclasses.replace(case, arms=tuple(arms), span=None)
        mod = replace_at(mod, fsm2.case_path, case)
        ast = _set_module(ast, mod_idx, mod)
        return ast, f"{name}={value}->{reentry}".encode()

    def signature(self, ast, mod, ms, key):
        strength = 0
        for fsm in find_fsms(mod, ms):
            params = set(fsm.state_params)
            assigned = _assigned_param_names(mod, params)
            case = node_at(mod, fsm.case_path)
            for arm in case.arms:
                if not arm.labels or not isinstance(arm.body, Assign):
                    continue
                lab = arm.labels[0]
                if len(arm.labels) == 1 and isinstance(lab, Identifier) \
                        and lab.name in params and lab.name not in assigned \
                        and isinstance(arm.body.lhs, Identifier) \
                        and arm.body.lhs.name == fsm.subject_reg \
                        and isinstance(arm.body.rhs, Identifier) \
                        and arm.body.rhs.name in assigned:
                    strength += 1
        return SignatureEvidence(self.id, strength > 0, strength)


# ---- T9: De Morgan rewrites ----

_T9_REWRITES = {
    "&": ("~", "|"), "|": ("~", "&"),
    "&&": ("!", "||"), "||": ("!", "&&"),
}
_T9_PATTERNS = {("~", "|"): "&", ("~", "&"): "|",
                ("!", "||"): "&&", ("!", "&&"): "||"}


def _demorgan(e: BinaryOp) -> UnaryOp:
    neg, dual = _T9_REWRITES[e.op]
    return UnaryOp(neg, BinaryOp(dual, UnaryOp(neg, e.lhs),
                                 UnaryOp(neg, e.rhs)))


def _is_demorgan_form(e) -> bool:
    if not isinstance(e, UnaryOp) or e.op not in ("~", "!"):
        return False
    inner = e.operand
    if not isinstance(inner, BinaryOp):
        return False
    if (e.op, inner.op) not in _T9_PATTERNS:
        return False
    return (isinstance(inner.lhs, UnaryOp) and inner.lhs.op == e.op
            and isinstance(inner.rhs, UnaryOp) and inner.rhs.op == e.op)


@register
class CombLogicOp(Rule):
    id = RuleId.T9

    def applicable(self, ast, mod, ms, key):
        sites = []
        for path, e in iter_value_exprs(mod):
            if isinstance(e, BinaryOp) and e.op in _T9_REWRITES:
                sites.append(TransformSite(self.id, mod.name, path,
                                           aux=(e.op,)))
        return sites

    def apply(self, ast, mod_idx, site, key, payload):
        mod = ast.modules[mod_idx]
        try:
            node = node_at(mod, site.path)
        except (KeyError, IndexError, TypeError, AttributeError) as exc:
            raise SiteStale(str(exc)) from exc
        if not isinstance(node, BinaryOp) or node.op != site.aux[0]:
            raise SiteStale("operator at site changed")
        return (_replace_in_module(ast, mod_idx, site.path, _demorgan(node)),
                site.aux[0].encode())

    def signature(self, ast, mod, ms, key):
        strength = sum(1 for _, e in iter_value_exprs(mod)
                       if _is_demorgan_form(e))
        return SignatureEvidence(self.id, strength > 0, strength)


# ---- T10: continuous assign to always @* ----

@register
class CombAssign(Rule):
    id = RuleId.T10

    def applicable(self, ast, mod, ms, key):
        sites = []
        for i, item in enumerate(mod.items):
            name = self._target(item, mod, ms)
            if name is not None:
                sites.append(TransformSite(self.id, mod.name, (("items", i),),
                                           aux=(name,)))
        return sites

    @staticmethod
    def _target(item, mod, ms) -> str | None:
        if not isinstance(item, ContinuousAssign) or len(item.assignments) != 1:
            return None
        lhs, _ = item.assignments[0]
        if not isinstance(lhs, Identifier):
            return None
        info = ms.symbols.get(lhs.name)
        if info is None or info.writes != 1:
            return None
        if info.kind == "wire" or (info.kind == "output"
                                   and info.net_type in (None, "wire")):
            return lhs.name
        return None

    def apply(self, ast, mod_idx, site, key, payload):
        mod = ast.modules[mod_idx]
        ms = resolve(ast).modules[mod.name]
        try:
            item = node_at(mod, site.path)
        except (KeyError, IndexError, TypeError, AttributeError) as exc:
            raise SiteStale(str(exc)) from exc
        name = self._target(item, mod, ms)
        if name != site.aux[0]:
            raise SiteStale("assignment at site changed")
        lhs, rhs = item.assignments[0]
        always = AlwaysBlock(
            SensitivityList(star=True),
            Assign(lhs, rhs, blocking=True),
            leading_comments=item.leading_comments,
            trailing_comment=item.trailing_comment,
            blank_before=item.blank_before)
        mod = replace_at(mod, site.path, always)

        ports = tuple(
            dataclasses.replace(p, net_type="reg", span=None)
            if p.name == name else p for p in mod.ports)
        items = []
        for it in mod.items:
            if isinstance(it, NetDecl) and it.kind == "wire" \
                    and any(nm.name == name for nm in it.names):
                ours = tuple(nm for nm in it.names if nm.name == name)
                rest = tuple(nm for nm in it.names if nm.name != name)
                items.append(dataclasses.replace(it, kind="reg", names=ours,
                                                 span=None))
                if rest:
                    items.append(dataclasses.replace(
                        it, names=rest, leading_comments=(), span=None))
            else:
                items.append(it)
        mod = dataclasses.replace(mod, ports=ports, items=tuple(items),
                                  span=None)
        return _set_module(ast, mod_idx, mod), name.encode()

    def signature(self, ast, mod, ms, key):
        strength = 0
        for item in mod.items:
            if isinstance(item, AlwaysBlock) and item.sensitivity.star:
                body = item.body
                if isinstance(body, Block) and len(body.stmts) == 1:
                    body = body.stmts[0]
                if isinstance(body, Assign) and body.blocking:
                    strength += 1
        return SignatureEvidence(self.id, strength > 0, strength)


# ---- T11: if/else to ternary ----

def _single_assign(stmt):
    if isinstance(stmt, Block) and len(stmt.stmts) == 1:
        stmt = stmt.stmts[0]
    return stmt if isinstance(stmt, Assign) else None


def _iter_stmts(mod: ModuleDecl):
    """(path_from_module, stmt) for every statement in always bodies."""
    def rec(stmt, path):
        if stmt is None:
            return
        yield path, stmt
        if isinstance(stmt, Block):
            for i, s in enumerate(stmt.stmts):
                yield from rec(s, path + (("stmts", i),))
        elif isinstance(stmt, IfStmt):
            yield from rec(stmt.then_stmt, path + (("then_stmt",),))
            if stmt.else_stmt is not None:
                yield from rec(stmt.else_stmt, path + (("else_stmt",),))
        elif isinstance(stmt, CaseStmt):
            for i, arm in enumerate(stmt.arms):
                if arm.body is not None:
                    yield from rec(arm.body, path + (("arms", i), ("body",)))

    for i, item in enumerate(mod.items):
        if isinstance(item, AlwaysBlock):
            yield from rec(item.body, (("items", i), ("body",)))


def _t11_match(stmt):
    if not isinstance(stmt, IfStmt) or stmt.else_stmt is None:
        return None
    a = _single_assign(stmt.then_stmt)
    b = _single_assign(stmt.else_stmt)
    if a is None or b is None:
        return None
    if a.lhs != b.lhs or a.blocking != b.blocking:
        return None
    return a, b


@register
class Ternary(Rule):
    id = RuleId.T11

    def applicable(self, ast, mod, ms, key):
        sites = []
        for path, stmt in _iter_stmts(mod):
            if _t11_match(stmt) is not None:
                sites.append(TransformSite(self.id, mod.name, path))
        return sites

    def apply(self, ast, mod_idx, site, key, payload):
        mod = ast.modules[mod_idx]
        try:
            stmt = node_at(mod, site.path)
        except (KeyError, IndexError, TypeError, AttributeError) as exc:
            raise SiteStale(str(exc)) from exc
        m = _t11_match(stmt)
        if m is None:
            raise SiteStale("if/else at site changed")
        a, b = m
        new = Assign(a.lhs, TernaryOp(stmt.cond, a.rhs, b.rhs),
                     blocking=a.blocking,
                     leading_comments=stmt.leading_comments,
                     trailing_comment=stmt.trailing_comment)
        return _replace_in_module(ast, mod_idx, site.path, new), b"ternary"

    def signature(self, ast, mod, ms, key):
        strength = sum(1 for _, s in _iter_stmts(mod)
                       if isinstance(s, Assign)
                       and isinstance(s.rhs, TernaryOp))
        return SignatureEvidence(self.id, strength > 0, strength)


# ---- T12: keyed initialization order ----

def _t12_runs(mod: ModuleDecl):
    """(block_path, start, stmts) maximal permutable runs inside blocks."""
    for path, stmt in _iter_stmts(mod):
        if not isinstance(stmt, Block):
            continue
        i = 0
        while i < len(stmt.stmts):
            run = _run_at(stmt.stmts, i)
            if run >= 2:
                yield path, i, stmt.stmts[i:i + run]
                i += run
            else:
                i += 1


def _run_at(stmts, start) -> int:
    run = []
    for s in stmts[start:]:
        if not isinstance(s, Assign) or not isinstance(s.lhs, Identifier):
            break
        if run and s.blocking != run[0].blocking:
            break
        candidate = run + [s]
        names = [x.lhs.name for x in candidate]
        if len(set(names)) != len(names):
            break
        keys = [anon_key(x.rhs) for x in candidate]
        if len(set(keys)) != len(keys):
            break
        if s.blocking and not _independent(candidate):
            break
        run.append(s)
    return len(run)


def _independent(assigns) -> bool:
    targets = {a.lhs.name for a in assigns}
    for a in assigns:
        reads = {n.name for n in walk(a.rhs) if isinstance(n, Identifier)}
        if reads & targets:
            return False
    return True


def _t12_order(key, mod_name, stmts):
    keys = [anon_key(s.rhs) for s in stmts]
    canon = sorted(range(len(stmts)), key=lambda i: keys[i])
    perm = derive_permutation(key, mod_name, "T12", tuple(sorted(keys)),
                              n=len(stmts))
    return [stmts[canon[perm[i]]] for i in range(len(stmts))]


@register
class InitOrder(Rule):
    id = RuleId.T12

    def applicable(self, ast, mod, ms, key):
        sites = []
        for path, start, stmts in _t12_runs(mod):
            desired = _t12_order(key, mod.name, stmts)
            if list(stmts) != desired:
                sites.append(TransformSite(self.id, mod.name, path,
                                           aux=(start, len(stmts))))
        return sites

    def apply(self, ast, mod_idx, site, key, payload):
        mod = ast.modules[mod_idx]
        start, length = site.aux
        try:
            block = node_at(mod, site.path)
        except (KeyError, IndexError, TypeError, AttributeError) as exc:
            raise SiteStale(str(exc)) from exc
        if not isinstance(block, Block) or start + length > len(block.stmts):
            raise SiteStale("block at site changed")
        if _run_at(block.stmts, start) < length:
            raise SiteStale("statements at site are no longer permutable")
        stmts = block.stmts[start:start + length]
        desired = _t12_order(key, mod.name, stmts)
        new_stmts = block.stmts[:start] + tuple(desired) + \
            block.stmts[start + length:]
        new_block = dataclasses.replace(block, stmts=new_stmts, span=None)
        return (_replace_in_module(ast, mod_idx, site.path, new_block),
                b"keyed-order")

    def signature(self, ast, mod, ms, key):
        strength = 0
        for _, _, stmts in _t12_runs(mod):
            if list(stmts) == _t12_order(key, mod.name, stmts):
                strength += 1
        return SignatureEvidence(self.id, strength > 0, strength)


# ---- T13: keyed signal comments ----

def t13_kinds() -> tuple[str, ...]:
    return ("Input", "Output", "Inout", "Wire", "Register")


def _kind_word(direction_or_kind: str) -> str:
    return {"input": "Input", "output": "Output", "inout": "Inout",
            "wire": "Wire", "reg": "Register"}[direction_or_kind]


def t13_comment_for(key: WatermarkKey, mod_name: str, kind: str,
                    name: str) -> str:
    tag = derive_hex(key, mod_name, "T13", kind, name, length=8)
    return f"//{kind} signal {name} - {tag}"


@register
class AddComments(Rule):
    id = RuleId.T13

    def applicable(self, ast, mod, ms, key):
        # Embedding targets internal declarations only: port names survive a
        # rename attack, so a port comment would outlive the rename and break
        # the exact confidence split the robustness analysis relies on.
        existing = set(collect_comments(mod))
        sites = []
        for i, item in enumerate(mod.items):
            if isinstance(item, NetDecl) and len(item.names) == 1:
                nm = item.names[0].name
                text = t13_comment_for(key, mod.name, _kind_word(item.kind), nm)
                if text not in existing:
                    sites.append(TransformSite(self.id, mod.name, (),
                                               aux=("net", nm)))
        return sites

    def apply(self, ast, mod_idx, site, key, payload):
        mod = ast.modules[mod_idx]
        _, name = site.aux
        for i, item in enumerate(mod.items):
            if isinstance(item, NetDecl) and len(item.names) == 1 \
                    and item.names[0].name == name:
                text = t13_comment_for(key, mod.name, _kind_word(item.kind),
                                       name)
                new = dataclasses.replace(
                    item, leading_comments=item.leading_comments + (text,),
                    span=None)
                return (_replace_in_module(ast, mod_idx, (("items", i),), new),
                        text.encode())
        raise SiteStale(f"no single-name declaration of '{name}'")

    def signature(self, ast, mod, ms, key):
        comments = set(collect_comments(mod))
        strength = 0
        for p in mod.ports:
            if t13_comment_for(key, mod.name, _kind_word(p.direction),
                               p.name) in comments:
                strength += 1
        for item in mod.items:
            if isinstance(item, NetDecl):
                for nm in item.names:
                    if t13_comment_for(key, mod.name, _kind_word(item.kind),
                                       nm.name) in comments:
                        strength += 1
        return SignatureEvidence(self.id, strength > 0, strength,
                                 name_dependent=True)


# ---- T14: keyed commutative operand order ----

_COMMUTATIVE = frozenset({"&", "|", "^", "+", "*", "==", "!=", "&&", "||"})


def _t14_desired_first(key, mod_name, op, kl, kr) -> str:
    """Returns the anon key that should appear on the left."""
    lo, hi = sorted((kl, kr))
    bit = derive_bit(key, mod_name, "T14", op, lo, hi)
    return lo if bit == 0 else hi


def _t14_oriented(key, mod_name, e: BinaryOp) -> bool:
    kl, kr = anon_key(e.lhs), anon_key(e.rhs)
    return kl == _t14_desired_first(key, mod_name, e.op, kl, kr)


def _t14_eligible(e) -> bool:
    return (isinstance(e, BinaryOp) and e.op in _COMMUTATIVE
            and anon_key(e.lhs) != anon_key(e.rhs))


@register
class CondOrder(Rule):
    id = RuleId.T14

    def applicable(self, ast, mod, ms, key):
        mismatched = sum(
            1 for e in walk(mod)
            if _t14_eligible(e) and not _t14_oriented(key, mod.name, e))
        if mismatched == 0:
            return []
        return [TransformSite(self.id, mod.name, (), aux=(mismatched,))]

    def apply(self, ast, mod_idx, site, key, payload):
        mod = ast.modules[mod_idx]
        name = mod.name

        def orient(node):
            if _t14_eligible(node) and not _t14_oriented(key, name, node):
                return dataclasses.replace(node, lhs=node.rhs, rhs=node.lhs,
                                           span=None)
            return node

        new_mod = map_tree(mod, orient)
        if new_mod is mod:
            raise SiteStale("no misoriented commutative pairs left")
        return _set_module(ast, mod_idx, new_mod), b"keyed-orientation"

    def signature(self, ast, mod, ms, key):
        eligible = 0
        matched = 0
        for e in walk(mod):
            if _t14_eligible(e):
                eligible += 1
                if _t14_oriented(key, mod.name, e):
                    matched += 1
        present = eligible > 0 and matched == eligible
        return SignatureEvidence(self.id, present, matched)


# ---- T15: trigger-gated payload constants ----

TRIGGER_NAME = "watermark_trigger"


def _t15_targets(mod: ModuleDecl, ms) -> list[tuple[str, int]]:
    """(name, width) of gateable registers in declaration order.

    A register qualifies if it is at least 8 bits wide and every procedural
    assignment to it writes the bare identifier (partial writes would leave
    ungated bits).
    """
    assigns = _collect_assigns(mod)
    whole = {}
    partial = set()
    for lhs, _, _ in assigns:
        if isinstance(lhs, Identifier):
            whole[lhs.name] = whole.get(lhs.name, 0) + 1
        else:
            for node in walk(lhs):
                if isinstance(node, Identifier):
                    partial.add(node.name)
    out = []
    for name, info in ms.symbols.items():
        is_reg = info.kind == "reg" or (info.kind == "output"
                                        and info.net_type == "reg")
        if is_reg and info.width is not None and info.width >= 8 \
                and whole.get(name) and name not in partial:
            out.append((name, info.width))
    return out


def _t15_trigger_name(mod, ms, key) -> str:
    name = TRIGGER_NAME
    if name in ms.symbols:
        name = TRIGGER_NAME + "_" + derive_suffix(key, mod.name, "T15",
                                                  length=3)
    return name


@register
class RedundantLogic(Rule):
    id = RuleId.T15

    def applicable(self, ast, mod, ms, key):
        targets = _t15_targets(mod, ms)
        if not targets:
            return []
        if _t15_trigger_name(mod, ms, key) in ms.symbols:
            return []
        return [TransformSite(self.id, mod.name, (),
                              aux=tuple(n for n, _ in targets))]

    def apply(self, ast, mod_idx, site, key, payload):
        if payload is None:
            raise ValueError("T15 requires a payload")
        from ..errors import PayloadTooLarge
        mod = ast.modules[mod_idx]
        ms = resolve(ast).modules[mod.name]
        targets = [(n, w) for n, w in _t15_targets(mod, ms)
                   if n in set(site.aux)]
        if not targets:
            raise SiteStale("no gateable registers left")
        trigger = _t15_trigger_name(mod, ms, key)
        if trigger in ms.symbols:
            raise SiteStale(f"trigger name '{trigger}' is taken")

        data = payload.encoded
        plan: list[tuple[str, int, int]] = []    # (name, width, constant)
        offset = 0
        for name, width in targets:
            nbytes = width // 8
            take = min(nbytes, len(data) - offset)
            if take <= 0:
                break
            # pad the tail on the right so recovered bytes are a prefix-clean
            # concatenation ending in zero padding
            chunk = data[offset:offset + take].ljust(nbytes, b"\x00")
            plan.append((name, width, int.from_bytes(chunk, "big")))
            offset += take
        if offset < len(data):
            raise PayloadTooLarge(
                f"module capacity {offset} bytes, payload {len(data)} bytes")

        constants = {name: NumberLiteral(value, width=width, base="h")
                     for name, width, value in plan}
        gated = set(constants)

        def gate(node):
            if isinstance(node, Assign) and isinstance(node.lhs, Identifier) \
                    and node.lhs.name in gated:
                rhs = TernaryOp(Identifier(trigger),
                                constants[node.lhs.name], node.rhs)
                return dataclasses.replace(node, rhs=rhs, span=None)
            return node

        items = tuple(
            map_tree(item, gate) if isinstance(item, AlwaysBlock) else item
            for item in mod.items)
        ports = mod.ports + (Port("input", trigger),)
        mod = dataclasses.replace(mod, ports=ports, items=items, span=None)
        ast = _set_module(ast, mod_idx, mod)
        params = ",".join(f"{n}:{w}={v:#x}" for n, w, v in plan)
        return ast, f"trigger={trigger};{params}".encode()

    def signature(self, ast, mod, ms, key):
        one_bit_inputs = {
            p.name for p in mod.ports
            if p.direction == "input"
            and (ms.symbols.get(p.name) is None
                 or ms.symbols[p.name].width in (1, None))}
        decl_order = list(ms.symbols)
        candidates: dict[str, dict[str, tuple[int, int]]] = {}
        for lhs, rhs, _ in _collect_assigns(mod):
            if not (isinstance(lhs, Identifier) and isinstance(rhs, TernaryOp)):
                continue
            cond, const = rhs.cond, rhs.then_expr
            if not (isinstance(cond, Identifier)
                    and cond.name in one_bit_inputs
                    and isinstance(const, NumberLiteral)
                    and const.width is not None):
                continue
            info = ms.symbols.get(lhs.name)
            if info is None or info.width != const.width:
                continue
            per = candidates.setdefault(cond.name, {})
            if lhs.name in per and per[lhs.name] != (const.width, const.value):
                per[lhs.name] = (-1, -1)          # conflicting constants
            else:
                per[lhs.name] = (const.width, const.value)

        for trig in sorted(candidates):
            per = candidates[trig]
            chunks = []
            ok = True
            for name in decl_order:
                if name not in per:
                    continue
                width, value = per[name]
                if width < 8:
                    ok = False
                    break
                nbytes = width // 8
                if value >= (1 << (8 * nbytes)):
                    ok = False
                    break
                chunks.append((value, nbytes))
            if not ok or not chunks:
                continue
            blob = b"".join(v.to_bytes(nb, "big") for v, nb in chunks)
            for end in range(len(blob), 3, -1):
                try:
                    decode_payload(blob[:end], key)
                    return SignatureEvidence(self.id, True, len(chunks))
                except BadFraming:
                    continue
        return SignatureEvidence(self.id, False, 0)
