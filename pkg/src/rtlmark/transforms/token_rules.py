"""Token-granularity transformation rules (state encoding, parameters,
literal spelling, sensitivity formatting, renames, bit order)."""

from __future__ import annotations

import dataclasses

from ..ast_nodes import (
    Ast, BinaryOp, BitSelect, Edge, Identifier, Instance, ModuleDecl, NetDecl,
    NetName, NumberLiteral, ParamAssign, ParamDecl, PartSelect, Port, Range,
    SensitivityList, map_tree, node_at, replace_at, walk,
)
from ..errors import SiteStale
from ..keys import (WatermarkKey, derive_bits, derive_int, derive_permutation,
                    derive_suffix)
from ..lexer import KEYWORDS, REJECTED_KEYWORDS
from ..printer import print_module
from ..symbols import internal_identifiers, resolve
from .base import (Rule, RuleId, SignatureEvidence, TransformSite, register,
                   module_index)
from .common import find_fsms, iter_value_exprs


def _mod_and_ms(ast: Ast, name: str):
    idx = module_index(ast, name)
    table = resolve(ast)
    return idx, ast.modules[idx], table.modules[name]


def _snapshot(ast: Ast, idx: int) -> str:
    return print_module(ast, idx)


def _replace_in_module(ast: Ast, mod_idx: int, path: tuple, new_node) -> Ast:
    return replace_at(ast, (("modules", mod_idx),) + path, new_node)


def _set_module(ast: Ast, mod_idx: int, new_mod: ModuleDecl) -> Ast:
    return replace_at(ast, (("modules", mod_idx),), new_mod)


# ---- T1: one-hot state re-encoding ----

@register
class StateEncoding(Rule):
    id = RuleId.T1

    def applicable(self, ast, mod, ms, key):
        sites = []
        for fsm in find_fsms(mod, ms):
            n = len(fsm.state_params)
            if n < 2:
                continue
            perm = derive_permutation(key, mod.name, "T1", n, n=n)
            onehot = {fsm.state_params[i]: 1 << perm[i] for i in range(n)}
            if all(fsm.values[p] == onehot[p] for p in fsm.state_params) \
                    and fsm.width == n:
                continue                      # already in keyed one-hot form
            sites.append(TransformSite(self.id, mod.name, (),
                                       aux=(fsm.subject_reg,)))
        return sites

    def apply(self, ast, mod_idx, site, key, payload):
        mod = ast.modules[mod_idx]
        ms = resolve(ast).modules[mod.name]
        fsm = next((f for f in find_fsms(mod, ms)
                    if f.subject_reg == site.aux[0]), None)
        if fsm is None:
            raise SiteStale(f"no re-encodable FSM over '{site.aux[0]}'")
        n = len(fsm.state_params)
        perm = derive_permutation(key, mod.name, "T1", n, n=n)
        for i, pname in enumerate(fsm.state_params):
            path = fsm.param_paths[pname] + (("value",),)
            lit = NumberLiteral(1 << perm[i], width=n, base="b")
            ast = _replace_in_module(ast, mod_idx, path, lit)
        mod = ast.modules[mod_idx]
        new_range = Range(NumberLiteral(n - 1), NumberLiteral(0))
        items = []
        for item in mod.items:
            if isinstance(item, NetDecl) and \
                    any(nm.name in fsm.state_regs for nm in item.names):
                ours = tuple(nm for nm in item.names
                             if nm.name in fsm.state_regs)
                rest = tuple(nm for nm in item.names
                             if nm.name not in fsm.state_regs)
                items.append(dataclasses.replace(
                    item, names=ours, range=new_range, span=None))
                if rest:
                    items.append(dataclasses.replace(
                        item, names=rest, leading_comments=(), span=None))
            else:
                items.append(item)
        mod = dataclasses.replace(mod, items=tuple(items), span=None)
        ast = _set_module(ast, mod_idx, mod)
        return ast, repr(perm).encode()

    def signature(self, ast, mod, ms, key):
        strength = 0
        for fsm in find_fsms(mod, ms):
            n = len(fsm.state_params)
            if n < 2 or fsm.width != n:
                continue
            perm = derive_permutation(key, mod.name, "T1", n, n=n)
            if all(fsm.values[fsm.state_params[i]] == (1 << perm[i])
                   for i in range(n)):
                strength += 1
        return SignatureEvidence(self.id, strength > 0, strength)


# ---- T2: parameterized width ----

_T2_NAMES = ("WIDTH", "DATA_W", "BW", "DW")


def _t2_shared_widths(mod, ms):
    """Literal [N:0] range shapes shared by two or more declarations."""
    counts: dict[int, int] = {}
    for rng in _decl_ranges(mod):
        shape = _literal_desc_shape(rng)
        if shape is not None and shape >= 1:
            counts[shape] = counts.get(shape, 0) + 1
    return {n: c for n, c in counts.items() if c >= 2}


def _decl_ranges(mod):
    for p in mod.ports:
        if p.range is not None:
            yield p.range
    for item in mod.items:
        if isinstance(item, NetDecl) and item.range is not None:
            yield item.range


def _literal_desc_shape(rng: Range):
    if isinstance(rng.msb, NumberLiteral) and isinstance(rng.lsb, NumberLiteral) \
            and rng.lsb.value == 0 and rng.msb.value >= 1:
        return rng.msb.value
    return None


def _t2_param_name(mod, ms, key, msb):
    base = _T2_NAMES[derive_int(key, mod.name, "T2", msb, below=len(_T2_NAMES))]
    name = base
    if name in ms.symbols or name.lower() in KEYWORDS:
        name = base + "_" + derive_suffix(key, mod.name, "T2", msb,
                                          length=3).upper()
    if name in ms.symbols:
        return None
    return name


@register
class ParamModule(Rule):
    id = RuleId.T2

    def applicable(self, ast, mod, ms, key):
        sites = []
        for msb in sorted(_t2_shared_widths(mod, ms)):
            name = _t2_param_name(mod, ms, key, msb)
            if name is not None:
                sites.append(TransformSite(self.id, mod.name, (),
                                           aux=(msb, name)))
        return sites

    def apply(self, ast, mod_idx, site, key, payload):
        msb, name = site.aux
        mod = ast.modules[mod_idx]
        ms = resolve(ast).modules[mod.name]
        if name in ms.symbols:
            raise SiteStale(f"parameter name '{name}' is taken")
        if _t2_shared_widths(mod, ms).get(msb) is None:
            raise SiteStale(f"no shared [{msb}:0] ranges left")
        new_range = Range(
            BinaryOp("-", Identifier(name), NumberLiteral(1)),
            NumberLiteral(0))

        def swap(rng):
            return new_range if _literal_desc_shape(rng) == msb else rng

        ports = tuple(
            dataclasses.replace(p, range=swap(p.range), span=None)
            if p.range is not None and _literal_desc_shape(p.range) == msb
            else p
            for p in mod.ports)
        items = tuple(
            dataclasses.replace(it, range=swap(it.range), span=None)
            if isinstance(it, NetDecl) and it.range is not None
            and _literal_desc_shape(it.range) == msb
            else it
            for it in mod.items)
        param = ParamDecl("parameter",
                          (ParamAssign(name, NumberLiteral(msb + 1)),))
        mod = dataclasses.replace(
            mod, header_params=mod.header_params + (param,),
            ports=ports, items=items, span=None)
        return _set_module(ast, mod_idx, mod), name.encode()

    def signature(self, ast, mod, ms, key):
        strength = 0
        const_params = {n for n, info in ms.symbols.items()
                        if info.kind in ("parameter", "localparam")
                        and info.value is not None and info.value >= 2}
        for pname in const_params:
            uses = 0
            for rng in _decl_ranges(mod):
                names = {x.name for x in walk(rng) if isinstance(x, Identifier)}
                if pname in names:
                    uses += 1
            if uses >= 2:
                strength += 1
        return SignatureEvidence(self.id, strength > 0, strength)


# ---- T3: base conversion ----

def _t3_target_base(key, mod_name, value, width):
    return ("b", "d", "h")[derive_int(key, mod_name, "T3", value, width,
                                      below=3)]


def _t3_eligible(mod):
    for path, e in iter_value_exprs(mod):
        if isinstance(e, NumberLiteral) and e.width is not None \
                and e.width >= 2:
            yield path, e


@register
class BaseConversion(Rule):
    id = RuleId.T3

    def applicable(self, ast, mod, ms, key):
        sites = []
        for path, lit in _t3_eligible(mod):
            target = _t3_target_base(key, mod.name, lit.value, lit.width)
            if lit.base != target:
                sites.append(TransformSite(self.id, mod.name, path,
                                           aux=(lit.value, lit.width)))
        return sites

    def apply(self, ast, mod_idx, site, key, payload):
        mod = ast.modules[mod_idx]
        try:
            node = node_at(mod, site.path)
        except (KeyError, IndexError, TypeError, AttributeError) as exc:
            raise SiteStale(str(exc)) from exc
        if not isinstance(node, NumberLiteral) or \
                (node.value, node.width) != tuple(site.aux):
            raise SiteStale("literal at site changed")
        target = _t3_target_base(key, mod.name, node.value, node.width)
        lit = NumberLiteral(node.value, width=node.width, base=target,
                            signed=node.signed)
        ast = _replace_in_module(ast, mod_idx, site.path, lit)
        return ast, target.encode()

    def signature(self, ast, mod, ms, key):
        strength = 0
        any_eligible = False
        for _, lit in _t3_eligible(mod):
            any_eligible = True
            if lit.base == _t3_target_base(key, mod.name, lit.value, lit.width):
                strength += 1
        return SignatureEvidence(self.id, any_eligible and strength > 0,
                                 strength)


# ---- T4: sensitivity list formatting ----

@register
class SensitivityFormat(Rule):
    id = RuleId.T4

    def applicable(self, ast, mod, ms, key):
        sites = []
        for i, item in enumerate(mod.items):
            sens = getattr(item, "sensitivity", None)
            if isinstance(sens, SensitivityList) and not sens.star \
                    and len(sens.edges) >= 2 and sens.sep_style == "or":
                sites.append(TransformSite(
                    self.id, mod.name, (("items", i), ("sensitivity",)),
                    aux=(len(sens.edges),)))
        return sites

    def apply(self, ast, mod_idx, site, key, payload):
        mod = ast.modules[mod_idx]
        try:
            node = node_at(mod, site.path)
        except (KeyError, IndexError, TypeError, AttributeError) as exc:
            raise SiteStale(str(exc)) from exc
        if not isinstance(node, SensitivityList) or node.sep_style != "or" \
                or len(node.edges) < 2:
            raise SiteStale("sensitivity list changed")
        new = dataclasses.replace(node, sep_style="comma", span=None)
        return _replace_in_module(ast, mod_idx, site.path, new), b"comma"

    def signature(self, ast, mod, ms, key):
        strength = sum(
            1 for item in mod.items
            if isinstance(getattr(item, "sensitivity", None), SensitivityList)
            and not item.sensitivity.star and len(item.sensitivity.edges) >= 2
            and item.sensitivity.sep_style == "comma")
        return SignatureEvidence(self.id, strength > 0, strength)


# ---- T5: keyed binary separators ----

def _t5_pattern(key, mod_name, value, width) -> tuple[int, ...]:
    bits = derive_bits(key, mod_name, "T5", value, width, count=width - 1)
    positions = tuple(i + 1 for i, b in enumerate(bits) if b)
    if not positions:
        positions = (min(4, width - 1),)
    return positions


def _t5_literals(mod):
    for lit in walk(mod):
        if isinstance(lit, NumberLiteral) and lit.base == "b" \
                and lit.width is not None and lit.width >= 5:
            yield lit


@register
class BitSeparation(Rule):
    id = RuleId.T5

    def applicable(self, ast, mod, ms, key):
        mismatched = sum(
            1 for lit in _t5_literals(mod)
            if lit.separators != _t5_pattern(key, mod.name, lit.value,
                                             lit.width))
        if mismatched == 0:
            return []
        return [TransformSite(self.id, mod.name, (), aux=(mismatched,))]

    def apply(self, ast, mod_idx, site, key, payload):
        mod = ast.modules[mod_idx]
        name = mod.name

        def regroup(node):
            if isinstance(node, NumberLiteral) and node.base == "b" \
                    and node.width is not None and node.width >= 5:
                pattern = _t5_pattern(key, name, node.value, node.width)
                if node.separators != pattern:
                    return dataclasses.replace(node, separators=pattern,
                                               span=None)
            return node

        new_mod = map_tree(mod, regroup)
        if new_mod is mod:
            raise SiteStale("no binary literals left to regroup")
        return _set_module(ast, mod_idx, new_mod), b"keyed-groups"

    def signature(self, ast, mod, ms, key):
        matched = 0
        separated = 0
        for lit in _t5_literals(mod):
            if lit.separators:
                separated += 1
                if lit.separators == _t5_pattern(key, mod.name, lit.value,
                                                 lit.width):
                    matched += 1
        present = separated > 0 and matched == separated
        return SignatureEvidence(self.id, present, matched)


# ---- T6: keyed identifier rename ----

def rename_in_module(mod: ModuleDecl, renames: dict[str, str]) -> ModuleDecl:
    """Rename identifiers consistently: declarations, uses, edges."""

    def rn(node):
        if isinstance(node, Identifier) and node.name in renames:
            return dataclasses.replace(node, name=renames[node.name], span=None)
        if isinstance(node, NetName) and node.name in renames:
            return dataclasses.replace(node, name=renames[node.name], span=None)
        if isinstance(node, ParamAssign) and node.name in renames:
            return dataclasses.replace(node, name=renames[node.name], span=None)
        if isinstance(node, Edge) and node.signal in renames:
            return dataclasses.replace(node, signal=renames[node.signal],
                                       span=None)
        if isinstance(node, Instance) and node.inst_name in renames:
            return dataclasses.replace(node, inst_name=renames[node.inst_name],
                                       span=None)
        if isinstance(node, Port) and node.name in renames:
            return dataclasses.replace(node, name=renames[node.name], span=None)
        return node

    return map_tree(mod, rn)


def t6_suffix(key: WatermarkKey, mod_name: str) -> str:
    return "_" + derive_suffix(key, mod_name, "T6", length=4)


@register
class VarRename(Rule):
    id = RuleId.T6

    def applicable(self, ast, mod, ms, key):
        suffix = t6_suffix(key, mod.name)
        sites = []
        for name in internal_identifiers(mod, ms):
            new = name + suffix
            if new in ms.symbols or new in KEYWORDS \
                    or new in REJECTED_KEYWORDS or name.endswith(suffix):
                continue
            sites.append(TransformSite(self.id, mod.name, (), aux=(name,)))
        return sites

    def apply(self, ast, mod_idx, site, key, payload):
        from .stmt_rules import t13_comment_for, t13_kinds
        mod = ast.modules[mod_idx]
        ms = resolve(ast).modules[mod.name]
        (name,) = site.aux
        if name not in ms.symbols:
            raise SiteStale(f"identifier '{name}' not declared")
        suffix = t6_suffix(key, mod.name)
        new = name + suffix
        if new in ms.symbols:
            raise SiteStale(f"rename target '{new}' is taken")
        new_mod = rename_in_module(mod, {name: new})

        # keyed comments referencing the old name must follow the rename
        expected = {t13_comment_for(key, mod.name, kind, name):
                    t13_comment_for(key, mod.name, kind, new)
                    for kind in t13_kinds()}

        def fix_comments(node):
            lead = getattr(node, "leading_comments", None)
            changed = {}
            if lead and any(c.strip() in expected for c in lead):
                changed["leading_comments"] = tuple(
                    expected.get(c.strip(), c) for c in lead)
            trail = getattr(node, "trailing_comment", None)
            if trail and trail.strip() in expected:
                changed["trailing_comment"] = expected[trail.strip()]
            if changed:
                return dataclasses.replace(node, **changed, span=None)
            return node

        new_mod = map_tree(new_mod, fix_comments)
        return _set_module(ast, mod_idx, new_mod), suffix.encode()

    def signature(self, ast, mod, ms, key):
        suffix = t6_suffix(key, mod.name)
        strength = sum(1 for n in ms.symbols if n.endswith(suffix))
        return SignatureEvidence(self.id, strength > 0, strength,
                                 name_dependent=True)


# ---- T7: bit order flip ----

def _ascending_decls(mod):
    """(kind, index, name, lo, hi) for const-literal ascending ranges."""
    for i, p in enumerate(mod.ports):
        if p.range is not None and isinstance(p.range.msb, NumberLiteral) \
                and isinstance(p.range.lsb, NumberLiteral) \
                and p.range.msb.value < p.range.lsb.value:
            yield ("port", i, p.name, p.range.msb.value, p.range.lsb.value)
    for i, item in enumerate(mod.items):
        if isinstance(item, NetDecl) and item.range is not None \
                and isinstance(item.range.msb, NumberLiteral) \
                and isinstance(item.range.lsb, NumberLiteral) \
                and item.range.msb.value < item.range.lsb.value:
            for nm in item.names:
                yield ("item", i, nm.name, item.range.msb.value,
                       item.range.lsb.value)


def _selects_all_literal(mod, names) -> bool:
    for node in walk(mod):
        if isinstance(node, (BitSelect, PartSelect)) \
                and isinstance(node.base, Identifier) \
                and node.base.name in names:
            if isinstance(node, BitSelect):
                if not isinstance(node.index, NumberLiteral):
                    return False
            else:
                if not (isinstance(node.msb, NumberLiteral)
                        and isinstance(node.lsb, NumberLiteral)):
                    return False
    return True


@register
class BitOrder(Rule):
    id = RuleId.T7

    def applicable(self, ast, mod, ms, key):
        decls = list(_ascending_decls(mod))
        if not decls:
            return []
        names = {d[2] for d in decls}
        if not _selects_all_literal(mod, names):
            return []
        return [TransformSite(self.id, mod.name, (),
                              aux=tuple(sorted(names)))]

    def apply(self, ast, mod_idx, site, key, payload):
        mod = ast.modules[mod_idx]
        decls = list(_ascending_decls(mod))
        if not decls:
            raise SiteStale("no ascending ranges left")
        names = {d[2] for d in decls}
        if not _selects_all_literal(mod, names):
            raise SiteStale("non-literal select appeared")
        bounds = {d[2]: (d[3], d[4]) for d in decls}   # name -> (lo, hi)

        def flip_range(rng):
            return Range(NumberLiteral(rng.lsb.value),
                         NumberLiteral(rng.msb.value))

        ports = tuple(
            dataclasses.replace(p, range=flip_range(p.range), span=None)
            if p.name in names and p.range is not None else p
            for p in mod.ports)
        items = tuple(
            dataclasses.replace(it, range=flip_range(it.range), span=None)
            if isinstance(it, NetDecl) and any(nm.name in names
                                               for nm in it.names)
            else it
            for it in mod.items)
        mod = dataclasses.replace(mod, ports=ports, items=items, span=None)

        def mirror(node):
            if isinstance(node, BitSelect) and isinstance(node.base, Identifier) \
                    and node.base.name in bounds:
                lo, hi = bounds[node.base.name]
                i = node.index.value
                return dataclasses.replace(
                    node, index=NumberLiteral(lo + hi - i), span=None)
            if isinstance(node, PartSelect) and isinstance(node.base, Identifier) \
                    and node.base.name in bounds:
                lo, hi = bounds[node.base.name]
                return dataclasses.replace(
                    node, msb=NumberLiteral(lo + hi - node.msb.value),
                    lsb=NumberLiteral(lo + hi - node.lsb.value), span=None)
            return node

        mod = map_tree(mod, mirror)
        return _set_module(ast, mod_idx, mod), b"descending"

    def signature(self, ast, mod, ms, key):
        ranges = 0
        ascending = 0
        for rng in _decl_ranges(mod):
            ranges += 1
            if isinstance(rng.msb, NumberLiteral) \
                    and isinstance(rng.lsb, NumberLiteral) \
                    and rng.msb.value < rng.lsb.value:
                ascending += 1
        present = ranges > 0 and ascending == 0
        return SignatureEvidence(self.id, present, ranges - ascending)
