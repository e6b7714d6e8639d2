"""The transformation-rule catalog: 15 semantics-preserving, keyed rewrites.

Public surface:
  applicable_sites(ast, rule, key)      -> list[TransformSite]
  apply(ast, site, key, payload=None)   -> (Ast, TransformationRecord)
  signature_present(ast, rule, key)     -> SignatureEvidence
  all_signatures(ast, key)              -> dict[RuleId, SignatureEvidence]
  catalog()                             -> machine-readable rule listing
"""

from __future__ import annotations

from ..ast_nodes import Ast
from ..keys import WatermarkKey
from ..payload import Payload
from ..printer import print_module
from ..symbols import resolve
from .base import (DESCRIPTIONS, NAME_DEPENDENT, RuleId, SignatureEvidence,
                   TransformSite, TransformationRecord, all_rules, get_rule,
                   module_index)
from . import token_rules as _token_rules    # noqa: F401 (registers rules)
from . import stmt_rules as _stmt_rules      # noqa: F401 (registers rules)

__all__ = [
    "RuleId", "TransformSite", "TransformationRecord", "SignatureEvidence",
    "applicable_sites", "apply", "signature_present", "all_signatures",
    "catalog", "NAME_DEPENDENT",
]


def applicable_sites(ast: Ast, rule: RuleId, key: WatermarkKey
                     ) -> list[TransformSite]:
    """Every site where `rule` can be applied, module by module."""
    table = resolve(ast)
    impl = get_rule(rule)
    sites = []
    for mod in ast.modules:
        sites.extend(impl.applicable(ast, mod, table.modules[mod.name], key))
    return sites


def apply(ast: Ast, site: TransformSite, key: WatermarkKey,
          payload: Payload | None = None) -> tuple[Ast, TransformationRecord]:
    """Apply one transformation; SiteStale when the site no longer resolves."""
    idx = module_index(ast, site.module)
    before = print_module(ast, idx)
    new_ast, params = get_rule(site.rule).apply(ast, idx, site, key, payload)
    after = print_module(new_ast, idx)
    record = TransformationRecord(site, before, after, params)
    return new_ast, record


def signature_present(ast: Ast, rule: RuleId, key: WatermarkKey
                      ) -> SignatureEvidence:
    """Keyed evidence for one rule, aggregated over all modules."""
    table = resolve(ast)
    impl = get_rule(rule)
    present = False
    strength = 0
    for mod in ast.modules:
        ev = impl.signature(ast, mod, table.modules[mod.name], key)
        present = present or ev.present
        strength += ev.strength
    return SignatureEvidence(rule, present, strength,
                             name_dependent=rule in NAME_DEPENDENT)


def all_signatures(ast: Ast, key: WatermarkKey
                   ) -> dict[RuleId, SignatureEvidence]:
    table = resolve(ast)
    out = {}
    for impl in all_rules():
        present = False
        strength = 0
        for mod in ast.modules:
            ev = impl.signature(ast, mod, table.modules[mod.name], key)
            present = present or ev.present
            strength += ev.strength
        out[impl.id] = SignatureEvidence(
            impl.id, present, strength,
            name_dependent=impl.id in NAME_DEPENDENT)
    return out


def catalog() -> list[dict]:
    """Rule listing for the CLI `rules` command."""
    return [
        {
            "id": rule.name,
            "granularity": rule.granularity,
            "description": DESCRIPTIONS[rule],
            "name_dependent": rule in NAME_DEPENDENT,
        }
        for rule in RuleId
    ]
