"""Rule registry and the shared transform/evidence data types."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..ast_nodes import Ast, ModuleDecl
from ..errors import SiteStale
from ..keys import WatermarkKey
from ..payload import Payload


class RuleId(Enum):
    T1 = "state_encoding"
    T2 = "param_module"
    T3 = "base_conversion"
    T4 = "sensitivity_format"
    T5 = "bit_separation"
    T6 = "var_rename"
    T7 = "bit_order"
    T8 = "state_transition_path"
    T9 = "comb_logic_op"
    T10 = "comb_assign"
    T11 = "ternary"
    T12 = "init_order"
    T13 = "add_comments"
    T14 = "cond_order"
    T15 = "redundant_logic"

    @property
    def num(self) -> int:
        return int(self.name[1:])

    @property
    def granularity(self) -> str:
        return "token" if self.num <= 7 else "statement"


DESCRIPTIONS = {
    RuleId.T1: "re-encode FSM state constants as one-hot with a keyed bit order",
    RuleId.T2: "hoist a shared literal bit width into a module parameter",
    RuleId.T3: "rewrite numeric literals in a key-selected base, value-preserving",
    RuleId.T4: "reformat 'or'-separated sensitivity lists with commas",
    RuleId.T5: "group long binary literals with key-derived separators",
    RuleId.T6: "append a key-derived suffix to an internal identifier",
    RuleId.T7: "flip ascending bit ranges to descending, mirroring selects",
    RuleId.T8: "add an unreachable keyed detour state that re-enters the FSM",
    RuleId.T9: "rewrite boolean operators into De Morgan-equivalent form",
    RuleId.T10: "turn a continuous assignment into an always @* block",
    RuleId.T11: "collapse a two-armed if/else assignment into a ternary",
    RuleId.T12: "permute independent signal initializations by a keyed order",
    RuleId.T13: "attach key-derived descriptive comments to signal declarations",
    RuleId.T14: "orient commutative operand pairs by a keyed bit",
    RuleId.T15: "insert trigger-gated constants carrying the encrypted payload",
}

# Rules whose evidence survives only while identifier names are unchanged.
NAME_DEPENDENT = frozenset({RuleId.T6, RuleId.T13})


@dataclass(frozen=True)
class TransformSite:
    rule: RuleId
    module: str
    path: tuple = ()          # path steps from the module node
    aux: tuple = ()           # rule-specific parameters, JSON-serializable


@dataclass(frozen=True)
class TransformationRecord:
    site: TransformSite
    before_span: str
    after_span: str
    key_derived_params: bytes = b""


@dataclass(frozen=True)
class SignatureEvidence:
    rule: RuleId
    present: bool
    strength: int = 0
    name_dependent: bool = False


class Rule:
    """One Table-of-transformations entry: applicability, apply, signature."""

    id: RuleId

    def applicable(self, ast: Ast, mod: ModuleDecl, ms, key: WatermarkKey
                   ) -> list[TransformSite]:
        raise NotImplementedError

    def apply(self, ast: Ast, mod_index: int, site: TransformSite,
              key: WatermarkKey, payload: Payload) -> tuple[Ast, bytes]:
        """Return (new ast, key-derived parameter bytes). Raise SiteStale if
        the site no longer resolves."""
        raise NotImplementedError

    def signature(self, ast: Ast, mod: ModuleDecl, ms, key: WatermarkKey
                  ) -> SignatureEvidence:
        raise NotImplementedError


_REGISTRY: dict[RuleId, Rule] = {}


def register(rule_cls):
    inst = rule_cls()
    _REGISTRY[inst.id] = inst
    return rule_cls


def get_rule(rule_id: RuleId) -> Rule:
    return _REGISTRY[rule_id]


def all_rules() -> list[Rule]:
    return [_REGISTRY[r] for r in RuleId]


def module_index(ast: Ast, name: str) -> int:
    for i, m in enumerate(ast.modules):
        if m.name == name:
            return i
    raise SiteStale(f"no module named '{name}'")
