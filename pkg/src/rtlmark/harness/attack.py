"""Variable-name replacement attack.

Renames a fraction of the internal identifiers of every module to fresh
random names (3 to 10 characters), consistently across declaration and all
uses. Top-level ports and header parameters are preserved: attackers keep
the interface stable or the stolen IP stops dropping in. Comments are left
untouched; the module name is not a variable and is never renamed.
"""

from __future__ import annotations

import math
import random
import string
from dataclasses import dataclass

from ..ast_nodes import Ast, SourceText
from ..lexer import KEYWORDS, REJECTED_KEYWORDS
from ..parser import parse
from ..printer import print_ast
from ..symbols import internal_identifiers, resolve
from ..transforms.token_rules import rename_in_module


@dataclass(frozen=True)
class AttackSpec:
    fraction: float = 1.0
    min_len: int = 3
    max_len: int = 10
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.fraction <= 1.0):
            raise ValueError("fraction must be in (0, 1]")
        if not (3 <= self.min_len <= self.max_len <= 10):
            raise ValueError("name lengths must stay within [3, 10]")


def _fresh_name(rng: random.Random, taken: set[str], spec: AttackSpec) -> str:
    while True:
        length = rng.randint(spec.min_len, spec.max_len)
        name = rng.choice(string.ascii_lowercase) + "".join(
            rng.choice(string.ascii_lowercase + string.digits + "_")
            for _ in range(length - 1))
        if name not in taken and name not in KEYWORDS \
                and name not in REJECTED_KEYWORDS:
            taken.add(name)
            return name


def rename_attack_ast(ast: Ast, spec: AttackSpec) -> Ast:
    rng = random.Random(spec.seed)
    table = resolve(ast)
    modules = []
    for mod in ast.modules:
        ms = table.modules[mod.name]
        candidates = internal_identifiers(mod, ms)
        count = math.ceil(spec.fraction * len(candidates))
        chosen = candidates[:count] if count >= len(candidates) else \
            sorted(rng.sample(range(len(candidates)), count))
        picked = [candidates[i] for i in chosen] \
            if count < len(candidates) else list(candidates)
        taken = set(ms.symbols)
        renames = {name: _fresh_name(rng, taken, spec) for name in picked}
        modules.append(rename_in_module(mod, renames) if renames else mod)
    import dataclasses
    return dataclasses.replace(ast, modules=tuple(modules), span=None)


def rename_attack(source: SourceText, spec: AttackSpec) -> SourceText:
    """Parse, rename, and reprint; deterministic for a fixed seed."""
    attacked = rename_attack_ast(parse(source), spec)
    return print_ast(attacked)
