"""Evaluation harness: simulation oracle, equivalence, attacks, metrics."""

from .attack import AttackSpec, rename_attack, rename_attack_ast
from .equiv import EquivBudget, EquivalenceVerdict, check_equivalence
from .evaluate import EvalConfig, MetricsReport, evaluate, token_edit_distance
from .sim import Simulator, simulate

__all__ = [
    "AttackSpec", "rename_attack", "rename_attack_ast",
    "EquivBudget", "EquivalenceVerdict", "check_equivalence",
    "EvalConfig", "MetricsReport", "evaluate", "token_edit_distance",
    "Simulator", "simulate",
]
