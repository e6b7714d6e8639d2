"""Bounded input/output equivalence checking between two modules.

Combinational pairs with a small input space are checked exhaustively;
everything else gets directed corner vectors plus seeded random stimulus.
Extra inputs present on only one side (the watermark trigger) are tied low,
which is exactly the condition under which trigger-gated logic is dead.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..ast_nodes import Ast
from ..errors import UnsupportedConstruct
from .sim import Simulator, _mask


@dataclass(frozen=True)
class EquivBudget:
    exhaustive_input_bits: int = 12
    random_vectors: int = 1000
    sequential_cycles: int = 1000
    seed: int = 3407


@dataclass
class EquivalenceVerdict:
    kind: str                   # equivalent-exhaustive / equivalent-sampled / inequivalent
    checked: int = 0
    counterexample: dict | None = field(default=None)

    @property
    def equivalent(self) -> bool:
        return self.kind.startswith("equivalent")

    def __str__(self):
        if self.kind == "equivalent-sampled":
            return f"equivalent-sampled({self.checked})"
        if self.kind == "inequivalent":
            return f"inequivalent({self.counterexample})"
        return self.kind


_CLOCK_HINTS = ("clk", "clock")
_RESET_HINTS = ("rst", "reset", "clear", "clr")


def check_equivalence(a: Ast, b: Ast, budget: EquivBudget | None = None,
                      top: str | None = None) -> EquivalenceVerdict:
    budget = budget or EquivBudget()
    sim_a = Simulator(a, top)
    sim_b = Simulator(b, top if top is None else top)

    outs_a = {n: sim_a.signals[n].width for n in sim_a.outputs}
    outs_b = {n: sim_b.signals[n].width for n in sim_b.outputs}
    if outs_a != outs_b:
        return EquivalenceVerdict("inequivalent", 0, {
            "reason": "output ports differ", "a": outs_a, "b": outs_b})
    ins_a = {n: sim_a.signals[n].width for n in sim_a.inputs}
    ins_b = {n: sim_b.signals[n].width for n in sim_b.inputs}
    common = {n: w for n, w in ins_a.items() if n in ins_b}
    for n in common:
        if ins_a[n] != ins_b[n]:
            return EquivalenceVerdict("inequivalent", 0, {
                "reason": f"input '{n}' width differs"})
    # Inputs only one side has are tied low on that side.
    tied_a = {n: 0 for n in ins_a if n not in common}
    tied_b = {n: 0 for n in ins_b if n not in common}

    sequential = bool(sim_a._seq) or bool(sim_b._seq)
    if sequential:
        return _check_sequential(sim_a, sim_b, common, tied_a, tied_b, budget)
    return _check_combinational(sim_a, sim_b, common, tied_a, tied_b, budget)


def _apply(sim: Simulator, values: dict, tied: dict) -> dict:
    return sim.step({**values, **tied})


def _check_combinational(sim_a, sim_b, common, tied_a, tied_b,
                         budget: EquivBudget) -> EquivalenceVerdict:
    names = sorted(common)
    total_bits = sum(common[n] for n in names)
    if total_bits <= budget.exhaustive_input_bits:
        count = 0
        for idx in range(1 << total_bits):
            values = _unpack(idx, names, common)
            if (cex := _compare(sim_a, sim_b, values, tied_a, tied_b, count)):
                return EquivalenceVerdict("inequivalent", count, cex)
            count += 1
        return EquivalenceVerdict("equivalent-exhaustive", count)

    rng = random.Random(budget.seed)
    vectors = _corner_vectors(names, common)
    for _ in range(budget.random_vectors):
        vectors.append({n: rng.getrandbits(common[n]) for n in names})
    for i, values in enumerate(vectors):
        if (cex := _compare(sim_a, sim_b, values, tied_a, tied_b, i)):
            return EquivalenceVerdict("inequivalent", i, cex)
    return EquivalenceVerdict("equivalent-sampled", len(vectors))


def _unpack(idx: int, names, widths) -> dict:
    values = {}
    shift = 0
    for n in names:
        values[n] = (idx >> shift) & _mask(widths[n])
        shift += widths[n]
    return values


def _corner_vectors(names, widths) -> list[dict]:
    vectors = [{n: 0 for n in names},
               {n: _mask(widths[n]) for n in names}]
    for n in names:
        for bit in range(widths[n]):
            v = {m: 0 for m in names}
            v[n] = 1 << bit
            vectors.append(v)
    return vectors


def _compare(sim_a, sim_b, values, tied_a, tied_b, step) -> dict | None:
    out_a = _apply(sim_a, values, tied_a)
    out_b = _apply(sim_b, values, tied_b)
    if out_a != out_b:
        diff = {n: (out_a[n], out_b[n]) for n in out_a if out_a[n] != out_b[n]}
        return {"step": step, "inputs": dict(values), "outputs": diff}
    return None


def _classify_inputs(sim_a, sim_b, common) -> tuple[list, list, list]:
    """Split common inputs into clocks, resets, and data."""
    edge_sigs: dict[str, str] = {}
    for sim in (sim_a, sim_b):
        for edges, _ in sim._seq:
            for kind, sig in edges:
                edge_sigs.setdefault(sig, kind)
    clocks, resets, data = [], [], []
    edge_inputs = [n for n in sorted(common) if n in edge_sigs]
    named_clocks = [n for n in edge_inputs
                    if any(h in n.lower() for h in _CLOCK_HINTS)]
    for n in sorted(common):
        if n in named_clocks:
            clocks.append(n)
        elif n in edge_sigs:
            resets.append((n, 0 if edge_sigs[n] == "negedge" else 1))
        else:
            data.append(n)
    if not clocks and edge_inputs:
        # no name hint: first edge-listed input drives the clock pattern
        first = edge_inputs[0]
        clocks.append(first)
        resets = [(n, lvl) for n, lvl in resets if n != first]
    return clocks, resets, data


def _check_sequential(sim_a, sim_b, common, tied_a, tied_b,
                      budget: EquivBudget) -> EquivalenceVerdict:
    clocks, resets, data = _classify_inputs(sim_a, sim_b, common)
    rng = random.Random(budget.seed)
    cycles = budget.sequential_cycles
    repulse_at = max(4, cycles // 2)
    for cycle in range(cycles):
        values = {n: rng.getrandbits(common[n]) for n in data}
        for n, active in resets:
            if cycle < 2 or cycle == repulse_at:
                values[n] = active
            else:
                values[n] = active if rng.random() < 0.02 else active ^ 1
        # low phase then high phase of every clock
        for phase in (0, 1):
            step_values = dict(values)
            for c in clocks:
                step_values[c] = phase
            cex = _compare(sim_a, sim_b, step_values, tied_a, tied_b, cycle)
            if cex:
                return EquivalenceVerdict("inequivalent", cycle, cex)
    if not clocks and not resets and not data:
        raise UnsupportedConstruct("sequential module with no usable inputs")
    return EquivalenceVerdict("equivalent-sampled", cycles)
