"""Name-agnostic payload tracing in a gate-level netlist.

For every net group of the expected width, the tracer extracts the
combinational cone driving the group (stopping at primary inputs, register
outputs, and unknown cells), then tries to prove a gated-constant property:
some primary-input bit C forces every group bit to a constant when C = 1,
for all assignments of the remaining cone inputs (exhaustive, cones of up
to 20 free inputs). Proven constants are reassembled and must pass keyed
payload framing, so clean reset/enable structures never produce a trace.

Rename attacks change every net name but neither widths nor gate structure,
which is exactly why the search keys on widths and connectivity only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..errors import BadFraming
from ..keys import WatermarkKey
from ..payload import decode_payload
from .graph import CONST0, CONST1, CONSTX, Cell, NetlistGraph

MAX_CONE_INPUTS = 20
_MAX_GROUP_PERMUTATIONS = 720          # up to 6 carrier groups

# Combinational cell semantics: type -> (inputs, output, fn(values) -> bit).
_COMB_CELLS = {
    "$_BUF_": (("A",), "Y", lambda v: v["A"]),
    "$_NOT_": (("A",), "Y", lambda v: 1 - v["A"]),
    "$_AND_": (("A", "B"), "Y", lambda v: v["A"] & v["B"]),
    "$_NAND_": (("A", "B"), "Y", lambda v: 1 - (v["A"] & v["B"])),
    "$_OR_": (("A", "B"), "Y", lambda v: v["A"] | v["B"]),
    "$_NOR_": (("A", "B"), "Y", lambda v: 1 - (v["A"] | v["B"])),
    "$_XOR_": (("A", "B"), "Y", lambda v: v["A"] ^ v["B"]),
    "$_XNOR_": (("A", "B"), "Y", lambda v: 1 - (v["A"] ^ v["B"])),
    "$_ANDNOT_": (("A", "B"), "Y", lambda v: v["A"] & (1 - v["B"])),
    "$_ORNOT_": (("A", "B"), "Y", lambda v: v["A"] | (1 - v["B"])),
    "$_MUX_": (("A", "B", "S"), "Y",
               lambda v: v["B"] if v["S"] else v["A"]),
    "$_NMUX_": (("A", "B", "S"), "Y",
                lambda v: 1 - (v["B"] if v["S"] else v["A"])),
    "$_AOI3_": (("A", "B", "C"), "Y",
                lambda v: 1 - ((v["A"] & v["B"]) | v["C"])),
    "$_OAI3_": (("A", "B", "C"), "Y",
                lambda v: 1 - ((v["A"] | v["B"]) & v["C"])),
    "$_AOI4_": (("A", "B", "C", "D"), "Y",
                lambda v: 1 - ((v["A"] & v["B"]) | (v["C"] & v["D"]))),
    "$_OAI4_": (("A", "B", "C", "D"), "Y",
                lambda v: 1 - ((v["A"] | v["B"]) & (v["C"] | v["D"]))),
    # generic library aliases
    "BUF": (("A",), "Y", lambda v: v["A"]),
    "INV": (("A",), "Y", lambda v: 1 - v["A"]),
    "AND2": (("A", "B"), "Y", lambda v: v["A"] & v["B"]),
    "NAND2": (("A", "B"), "Y", lambda v: 1 - (v["A"] & v["B"])),
    "OR2": (("A", "B"), "Y", lambda v: v["A"] | v["B"]),
    "NOR2": (("A", "B"), "Y", lambda v: 1 - (v["A"] | v["B"])),
    "XOR2": (("A", "B"), "Y", lambda v: v["A"] ^ v["B"]),
    "XNOR2": (("A", "B"), "Y", lambda v: 1 - (v["A"] ^ v["B"])),
    "MUX2": (("A", "B", "S"), "Y", lambda v: v["B"] if v["S"] else v["A"]),
}


@dataclass
class NetlistEvidence:
    found: bool
    payload_bytes: bytes = b""
    trigger_net: str = ""
    carrier_net: str = ""
    trace: list[str] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


@dataclass
class _GatedGroup:
    group_name: str
    trigger: str
    constant: int
    width: int
    cone_cells: list[str]


class _ConeIndex:
    def __init__(self, graph: NetlistGraph):
        self.graph = graph
        self.driver: dict[str, tuple[Cell, str]] = {}
        for cell in graph.cells:
            spec = _COMB_CELLS.get(cell.cell_type)
            out_ports = [spec[1]] if spec else self._unknown_outputs(cell)
            for port in out_ports:
                for atom in cell.conns.get(port, []):
                    self.driver[graph.find(atom)] = (cell, port)
        self.inputs = {graph.find(a) for a in graph.input_atoms()}

    @staticmethod
    def _unknown_outputs(cell: Cell) -> list[str]:
        # registers and unrecognized cells cut the cone at Q-like ports
        return [p for p in cell.conns if p in ("Q", "Y", "Z", "OUT")]

    def cone(self, atoms: list[str]) -> tuple[list[Cell], list[str]] | None:
        """Topologically ordered cells and free inputs of the cone driving
        `atoms`; None on a combinational cycle."""
        order: list[Cell] = []
        free: list[str] = []
        state: dict[int, int] = {}       # id(cell) -> 0 visiting, 1 done
        seen_free: set[str] = set()

        def visit_atom(atom: str) -> bool:
            atom = self.graph.find(atom)
            if atom in (CONST0, CONST1, CONSTX):
                return True
            drv = self.driver.get(atom)
            if drv is None or drv[0].cell_type not in _COMB_CELLS:
                if atom not in seen_free:
                    seen_free.add(atom)
                    free.append(atom)
                return True
            return visit_cell(drv[0])

        def visit_cell(cell: Cell) -> bool:
            st = state.get(id(cell))
            if st == 1:
                return True
            if st == 0:
                return False             # cycle
            state[id(cell)] = 0
            in_ports = _COMB_CELLS[cell.cell_type][0]
            for port in in_ports:
                for atom in cell.conns.get(port, []):
                    if not visit_atom(atom):
                        return False
            state[id(cell)] = 1
            order.append(cell)
            return True

        for atom in atoms:
            if not visit_atom(atom):
                return None
        return order, free


def _eval_cone(graph: NetlistGraph, order: list[Cell], env: dict[str, int],
               atoms: list[str]) -> list[int] | None:
    values = dict(env)
    values[CONST0] = 0
    values[CONST1] = 1
    for cell in order:
        in_ports, out_port, fn = _COMB_CELLS[cell.cell_type]
        ins = {}
        for port in in_ports:
            bits = cell.conns.get(port, [])
            if len(bits) != 1:
                return None
            v = values.get(graph.find(bits[0]))
            if v is None:
                return None
            ins[port] = v
        out_bits = cell.conns.get(out_port, [])
        if len(out_bits) != 1:
            return None
        values[graph.find(out_bits[0])] = fn(ins)
    out = []
    for atom in atoms:
        v = values.get(graph.find(atom))
        if v is None:
            return None
        out.append(v)
    return out


def _bit_constant_under(graph, order, free, atom, trig) -> int | None:
    """The constant this bit takes with trig=1, or None if it varies.

    Exhausts every assignment of the bit's other cone inputs; a bit whose
    cone does not contain the trigger must be constant outright.
    """
    others = [a for a in free if a != trig]
    constant = None
    for bits in itertools.product((0, 1), repeat=len(others)):
        env = dict(zip(others, bits))
        env[trig] = 1
        vec = _eval_cone(graph, order, env, [atom])
        if vec is None:
            return None
        if constant is None:
            constant = vec[0]
        elif constant != vec[0]:
            return None
    return constant


def _prove_gated_groups(graph: NetlistGraph, width: int,
                        diagnostics: list[str]) -> list[_GatedGroup]:
    """Gated-constant proof per group, bit by bit.

    Each bit's cone is exhausted independently (bound MAX_CONE_INPUTS per
    bit); trigger candidates are the primary-input atoms appearing in any
    bit cone of the group."""
    index = _ConeIndex(graph)
    proven: list[_GatedGroup] = []
    for name in sorted(graph.width_groups(width)):
        atoms = graph.width_groups(width)[name]
        cones = []
        candidates: set[str] = set()
        ok = True
        for atom in atoms:
            cone = index.cone([atom])
            if cone is None:
                diagnostics.append(f"{name}: combinational cycle, skipped")
                ok = False
                break
            order, free = cone
            if len(free) > MAX_CONE_INPUTS:
                diagnostics.append(
                    f"{name}: bit cone has {len(free)} inputs "
                    f"(> {MAX_CONE_INPUTS}), skipped")
                ok = False
                break
            cones.append((atom, order, free))
            candidates.update(a for a in free if a in index.inputs)
        if not ok or not candidates:
            continue
        for trig in sorted(candidates):
            value = 0
            cells: list[str] = []
            good = True
            for atom, order, free in cones:
                bit = _bit_constant_under(graph, order, free, atom, trig)
                if bit is None:
                    good = False
                    break
                value = (value << 1) | bit
                cells.extend(c.name for c in order)
            if good:
                proven.append(_GatedGroup(name, trig, value, width, cells))
                break
    return proven


def _assemble(groups: list[_GatedGroup], key: WatermarkKey
              ) -> tuple[bytes, list[_GatedGroup]] | None:
    """Try orderings of carrier groups until keyed framing validates."""
    nbytes = {g.group_name: g.width // 8 for g in groups}
    usable = []
    for g in groups:
        if nbytes[g.group_name] < 1:
            continue
        if g.constant >> (8 * nbytes[g.group_name]):
            continue                      # payload bytes sit in the low bits
        usable.append(g)
    if not usable:
        return None
    usable.sort(key=lambda g: g.group_name)
    count = 0
    for perm in itertools.permutations(usable):
        count += 1
        if count > _MAX_GROUP_PERMUTATIONS:
            break
        blob = b"".join(
            g.constant.to_bytes(nbytes[g.group_name], "big") for g in perm)
        for end in range(len(blob), 3, -1):
            try:
                decode_payload(blob[:end], key)
                return blob[:end], list(perm)
            except BadFraming:
                continue
    return None


def trace_watermark(graph: NetlistGraph, key: WatermarkKey,
                    expected_width: int) -> NetlistEvidence:
    """Search all nets of `expected_width` for trigger-gated payload bytes."""
    diagnostics: list[str] = []
    proven = _prove_gated_groups(graph, expected_width, diagnostics)
    by_trigger: dict[str, list[_GatedGroup]] = {}
    for g in proven:
        by_trigger.setdefault(g.trigger, []).append(g)
    for trig in sorted(by_trigger):
        result = _assemble(by_trigger[trig], key)
        if result is not None:
            blob, order = result
            return NetlistEvidence(
                found=True, payload_bytes=blob, trigger_net=trig,
                carrier_net=",".join(g.group_name for g in order),
                trace=[c for g in order for c in g.cone_cells],
                diagnostics=diagnostics)
    return NetlistEvidence(found=False, diagnostics=diagnostics)


def trace_any_width(graph: NetlistGraph, key: WatermarkKey,
                    widths: list[int] | None = None) -> NetlistEvidence:
    """Scan candidate widths (all declared vector widths >= 8 by default).

    Multi-register payloads spread over several widths are assembled by
    collecting gated groups across every candidate width first.
    """
    diagnostics: list[str] = []
    if widths is None:
        widths = sorted({w for w, _, _ in graph.nets.values() if w >= 8}
                        | {w for _, w, _, _ in graph.ports.values() if w >= 8})
    proven: list[_GatedGroup] = []
    for width in widths:
        proven.extend(_prove_gated_groups(graph, width, diagnostics))
    by_trigger: dict[str, list[_GatedGroup]] = {}
    for g in proven:
        by_trigger.setdefault(g.trigger, []).append(g)
    for trig in sorted(by_trigger):
        result = _assemble(by_trigger[trig], key)
        if result is not None:
            blob, order = result
            return NetlistEvidence(
                found=True, payload_bytes=blob, trigger_net=trig,
                carrier_net=",".join(g.group_name for g in order),
                trace=[c for g in order for c in g.cone_cells],
                diagnostics=diagnostics)
    return NetlistEvidence(found=False, diagnostics=diagnostics)
