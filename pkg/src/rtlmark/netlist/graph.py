"""Structural gate-level netlist parsing into a connection graph.

Accepts the structural-Verilog dialect synthesis tools emit with generic
gate libraries: non-ANSI module headers, scalar/vector net declarations,
escaped identifiers (backslash to whitespace), cell instances with named
port connections, and assign aliases (identifiers, selects, concats,
constants). Behavioral constructs are a ParseError: a netlist has none.

Nets are flattened to bit atoms: "name" for scalars, "name[3]" for vector
bits, "$0"/"$1"/"$x" for constants. Assign aliases are resolved through a
union-find so connectivity queries see through buffers of wiring.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..ast_nodes import SourceText
from ..errors import ParseError

CONST0, CONST1, CONSTX = "$0", "$1", "$x"
_CONSTS = (CONST0, CONST1, CONSTX)

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<escaped>\\[^\s]+)
  | (?P<number>\d+'s?[bodhBODH][0-9a-fA-FxXzZ_?]+|\d+)
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$.]*)
  | (?P<op>[()\[\]{},.;:=])
""", re.VERBOSE | re.DOTALL)

_BEHAVIORAL = frozenset({"always", "initial", "if", "case", "for", "begin"})


@dataclass
class Cell:
    cell_type: str
    name: str
    conns: dict[str, list[str]]      # port -> bit atoms, MSB first


@dataclass
class NetlistGraph:
    module: str
    ports: dict[str, tuple[str, int, int, int]] = field(default_factory=dict)
    # name -> (direction, width, msb, lsb)
    nets: dict[str, tuple[int, int, int]] = field(default_factory=dict)
    # name -> (width, msb, lsb)
    cells: list[Cell] = field(default_factory=list)
    _alias: dict[str, str] = field(default_factory=dict)
    unresolved: list[str] = field(default_factory=list)

    # union-find over bit atoms (assign aliases)
    def find(self, atom: str) -> str:
        seen = []
        while atom in self._alias:
            seen.append(atom)
            atom = self._alias[atom]
        for s in seen:
            self._alias[s] = atom
        return atom

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        # constants win as representatives; then stable by name
        if rb in _CONSTS or (ra not in _CONSTS and rb < ra):
            ra, rb = rb, ra
        self._alias[rb] = ra

    def bits_of(self, name: str) -> list[str]:
        """Bit atoms of a declared net, MSB first."""
        if name in self.nets:
            width, msb, lsb = self.nets[name]
        elif name in self.ports:
            _, width, msb, lsb = self.ports[name]
        else:
            return [name]
        if width == 1 and msb == 0 and lsb == 0:
            return [name]
        step = -1 if msb >= lsb else 1
        return [f"{name}[{i}]" for i in range(msb, lsb + step, step)]

    def input_atoms(self) -> set[str]:
        out = set()
        for name, (direction, width, msb, lsb) in self.ports.items():
            if direction != "input":
                continue
            if width == 1:
                out.add(name)
            else:
                step = -1 if msb >= lsb else 1
                out.update(f"{name}[{i}]" for i in range(msb, lsb + step, step))
        return out

    def width_groups(self, width: int) -> dict[str, list[str]]:
        """Declared vector nets (and ports) of exactly `width` bits."""
        groups = {}
        for name, (w, msb, lsb) in self.nets.items():
            if w == width and w > 1:
                groups[name] = self.bits_of(name)
        for name, (_, w, msb, lsb) in self.ports.items():
            if w == width and w > 1 and name not in groups:
                groups[name] = self.bits_of(name)
        return groups


class _Lexer:
    def __init__(self, text: str, origin: str):
        self.tokens: list[tuple[str, str, int]] = []   # (kind, text, line)
        line = 1
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}",
                                 line, 1, origin)
            kind = m.lastgroup
            tok = m.group()
            if kind not in ("ws", "comment"):
                self.tokens.append((kind, tok, line))
            line += tok.count("\n")
            pos = m.end()
        self.tokens.append(("eof", "", line))
        self.pos = 0
        self.origin = origin

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        if tok[0] != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str):
        kind, tok, line = self.next()
        if tok != text:
            raise ParseError(f"expected '{text}', got '{tok or '<eof>'}'",
                             line, 1, self.origin)
        return tok

    def err(self, msg: str) -> ParseError:
        return ParseError(msg, self.peek()[2], 1, self.origin)


def _ident_name(tok: str) -> str:
    return tok[1:] if tok.startswith("\\") else tok


def parse_netlist(text: SourceText) -> NetlistGraph:
    """Parse structural Verilog into a NetlistGraph."""
    lx = _Lexer(text.content, text.origin)
    lx.expect("module")
    kind, name, _ = lx.next()
    graph = NetlistGraph(module=_ident_name(name))
    if lx.peek()[1] == "(":
        lx.next()
        while lx.peek()[1] != ")":
            lx.next()
        lx.expect(")")
    lx.expect(";")

    while True:
        kind, tok, line = lx.peek()
        if tok == "endmodule":
            break
        if kind == "eof":
            raise lx.err("unexpected end of netlist")
        if tok in _BEHAVIORAL:
            raise lx.err(f"behavioral construct '{tok}' in structural netlist")
        if tok in ("input", "output", "inout"):
            _parse_decl(lx, graph, is_port=True)
        elif tok == "wire":
            _parse_decl(lx, graph, is_port=False)
        elif tok == "assign":
            _parse_assign(lx, graph)
        elif kind in ("ident", "escaped"):
            _parse_cell(lx, graph)
        else:
            raise lx.err(f"unexpected '{tok}' in netlist")
    lx.expect("endmodule")
    _check_resolved(graph)
    return graph


def _parse_range(lx) -> tuple[int, int]:
    lx.expect("[")
    msb = int(lx.next()[1])
    lx.expect(":")
    lsb = int(lx.next()[1])
    lx.expect("]")
    return msb, lsb


def _parse_decl(lx, graph: NetlistGraph, is_port: bool) -> None:
    direction = lx.next()[1]
    msb, lsb = (0, 0)
    if lx.peek()[1] == "[":
        msb, lsb = _parse_range(lx)
    width = abs(msb - lsb) + 1
    while True:
        kind, tok, line = lx.next()
        if kind not in ("ident", "escaped"):
            raise lx.err("expected net name")
        name = _ident_name(tok)
        if direction in ("input", "output", "inout"):
            graph.ports[name] = (direction, width, msb, lsb)
        else:
            graph.nets[name] = (width, msb, lsb)
        if lx.peek()[1] == ",":
            lx.next()
            continue
        break
    lx.expect(";")


def _const_bits(tok: str, origin: str, line: int) -> list[str]:
    if "'" not in tok:
        value = int(tok)
        return [CONST1 if value & 1 else CONST0]
    size_str, rest = tok.split("'", 1)
    if rest[0] in "sS":
        rest = rest[1:]
    base, digits = rest[0].lower(), rest[1:].replace("_", "")
    width = int(size_str)
    if any(c in "xXzZ?" for c in digits):
        return [CONSTX] * width
    value = int(digits, {"b": 2, "o": 8, "d": 10, "h": 16}[base])
    return [CONST1 if (value >> i) & 1 else CONST0
            for i in range(width - 1, -1, -1)]


def _parse_expr_bits(lx, graph: NetlistGraph) -> list[str]:
    """One operand as bit atoms (MSB first)."""
    kind, tok, line = lx.next()
    if tok == "{":
        bits = []
        while True:
            bits.extend(_parse_expr_bits(lx, graph))
            if lx.peek()[1] == ",":
                lx.next()
                continue
            break
        lx.expect("}")
        return bits
    if kind == "number":
        return _const_bits(tok, lx.origin, line)
    if kind not in ("ident", "escaped"):
        raise lx.err(f"expected net expression, got '{tok}'")
    name = _ident_name(tok)
    if lx.peek()[1] == "[":
        a, b = _parse_sel(lx)
        if b is None:
            return [f"{name}[{a}]"]
        step = -1 if a >= b else 1
        return [f"{name}[{i}]" for i in range(a, b + step, step)]
    return graph.bits_of(name)


def _parse_sel(lx) -> tuple[int, int | None]:
    lx.expect("[")
    a = int(lx.next()[1])
    b = None
    if lx.peek()[1] == ":":
        lx.next()
        b = int(lx.next()[1])
    lx.expect("]")
    return a, b


def _parse_assign(lx, graph: NetlistGraph) -> None:
    lx.expect("assign")
    lhs = _parse_expr_bits(lx, graph)
    lx.expect("=")
    rhs = _parse_expr_bits(lx, graph)
    lx.expect(";")
    if len(lhs) != len(rhs):
        raise lx.err(f"assign width mismatch ({len(lhs)} vs {len(rhs)})")
    for a, b in zip(lhs, rhs):
        graph.union(a, b)


def _parse_cell(lx, graph: NetlistGraph) -> None:
    cell_type = _ident_name(lx.next()[1])
    kind, tok, _ = lx.next()
    if kind not in ("ident", "escaped"):
        raise lx.err("expected instance name")
    inst = _ident_name(tok)
    lx.expect("(")
    conns: dict[str, list[str]] = {}
    if lx.peek()[1] != ")":
        while True:
            lx.expect(".")
            port = _ident_name(lx.next()[1])
            lx.expect("(")
            bits = [] if lx.peek()[1] == ")" else _parse_expr_bits(lx, graph)
            lx.expect(")")
            conns[port] = bits
            if lx.peek()[1] == ",":
                lx.next()
                continue
            break
    lx.expect(")")
    lx.expect(";")
    graph.cells.append(Cell(cell_type, inst, conns))


def _check_resolved(graph: NetlistGraph) -> None:
    declared = set(graph.nets) | set(graph.ports) | set(_CONSTS)
    for cell in graph.cells:
        for bits in cell.conns.values():
            for atom in bits:
                base = atom.split("[")[0]
                if base not in declared:
                    graph.unresolved.append(atom)
