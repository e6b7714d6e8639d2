"""Bounded cycle-accurate simulator for the supported subset.

The simulator is the oracle behind every semantics-preservation claim: a
transformed module must produce the same output trace as its original for
the same stimulus. A module is compiled once into evaluation closures, then
stepped; each step applies input values, settles combinational logic to a
fixpoint, fires edge-triggered blocks with non-blocking semantics, and
settles again.

Value model: an integer per signal, or None meaning all-X. Uninitialized
registers read X until first assignment; any X operand makes a result X
(with the usual short-circuit exceptions), an X condition takes the else
path, and an X case subject falls to the default arm. Both sides of an
equivalence check run under the same rules, so conservatism never produces
a spurious mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..ast_nodes import (
    Assign, Ast, AlwaysBlock, BinaryOp, BitSelect, Block, CaseStmt, Concat,
    ContinuousAssign, Expr, Identifier, IfStmt, Instance, ModuleDecl, NetDecl,
    NumberLiteral, PartSelect, Replicate, TernaryOp, UnaryOp,
)
from ..errors import UnsupportedConstruct
from ..symbols import ModuleSymbols, resolve

_MAX_SETTLE = 200
_MAX_CASCADE = 8


def _mask(width: int) -> int:
    return (1 << width) - 1


@dataclass
class _Signal:
    name: str
    width: int
    msb: int
    lsb: int
    is_input: bool
    is_output: bool


class Simulator:
    """Compiled single-module simulator."""

    def __init__(self, ast: Ast, top: str | None = None):
        mod = _pick_module(ast, top)
        for item in mod.items:
            if isinstance(item, Instance):
                raise UnsupportedConstruct(
                    f"{mod.name}: module instances are not simulatable")
        self.module = mod
        table = resolve(ast)
        self.ms: ModuleSymbols = table.modules[mod.name]
        self.signals: dict[str, _Signal] = {}
        self.inputs: list[str] = []
        self.outputs: list[str] = []
        self._params: dict[str, int] = dict(self.ms.params)
        for name, info in self.ms.symbols.items():
            if info.kind in ("parameter", "localparam"):
                continue
            if info.width is None:
                raise UnsupportedConstruct(
                    f"{mod.name}.{name}: width is not a compile-time constant")
            msb = info.msb if info.msb is not None else info.width - 1
            lsb = info.lsb if info.lsb is not None else 0
            sig = _Signal(name, info.width, msb, lsb,
                          info.kind == "input",
                          info.kind == "output")
            self.signals[name] = sig
            if sig.is_input:
                self.inputs.append(name)
            if sig.is_output:
                self.outputs.append(name)
        self._comb: list = []     # closures: fn(env) -> None
        self._seq: list = []      # (edges, fn(env, nba) -> None)
        self._compile(mod)
        self.env: dict[str, int | None] = {}
        self.reset_state()

    # ---- public API ----

    def reset_state(self) -> None:
        self.env = {name: None for name in self.signals}
        for name, value in self._params.items():
            self.env[name] = value
        self._settle()

    def step(self, input_values: dict[str, int]) -> dict[str, int | None]:
        """Apply inputs, settle, fire clocked logic, settle; return outputs."""
        prev = dict(self.env)
        for name, value in input_values.items():
            if name not in self.signals or not self.signals[name].is_input:
                raise UnsupportedConstruct(f"not an input port: {name}")
            self.env[name] = value & _mask(self.signals[name].width)
        self._settle()
        fired: set[int] = set()
        for _ in range(_MAX_CASCADE):
            to_fire = []
            for idx, (edges, fn) in enumerate(self._seq):
                if idx in fired:
                    continue
                if any(_edge_hit(kind, prev.get(sig), self.env.get(sig))
                       for kind, sig in edges):
                    to_fire.append((idx, fn))
            if not to_fire:
                break
            prev = dict(self.env)
            nba: dict[str, int | None] = {}
            for idx, fn in to_fire:
                fired.add(idx)
                fn(self.env, nba)
            self.env.update(nba)
            self._settle()
        return {name: self.env[name] for name in self.outputs}

    def peek(self, name: str) -> int | None:
        return self.env[name]

    # ---- settle ----

    def _settle(self) -> None:
        for _ in range(_MAX_SETTLE):
            before = dict(self.env)
            for fn in self._comb:
                fn(self.env)
            if self.env == before:
                return
        raise UnsupportedConstruct(
            f"{self.module.name}: combinational logic does not settle")

    # ---- compilation ----

    def _compile(self, mod: ModuleDecl) -> None:
        for item in mod.items:
            if isinstance(item, NetDecl):
                for n in item.names:
                    if n.init is not None:
                        self._comb.append(self._compile_cont(
                            Identifier(n.name), n.init))
            elif isinstance(item, ContinuousAssign):
                for lhs, rhs in item.assignments:
                    self._comb.append(self._compile_cont(lhs, rhs))
            elif isinstance(item, AlwaysBlock):
                if item.sensitivity.star or all(
                        e.kind == "level" for e in item.sensitivity.edges):
                    body = self._compile_stmt(item.body, blocking_target=None)
                    self._comb.append(_comb_wrapper(body))
                else:
                    edges = [(e.kind, e.signal) for e in item.sensitivity.edges
                             if e.kind in ("posedge", "negedge")]
                    body = self._compile_stmt(item.body, blocking_target=None)
                    self._seq.append((edges, body))

    def _compile_cont(self, lhs: Expr, rhs: Expr):
        width = self._lhs_width(lhs)
        rhs_fn = self._compile_expr(rhs, width)
        store = self._compile_store(lhs)

        def run(env):
            store(env, rhs_fn(env), None)
        return run

    def _compile_stmt(self, stmt, blocking_target):
        """Compile a statement to fn(env, nba); nba None means blocking-only
        context (combinational), where <= behaves like =."""
        if stmt is None:
            return lambda env, nba: None
        if isinstance(stmt, Assign):
            width = self._lhs_width(stmt.lhs)
            rhs_fn = self._compile_expr(stmt.rhs, width)
            store = self._compile_store(stmt.lhs)
            if stmt.blocking:
                def run(env, nba):
                    store(env, rhs_fn(env), None)
            else:
                def run(env, nba):
                    store(env, rhs_fn(env), nba)
            return run
        if isinstance(stmt, Block):
            fns = [self._compile_stmt(s, blocking_target) for s in stmt.stmts]

            def run(env, nba):
                for fn in fns:
                    fn(env, nba)
            return run
        if isinstance(stmt, IfStmt):
            cond = self._compile_expr(stmt.cond, None)
            then_fn = self._compile_stmt(stmt.then_stmt, blocking_target)
            else_fn = self._compile_stmt(stmt.else_stmt, blocking_target)

            def run(env, nba):
                c = cond(env)
                if c:                      # X or 0 takes the else path
                    then_fn(env, nba)
                else:
                    else_fn(env, nba)
            return run
        if isinstance(stmt, CaseStmt):
            subj = self._compile_expr(stmt.subject, None)
            arms = []
            default_fn = lambda env, nba: None
            for arm in stmt.arms:
                body = self._compile_stmt(arm.body, blocking_target)
                if not arm.labels:
                    default_fn = body
                else:
                    labels = [self._compile_expr(lab, None) for lab in arm.labels]
                    arms.append((labels, body))

            def run(env, nba):
                v = subj(env)
                if v is not None:
                    for labels, body in arms:
                        if any(lab(env) == v for lab in labels):
                            body(env, nba)
                            return
                default_fn(env, nba)
            return run
        raise UnsupportedConstruct(f"cannot simulate {type(stmt).__name__}")

    # ---- lvalues ----

    def _lhs_width(self, lhs: Expr) -> int:
        if isinstance(lhs, Identifier):
            return self._sig(lhs.name).width
        if isinstance(lhs, BitSelect):
            return 1
        if isinstance(lhs, PartSelect):
            base = self._sig(_base_name(lhs))
            msb = self._const(lhs.msb)
            lsb = self._const(lhs.lsb)
            return abs(msb - lsb) + 1
        if isinstance(lhs, Concat):
            return sum(self._lhs_width(p) for p in lhs.parts)
        raise UnsupportedConstruct(f"unsupported lvalue {type(lhs).__name__}")

    def _compile_store(self, lhs: Expr):
        """Build fn(env, value, nba_or_None) writing `value` to the lvalue."""
        if isinstance(lhs, Identifier):
            sig = self._sig(lhs.name)
            name, w = sig.name, sig.width

            def store(env, value, nba):
                v = value & _mask(w) if value is not None else None
                (env if nba is None else nba)[name] = v
            return store
        if isinstance(lhs, BitSelect):
            sig = self._sig(_base_name(lhs))
            idx_fn = self._compile_expr(lhs.index, None)

            def store(env, value, nba):
                idx = idx_fn(env)
                target = env if nba is None else nba
                cur = target.get(sig.name, env.get(sig.name))
                if idx is None or value is None or cur is None:
                    target[sig.name] = None
                    return
                pos = _bit_pos(sig, idx)
                if pos is None:
                    return
                target[sig.name] = (cur & ~(1 << pos)) | ((value & 1) << pos)
            return store
        if isinstance(lhs, PartSelect):
            sig = self._sig(_base_name(lhs))
            a = self._const(lhs.msb)
            b = self._const(lhs.lsb)
            p1, p2 = _bit_pos(sig, a), _bit_pos(sig, b)
            if p1 is None or p2 is None:
                raise UnsupportedConstruct("part-select outside declared range")
            lo, w = min(p1, p2), abs(p1 - p2) + 1

            def store(env, value, nba):
                target = env if nba is None else nba
                cur = target.get(sig.name, env.get(sig.name))
                if value is None or cur is None:
                    target[sig.name] = None
                    return
                target[sig.name] = (cur & ~(_mask(w) << lo)) | ((value & _mask(w)) << lo)
            return store
        if isinstance(lhs, Concat):
            parts = [(self._compile_store(p), self._lhs_width(p))
                     for p in lhs.parts]

            def store(env, value, nba):
                # rightmost part takes the LSBs
                shift = 0
                for sub, w in reversed(parts):
                    piece = None if value is None else (value >> shift) & _mask(w)
                    sub(env, piece, nba)
                    shift += w
            return store
        raise UnsupportedConstruct(f"unsupported lvalue {type(lhs).__name__}")

    # ---- expressions ----

    def _sig(self, name: str) -> _Signal:
        if name not in self.signals:
            raise UnsupportedConstruct(f"undeclared signal '{name}'")
        return self.signals[name]

    def _const(self, e: Expr) -> int:
        from ..symbols import const_eval
        v = const_eval(e, self._params)
        if v is None:
            raise UnsupportedConstruct("select index must be constant")
        return v

    def _self_width(self, e: Expr) -> int:
        if isinstance(e, Identifier):
            if e.name in self._params:
                info = self.ms.symbols.get(e.name)
                return info.width if info and info.width else 32
            return self._sig(e.name).width
        if isinstance(e, NumberLiteral):
            return e.width if e.width is not None else 32
        if isinstance(e, UnaryOp):
            if e.op in ("!", "&", "|", "^", "~&", "~|", "~^"):
                return 1
            return self._self_width(e.operand)
        if isinstance(e, BinaryOp):
            if e.op in ("==", "!=", "===", "!==", "<", "<=", ">", ">=",
                        "&&", "||"):
                return 1
            if e.op in ("<<", ">>", "<<<", ">>>"):
                return self._self_width(e.lhs)
            return max(self._self_width(e.lhs), self._self_width(e.rhs))
        if isinstance(e, TernaryOp):
            return max(self._self_width(e.then_expr),
                       self._self_width(e.else_expr))
        if isinstance(e, Concat):
            return sum(self._self_width(p) for p in e.parts)
        if isinstance(e, Replicate):
            return self._const(e.count) * sum(self._self_width(p)
                                              for p in e.parts)
        if isinstance(e, BitSelect):
            return 1
        if isinstance(e, PartSelect):
            return abs(self._const(e.msb) - self._const(e.lsb)) + 1
        raise UnsupportedConstruct(f"cannot size {type(e).__name__}")

    def _compile_expr(self, e: Expr, ctx_width: int | None):
        """Compile to fn(env) -> int|None, evaluated at the Verilog
        context width (max of self-determined and assignment context)."""
        w = max(self._self_width(e), ctx_width or 0)
        return self._compile_at(e, w)

    def _compile_at(self, e: Expr, w: int):
        m = _mask(w)
        if isinstance(e, NumberLiteral):
            v = e.value & m
            return lambda env: v
        if isinstance(e, Identifier):
            name = e.name
            return lambda env: env.get(name)
        if isinstance(e, UnaryOp):
            return self._compile_unary(e, w)
        if isinstance(e, BinaryOp):
            return self._compile_binary(e, w)
        if isinstance(e, TernaryOp):
            cond = self._compile_at(e.cond, self._self_width(e.cond))
            a = self._compile_at(e.then_expr, w)
            b = self._compile_at(e.else_expr, w)

            def run(env):
                c = cond(env)
                if c is None:
                    va, vb = a(env), b(env)
                    return va if va == vb else None
                return a(env) if c else b(env)
            return run
        if isinstance(e, Concat):
            parts = [(self._compile_at(p, self._self_width(p)),
                      self._self_width(p)) for p in e.parts]

            def run(env):
                acc = 0
                for fn, pw in parts:
                    v = fn(env)
                    if v is None:
                        return None
                    acc = (acc << pw) | (v & _mask(pw))
                return acc
            return run
        if isinstance(e, Replicate):
            count = self._const(e.count)
            parts = [(self._compile_at(p, self._self_width(p)),
                      self._self_width(p)) for p in e.parts]
            total = sum(pw for _, pw in parts)

            def run(env):
                acc = 0
                for fn, pw in parts:
                    v = fn(env)
                    if v is None:
                        return None
                    acc = (acc << pw) | (v & _mask(pw))
                out = 0
                for _ in range(count):
                    out = (out << total) | acc
                return out
            return run
        if isinstance(e, BitSelect):
            sig = self._sig(_base_name(e))
            idx_fn = self._compile_expr(e.index, None)

            def run(env):
                v = env.get(sig.name)
                idx = idx_fn(env)
                if v is None or idx is None:
                    return None
                pos = _bit_pos(sig, idx)
                if pos is None:
                    return None
                return (v >> pos) & 1
            return run
        if isinstance(e, PartSelect):
            sig = self._sig(_base_name(e))
            p1 = _bit_pos(sig, self._const(e.msb))
            p2 = _bit_pos(sig, self._const(e.lsb))
            if p1 is None or p2 is None:
                raise UnsupportedConstruct("part-select outside declared range")
            lo, width = min(p1, p2), abs(p1 - p2) + 1

            def run(env):
                v = env.get(sig.name)
                if v is None:
                    return None
                return (v >> lo) & _mask(width)
            return run
        raise UnsupportedConstruct(f"cannot simulate {type(e).__name__}")

    def _compile_unary(self, e: UnaryOp, w: int):
        m = _mask(w)
        if e.op in ("~", "-", "+"):
            opnd = self._compile_at(e.operand, w)
            if e.op == "~":
                return lambda env: None if (v := opnd(env)) is None else (~v) & m
            if e.op == "-":
                return lambda env: None if (v := opnd(env)) is None else (-v) & m
            return opnd
        ow = self._self_width(e.operand)
        opnd = self._compile_at(e.operand, ow)
        om = _mask(ow)
        if e.op == "!":
            return lambda env: None if (v := opnd(env)) is None else int(v == 0)
        if e.op == "&":
            return lambda env: None if (v := opnd(env)) is None else int(v == om)
        if e.op == "~&":
            return lambda env: None if (v := opnd(env)) is None else int(v != om)
        if e.op == "|":
            return lambda env: None if (v := opnd(env)) is None else int(v != 0)
        if e.op == "~|":
            return lambda env: None if (v := opnd(env)) is None else int(v == 0)
        if e.op in ("^", "~^"):
            flip = e.op == "~^"
            def run(env):
                v = opnd(env)
                if v is None:
                    return None
                parity = bin(v).count("1") & 1
                return parity ^ 1 if flip else parity
            return run
        raise UnsupportedConstruct(f"unary {e.op}")

    def _compile_binary(self, e: BinaryOp, w: int):
        op = e.op
        m = _mask(w)
        if op in ("&&", "||"):
            a = self._compile_at(e.lhs, self._self_width(e.lhs))
            b = self._compile_at(e.rhs, self._self_width(e.rhs))
            if op == "&&":
                def run(env):
                    va, vb = a(env), b(env)
                    if va == 0 or vb == 0:
                        return 0
                    if va is None or vb is None:
                        return None
                    return 1
            else:
                def run(env):
                    va, vb = a(env), b(env)
                    if (va is not None and va != 0) or (vb is not None and vb != 0):
                        return 1
                    if va is None or vb is None:
                        return None
                    return 0
            return run
        if op in ("==", "!=", "===", "!==", "<", "<=", ">", ">="):
            cw = max(self._self_width(e.lhs), self._self_width(e.rhs))
            a = self._compile_at(e.lhs, cw)
            b = self._compile_at(e.rhs, cw)
            table = {
                "==": lambda x, y: int(x == y), "===": lambda x, y: int(x == y),
                "!=": lambda x, y: int(x != y), "!==": lambda x, y: int(x != y),
                "<": lambda x, y: int(x < y), "<=": lambda x, y: int(x <= y),
                ">": lambda x, y: int(x > y), ">=": lambda x, y: int(x >= y),
            }
            fn = table[op]

            def run(env):
                va, vb = a(env), b(env)
                if va is None or vb is None:
                    return None
                return fn(va, vb)
            return run
        if op in ("<<", ">>", "<<<", ">>>"):
            a = self._compile_at(e.lhs, w)
            b = self._compile_at(e.rhs, self._self_width(e.rhs))
            left = op in ("<<", "<<<")

            def run(env):
                va, vb = a(env), b(env)
                if va is None or vb is None:
                    return None
                return ((va << vb) & m) if left else (va >> vb)
            return run
        a = self._compile_at(e.lhs, w)
        b = self._compile_at(e.rhs, w)
        table = {
            "&": lambda x, y: x & y, "|": lambda x, y: x | y,
            "^": lambda x, y: x ^ y,
            "^~": lambda x, y: (~(x ^ y)), "~^": lambda x, y: (~(x ^ y)),
            "+": lambda x, y: x + y, "-": lambda x, y: x - y,
            "*": lambda x, y: x * y,
            "/": lambda x, y: x // y if y else None,
            "%": lambda x, y: x % y if y else None,
            "**": lambda x, y: x ** y if y < 64 else None,
        }
        if op not in table:
            raise UnsupportedConstruct(f"binary {op}")
        fn = table[op]

        def run(env):
            va, vb = a(env), b(env)
            if va is None or vb is None:
                return None
            v = fn(va, vb)
            return None if v is None else v & m
        return run


def _comb_wrapper(body):
    def run(env):
        body(env, None)
    return run


def _edge_hit(kind: str, old, new) -> bool:
    if new is None:
        return False
    if kind == "posedge":
        return new == 1 and old != 1
    if kind == "negedge":
        return new == 0 and old != 0
    return False


def _bit_pos(sig: _Signal, idx: int) -> int | None:
    """Physical bit position of declared index `idx`, honoring direction."""
    if sig.msb >= sig.lsb:
        pos = idx - sig.lsb
    else:
        pos = sig.lsb - idx
    if pos < 0 or pos >= sig.width:
        return None
    return pos


def _base_name(e) -> str:
    base = e.base
    if not isinstance(base, Identifier):
        raise UnsupportedConstruct("nested selects are not supported")
    return base.name


def _pick_module(ast: Ast, top: str | None) -> ModuleDecl:
    if top is None:
        return ast.modules[0]
    for m in ast.modules:
        if m.name == top:
            return m
    raise UnsupportedConstruct(f"no module named '{top}'")


def simulate(ast: Ast, stimulus: list[dict[str, int]],
             top: str | None = None) -> list[dict[str, int | None]]:
    """Run `stimulus` (one dict of input values per step) and return the
    per-step output trace."""
    sim = Simulator(ast, top)
    return [sim.step(step) for step in stimulus]
