"""AST for the supported Verilog subset.

Nodes are frozen dataclasses with tuple-valued children, so a parsed tree is
immutable and safe to share across threads. Every node carries a `span`: the
(start, end) byte range of its tokens in the original source, or None for
nodes built or rebuilt by a transformation. Spans are excluded from equality,
so two trees compare structurally (including literal spelling fields and
comments) regardless of where their bytes came from.

Rebuilding a node along a path (see `replace_at`) clears the span of every
node on the rebuilt spine; untouched siblings keep their spans and therefore
print byte-identically to the original source.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Iterator, Union

Span = Union[tuple, None]


@dataclass(frozen=True)
class SourceText:
    """A Verilog source document: UTF-8 text plus a path or label."""

    content: str
    origin: str = "<input>"


def _span():
    return field(default=None, compare=False, repr=False)


class Node:
    """Marker base class; all AST nodes are frozen dataclasses."""

    __slots__ = ()


# ---- expressions ----

@dataclass(frozen=True)
class Identifier(Node):
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class NumberLiteral(Node):
    """A numeric literal with its spelling preserved.

    `separators` holds underscore positions counted in digits from the least
    significant digit: 8'b1010_0101 has separators (4,). `width` is None for
    a plain unsized decimal.
    """

    value: int
    width: int | None = None
    base: str = "d"                      # one of b/o/d/h
    separators: tuple[int, ...] = ()
    signed: bool = False
    span: Span = _span()

    def __post_init__(self):
        if self.width is not None and self.value >= (1 << self.width):
            raise ValueError(
                f"literal value {self.value} does not fit in {self.width} bits"
            )


@dataclass(frozen=True)
class UnaryOp(Node):
    op: str                              # ~ ! - + & | ^ ~& ~| ~^
    operand: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class BinaryOp(Node):
    op: str
    lhs: "Expr"
    rhs: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class TernaryOp(Node):
    cond: "Expr"
    then_expr: "Expr"
    else_expr: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class Concat(Node):
    parts: tuple["Expr", ...]
    span: Span = _span()


@dataclass(frozen=True)
class Replicate(Node):
    count: "Expr"
    parts: tuple["Expr", ...]
    span: Span = _span()


@dataclass(frozen=True)
class BitSelect(Node):
    base: "Expr"
    index: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class PartSelect(Node):
    base: "Expr"
    msb: "Expr"
    lsb: "Expr"
    span: Span = _span()


Expr = Union[Identifier, NumberLiteral, UnaryOp, BinaryOp, TernaryOp,
             Concat, Replicate, BitSelect, PartSelect]


# ---- structure ----

@dataclass(frozen=True)
class Range(Node):
    msb: Expr
    lsb: Expr
    span: Span = _span()


@dataclass(frozen=True)
class Port(Node):
    direction: str                       # input / output / inout
    name: str
    net_type: str | None = None          # wire / reg / None
    range: Range | None = None
    leading_comments: tuple[str, ...] = ()
    span: Span = _span()


@dataclass(frozen=True)
class ParamAssign(Node):
    name: str
    value: Expr
    span: Span = _span()


@dataclass(frozen=True)
class ParamDecl(Node):
    kind: str                            # parameter / localparam
    assigns: tuple[ParamAssign, ...]
    range: Range | None = None
    leading_comments: tuple[str, ...] = ()
    trailing_comment: str | None = None
    blank_before: bool = field(default=False, compare=False)
    span: Span = _span()


@dataclass(frozen=True)
class NetName(Node):
    name: str
    init: Expr | None = None
    span: Span = _span()


@dataclass(frozen=True)
class NetDecl(Node):
    kind: str                            # wire / reg
    names: tuple[NetName, ...]
    range: Range | None = None
    leading_comments: tuple[str, ...] = ()
    trailing_comment: str | None = None
    blank_before: bool = field(default=False, compare=False)
    span: Span = _span()


@dataclass(frozen=True)
class ContinuousAssign(Node):
    assignments: tuple[tuple[Expr, Expr], ...]   # (lhs, rhs) pairs
    leading_comments: tuple[str, ...] = ()
    trailing_comment: str | None = None
    blank_before: bool = field(default=False, compare=False)
    span: Span = _span()


@dataclass(frozen=True)
class Edge(Node):
    kind: str                            # posedge / negedge / level
    signal: str
    span: Span = _span()


@dataclass(frozen=True)
class SensitivityList(Node):
    star: bool = False
    edges: tuple[Edge, ...] = ()
    sep_style: str = "or"                # or / comma
    span: Span = _span()


@dataclass(frozen=True)
class Assign(Node):
    lhs: Expr
    rhs: Expr
    blocking: bool = False
    leading_comments: tuple[str, ...] = ()
    trailing_comment: str | None = None
    span: Span = _span()


@dataclass(frozen=True)
class Block(Node):
    stmts: tuple["Statement", ...]
    name: str | None = None
    leading_comments: tuple[str, ...] = ()
    trailing_comment: str | None = None
    span: Span = _span()


@dataclass(frozen=True)
class IfStmt(Node):
    cond: Expr
    then_stmt: "Statement"
    else_stmt: Union["Statement", None] = None
    leading_comments: tuple[str, ...] = ()
    trailing_comment: str | None = None
    span: Span = _span()


@dataclass(frozen=True)
class CaseArm(Node):
    labels: tuple[Expr, ...]             # empty tuple = default arm
    body: Union["Statement", None]
    leading_comments: tuple[str, ...] = ()
    span: Span = _span()


@dataclass(frozen=True)
class CaseStmt(Node):
    subject: Expr
    arms: tuple[CaseArm, ...]
    leading_comments: tuple[str, ...] = ()
    trailing_comment: str | None = None
    span: Span = _span()


Statement = Union[Assign, Block, IfStmt, CaseStmt]


@dataclass(frozen=True)
class AlwaysBlock(Node):
    sensitivity: SensitivityList
    body: Statement
    leading_comments: tuple[str, ...] = ()
    trailing_comment: str | None = None
    blank_before: bool = field(default=False, compare=False)
    span: Span = _span()


@dataclass(frozen=True)
class Connection(Node):
    port: str | None                     # None for positional
    expr: Expr | None                    # None for an unconnected .p()
    span: Span = _span()


@dataclass(frozen=True)
class Instance(Node):
    module_name: str
    inst_name: str
    connections: tuple[Connection, ...]
    param_overrides: tuple[Connection, ...] = ()
    leading_comments: tuple[str, ...] = ()
    trailing_comment: str | None = None
    blank_before: bool = field(default=False, compare=False)
    span: Span = _span()


Item = Union[ParamDecl, NetDecl, ContinuousAssign, AlwaysBlock, Instance]


@dataclass(frozen=True)
class ModuleDecl(Node):
    name: str
    ports: tuple[Port, ...]
    items: tuple[Item, ...]
    header_params: tuple[ParamDecl, ...] = ()
    leading_comments: tuple[str, ...] = ()
    trailing_comments: tuple[str, ...] = ()   # before endmodule
    span: Span = _span()


@dataclass(frozen=True)
class Ast(Node):
    modules: tuple[ModuleDecl, ...]
    source: str = field(default="", compare=False, repr=False)
    origin: str = field(default="<input>", compare=False)
    span: Span = _span()


# ---- generic traversal ----

def iter_children(node: Node) -> Iterator[tuple[tuple, Node]]:
    """Yield (path_step, child) for every direct child node.

    A path step is (field_name,) for a plain child, (field_name, i) for a
    child inside a tuple field, and (field_name, i, j) for the lhs/rhs pair
    inside ContinuousAssign.assignments.
    """
    for f in dataclasses.fields(node):
        v = getattr(node, f.name)
        if isinstance(v, Node):
            yield (f.name,), v
        elif isinstance(v, tuple):
            for i, x in enumerate(v):
                if isinstance(x, Node):
                    yield (f.name, i), x
                elif isinstance(x, tuple):
                    for j, y in enumerate(x):
                        if isinstance(y, Node):
                            yield (f.name, i, j), y


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal of `node` and all descendants."""
    yield node
    for _, child in iter_children(node):
        yield from walk(child)


def node_at(root: Node, path: tuple) -> Node:
    """Resolve a node path (sequence of path steps) from `root`.

    Raises KeyError/IndexError/TypeError if the path no longer resolves;
    callers translate that into SiteStale.
    """
    node = root
    for step in path:
        v = getattr(node, step[0])
        for idx in step[1:]:
            v = v[idx]
        if not isinstance(v, Node):
            raise TypeError(f"path step {step!r} does not land on a node")
        node = v
    return node


def _rebuild(node: Node, step: tuple, new_child: Node) -> Node:
    v = getattr(node, step[0])
    if len(step) == 1:
        repl = new_child
    elif len(step) == 2:
        lst = list(v)
        lst[step[1]] = new_child
        repl = tuple(lst)
    else:
        outer = list(v)
        inner = list(outer[step[1]])
        inner[step[2]] = new_child
        outer[step[1]] = tuple(inner)
        repl = tuple(outer)
    return dataclasses.replace(node, **{step[0]: repl, "span": None})


def replace_at(root: Node, path: tuple, new_node: Node) -> Node:
    """Return a copy of `root` with the node at `path` replaced.

    Every node along the rebuilt spine loses its span (it no longer matches
    the original bytes); everything off the spine is shared untouched.
    """
    if not path:
        return new_node
    spine = [root]
    node = root
    for step in path[:-1]:
        node = node_at(node, (step,))
        spine.append(node)
    result = new_node
    for parent, step in zip(reversed(spine), reversed(path)):
        result = _rebuild(parent, step, result)
    return result


def map_tree(node: Node, fn) -> Node:
    """Bottom-up rewrite: apply `fn` to every node after its children.

    Returns the original object (span intact) wherever neither the node nor
    any descendant changed, so span fidelity is preserved off the rewritten
    paths. `fn` receives a node and returns a node (possibly the same one).
    """
    changes = {}
    for f in dataclasses.fields(node):
        v = getattr(node, f.name)
        if isinstance(v, Node):
            new = map_tree(v, fn)
            if new is not v:
                changes[f.name] = new
        elif isinstance(v, tuple):
            new_items = []
            dirty = False
            for x in v:
                if isinstance(x, Node):
                    nx = map_tree(x, fn)
                    dirty |= nx is not x
                    new_items.append(nx)
                elif isinstance(x, tuple):
                    inner = []
                    for y in x:
                        if isinstance(y, Node):
                            ny = map_tree(y, fn)
                            dirty |= ny is not y
                            inner.append(ny)
                        else:
                            inner.append(y)
                    new_items.append(tuple(inner))
                else:
                    new_items.append(x)
            if dirty:
                changes[f.name] = tuple(new_items)
    if changes:
        node = dataclasses.replace(node, **changes, span=None)
    out = fn(node)
    return out


def clear_spans(node: Node) -> Node:
    """Strip every span so the whole tree prints canonically."""
    def strip(n):
        if n.span is not None:
            return dataclasses.replace(n, span=None)
        return n
    return map_tree(node, strip)
