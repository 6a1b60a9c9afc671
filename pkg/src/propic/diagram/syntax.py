"""Lexer, parser and printer for the diagram language.

Example::

    space Q dim 2
    node psi (out Q) = dense [0.6, 0.8i]
    node u (out Q, in Q) = builder pauli:x
    wire psi.1 -> u.2
    output u.1
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

__all__ = [
    "DiagramError",
    "DiagramSyntaxError",
    "Position",
    "LegDecl",
    "Dense",
    "Builder",
    "NodeDecl",
    "PortRef",
    "WireDecl",
    "Diagram",
    "parse",
    "format_diagram",
    "format_complex",
]

KEYWORDS = {"space", "dim", "node", "wire", "output", "in", "out", "dual", "dense", "builder", "bend"}
STATEMENTS = {"space", "node", "wire", "output"}


class DiagramError(ValueError):
    """Any problem with a diagram file that the user has to fix."""


class DiagramSyntaxError(DiagramError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Position:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


NOWHERE = Position(0, 0)


def _pos():
    return field(default=NOWHERE, compare=False, repr=False)


@dataclass(frozen=True)
class LegDecl:
    direction: str  # "in" | "out"
    dual: bool
    space: str
    pos: Position = _pos()


@dataclass(frozen=True)
class Dense:
    values: tuple[complex, ...]
    pos: Position = _pos()


@dataclass(frozen=True)
class Builder:
    name: str
    args: tuple[str, ...] = ()
    pos: Position = _pos()


@dataclass(frozen=True)
class NodeDecl:
    name: str
    legs: tuple[LegDecl, ...]
    init: Dense | Builder
    pos: Position = _pos()


@dataclass(frozen=True)
class PortRef:
    node: str
    port: int  # 1-based
    pos: Position = _pos()

    def __str__(self) -> str:
        return f"{self.node}.{self.port}"


@dataclass(frozen=True)
class WireDecl:
    src: PortRef
    dst: PortRef
    bend: bool = False
    pos: Position = _pos()

    def __str__(self) -> str:
        return f"wire {self.src} -> {self.dst}{' bend' if self.bend else ''}"


@dataclass(frozen=True)
class Diagram:
    spaces: dict[str, int]
    nodes: tuple[NodeDecl, ...]
    wires: tuple[WireDecl, ...]
    outputs: tuple[PortRef, ...]

    def node_index(self, name: str) -> int:
        for k, node in enumerate(self.nodes):
            if node.name == name:
                return k
        raise KeyError(name)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Diagram):
            return NotImplemented
        return (
            list(self.spaces.items()) == list(other.spaces.items())
            and self.nodes == other.nodes
            and self.wires == other.wires
            and self.outputs == other.outputs
        )


# -- lexer ------------------------------------------------------------------

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = re.compile(rf"^([+-]?{_NUM})?(?:([+-])({_NUM})?i|(i))?$")
_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>\#[^\n]*)"
    r"|(?P<arrow>->)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>\d+)"
    r"|(?P<punct>[(),.=:\[\]])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, punct, arrow, complex, eof
    text: str
    pos: Position


def parse_complex(text: str) -> complex:
    """``1``, ``-2.5``, ``1e-3``, ``i``, ``-i``, ``0.5i``, ``1+2i``, ``1-i``."""
    s = text.replace(" ", "")
    if s in ("i", "+i"):
        return 1j
    if s == "-i":
        return -1j
    m = _COMPLEX.match(s)
    if not m or not s:
        raise ValueError(text)
    real, sign, imag, bare_i = m.groups()
    if sign is None and bare_i is None:
        return complex(float(real), 0.0)
    if bare_i is not None:
        return complex(0.0, float(real))
    value = float(imag) if imag is not None else 1.0
    value = -value if sign == "-" else value
    if real is None:
        return complex(0.0, value)
    return complex(float(real), value)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        pos = Position(line, i - line_start + 1)
        if text[i] == "[":
            tokens.append(Token("punct", "[", pos))
            end = text.find("]", i)
            if end < 0:
                raise DiagramSyntaxError("unterminated '['", pos.line, pos.column)
            start = i + 1
            for raw in text[start:end].split(","):
                offset = start + len(raw) - len(raw.lstrip())
                body = re.sub(r"\#[^\n]*", "", raw).strip()
                item_pos = Position(line + text.count("\n", i, offset), offset - text.rfind("\n", 0, offset))
                tokens.append(Token("complex", body, item_pos))
                start += len(raw) + 1
            line += text.count("\n", i, end)
            if "\n" in text[i:end]:
                line_start = text.rfind("\n", i, end) + 1
            tokens.append(Token("punct", "]", Position(line, end - line_start + 1)))
            i = end + 1
            continue
        m = _TOKEN.match(text, i)
        if not m:
            raise DiagramSyntaxError(f"unexpected character {text[i]!r}", pos.line, pos.column)
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), pos))
        i = m.end()
    tokens.append(Token("eof", "", Position(line, i - line_start + 1)))
    return tokens


# -- parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.spaces: dict[str, int] = {}
        self.nodes: list[NodeDecl] = []
        self.wires: list[WireDecl] = []
        self.outputs: tuple[PortRef, ...] | None = None

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        raise DiagramSyntaxError(message, tok.pos.line, tok.pos.column)

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            wanted = repr(text) if text else kind
            found = repr(tok.text) if tok.kind != "eof" else "end of file"
            self.fail(f"expected {wanted}, found {found}")
        return self.advance()

    def at(self, kind: str, text: str | None = None) -> bool:
        return self.tok.kind == kind and (text is None or self.tok.text == text)

    def name(self, what: str) -> Token:
        tok = self.expect("ident")
        if tok.text in KEYWORDS:
            self.fail(f"{tok.text!r} is a keyword and cannot be used as a {what} name", tok)
        return tok

    def integer(self) -> int:
        return int(self.expect("int").text)

    def parse(self) -> Diagram:
        while not self.at("eof"):
            tok = self.tok
            if tok.kind != "ident" or tok.text not in STATEMENTS:
                self.fail(f"expected a statement (space, node, wire, output), found {tok.text!r}")
            getattr(self, f"stmt_{tok.text}")()
        if self.outputs is None:
            self.fail("missing 'output' statement")
        return Diagram(dict(self.spaces), tuple(self.nodes), tuple(self.wires), self.outputs)

    def stmt_space(self):
        self.advance()
        tok = self.name("space")
        self.expect("ident", "dim")
        dim_tok = self.tok
        dim = self.integer()
        if tok.text in self.spaces:
            self.fail(f"duplicate space {tok.text!r}", tok)
        if dim < 1:
            self.fail("space dimension must be positive", dim_tok)
        self.spaces[tok.text] = dim

    def leg(self) -> LegDecl:
        tok = self.tok
        if not (self.at("ident", "in") or self.at("ident", "out")):
            self.fail(f"expected 'in' or 'out', found {tok.text!r}")
        direction = self.advance().text
        dual = False
        if self.at("ident", "dual"):
            self.advance()
            dual = True
        space = self.name("space")
        if space.text not in self.spaces:
            self.fail(f"unknown space {space.text!r}", space)
        return LegDecl(direction, dual, space.text, tok.pos)

    def stmt_node(self):
        start = self.advance()
        name = self.name("node")
        if any(n.name == name.text for n in self.nodes):
            self.fail(f"duplicate node {name.text!r}", name)
        self.expect("punct", "(")
        legs = []
        if not self.at("punct", ")"):  # an empty list declares a scalar
            legs.append(self.leg())
            while self.at("punct", ","):
                self.advance()
                legs.append(self.leg())
        self.expect("punct", ")")
        self.expect("punct", "=")
        init = self.initializer()
        if isinstance(init, Dense):
            size = math.prod(self.spaces[leg.space] for leg in legs)
            if len(init.values) != size:
                raise DiagramSyntaxError(
                    f"node {name.text!r}: dense initializer has {len(init.values)} entries, legs need {size}",
                    init.pos.line,
                    init.pos.column,
                )
        self.nodes.append(NodeDecl(name.text, tuple(legs), init, start.pos))

    def initializer(self) -> Dense | Builder:
        tok = self.tok
        if self.at("ident", "dense"):
            self.advance()
            self.expect("punct", "[")
            values = []
            while self.at("complex"):
                item = self.advance()
                try:
                    values.append(parse_complex(item.text))
                except ValueError:
                    self.fail(f"invalid complex literal {item.text!r}", item)
            self.expect("punct", "]")
            return Dense(tuple(values), tok.pos)
        if self.at("ident", "builder"):
            self.advance()
            name = self.expect("ident")
            args = []
            while self.at("punct", ":"):
                self.advance()
                if self.at("ident") or self.at("int"):
                    args.append(self.advance().text)
                else:
                    self.fail("expected a builder argument")
            return Builder(name.text, tuple(args), tok.pos)
        self.fail(f"expected 'dense' or 'builder', found {tok.text!r}")

    def port(self) -> PortRef:
        node = self.name("node")
        self.expect("punct", ".")
        port_tok = self.tok
        port = self.integer()
        if port < 1:
            self.fail("ports are numbered from 1", port_tok)
        return PortRef(node.text, port, node.pos)

    def stmt_wire(self):
        start = self.advance()
        src = self.port()
        self.expect("arrow")
        dst = self.port()
        bend = False
        if self.at("ident", "bend"):
            self.advance()
            bend = True
        self.wires.append(WireDecl(src, dst, bend, start.pos))

    def stmt_output(self):
        start = self.advance()
        if self.outputs is not None:
            self.fail("a diagram has exactly one 'output' statement", start)
        ports = []
        if self.at("ident") and self.tok.text not in STATEMENTS:
            ports.append(self.port())
            while self.at("punct", ","):
                self.advance()
                ports.append(self.port())
        self.outputs = tuple(ports)


def parse(text: str) -> Diagram:
    return _Parser(text).parse()


# -- printer ----------------------------------------------------------------


def format_complex(z: complex) -> str:
    re_, im = repr(float(z.real)), repr(float(z.imag))
    if z.imag == 0:
        return re_
    if z.real == 0:
        return f"{im}i"
    sign = "-" if im.startswith("-") else "+"
    return f"{re_}{sign}{im.lstrip('-')}i"


def format_diagram(d: Diagram) -> str:
    lines = [f"space {name} dim {dim}" for name, dim in d.spaces.items()]
    for node in d.nodes:
        legs = ", ".join(f"{leg.direction}{' dual' if leg.dual else ''} {leg.space}" for leg in node.legs)
        if isinstance(node.init, Dense):
            init = "dense [" + ", ".join(format_complex(z) for z in node.init.values) + "]"
        else:
            init = "builder " + ":".join((node.init.name,) + node.init.args)
        lines.append(f"node {node.name} ({legs}) = {init}")
    lines += [str(w) for w in d.wires]
    lines.append(("output " + ", ".join(str(p) for p in d.outputs)).rstrip())
    return "\n".join(lines) + "\n"
