"""Type checking, node construction, planning and evaluation of diagrams."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import gates
from ..morph import Direction, Essence, Leg, Morph, from_matrix
from ..network import (
    DEFAULT_ELEMENT_CAP,
    ElementCapExceeded,
    EvalResult,
    Network,
    Plan,
    execute,
    plan_contraction,
)
from .syntax import Builder, Dense, Diagram, DiagramError, NodeDecl, PortRef, WireDecl

__all__ = [
    "DiagramTypeError",
    "TypedWire",
    "typecheck",
    "node_legs",
    "build_node",
    "BUILDERS",
    "to_network",
    "plan",
    "evaluate",
]


class DiagramTypeError(DiagramError):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class TypedWire:
    wire: WireDecl
    src: tuple[int, int]  # (node index, 0-based port)
    dst: tuple[int, int]
    src_leg: Leg
    dst_leg: Leg


def node_legs(d: Diagram, node: NodeDecl) -> tuple[Leg, ...]:
    return tuple(
        Leg(
            leg.space,
            d.spaces[leg.space],
            Direction.IN if leg.direction == "in" else Direction.OUT,
            Essence.VIRTUAL if leg.dual else Essence.PHYSICAL,
        )
        for leg in node.legs
    )


def _resolve(d: Diagram, ref: PortRef, errors: list[str], what: str) -> tuple[int, int] | None:
    try:
        index = d.node_index(ref.node)
    except KeyError:
        errors.append(f"{what}: unknown node {ref.node!r}")
        return None
    if not 1 <= ref.port <= len(d.nodes[index].legs):
        errors.append(f"{what}: node {ref.node!r} has no port {ref.port}")
        return None
    return index, ref.port - 1


def typecheck(d: Diagram) -> list[TypedWire]:
    """Validate ports and wires; raise :class:`DiagramTypeError` listing every problem.

    A wire runs from an ``out`` port to an ``in`` port on the same space.  Its
    endpoints must have equal essence, or opposite essence when the wire is
    marked ``bend``.
    """
    errors: list[str] = []
    legs = [node_legs(d, n) for n in d.nodes]
    used: dict[tuple[int, int], str] = {}

    def claim(port, user):
        if port is None:
            return
        if port in used:
            node = d.nodes[port[0]].name
            errors.append(f"port {node}.{port[1] + 1} used by both {used[port]} and {user}")
        else:
            used[port] = user

    typed = []
    for wire in d.wires:
        label = str(wire)
        src = _resolve(d, wire.src, errors, label)
        dst = _resolve(d, wire.dst, errors, label)
        claim(src, label)
        claim(dst, label)
        if src is None or dst is None:
            continue
        a, b = legs[src[0]][src[1]], legs[dst[0]][dst[1]]
        ports = f"{wire.src} ({a}) and {wire.dst} ({b})"
        problems = []
        if a.direction is b.direction:
            problems.append(f"direction clash, both ends are {a.direction.value}")
        elif a.direction is Direction.IN:
            problems.append("direction clash, wires run from an out port to an in port")
        if a.space != b.space:
            problems.append(f"space mismatch {a.space} vs {b.space}")
        elif a.dim != b.dim:
            problems.append(f"dimension mismatch {a.dim} vs {b.dim}")
        if wire.bend and a.essence is b.essence:
            problems.append("bend requires opposite essences, both ends are " + a.essence.value)
        elif not wire.bend and a.essence is not b.essence:
            problems.append("essence clash (physical vs virtual) without bend")
        if problems:
            errors.extend(f"{label}: {p} between {ports}" for p in problems)
        else:
            typed.append(TypedWire(wire, src, dst, a, b))
    for ref in d.outputs:
        claim(_resolve(d, ref, errors, f"output {ref}"), f"output {ref}")
    for n, node in enumerate(d.nodes):
        for p in range(len(node.legs)):
            if (n, p) not in used:
                errors.append(f"port {node.name}.{p + 1} is neither wired nor an output")
    if errors:
        raise DiagramTypeError(errors)
    return typed


# -- builders ---------------------------------------------------------------


def _square(n: int, what: str) -> int:
    k = math.isqrt(n)
    if k * k != n:
        raise DiagramError(f"{what}: {n} entries do not form a square matrix")
    return k


def _builder_array(b: Builder, legs: tuple[Leg, ...], rows: int, cols: int, node: str) -> np.ndarray:
    name, args = b.name, b.args

    def arity(n):
        if len(args) != n:
            raise DiagramError(f"node {node!r}: builder {name} takes {n} argument(s), got {len(args)}")

    if name == "identity":
        arity(0)
        mixed = any(leg.is_ket for leg in legs) and not all(leg.is_ket for leg in legs)
        return np.eye(rows if mixed else _square(rows * cols, f"node {node!r}"))
    if name == "bell":
        arity(1)
        if len(args[0]) != 2 or any(c not in "01" for c in args[0]):
            raise DiagramError(f"node {node!r}: bell label must be two bits, got {args[0]!r}")
        return gates.bell(int(args[0][0]), int(args[0][1]))
    if name == "pauli":
        arity(1)
        if args[0] not in ("x", "y", "z"):
            raise DiagramError(f"node {node!r}: pauli takes x, y or z, got {args[0]!r}")
        return gates.PAULIS[args[0]]
    if name in ("hadamard", "cnot", "swap"):
        arity(0)
        return {"hadamard": gates.H, "cnot": gates.CNOT, "swap": gates.SWAP}[name]
    raise DiagramError(f"node {node!r}: unknown builder {name!r}")


def build_node(d: Diagram, node: NodeDecl) -> Morph:
    """Materialize one node.

    Dense data is row-major over the declared legs.  Named builders are read by
    role: vector-like legs (``out``, ``in dual``) index rows and covector-like
    legs (``in``, ``out dual``) index columns, so a builder on covector legs
    only yields the conjugate costate.  ``random:SEED`` fills any shape.
    """
    legs = node_legs(d, node)
    shape = [leg.dim for leg in legs]
    init = node.init
    if isinstance(init, Dense):
        return Morph(legs, np.array(init.values, dtype=np.complex128))
    if init.name == "random":
        if len(init.args) != 1 or not init.args[0].isdigit():
            raise DiagramError(f"node {node.name!r}: random takes one integer seed")
        rng = np.random.default_rng(int(init.args[0]))
        return Morph(legs, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    rows = [k for k, leg in enumerate(legs) if leg.is_ket]
    cols = [k for k, leg in enumerate(legs) if not leg.is_ket]
    n_rows = math.prod(legs[k].dim for k in rows)
    n_cols = math.prod(legs[k].dim for k in cols)
    array = np.asarray(_builder_array(init, legs, n_rows, n_cols, node.name), dtype=np.complex128)
    if array.size != n_rows * n_cols:
        raise DiagramError(
            f"node {node.name!r}: builder {init.name} gives {array.size} entries, legs need {n_rows * n_cols}"
        )
    if not rows:
        return Morph(legs, np.conj(array).reshape(shape))
    if not cols:
        return Morph(legs, array.reshape(shape))
    return from_matrix(array.reshape(n_rows, n_cols), legs, rows, cols)


BUILDERS = ("identity", "bell", "pauli", "hadamard", "cnot", "swap", "random", "dense")


# -- evaluation -------------------------------------------------------------


def to_network(d: Diagram, typed: list[TypedWire] | None = None) -> Network:
    typed = typecheck(d) if typed is None else typed
    shapes = tuple(tuple(leg.dim for leg in node_legs(d, n)) for n in d.nodes)
    outputs = tuple((d.node_index(r.node), r.port - 1) for r in d.outputs)
    return Network(shapes, tuple((w.src, w.dst) for w in typed), outputs)


def plan(d: Diagram, strategy: str = "greedy") -> Plan:
    return plan_contraction(to_network(d), strategy)


def evaluate(
    d: Diagram, p: Plan | None = None, strategy: str = "greedy", cap: int = DEFAULT_ELEMENT_CAP
) -> EvalResult:
    """Contract the diagram; output legs follow the ``output`` statement.

    A bent wire joins its ``in`` end through the canonical isomorphism, which
    only relabels that leg's essence, so no data changes.  The element cap is
    checked before any node is materialized.
    """
    typed = typecheck(d)
    net = to_network(d, typed)
    for node, shape in zip(d.nodes, net.shapes):
        if math.prod(shape) > cap:
            raise ElementCapExceeded(f"node {node.name!r} has {math.prod(shape)} elements, cap is {cap}")
    p = plan_contraction(net, strategy) if p is None else p
    if p.peak > cap:
        raise ElementCapExceeded(f"contraction needs {p.peak} elements, cap is {cap}")
    morphs = [build_node(d, n) for n in d.nodes]
    data, cost, peak = execute([m.data for m in morphs], net, p, cap)
    legs = tuple(morphs[n].legs[k] for n, k in net.outputs)
    return EvalResult(Morph(legs, data), p, cost, peak)
