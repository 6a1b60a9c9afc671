"""Contraction planning and execution for networks of morphs.

A network is a list of node tensors, a list of wires joining two ports, and an
ordered list of output ports.  Planning only looks at dimensions; execution
follows a :class:`Plan` step by step in a fixed order, so the same plan always
produces bit-identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .morph import Morph, MorphError

__all__ = [
    "Port",
    "Network",
    "Step",
    "Plan",
    "PlanError",
    "ElementCapExceeded",
    "EvalResult",
    "DEFAULT_ELEMENT_CAP",
    "MAX_EXHAUSTIVE_NODES",
    "plan_contraction",
    "execute",
    "contract",
]

DEFAULT_ELEMENT_CAP = 2**22
MAX_EXHAUSTIVE_NODES = 8

Port = tuple[int, int]


class PlanError(ValueError):
    pass


class ElementCapExceeded(RuntimeError):
    """An input or intermediate tensor would exceed the element cap."""


@dataclass(frozen=True)
class Network:
    """Shapes, wires and outputs.  Ports are ``(node, axis)`` pairs, 0-based."""

    shapes: tuple[tuple[int, ...], ...]
    wires: tuple[tuple[Port, Port], ...]
    outputs: tuple[Port, ...]

    def __post_init__(self):
        object.__setattr__(self, "shapes", tuple(tuple(int(d) for d in s) for s in self.shapes))
        object.__setattr__(self, "wires", tuple((tuple(a), tuple(b)) for a, b in self.wires))
        object.__setattr__(self, "outputs", tuple(tuple(p) for p in self.outputs))
        used: set[Port] = set()
        for port in [p for w in self.wires for p in w] + list(self.outputs):
            node, axis = port
            if not (0 <= node < len(self.shapes) and 0 <= axis < len(self.shapes[node])):
                raise PlanError(f"port {port} does not exist")
            if port in used:
                raise PlanError(f"port {port} used twice")
            used.add(port)
        for a, b in self.wires:
            if self.shapes[a[0]][a[1]] != self.shapes[b[0]][b[1]]:
                raise PlanError(f"wire {a}->{b} joins axes of different extent")
        missing = [
            (n, k) for n, s in enumerate(self.shapes) for k in range(len(s)) if (n, k) not in used
        ]
        if missing:
            raise PlanError(f"ports {missing} are neither wired nor outputs")

    @property
    def n_nodes(self) -> int:
        return len(self.shapes)

    def edges(self) -> tuple[list[list[int]], list[int]]:
        """Per node, the edge id on each axis; and the extent of each edge.

        Wires are edges ``0..W-1``; outputs follow as ``W..W+O-1``.
        """
        labels = [[-1] * len(s) for s in self.shapes]
        dims = []
        for e, (a, b) in enumerate(self.wires):
            labels[a[0]][a[1]] = e
            labels[b[0]][b[1]] = e
            dims.append(self.shapes[a[0]][a[1]])
        for k, (n, axis) in enumerate(self.outputs):
            labels[n][axis] = len(self.wires) + k
            dims.append(self.shapes[n][axis])
        return labels, dims


@dataclass(frozen=True)
class Step:
    """One contraction step.

    ``kind`` is ``"trace"`` (self-loops of one node, ``right`` is None) or
    ``"pair"``.  Operands and result are cluster ids: nodes keep their index,
    new clusters are numbered from ``n_nodes`` upward.
    """

    kind: str
    left: int
    right: int | None
    result: int
    size: int
    cost: int


@dataclass(frozen=True)
class Plan:
    strategy: str
    steps: tuple[Step, ...]
    cost: int
    peak: int
    final: int

    def describe(self) -> list[dict]:
        return [
            {
                "kind": s.kind,
                "left": s.left,
                "right": s.right,
                "result": s.result,
                "size": s.size,
                "cost": s.cost,
            }
            for s in self.steps
        ]


@dataclass(frozen=True, eq=False)
class EvalResult:
    morph: Morph
    plan: Plan
    cost: int
    peak: int


class _Clusters:
    """Bookkeeping of free edges per cluster while a plan is built or run."""

    def __init__(self, net: Network):
        self.labels, self.dims = net.edges()
        self.n_wires = len(net.wires)
        self.free: dict[int, list[int]] = {}
        self.members: dict[int, int] = {}
        self.next_id = net.n_nodes
        for n in range(net.n_nodes):
            self.free[n] = list(self.labels[n])
            self.members[n] = n

    def size(self, edges) -> int:
        return math.prod(self.dims[e] for e in edges)

    def self_loops(self, cid: int) -> list[int]:
        edges = self.free[cid]
        return sorted({e for e in edges if edges.count(e) == 2})

    def pair_result(self, a: int, b: int) -> list[int]:
        shared = set(self.free[a]) & set(self.free[b])
        return [e for e in self.free[a] if e not in shared] + [
            e for e in self.free[b] if e not in shared
        ]

    def merge(self, a: int, b: int) -> int:
        cid = self.next_id
        self.next_id += 1
        self.free[cid] = self.pair_result(a, b)
        self.members[cid] = min(self.members[a], self.members[b])
        del self.free[a], self.free[b]
        return cid


def _trace_steps(net: Network, clusters: _Clusters) -> list[Step]:
    steps = []
    for n in range(net.n_nodes):
        loops = clusters.self_loops(n)
        if not loops:
            continue
        before = clusters.size(clusters.free[n])
        clusters.free[n] = [e for e in clusters.free[n] if e not in loops]
        size = clusters.size(clusters.free[n])
        steps.append(Step("trace", n, None, n, size, before // math.prod(clusters.dims[e] for e in loops)))
    return steps


def _pair_step(clusters: _Clusters, a: int, b: int) -> Step:
    sa, sb = clusters.size(clusters.free[a]), clusters.size(clusters.free[b])
    shared = clusters.size(set(clusters.free[a]) & set(clusters.free[b]))
    size = sa * sb // (shared * shared)
    cid = clusters.merge(a, b)
    return Step("pair", a, b, cid, size, sa * sb // shared)


def _greedy(net: Network, clusters: _Clusters) -> list[Step]:
    steps = []
    while len(clusters.free) > 1:
        live = sorted(clusters.free, key=lambda c: clusters.members[c])
        best = None
        connected = False
        for i, a in enumerate(live):
            for b in live[i + 1 :]:
                linked = bool(set(clusters.free[a]) & set(clusters.free[b]))
                if connected and not linked:
                    continue
                size = clusters.size(clusters.pair_result(a, b))
                key = (size, clusters.members[a], clusters.members[b])
                if linked and not connected:
                    connected, best = True, (key, a, b)
                elif best is None or key < best[0]:
                    best = (key, a, b)
        _, a, b = best
        steps.append(_pair_step(clusters, a, b))
    return steps


def _exhaustive(net: Network, clusters: _Clusters) -> list[Step]:
    n = net.n_nodes
    if n > MAX_EXHAUSTIVE_NODES:
        raise PlanError(f"exhaustive planning is limited to {MAX_EXHAUSTIVE_NODES} nodes, got {n}")
    if n < 2:
        return []
    node_edges = [set(clusters.free[k]) for k in range(n)]
    full = (1 << n) - 1
    size = [1] * (full + 1)
    for mask in range(1, full + 1):
        count: dict[int, int] = {}
        for k in range(n):
            if mask >> k & 1:
                for e in node_edges[k]:
                    count[e] = count.get(e, 0) + 1
        # a wire inside the mask appears twice; outputs and cut wires once
        size[mask] = math.prod(clusters.dims[e] for e, c in count.items() if c == 1)

    best_cost = [0] * (full + 1)
    best_split = [0] * (full + 1)
    for mask in sorted(range(1, full + 1), key=lambda m: (bin(m).count("1"), m)):
        if mask & (mask - 1) == 0:
            continue
        low = mask & -mask
        rest = mask ^ low
        choice, choice_cost = 0, None
        sub = rest
        while True:
            left = sub | low
            right = mask ^ left
            if right:
                step = math.isqrt(size[left] * size[right] * size[mask])
                total = best_cost[left] + best_cost[right] + step
                if choice_cost is None or total < choice_cost or (total == choice_cost and left < choice):
                    choice, choice_cost = left, total
            if sub == 0:
                break
            sub = (sub - 1) & rest
        best_cost[mask], best_split[mask] = choice_cost, choice

    steps: list[Step] = []

    def build(mask: int) -> int:
        if mask & (mask - 1) == 0:
            return mask.bit_length() - 1
        left = best_split[mask]
        a, b = build(left), build(mask ^ left)
        if clusters.members[a] > clusters.members[b]:
            a, b = b, a
        steps.append(_pair_step(clusters, a, b))
        return steps[-1].result

    build(full)
    return steps


def plan_contraction(net: Network, strategy: str = "greedy") -> Plan:
    """Order the pairwise contractions of ``net``.

    ``greedy`` repeatedly joins the wire-connected pair whose result is
    smallest (ties by lowest node indices).  ``exhaustive`` finds the minimum
    total multiply-add count over all pairwise orders and is limited to
    :data:`MAX_EXHAUSTIVE_NODES` nodes.
    """
    if strategy not in ("greedy", "exhaustive"):
        raise PlanError(f"unknown planning strategy {strategy!r}")
    if net.n_nodes == 0:
        return Plan(strategy, (), 0, 1, -1)
    clusters = _Clusters(net)
    steps = _trace_steps(net, clusters)
    if strategy == "greedy":
        steps += _greedy(net, clusters)
    else:
        steps += _exhaustive(net, clusters)
    (final,) = clusters.free
    peak = max([math.prod(s) if s else 1 for s in net.shapes] + [s.size for s in steps])
    return Plan(strategy, tuple(steps), sum(s.cost for s in steps), peak, final)


def execute(
    arrays: Sequence[np.ndarray], net: Network, plan: Plan, cap: int = DEFAULT_ELEMENT_CAP
) -> tuple[np.ndarray, int, int]:
    """Run ``plan`` on ``arrays``; returns (tensor over outputs, cost, peak)."""
    if plan.peak > cap:
        raise ElementCapExceeded(f"contraction needs {plan.peak} elements, cap is {cap}")
    if net.n_nodes == 0:
        return np.ones((), dtype=np.complex128), 0, 1
    labels, _ = net.edges()
    tensors = {n: (np.asarray(arrays[n], dtype=np.complex128), list(labels[n])) for n in range(net.n_nodes)}
    for n, arr in enumerate(arrays):
        if tuple(np.shape(arr)) != net.shapes[n]:
            raise PlanError(f"node {n} has shape {np.shape(arr)}, network expects {net.shapes[n]}")
    cost = 0
    peak = max(t.size for t, _ in tensors.values())
    for step in plan.steps:
        if step.kind == "trace":
            data, edges = tensors[step.left]
            for e in sorted({e for e in edges if edges.count(e) == 2}):
                i = edges.index(e)
                j = edges.index(e, i + 1)
                data = np.trace(data, axis1=i, axis2=j)
                edges = [x for k, x in enumerate(edges) if k not in (i, j)]
            tensors[step.result] = (data, edges)
        else:
            (da, ea), (db, eb) = tensors.pop(step.left), tensors.pop(step.right)
            shared = [e for e in ea if e in eb]
            data = np.tensordot(da, db, axes=([ea.index(e) for e in shared], [eb.index(e) for e in shared]))
            edges = [e for e in ea if e not in shared] + [e for e in eb if e not in shared]
            tensors[step.result] = (data, edges)
        cost += step.cost
        peak = max(peak, tensors[step.result][0].size)
    data, edges = tensors[plan.final]
    wanted = [len(net.wires) + k for k in range(len(net.outputs))]
    data = np.transpose(data, [edges.index(e) for e in wanted])
    return data, cost, peak


def contract(
    morphs: Sequence[Morph],
    wires: Sequence[tuple[Port, Port]],
    outputs: Sequence[Port],
    strategy: str = "greedy",
    cap: int = DEFAULT_ELEMENT_CAP,
) -> Morph:
    """Contract typed morphs; every wire must join an ``OUT`` leg to a matching ``IN`` leg."""
    for (na, pa), (nb, pb) in wires:
        la, lb = morphs[na].legs[pa], morphs[nb].legs[pb]
        if not la.joinable(lb):
            raise MorphError(f"wire ({na},{pa})->({nb},{pb}) joins incompatible legs {la} and {lb}")
    net = Network(tuple(m.shape for m in morphs), tuple(wires), tuple(outputs))
    plan = plan_contraction(net, strategy)
    data, _, _ = execute([m.data for m in morphs], net, plan, cap)
    return Morph(tuple(morphs[n].legs[p] for n, p in outputs), data)
