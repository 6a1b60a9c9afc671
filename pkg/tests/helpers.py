"""Random typed networks and an independent einsum oracle for them."""

from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from propic.morph import Direction, Essence, Leg, Morph, random_morph
from propic.network import contract


@dataclass
class RandomDiagram:
    morphs: list[Morph]
    wires: list[tuple[tuple[int, int], tuple[int, int]]]
    outputs: list[tuple[int, int]]


def random_diagram(rng: np.random.Generator, n_nodes: int, n_outputs: int = 0, max_dim: int = 3) -> RandomDiagram:
    """Connected random network; every wire lives on its own space label."""
    edges = [(k, int(rng.integers(k))) for k in range(1, n_nodes)]
    edges += [tuple(int(x) for x in rng.integers(n_nodes, size=2)) for _ in range(int(rng.integers(0, n_nodes)))]
    slots: list[list] = [[] for _ in range(n_nodes)]
    for w, (a, b) in enumerate(edges):
        dim = int(rng.integers(2, max_dim + 1))
        essence = Essence.VIRTUAL if rng.random() < 0.3 else Essence.PHYSICAL
        slots[a].append((("w", w, 0), Leg(f"S{w}", dim, Direction.OUT, essence)))
        slots[b].append((("w", w, 1), Leg(f"S{w}", dim, Direction.IN, essence)))
    for k in range(n_outputs):
        node = int(rng.integers(n_nodes))
        direction = Direction.OUT if rng.random() < 0.5 else Direction.IN
        slots[node].append((("o", k, 0), Leg(f"O{k}", int(rng.integers(2, max_dim + 1)), direction)))
    where = {}
    morphs = []
    for n, slot in enumerate(slots):
        order = rng.permutation(len(slot))
        legs = []
        for port, idx in enumerate(order):
            key, leg = slot[idx]
            where[key] = (n, port)
            legs.append(leg)
        morphs.append(random_morph(legs, rng))
    wires = [(where[("w", w, 0)], where[("w", w, 1)]) for w in range(len(edges))]
    outputs = [where[("o", k, 0)] for k in range(n_outputs)]
    return RandomDiagram(morphs, wires, outputs)


def einsum_oracle(morphs, wires, outputs) -> np.ndarray:
    letters = iter(string.ascii_letters)
    labels = [[None] * m.rank for m in morphs]
    for a, b in wires:
        c = next(letters)
        labels[a[0]][a[1]] = c
        labels[b[0]][b[1]] = c
    out = []
    for n, p in outputs:
        c = next(letters)
        labels[n][p] = c
        out.append(c)
    spec = ",".join("".join(ls) for ls in labels) + "->" + "".join(out)
    return np.einsum(spec, *[m.data for m in morphs], optimize=False)


def contract_grouped(d: RandomDiagram, group: set[int]) -> Morph:
    """Contract the nodes in ``group`` into one compound node first, then the rest."""
    inside = [n for n in range(len(d.morphs)) if n in group]
    local = {n: i for i, n in enumerate(inside)}
    inner_wires = [(a, b) for a, b in d.wires if a[0] in group and b[0] in group]
    used = {p for w in inner_wires for p in w}
    free = [(n, p) for n in inside for p in range(d.morphs[n].rank) if (n, p) not in used]
    compound = contract(
        [d.morphs[n] for n in inside],
        [((local[a[0]], a[1]), (local[b[0]], b[1])) for a, b in inner_wires],
        [(local[n], p) for n, p in free],
    )
    rest = [n for n in range(len(d.morphs)) if n not in group]
    index = {n: i + 1 for i, n in enumerate(rest)}
    position = {port: (0, k) for k, port in enumerate(free)}

    def move(port):
        return position[port] if port[0] in group else (index[port[0]], port[1])

    outer_wires = [(move(a), move(b)) for a, b in d.wires if (a, b) not in inner_wires]
    return contract([compound] + [d.morphs[n] for n in rest], outer_wires, [move(p) for p in d.outputs])


def magnitude_scale(morphs, wires) -> float:
    """Sum of the absolute values of every term of a closed contraction.

    Rounding error of the contraction is bounded relative to this, not to the
    (possibly much smaller) value itself.
    """
    return max(1.0, float(abs(einsum_oracle([Morph(m.legs, np.abs(m.data)) for m in morphs], wires, []))))
