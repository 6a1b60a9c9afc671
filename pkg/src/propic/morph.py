"""Dense complex tensors with typed legs and the morph algebra.

A :class:`Morph` is a complex array whose axes are described by :class:`Leg`
records.  Each leg carries a space label, a dimension, a direction (``IN`` for
a lower index, ``OUT`` for an upper one) and an essence (``PHYSICAL`` for a
solid line, ``VIRTUAL`` for a dotted one).  All operations address legs by
port index; space labels only decide whether two legs may be joined.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Hashable, Iterable, Sequence

import numpy as np

__all__ = [
    "Direction",
    "Essence",
    "Leg",
    "Morph",
    "Frame",
    "MorphError",
    "opposite",
    "bar",
    "adjoint",
    "compose",
    "partial_trace",
    "tensor",
    "inner",
    "to_matrix",
    "from_matrix",
    "permute",
    "rebase",
    "scalar",
    "identity",
    "operator",
    "ket",
    "bra",
    "random_morph",
    "haar_unitary",
    "random_state",
]


class MorphError(ValueError):
    """Raised when legs cannot be joined or ports are invalid."""


class Direction(enum.Enum):
    IN = "in"
    OUT = "out"

    def flipped(self) -> Direction:
        return Direction.OUT if self is Direction.IN else Direction.IN


class Essence(enum.Enum):
    PHYSICAL = "physical"
    VIRTUAL = "virtual"

    def flipped(self) -> Essence:
        return Essence.VIRTUAL if self is Essence.PHYSICAL else Essence.PHYSICAL


@dataclass(frozen=True)
class Leg:
    """Type of one tensor axis."""

    space: Hashable
    dim: int
    direction: Direction
    essence: Essence = Essence.PHYSICAL

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise MorphError(f"leg dimension must be a positive integer, got {self.dim!r}")

    def opposite(self) -> Leg:
        """Flip direction and essence together (the canonical isomorphism)."""
        return replace(self, direction=self.direction.flipped(), essence=self.essence.flipped())

    def bar(self) -> Leg:
        return replace(self, essence=self.essence.flipped())

    @property
    def is_ket(self) -> bool:
        """True for legs that carry a vector of the space in the standard pairing.

        ``OUT``/physical and its opposite ``IN``/virtual hold the same
        components; ``IN``/physical and ``OUT``/virtual hold covector ones.
        """
        return (self.direction is Direction.OUT) == (self.essence is Essence.PHYSICAL)

    def joinable(self, other: Leg) -> bool:
        return (
            self.space == other.space
            and self.dim == other.dim
            and self.essence is other.essence
            and self.direction is not other.direction
        )

    def __str__(self) -> str:
        star = "*" if self.essence is Essence.VIRTUAL else ""
        return f"{self.direction.value} {self.space}{star}[{self.dim}]"


def _frozen(array) -> np.ndarray:
    data = np.asarray(array, dtype=np.complex128)
    if data.flags.writeable:
        data = data.copy()
        data.flags.writeable = False
    return data


@dataclass(frozen=True, eq=False)
class Morph:
    """A complex tensor together with the ordered types of its axes.

    ``data`` is stored row-major over ``legs``; axis ``k`` has extent
    ``legs[k].dim``.  A morph with no legs is a complex scalar.
    """

    legs: tuple[Leg, ...]
    data: np.ndarray

    def __post_init__(self):
        legs = tuple(self.legs)
        data = _frozen(self.data)
        shape = tuple(leg.dim for leg in legs)
        if data.size != math.prod(shape):
            raise MorphError(
                f"data has {data.size} elements but legs require {math.prod(shape)}"
            )
        data = data.reshape(shape)
        if not np.all(np.isfinite(data)):
            raise MorphError("morph data must be finite")
        object.__setattr__(self, "legs", legs)
        object.__setattr__(self, "data", data)

    @property
    def rank(self) -> int:
        return len(self.legs)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def value(self) -> complex:
        """The complex number held by a morph without legs."""
        if self.legs:
            raise MorphError(f"morph has {len(self.legs)} free legs, not a scalar")
        return complex(self.data.reshape(()))

    def same_signature(self, other: Morph) -> bool:
        return self.legs == other.legs

    def allclose(self, other: Morph, atol: float = 1e-12) -> bool:
        return self.same_signature(other) and bool(np.allclose(self.data, other.data, rtol=0, atol=atol))

    def with_legs(self, legs: Sequence[Leg]) -> Morph:
        """Same data, new leg metadata (dimensions must agree)."""
        legs = tuple(legs)
        if tuple(leg.dim for leg in legs) != self.shape:
            raise MorphError("replacement legs do not match the data shape")
        return Morph(legs, self.data)

    def _check_port(self, port: int) -> int:
        if not isinstance(port, (int, np.integer)) or not 0 <= port < len(self.legs):
            raise MorphError(f"port {port!r} out of range for a morph with {len(self.legs)} legs")
        return int(port)

    def __add__(self, other: Morph) -> Morph:
        if not isinstance(other, Morph):
            return NotImplemented
        if not self.same_signature(other):
            raise MorphError("cannot add morphs with different leg signatures")
        return Morph(self.legs, self.data + other.data)

    def __sub__(self, other: Morph) -> Morph:
        if not isinstance(other, Morph):
            return NotImplemented
        if not self.same_signature(other):
            raise MorphError("cannot subtract morphs with different leg signatures")
        return Morph(self.legs, self.data - other.data)

    def __mul__(self, z) -> Morph:
        if isinstance(z, Morph):
            return NotImplemented
        return Morph(self.legs, complex(z) * self.data)

    __rmul__ = __mul__

    def __neg__(self) -> Morph:
        return Morph(self.legs, -self.data)

    def __repr__(self) -> str:
        legs = ", ".join(str(leg) for leg in self.legs)
        return f"Morph([{legs}])"


# -- the morph algebra ------------------------------------------------------


def opposite(m: Morph, *ports: int) -> Morph:
    """Change the listed legs to their opposites; the data is untouched."""
    if not ports:
        raise MorphError("opposite needs at least one port")
    legs = list(m.legs)
    for port in ports:
        port = m._check_port(port)
        legs[port] = legs[port].opposite()
    return Morph(tuple(legs), m.data)


def bar(m: Morph) -> Morph:
    """Riesz conjugate: conjugate the data and flip every essence."""
    return Morph(tuple(leg.bar() for leg in m.legs), np.conj(m.data))


def adjoint(m: Morph) -> Morph:
    if not m.legs:
        return bar(m)
    return opposite(bar(m), *range(m.rank))


def _check_pair(a: Morph, pa: int, b: Morph, pb: int) -> None:
    la, lb = a.legs[pa], b.legs[pb]
    if la.space != lb.space:
        raise MorphError(f"space mismatch joining ports {pa} and {pb}: {la.space!r} vs {lb.space!r}")
    if la.dim != lb.dim:
        raise MorphError(f"dimension mismatch joining ports {pa} and {pb}: {la.dim} vs {lb.dim}")
    if la.essence is not lb.essence:
        raise MorphError(f"essence mismatch joining ports {pa} and {pb}")
    if la.direction is lb.direction:
        raise MorphError(f"direction mismatch joining ports {pa} and {pb}: both {la.direction.value}")


def compose(a: Morph, b: Morph, pairs: Iterable[tuple[int, int]]) -> Morph:
    """Join ports of ``a`` to ports of ``b`` and contract.

    The result keeps the unjoined legs of ``a`` followed by those of ``b``,
    each in their original order.
    """
    pairs = [(a._check_port(pa), b._check_port(pb)) for pa, pb in pairs]
    a_ports = [pa for pa, _ in pairs]
    b_ports = [pb for _, pb in pairs]
    if len(set(a_ports)) != len(a_ports) or len(set(b_ports)) != len(b_ports):
        raise MorphError("a port may be joined only once")
    for pa, pb in pairs:
        _check_pair(a, pa, b, pb)
    data = np.tensordot(a.data, b.data, axes=(a_ports, b_ports))
    legs = [leg for k, leg in enumerate(a.legs) if k not in a_ports]
    legs += [leg for k, leg in enumerate(b.legs) if k not in b_ports]
    return Morph(tuple(legs), data)


def partial_trace(m: Morph, out_port: int, in_port: int) -> Morph:
    out_port, in_port = m._check_port(out_port), m._check_port(in_port)
    if out_port == in_port:
        raise MorphError("partial trace needs two distinct ports")
    _check_pair(m, out_port, m, in_port)
    data = np.trace(m.data, axis1=out_port, axis2=in_port)
    legs = tuple(leg for k, leg in enumerate(m.legs) if k not in (out_port, in_port))
    return Morph(legs, data)


def tensor(a: Morph, b: Morph) -> Morph:
    return Morph(a.legs + b.legs, np.multiply.outer(a.data, b.data))


def inner(a: Morph, b: Morph) -> complex:
    """Hilbert-Schmidt inner product, antilinear in ``a``."""
    if not a.same_signature(b):
        raise MorphError("inner product needs identical leg signatures")
    return complex(np.vdot(a.data, b.data))


def _check_partition(m: Morph, row_ports, col_ports) -> tuple[list[int], list[int]]:
    rows = [m._check_port(p) for p in row_ports]
    cols = [m._check_port(p) for p in col_ports]
    if sorted(rows + cols) != list(range(m.rank)):
        raise MorphError("row and column ports must partition the legs")
    return rows, cols


def to_matrix(m: Morph, row_ports: Sequence[int], col_ports: Sequence[int]) -> np.ndarray:
    rows, cols = _check_partition(m, row_ports, col_ports)
    n_rows = math.prod(m.legs[p].dim for p in rows)
    n_cols = math.prod(m.legs[p].dim for p in cols)
    return np.transpose(m.data, rows + cols).reshape(n_rows, n_cols)


def from_matrix(
    matrix, legs: Sequence[Leg], row_ports: Sequence[int], col_ports: Sequence[int]
) -> Morph:
    """Inverse of :func:`to_matrix` for the given leg signature."""
    legs = tuple(legs)
    rows, cols = list(row_ports), list(col_ports)
    if sorted(rows + cols) != list(range(len(legs))):
        raise MorphError("row and column ports must partition the legs")
    matrix = np.asarray(matrix, dtype=np.complex128)
    grouped = matrix.reshape([legs[p].dim for p in rows + cols])
    return Morph(legs, np.transpose(grouped, np.argsort(rows + cols)))


def permute(m: Morph, order: Sequence[int]) -> Morph:
    order = [m._check_port(p) for p in order]
    if sorted(order) != list(range(m.rank)):
        raise MorphError("permutation must list every port exactly once")
    return Morph(tuple(m.legs[p] for p in order), np.transpose(m.data, order))


@dataclass(frozen=True, eq=False)
class Frame:
    """An orthonormal basis of one space; row ``i`` is basis vector ``i``."""

    space: Hashable
    vectors: np.ndarray

    def __post_init__(self):
        vectors = _frozen(self.vectors)
        if vectors.ndim != 2 or vectors.shape[0] != vectors.shape[1]:
            raise MorphError("frame vectors must form a square matrix")
        gram = vectors @ vectors.conj().T
        if not np.allclose(gram, np.eye(len(vectors)), rtol=0, atol=1e-12):
            raise MorphError("frame rows are not orthonormal")
        object.__setattr__(self, "vectors", vectors)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def standard(cls, space: Hashable, dim: int) -> Frame:
        return cls(space, np.eye(dim))

    @classmethod
    def random(cls, space: Hashable, dim: int, rng: np.random.Generator) -> Frame:
        return cls(space, haar_unitary(dim, rng))


def rebase(m: Morph, space: Hashable, frame: Frame) -> Morph:
    """Express every leg on ``space`` in the components of ``frame``.

    Vector-like legs (``OUT``/physical, ``IN``/virtual) take components
    ``conj(E) v``; covector-like legs take ``E w``.  Fully contracted values are
    therefore unchanged, and rebase commutes with :func:`opposite`.
    """
    if frame.space != space:
        raise MorphError(f"frame belongs to {frame.space!r}, not {space!r}")
    data = m.data
    for k, leg in enumerate(m.legs):
        if leg.space != space:
            continue
        if leg.dim != frame.dim:
            raise MorphError(f"frame dimension {frame.dim} does not match leg {k} ({leg.dim})")
        change = np.conj(frame.vectors) if leg.is_ket else frame.vectors
        data = np.moveaxis(np.tensordot(change, data, axes=([1], [k])), 0, k)
    return Morph(m.legs, data)


# -- constructors -----------------------------------------------------------


def scalar(z) -> Morph:
    return Morph((), np.asarray(z, dtype=np.complex128))


def identity(space: Hashable, dim: int, essence: Essence = Essence.PHYSICAL) -> Morph:
    """The identity morph, legs ``(IN, OUT)``."""
    legs = (Leg(space, dim, Direction.IN, essence), Leg(space, dim, Direction.OUT, essence))
    return Morph(legs, np.eye(dim))


def _subsystem_dims(total: int, spaces: Sequence[Hashable], dims) -> list[int]:
    if dims is not None:
        dims = [int(d) for d in dims]
        if len(dims) != len(spaces) or math.prod(dims) != total:
            raise MorphError(f"dims {dims} do not factor a space of dimension {total}")
        return dims
    d = round(total ** (1 / len(spaces)))
    if d ** len(spaces) != total:
        raise MorphError(f"cannot split dimension {total} evenly over {len(spaces)} spaces")
    return [d] * len(spaces)


def operator(matrix, spaces: Hashable | Sequence[Hashable] = "H", dims=None) -> Morph:
    """An operator as a morph with legs ``(OUT s1..sn, IN s1..sn)``.

    ``matrix[row, col]`` is read with rows as outputs, so the data array equals
    the matrix itself for a single space.
    """
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise MorphError("operator needs a square matrix")
    if isinstance(spaces, (str, bytes)) or not isinstance(spaces, Sequence):
        spaces = [spaces]
    dims = _subsystem_dims(matrix.shape[0], spaces, dims)
    outs = [Leg(s, d, Direction.OUT) for s, d in zip(spaces, dims)]
    ins = [Leg(s, d, Direction.IN) for s, d in zip(spaces, dims)]
    n = len(spaces)
    return from_matrix(matrix, outs + ins, range(n), range(n, 2 * n))


def ket(vector, spaces: Hashable | Sequence[Hashable] = "H", dims=None) -> Morph:
    vector = np.asarray(vector, dtype=np.complex128).ravel()
    if isinstance(spaces, (str, bytes)) or not isinstance(spaces, Sequence):
        spaces = [spaces]
    dims = _subsystem_dims(vector.size, spaces, dims)
    return Morph(tuple(Leg(s, d, Direction.OUT) for s, d in zip(spaces, dims)), vector)


def bra(vector, spaces: Hashable | Sequence[Hashable] = "H", dims=None) -> Morph:
    return adjoint(ket(vector, spaces, dims))


# -- seeded randomness ------------------------------------------------------


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR factorisation of a Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_morph(legs: Sequence[Leg], rng: np.random.Generator) -> Morph:
    shape = [leg.dim for leg in legs]
    return Morph(tuple(legs), rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
