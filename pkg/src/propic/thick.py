"""Thickening: from amplitudes to density matrices and channels.

Every thin leg on space ``Q`` becomes a physical leg of dimension ``d²`` on
the operator space ``B(Q)`` (or ``B(Q*)`` for a virtual thin leg).  A thick
ket is the row-major ``vec`` of its density matrix and a thick operator is the
Liouville matrix of its conjugation channel.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .analysis import SuperOp, kraus_from_choi
from .morph import Direction, Essence, Leg, Morph, MorphError

__all__ = [
    "Thick",
    "Flavor",
    "TraceMode",
    "Channel",
    "thick_leg",
    "thicken_morph",
    "flavor_of",
    "iso_operator_spaces",
    "trace_effect",
    "depolarize_to_max_mixed",
    "dephasing",
]


@dataclass(frozen=True)
class Thick:
    """Space label of an operator space ``B(base)``, or ``B(base*)`` when ``dual``."""

    base: Hashable
    dual: bool = False

    def __str__(self) -> str:
        return f"B({self.base}{'*' if self.dual else ''})"


class Flavor(enum.Enum):
    """The four operator spaces ``B(H)``, ``B(H)*``, ``B(H*)``, ``B(H*)*``."""

    B_H = (False, Essence.PHYSICAL)
    B_H_STAR = (False, Essence.VIRTUAL)
    B_HSTAR = (True, Essence.PHYSICAL)
    B_HSTAR_STAR = (True, Essence.VIRTUAL)

    @property
    def transposed(self) -> bool:
        # relative to B(H): B(H)* and B(H*) use the transposed index order
        dual, essence = self.value
        return dual != (essence is Essence.VIRTUAL)


def thick_leg(leg: Leg) -> Leg:
    return Leg(Thick(leg.space, leg.essence is Essence.VIRTUAL), leg.dim**2, leg.direction, Essence.PHYSICAL)


def thicken_morph(a: Morph) -> Morph:
    """``A ↦ A ⊗ conj(A)`` with each leg merged with its conjugate partner.

    A state ``φ`` becomes ``vec(|φ⟩⟨φ|)``, a costate becomes ``ρ ↦ ⟨φ|ρ|φ⟩``
    and an operator ``U`` becomes ``ρ ↦ U ρ U†``.
    """
    n = a.rank
    data = np.multiply.outer(a.data, np.conj(a.data))
    order = [k for pair in zip(range(n), range(n, 2 * n)) for k in pair]
    data = np.transpose(data, order).reshape([leg.dim**2 for leg in a.legs])
    return Morph(tuple(thick_leg(leg) for leg in a.legs), data)


def flavor_of(leg: Leg) -> Flavor:
    if not isinstance(leg.space, Thick):
        raise MorphError(f"leg on {leg.space!r} is not an operator-space leg")
    return Flavor((leg.space.dual, leg.essence))


def iso_operator_spaces(m: Morph, port: int, target: Flavor) -> Morph:
    """Move one thick leg to another operator-space flavor.

    The maps are index permutations (``X`` or ``Xᵀ``) and keep the leg's
    direction, so converting both ends of a wire leaves any closed value fixed.
    """
    port = m._check_port(port)
    leg = m.legs[port]
    source = flavor_of(leg)
    d = math.isqrt(leg.dim)
    data = m.data
    if source.transposed != target.transposed:
        shape = list(m.shape)
        split = data.reshape(shape[:port] + [d, d] + shape[port + 1 :])
        data = np.swapaxes(split, port, port + 1).reshape(shape)
    dual, essence = target.value
    legs = list(m.legs)
    legs[port] = Leg(Thick(leg.space.base, dual), leg.dim, leg.direction, essence)
    return Morph(tuple(legs), data)


def trace_effect(space: Hashable, dim: int) -> Morph:
    """The thick costate ``ρ ↦ Tr ρ`` on ``B(space)``."""
    return Morph((Leg(Thick(space), dim * dim, Direction.IN),), np.eye(dim).ravel())


class TraceMode(enum.Enum):
    TRACE_PRESERVING = "trace-preserving"
    TRACE_NON_INCREASING = "trace-non-increasing"


@dataclass(frozen=True, eq=False)
class Channel:
    """A completely positive map ``ρ ↦ Σ K ρ K†`` stored by its Kraus operators."""

    kraus: tuple[np.ndarray, ...]
    trace_mode: TraceMode = TraceMode.TRACE_PRESERVING
    tol: float = 1e-10

    def __post_init__(self):
        ks = tuple(np.array(k, dtype=np.complex128) for k in self.kraus)
        if not ks:
            raise MorphError("a channel needs at least one Kraus operator")
        shape = ks[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ks):
            raise MorphError("Kraus operators must be matrices of one common shape")
        for k in ks:
            k.flags.writeable = False
        object.__setattr__(self, "kraus", ks)
        gap = np.eye(shape[1]) - sum(k.conj().T @ k for k in ks)
        if self.trace_mode is TraceMode.TRACE_PRESERVING:
            if np.max(np.abs(gap)) > self.tol:
                raise MorphError("Kraus operators do not sum to the identity")
        elif np.linalg.eigvalsh((gap + gap.conj().T) / 2)[0] < -1e-9:
            raise MorphError("Kraus operators increase the trace")

    @property
    def d_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.kraus[0].shape[0]

    @classmethod
    def unitary(cls, u) -> Channel:
        return cls((u,))

    @classmethod
    def identity(cls, d: int) -> Channel:
        return cls((np.eye(d),))

    @classmethod
    def point_collapse(cls, rho0) -> Channel:
        """``ρ ↦ Tr(ρ) ρ₀``."""
        rho0 = np.asarray(rho0, dtype=np.complex128)
        d = rho0.shape[0]
        values, vectors = np.linalg.eigh((rho0 + rho0.conj().T) / 2)
        kraus = []
        for lam, v in zip(values, vectors.T):
            if lam > 1e-14:
                for j in range(d):
                    kraus.append(np.sqrt(lam) * np.outer(v, np.eye(d)[j]))
        return cls(tuple(kraus))

    @classmethod
    def from_superop(cls, lam: SuperOp, tol: float = 1e-9) -> Channel:
        return cls(tuple(kraus_from_choi(lam, tol)), TraceMode.TRACE_NON_INCREASING)

    @property
    def superop(self) -> SuperOp:
        return SuperOp.from_kraus(self.kraus)

    @property
    def liouville(self) -> np.ndarray:
        return sum(np.kron(k, k.conj()) for k in self.kraus)

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=np.complex128)
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def then(self, other: Channel) -> Channel:
        """``other ∘ self``."""
        mode = TraceMode.TRACE_PRESERVING
        if TraceMode.TRACE_NON_INCREASING in (self.trace_mode, other.trace_mode):
            mode = TraceMode.TRACE_NON_INCREASING
        return Channel(tuple(b @ a for a in self.kraus for b in other.kraus), mode)

    def tensor(self, other: Channel) -> Channel:
        return Channel(tuple(np.kron(a, b) for a in self.kraus for b in other.kraus), self.trace_mode)

    def thick_morph(self, space_out: Hashable = "H", space_in: Hashable | None = None) -> Morph:
        """Legs ``(OUT B(out), IN B(in))``; the data is the Liouville matrix."""
        space_in = space_out if space_in is None else space_in
        legs = (
            Leg(Thick(space_out), self.d_out**2, Direction.OUT),
            Leg(Thick(space_in), self.d_in**2, Direction.IN),
        )
        return Morph(legs, self.liouville)


def depolarize_to_max_mixed(d: int = 2) -> Channel:
    """Trace-preserving channel with ``T(ρ) = I/d``.

    For qubits the Kraus operators are ``σ/2`` over the four Pauli matrices;
    other dimensions use ``|i⟩⟨j|/√d``.
    """
    if d == 2:
        from .gates import BELL_LABELS, sigma

        return Channel(tuple(sigma(x, y) / 2 for x, y in BELL_LABELS))
    return Channel.point_collapse(np.eye(d) / d)


def dephasing(basis: Sequence[np.ndarray] | None = None, d: int = 2) -> Channel:
    """Projective measurement channel ``ρ ↦ Σ P ρ P`` in an orthonormal basis."""
    vectors = np.eye(d) if basis is None else np.asarray(basis, dtype=np.complex128)
    return Channel(tuple(np.outer(v, v.conj()) for v in vectors))
