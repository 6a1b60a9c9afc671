"""Executable checks of the standard entanglement protocols.

Each ``check_*`` builds the protocol as a network of morphs, contracts it and
compares the result with the expected behaviour.  Reports carry one metric per
tested quantity as ``(label, value, tolerance)``; a metric passes when its
value is at most its tolerance, so fidelities enter as ``1 - fidelity``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import gates
from .analysis import DensityMatrix, is_positive, partial_transpose
from .morph import Direction, Essence, Leg, Morph, adjoint, bra, haar_unitary, ket, operator, random_state
from .network import contract

__all__ = [
    "Metric",
    "ProtocolReport",
    "bell",
    "bell_effect",
    "trial_rng",
    "teleport_output",
    "check_teleportation",
    "superdense_forms",
    "check_superdense",
    "swap_forms",
    "check_entanglement_swap",
    "coecke_output",
    "coecke_oracle",
    "check_coecke",
    "reduced_after_local",
    "check_no_signaling",
    "zigzag",
    "check_zigzag",
]

Q = "Q"


@dataclass(frozen=True)
class Metric:
    label: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)


@dataclass(frozen=True, eq=False)
class ProtocolReport:
    name: str
    metrics: tuple[Metric, ...]
    witness: Any = None
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.metrics)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial of a seeded check."""
    return np.random.default_rng([seed, trial])


def bell(x: int, y: int, spaces: Sequence = (Q, Q)) -> Morph:
    return ket(gates.bell(x, y), list(spaces), (2, 2))


def bell_effect(x: int, y: int, spaces: Sequence = (Q, Q)) -> Morph:
    return bra(gates.bell(x, y), list(spaces), (2, 2))


def _fidelity(expected: np.ndarray, actual: np.ndarray) -> float:
    """Squared overlap of the directions of two vectors."""
    expected, actual = expected.ravel(), actual.ravel()
    norms = np.linalg.norm(expected) * np.linalg.norm(actual)
    if norms == 0:
        return 0.0
    return float(abs(np.vdot(expected, actual)) ** 2 / norms**2)


def teleport_output(phi: np.ndarray, x: int, y: int) -> np.ndarray:
    """Bob's unnormalized qubit after outcome ``(x, y)`` and the correction ``σ_xy†``."""
    nodes = [
        ket(phi, Q),
        bell(0, 0),
        bell_effect(x, y),
        operator(gates.sigma(x, y).conj().T, Q),
    ]
    wires = [((0, 0), (2, 0)), ((1, 0), (2, 1)), ((1, 1), (3, 1))]
    return contract(nodes, wires, [(3, 0)]).data


def check_teleportation(seed: int = 0, n_trials: int = 50) -> ProtocolReport:
    worst_fid, worst_prob, worst_sum = 0.0, 0.0, 0.0
    witness = None
    for trial in range(n_trials):
        phi = random_state(2, trial_rng(seed, trial))
        total = 0.0
        for x, y in gates.BELL_LABELS:
            out = teleport_output(phi, x, y)
            prob = float(np.vdot(out, out).real)
            total += prob
            deviation = 1 - _fidelity(phi, out)
            if deviation > worst_fid:
                worst_fid, witness = deviation, {"trial": trial, "outcome": [x, y]}
            worst_prob = max(worst_prob, abs(prob - 0.25))
        worst_sum = max(worst_sum, abs(total - 1))
    return ProtocolReport(
        "teleport",
        (
            Metric("max 1-fidelity", worst_fid, 1e-10),
            Metric("max |p - 1/4|", worst_prob, 1e-10),
            Metric("max |sum p - 1|", worst_sum, 1e-12),
        ),
        witness,
        {"trials": n_trials},
    )


def superdense_forms(encoding: np.ndarray) -> tuple[Morph, Morph]:
    """The encoded pair in temporal form and in channel form.

    In the channel form Alice's node has its input leg declared on the dual
    space; the wire from the source is bent onto it, which changes metadata
    only.
    """
    alice = operator(encoding, Q)
    omega = bell(0, 0)
    temporal = contract([omega, alice], [((0, 0), (1, 1))], [(1, 0), (0, 1)])
    bent = alice.with_legs((alice.legs[0], Leg(Q, 2, Direction.IN, Essence.VIRTUAL)))
    straightened = bent.with_legs((bent.legs[0], bent.legs[1].bar()))
    channel = contract([omega, straightened], [((0, 0), (1, 1))], [(1, 0), (0, 1)])
    return temporal, channel


def check_superdense(seed: int = 0) -> ProtocolReport:
    encoded = [superdense_forms(gates.sigma(x, y))[0].data.ravel() for x, y in gates.BELL_LABELS]
    gram = np.array([[np.vdot(a, b) for b in encoded] for a in encoded])
    gram_error = float(np.max(np.abs(gram - np.eye(4))))
    mismatch = 0.0
    rng = np.random.default_rng(seed)
    for encoding in [gates.sigma(x, y) for x, y in gates.BELL_LABELS] + [haar_unitary(2, rng)]:
        temporal, channel = superdense_forms(encoding)
        if temporal.legs != channel.legs:
            mismatch = np.inf
        mismatch = max(mismatch, float(np.max(np.abs(temporal.data - channel.data))))
    alphabet = max(abs(np.vdot(s, s).real - 2) for s in (gates.sigma(x, y) for x, y in gates.BELL_LABELS))
    return ProtocolReport(
        "superdense",
        (
            Metric("max |gram - I4|", gram_error, 1e-12),
            Metric("temporal vs channel", mismatch, 0.0),
            Metric("max |norm^2 of channel letter - 2|", float(alphabet), 1e-12),
        ),
    )


def swap_forms(x: int, y: int) -> tuple[Morph, Morph]:
    """Alice-Bob state after Charlie's Bell outcome, temporal and channel forms."""
    nodes = [bell(0, 0), bell(0, 0), bell_effect(x, y)]
    wires = [((0, 1), (2, 0)), ((1, 0), (2, 1))]
    outputs = [(0, 0), (1, 1)]
    temporal = contract(nodes, wires, outputs)
    effect = nodes[2]
    bent = effect.with_legs((effect.legs[0], effect.legs[1].bar()))
    nodes[2] = bent.with_legs((bent.legs[0], bent.legs[1].bar()))
    channel = contract(nodes, wires, outputs)
    return temporal, channel


def check_entanglement_swap(seed: int = 0) -> ProtocolReport:
    worst_fid, total, mismatch = 0.0, 0.0, 0.0
    averaged = np.zeros((4, 4), dtype=np.complex128)
    for x, y in gates.BELL_LABELS:
        temporal, channel = swap_forms(x, y)
        mismatch = max(mismatch, float(np.max(np.abs(temporal.data - channel.data))))
        psi = temporal.data.ravel()
        prob = float(np.vdot(psi, psi).real)
        total += prob
        averaged += np.outer(psi, psi.conj())
        best = max(_fidelity(gates.bell(a, b), psi) for a, b in gates.BELL_LABELS)
        if (x, y) == (0, 0):
            worst_fid = max(worst_fid, 1 - _fidelity(gates.bell(0, 0), psi))
        worst_fid = max(worst_fid, 1 - best)
    rho = DensityMatrix.from_matrix(averaged, (2, 2))
    ppt = is_positive(partial_transpose(rho, 0), 1e-9)
    return ProtocolReport(
        "swap",
        (
            Metric("max 1-bell fidelity", worst_fid, 1e-10),
            Metric("|sum p - 1|", abs(total - 1), 1e-12),
            Metric("-min eig PT(averaged)", -ppt.min_eigenvalue, 1e-9),
            Metric("max |averaged - I4/4|", float(np.max(np.abs(averaged - np.eye(4) / 4))), 1e-12),
            Metric("temporal vs channel", mismatch, 0.0),
        ),
    )


def coecke_output(phi1: np.ndarray, phi23: np.ndarray, big_phi: np.ndarray, big_psi: np.ndarray, d: int) -> Morph:
    """Apply ``|Ψ⟩⟨Ψ|`` on systems 2,3 then ``|Φ⟩⟨Φ|`` on systems 1,2.

    Returns the three-leg output on systems 1, 2, 3.
    """
    spaces = ("H1", "H2", "H3")
    nodes = [
        ket(phi1, spaces[0], (d,)),
        ket(phi23, spaces[1:], (d, d)),
        bra(big_psi, spaces[1:], (d, d)),
        ket(big_psi, spaces[1:], (d, d)),
        bra(big_phi, spaces[:2], (d, d)),
        ket(big_phi, spaces[:2], (d, d)),
    ]
    wires = [((1, 0), (2, 0)), ((1, 1), (2, 1)), ((0, 0), (4, 0)), ((3, 0), (4, 1))]
    return contract(nodes, wires, [(5, 0), (5, 1), (3, 1)])


def _antilinear_map(state: np.ndarray, d: int):
    """``F_state: φ ↦ Σ conj(φ_c) state[c, d] e_d``."""
    mat = state.reshape(d, d)
    return lambda phi: np.conj(phi) @ mat


def coecke_oracle(phi1: np.ndarray, big_phi: np.ndarray, big_psi: np.ndarray, d: int) -> np.ndarray:
    """``(F_Ψ ∘ F_Φ)(φ₁)``, composing the two antilinear maps literally."""
    return _antilinear_map(big_psi, d)(_antilinear_map(big_phi, d)(phi1))


def check_coecke(seed: int = 0, n_trials: int = 100, d: int = 2) -> ProtocolReport:
    worst_overlap, worst_factor, skipped = 0.0, 0.0, 0
    witness = None
    for trial in range(n_trials):
        rng = trial_rng(seed, trial)
        phi1, phi23 = random_state(d, rng), random_state(d * d, rng)
        big_phi, big_psi = random_state(d * d, rng), random_state(d * d, rng)
        out = coecke_output(phi1, phi23, big_phi, big_psi, d).data.reshape(d * d, d)
        s = np.linalg.svd(out, compute_uv=False)
        if s[0] < 1e-12:
            skipped += 1
            continue
        factor = float(1 - s[0] ** 2 / np.sum(s**2))
        _, _, vh = np.linalg.svd(out)
        psi3 = vh[0]
        overlap = 1 - _fidelity(coecke_oracle(phi1, big_phi, big_psi, d), psi3)
        if overlap > worst_overlap:
            worst_overlap, witness = overlap, {"trial": trial}
        worst_factor = max(worst_factor, factor)

    special_in = random_state(d, np.random.default_rng(seed))
    maximal = np.eye(d).ravel() / np.sqrt(d)
    out = coecke_output(special_in, maximal, maximal, maximal, d).data.reshape(d * d, d)
    _, _, vh = np.linalg.svd(out)
    special = 1 - _fidelity(special_in, vh[0])
    return ProtocolReport(
        "coecke",
        (
            Metric("max 1-overlap with F_Psi(F_Phi(phi1))", worst_overlap, 1e-10),
            Metric("max non-product weight", worst_factor, 1e-10),
            Metric("maximally entangled: 1-overlap with phi1", special, 1e-10),
        ),
        witness,
        {"trials": n_trials, "skipped": skipped, "d": d},
    )


def reduced_after_local(op: np.ndarray, psi: np.ndarray, phi: np.ndarray, d: int) -> np.ndarray:
    """Bob's reduced state after ``op`` acts on (ancilla ⊗ Alice) of ``ψ ⊗ Φ``.

    The state is renormalized, so ``op`` need not be unitary.
    """
    spaces = ("N", "A", "B")
    nodes = [
        ket(psi, "N", (d,)),
        ket(phi, spaces[1:], (d, d)),
        operator(op, spaces[:2], (d, d)),
    ]
    chi = contract(nodes, [((0, 0), (2, 2)), ((1, 0), (2, 3))], [(2, 0), (2, 1), (1, 1)])
    rho = contract([chi, adjoint(chi)], [((0, 0), (1, 0)), ((0, 1), (1, 1))], [(0, 2), (1, 2)])
    mat = rho.data
    return mat / np.trace(mat)


def check_no_signaling(seed: int = 0, dims: Sequence[int] = (2, 3), n_trials: int = 100) -> ProtocolReport:
    worst, controls_small, along = 0.0, 0, 0.0
    witness = None
    total = 0
    for d in dims:
        for trial in range(n_trials):
            rng = trial_rng(seed, trial * 1000 + d)
            phi = random_state(d * d, rng)
            psi = random_state(d, rng)
            before = phi.reshape(d, d).T @ phi.reshape(d, d).conj()
            u = haar_unitary(d * d, rng)
            diff = float(np.linalg.norm(reduced_after_local(u, psi, phi, d) - before))
            if diff > worst:
                worst, witness = diff, {"d": d, "trial": trial}
            v = haar_unitary(d, rng)
            ride = np.kron(np.eye(d), v)
            along = max(along, float(np.linalg.norm(reduced_after_local(ride, psi, phi, d) - before)))
            a = rng.standard_normal((d * d, d * d)) + 1j * rng.standard_normal((d * d, d * d))
            control = float(np.linalg.norm(reduced_after_local(a, psi, phi, d) - before))
            controls_small += control <= 1e-6
            total += 1
    return ProtocolReport(
        "nosignal",
        (
            Metric("max |rho_B after - rho_B before| (unitary)", worst, 1e-10),
            Metric("ancilla along for the ride", along, 1e-12),
            Metric("fraction of non-unitary controls within 1e-6", controls_small / total, 0.05),
        ),
        witness,
        {"trials": n_trials, "dims": list(dims)},
    )


def zigzag(d: int) -> Morph:
    """Coevaluation joined to evaluation along the dual line; legs ``(IN, OUT)``."""
    coev = Morph((Leg(Q, d, Direction.OUT), Leg(Q, d, Direction.OUT, Essence.VIRTUAL)), np.eye(d))
    ev = Morph((Leg(Q, d, Direction.IN, Essence.VIRTUAL), Leg(Q, d, Direction.IN)), np.eye(d))
    return contract([coev, ev], [((0, 1), (1, 0))], [(1, 1), (0, 0)])


def check_zigzag(d: int = 2) -> ProtocolReport:
    if d < 1:
        raise ValueError("dimension must be positive")
    line = zigzag(d)
    expected = (Leg(Q, d, Direction.IN), Leg(Q, d, Direction.OUT))
    error = float(np.max(np.abs(line.data - np.eye(d)))) if line.legs == expected else np.inf
    coev_norm = abs(np.linalg.norm(np.eye(d)) - np.sqrt(d))
    return ProtocolReport(
        "zigzag",
        (Metric("max |zigzag - delta|", error, 0.0), Metric("|norm(coev) - sqrt d|", float(coev_norm), 1e-12)),
        info={"d": d},
    )
