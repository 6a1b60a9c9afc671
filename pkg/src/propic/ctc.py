"""Closed-timelike-curve fixed points and the time-machine channel zoo.

The chronology-respecting system is subsystem 0 of the direct evolution and
the time-travelling system is subsystem 1.  ``loop_port`` names the output
subsystem that is fed back into the past.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .analysis import SuperOp, is_completely_positive
from .gates import sigma
from .morph import MorphError, random_state
from .thick import Channel

__all__ = [
    "CtcError",
    "CtcProblem",
    "FixedPoint",
    "ThickSolution",
    "IdempotentKind",
    "Classification",
    "UniversalityEntry",
    "UniversalityReport",
    "reduce",
    "liouville_of",
    "ergodic_fixed_point",
    "deutsch_fixed_point",
    "deutsch_out",
    "thick_ctc_solve",
    "is_point_collapse",
    "post_selected_kraus",
    "power_limit_classify",
    "informationally_complete_states",
    "is_universal_evidence",
]


class CtcError(RuntimeError):
    pass


def reduce(joint: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Reduced state of subsystem ``keep`` (0 or 1) of a bipartite operator."""
    t = np.asarray(joint).reshape(dims[0], dims[1], dims[0], dims[1])
    if keep == 0:
        return np.einsum("ikjk->ij", t)
    return np.einsum("kikj->ij", t)


def liouville_of(f: Callable[[np.ndarray], np.ndarray], d: int) -> np.ndarray:
    return SuperOp.from_function(f, d).liouville


def _null_space(m: np.ndarray, rel_tol: float = 1e-9) -> np.ndarray:
    _, s, vh = np.linalg.svd(m)
    cut = rel_tol * max(1.0, s[0] if s.size else 0.0)
    rank = int(np.sum(s > cut))
    return vh[rank:].conj().T


@dataclass(frozen=True, eq=False)
class FixedPoint:
    rho: np.ndarray
    multiplicity: int
    residual: float


def ergodic_fixed_point(lm: np.ndarray, tol: float = 1e-10) -> FixedPoint:
    """Cesàro limit of ``F^n(I/d)`` for a trace-preserving map with Liouville matrix ``lm``.

    The limit of the averaged powers is the spectral projector onto the
    eigenvalue-1 space, ``R (W†R)⁻¹ W†`` with ``R``/``W`` the right/left fixed
    vectors, so it is evaluated in closed form rather than by iteration.
    """
    n = lm.shape[0]
    d = int(round(np.sqrt(n)))
    shifted = lm - np.eye(n)
    right = _null_space(shifted)
    left = _null_space(shifted.conj().T)
    if right.shape[1] == 0 or right.shape[1] != left.shape[1]:
        raise CtcError("map has no well-conditioned fixed space; it is not trace-preserving")
    projector = right @ np.linalg.solve(left.conj().T @ right, left.conj().T)
    rho = (projector @ (np.eye(d).ravel() / d)).reshape(d, d)
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.trace(rho).real
    residual = float(np.linalg.norm((lm @ rho.ravel()).reshape(d, d) - rho))
    if residual > tol:
        raise CtcError(f"fixed point residual {residual:.3g} exceeds tolerance {tol:.3g}")
    return FixedPoint(rho, right.shape[1], residual)


def _check_unitary(u: np.ndarray, tol: float) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or not np.allclose(u.conj().T @ u, np.eye(len(u)), atol=tol, rtol=0):
        raise MorphError("expected a unitary matrix")
    return u


@dataclass(frozen=True, eq=False)
class CtcProblem:
    """Direct channel ``S`` on ``in ⊗ ctc``, time machine ``T`` on ``ctc``."""

    direct: Channel
    machine: Channel
    rho_in: np.ndarray
    loop_port: int = 0

    def __post_init__(self):
        rho_in = np.asarray(self.rho_in, dtype=np.complex128)
        object.__setattr__(self, "rho_in", rho_in)
        d_ctc = self.machine.d_in
        if self.machine.d_out != d_ctc:
            raise MorphError("time machine must map the CTC system to itself")
        if self.direct.d_in != self.direct.d_out or self.direct.d_in != rho_in.shape[0] * d_ctc:
            raise MorphError("direct channel does not act on in-system ⊗ CTC system")
        if self.loop_port not in (0, 1):
            raise MorphError("loop_port must be 0 or 1")
        if self.dims[self.loop_port] != d_ctc:
            raise MorphError("the looped output subsystem must match the CTC dimension")

    @property
    def dims(self) -> tuple[int, int]:
        return (self.rho_in.shape[0], self.machine.d_in)


@dataclass(frozen=True, eq=False)
class ThickSolution:
    rho_ctc: np.ndarray
    rho_ctc_prime: np.ndarray
    rho_out: np.ndarray
    multiplicity: int
    direct: bool


def is_point_collapse(t: Channel, tol: float = 1e-10) -> np.ndarray | None:
    """``ρ₀`` if ``T(X) = Tr(X) ρ₀`` for all ``X``, else None."""
    d = t.d_in
    rho0 = t(np.eye(d) / d)
    expected = np.outer(rho0.ravel(), np.eye(d).ravel())
    return rho0 if np.max(np.abs(t.liouville - expected)) <= tol else None


def thick_ctc_solve(p: CtcProblem, tol: float = 1e-10) -> ThickSolution:
    """Self-consistent CTC state for a thick circuit.

    ``ρ_ctc`` leaves the direct channel on the loop subsystem and
    ``ρ_ctc′ = T(ρ_ctc)`` enters it.  A point-collapse ``T`` needs no search.
    """
    dims = p.dims
    other = 1 - p.loop_port
    s = p.direct

    def joint(rho_prime: np.ndarray) -> np.ndarray:
        return s(np.kron(p.rho_in, rho_prime))

    rho0 = is_point_collapse(p.machine, tol)
    if rho0 is not None:
        out = joint(rho0)
        return ThickSolution(reduce(out, dims, p.loop_port), rho0, reduce(out, dims, other), 1, True)
    loop = liouville_of(lambda x: reduce(joint(p.machine(x)), dims, p.loop_port), dims[p.loop_port])
    fixed = ergodic_fixed_point(loop, tol)
    rho_prime = p.machine(fixed.rho)
    return ThickSolution(fixed.rho, rho_prime, reduce(joint(rho_prime), dims, other), fixed.multiplicity, False)


def deutsch_fixed_point(
    u, rho_in, loop_port: int = 0, tol: float = 1e-10, max_iter: int = 10_000
) -> FixedPoint:
    """Deutsch-consistent ``ρ_ctc = Tr_other(U (ρ_in ⊗ ρ_ctc) U†)``.

    Among the fixed points the one returned is the Cesàro limit started from
    the maximally mixed state; ``multiplicity`` is the dimension of the
    fixed space.  ``max_iter`` is accepted for interface symmetry with
    iterative solvers and unused by the closed-form projector.
    """
    u = _check_unitary(u, tol)
    rho_in = np.asarray(rho_in, dtype=np.complex128)
    d_ctc = u.shape[0] // rho_in.shape[0]
    problem = CtcProblem(Channel.unitary(u), Channel.identity(d_ctc), rho_in, loop_port)
    sol = thick_ctc_solve(problem, tol)
    residual = float(np.linalg.norm(reduce(problem.direct(np.kron(rho_in, sol.rho_ctc)), problem.dims, loop_port) - sol.rho_ctc))
    return FixedPoint(sol.rho_ctc, sol.multiplicity, residual)


def deutsch_out(u, rho_in, rho_ctc, loop_port: int = 0) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    rho_in = np.asarray(rho_in, dtype=np.complex128)
    rho_ctc = np.asarray(rho_ctc, dtype=np.complex128)
    dims = (rho_in.shape[0], rho_ctc.shape[0])
    if u.shape[0] != dims[0] * dims[1]:
        raise MorphError("unitary does not act on in-system ⊗ CTC system")
    joint = u @ np.kron(rho_in, rho_ctc) @ u.conj().T
    return reduce(joint, dims, 1 - loop_port)


def post_selected_kraus(u, x: int, y: int, tol: float = 1e-10) -> tuple[np.ndarray, Callable[[np.ndarray], float]]:
    """Kraus operator of the post-selected time-travel circuit for outcome ``(x, y)``.

    ``A_xy = ½ Tr₂((I ⊗ σ_xy) U)``; the second callable gives the outcome
    probability ``‖A_xy φ‖²``.
    """
    u = _check_unitary(u, tol)
    if u.shape != (4, 4):
        raise MorphError("post-selected circuit needs a two-qubit unitary")
    lifted = np.kron(np.eye(2), sigma(x, y)) @ u
    a = 0.5 * np.einsum("akbk->ab", lifted.reshape(2, 2, 2, 2))

    def probability(phi) -> float:
        phi = np.asarray(phi, dtype=np.complex128)
        return float(np.linalg.norm(a @ phi) ** 2)

    return a, probability


class IdempotentKind(enum.Enum):
    IDENTITY = "identity"
    POINT_COLLAPSE = "point-collapse"
    PROJECTIVE_MEASUREMENT = "projective-measurement"
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True, eq=False)
class Classification:
    kind: IdempotentKind
    limit: np.ndarray | None
    power: int
    idempotency_error: float
    rho0: np.ndarray | None = None
    projectors: tuple[np.ndarray, ...] = ()
    universal: bool = False


def _classify_limit(k: np.ndarray, d: int, tol: float) -> Classification:
    if np.max(np.abs(k - np.eye(d * d))) <= tol:
        return Classification(IdempotentKind.IDENTITY, k, 0, 0.0)
    rho0 = (k @ (np.eye(d).ravel() / d)).reshape(d, d)
    if np.max(np.abs(k - np.outer(rho0.ravel(), np.eye(d).ravel()))) <= tol:
        return Classification(IdempotentKind.POINT_COLLAPSE, k, 0, 0.0, rho0=rho0, universal=True)
    if d == 2:
        from .gates import PAULIS

        images = [(k @ PAULIS[name].ravel()).reshape(2, 2) for name in "xyz"]
        b = max(images, key=np.linalg.norm)
        b = (b + b.conj().T) / 2
        _, vectors = np.linalg.eigh(b)
        projectors = tuple(np.outer(v, v.conj()) for v in vectors.T)
        measured = sum(np.kron(p, p.conj()) for p in projectors)
        if np.max(np.abs(k - measured)) <= tol:
            return Classification(IdempotentKind.PROJECTIVE_MEASUREMENT, k, 0, 0.0, projectors=projectors)
    return Classification(IdempotentKind.UNCLASSIFIED, k, 0, 0.0)


def power_limit_classify(t: Channel, tol: float = 1e-9, max_power: int = 2**40) -> Classification:
    """Find the idempotent reached by averaged powers of a qubit channel and name it.

    ``A_n = (1/n) Σ_{k=1..n} T^k`` is doubled via ``A_2n = (A_n + T^n A_n)/2``
    until ``‖A² − A‖ ≤ tol``.  The limit is matched against the identity, a
    collapse to a point and a projective measurement.
    """
    if t.d_in != 2 or t.d_out != 2:
        raise MorphError("idempotent classification is implemented for qubit channels")
    lm = t.liouville
    power, avg, n = lm.copy(), lm.copy(), 1
    while True:
        error = float(np.max(np.abs(avg @ avg - avg)))
        if error <= tol:
            break
        if 2 * n > max_power:
            return Classification(IdempotentKind.UNCLASSIFIED, None, n, error)
        avg = (avg + power @ avg) / 2
        power = power @ power
        n *= 2
    found = _classify_limit(avg, 2, max(tol, 1e-9) * 10)
    return Classification(found.kind, avg, n, error, found.rho0, found.projectors, found.universal)


def informationally_complete_states(d: int) -> list[np.ndarray]:
    """``d²`` pure states whose projectors span all ``d×d`` matrices."""
    basis = np.eye(d, dtype=np.complex128)
    vectors = list(basis)
    for i in range(d):
        for j in range(i + 1, d):
            vectors.append((basis[i] + basis[j]) / np.sqrt(2))
            vectors.append((basis[i] + 1j * basis[j]) / np.sqrt(2))
    return [np.outer(v, v.conj()) for v in vectors]


@dataclass(frozen=True, eq=False)
class UniversalityEntry:
    index: int
    fixed_point_ok: bool
    linear_error: float
    linear_ok: bool
    cp_min_eigenvalue: float
    cp_ok: bool

    @property
    def passed(self) -> bool:
        return self.fixed_point_ok and self.linear_ok and self.cp_ok


@dataclass(frozen=True, eq=False)
class UniversalityReport:
    entries: tuple[UniversalityEntry, ...]
    point_collapse: bool
    sufficient: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "sufficient", self.point_collapse)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)


def is_universal_evidence(
    t: Channel,
    suite: Sequence[Channel],
    loop_port: int = 0,
    tol: float = 1e-10,
    n_checks: int = 8,
    seed: int = 0,
) -> UniversalityReport:
    """Evidence that ``T`` behaves as a universal time machine for each ``S``.

    For every direct channel the solver must return a unique or directly
    computed fixed point, ``ρ_in ↦ ρ_out`` must agree with the linear map fitted
    on an informationally complete set of inputs (checked on random mixtures and
    random pure states) and that map must be completely positive.
    """
    if not suite:
        raise ValueError("the suite of direct channels is empty")
    d_ctc = t.d_in
    rng = np.random.default_rng(seed)
    entries = []
    for index, s in enumerate(suite):
        d_in = s.d_in // d_ctc
        basis = informationally_complete_states(d_in)
        fixed_ok = True

        def out(rho):
            nonlocal fixed_ok
            try:
                sol = thick_ctc_solve(CtcProblem(s, t, rho, loop_port), tol)
            except CtcError:
                fixed_ok = False
                return np.full((d_in, d_in), np.nan)
            fixed_ok &= sol.direct or sol.multiplicity == 1
            return sol.rho_out

        outputs = np.stack([out(rho).ravel() for rho in basis], axis=1)
        inputs = np.stack([rho.ravel() for rho in basis], axis=1)
        fitted = outputs @ np.linalg.inv(inputs)
        probes = []
        for _ in range(n_checks):
            weights = rng.dirichlet(np.ones(len(basis)))
            probes.append(sum(w * rho for w, rho in zip(weights, basis)))
            v = random_state(d_in, rng)
            probes.append(np.outer(v, v.conj()))
        error = max(float(np.linalg.norm(out(rho) - (fitted @ rho.ravel()).reshape(d_in, d_in))) for rho in probes)
        if not np.isfinite(error):
            error = float("inf")
        if np.all(np.isfinite(fitted)):
            cp = is_completely_positive(SuperOp.from_liouville(fitted, d_in), 1e-9)
            cp_ok, lowest = cp.positive, cp.min_eigenvalue
        else:
            cp_ok, lowest = False, float("nan")
        entries.append(UniversalityEntry(index, fixed_ok, error, error <= tol, lowest, cp_ok))
    return UniversalityReport(tuple(entries), is_point_collapse(t) is not None)
