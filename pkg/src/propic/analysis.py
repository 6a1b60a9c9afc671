"""Positivity, partial transpose, Choi operators and Kraus decompositions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

import numpy as np

from .morph import (
    Direction,
    Leg,
    Morph,
    MorphError,
    compose,
    from_matrix,
    opposite,
    permute,
    random_state,
    to_matrix,
)

__all__ = [
    "DEFAULT_TOL",
    "Positivity",
    "NotCompletelyPositive",
    "DensityMatrix",
    "SuperOp",
    "matrix_view",
    "is_positive",
    "partial_transpose",
    "choi",
    "superop_from_choi",
    "is_completely_positive",
    "kraus_from_choi",
    "cone_positive_sampled",
    "apply",
]

DEFAULT_TOL = 1e-9


class NotCompletelyPositive(ValueError):
    pass


@dataclass(frozen=True)
class Positivity:
    positive: bool
    min_eigenvalue: float
    hermitian: bool = True
    witness: int | None = None

    def __bool__(self) -> bool:
        return self.positive


def matrix_view(m: Morph | np.ndarray) -> np.ndarray:
    """Square matrix of an operator-shaped morph.

    The legs must split into halves ``(0..n-1)`` and ``(n..2n-1)`` where legs
    ``k`` and ``n+k`` have opposite directions and equal dimension.  The
    ``OUT`` leg of each pair indexes rows.  Plain arrays pass through.
    """
    if isinstance(m, np.ndarray):
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise MorphError(f"expected a square matrix, got shape {m.shape}")
        return m
    if m.rank % 2:
        raise MorphError(f"a morph with {m.rank} legs has no square matrix view")
    n = m.rank // 2
    rows, cols = [], []
    for k in range(n):
        a, b = m.legs[k], m.legs[n + k]
        if a.direction is b.direction or a.dim != b.dim:
            raise MorphError(f"legs {k} and {n + k} do not pair into an operator index")
        out, inn = (k, n + k) if a.direction is Direction.OUT else (n + k, k)
        rows.append(out)
        cols.append(inn)
    return to_matrix(m, rows, cols)


def _hermitian_part(mat: np.ndarray, tol: float) -> tuple[np.ndarray, bool]:
    herm = (mat + mat.conj().T) / 2
    return herm, bool(np.max(np.abs(mat - herm), initial=0.0) <= tol)


def is_positive(m: Morph | np.ndarray, tol: float = DEFAULT_TOL) -> Positivity:
    """Positive semidefinite within ``tol``: Hermitian and min eigenvalue ≥ −tol."""
    mat = matrix_view(m)
    herm, hermitian = _hermitian_part(mat, tol)
    lowest = float(np.linalg.eigvalsh(herm)[0]) if herm.size else 0.0
    return Positivity(hermitian and lowest >= -tol, lowest, hermitian)


def _space_labels(n: int, spaces) -> tuple[Hashable, ...]:
    if spaces is None:
        return ("H",) if n == 1 else tuple(f"H{k + 1}" for k in range(n))
    spaces = tuple(spaces)
    if len(spaces) != n:
        raise MorphError(f"{len(spaces)} space labels for {n} subsystems")
    return spaces


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A state on ``n`` subsystems; legs ``(OUT s1..sn, IN s1..sn)``."""

    morph: Morph
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        n = len(dims)
        legs = self.morph.legs
        if len(legs) != 2 * n:
            raise MorphError(f"density matrix on {n} subsystems needs {2 * n} legs")
        for k, d in enumerate(dims):
            out, inn = legs[k], legs[n + k]
            if (out.direction, inn.direction) != (Direction.OUT, Direction.IN) or out.dim != d or inn.dim != d:
                raise MorphError(f"subsystem {k} legs are not an (OUT, IN) pair of dimension {d}")

    @classmethod
    def from_matrix(
        cls, matrix, dims: Sequence[int] | None = None, spaces=None, check: bool = True, tol: float = 1e-10
    ) -> DensityMatrix:
        matrix = np.asarray(matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise MorphError("density matrix must be square")
        dims = (matrix.shape[0],) if dims is None else tuple(int(d) for d in dims)
        if math.prod(dims) != matrix.shape[0]:
            raise MorphError(f"dims {dims} do not match a {matrix.shape[0]}x{matrix.shape[0]} matrix")
        labels = _space_labels(len(dims), spaces)
        legs = [Leg(s, d, Direction.OUT) for s, d in zip(labels, dims)]
        legs += [Leg(s, d, Direction.IN) for s, d in zip(labels, dims)]
        n = len(dims)
        rho = cls(from_matrix(matrix, legs, range(n), range(n, 2 * n)), dims)
        if check:
            rho.validate(tol)
        return rho

    @classmethod
    def from_vector(cls, vector, dims: Sequence[int] | None = None, spaces=None) -> DensityMatrix:
        v = np.asarray(vector, dtype=np.complex128).ravel()
        v = v / np.linalg.norm(v)
        return cls.from_matrix(np.outer(v, v.conj()), dims, spaces)

    @property
    def matrix(self) -> np.ndarray:
        return matrix_view(self.morph)

    def validate(self, tol: float = 1e-10) -> None:
        mat = self.matrix
        if not np.allclose(mat, mat.conj().T, rtol=0, atol=tol):
            raise MorphError("density matrix is not Hermitian")
        if abs(np.trace(mat) - 1) > tol:
            raise MorphError(f"density matrix has trace {np.trace(mat).real:.6g}")
        lowest = np.linalg.eigvalsh((mat + mat.conj().T) / 2)[0]
        if lowest < -DEFAULT_TOL:
            raise MorphError(f"density matrix has negative eigenvalue {lowest:.3g}")


def partial_transpose(rho: DensityMatrix, subsystem: int) -> Morph:
    """Reverse both legs of one subsystem; the data array is unchanged.

    Through :func:`matrix_view` the result reads ``ρ^t[(n,j),(i,m)] = ρ[(i,j),(n,m)]``.
    """
    n = len(rho.dims)
    if not isinstance(subsystem, (int, np.integer)) or not 0 <= subsystem < n:
        raise MorphError(f"subsystem {subsystem!r} out of range for {n} subsystems")
    return opposite(rho.morph, subsystem, n + subsystem)


@dataclass(frozen=True, eq=False)
class SuperOp:
    """A linear map on operators with legs ``(IN a, OUT b, OUT c, IN d)``.

    ``a``/``b`` range over the output space and ``c``/``d`` over the input
    space.  For Kraus operators ``K`` the data is ``Σ K[b,d] conj(K[a,c])``.
    """

    morph: Morph

    def __post_init__(self):
        dirs = tuple(leg.direction for leg in self.morph.legs)
        if dirs != (Direction.IN, Direction.OUT, Direction.OUT, Direction.IN):
            raise MorphError("superoperator legs must be (IN, OUT, OUT, IN)")
        a, b, c, d = self.morph.legs
        if a.dim != b.dim or c.dim != d.dim:
            raise MorphError("superoperator leg dimensions are inconsistent")

    @property
    def d_in(self) -> int:
        return self.morph.legs[2].dim

    @property
    def d_out(self) -> int:
        return self.morph.legs[0].dim

    @property
    def dim(self) -> int:
        return self.d_in

    @staticmethod
    def _legs(d_out: int, d_in: int, space_out, space_in) -> tuple[Leg, ...]:
        return (
            Leg(space_out, d_out, Direction.IN),
            Leg(space_out, d_out, Direction.OUT),
            Leg(space_in, d_in, Direction.OUT),
            Leg(space_in, d_in, Direction.IN),
        )

    @classmethod
    def from_liouville(cls, lm, d_in: int | None = None, space_out="H", space_in="H") -> SuperOp:
        """From the matrix acting on row-major ``vec``: ``vec(L(A)) = lm @ vec(A)``."""
        lm = np.asarray(lm, dtype=np.complex128)
        d_in = d_in or math.isqrt(lm.shape[1])
        d_out = math.isqrt(lm.shape[0])
        if d_out * d_out != lm.shape[0] or d_in * d_in != lm.shape[1]:
            raise MorphError(f"Liouville matrix of shape {lm.shape} is not square-dimensional")
        data = lm.reshape(d_out, d_out, d_in, d_in)  # (b, a, d, c)
        return cls(Morph(cls._legs(d_out, d_in, space_out, space_in), np.transpose(data, (1, 0, 3, 2))))

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray], space_out="H", space_in="H") -> SuperOp:
        ks = [np.asarray(k, dtype=np.complex128) for k in kraus]
        lm = sum(np.kron(k, k.conj()) for k in ks)
        return cls.from_liouville(lm, ks[0].shape[1], space_out, space_in)

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], d_in: int, space_out="H", space_in="H") -> SuperOp:
        """Tabulate a linear map given as a function on matrices."""
        columns = []
        for i in range(d_in):
            for j in range(d_in):
                e = np.zeros((d_in, d_in), dtype=np.complex128)
                e[i, j] = 1
                columns.append(np.asarray(f(e), dtype=np.complex128).ravel())
        return cls.from_liouville(np.stack(columns, axis=1), d_in, space_out, space_in)

    @classmethod
    def identity(cls, d: int, space="H") -> SuperOp:
        return cls.from_liouville(np.eye(d * d), d, space, space)

    @classmethod
    def transpose(cls, d: int, space="H") -> SuperOp:
        return cls.from_function(lambda a: a.T, d, space, space)

    @property
    def liouville(self) -> np.ndarray:
        return to_matrix(self.morph, [1, 0], [3, 2])

    def __call__(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.complex128)
        return (self.liouville @ a.ravel()).reshape(self.d_out, self.d_out)

    def __add__(self, other: SuperOp) -> SuperOp:
        return SuperOp(self.morph + other.morph)

    def __mul__(self, z) -> SuperOp:
        return SuperOp(self.morph * z)

    __rmul__ = __mul__

    def then(self, other: SuperOp) -> SuperOp:
        """``other ∘ self``."""
        return SuperOp.from_liouville(other.liouville @ self.liouville, self.d_in)

    def tensor(self, other: SuperOp) -> SuperOp:
        """The map ``A⊗B ↦ self(A)⊗other(B)`` on the product space."""
        p, q = self.liouville, other.liouville
        po, pi_ = self.d_out, self.d_in
        qo, qi = other.d_out, other.d_in
        t = np.einsum("BADC,badc->BbAaDdCc", p.reshape(po, po, pi_, pi_), q.reshape(qo, qo, qi, qi))
        return SuperOp.from_liouville(t.reshape((po * qo) ** 2, (pi_ * qi) ** 2), pi_ * qi)


def apply(lam: SuperOp, a: Morph) -> Morph:
    """``Λ(A)`` for an operator morph with legs ``(OUT, IN)``."""
    if a.rank != 2 or (a.legs[0].direction, a.legs[1].direction) != (Direction.OUT, Direction.IN):
        raise MorphError("apply expects an operator morph with legs (OUT, IN)")
    return permute(compose(lam.morph, a, [(2, 1), (3, 0)]), [1, 0])


def choi(lam: SuperOp) -> Morph:
    """The Choi operator, legs ``(OUT b, OUT d*, IN a, IN c*)``.

    Reversing legs ``c`` and ``d`` turns the superoperator into an operator on
    ``H_out ⊗ H_in*``; its :func:`matrix_view` is ``Σ_ij Λ(E_ij) ⊗ E_ij``.
    """
    return permute(opposite(lam.morph, 2, 3), [1, 3, 0, 2])


def superop_from_choi(j: Morph) -> SuperOp:
    """Inverse of :func:`choi`."""
    return SuperOp(opposite(permute(j, [2, 0, 3, 1]), 2, 3))


def is_completely_positive(lam: SuperOp, tol: float = DEFAULT_TOL) -> Positivity:
    return is_positive(choi(lam), tol)


def kraus_from_choi(lam: SuperOp, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """Kraus operators from the Choi eigendecomposition.

    Operators are ordered by decreasing eigenvalue, and each is rotated so that
    its largest-magnitude entry is real and positive.
    """
    mat = matrix_view(choi(lam))
    herm, hermitian = _hermitian_part(mat, tol)
    values, vectors = np.linalg.eigh(herm)
    if not hermitian or values[0] < -tol:
        raise NotCompletelyPositive(f"Choi operator has minimum eigenvalue {values[0]:.3g}")
    kraus = []
    for k in np.argsort(-values, kind="stable"):
        if values[k] <= tol:
            continue
        op = np.sqrt(values[k]) * vectors[:, k].reshape(lam.d_out, lam.d_in)
        pivot = op.flat[np.argmax(np.abs(op))]
        kraus.append(op * (abs(pivot) / pivot))
    return kraus


def cone_positive_sampled(lam: SuperOp, n_samples: int, seed: int = 0, tol: float = DEFAULT_TOL) -> Positivity:
    """Sampled necessary test that ``Λ`` maps positive operators to positive ones.

    Applies ``Λ`` to ``n_samples`` random rank-one projectors.  A ``False``
    verdict is conclusive (``witness`` is the failing sample index); ``True``
    is only evidence.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng(seed)
    lowest = np.inf
    for k in range(n_samples):
        v = random_state(lam.d_in, rng)
        out = lam(np.outer(v, v.conj()))
        result = is_positive(out, tol)
        lowest = min(lowest, result.min_eigenvalue)
        if not result:
            return Positivity(False, lowest, result.hermitian, k)
    return Positivity(True, float(lowest))
