"""Standard qubit matrices and Bell vectors.

Bell convention: ``bell(x, y) = (I ⊗ sigma(x, y)) bell(0, 0)`` with
``sigma(0,0)=I``, ``sigma(0,1)=X``, ``sigma(1,0)=Z``, ``sigma(1,1)=Z X``.
All four ``sigma(x, y)`` are real.
"""

import numpy as np

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)

PAULIS = {"i": I2, "x": X, "y": Y, "z": Z}

BELL_LABELS = ((0, 0), (0, 1), (1, 0), (1, 1))


def sigma(x: int, y: int) -> np.ndarray:
    if x not in (0, 1) or y not in (0, 1):
        raise ValueError(f"Pauli label must be bits, got ({x}, {y})")
    return np.linalg.matrix_power(Z, x) @ np.linalg.matrix_power(X, y)


def bell(x: int, y: int) -> np.ndarray:
    """Normalized Bell vector on two qubits, row-major over (first, second)."""
    phi = np.array([1, 0, 0, 1], dtype=np.complex128) / np.sqrt(2)
    return np.kron(I2, sigma(x, y)) @ phi


def controlled(v: np.ndarray, control: int = 0) -> np.ndarray:
    """Controlled-``v`` on two subsystems of equal dimension; ``control`` is 0 or 1."""
    v = np.asarray(v, dtype=np.complex128)
    d = v.shape[0]
    p1 = np.zeros((d, d), dtype=np.complex128)
    p1[1, 1] = 1
    p0 = np.eye(d) - p1
    if control == 0:
        return np.kron(p0, np.eye(d)) + np.kron(p1, v)
    return np.kron(np.eye(d), p0) + np.kron(v, p1)


def named_state(name: str) -> np.ndarray:
    """Density matrix for ``zero``, ``one``, ``plus``, ``minus``, ``mixed``."""
    vectors = {
        "zero": np.array([1, 0]),
        "one": np.array([0, 1]),
        "plus": np.array([1, 1]) / np.sqrt(2),
        "minus": np.array([1, -1]) / np.sqrt(2),
        "plus_i": np.array([1, 1j]) / np.sqrt(2),
    }
    if name == "mixed":
        return np.eye(2, dtype=np.complex128) / 2
    if name not in vectors:
        raise ValueError(f"unknown state {name!r}")
    v = vectors[name].astype(np.complex128)
    return np.outer(v, v.conj())


def named_unitary(name: str) -> np.ndarray:
    table = {
        "identity": np.eye(4, dtype=np.complex128),
        "cnot": CNOT,
        "swap": SWAP,
        "cz": controlled(Z),
        "control-x": controlled(X, control=1),
        "control-z": controlled(Z, control=1),
        "control-h": controlled(H, control=1),
    }
    if name not in table:
        raise ValueError(f"unknown two-qubit unitary {name!r}")
    return table[name]
