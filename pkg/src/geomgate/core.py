"""Small dense unitary algebra for one and two spin qubits.

Everything here works on plain ``numpy`` complex arrays of shape (2, 2) or
(4, 4). Arrays returned by these helpers are fresh and never mutated later,
so they can be shared between workers freely.
"""

from __future__ import annotations

import math

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
IDENTITY_4 = np.eye(4, dtype=complex)

# two-qubit basis order is |00>, |01>, |10>, |11>
ODD_SUBSPACE = (1, 2)

ISWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex
)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def su2_exp(ax: float, ay: float, az: float) -> np.ndarray:
    """Return ``exp(-i (ax X + ay Y + az Z))`` in closed form.

    Uses ``cos(r) I - i sin(r) (a . sigma) / r`` with ``r = |a|``.
    """
    if not (math.isfinite(ax) and math.isfinite(ay) and math.isfinite(az)):
        raise ValueError(f"su2_exp needs finite coefficients, got {(ax, ay, az)}")
    r = math.sqrt(ax * ax + ay * ay + az * az)
    if r == 0.0:
        return IDENTITY_2.copy()
    c = math.cos(r)
    s = math.sin(r) / r
    return np.array(
        [
            [c - 1j * s * az, -1j * s * ax - s * ay],
            [-1j * s * ax + s * ay, c + 1j * s * az],
        ],
        dtype=complex,
    )


def rotation(axis, angle: float) -> np.ndarray:
    """Rotation by ``angle`` about the (unnormalised) Bloch ``axis``.

    ``R(n, a) = exp(-i a/2 n.sigma)``, the usual axis-angle convention.
    """
    n = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0.0:
        raise ValueError("rotation axis must be non-zero")
    n = n / norm
    half = 0.5 * angle
    return su2_exp(half * n[0], half * n[1], half * n[2])


def gate_fidelity(ideal: np.ndarray, actual: np.ndarray) -> float:
    """``|Tr(ideal^dagger actual)| / dim``; insensitive to global phase."""
    ideal = np.asarray(ideal)
    actual = np.asarray(actual)
    if ideal.shape != actual.shape or ideal.ndim != 2 or ideal.shape[0] != ideal.shape[1]:
        raise ValueError(
            f"gate_fidelity needs equal square matrices, got {ideal.shape} and {actual.shape}"
        )
    dim = ideal.shape[0]
    # vdot conjugates its first argument: sum(conj(ideal) * actual) = Tr(ideal^dagger actual)
    return min(1.0, abs(np.vdot(ideal, actual)) / dim)


def embed_odd_subspace(u: np.ndarray) -> np.ndarray:
    """Lift a 2x2 block onto span{|01>, |10>}, identity on |00> and |11>."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 block, got shape {u.shape}")
    out = IDENTITY_4.copy()
    i, j = ODD_SUBSPACE
    out[i, i], out[i, j] = u[0, 0], u[0, 1]
    out[j, i], out[j, j] = u[1, 0], u[1, 1]
    return out


def on_qubit(u: np.ndarray, qubit: int) -> np.ndarray:
    """Tensor a single-qubit gate with identity; qubit 0 is the left factor."""
    if qubit == 0:
        return np.kron(u, IDENTITY_2)
    if qubit == 1:
        return np.kron(IDENTITY_2, u)
    raise ValueError(f"qubit index must be 0 or 1, got {qubit}")


def unitarity_error(u: np.ndarray) -> float:
    """Max entrywise deviation of ``U^dagger U`` from the identity."""
    u = np.asarray(u)
    return float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())


def is_unitary(u: np.ndarray, atol: float = 1e-12) -> bool:
    return unitarity_error(u) <= atol and abs(abs(np.linalg.det(u)) - 1.0) <= atol


def is_hermitian(h: np.ndarray, atol: float = 1e-12) -> bool:
    h = np.asarray(h)
    return bool(np.abs(h - h.conj().T).max() <= atol)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    return gate_fidelity(a, b) > 1.0 - atol


def rotation_axis(u: np.ndarray) -> np.ndarray:
    """Unit rotation axis of a 2x2 unitary, determined up to sign.

    Raises ``ValueError`` when ``u`` is a multiple of the identity.
    """
    u = np.asarray(u, dtype=complex)
    # strip the global phase so that u lies in SU(2)
    u = u / np.sqrt(np.linalg.det(u))
    v = np.array(
        [
            np.trace(SIGMA_X @ u),
            np.trace(SIGMA_Y @ u),
            np.trace(SIGMA_Z @ u),
        ]
    ) / (2j)
    v = v.real
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        raise ValueError("rotation axis undefined for a multiple of identity")
    return v / norm
