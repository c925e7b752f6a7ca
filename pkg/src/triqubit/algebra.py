"""Pauli algebra, tensor embeddings and superoperator plumbing for qubit registers.

Operators are plain complex numpy arrays. Density matrices are vectorized by
column stacking, vec(rho) = rho.reshape(-1, order="F"), under which

    vec(A rho B) = (B^T kron A) vec(rho).

Every superoperator built in this package follows that convention.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, NumericalConsistencyError

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SP = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |0><1|, raises <sigma_z>
SM = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |1><0|, lowers <sigma_z>
I2 = np.eye(2, dtype=complex)

_PAULI = {"x": SX, "y": SY, "z": SZ, "plus": SP, "minus": SM}


def pauli(axis: str) -> np.ndarray:
    """Single-qubit operator for axis in {x, y, z, plus, minus}."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise DomainError(f"unknown Pauli axis {axis!r}") from None


def num_qubits(op: np.ndarray) -> int:
    """Number of qubits of a square operator, validating the 2^n dimension."""
    d = op.shape[0]
    if op.ndim != 2 or op.shape[1] != d:
        raise DomainError(f"operator must be square, got shape {op.shape}")
    n = d.bit_length() - 1
    if d != 2**n:
        raise DomainError(f"dimension {d} is not a power of two")
    return n


def embed_pauli(n_sites: int, axis: str, site: int) -> np.ndarray:
    """Single-site operator embedded into an n_sites register.

    Sites are 1-based; site 1 is the leftmost (most significant) tensor factor.
    """
    if not 1 <= site <= n_sites:
        raise DomainError(f"site {site} outside 1..{n_sites}")
    op = pauli(axis)
    out = np.array([[1.0 + 0.0j]])
    for s in range(1, n_sites + 1):
        out = np.kron(out, op if s == site else I2)
    return out


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return rho.reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise DomainError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape((d, d), order="F")


def sandwich_superop(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> A rho B, i.e. (B^T kron A)."""
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DomainError("sandwich factors must be square and of equal dimension")
    return np.kron(b.T, a)


def lmul_superop(a: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> A rho."""
    return np.kron(np.eye(a.shape[0], dtype=complex), a)


def rmul_superop(b: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> rho B."""
    return np.kron(b.T, np.eye(b.shape[0], dtype=complex))


def dissipator_superop(x: np.ndarray) -> np.ndarray:
    """Lindblad dissipator D[X] = X . X^dag - (1/2){X^dag X, .} as a superoperator."""
    xdx = x.conj().T @ x
    return sandwich_superop(x, x.conj().T) - 0.5 * (lmul_superop(xdx) + rmul_superop(xdx))


def coherent_superop(H: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> -i[H, rho]."""
    return -1j * (lmul_superop(H) - rmul_superop(H))


# 80-bit extended precision; used to accumulate traces whose terms cancel
# almost completely (near-detailed-balance dissipator applications).
CLD = np.clongdouble


def trace_product(a: np.ndarray, b: np.ndarray) -> complex:
    """Tr(a @ b) without forming the product; honors the input dtypes."""
    return complex((a * b.T).sum())


def partial_trace(rho: np.ndarray, keep) -> np.ndarray:
    """Reduced operator on the 1-based sites in `keep`, in ascending site order."""
    n = num_qubits(rho)
    keep = tuple(sorted(set(int(s) for s in keep)))
    if not keep:
        raise DomainError("keep must name at least one site")
    if keep[0] < 1 or keep[-1] > n:
        raise DomainError(f"keep sites {keep} outside 1..{n}")
    t = rho.reshape((2,) * (2 * n))
    row = list(range(n))
    # traced-out sites share the row label in the column slot, kept sites get fresh ones
    col = [(n + i) if (i + 1) in keep else i for i in range(n)]
    out = [i for i in range(n) if (i + 1) in keep] + [n + i for i in range(n) if (i + 1) in keep]
    red = np.einsum(t, row + col, out)
    d = 2 ** len(keep)
    return red.reshape((d, d))


def partial_transpose(rho: np.ndarray, site: int) -> np.ndarray:
    """Transpose on one 1-based site only."""
    n = num_qubits(rho)
    if not 1 <= site <= n:
        raise DomainError(f"site {site} outside 1..{n}")
    t = rho.reshape((2,) * (2 * n)).copy()
    t = np.swapaxes(t, site - 1, n + site - 1)
    return t.reshape(rho.shape)


def expectation(rho: np.ndarray, obs: np.ndarray) -> float:
    """Real expectation value Tr(obs rho); raises if the imaginary residue is large."""
    val = complex(np.trace(obs @ rho))
    scale = float(np.linalg.norm(obs, "fro") * np.linalg.norm(rho, "fro"))
    if abs(val.imag) > 1e-10 * max(scale, 1e-300):
        raise NumericalConsistencyError(
            f"expectation has imaginary residue {val.imag:.3e} at scale {scale:.3e}"
        )
    return val.real


def herm(rho: np.ndarray) -> np.ndarray:
    """Hermitian part (rho + rho^dag)/2."""
    return 0.5 * (rho + rho.conj().T)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """(1/2)||a - b||_1 for Hermitian a, b (inputs are hermitized first)."""
    diff = herm(a) - herm(b)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
