"""Dense complex linear algebra and qubit-register helpers.

Qubit 1 is the most significant bit of a basis index, so the ket
``|b1 b2 ... bn>`` sits at index ``sum(b_i * 2**(n - i))``. Every other module
in the package relies on this convention.

Operators are plain :class:`numpy.ndarray` objects. Functions that touch
qubit structure accept extra leading (batch) axes where noted.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = [
    "DomainError",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "dag",
    "kron",
    "ket",
    "projector",
    "n_qubits_of",
    "is_hermitian",
    "check_pure_state",
    "check_density_matrix",
    "partial_trace",
    "reduce_on_qubits",
    "embed_on_qubits",
    "hermitian_eig",
    "psd_sqrt",
    "rounding_floor",
    "haar_unitary",
    "haar_pure_state",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

EIG_CLAMP = 1e-10
EIG_DOMAIN = 1e-8


class DomainError(ValueError):
    """Input lies outside the mathematical domain of an operation."""


def dag(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("kron: entries must be finite")
    return np.kron(a, b)


def ket(bits: str | Sequence[int]) -> np.ndarray:
    """Computational basis state from a bit string, e.g. ``ket("01")``."""
    bits = [int(b) for b in bits]
    out = np.zeros(2 ** len(bits), dtype=complex)
    out[int("".join(map(str, bits)), 2) if bits else 0] = 1.0
    return out


def projector(psi: np.ndarray) -> np.ndarray:
    """``|psi><psi|`` for a vector, or a batch of vectors along axis 0."""
    psi = np.asarray(psi, dtype=complex)
    return psi[..., :, None] * np.conj(psi[..., None, :])


def n_qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def is_hermitian(h: np.ndarray, atol: float = 1e-10) -> bool:
    h = np.asarray(h)
    return h.ndim >= 2 and h.shape[-1] == h.shape[-2] and np.allclose(h, dag(h), rtol=0, atol=atol)


def check_pure_state(psi: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError("a pure state is a 1-d amplitude vector")
    n_qubits_of(psi.shape[0])
    if not np.all(np.isfinite(psi)):
        raise ValueError("state amplitudes must be finite")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"state norm is {norm!r}, expected 1")
    return psi


def check_density_matrix(rho: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return ``rho`` as complex."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    n_qubits_of(rho.shape[0])
    if not np.all(np.isfinite(rho)):
        raise ValueError("density matrix entries must be finite")
    if not is_hermitian(rho, atol):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > atol:
        raise ValueError("density matrix trace differs from 1")
    if np.linalg.eigvalsh(rho)[0] < -EIG_CLAMP:
        raise ValueError("density matrix has negative eigenvalues")
    return rho


def _check_positions(positions: Sequence[int], n: int) -> list[int]:
    pos = [int(p) for p in positions]
    if len(set(pos)) != len(pos):
        raise ValueError(f"duplicate qubit positions in {positions!r}")
    if any(p < 1 or p > n for p in pos):
        raise ValueError(f"qubit positions {positions!r} out of range 1..{n}")
    return pos


def reduce_on_qubits(op: np.ndarray, keep: Sequence[int], n: int | None = None) -> np.ndarray:
    """Trace out every qubit not listed in ``keep``.

    The kept qubits appear in the order given by ``keep`` (1-based), which makes
    this the adjoint of :func:`embed_on_qubits`::

        Tr(embed_on_qubits(u, keep, n) @ X) == Tr(u @ reduce_on_qubits(X, keep, n))

    Leading batch axes are carried through.
    """
    op = np.asarray(op)
    if n is None:
        n = n_qubits_of(op.shape[-1])
    keep = _check_positions(keep, n)
    batch = op.shape[:-2]
    nb = len(batch)
    t = op.reshape(batch + (2,) * (2 * n))
    rest = [q for q in range(1, n + 1) if q not in keep]
    # row axes of the qubits: nb + q - 1, column axes: nb + n + q - 1
    order = list(range(nb)) + [nb + q - 1 for q in keep] + [nb + q - 1 for q in rest]
    order += [nb + n + q - 1 for q in keep] + [nb + n + q - 1 for q in rest]
    k, r = 2 ** len(keep), 2 ** len(rest)
    t = np.transpose(t, order).reshape(batch + (k, r, k, r))
    return np.einsum("...iaja->...ij", t)


def partial_trace(rho: np.ndarray, traced_qubits: Sequence[int]) -> np.ndarray:
    """Trace out the 1-based ``traced_qubits`` of an ``n``-qubit operator.

    Remaining qubits keep their relative order. Batched inputs are accepted.
    """
    rho = np.asarray(rho)
    n = n_qubits_of(rho.shape[-1])
    traced = _check_positions(traced_qubits, n)
    keep = [q for q in range(1, n + 1) if q not in traced]
    return reduce_on_qubits(rho, keep, n)


def embed_on_qubits(u: np.ndarray, positions: Sequence[int], n_total: int) -> np.ndarray:
    """Lift a ``k``-qubit operator onto ``positions`` of an ``n_total`` register.

    ``positions`` is ordered: the i-th qubit of ``u`` acts on register qubit
    ``positions[i]``. Identity elsewhere. Leading batch axes of ``u`` are kept.
    """
    u = np.asarray(u, dtype=complex)
    k = len(positions)
    if u.shape[-1] != 2**k or u.shape[-2] != 2**k:
        raise ValueError(f"operator of shape {u.shape[-2:]} does not act on {k} qubits")
    pos = _check_positions(positions, n_total)
    rest = [q for q in range(1, n_total + 1) if q not in pos]
    batch = u.shape[:-2]
    nb = len(batch)
    full = np.kron(u, np.eye(2 ** len(rest))) if not nb else np.einsum(
        "...ij,ab->...iajb", u, np.eye(2 ** len(rest))
    ).reshape(batch + (2**n_total, 2**n_total))
    # full currently acts on qubits in the order pos + rest
    t = full.reshape(batch + (2,) * (2 * n_total))
    current = pos + rest
    inv = [current.index(q) for q in range(1, n_total + 1)]
    order = list(range(nb)) + [nb + i for i in inv] + [nb + n_total + i for i in inv]
    return np.transpose(t, order).reshape(batch + (2**n_total, 2**n_total))


def hermitian_eig(h: np.ndarray, atol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns)."""
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, atol):
        raise ValueError("hermitian_eig: matrix is not Hermitian")
    return np.linalg.eigh(0.5 * (h + dag(h)))


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-1e-10, 0)`` are treated as zero; anything below
    ``-1e-8`` raises :class:`DomainError`. Positive eigenvalues under the
    rounding floor ``d * eps * max|w|`` are zeroed too, since their square
    roots would be pure noise of order ``1e-8``.
    """
    w, v = hermitian_eig(m)
    if w[0] < -EIG_DOMAIN:
        raise DomainError(f"matrix is not positive semidefinite (eigenvalue {w[0]:.3e})")
    w = np.where(w < rounding_floor(w), 0.0, w)
    return (v * np.sqrt(w)) @ dag(v)


def rounding_floor(w: np.ndarray) -> float:
    """Smallest eigenvalue magnitude distinguishable from zero for spectrum ``w``."""
    w = np.asarray(w)
    return float(w.shape[-1] * np.finfo(float).eps * max(np.max(np.abs(w), initial=0.0), 1.0))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``d x d`` unitary: QR of a complex Ginibre matrix with the
    phases of ``diag(R)`` moved into ``Q``."""
    if d < 2:
        raise ValueError("haar_unitary needs d >= 2")
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def haar_pure_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random pure state on ``n_qubits`` qubits."""
    if n_qubits < 1:
        raise ValueError("haar_pure_state needs n_qubits >= 1")
    d = 2**n_qubits
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)
