"""Fidelities, purity, concurrence and uncertainty relations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    PAULI_Y,
    DomainError,
    dag,
    hermitian_eig,
    is_hermitian,
    psd_sqrt,
    rounding_floor,
)

__all__ = [
    "UncertaintyRecord",
    "fidelity_general",
    "fidelity_qubit",
    "fidelity_pure_mixed",
    "purity",
    "concurrence_pure",
    "concurrence_mixed",
    "observable_basis",
    "measurement_entropy",
    "entropic_bound",
    "robertson_record",
    "robertson_arrays",
]

CLAMP = 1e-12
_YY = np.kron(PAULI_Y, PAULI_Y)


def _clamp(value: float, what: str) -> float:
    if value < -CLAMP:
        raise DomainError(f"{what} is negative ({value:.3e})")
    return max(value, 0.0)


def _same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")


@dataclass(frozen=True)
class UncertaintyRecord:
    """One evaluation of ``dA * dB >= |<[A, B]>| / 2``.

    ``weight`` is the probability attached to the state the record was
    evaluated on (1 for a single pure state).
    """

    delta_a: float
    delta_b: float
    lower_bound: float
    product: float
    slack: float
    weight: float = 1.0


def fidelity_general(rho: np.ndarray, sigma: np.ndarray) -> float:
    """``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    _same_dim(rho, sigma)
    s = psd_sqrt(rho)
    inner = s @ sigma @ s
    w = np.linalg.eigvalsh(0.5 * (inner + dag(inner)))
    w = np.where(w < rounding_floor(w), 0.0, w)
    f = float(np.sum(np.sqrt(w)) ** 2)
    return min(f, 1.0)


def fidelity_qubit(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Qubit shortcut ``Tr(rho sigma) + 2 sqrt(det rho det sigma)``."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != (2, 2) or sigma.shape != (2, 2):
        raise ValueError("fidelity_qubit needs two 2x2 density matrices")
    det_r = _clamp(np.linalg.det(rho).real, "det(rho)")
    det_s = _clamp(np.linalg.det(sigma).real, "det(sigma)")
    f = np.trace(rho @ sigma).real + 2 * np.sqrt(det_r * det_s)
    return float(min(max(f, 0.0), 1.0))


def fidelity_pure_mixed(phi: np.ndarray, rho: np.ndarray) -> float:
    """``<phi|rho|phi>`` for a pure target."""
    phi = np.asarray(phi, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    _same_dim(phi, rho)
    return float(np.vdot(phi, rho @ phi).real)


def purity(rho: np.ndarray) -> float:
    """Two-qubit purity rescaled to ``[0, 1]``: ``(4/3)(Tr rho^2 - 1/4)``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("purity is defined here for 2-qubit (4x4) states")
    tr2 = np.einsum("ij,ji->", rho, rho).real
    return float(4.0 / 3.0 * (tr2 - 0.25))


def concurrence_pure(psi: np.ndarray) -> float:
    """``|<psi| sigma_y (x) sigma_y |psi*>|`` (conjugate in the computational basis)."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (4,):
        raise ValueError("concurrence_pure needs a 2-qubit state vector")
    return float(abs(np.vdot(psi, _YY @ np.conj(psi))))


def concurrence_mixed(rho: np.ndarray) -> float:
    """Wootters concurrence from the spectrum of
    ``sqrt(sqrt(rho) (YY) rho* (YY) sqrt(rho))``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("concurrence_mixed needs a 4x4 density matrix")
    s = psd_sqrt(rho)
    r = psd_sqrt(s @ _YY @ np.conj(rho) @ _YY @ s)
    lam = np.sort(np.linalg.eigvalsh(0.5 * (r + dag(r))))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def observable_basis(a: np.ndarray) -> np.ndarray:
    """Orthonormal eigenbasis (columns) of a Hermitian observable."""
    return hermitian_eig(a)[1]


def _check_basis(basis: np.ndarray) -> np.ndarray:
    basis = np.asarray(basis, dtype=complex)
    d = basis.shape[0]
    if basis.shape != (d, d) or not np.allclose(dag(basis) @ basis, np.eye(d), atol=1e-10):
        raise ValueError("basis columns must be orthonormal")
    return basis


def measurement_entropy(psi: np.ndarray, basis: np.ndarray) -> float:
    """Shannon entropy (log base ``d``) of measuring ``psi`` in ``basis``."""
    psi = np.asarray(psi, dtype=complex)
    basis = _check_basis(basis)
    _same_dim(psi, basis)
    d = basis.shape[0]
    p = np.abs(dag(basis) @ psi) ** 2
    p = p[p > 0]
    return float(max(-np.sum(p * np.log(p)) / np.log(d), 0.0))


def entropic_bound(basis_a: np.ndarray, basis_b: np.ndarray) -> float:
    """``-log_d max_ij |<a_i|b_j>|^2``."""
    basis_a = _check_basis(basis_a)
    basis_b = _check_basis(basis_b)
    _same_dim(basis_a, basis_b)
    d = basis_a.shape[0]
    c = np.max(np.abs(dag(basis_a) @ basis_b) ** 2)
    return float(max(-np.log(min(c, 1.0)) / np.log(d), 0.0))


def robertson_arrays(psi: np.ndarray, a: np.ndarray, b: np.ndarray):
    """Vectorized Robertson quantities.

    ``psi`` has shape (d, K) (K states as columns), ``a`` shape (..., d, d) and
    ``b`` shape (d, d). Returns ``(delta_a, delta_b, lower_bound)`` with
    ``delta_a`` and ``lower_bound`` of shape (..., K) and ``delta_b`` of shape (K,).
    """
    a_psi = a @ psi
    b_psi = b @ psi
    ea = np.einsum("ik,...ik->...k", np.conj(psi), a_psi).real
    ea2 = np.einsum("...ik,...ik->...k", np.conj(a_psi), a_psi).real
    eb = np.einsum("ik,ik->k", np.conj(psi), b_psi).real
    eb2 = np.einsum("ik,ik->k", np.conj(b_psi), b_psi).real
    # <[A,B]> = <Apsi|Bpsi> - <Bpsi|Apsi> = 2i Im<Apsi|Bpsi>
    comm = np.einsum("...ik,ik->...k", np.conj(a_psi), b_psi).imag
    var_a = ea2 - ea**2
    var_b = eb2 - eb**2
    if np.min(var_a, initial=0.0) < -CLAMP or np.min(var_b, initial=0.0) < -CLAMP:
        raise DomainError("negative variance")
    return np.sqrt(np.clip(var_a, 0, None)), np.sqrt(np.clip(var_b, 0, None)), np.abs(comm)


def robertson_record(psi: np.ndarray, a: np.ndarray, b: np.ndarray) -> UncertaintyRecord:
    psi = np.asarray(psi, dtype=complex)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if not (is_hermitian(a) and is_hermitian(b)):
        raise ValueError("robertson_record needs Hermitian observables")
    _same_dim(psi, a)
    _same_dim(psi, b)
    da, db, lb = robertson_arrays(psi[:, None], a, b)
    da, db, lb = float(da[0]), float(db[0]), float(lb[0])
    return UncertaintyRecord(da, db, lb, da * db, da * db - lb)
