"""Wootters concurrence of two-qubit density matrices."""

from __future__ import annotations

import numpy as np

from .errors import DomainError

_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))

# Basis order of every 4x4 matrix: |00>, |01>, |10>, |11>.


def check_two_qubit_density(rho: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DomainError(f"two-qubit density matrix must be 4x4, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise DomainError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise DomainError(f"density matrix trace {np.trace(rho).real:.3e} != 1")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise DomainError("density matrix has negative eigenvalues")
    return rho


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def concurrence(rho: np.ndarray, check: bool = True) -> float:
    """Wootters concurrence max(0, l1 - l2 - l3 - l4).

    The l_i are the decreasing square roots of the spectrum of rho * rho_tilde
    with rho_tilde = (Y x Y) rho^* (Y x Y).  They are taken as the singular
    values of sqrt(rho) (Y x Y) sqrt(rho)^*, whose Gram matrix is the Hermitian
    sqrt(rho) rho_tilde sqrt(rho), so only Hermitian decompositions are used.
    Concurrence is a square root of populations near separability, so inputs
    should be assembled exactly (see ``x_block_matrix(p11=...)``).
    """
    rho = check_two_qubit_density(rho) if check else np.asarray(rho, dtype=complex)
    root = _psd_sqrt(0.5 * (rho + rho.conj().T))
    lam = np.linalg.svd(root @ _YY @ root.conj(), compute_uv=False)
    c = lam[0] - lam[1] - lam[2] - lam[3]
    return float(min(1.0, max(0.0, c)))


def x_block_matrix(p00: float, p01: float, p10: float, z: float, p11: float | None = None) -> np.ndarray:
    """Populations on the diagonal plus one real |01><10| coherence z.

    ``p11`` defaults to 1 - p00 - p01 - p10; pass it when it is known exactly
    (e.g. 0), since the subtraction leaves roundoff of order 1e-17.
    """
    if p11 is None:
        p11 = 1.0 - p00 - p01 - p10
    rho = np.diag([p00, p01, p10, p11]).astype(complex)
    rho[1, 2] = rho[2, 1] = z
    return rho


def concurrence_x_block(p00: float, p01: float, p10: float, z: float, p11: float | None = None) -> float:
    """Closed-form concurrence 2 max(0, |z| - sqrt(p00 p11)) for the block form above."""
    if p11 is None:
        p11 = 1.0 - p00 - p01 - p10
    pops = (p00, p01, p10, p11)
    if min(pops) < -1e-12:
        raise DomainError(f"negative population in {pops}")
    p00, p11 = max(p00, 0.0), max(p11, 0.0)
    return float(min(1.0, 2.0 * max(0.0, abs(z) - np.sqrt(p00 * p11))))
