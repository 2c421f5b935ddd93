"""Multi-qubit states, the collective lowering operator and the dissipator.

Conventions: qubits are labelled 1..n, qubit 1 is the leftmost tensor factor
and basis indices are big-endian bit strings (``|q1 q2 ... qn>``).  States are
plain complex numpy vectors, operators are dense complex matrices.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, DomainError

MAX_QUBITS = 12

SPECIAL_KINDS = ("G", "E_not_k", "k_plus_l", "E_not_kl", "B", "B_literal", "H")


def _check_n(n: int) -> None:
    if int(n) != n or n < 1:
        raise DomainError(f"number of qubits must be a positive integer, got {n!r}")
    if n > MAX_QUBITS:
        raise CapacityError(f"full-space operations are limited to n <= {MAX_QUBITS}, got n={n}")


def _check_indices(n: int, indices: Iterable[int]) -> tuple[int, ...]:
    idx = tuple(int(i) for i in indices)
    for i in idx:
        if not 1 <= i <= n:
            raise DomainError(f"qubit index {i} outside [1, {n}]")
    if len(set(idx)) != len(idx):
        raise DomainError(f"qubit indices must be distinct, got {idx}")
    return idx


def basis_index(n: int, excited: Iterable[int]) -> int:
    """Integer label of the product state with 1s at ``excited`` (1-based)."""
    return sum(1 << (n - i) for i in _check_indices(n, excited))


def basis_state(n: int, excited: Sequence[int] = ()) -> np.ndarray:
    """Computational basis state with the given qubits excited.

    ``basis_state(n)`` is the ground state |G>, ``basis_state(n, [k])`` is
    |k> and ``basis_state(n, [k, l])`` is |k,l>.
    """
    _check_n(n)
    psi = np.zeros(2**n, dtype=complex)
    psi[basis_index(n, excited)] = 1.0
    return psi


def _sum_of_kets(n: int, patterns: Iterable[Sequence[int]]) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    for pattern in patterns:
        psi[basis_index(n, pattern)] += 1.0
    return psi


def special_vector(kind: str, n: int, k: int = 1, l: int = 2) -> np.ndarray:
    """Unnormalized superposition vectors spanning the low-excitation sectors.

    kind
        ``"G"``         ground state |0...0>
        ``"E_not_k"``   sum of single excitations |i>, i != k
        ``"k_plus_l"``  |k> + |l>
        ``"E_not_kl"``  sum of single excitations |i>, i not in {k, l}
        ``"B"``         sum over i not in {k, l} of |i,k> + |i,l>
        ``"B_literal"`` sum_{i!=k} |i,k> + sum_{i!=l} |i,l>; identical to ``"B"``
                        plus 2|k,l> (the doubly counted pair)
        ``"H"``         sum of double excitations |h,i>, h > i, h,i not in {k,l}

    ``"B"`` is the vector for which the two-excitation closure relations
    and generator hold; ``"B_literal"`` is kept for comparison only.
    Vectors are returned exactly as summed, never normalized.  ``"H"`` is the
    zero vector for n < 4.
    """
    _check_n(n)
    if kind == "G":
        return basis_state(n)
    if kind == "E_not_k":
        _check_indices(n, [k])
        return _sum_of_kets(n, ([i] for i in range(1, n + 1) if i != k))
    if kind not in SPECIAL_KINDS:
        raise DomainError(f"unknown special vector kind {kind!r}")

    _check_indices(n, [k, l])
    rest = [i for i in range(1, n + 1) if i not in (k, l)]
    if kind == "k_plus_l":
        return basis_state(n, [k]) + basis_state(n, [l])
    if kind == "E_not_kl":
        return _sum_of_kets(n, ([i] for i in rest))
    if kind == "B":
        return _sum_of_kets(n, ([i, k] for i in rest)) + _sum_of_kets(n, ([i, l] for i in rest))
    if kind == "B_literal":
        return _sum_of_kets(n, ([i, k] for i in range(1, n + 1) if i != k)) + _sum_of_kets(
            n, ([i, l] for i in range(1, n + 1) if i != l)
        )
    # kind == "H"
    return _sum_of_kets(n, combinations(rest, 2))


def ket_bra(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """|a><b|."""
    return np.outer(a, b.conj())


def sym_ket_bra(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """|a><b| + |b><a|."""
    op = ket_bra(a, b)
    return op + op.conj().T


@lru_cache(maxsize=None)
def _lowering_sparse(n: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    dim = 2**n
    rows, cols = [], []
    for b in range(dim):
        for q in range(n):
            bit = 1 << (n - 1 - q)
            if b & bit:
                rows.append(b ^ bit)
                cols.append(b)
    sigma = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(dim, dim), dtype=complex)
    number = (sigma.conj().T @ sigma).tocsr()
    return sigma, number


def collective_lowering(n: int, sparse: bool = False):
    """Sum of single-qubit lowering operators |0><1|_i over all n qubits."""
    _check_n(n)
    sigma, _ = _lowering_sparse(n)
    return sigma.copy() if sparse else sigma.toarray()


def _qubits_of(rho: np.ndarray) -> int:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DomainError(f"operator must be square, got shape {rho.shape}")
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise DomainError(f"operator dimension {dim} is not a power of two")
    _check_n(n)
    return n


def apply_dissipator(rho: np.ndarray) -> np.ndarray:
    """Collective decay generator 2 s rho s^+ - s^+ s rho - rho s^+ s (unit rate)."""
    n = _qubits_of(rho)
    sigma, number = _lowering_sparse(n)
    rho = np.asarray(rho, dtype=complex)
    s_rho = sigma @ rho
    jump = (sigma @ s_rho.conj().T).conj().T
    n_rho = number @ rho
    rho_n = (number @ rho.conj().T).conj().T
    return 2.0 * jump - n_rho - rho_n


def excitation_number(rho: np.ndarray) -> float:
    """<s^+ s>, the collective excitation expectation."""
    n = _qubits_of(rho)
    _, number = _lowering_sparse(n)
    return float(np.real(np.sum(number.multiply(np.asarray(rho).T))))


def partial_trace_pair(rho: np.ndarray, i: int, j: int) -> np.ndarray:
    """Reduced 4x4 density matrix of qubits (i, j), qubit i in the left slot."""
    n = _qubits_of(rho)
    if i == j:
        raise DomainError("partial trace needs two distinct qubits")
    _check_indices(n, [i, j])
    keep = [i - 1, j - 1]
    rest = [q for q in range(n) if q not in keep]
    tensor = np.asarray(rho).reshape([2] * (2 * n))
    perm = keep + rest + [n + q for q in keep] + [n + q for q in rest]
    m = 2 ** (n - 2)
    tensor = tensor.transpose(perm).reshape(4, m, 4, m)
    return np.einsum("aibi->ab", tensor)


def project_onto_operators(ops: Sequence[np.ndarray], target: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares coefficients of ``target`` over ``ops`` and the max residual.

    Uses the Hilbert-Schmidt Gram matrix, so the operators need not be orthogonal.
    """
    A = np.array([np.asarray(op).ravel() for op in ops])
    gram = A.conj() @ A.T
    rhs = A.conj() @ np.asarray(target).ravel()
    coeffs = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    residual = float(np.max(np.abs(coeffs @ A - np.asarray(target).ravel())))
    return coeffs, residual


def closure_generator(ops: Sequence[np.ndarray]) -> tuple[np.ndarray, float]:
    """Matrix G with D(op_j) = sum_i G[i, j] op_i, plus the worst projection residual."""
    m = len(ops)
    G = np.zeros((m, m), dtype=complex)
    worst = 0.0
    for j, op in enumerate(ops):
        G[:, j], res = project_onto_operators(ops, apply_dissipator(op))
        worst = max(worst, res)
    return G, worst
