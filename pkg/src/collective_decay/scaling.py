"""Subspace dimension counting, block structure of rho(t), stationary entanglement graphs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import subspace_e1, subspace_e2
from .entanglement import concurrence
from .errors import DomainError
from .hilbert import basis_state, ket_bra, partial_trace_pair, special_vector
from .oracle import EvolutionConfig, evolve_full, steady_state

EXCITED = "initially_excited"
GROUND = "initially_ground"
ROLE_COLOR = {EXCITED: "red", GROUND: "blue"}


def subspace_dimension(e: int) -> int:
    """Number of real parameters of rho(t) for e initial excitations: (1+e)(2+e)(3+e)/6.

    rho has e+1 diagonal blocks of sizes 1..e+1, each real symmetric.
    """
    if int(e) != e or e < 0:
        raise DomainError("e must be a non-negative integer")
    return (1 + e) * (2 + e) * (3 + e) // 6


def dimension_bound(e: int) -> int:
    """Loose bound (2^e)^2 on the operator subspace dimension."""
    if int(e) != e or e < 0:
        raise DomainError("e must be a non-negative integer")
    return 4**e


def enumerated_basis(e: int, n: int) -> list[np.ndarray]:
    """Explicit spanning operators for e in {0, 1, 2} (k = 1, l = 2)."""
    if e == 0:
        G = special_vector("G", n)
        return [ket_bra(G, G)]
    if e == 1:
        return subspace_e1.basis_operators(n)
    if e == 2:
        return [op.matrix for op in subspace_e2.build_basis(n)]
    raise DomainError("explicit bases exist only for e <= 2")


def operator_rank(ops: list[np.ndarray]) -> int:
    return int(np.linalg.matrix_rank(np.array([op.ravel() for op in ops])))


# vector bases and diagonal blocks of rho in them
_VECTOR_BASES = {
    1: (("G", "k", "E_not_k"), ((0,), (1, 2))),
    2: (("G", "E_not_kl", "k_plus_l", "kl", "B", "H"), ((0,), (1, 2), (3, 4, 5))),
}


def vector_basis(e: int, n: int) -> np.ndarray:
    """Columns are the vectors in which rho(t) is block diagonal."""
    names, _ = _VECTOR_BASES[e]
    cols = []
    for name in names:
        if name == "k":
            cols.append(basis_state(n, [1]))
        elif name == "kl":
            cols.append(basis_state(n, [1, 2]))
        else:
            cols.append(special_vector(name, n, 1, 2))
    return np.array(cols).T


@dataclass
class BlockReport:
    e: int
    n: int
    t: float
    coefficients: np.ndarray
    off_block_max: float
    residual: float
    gram_condition: float
    tolerance: float = 1e-10

    @property
    def ok(self) -> bool:
        return self.off_block_max < self.tolerance and self.residual < 1e-9


def verify_block_structure(e: int, n: int, t: float, rho: np.ndarray | None = None, tolerance: float = 1e-10) -> BlockReport:
    """Express rho(t) as V C V^+ over the vector basis and check C's zero pattern.

    ``rho`` defaults to the full-space RK4 evolution of the e-excitation
    initial state.  The basis is not assumed orthonormal: C = G^-1 V^+ rho V G^-1
    with the Gram matrix G = V^+ V.
    """
    if e not in _VECTOR_BASES:
        raise DomainError("block structure is verified for e in {1, 2}")
    if (e == 1 and n < 2) or (e == 2 and n < 4):
        raise DomainError(f"n={n} too small for e={e}")
    if rho is None:
        psi = basis_state(n, list(range(1, e + 1)))
        rho = evolve_full(ket_bra(psi, psi), EvolutionConfig(t_final=t), times=[t]).final
    V = vector_basis(e, n)
    gram = V.conj().T @ V
    ginv = np.linalg.inv(gram)
    C = ginv @ V.conj().T @ rho @ V @ ginv
    residual = float(np.max(np.abs(rho - V @ C @ V.conj().T)))
    mask = np.ones(C.shape, dtype=bool)
    for block in _VECTOR_BASES[e][1]:
        mask[np.ix_(block, block)] = False
    off = float(np.max(np.abs(C[mask]))) if mask.any() else 0.0
    return BlockReport(e, n, t, C, off, residual, float(np.linalg.cond(gram)), tolerance)


@dataclass
class CorrelationGraph:
    n: int
    e: int
    threshold: float
    roles: dict = field(default_factory=dict)
    edges: list = field(default_factory=list)  # (i, j, weight)
    source: str = "analytic"

    @property
    def excited(self) -> list[int]:
        return [q for q, r in self.roles.items() if r == EXCITED]

    def degree(self, q: int) -> int:
        return sum(q in (i, j) for i, j, _ in self.edges)

    def is_star(self) -> bool:
        """Every edge touches the single excited qubit, which reaches all others."""
        (centre,) = self.excited
        return len(self.edges) == self.n - 1 and all(centre in (i, j) for i, j, _ in self.edges)

    def is_complete_bipartite(self) -> bool:
        """Edges are exactly all excited-ground pairs."""
        want = {(i, j) for i, j in combinations(range(1, self.n + 1), 2) if self.roles[i] != self.roles[j]}
        return {(i, j) for i, j, _ in self.edges} == want

    def to_dot(self) -> str:
        lines = [f"graph stationary_entanglement_n{self.n}_e{self.e} {{"]
        for q, role in sorted(self.roles.items()):
            lines.append(f'  {q} [label="{q}", color={ROLE_COLOR[role]}, role="{role}"];')
        for i, j, w in self.edges:
            lines.append(f'  {i} -- {j} [label="{w:.6g}", weight={w!r}];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "e": self.e,
            "threshold": self.threshold,
            "source": self.source,
            "nodes": [{"id": q, "role": r} for q, r in sorted(self.roles.items())],
            "edges": [{"source": i, "target": j, "weight": w} for i, j, w in self.edges],
        }
        return json.dumps(doc, indent=2) + "\n"


def class_weights(e: int, n: int, oracle: bool = False) -> dict[str, float]:
    """Stationary concurrence per pair class, from closed forms or the steady-state oracle."""
    if e == 1:
        if oracle:
            psi = basis_state(n, [1])
            rho = steady_state(ket_bra(psi, psi))
            kj = concurrence(partial_trace_pair(rho, 1, 2))
            jm = concurrence(partial_trace_pair(rho, 2, 3)) if n >= 3 else 0.0
        else:
            kj, jm = subspace_e1.stationary_concurrences(n)
            jm = jm if n >= 3 else 0.0
        return {"excited_ground": kj, "ground_ground": jm}
    if e == 2:
        if oracle:
            psi = basis_state(n, [1, 2])
            rho = steady_state(ket_bra(psi, psi))
            kl = concurrence(partial_trace_pair(rho, 1, 2))
            kj = concurrence(partial_trace_pair(rho, 1, 3))
            jm = concurrence(partial_trace_pair(rho, 3, 4))
        else:
            kl = 0.0
            kj, jm = subspace_e2.stationary_concurrences(n)
        return {"excited_excited": kl, "excited_ground": kj, "ground_ground": jm}
    raise DomainError("correlation graphs are available for e in {1, 2}")


def auto_threshold(weights: dict[str, float]) -> float:
    """Geometric mean of the excited-ground and ground-ground values (half the former if the latter is 0)."""
    kj, jm = weights["excited_ground"], weights["ground_ground"]
    return float(np.sqrt(kj * jm)) if jm > 0 else kj / 2


def correlation_graph(e: int, n: int, threshold="auto", oracle: bool = False) -> CorrelationGraph:
    """Graph of qubit pairs whose stationary concurrence exceeds ``threshold``."""
    if e == 1 and n < 2 or e == 2 and n < 4:
        raise DomainError(f"n={n} too small for e={e}")
    weights = class_weights(e, n, oracle)
    if threshold == "auto":
        threshold = auto_threshold(weights)
    threshold = float(threshold)
    if not 0 < threshold < 1:
        raise DomainError("threshold must lie in (0, 1)")
    roles = {q: (EXCITED if q <= e else GROUND) for q in range(1, n + 1)}
    edges = []
    for i, j in combinations(range(1, n + 1), 2):
        kind = {2: "excited_excited", 1: "excited_ground", 0: "ground_ground"}[(i <= e) + (j <= e)]
        w = weights[kind]
        if w > threshold:
            edges.append((i, j, float(w)))
    return CorrelationGraph(n, e, threshold, roles, edges, "oracle" if oracle else "analytic")
