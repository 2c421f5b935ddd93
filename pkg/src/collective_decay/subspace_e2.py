"""Exact dynamics for two initial excitations.

Starting from |k,l><k,l| the state stays in the span of ten operators

    GG     |G><G|             KL2    |k,l><k,l|
    EE     |E><E|             BB     |B><B|
    KLKL   |k+l><k+l|         HH     |H><H|
    OMEGA  |E><k+l| + h.c.    LAMBDA |B><k,l| + h.c.
                              PI     |H><k,l| + h.c.
                              GAMMA  |B><H| + h.c.

(E, B, H as in :func:`collective_decay.hilbert.special_vector`, with
k = 1, l = 2) and rho(t) = sum_i b_i(t) op_i.  The coefficients b1..b9 obey
d/dt v = M v with the integer matrix :func:`build_M`; b0 follows from the
conserved trace.

Several published expressions for this case carry typos; each function
documents which variant it evaluates.  ``printed=True`` reproduces the
expressions exactly as published, for comparison.  ``t = math.inf`` gives
stationary values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .entanglement import concurrence
from .errors import CapacityError, DomainError, NumericalFailure
from .hilbert import MAX_QUBITS, basis_state, ket_bra, partial_trace_pair, special_vector, sym_ket_bra

EXCITED_EXCITED = "excited_excited"
EXCITED_GROUND = "excited_ground"
GROUND_GROUND = "ground_ground"
PAIR_CLASSES = (EXCITED_EXCITED, EXCITED_GROUND, GROUND_GROUND)

BASIS_TAGS = ("GG", "EE", "KLKL", "OMEGA", "KL2", "BB", "HH", "LAMBDA", "PI", "GAMMA")

# representative qubit pairs for each class (k = 1, l = 2 excited)
PAIR_QUBITS = {EXCITED_EXCITED: (1, 2), EXCITED_GROUND: (1, 3), GROUND_GROUND: (3, 4)}

# reduced states are assembled on the full space up to this n, from formulas beyond
TRACE_PATH_MAX_N = 8


def _check_n(n: int) -> None:
    if int(n) != n:
        raise DomainError(f"n must be an integer, got {n!r}")
    if n < 4:
        raise CapacityError(
            f"the two-excitation subspace engine needs n >= 4 (got n={n}); use the full-space oracle"
        )


@dataclass(frozen=True)
class E2BasisOp:
    tag: str
    matrix: np.ndarray


@dataclass(frozen=True)
class E2Coefficients:
    n: int
    t: float
    b: np.ndarray

    def __getitem__(self, i: int) -> float:
        return float(self.b[i])

    def trace(self) -> float:
        n = self.n
        b = self.b
        # tr: |E><E| -> n-2, |k+l><k+l| -> 2, |B><B| -> 2(n-2), |H><H| -> C(n-2, 2)
        return float(b[0] + (n - 2) * b[1] + 2 * b[2] + b[4] + 2 * (n - 2) * b[5] + math.comb(n - 2, 2) * b[6])


@lru_cache(maxsize=8)
def _basis_matrices(n: int, k: int, l: int) -> tuple[np.ndarray, ...]:
    G = special_vector("G", n)
    E = special_vector("E_not_kl", n, k, l)
    KP = special_vector("k_plus_l", n, k, l)
    KL = basis_state(n, [k, l])
    B = special_vector("B", n, k, l)
    H = special_vector("H", n, k, l)
    ops = (
        ket_bra(G, G),
        ket_bra(E, E),
        ket_bra(KP, KP),
        sym_ket_bra(E, KP),
        ket_bra(KL, KL),
        ket_bra(B, B),
        ket_bra(H, H),
        sym_ket_bra(B, KL),
        sym_ket_bra(H, KL),
        sym_ket_bra(B, H),
    )
    for op in ops:
        op.setflags(write=False)
    return ops


def build_basis(n: int, k: int = 1, l: int = 2) -> list[E2BasisOp]:
    """The ten spanning operators as full 2^n x 2^n matrices (read-only)."""
    _check_n(n)
    if k == l:
        raise DomainError("k and l must differ")
    return [E2BasisOp(tag, op) for tag, op in zip(BASIS_TAGS, _basis_matrices(n, k, l))]


def build_M(n: int) -> np.ndarray:
    """Integer 9x9 generator of v = (b1, ..., b9)."""
    _check_n(n)
    p, q = n - 2, n - 3
    return np.array(
        [
            [-2 * p, 0, -4, 0, 8, 2 * q * q, 0, 0, 8 * q],
            [0, -4, -2 * p, 2, 2 * p * p, 0, 4 * p, 0, 0],
            [-p, -2, -n, 0, 4 * p, 0, 4, 2 * q, 2 * p * q],
            [0, 0, 0, -4, 0, 0, -4 * p, 0, 0],
            [0, 0, 0, 0, -2 * n, 0, -2, 0, -2 * q],
            [0, 0, 0, 0, 0, -4 * q, 0, 0, -8],
            [0, 0, 0, -1, -2 * p, 0, -(n + 2), -q, 0],
            [0, 0, 0, 0, 0, 0, -4, -2 * p, -2 * p],
            [0, 0, 0, 0, -4, -q, 0, -1, -3 * p],
        ],
        dtype=np.int64,
    )


def b0_rate_row(n: int) -> np.ndarray:
    """Coefficients of d/dt b0 = 2(n-2)^2 b1 + 8 b2 + 8(n-2) b3 on (b1..b9)."""
    _check_n(n)
    return np.array([2 * (n - 2) ** 2, 8, 8 * (n - 2), 0, 0, 0, 0, 0, 0], dtype=np.int64)


def generator(n: int) -> np.ndarray:
    """10x10 generator on (b0, ..., b9): M augmented by the b0 row and a zero column."""
    g = np.zeros((10, 10))
    g[0, 1:] = b0_rate_row(n)
    g[1:, 1:] = build_M(n)
    return g


def initial_vector() -> np.ndarray:
    b = np.zeros(10)
    b[4] = 1.0
    return b


def evolve_v(n: int, t: float, method: str = "expm", dt: float = 1e-3) -> E2Coefficients:
    """Propagate (b0..b9) from the |k,l><k,l| initial condition.

    ``expm`` exponentiates the augmented generator (scaling and squaring);
    ``rk4`` integrates it with fixed steps of at most ``dt``.
    """
    _check_n(n)
    if t < 0 or not math.isfinite(t):
        raise DomainError("evolve_v needs a finite non-negative time")
    g = generator(n)
    b = initial_vector()
    if method == "expm":
        b = expm(t * g) @ b
    elif method == "rk4":
        steps = max(1, math.ceil(t / dt - 1e-9)) if t > 0 else 0
        h = t / steps if steps else 0.0
        for _ in range(steps):
            k1 = g @ b
            k2 = g @ (b + 0.5 * h * k1)
            k3 = g @ (b + 0.5 * h * k2)
            k4 = g @ (b + h * k3)
            b = b + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    else:
        raise DomainError(f"unknown method {method!r}")
    out = E2Coefficients(n, t, b)
    if not np.all(np.isfinite(b)) or abs(out.trace() - 1.0) > 1e-9:
        raise NumericalFailure(f"coefficient propagation lost accuracy (n={n}, t={t}, {method})")
    return out


def closed_form_b(n: int, t: float, printed: bool = False) -> E2Coefficients:
    """Explicit exponential sums for b0..b9.

    With ``printed=False`` (default) b2 and b3 carry the sign that matches
    the generator and keeps |k><k| populations non-negative.  ``printed=True``
    evaluates the published expressions literally: b2 and b3 with the
    opposite sign and the e^{-(3n-4)} term of b7 without its time factor.
    """
    _check_n(n)
    if t < 0:
        raise DomainError("time must be non-negative")
    n1, n2 = n - 1, n - 2

    def e(rate):
        return math.exp(-rate * t)  # exp(-inf) == 0 gives the stationary limit

    def u(rate):
        return -math.expm1(-rate * t)  # 1 - e(rate) without cancellation at small t

    def expsum(terms, const):
        # sum c e(r) + const; every such sum vanishes at t = 0, so it equals
        # -sum c (1 - e(r)), which keeps full relative accuracy as t -> 0
        assert abs(sum(c for c, _ in terms) + const) < 1e-12
        return -sum(c * u(r) for c, r in terms)

    b0 = 8 / n2 * (u(2 * n) / (2 * n) - u(4 * n1) / (4 * n1))
    b1 = 4 / (n2 * n**2) * u(n) ** 2 * u(2 * n2)
    b2 = u(2 * n2) * (2 * e(n) + n2) ** 2 / (n2 * n**2)
    b3 = -2 * u(n) * u(2 * n2) * (n - 2 * u(n)) / (n2 * n**2)
    if printed:
        b2, b3 = -b2, -b3
    b4 = ((2 * n1 * e(n2) + 2 * e(2 * n1) + n * (n - 3)) / (n * n1)) ** 2
    b5 = expsum(
        [
            (4 / (n1**2 * n**2), 4 * n1),
            (4 * (n - 4) / (n**2 * n1 * n2), 3 * n - 4),
            ((n - 4) ** 2 / (n**2 * n2**2), 2 * n2),
            (-4 * (n - 3) / (n * n1**2 * n2), 2 * n1),
            (-2 * (n - 3) * (n - 4) / (n * n1 * n2**2), n2),
        ],
        ((n - 3) / (n1 * n2)) ** 2,
    )
    b6 = 4 * expsum([(1 / (n * n1), 2 * n1), (-2 / (n * n2), n2)], 1 / (n1 * n2)) ** 2
    b7_terms = [
        (4 / (n**2 * n1**2), 4 * n1),
        (2 * (3 * n - 8) / (n**2 * n1 * n2), 3 * n - 4),
        (2 * (n - 3) ** 2 / (n * n1**2 * n2), 2 * n1),
        (2 * (n - 4) / (n**2 * n2), 2 * n2),
        ((n - 3) * (n - 6) / (n * n1 * n2), n2),
    ]
    b7_const = -((n - 3) ** 2) / (n1**2 * n2)
    if printed:
        # published form: the (3n-4) exponential is missing its time factor
        b7 = sum(c * (math.exp(-r) if r == 3 * n - 4 else e(r)) for c, r in b7_terms) + b7_const
    else:
        b7 = expsum(b7_terms, b7_const)
    b8 = 4 * expsum(
        [
            (1 / (n**2 * n1**2), 4 * n1),
            ((n - 4) / (n**2 * n1 * n2), 3 * n - 4),
            ((n * n - 5 * n + 8) / (2 * n * n1**2 * n2), 2 * n1),
            (-2 / (n**2 * n2), 2 * n2),
            (-(n - 4) / (n * n1 * n2), n2),
        ],
        (n - 3) / (2 * n1**2 * n2),
    )
    b9 = -2 * expsum(
        [
            (-2 / (n**2 * n1**2), 4 * n1),
            (-(n - 8) / (n**2 * n1 * n2), 3 * n - 4),
            ((n - 5) / (n * n1**2 * n2), 2 * n1),
            (2 * (n - 4) / (n**2 * n2**2), 2 * n2),
            (-(3 * n - 10) / (n * n1 * n2**2), n2),
        ],
        (n - 3) / (n1**2 * n2**2),
    )
    return E2Coefficients(n, t, np.array([b0, b1, b2, b3, b4, b5, b6, b7, b8, b9]))


def reconstruct(coeffs: E2Coefficients, k: int = 1, l: int = 2) -> np.ndarray:
    """Full-space rho = sum_i b_i op_i."""
    ops = _basis_matrices(coeffs.n, k, l)
    rho = np.zeros_like(ops[0])
    for c, op in zip(coeffs.b, ops):
        rho = rho + c * op
    return rho


def reduced_pair_from_coefficients(coeffs: E2Coefficients, pair_class: str, printed: bool = False) -> np.ndarray:
    """Direct 4x4 assembly of a reduced pair state from b0..b9.

    The excited-ground coherence is b3 + b7 + (n-3) b9; ``printed=True``
    drops b7 as in the published reduced state.
    """
    n = coeffs.n
    b0, b1, b2, b3, b4, b5, b6, b7, b8, b9 = coeffs.b
    rho = np.zeros((4, 4), dtype=complex)
    if pair_class == EXCITED_EXCITED:
        x = b2 + (n - 2) * b5
        rho[3, 3] = b4
        rho[1:3, 1:3] = x
        rho[0, 0] = b0 + (n - 2) * (b1 + (n - 3) / 2 * b6)
    elif pair_class == EXCITED_GROUND:
        rho[3, 3] = b5
        rho[2, 2] = b2 + (n - 3) * b5 + b4
        rho[1, 1] = b1 + b5 + (n - 3) * b6
        rho[1, 2] = rho[2, 1] = b3 + (n - 3) * b9 + (0.0 if printed else b7)
        rho[0, 0] = b0 + (n - 3) * b1 + b2 + (n - 3) * b5 + (n - 3) * (n - 4) / 2 * b6
    elif pair_class == GROUND_GROUND:
        rho[3, 3] = b6
        rho[1:3, 1:3] = b1 + 2 * b5 + (n - 4) * b6
        rho[0, 0] = b0 + (n - 4) * b1 + 2 * b2 + b4 + 2 * (n - 4) * b5 + (n - 4) * (n - 5) / 2 * b6
    else:
        raise DomainError(f"unknown pair class {pair_class!r}")
    return rho


def reduced_pair_e2(n: int, t: float, pair_class: str, method: str = "auto") -> np.ndarray:
    """Reduced state of a qubit pair at time t.

    ``trace``: assemble rho(t) on the full space and take the partial trace.
    ``formula``: assemble the 4x4 matrix from the coefficients directly.
    ``auto`` uses the partial trace for n <= TRACE_PATH_MAX_N.
    """
    _check_n(n)
    if pair_class not in PAIR_CLASSES:
        raise DomainError(f"unknown pair class {pair_class!r}")
    coeffs = closed_form_b(n, t)
    if method == "auto":
        method = "trace" if n <= TRACE_PATH_MAX_N else "formula"
    if method == "formula":
        return reduced_pair_from_coefficients(coeffs, pair_class)
    if method == "trace":
        if n > MAX_QUBITS:
            raise CapacityError(f"partial-trace path limited to n <= {MAX_QUBITS}")
        return partial_trace_pair(reconstruct(coeffs), *PAIR_QUBITS[pair_class])
    raise DomainError(f"unknown method {method!r}")


def concurrence_e2(n: int, t: float, pair_class: str, method: str = "auto") -> float:
    """Wootters concurrence of the reduced pair state."""
    return concurrence(reduced_pair_e2(n, t, pair_class, method))


def printed_concurrence(coeffs: E2Coefficients, pair_class: str) -> float:
    """Published closed-form concurrences in terms of b0..b9, clamped at zero.

    The excited-excited pair has no formula; it is claimed unentangled.
    """
    n = coeffs.n
    b0, b1, b2, b3, b4, b5, b6, b7, b8, b9 = coeffs.b
    if pair_class == EXCITED_EXCITED:
        return 0.0
    if pair_class == EXCITED_GROUND:
        p00 = b0 + (n - 3) * b1 + b2 + (n - 3) * b5 + (n - 3) * (n - 4) / 2 * b6
        c = -2 * (b3 + (n - 3) * b9 + b7) - 2 * math.sqrt(max(0.0, b5 * p00))
    elif pair_class == GROUND_GROUND:
        p00 = b0 + (n - 4) * b1 + 2 * b2 + b4 + 2 * (n - 4) * b5 + (n - 4) * (n - 5) / 2 * b6
        c = 2 * (b1 + 2 * b5 + (n - 4) * b6) - 2 * math.sqrt(max(0.0, b6 * p00))
    else:
        raise DomainError(f"unknown pair class {pair_class!r}")
    return max(0.0, c)


def printed_stationary(n: int, clamp: bool = True) -> tuple[float, float]:
    """Published stationary (C_kj, C_jm) polynomials, evaluated literally."""
    _check_n(n)
    den = n * (n - 1) ** 2 * (n - 2) ** 2
    kj = 2 * (n**5 - 11 * n**4 + 39 * n**3 - 53 * n**2 + 24 * n - 8) / (n * den) - 2 * (n - 3) / den * math.sqrt(
        7 * n**4 - 50 * n**3 + 119 * n**2 - 104 * n + 22
    )
    jm = 4 * (n**4 - 2 * n**3 - 7 * n**2 + 10 * n - 4) / (n * den) - 4 / den * math.sqrt(
        n**6 - 10 * n**5 + 41 * n**4 - 104 * n**3 + 180 * n**2 - 152 * n + 48
    )
    if clamp:
        kj, jm = max(0.0, kj), max(0.0, jm)
    return kj, jm


def stationary_concurrences(n: int, clamp: bool = True) -> tuple[float, float]:
    """Stationary (C_kj, C_jm) from the t -> inf limits of b0..b9.

    C_kj = 2(n^5 - 4n^4 - 3n^3 + 26n^2 - 24n + 8) / (n^2 (n-1)^2 (n-2)^2)
           - 2(n-3) / (n (n-1)^2 (n-2)^2) sqrt(2n^5 - 9n^4 + 43n^2 - 48n + 16)
    C_jm = 4(n^4 - 2n^3 - 7n^2 + 10n - 4) / (n^2 (n-1)^2 (n-2)^2)
           - 4 / (n (n-1)^2 (n-2)^2) sqrt(n^6 - 6n^5 + 9n^4 - 4n^3 + 28n^2 - 40n + 16)
    """
    _check_n(n)
    den = n * (n - 1) ** 2 * (n - 2) ** 2
    kj = 2 * (n**5 - 4 * n**4 - 3 * n**3 + 26 * n**2 - 24 * n + 8) / (n * den) - 2 * (n - 3) / den * math.sqrt(
        2 * n**5 - 9 * n**4 + 43 * n**2 - 48 * n + 16
    )
    jm = 4 * (n**4 - 2 * n**3 - 7 * n**2 + 10 * n - 4) / (n * den) - 4 / den * math.sqrt(
        n**6 - 6 * n**5 + 9 * n**4 - 4 * n**3 + 28 * n**2 - 40 * n + 16
    )
    if clamp:
        kj, jm = max(0.0, kj), max(0.0, jm)
    return kj, jm


@dataclass(frozen=True)
class ScanRow:
    n: int
    c_kj: float
    c_jm: float
    printed_kj: float
    printed_jm: float
    oracle_kj: float | None = None
    oracle_jm: float | None = None

    def agrees(self, which: str = "exact", tol: float = 1e-4) -> bool | None:
        if self.oracle_kj is None:
            return None
        kj, jm = (self.c_kj, self.c_jm) if which == "exact" else (self.printed_kj, self.printed_jm)
        return abs(kj - self.oracle_kj) < tol and abs(jm - self.oracle_jm) < tol


def oracle_stationary(n: int) -> tuple[float, float]:
    """Stationary (C_kj, C_jm) from the full-space steady state (n <= 8 advisable)."""
    from .oracle import steady_state

    psi = basis_state(n, [1, 2])
    rho = steady_state(ket_bra(psi, psi))
    return (
        concurrence(partial_trace_pair(rho, *PAIR_QUBITS[EXCITED_GROUND])),
        concurrence(partial_trace_pair(rho, *PAIR_QUBITS[GROUND_GROUND])),
    )


def stationary_scan(n_min: int, n_max: int, oracle: bool = False, oracle_max_n: int = 8) -> list[ScanRow]:
    if not 4 <= n_min <= n_max:
        raise DomainError("need 4 <= n_min <= n_max")
    rows = []
    for n in range(n_min, n_max + 1):
        ok_kj = ok_jm = None
        if oracle and n <= oracle_max_n:
            ok_kj, ok_jm = oracle_stationary(n)
        rows.append(ScanRow(n, *stationary_concurrences(n), *printed_stationary(n), ok_kj, ok_jm))
    return rows
