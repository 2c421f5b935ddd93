"""Exact dynamics for one initial excitation.

Starting from |k><k|, the state stays in the span of four operators

    |G><G|,  |k><k|,  |E><E|,  |E><k| + |k><E|      (E = sum of |i>, i != k)

with coefficients a0..a3.  All qubits other than k are equivalent, so k is
fixed to 1 and the ground-state partners are j = 2, m = 3.

Time ``t = math.inf`` selects the stationary limit exactly (f = 1/n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entanglement import x_block_matrix
from .errors import DomainError, NumericalFailure
from .hilbert import basis_state, ket_bra, special_vector, sym_ket_bra

EXCITED_GROUND = "excited_ground"
GROUND_GROUND = "ground_ground"
PAIR_CLASSES = (EXCITED_GROUND, GROUND_GROUND)

BASIS_LABELS = ("GG", "kk", "EE", "Ek+kE")


@dataclass(frozen=True)
class E1Coefficients:
    n: int
    t: float
    a0: float
    a1: float
    a2: float
    a3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.a2, self.a3])

    def trace(self) -> float:
        # <E|E> = n - 1, the symmetric coherence is traceless
        return self.a0 + self.a1 + (self.n - 1) * self.a2


def _check_n(n: int, minimum: int = 2) -> None:
    if int(n) != n or n < minimum:
        raise DomainError(f"need n >= {minimum}, got {n!r}")


def decay_function(n: int, t):
    """f(t) = (1 - exp(-n t)) / n; exactly 1/n at t = inf."""
    if n < 1:
        raise DomainError("n must be positive")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be non-negative")
    f = -np.expm1(-n * t) / n
    return float(f) if f.ndim == 0 else f


def coefficients_closed_form(n: int, t: float) -> E1Coefficients:
    _check_n(n)
    f = decay_function(n, t)
    return E1Coefficients(n, t, a0=f * (2 - n * f), a1=(1 - f) ** 2, a2=f * f, a3=-f * (1 - f))


def generator(n: int) -> np.ndarray:
    """Matrix G with d/dt (a0, a1, a2, a3) = G (a0, a1, a2, a3)."""
    m = n - 1
    return np.array(
        [
            [0, 2, 2 * m * m, 4 * m],
            [0, -2, 0, -2 * m],
            [0, 0, -2 * m, -2],
            [0, -1, -m, -n],
        ],
        dtype=float,
    )


def coefficients_ode(n: int, t: float, dt: float = 1e-3) -> E1Coefficients:
    """RK4 integration of the four coefficient equations from (0, 1, 0, 0)."""
    _check_n(n)
    if t < 0 or not math.isfinite(t):
        raise DomainError("ODE path needs a finite non-negative time")
    G = generator(n)
    a = np.array([0.0, 1.0, 0.0, 0.0])
    steps = max(1, math.ceil(t / dt - 1e-9)) if t > 0 else 0
    h = t / steps if steps else 0.0
    for _ in range(steps):
        k1 = G @ a
        k2 = G @ (a + 0.5 * h * k1)
        k3 = G @ (a + 0.5 * h * k2)
        k4 = G @ (a + h * k3)
        a = a + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(a)):
        raise NumericalFailure(f"coefficient ODE diverged (n={n}, dt={dt})")
    out = E1Coefficients(n, t, *a)
    if abs(out.trace() - 1.0) > 1e-9:
        raise NumericalFailure(f"trace drift {out.trace() - 1.0:.3e} in coefficient ODE")
    return out


def basis_operators(n: int, k: int = 1) -> list[np.ndarray]:
    """Full-space realizations of the four spanning operators, in coefficient order."""
    G = special_vector("G", n)
    K = basis_state(n, [k])
    E = special_vector("E_not_k", n, k)
    return [ket_bra(G, G), ket_bra(K, K), ket_bra(E, E), sym_ket_bra(E, K)]


def reconstruct(coeffs: E1Coefficients, k: int = 1) -> np.ndarray:
    ops = basis_operators(coeffs.n, k)
    return sum(c * op for c, op in zip(coeffs.as_array(), ops))


def reduced_pair(n: int, t: float, pair_class: str) -> np.ndarray:
    """4x4 reduced state of (k, j) or (j, m), left slot first."""
    f = decay_function(n, t)
    if pair_class == EXCITED_GROUND:
        _check_n(n)
        return x_block_matrix(p00=2 * f * (1 - f), p01=f * f, p10=(1 - f) ** 2, z=-f * (1 - f), p11=0.0)
    if pair_class == GROUND_GROUND:
        _check_n(n, 3)
        return x_block_matrix(p00=1 - 2 * f * f, p01=f * f, p10=f * f, z=f * f, p11=0.0)
    raise DomainError(f"unknown pair class {pair_class!r} for one excitation")


def concurrence_formula(n: int, t, pair_class: str):
    """Closed-form concurrence of the reduced pair states (vectorized in t)."""
    _check_n(n)
    f = decay_function(n, t)
    if pair_class == EXCITED_GROUND:
        return 2 * f * (1 - f)
    if pair_class == GROUND_GROUND:
        return 2 * f * f
    raise DomainError(f"unknown pair class {pair_class!r} for one excitation")


def concurrence_e1(n: int, t: float, pair_class: str) -> float:
    if pair_class == GROUND_GROUND:
        _check_n(n, 3)
    return float(concurrence_formula(n, t, pair_class))


def stationary_concurrences(n: int) -> tuple[float, float]:
    """(C_kj, C_jm) at t -> inf: 2(n-1)/n^2 and 2/n^2."""
    _check_n(n)
    return 2 * (n - 1) / n**2, 2 / n**2


@dataclass(frozen=True)
class ScanRow:
    n: int
    c_kj: float
    c_jm: float
    degenerate: bool


def stationary_scan(n_min: int, n_max: int) -> list[ScanRow]:
    """Stationary concurrences for n_min..n_max.

    At n = 2 there is no ground-ground pair; the formula value is still
    reported, flagged ``degenerate``.
    """
    if not 2 <= n_min <= n_max:
        raise DomainError("need 2 <= n_min <= n_max")
    return [ScanRow(n, *stationary_concurrences(n), degenerate=n < 3) for n in range(n_min, n_max + 1)]
