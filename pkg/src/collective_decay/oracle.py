"""Brute-force integration of the collective decay master equation on 2^n x 2^n.

Two independent routes are provided: fixed-step classical RK4 acting with the
dissipator directly, and the matrix exponential of the materialized
Liouvillian (scaling and squaring, small n only).

The dissipator never raises the number of excitations, so a state supported
on basis states with at most m excitations stays there.  With
``truncate=True`` (default) both routes work on that sector only; the result
is identical to the full 2^n computation, just cheaper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import CapacityError, ConvergenceError, DomainError, NumericalFailure
from .hilbert import _lowering_sparse, _qubits_of, apply_dissipator, excitation_number

MAX_EXPM_QUBITS = 6


def default_dt(n: int) -> float:
    # fastest decay rates grow linearly with n
    return min(1e-3, 0.1 / n)


@dataclass(frozen=True)
class EvolutionConfig:
    t_final: float
    dt: float | None = None
    method: str = "rk4"
    tolerance: float = 1e-10
    trace_tolerance: float = 1e-9
    samples: int = 11
    max_time: float | None = None
    truncate: bool = True

    def __post_init__(self):
        if self.t_final < 0:
            raise DomainError("t_final must be non-negative")
        if self.dt is not None and self.dt <= 0:
            raise DomainError("dt must be positive")
        if self.dt is not None and self.t_final > 0 and self.dt > self.t_final:
            raise DomainError("dt must not exceed t_final")
        if self.method not in ("rk4", "expm"):
            raise DomainError(f"unknown method {self.method!r}")
        if self.tolerance <= 0 or self.trace_tolerance <= 0:
            raise DomainError("tolerances must be positive")
        if self.samples < 1:
            raise DomainError("samples must be >= 1")

    def step(self, n: int) -> float:
        return self.dt if self.dt is not None else default_dt(n)


@dataclass
class Trajectory:
    times: np.ndarray
    states: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def excitation(self) -> np.ndarray:
        return np.array([excitation_number(r) for r in self.states])


class _Sector:
    """Basis states with at most ``m_max`` excitations and sigma restricted to them."""

    def __init__(self, n: int, keep: np.ndarray):
        self.n = n
        self.keep = keep
        sigma, _ = _lowering_sparse(n)
        self.sigma = sigma[keep][:, keep].toarray()
        self.sigma_t = np.ascontiguousarray(self.sigma.conj().T)
        self.number = self.sigma_t @ self.sigma

    @classmethod
    def for_state(cls, rho: np.ndarray, n: int, truncate: bool) -> "_Sector":
        weights = np.array([bin(b).count("1") for b in range(2**n)])
        if not truncate:
            return cls(n, np.arange(2**n))
        support = np.flatnonzero(np.any(rho != 0, axis=0) | np.any(rho != 0, axis=1))
        m_max = int(weights[support].max()) if support.size else 0
        return cls(n, np.flatnonzero(weights <= m_max))

    def restrict(self, rho: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(rho[np.ix_(self.keep, self.keep)])

    def embed(self, rho_k: np.ndarray) -> np.ndarray:
        full = np.zeros((2**self.n, 2**self.n), dtype=complex)
        full[np.ix_(self.keep, self.keep)] = rho_k
        return full

    def dissipator(self, rho_k: np.ndarray) -> np.ndarray:
        s_rho = self.sigma @ rho_k
        return 2.0 * (s_rho @ self.sigma_t) - self.number @ rho_k - rho_k @ self.number


def _rk4_step(D, rho: np.ndarray, h: float, k1: np.ndarray | None = None) -> np.ndarray:
    if k1 is None:
        k1 = D(rho)
    k2 = D(rho + 0.5 * h * k1)
    k3 = D(rho + 0.5 * h * k2)
    k4 = D(rho + h * k3)
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _rk4_advance(D, rho: np.ndarray, span: float, dt: float) -> np.ndarray:
    if span <= 0:
        return rho
    steps = max(1, math.ceil(span / dt - 1e-9))
    h = span / steps
    for _ in range(steps):
        rho = _rk4_step(D, rho, h)
    return rho


def _materialize(D, dim: int) -> np.ndarray:
    L = np.empty((dim * dim, dim * dim))
    unit = np.zeros((dim, dim), dtype=complex)
    for col in range(dim * dim):
        unit.flat[col] = 1.0
        L[:, col] = D(unit).real.ravel()
        unit.flat[col] = 0.0
    return L


@lru_cache(maxsize=4)
def liouvillian(n: int) -> np.ndarray:
    """Real 4^n x 4^n matrix of the dissipator acting on row-major vec(rho).

    Built column by column from the action on matrix units, so the
    dissipator itself remains the single definition of the dynamics.
    """
    if n > MAX_EXPM_QUBITS:
        raise CapacityError(f"Liouvillian materialization limited to n <= {MAX_EXPM_QUBITS}")
    L = _materialize(apply_dissipator, 2**n)
    L.setflags(write=False)
    return L


def _sector_liouvillian(sector: _Sector) -> np.ndarray:
    if len(sector.keep) == 2**sector.n:
        return liouvillian(sector.n)
    return _materialize(sector.dissipator, len(sector.keep))


def _apply_real(prop: np.ndarray, rho: np.ndarray) -> np.ndarray:
    v = rho.ravel()
    return (prop @ v.real + 1j * (prop @ v.imag)).reshape(rho.shape)


def _check_density(rho0: np.ndarray) -> tuple[np.ndarray, int]:
    n = _qubits_of(rho0)
    rho0 = np.asarray(rho0, dtype=complex)
    if np.max(np.abs(rho0 - rho0.conj().T)) > 1e-10:
        raise DomainError("initial state is not Hermitian")
    if abs(np.trace(rho0) - 1.0) > 1e-10:
        raise DomainError("initial state does not have unit trace")
    return rho0, n


def _check_trace(rho: np.ndarray, t: float, tol: float) -> None:
    drift = abs(np.trace(rho) - 1.0)
    if not drift <= tol:
        raise NumericalFailure(f"trace drift {drift:.3e} at t={t:g} exceeds {tol:g}")


def evolve_full(rho0: np.ndarray, config: EvolutionConfig, times=None) -> Trajectory:
    """Evolve rho0 under the collective dissipator and sample it on a time grid.

    ``times`` overrides the default grid ``linspace(0, t_final, samples)``;
    it must be ascending and non-negative.
    """
    rho0, n = _check_density(rho0)
    if times is None:
        times = np.linspace(0.0, config.t_final, config.samples)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise DomainError("output times must be ascending and non-negative")
    if config.method == "expm" and n > MAX_EXPM_QUBITS:
        raise CapacityError(f"expm method limited to n <= {MAX_EXPM_QUBITS}, got n={n}")

    sector = _Sector.for_state(rho0, n, config.truncate)
    rho = sector.restrict(rho0)
    states = []
    t_prev = 0.0
    if config.method == "rk4":
        dt = config.step(n)
        for t in times:
            rho = _rk4_advance(sector.dissipator, rho, t - t_prev, dt)
            _check_trace(rho, t, config.trace_tolerance)
            states.append(sector.embed(rho))
            t_prev = t
    else:
        L = _sector_liouvillian(sector)
        cache: dict[float, np.ndarray] = {}
        for t in times:
            span = float(t - t_prev)
            if span > 0:
                key = round(span, 12)
                if key not in cache:
                    cache[key] = expm(span * L)
                rho = _apply_real(cache[key], rho)
            _check_trace(rho, t, config.trace_tolerance)
            states.append(sector.embed(rho))
            t_prev = t
    return Trajectory(times=times, states=states)


def steady_state(rho0: np.ndarray, config: EvolutionConfig | None = None) -> np.ndarray:
    """Integrate until the Hilbert-Schmidt norm of D(rho) drops below tolerance.

    The stationary state is not unique for this model; the result depends on
    rho0.  The search stops at ``config.max_time`` (default 200/n).
    """
    rho0, n = _check_density(rho0)
    config = config or EvolutionConfig(t_final=0.0)
    if config.method == "expm" and n > MAX_EXPM_QUBITS:
        raise CapacityError(f"expm method limited to n <= {MAX_EXPM_QUBITS}, got n={n}")
    t_max = config.max_time if config.max_time is not None else 200.0 / n
    tol = config.tolerance
    sector = _Sector.for_state(rho0, n, config.truncate)
    D = sector.dissipator
    rho = sector.restrict(rho0)
    t = 0.0
    if config.method == "rk4":
        h = config.step(n)
        while True:
            k1 = D(rho)
            if np.linalg.norm(k1) < tol:
                return sector.embed(rho)
            if t >= t_max:
                break
            rho = _rk4_step(D, rho, h, k1)
            t += h
    else:
        h = 0.5
        prop = expm(h * _sector_liouvillian(sector))
        while True:
            if np.linalg.norm(D(rho)) < tol:
                return sector.embed(rho)
            if t >= t_max:
                break
            rho = _apply_real(prop, rho)
            t += h
    raise ConvergenceError(
        f"no steady state within t={t_max:g}: |D rho| = {np.linalg.norm(D(rho)):.3e}"
    )
