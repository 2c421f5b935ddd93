import math

import numpy as np
import pytest

from collective_decay.entanglement import concurrence
from collective_decay.errors import CapacityError, ConvergenceError, DomainError, NumericalFailure
from collective_decay.hilbert import basis_state, ket_bra, partial_trace_pair
from collective_decay.oracle import (
    EvolutionConfig,
    default_dt,
    evolve_full,
    liouvillian,
    steady_state,
)


def projector(n, excited=()):
    psi = basis_state(n, excited)
    return ket_bra(psi, psi)


def random_density(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


def test_ground_state_is_dark():
    G = projector(4)
    traj = evolve_full(G, EvolutionConfig(t_final=2.0, samples=5))
    for rho in traj.states:
        assert np.array_equal(rho, G)
    assert np.array_equal(steady_state(G), G)


def test_single_excitation_ground_population():
    n, t = 2, 1.0
    f = (1 - math.exp(-2)) / 2
    traj = evolve_full(projector(n, [1]), EvolutionConfig(t_final=t), times=[t])
    assert traj.final[0, 0].real == pytest.approx(f * (2 - n * f), abs=1e-8)
    assert traj.final[0, 0].real == pytest.approx(0.49084, abs=1e-5)


@pytest.mark.parametrize("method", ["rk4", "expm"])
def test_trace_hermiticity_positivity_and_decay(method):
    rho0 = random_density(3, 7)
    traj = evolve_full(rho0, EvolutionConfig(t_final=3.0, samples=13, method=method))
    for rho in traj.states:
        assert abs(np.trace(rho) - 1) < 1e-9
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-12
        assert np.linalg.eigvalsh(rho)[0] > -1e-8
    exc = traj.excitation()
    assert np.all(np.diff(exc) <= 1e-10)
    assert len(traj) == 13


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_rk4_and_expm_agree(n):
    rho0 = projector(n, [1, 2]) if n > 2 else projector(n, [1])
    times = [0.1, 0.5, 1.0, 3.0]
    a = evolve_full(rho0, EvolutionConfig(t_final=3.0, method="rk4"), times=times)
    b = evolve_full(rho0, EvolutionConfig(t_final=3.0, method="expm"), times=times)
    for x, y in zip(a.states, b.states):
        assert np.max(np.abs(x - y)) < 1e-8


def test_rk4_and_expm_agree_on_mixed_state():
    rho0 = random_density(4, 11)
    a = evolve_full(rho0, EvolutionConfig(t_final=1.0, method="rk4"), times=[1.0]).final
    b = evolve_full(rho0, EvolutionConfig(t_final=1.0, method="expm"), times=[1.0]).final
    assert np.max(np.abs(a - b)) < 1e-8


@pytest.mark.parametrize("method", ["rk4", "expm"])
def test_sector_truncation_is_exact(method):
    n = 5
    rho0 = projector(n, [2, 4])
    times = [0.2, 1.0]
    a = evolve_full(rho0, EvolutionConfig(t_final=1.0, method=method), times=times)
    b = evolve_full(rho0, EvolutionConfig(t_final=1.0, method=method, truncate=False), times=times)
    for x, y in zip(a.states, b.states):
        assert np.max(np.abs(x - y)) < 1e-12


def test_halving_dt_converges():
    n = 4
    rho0 = projector(n, [1, 3])
    a = evolve_full(rho0, EvolutionConfig(t_final=2.0, dt=default_dt(n)), times=[2.0]).final
    b = evolve_full(rho0, EvolutionConfig(t_final=2.0, dt=default_dt(n) / 2), times=[2.0]).final
    assert np.max(np.abs(a - b)) < 1e-8


def test_default_dt():
    assert default_dt(2) == 1e-3
    assert default_dt(200) == pytest.approx(5e-4)


def test_liouvillian_annihilates_trace():
    L = liouvillian(2)
    # vec order is row-major: trace functional picks diagonal entries
    tr = np.eye(4).ravel()
    assert np.max(np.abs(tr @ L)) < 1e-14
    assert not L.flags.writeable


def test_steady_state_single_excitation():
    rho = steady_state(projector(3, [1]))
    assert concurrence(partial_trace_pair(rho, 1, 2)) == pytest.approx(4 / 9, abs=1e-6)


def test_steady_state_excited_pair_unentangled():
    rho = steady_state(projector(4, [1, 2]))
    assert concurrence(partial_trace_pair(rho, 1, 2)) < 1e-10


def test_steady_state_expm_route():
    a = steady_state(projector(3, [1]), EvolutionConfig(t_final=0.0, method="expm"))
    b = steady_state(projector(3, [1]))
    assert np.max(np.abs(a - b)) < 1e-8


def test_steady_state_convergence_error():
    with pytest.raises(ConvergenceError):
        steady_state(projector(3, [1]), EvolutionConfig(t_final=0.0, max_time=0.01))
    assert issubclass(ConvergenceError, NumericalFailure)


def test_config_validation():
    with pytest.raises(DomainError):
        EvolutionConfig(t_final=-1.0)
    with pytest.raises(DomainError):
        EvolutionConfig(t_final=1.0, dt=0.0)
    with pytest.raises(DomainError):
        EvolutionConfig(t_final=1.0, method="euler")
    with pytest.raises(DomainError):
        evolve_full(projector(2, [1]), EvolutionConfig(t_final=1.0), times=[1.0, 0.5])


def test_capacity_limits():
    with pytest.raises(CapacityError):
        evolve_full(projector(7, [1]), EvolutionConfig(t_final=0.1, method="expm"))


def test_rejects_non_density_input():
    with pytest.raises(DomainError):
        evolve_full(np.eye(4), EvolutionConfig(t_final=0.1))
