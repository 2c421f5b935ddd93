import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collective_decay.errors import CapacityError, DomainError
from collective_decay.hilbert import (
    apply_dissipator,
    basis_state,
    closure_generator,
    collective_lowering,
    excitation_number,
    ket_bra,
    partial_trace_pair,
    project_onto_operators,
    special_vector,
    sym_ket_bra,
)


def ket(bits: str) -> np.ndarray:
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1
    return psi


def random_density(n, rng, rank=None):
    dim = 2**n
    A = rng.normal(size=(dim, rank or dim)) + 1j * rng.normal(size=(dim, rank or dim))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


def test_basis_states():
    assert np.array_equal(basis_state(1), [1, 0])
    assert np.array_equal(basis_state(3, [2]), ket("010"))
    assert np.array_equal(basis_state(4, [1, 3]), ket("1010"))


def test_basis_state_errors():
    with pytest.raises(DomainError):
        basis_state(3, [4])
    with pytest.raises(DomainError):
        basis_state(3, [0])
    with pytest.raises(DomainError):
        basis_state(3, [1, 1])
    with pytest.raises(CapacityError):
        basis_state(13)


def test_special_vectors():
    e = special_vector("E_not_k", 3, k=1)
    assert np.array_equal(e, ket("010") + ket("001"))
    assert np.vdot(e, e).real == 2

    h = special_vector("H", 5, 1, 2)
    assert np.array_equal(h, ket("00110") + ket("00101") + ket("00011"))
    assert np.vdot(h, h).real == math.comb(3, 2)

    assert np.array_equal(special_vector("k_plus_l", 5, 1, 2), ket("10000") + ket("01000"))
    assert np.array_equal(special_vector("E_not_kl", 4, 1, 2), ket("0010") + ket("0001"))


def test_B_literal_matches_merged_sum():
    # sum_{i!=1}|i,1> + sum_{i!=2}|i,2> with |2,1> = |1,2> merged: amplitude 2 there
    b = special_vector("B_literal", 4, 1, 2)
    want = ket("1100") * 2 + ket("1010") + ket("1001") + ket("0110") + ket("0101")
    assert np.array_equal(b, want)
    assert np.vdot(b, b).real == 8


def test_B_excludes_the_kl_pair():
    n = 6
    b = special_vector("B", n, 1, 2)
    assert np.vdot(b, b).real == 2 * (n - 2)
    assert b[int("110000", 2)] == 0
    assert np.array_equal(special_vector("B_literal", n, 1, 2) - b, 2 * basis_state(n, [1, 2]))


def test_special_vector_errors():
    with pytest.raises(DomainError):
        special_vector("B", 4, 2, 2)
    with pytest.raises(DomainError):
        special_vector("nope", 4)


def test_collective_lowering():
    assert np.array_equal(collective_lowering(1), [[0, 1], [0, 0]])
    s = collective_lowering(2)
    assert np.array_equal(s @ ket("11"), ket("01") + ket("10"))
    n, k = 5, 3
    s = collective_lowering(n)
    got = s.conj().T @ s @ basis_state(n, [k])
    assert np.array_equal(got, basis_state(n, [k]) + special_vector("E_not_k", n, k))


@pytest.mark.parametrize("n", [2, 3, 5])
def test_lowering_kills_after_e_plus_one_applications(n):
    s = collective_lowering(n)
    for e in range(n + 1):
        for excited in [tuple(range(1, e + 1)), tuple(range(n - e + 1, n + 1))]:
            psi = basis_state(n, excited)
            for _ in range(e + 1):
                psi = s @ psi
            assert np.max(np.abs(psi)) == 0


def test_dissipator_examples():
    for n in (1, 3, 6):
        G = basis_state(n)
        assert np.max(np.abs(apply_dissipator(ket_bra(G, G)))) == 0
    n = 3
    K, E, G = basis_state(n, [1]), special_vector("E_not_k", n, 1), basis_state(n)
    want = 2 * ket_bra(G, G) - sym_ket_bra(E, K) - 2 * ket_bra(K, K)
    assert np.max(np.abs(apply_dissipator(ket_bra(K, K)) - want)) < 1e-14


def test_dissipator_matches_dense_definition():
    rng = np.random.default_rng(1)
    n = 4
    rho = random_density(n, rng)
    s = collective_lowering(n)
    sd = s.conj().T
    want = 2 * s @ rho @ sd - sd @ s @ rho - rho @ sd @ s
    assert np.max(np.abs(apply_dissipator(rho) - want)) < 1e-13


def test_dissipator_rejects_bad_shapes():
    with pytest.raises(DomainError):
        apply_dissipator(np.zeros((3, 3)))
    with pytest.raises(DomainError):
        apply_dissipator(np.zeros((4, 2)))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
def test_dissipator_hermitian_traceless(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    H = A + A.conj().T
    out = apply_dissipator(H)
    assert np.max(np.abs(out - out.conj().T)) < 1e-12
    assert abs(np.trace(out)) < 1e-12


def test_excitation_number():
    psi = basis_state(4, [1, 3])
    assert excitation_number(ket_bra(psi, psi)) == pytest.approx(2.0)


def test_partial_trace_examples():
    n = 4
    G = basis_state(n)
    assert np.array_equal(partial_trace_pair(ket_bra(G, G), 2, 4), np.diag([1, 0, 0, 0]))
    K = basis_state(n, [1])
    assert np.array_equal(partial_trace_pair(ket_bra(K, K), 1, 3), np.diag([0, 0, 1, 0]))
    # order of the pair decides the slot
    assert np.array_equal(partial_trace_pair(ket_bra(K, K), 3, 1), np.diag([0, 1, 0, 0]))


def test_partial_trace_of_product_state():
    rng = np.random.default_rng(3)
    a, b, c = (random_density(1, rng) for _ in range(3))
    rho = np.kron(np.kron(a, b), c)
    assert np.allclose(partial_trace_pair(rho, 1, 3), np.kron(a, c))
    assert np.allclose(partial_trace_pair(rho, 3, 2), np.kron(c, b))


def test_partial_trace_errors():
    rho = np.eye(8) / 8
    with pytest.raises(DomainError):
        partial_trace_pair(rho, 2, 2)
    with pytest.raises(DomainError):
        partial_trace_pair(rho, 1, 4)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 5), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_partial_trace_is_a_density(n, seed, data):
    i = data.draw(st.integers(1, n))
    j = data.draw(st.integers(1, n).filter(lambda q: q != i))
    rng = np.random.default_rng(seed)
    red = partial_trace_pair(random_density(n, rng, rank=2), i, j)
    assert abs(np.trace(red) - 1) < 1e-12
    assert np.linalg.eigvalsh(red)[0] > -1e-10


def test_projection_handles_non_orthogonal_operators():
    rng = np.random.default_rng(5)
    ops = [rng.normal(size=(4, 4)) for _ in range(3)]
    ops.append(ops[0] + ops[1])  # rank deficient on purpose
    target = 2 * ops[0] - ops[2]
    coeffs, res = project_onto_operators(ops, target)
    assert res < 1e-12
    assert np.allclose(sum(c * op for c, op in zip(coeffs, ops)), target)
    _, res = project_onto_operators(ops[:2], ops[2])
    assert res > 1e-3


def test_closure_generator_first_line():
    # D|k><k| projects onto -2 |k><k| among the single-excitation operators
    n = 5
    K, E, G = basis_state(n, [1]), special_vector("E_not_k", n, 1), basis_state(n)
    ops = [ket_bra(G, G), ket_bra(K, K), ket_bra(E, E), sym_ket_bra(E, K)]
    gen, res = closure_generator(ops)
    assert res < 1e-12
    assert np.allclose(gen[:, 1], [2, -2, 0, -1])
