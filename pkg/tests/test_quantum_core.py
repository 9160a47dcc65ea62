import itertools

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian, random_state, random_unitary
from hybridyn.model import ModelParams, build_h_spin_sc, pauli_ops
from hybridyn.quantum_core import (
    BadLayout,
    NotHermitian,
    check_hermitian,
    dagger,
    eig_hermitian,
    kron,
    partial_trace,
    reduce_pure,
    von_neumann_entropy,
)
from hybridyn.scenarios import build_ghz

LN2 = float(mpmath.log(2))


# --- kron / dagger ---------------------------------------------------------


def test_kron_matches_numpy(rng):
    a, b, c = (rng.normal(size=(k, k)) for k in (4, 2, 2))
    assert np.array_equal(kron(a, b, c), np.kron(np.kron(a, b), c))


def test_kron_associative(rng):
    a, b, c = (random_hermitian(rng, k) for k in (4, 2, 2))
    assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) <= 1e-14


def test_dagger_examples(rng):
    _, sp, sm = pauli_ops()
    assert np.array_equal(dagger(np.eye(3)), np.eye(3))
    assert np.array_equal(dagger(sp), sm)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    assert np.array_equal(dagger(dagger(a)), a)


def test_check_hermitian_rejects():
    with pytest.raises(NotHermitian):
        check_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))
    check_hermitian(np.array([[1, 1j], [-1j, 2]]))


# --- eigensolver -------------------------------------------------------------


def test_eig_diag():
    w, v = eig_hermitian(np.diag([3.0, 1.0, 2.0]).astype(complex))
    assert np.allclose(w, [1, 2, 3], atol=1e-14)
    assert np.allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])


def test_eig_sigma_x():
    w, _ = eig_hermitian(np.array([[0, 1], [1, 0]], dtype=complex))
    assert np.allclose(w, [-1, 1], atol=1e-15)


def test_eig_free_spin_hamiltonian():
    parts = build_h_spin_sc(0.0, 0.0, ModelParams(omega_s=1.0))
    w, _ = eig_hermitian(parts.spin_generator)
    assert np.allclose(w, [-1, 0, 0, 1], atol=1e-14)


def test_eig_2x2_tiny_offdiagonal():
    a = np.array([[0.3, 5e-320 + 5e-320j], [5e-320 - 5e-320j, 0.7]])
    with np.errstate(all="raise"):
        w, v = eig_hermitian(a)
    assert np.allclose(w, [0.3, 0.7]) and np.allclose(np.abs(v), np.eye(2))


def test_eig_not_hermitian():
    with pytest.raises(NotHermitian):
        eig_hermitian(np.array([[1, 2], [0, 1]], dtype=complex))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 8, 16])
def test_eig_reconstruction_and_orthonormality(rng, n):
    for _ in range(10):
        a = random_hermitian(rng, n, scale=rng.uniform(0.1, 100))
        w, v = eig_hermitian(a)
        scale = np.max(np.abs(a))
        assert np.all(np.diff(w) >= 0)
        assert np.max(np.abs((v * w) @ v.conj().T - a)) <= 1e-10 * scale
        assert np.max(np.abs(a @ v - v * w)) <= 1e-10 * scale
        assert np.max(np.abs(v.conj().T @ v - np.eye(n))) <= 1e-10
        # numpy as independent oracle for the spectrum
        assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-10 * scale)


def test_eig_degenerate_spectrum(rng):
    u = random_unitary(rng, 16)
    d = np.repeat([0.5, 1.5, 2.5, 3.5], 4)
    a = (u * d) @ u.conj().T
    a = (a + a.conj().T) / 2
    w, v = eig_hermitian(a)
    assert np.allclose(w, d, atol=1e-12)
    assert np.max(np.abs(v.conj().T @ v - np.eye(16))) <= 1e-10


# --- partial trace -----------------------------------------------------------


def _loop_partial_trace(rho, keep):
    """Index-by-index reduction over the (osc, s1, s2) layout."""
    out = np.zeros((2, 2), dtype=complex)
    for n, s1, s2, t1, t2 in itertools.product(range(4), range(2), range(2), range(2), range(2)):
        if keep == "spin1":
            i, j, a, b = 4 * n + 2 * s1 + s2, 4 * n + 2 * t1 + s2, s1, t1
        else:
            i, j, a, b = 4 * n + 2 * s1 + s2, 4 * n + 2 * s1 + t2, s2, t2
        if keep == "spin1" and t2 != s2:
            continue
        if keep == "spin2" and t1 != s1:
            continue
        out[a, b] += rho[i, j]
    return out


def test_ghz_reduces_to_maximally_mixed():
    psi = build_ghz()
    rho = np.outer(psi, psi.conj())
    for keep in ("spin1", "spin2"):
        assert np.allclose(partial_trace(rho, keep), np.eye(2) / 2, atol=1e-15)


def test_product_state_reduces_to_projector():
    psi = np.zeros(16, dtype=complex)
    psi[0] = 1  # |0,+,+>
    red = partial_trace(np.outer(psi, psi.conj()), "spin1")
    assert np.array_equal(red, np.array([[1, 0], [0, 0]], dtype=complex))


def test_partial_trace_random_pure(rng):
    for _ in range(20):
        psi = random_state(rng, 16)
        rho = np.outer(psi, psi.conj())
        for keep in ("spin1", "spin2"):
            red = partial_trace(rho, keep)
            assert abs(np.trace(red) - 1) <= 1e-12
            w = np.linalg.eigvalsh(red)
            assert np.all(w >= -1e-12) and np.all(w <= 1 + 1e-12)
            assert np.allclose(red, _loop_partial_trace(rho, keep), atol=1e-14)
            assert np.allclose(reduce_pure(psi, keep), red, atol=1e-14)


def test_partial_trace_of_products(rng):
    factors = []
    for n in (4, 2, 2):
        v = random_state(rng, n)
        factors.append(np.outer(v, v.conj()))
    rho = kron(*factors)
    assert np.max(np.abs(partial_trace(rho, "spin1") - factors[1])) <= 1e-12
    assert np.max(np.abs(partial_trace(rho, "spin2") - factors[2])) <= 1e-12
    assert np.max(np.abs(partial_trace(rho, "oscillator") - factors[0])) <= 1e-12
    two = np.kron(factors[1], factors[2])
    assert np.max(np.abs(partial_trace(two, "spin2") - factors[2])) <= 1e-12


def test_partial_trace_bad_layout():
    with pytest.raises(BadLayout):
        partial_trace(np.eye(6) / 6, "spin1")
    with pytest.raises(BadLayout):
        partial_trace(np.eye(16) / 16, "spin1", layout=(2, 2, 2))


# --- entropy -------------------------------------------------------------------


def _entropy_oracle(evals):
    return float(-mpmath.fsum(mpmath.mpf(x) * mpmath.log(mpmath.mpf(x)) for x in evals if x > 0))


def test_entropy_examples():
    assert abs(von_neumann_entropy(np.eye(2) / 2) - LN2) <= 1e-15
    assert von_neumann_entropy(np.diag([1.0, 0.0])) == 0.0
    s = von_neumann_entropy(np.diag([0.25, 0.75]))
    assert abs(s - _entropy_oracle([0.25, 0.75])) <= 1e-14
    assert abs(s - 0.5623351) <= 1e-7


def test_entropy_clamps_tiny_negative_eigenvalues():
    s = von_neumann_entropy(np.diag([1.0 + 5e-13, -5e-13]))
    assert 0.0 <= s <= 1e-10


def test_entropy_bounds_and_unitary_invariance(rng):
    for n in (2, 4):
        for _ in range(10):
            psi = random_state(rng, n * 3)
            m = psi.reshape(n, 3)
            rho = m @ m.conj().T
            s = von_neumann_entropy(rho)
            assert 0 <= s <= np.log(n) + 1e-12
            assert abs(s - _entropy_oracle(np.linalg.eigvalsh(rho))) <= 1e-12
            u = random_unitary(rng, n)
            assert abs(von_neumann_entropy(u @ rho @ u.conj().T) - s) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(p=st.floats(0.0, 1.0), phase=st.floats(0, 2 * np.pi))
def test_entropy_of_qubit_mixture(p, phase):
    u = np.array([[np.cos(phase), -np.sin(phase)], [np.sin(phase), np.cos(phase)]])
    rho = u @ np.diag([p, 1 - p]) @ u.T
    expected = _entropy_oracle([p, 1 - p])
    assert abs(von_neumann_entropy(rho.astype(complex)) - expected) <= 1e-10
