"""Linear-algebra layer: states, gates, measurements."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entrot import qmath
from entrot.qmath import (StateVector, apply_gate, expectation, fidelity,
                          haar_state, hermitian_eig2, kron, measure_qubit,
                          project_out, psd_sqrt2)

H = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)


def random_state(rng, labels):
    return haar_state(labels, rng.standard_normal(2 ** (len(labels) + 1)))


# ---------------------------------------------------------------- kron

def test_kron_pauli_z_pair_is_diagonal_sign_pattern():
    got = kron(qmath.SZ, qmath.SZ)
    assert np.array_equal(got, np.diag([1.0, -1.0, -1.0, 1.0]))


def test_kron_identity_left_and_right():
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    got = kron(m, np.eye(2))  # blocks m[i, j] * I
    assert got.shape == (4, 4)
    assert got[0, 0] == 1.0 and got[0, 2] == 2.0 and got[2, 0] == 3.0
    swapped = kron(np.eye(2), m)  # block-diagonal copies of m
    assert swapped[2, 2] == 1.0 and swapped[2, 3] == 2.0 and swapped[0, 2] == 0.0


def test_kron_rejects_oversized_result():
    with pytest.raises(ValueError):
        kron(np.eye(8), np.eye(4))


def test_kron_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        kron(np.eye(3), np.eye(2))


# ------------------------------------------------------ eigensolver

def test_hermitian_eig2_known_matrix():
    m = np.array([[1.0, -1j], [1j, 1.0]])
    w, v = hermitian_eig2(m)
    assert w == pytest.approx([0.0, 2.0], abs=1e-12)
    recon = (v * w) @ v.conj().T
    assert np.allclose(recon, m, atol=1e-12)


def test_hermitian_eig2_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eig2(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_psd_sqrt2_squares_back():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        m = a @ a.conj().T
        r = psd_sqrt2(m)
        assert np.allclose(r @ r, m, atol=1e-10)


def test_psd_sqrt2_clamps_roundoff_negative_eigenvalue():
    m = np.diag([1.0, -1e-12])
    r = psd_sqrt2(m)
    assert r[1, 1] == 0.0


def test_psd_sqrt2_rejects_clearly_negative():
    with pytest.raises(ValueError):
        psd_sqrt2(np.diag([1.0, -1e-6]))


# ------------------------------------------------------- StateVector

def test_basis_state_and_amplitude_layout():
    s = StateVector.basis(("p", "q"), "10")
    assert s.qubits == ("p", "q")
    assert np.array_equal(s.amps, [0, 0, 1, 0])


def test_state_requires_unique_labels_and_size_cap():
    with pytest.raises(ValueError):
        StateVector(("a", "a"), np.zeros(4))
    with pytest.raises(ValueError):
        StateVector(tuple("abcde"), np.zeros(32))


def test_state_amps_are_write_protected():
    s = StateVector.basis(("q",), "0")
    with pytest.raises(ValueError):
        s.amps[0] = 5.0


def test_norm_and_normalized():
    s = StateVector(("q",), [3.0, 4.0])
    assert s.norm() == pytest.approx(5.0)
    n = s.normalized()
    assert n.norm() == pytest.approx(1.0)
    assert np.allclose(n.amps, [0.6, 0.8])


def test_normalizing_null_state_fails():
    with pytest.raises(ValueError):
        StateVector(("q",), [0.0, 0.0]).normalized()


def test_tensor_orders_labels_left_to_right():
    left = StateVector.basis(("x",), "1")
    right = StateVector.basis(("y",), "0")
    joint = left.tensor(right)
    assert joint.qubits == ("x", "y")
    assert np.array_equal(joint.amps, [0, 0, 1, 0])


def test_tensor_rejects_label_collision():
    with pytest.raises(ValueError):
        StateVector.basis(("x",), "0").tensor(StateVector.basis(("x",), "0"))


def test_permuted_moves_amplitudes_consistently():
    rng = np.random.default_rng(0)
    s = random_state(rng, ("u", "v", "w"))
    p = s.permuted(("w", "u", "v"))
    assert p.qubits == ("w", "u", "v")
    # amplitude of |u=1, v=0, w=1>: index 101 in (u,v,w), 110 in (w,u,v)
    assert p.amps[0b110] == pytest.approx(s.amps[0b101])
    back = p.permuted(("u", "v", "w"))
    assert np.allclose(back.amps, s.amps)


# -------------------------------------------------------- apply_gate

def test_apply_single_qubit_gate_targets_right_axis():
    s = StateVector.basis(("p", "q"), "00")
    flipped = apply_gate(s, np.array([[0, 1], [1, 0]], dtype=complex), ("q",))
    assert np.array_equal(flipped.amps, [0, 1, 0, 0])


def test_apply_two_qubit_gate_respects_target_order():
    rng = np.random.default_rng(1)
    s = random_state(rng, ("p", "q"))
    lower = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
    upper = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
    g = kron(lower, upper)  # maps |0>_first |1>_second -> |10>
    a = apply_gate(s, g, ("p", "q"))
    b = apply_gate(s, g, ("q", "p"))
    assert a.amps[0b10] == pytest.approx(s.amps[0b01])
    assert b.amps[0b01] == pytest.approx(s.amps[0b10])


def test_apply_gate_preserves_norm_for_unitary():
    rng = np.random.default_rng(2)
    s = random_state(rng, ("p", "q", "r"))
    out = apply_gate(s, CZ, ("r", "p"))
    assert out.norm() == pytest.approx(1.0, abs=1e-12)


def test_apply_gate_rejects_unknown_target_and_bad_shape():
    s = StateVector.basis(("p", "q"), "00")
    with pytest.raises(ValueError):
        apply_gate(s, np.eye(2, dtype=complex), ("z",))
    with pytest.raises(ValueError):
        apply_gate(s, np.eye(4, dtype=complex), ("p",))


# ------------------------------------------------------ measurements

def test_fidelity_is_permutation_invariant():
    rng = np.random.default_rng(3)
    u = random_state(rng, ("p", "q"))
    v = random_state(rng, ("p", "q"))
    direct = fidelity(u, v)
    assert fidelity(u, v.permuted(("q", "p"))) == pytest.approx(direct, abs=1e-12)
    assert fidelity(u, u) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_requires_normalized_inputs():
    u = StateVector(("q",), [2.0, 0.0])
    v = StateVector.basis(("q",), "0")
    with pytest.raises(ValueError):
        fidelity(u, v)


def test_project_out_conditions_and_renormalizes():
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    s = StateVector(("p", "q"), [1.0, 2.0, 0.0, 0.0]).normalized()
    out = project_out(s, "q", plus)
    assert out.qubits == ("p",)
    assert out.norm() == pytest.approx(1.0)
    assert np.allclose(out.amps, [1.0, 0.0])


def test_project_out_zero_weight_raises():
    s = StateVector.basis(("p", "q"), "00")
    with pytest.raises(ValueError):
        project_out(s, "q", np.array([0.0, 1.0]))


def test_measure_qubit_threshold_convention():
    z = (np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    s = StateVector(("q", "r"), [math.sqrt(0.3), 0, 0, math.sqrt(0.7)])
    out0, red0 = measure_qubit(s, "q", z, 0.2999)
    out1, red1 = measure_qubit(s, "q", z, 0.3001)
    assert (out0, out1) == (0, 1)
    assert red0.qubits == ("r",) and red1.qubits == ("r",)
    assert np.allclose(red0.amps, [1.0, 0.0])
    assert np.allclose(red1.amps, [0.0, 1.0])


def test_measure_qubit_on_eigenstate_ignores_deviate():
    z = (np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    s = StateVector.basis(("q", "r"), "10")
    for u in (0.0, 0.5, 0.999999):
        out, _ = measure_qubit(s, "q", z, u)
        assert out == 1


def test_measure_qubit_rejects_bad_deviate():
    z = (np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    s = StateVector.basis(("q",), "0").tensor(StateVector.basis(("r",), "0"))
    with pytest.raises(ValueError):
        measure_qubit(s, "q", z, 1.0)


def test_expectation_on_product_state():
    plus = StateVector(("q",), np.array([1.0, 1.0]) / math.sqrt(2.0))
    s = plus.tensor(StateVector.basis(("r",), "0"))
    assert expectation(s, qmath.SX, "q") == pytest.approx(1.0)
    assert expectation(s, qmath.SX, "r") == pytest.approx(0.0)
    assert expectation(s, qmath.SZ, "r") == pytest.approx(1.0)


def test_haar_state_is_deterministic_and_normalized():
    normals = np.arange(8, dtype=float) - 3.5
    a = haar_state(("p", "q"), normals)
    b = haar_state(("p", "q"), normals)
    assert np.array_equal(a.amps, b.amps)
    assert a.norm() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        haar_state(("p", "q"), np.zeros(6))


# ------------------------------------------------- property checks

@given(st.integers(0, 2 ** 32 - 1))
def test_measurement_probabilities_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    s = random_state(rng, ("p", "q"))
    x = (np.array([1.0, 1.0]) / math.sqrt(2), np.array([1.0, -1.0]) / math.sqrt(2))
    _, r0 = measure_qubit(s, "p", x, 0.0)
    _, r1 = measure_qubit(s, "p", x, 0.999999999)
    assert r0.norm() == pytest.approx(1.0, abs=1e-12)
    assert r1.norm() == pytest.approx(1.0, abs=1e-12)
    p_plus = expectation(s, (np.eye(2) + qmath.SX) / 2.0, "p")
    p_minus = expectation(s, (np.eye(2) - qmath.SX) / 2.0, "p")
    assert p_plus + p_minus == pytest.approx(1.0, abs=1e-12)


@given(st.integers(0, 2 ** 32 - 1))
def test_unitaries_preserve_inner_products(seed):
    rng = np.random.default_rng(seed)
    u = random_state(rng, ("p", "q"))
    v = random_state(rng, ("p", "q"))
    before = fidelity(u, v)
    gu = apply_gate(apply_gate(u, CZ, ("p", "q")), H.astype(complex), ("q",))
    gv = apply_gate(apply_gate(v, CZ, ("p", "q")), H.astype(complex), ("q",))
    assert fidelity(gu, gv) == pytest.approx(before, abs=1e-12)
