import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wmdistill.bell_edp import decohered_bell_density
from wmdistill.channels import SIGMA_X, ad_kraus, nrwm_operator, transmit, weak_measurement_kraus
from wmdistill.exceptions import InvalidFilterError, KrausError, RegisterCapError
from wmdistill.qstate import (
    DensityMatrix,
    apply_channel,
    apply_cnot,
    apply_filter,
    apply_unitary,
    basis_state,
    bell_state,
    concurrence,
    fidelity_with_pure,
    measure_computational,
    partial_trace,
    superposition,
    tensor,
    tensor_power,
    w_state,
)

unit = st.floats(0.0, 0.99)


def random_density(rng, n):
    dim = 2**n
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho))


def random_unitary(rng):
    q, r = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return q * (np.diag(r) / abs(np.diag(r)))


def test_tensor_of_projectors():
    zero = basis_state("0").density()
    assert np.allclose(tensor(zero, zero).data, basis_state("00").density().data, atol=1e-15)


def test_tensor_of_maximally_mixed():
    mixed = DensityMatrix(np.eye(2) / 2)
    out = tensor(mixed, mixed)
    assert out.dim == 4
    assert np.allclose(out.data, np.eye(4) / 4, atol=1e-15)


def test_register_cap():
    with pytest.raises(RegisterCapError):
        tensor_power(basis_state("0").density(), 13)
    assert tensor_power(basis_state("0").density(), 12).n_qubits == 12


def test_density_is_read_only():
    rho = bell_state().density()
    with pytest.raises(ValueError):
        rho.data[0, 0] = 1.0


def test_channel_rejects_non_trace_preserving_set():
    with pytest.raises(KrausError):
        apply_channel(basis_state("1").density(), [np.eye(2) * 0.9], 0)


def test_filter_norm_guard():
    with pytest.raises(InvalidFilterError):
        apply_filter(basis_state("1").density(), np.diag([1.0, 1.1]), 0)


def test_filter_identity_on_excited():
    post, p = apply_filter(basis_state("1").density(), nrwm_operator(0.4), 0)
    assert p == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(post.data, basis_state("1").density().data)


def test_filter_on_plus_state():
    plus = superposition({"0": 1, "1": 1}).density()
    post, p = apply_filter(plus, nrwm_operator(0.75), 0)
    assert p == pytest.approx(0.625, abs=1e-15)
    expected = superposition({"0": math.sqrt(0.25), "1": 1.0}).density()
    assert np.allclose(post.data, expected.data, atol=1e-15)


def test_filter_zero_probability_branch():
    post, p = apply_filter(basis_state("0").density(), np.diag([0.0, 1.0]), 0)
    assert post is None and p == 0.0


def test_cnot_basis_action():
    assert np.allclose(apply_cnot(basis_state("10").density(), 0, 1).data, basis_state("11").density().data)
    assert np.allclose(apply_cnot(basis_state("00").density(), 0, 1).data, basis_state("00").density().data)
    with pytest.raises(ValueError):
        apply_cnot(basis_state("00").density(), 1, 1)


@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_cnot_involution(seed, n):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, n)
    c, t = rng.choice(n, size=2, replace=False)
    twice = apply_cnot(apply_cnot(rho, int(c), int(t)), int(c), int(t))
    assert np.max(np.abs(twice.data - rho.data)) < 1e-12


def test_measure_bell_marginals():
    out = {bits: p for bits, p, _ in measure_computational(bell_state().density(), [0, 1])}
    assert out == pytest.approx({"01": 0.5, "10": 0.5}, abs=1e-15)


def test_measure_single_qubit_of_ground():
    out = measure_computational(basis_state("00").density(), [1])
    assert [(b, round(p, 15)) for b, p, _ in out] == [("0", 1.0)]


def test_measure_after_bilateral_cnot():
    rho = decohered_bell_density(0.5, 0.5)
    pair = tensor(rho, rho)
    for q in range(2):
        pair = apply_cnot(pair, q, q + 2)
    out = {b: p for b, p, _ in measure_computational(pair, [2, 3])}
    assert out["11"] == pytest.approx(0.125, abs=1e-12)
    assert sum(out.values()) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_examples():
    assert fidelity_with_pure(transmit(w_state(3), [0.3] * 3), w_state(3)) == pytest.approx(0.7, abs=1e-12)
    assert fidelity_with_pure(bell_state().density(), bell_state()) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        fidelity_with_pure(bell_state().density(), w_state(3))


@given(unit)
def test_fidelity_of_symmetric_decohered_pair(d):
    assert fidelity_with_pure(decohered_bell_density(d, d), bell_state()) == pytest.approx(1 - d, abs=1e-12)


def test_concurrence_examples():
    assert concurrence(bell_state().density()) == pytest.approx(1.0, abs=1e-12)
    assert concurrence(decohered_bell_density(0.3, 0.7)) == pytest.approx(math.sqrt(0.21), abs=1e-12)
    assert concurrence(basis_state("00").density()) == pytest.approx(0.0, abs=1e-12)
    assert concurrence(DensityMatrix(np.eye(4) / 4)) == 0.0


@given(st.integers(0, 2**32 - 1))
def test_concurrence_invariant_under_local_unitaries(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 2)
    turned = apply_unitary(apply_unitary(rho, random_unitary(rng), 0), random_unitary(rng), 1)
    assert abs(concurrence(turned) - concurrence(rho)) < 1e-10


@given(st.integers(0, 2**32 - 1))
def test_concurrence_in_unit_interval(seed):
    c = concurrence(random_density(np.random.default_rng(seed), 2))
    assert 0.0 <= c <= 1.0


def test_partial_trace_examples():
    assert np.allclose(partial_trace(bell_state().density(), [0]).data, np.eye(2) / 2)
    assert np.allclose(partial_trace(basis_state("00").density(), [1]).data, np.diag([1, 0]))
    rho = decohered_bell_density(0.5, 0.5)
    for q in (0, 1):
        assert np.allclose(partial_trace(rho, [q]).data, np.diag([0.75, 0.25]), atol=1e-12)


def test_partial_trace_keeps_given_order():
    rho = basis_state("011").density()
    assert np.allclose(partial_trace(rho, [2, 0]).data, basis_state("10").density().data)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), unit)
def test_channel_preserves_trace_and_validity(seed, n, d):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, n)
    out = apply_channel(rho, ad_kraus(d), int(rng.integers(n)))
    assert abs(out.trace() - 1.0) < 1e-12
    assert out.is_valid()


@given(st.integers(0, 2**32 - 1), unit)
def test_weak_measurement_outcomes_sum_to_channel(seed, w):
    """Both outcomes together form a trace-preserving instrument."""
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 2)
    kraus = weak_measurement_kraus(w)
    whole = apply_channel(rho, kraus, 1)
    mixture = np.zeros((4, 4), dtype=complex)
    for k in kraus:
        post, p = apply_filter(rho, k, 1)
        if post is not None:
            mixture += p * post.data
    assert np.max(np.abs(whole.data - mixture)) < 1e-12


@given(unit)
def test_filter_is_bit_flipped_null_result(w):
    m0 = weak_measurement_kraus(w)[0]
    assert np.allclose(SIGMA_X @ m0 @ SIGMA_X, nrwm_operator(w))
