"""Amplitude-damping channels, null-result weak measurement filters, and
whole-register transmission."""
from __future__ import annotations

import numpy as np

from .qstate import DensityMatrix, PureState, apply_channel, apply_filter, as_density

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


def check_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value < 1.0:
        raise ValueError(f"{name} must lie in [0, 1), got {value}")
    return value


def ad_kraus(d: float) -> list[np.ndarray]:
    """Kraus pair of the amplitude-damping channel with damping rate ``d``."""
    d = check_unit_interval("damping rate d", d)
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - d)]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(d)], [0.0, 0.0]], dtype=complex)
    return [k0, k1]


def weak_measurement_kraus(w: float) -> list[np.ndarray]:
    """Both elements ``[M0, M1]`` of the weak measurement of strength ``w``.

    ``M0`` is the null result (no excitation registered).
    """
    w = check_unit_interval("measurement strength w", w)
    m0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - w)]], dtype=complex)
    m1 = np.array([[0.0, 0.0], [0.0, np.sqrt(w)]], dtype=complex)
    return [m0, m1]


def nrwm_operator(w: float) -> np.ndarray:
    """Bit-flipped null-result weak measurement, ``diag(sqrt(1 - w), 1)``."""
    w = check_unit_interval("measurement strength w", w)
    return np.diag([np.sqrt(1.0 - w), 1.0]).astype(complex)


def transmit(state: PureState | DensityMatrix, damping) -> DensityMatrix:
    """Send every qubit through its own amplitude-damping channel."""
    rho = as_density(state)
    damping = list(damping)
    if len(damping) != rho.n_qubits:
        raise ValueError(f"need {rho.n_qubits} damping rates, got {len(damping)}")
    for qubit, d in enumerate(damping):
        kraus = ad_kraus(d)
        if d != 0:
            rho = apply_channel(rho, kraus, qubit)
    return rho


def filter_all(state: DensityMatrix, strengths) -> tuple[DensityMatrix | None, float]:
    """Weak-measure every qubit and post-select on the null result everywhere.

    The filters commute, so they are applied one qubit at a time and the
    conditional success probabilities multiplied.
    """
    rho = as_density(state)
    strengths = list(strengths)
    if len(strengths) != rho.n_qubits:
        raise ValueError(f"need {rho.n_qubits} strengths, got {len(strengths)}")
    total = 1.0
    for qubit, w in enumerate(strengths):
        op = nrwm_operator(w)
        if w == 0:
            continue
        rho, p = apply_filter(rho, op, qubit)
        total *= p
        if rho is None:
            return None, 0.0
    return rho, total
