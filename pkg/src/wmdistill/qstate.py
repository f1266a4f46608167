"""Dense density-matrix engine for small qubit registers.

Qubit 0 is the leftmost (most significant) position of a basis label, so
``|01>`` has qubit 0 in ``|0>`` and qubit 1 in ``|1>``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidFilterError, KrausError, RegisterCapError

MAX_QUBITS = 12

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-12


def _num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector on ``n_qubits`` qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        _num_qubits(amps.size)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("zero state vector")
        if abs(norm - 1.0) > 1e-12:
            amps = _frozen(amps / norm)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def n_qubits(self) -> int:
        return _num_qubits(self.dim)

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Immutable density matrix of a register of qubits.

    ``data`` may carry a trace below one (unnormalized post-filter states);
    :meth:`normalized` rescales it.
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {data.shape}")
        n = _num_qubits(data.shape[0])
        if n > MAX_QUBITS:
            raise RegisterCapError(f"{n} qubits exceeds the register cap of {MAX_QUBITS}")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n_qubits(self) -> int:
        return _num_qubits(self.dim)

    def trace(self) -> float:
        return float(np.trace(self.data).real)

    @property
    def trace_normalized(self) -> bool:
        return abs(self.trace() - 1.0) <= TRACE_TOL

    def normalized(self) -> DensityMatrix:
        return DensityMatrix(self.data / self.trace())

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.data)

    def is_valid(self) -> bool:
        """Hermitian, positive semidefinite, trace in (0, 1]."""
        d = self.data
        if np.max(np.abs(d - d.conj().T), initial=0.0) > HERMITIAN_TOL:
            return False
        if self.eigenvalues()[0] < -PSD_TOL:
            return False
        tr = self.trace()
        return 0.0 < tr <= 1.0 + TRACE_TOL

    def entry(self, row: str, col: str | None = None) -> complex:
        """Matrix element addressed by basis labels, e.g. ``entry("01", "10")``."""
        col = row if col is None else col
        return complex(self.data[int(row, 2), int(col, 2)])

    def __repr__(self):
        return f"DensityMatrix(n_qubits={self.n_qubits}, trace={self.trace():.6g})"


def basis_state(bits: str) -> PureState:
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[int(bits, 2)] = 1.0
    return PureState(amps)


def superposition(terms: dict[str, complex]) -> PureState:
    """Pure state from a ``{bitstring: amplitude}`` map (normalized)."""
    n = len(next(iter(terms)))
    amps = np.zeros(2**n, dtype=complex)
    for bits, amp in terms.items():
        if len(bits) != n:
            raise ValueError("all basis labels must have the same length")
        amps[int(bits, 2)] += amp
    return PureState(amps)


def bell_state() -> PureState:
    """(|01> + |10>)/sqrt(2)."""
    return superposition({"01": 1.0, "10": 1.0})


def ghz_state() -> PureState:
    """(|001> + |110>)/sqrt(2)."""
    return superposition({"001": 1.0, "110": 1.0})


def w_state(n: int) -> PureState:
    if n < 2:
        raise ValueError("W state needs at least two qubits")
    return superposition({format(1 << k, f"0{n}b"): 1.0 for k in range(n)})


def as_density(state: DensityMatrix | PureState) -> DensityMatrix:
    if isinstance(state, PureState):
        return state.density()
    if isinstance(state, DensityMatrix):
        return state
    return DensityMatrix(state)


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    a, b = as_density(a), as_density(b)
    if a.n_qubits + b.n_qubits > MAX_QUBITS:
        raise RegisterCapError(
            f"{a.n_qubits + b.n_qubits} qubits exceeds the register cap of {MAX_QUBITS}"
        )
    return DensityMatrix(np.kron(a.data, b.data))


def tensor_power(state: DensityMatrix, copies: int) -> DensityMatrix:
    out = as_density(state)
    for _ in range(copies - 1):
        out = tensor(out, state)
    return out


def _check_qubit(n: int, qubit: int) -> None:
    if not 0 <= qubit < n:
        raise IndexError(f"qubit {qubit} out of range for a {n}-qubit register")


def _hermitize(data: np.ndarray) -> np.ndarray:
    return 0.5 * (data + data.conj().T)


def _conjugate_local(data: np.ndarray, op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    # op @ rho @ op^dagger restricted to one qubit, via reshaping instead of kron
    left, right = 2**qubit, 2 ** (n - qubit - 1)
    t = data.reshape(left, 2, right, left, 2, right)
    t = np.einsum("ab,ibjkcl,dc->iajkdl", op, t, op.conj(), optimize=True)
    return t.reshape(data.shape)


def apply_channel(state: DensityMatrix, kraus, qubit: int) -> DensityMatrix:
    """Apply the trace-preserving map ``rho -> sum_k K rho K^dagger`` to one qubit."""
    state = as_density(state)
    _check_qubit(state.n_qubits, qubit)
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    completeness = sum(k.conj().T @ k for k in kraus)
    if np.max(np.abs(completeness - np.eye(2))) > 1e-12:
        raise KrausError("Kraus operators are not trace preserving")
    out = sum(_conjugate_local(state.data, k, qubit, state.n_qubits) for k in kraus)
    return DensityMatrix(_hermitize(out))


def apply_filter(state: DensityMatrix, op, qubit: int) -> tuple[DensityMatrix | None, float]:
    """Apply a single measurement element and post-select on it.

    Returns the renormalized state and the conditional success probability.
    A zero-probability outcome yields ``(None, 0.0)``.
    """
    state = as_density(state)
    _check_qubit(state.n_qubits, qubit)
    op = np.asarray(op, dtype=complex)
    if np.linalg.norm(op, 2) > 1.0 + 1e-12:
        raise InvalidFilterError("filter operator norm exceeds 1")
    out = _hermitize(_conjugate_local(state.data, op, qubit, state.n_qubits))
    prob = float(np.trace(out).real) / state.trace()
    if prob <= 0.0:
        return None, 0.0
    return DensityMatrix(out / np.trace(out).real), min(prob, 1.0)


def _cnot_permutation(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(2**n)
    cbit = 1 << (n - 1 - control)
    tbit = 1 << (n - 1 - target)
    return np.where(idx & cbit, idx ^ tbit, idx)


def apply_cnot(state: DensityMatrix, control: int, target: int) -> DensityMatrix:
    state = as_density(state)
    n = state.n_qubits
    _check_qubit(n, control)
    _check_qubit(n, target)
    if control == target:
        raise ValueError("control and target must differ")
    perm = _cnot_permutation(n, control, target)
    return DensityMatrix(state.data[np.ix_(perm, perm)])


def apply_unitary(state: DensityMatrix, u, qubit: int) -> DensityMatrix:
    state = as_density(state)
    _check_qubit(state.n_qubits, qubit)
    return DensityMatrix(_conjugate_local(state.data, np.asarray(u, dtype=complex), qubit, state.n_qubits))


def partial_trace(state: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on the qubits in ``keep`` (kept in the order given)."""
    state = as_density(state)
    n = state.n_qubits
    keep = list(keep)
    if not keep or len(set(keep)) != len(keep):
        raise ValueError("keep must be a non-empty list of distinct qubits")
    for q in keep:
        _check_qubit(n, q)
    traced = [q for q in range(n) if q not in keep]
    t = state.data.reshape([2] * (2 * n))
    t = t.transpose(keep + traced + [n + q for q in keep] + [n + q for q in traced])
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    t = t.reshape(dk, dt, dk, dt)
    return DensityMatrix(np.einsum("ajbj->ab", t))


def measure_computational(state: DensityMatrix, qubits) -> list[tuple[str, float, DensityMatrix]]:
    """Projective Z-basis measurement of ``qubits``.

    Returns ``(outcome, probability, post_state)`` for every outcome with
    nonzero probability; ``post_state`` lives on the unmeasured qubits (a
    1x1 matrix when everything is measured). Probabilities are absolute, so
    they sum to the trace of the input.
    """
    state = as_density(state)
    n = state.n_qubits
    qubits = list(qubits)
    if len(set(qubits)) != len(qubits):
        raise ValueError("measured qubits must be distinct")
    for q in qubits:
        _check_qubit(n, q)
    rest = [q for q in range(n) if q not in qubits]
    k = len(qubits)
    t = state.data.reshape([2] * (2 * n))
    t = t.transpose(qubits + rest + [n + q for q in qubits] + [n + q for q in rest])
    dm, dr = 2**k, 2 ** len(rest)
    t = t.reshape(dm, dr, dm, dr)

    results = []
    for outcome in range(dm):
        block = t[outcome, :, outcome, :]
        prob = float(np.trace(block).real)
        if prob <= 1e-300:
            continue
        bits = format(outcome, f"0{k}b") if k else ""
        results.append((bits, prob, DensityMatrix(_hermitize(block) / prob)))
    return results


def fidelity_with_pure(state: DensityMatrix, target: PureState) -> float:
    state = as_density(state)
    if state.dim != target.dim:
        raise ValueError(f"dimension mismatch: {state.dim} vs {target.dim}")
    psi = target.amplitudes
    return float(np.real(psi.conj() @ state.data @ psi))


_SY_SY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]])).real


def concurrence(state: DensityMatrix) -> float:
    """Wootters concurrence of a two-qubit state.

    With ``rho = A A^dagger`` the Wootters numbers are the singular values of
    ``A^T (sy x sy) A``. Taking singular values directly avoids square roots
    of eigenvalue round-off, which would cost eight digits on rank-deficient
    states.
    """
    state = as_density(state)
    if state.dim != 4:
        raise ValueError("concurrence is defined here for two-qubit states only")
    evals, evecs = np.linalg.eigh(state.data)
    a = evecs * np.sqrt(np.clip(evals, 0.0, None))
    lam = np.linalg.svd(a.T @ _SY_SY @ a, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))
