"""Dense state-vector backend: registers, gates, measurement, partial traces.

Index convention: qubit 0 is the leftmost ket symbol and the most
significant bit of the basis index, so for three qubits the basis state
|XYZ> sits at index 4X + 2Y + Z. All stored states are normalized; gates
never renormalize, so norm preservation is a checkable property rather
than an enforced one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ALGEBRA_TOL = 1e-12   # tolerance for algebraic identities (unitarity, norms)
INPUT_TOL = 1e-9      # tolerance for user-supplied amplitudes

MAX_QUBITS = 8


class NormalizationError(ValueError):
    """Raised when supplied amplitudes are not a unit-norm quantum state."""


class StateVector:
    """Immutable complex amplitude array over the 2^n computational basis states.

    The public constructor accepts amplitudes whose norm is within
    ``INPUT_TOL`` of 1 and snaps them to exact unit norm; pass
    ``normalize=True`` to accept any nonzero vector and rescale it.
    """

    __slots__ = ("_amps", "_num_qubits")

    def __init__(self, amps, *, normalize: bool = False):
        arr = np.array(amps, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(arr.view(float))):
            raise ValueError("amplitudes must be finite")
        n = arr.size.bit_length() - 1
        if arr.size != (1 << n) or not (1 <= n <= MAX_QUBITS):
            raise ValueError(
                f"amplitude count must be 2^n with 1 <= n <= {MAX_QUBITS}, got {arr.size}"
            )
        norm = float(np.linalg.norm(arr))
        if normalize:
            if norm < 1e-15:
                raise NormalizationError("cannot normalize a zero vector")
        elif abs(norm - 1.0) > INPUT_TOL:
            raise NormalizationError(f"state norm is {norm}, expected 1 within {INPUT_TOL}")
        arr /= norm
        arr.flags.writeable = False
        self._amps = arr
        self._num_qubits = n

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "StateVector":
        # Trusted path for gate outputs: no validation, no renormalization.
        sv = object.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=complex)
        arr.flags.writeable = False
        sv._amps = arr
        sv._num_qubits = arr.size.bit_length() - 1
        return sv

    @property
    def amps(self) -> np.ndarray:
        return self._amps

    @property
    def num_qubits(self) -> int:
        return self._num_qubits

    def probabilities(self) -> np.ndarray:
        return np.abs(self._amps) ** 2

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self._num_qubits}, amps={self._amps!r})"


@dataclass(frozen=True)
class MeasurementOutcome:
    """Result of a single computational-basis measurement."""

    qubit: int
    bit: int
    probability: float


class DensityMatrix:
    """Validated Hermitian, trace-1, positive-semidefinite matrix."""

    __slots__ = ("_matrix",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(m - m.conj().T)) > ALGEBRA_TOL:
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(m).real - 1.0) > ALGEBRA_TOL:
            raise ValueError(f"density matrix trace is {np.trace(m)}, expected 1")
        if np.min(np.linalg.eigvalsh(m)) < -1e-10:
            raise ValueError("density matrix must be positive semidefinite")
        m.flags.writeable = False
        self._matrix = m

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim})"


# Single-qubit gates. ZX = Z @ X (bit flip, then phase flip).
IDENTITY = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_ZX = PAULI_Z @ PAULI_X
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

GATES: dict[str, np.ndarray] = {
    "I": IDENTITY,
    "X": PAULI_X,
    "Z": PAULI_Z,
    "ZX": PAULI_ZX,
    "H": HADAMARD,
}


def require_unitary(gate: np.ndarray, tol: float = ALGEBRA_TOL) -> np.ndarray:
    """Return ``gate`` as a 2x2 complex array, raising if it is not unitary."""
    u = np.asarray(gate, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 gate, got shape {u.shape}")
    if np.max(np.abs(u @ u.conj().T - np.eye(2))) > tol:
        raise ValueError("gate is not unitary")
    return u


def _check_qubit(state: StateVector, q: int) -> None:
    if not 0 <= q < state.num_qubits:
        raise ValueError(f"qubit {q} out of range for {state.num_qubits}-qubit register")


def bell_pair() -> StateVector:
    """Two-qubit maximally entangled state (|00> + |11>)/sqrt(2)."""
    return ghz(2)


def ghz(n: int) -> StateVector:
    """n-qubit entangled state (|0...0> + |1...1>)/sqrt(2), 2 <= n <= 8."""
    if not 2 <= n <= MAX_QUBITS:
        raise ValueError(f"ghz size must be in 2..{MAX_QUBITS}, got {n}")
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return StateVector._wrap(amps)


def product_state(unknown: tuple[complex, complex], entangled: StateVector) -> StateVector:
    """Tensor an unknown single qubit (a, b) onto the left of ``entangled``.

    The unknown qubit becomes qubit 0 (most significant). Both factors must
    be normalized within ``INPUT_TOL``.
    """
    a, b = complex(unknown[0]), complex(unknown[1])
    if not (math.isfinite(a.real) and math.isfinite(a.imag)
            and math.isfinite(b.real) and math.isfinite(b.imag)):
        raise ValueError("unknown-state amplitudes must be finite")
    nrm = abs(a) ** 2 + abs(b) ** 2
    if abs(nrm - 1.0) > INPUT_TOL:
        raise NormalizationError(f"|a|^2 + |b|^2 is {nrm}, expected 1 within {INPUT_TOL}")
    if entangled.num_qubits >= MAX_QUBITS:
        raise ValueError("register would exceed the maximum size")
    amps = np.concatenate([a * entangled.amps, b * entangled.amps])
    return StateVector._wrap(amps)


def apply_single(state: StateVector, gate: np.ndarray, q: int) -> StateVector:
    """Apply a 2x2 unitary to qubit ``q``."""
    u = require_unitary(gate)
    _check_qubit(state, q)
    t = state.amps.reshape((2,) * state.num_qubits)
    t = np.moveaxis(np.tensordot(u, t, axes=([1], [q])), 0, q)
    return StateVector._wrap(t.reshape(-1))


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    """Flip ``target`` on every basis state where ``control`` is 1."""
    if control == target:
        raise ValueError("control and target must differ")
    _check_qubit(state, control)
    _check_qubit(state, target)
    n = state.num_qubits
    cmask = 1 << (n - 1 - control)
    tmask = 1 << (n - 1 - target)
    idx = np.arange(state.amps.size)
    src = np.where((idx & cmask) != 0, idx ^ tmask, idx)
    return StateVector._wrap(state.amps[src])


def chained_xor(state: StateVector, qubits: list[int]) -> StateVector:
    """Apply CNOTs along consecutive pairs of ``qubits``, correlating alternates."""
    if len(qubits) < 2:
        raise ValueError("chained_xor needs at least two qubits")
    if len(set(qubits)) != len(qubits):
        raise ValueError("chained_xor qubits must be distinct")
    for control, target in zip(qubits, qubits[1:]):
        state = apply_cnot(state, control, target)
    return state


def measure(state: StateVector, q: int, rand: float) -> tuple[MeasurementOutcome, StateVector]:
    """Projective computational-basis measurement of qubit ``q``.

    ``rand`` is a uniform draw in [0, 1); the outcome is 0 iff
    ``rand < P(bit=0)``. Returns the exact Born probability of the
    observed outcome and the renormalized post-collapse state. A branch
    with exactly zero probability is never selected.
    """
    _check_qubit(state, q)
    if not 0.0 <= rand < 1.0:
        raise ValueError(f"rand must lie in [0, 1), got {rand}")
    n = state.num_qubits
    bits = (np.arange(state.amps.size) >> (n - 1 - q)) & 1
    p0 = float(np.sum(np.abs(state.amps[bits == 0]) ** 2))
    bit = 0 if rand < p0 else 1
    prob = p0 if bit == 0 else 1.0 - p0
    if prob <= 0.0:
        bit ^= 1
        prob = 1.0 - prob
    collapsed = np.where(bits == bit, state.amps, 0.0) / math.sqrt(prob)
    return MeasurementOutcome(q, bit, prob), StateVector._wrap(collapsed)


def reduced_density(state: StateVector, keep: set[int]) -> DensityMatrix:
    """Partial trace onto the qubits in ``keep`` (ascending qubit order)."""
    kept = sorted(keep)
    if not kept:
        raise ValueError("keep set must be nonempty")
    for q in kept:
        _check_qubit(state, q)
    n = state.num_qubits
    k = len(kept)
    t = state.amps.reshape((2,) * n)
    t = np.moveaxis(t, kept, range(k)).reshape(1 << k, -1)
    return DensityMatrix(t @ t.conj().T)


def fidelity(psi: StateVector, phi: StateVector) -> float:
    """Squared overlap |<psi|phi>|^2, invariant under global phase."""
    if psi.num_qubits != phi.num_qubits:
        raise ValueError("fidelity requires equal register sizes")
    value = abs(np.vdot(psi.amps, phi.amps)) ** 2
    return float(min(1.0, max(0.0, value)))
