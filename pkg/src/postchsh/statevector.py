"""Dense pure states of a few qubits and Pauli-string expectation values.

Amplitudes are stored in the computational (Z) basis with qubit 0 as the
leftmost tensor factor, so basis index ``b`` reads as the bit string
``b_0 b_1 ... b_{n-1}`` with ``b_0`` the most significant bit.  A Z outcome
of +1 corresponds to bit 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_QUBITS = 12
NORM_TOL = 1e-12
IMAG_TOL = 1e-9

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# y-spin eigenstates in the Z basis
Y_PLUS = np.array([1, 1j], dtype=complex) / np.sqrt(2)
Y_MINUS = np.array([1, -1j], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state on ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        n = int(self.num_qubits)
        if n < 1 or n > MAX_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {n}")
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**n:
            raise ValueError(f"expected {2**n} amplitudes for {n} qubits, got {amps.size}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (|psi|^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "num_qubits", n)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.size))) if amps.size else 0
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(n, amps)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis of length 2 per qubit."""
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))


@dataclass(frozen=True)
class PauliString:
    ops: str

    def __post_init__(self):
        ops = "".join(self.ops).upper()
        bad = set(ops) - set("IXYZ")
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {self.ops!r}")
        if not ops:
            raise ValueError("empty Pauli string")
        object.__setattr__(self, "ops", ops)

    def __len__(self):
        return len(self.ops)

    def __str__(self):
        return self.ops

    def matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for op in self.ops:
            out = np.kron(out, PAULI[op])
        return out


def product_state(factors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def make_ghz(num_qubits: int = 3) -> StateVector:
    """GHZ state written in the y-spin basis, (|+..+>_y + |-..->_y)/sqrt(2).

    For three qubits this equals (|000> - |011> - |101> - |110>)/2 in the
    Z basis and is stabilized by ZZZ (+1) and by ZXX, XZX, XXZ (-1 each).
    """
    if num_qubits < 2:
        raise ValueError(f"GHZ state needs at least 2 qubits, got {num_qubits}")
    return make_weighted_ghz(np.pi / 4, num_qubits=num_qubits)


def make_weighted_ghz(theta: float, num_qubits: int = 3) -> StateVector:
    """cos(theta)|+..+>_y + sin(theta)|-..->_y."""
    if num_qubits < 1 or num_qubits > MAX_QUBITS:
        raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")
    up = product_state([Y_PLUS] * num_qubits)
    down = product_state([Y_MINUS] * num_qubits)
    amps = np.cos(theta) * up + np.sin(theta) * down
    # |+..+> and |-..-> are orthogonal, so this only removes rounding drift
    amps = amps / np.linalg.norm(amps)
    return StateVector(num_qubits, amps)


def apply_single(tensor: np.ndarray, op: np.ndarray, qubit: int) -> np.ndarray:
    """Apply a 2x2 operator to one axis of an amplitude tensor."""
    moved = np.tensordot(op, tensor, axes=([1], [qubit]))
    return np.moveaxis(moved, 0, qubit)


def apply_pauli(state: StateVector, p: PauliString) -> np.ndarray:
    if len(p) != state.num_qubits:
        raise ValueError(
            f"Pauli string {p.ops!r} has length {len(p)}, state has {state.num_qubits} qubits"
        )
    t = state.tensor()
    for q, op in enumerate(p.ops):
        if op != "I":
            t = apply_single(t, PAULI[op], q)
    return t.reshape(-1)


def expectation(state: StateVector, p: PauliString | str) -> float:
    """<psi|P|psi> for a Pauli string ``p`` (e.g. ``"ZXX"``)."""
    if isinstance(p, str):
        p = PauliString(p)
    value = np.vdot(state.amplitudes, apply_pauli(state, p))
    if abs(value.imag) > IMAG_TOL:
        raise ArithmeticError(f"expectation of {p} has imaginary part {value.imag!r}")
    return float(value.real)
