"""Gate kinds, their matrices, and the batched state-update kernel.

Matrices use little-endian ordering: for a gate on ``qubits=(a, b)`` the
matrix index is ``bit_a + 2 * bit_b``. Two-qubit rotations put their first
Pauli factor on ``qubits[0]`` (so ``RZX`` has Z on the control).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FOUR_PI = 4.0 * math.pi

# name -> (number of qubits, number of params)
GATE_SPECS: dict[str, tuple[int, int]] = {
    "X": (1, 0),
    "Y": (1, 0),
    "SX": (1, 0),
    "H": (1, 0),
    "RZ": (1, 1),
    "RX": (1, 1),
    "RY": (1, 1),
    "CX": (2, 0),
    "CZ": (2, 0),
    "RZX": (2, 1),
    "RZZ": (2, 1),
    "RYY": (2, 1),
    "CP": (2, 1),
    "DELAY": (1, 0),
    "MEASURE": (1, 0),
    "BARRIER": (-1, 0),
}

NON_UNITARY = {"MEASURE"}
DIRECTIVES = {"DELAY", "BARRIER"}
PHYSICAL_PULSES = {"X", "Y", "SX", "RX", "RY"}


def reduce_angle(theta: float) -> float:
    """Fold ``theta`` into (-2pi, 2pi].

    Every rotation here is 4pi-periodic, so this never changes a unitary.
    """
    t = math.fmod(float(theta), FOUR_PI)
    if t > 2 * math.pi:
        t -= FOUR_PI
    elif t <= -2 * math.pi:
        t += FOUR_PI
    return t


@dataclass(frozen=True)
class Gate:
    """One operation of a circuit: a gate kind applied to specific qubits."""

    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    duration: int | None = None  # only meaningful for DELAY
    tag: str = field(default="", compare=False)

    def __post_init__(self):
        name = self.name.upper()
        if name not in GATE_SPECS:
            raise ValueError(f"unknown gate kind {self.name!r}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        nq, npar = GATE_SPECS[name]
        if nq > 0 and len(self.qubits) != nq:
            raise ValueError(f"{name} acts on {nq} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {name}{self.qubits}")
        if len(self.params) != npar:
            raise ValueError(f"{name} takes {npar} parameter(s), got {self.params}")
        object.__setattr__(self, "params", tuple(reduce_angle(p) for p in self.params))
        if name == "DELAY":
            if self.duration is None or int(self.duration) < 0:
                raise ValueError("DELAY needs a non-negative integer duration")
            object.__setattr__(self, "duration", int(self.duration))
        elif self.duration is not None:
            raise ValueError(f"{name} does not take a duration")

    @property
    def theta(self) -> float:
        return self.params[0]

    @property
    def num_qubits(self) -> int:
        return len(self.qubits)

    @property
    def is_unitary(self) -> bool:
        return self.name not in NON_UNITARY and self.name not in DIRECTIVES

    def matrix(self) -> np.ndarray:
        return gate_matrix(self.name, self.params)

    def inverse(self) -> Gate:
        if self.name in ("X", "Y", "H", "CX", "CZ"):
            return self
        if self.name == "SX":
            return Gate("RX", self.qubits, (-math.pi / 2,))
        if self.name in DIRECTIVES:
            return self
        if self.name == "MEASURE":
            raise ValueError("MEASURE has no inverse")
        return Gate(self.name, self.qubits, (-self.params[0],))

    def __repr__(self) -> str:
        args = ", ".join(f"{p:.6g}" for p in self.params)
        head = f"{self.name}({args})" if self.params else self.name
        if self.name == "DELAY":
            head = f"DELAY[{self.duration}]"
        return f"{head}@{list(self.qubits)}"


_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (_I2, _X, _Y, _Z)


def _rot(pauli: np.ndarray, theta: float) -> np.ndarray:
    # exp(-i theta/2 P) for any P with P^2 = I
    d = pauli.shape[0]
    return math.cos(theta / 2) * np.eye(d, dtype=complex) - 1j * math.sin(theta / 2) * pauli


def rx(theta: float) -> np.ndarray:
    return _rot(_X, theta)


def ry(theta: float) -> np.ndarray:
    return _rot(_Y, theta)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


_SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
# index = bit(q0) + 2*bit(q1); q0 is the control
_CX = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)


def gate_matrix(name: str, params: tuple[float, ...] = ()) -> np.ndarray:
    name = name.upper()
    if name == "X":
        return _X.copy()
    if name == "Y":
        return _Y.copy()
    if name == "SX":
        return _SX.copy()
    if name == "H":
        return _H.copy()
    if name == "RZ":
        return rz(params[0])
    if name == "RX":
        return rx(params[0])
    if name == "RY":
        return ry(params[0])
    if name == "CX":
        return _CX.copy()
    if name == "CZ":
        return _CZ.copy()
    if name == "RZX":
        return _rot(np.kron(_X, _Z), params[0])
    if name == "RZZ":
        return _rot(np.kron(_Z, _Z), params[0])
    if name == "RYY":
        return _rot(np.kron(_Y, _Y), params[0])
    if name == "CP":
        return np.diag([1, 1, 1, np.exp(1j * params[0])])
    if name in DIRECTIVES:
        return _I2.copy()
    raise ValueError(f"no matrix for gate kind {name!r}")


def _components(states: np.ndarray, qubits, num_qubits: int) -> list[np.ndarray]:
    """Views of ``states`` for each basis value of ``qubits`` (bit j of the index is qubits[j])."""
    psi = states.reshape((states.shape[0],) + (2,) * num_qubits)
    comps = []
    for idx in range(2 ** len(qubits)):
        key = [slice(None)] * (num_qubits + 1)
        for j, q in enumerate(qubits):
            # qubit q lives on axis 1 + (n - 1 - q)
            key[num_qubits - q] = (idx >> j) & 1
        comps.append(psi[tuple(key)])
    return comps


def apply_matrix(states: np.ndarray, mat: np.ndarray, qubits, num_qubits: int) -> np.ndarray:
    """Apply ``mat`` on ``qubits`` to a batch of states of shape (B, 2**n)."""
    out = np.empty_like(states, dtype=np.result_type(states, mat))
    src = _components(states, qubits, num_qubits)
    dst = _components(out, qubits, num_qubits)
    for i, d in enumerate(dst):
        row = mat[i]
        terms = [(row[j], s) for j, s in enumerate(src) if row[j] != 0]
        if not terms:
            d[...] = 0
            continue
        np.multiply(terms[0][1], terms[0][0], out=d)
        for c, s in terms[1:]:
            d += c * s
    return out


def apply_diagonal_phase(states: np.ndarray, qubit: int, angles: np.ndarray, num_qubits: int) -> np.ndarray:
    """Apply RZ(angles[b]) on ``qubit`` to each state b of the batch, in place."""
    idx = np.arange(states.shape[1])
    bit = (idx >> qubit) & 1
    phase = np.exp(0.5j * np.asarray(angles, dtype=float))[:, None]
    states *= np.where(bit[None, :] == 1, phase, phase.conj())
    return states
