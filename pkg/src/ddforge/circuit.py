"""Circuit IR, exact unitary semantics, JSON round-trip."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .gates import Gate, apply_matrix

ORACLE_MAX_QUBITS = 10


class OracleScaleError(ValueError):
    pass


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    ops: tuple[Gate, ...] = ()
    name: str = ""

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        ops = tuple(self.ops)
        object.__setattr__(self, "ops", ops)
        measured: set[int] = set()
        for op in ops:
            qubits = op.qubits
            if op.name == "BARRIER" and not qubits:
                continue
            for q in qubits:
                if not 0 <= q < self.num_qubits:
                    raise ValueError(f"qubit {q} out of range in {op!r}")
            if measured.intersection(qubits) and op.name != "BARRIER":
                raise ValueError(f"{op!r} follows a measurement on the same qubit")
            if op.name == "MEASURE":
                measured.update(qubits)

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def replace(self, ops: Iterable[Gate], name: str | None = None) -> Circuit:
        return Circuit(self.num_qubits, tuple(ops), self.name if name is None else name)

    def has_measurements(self) -> bool:
        return any(op.name == "MEASURE" for op in self.ops)

    def measured_qubits(self) -> list[int]:
        return sorted({op.qubits[0] for op in self.ops if op.name == "MEASURE"})

    def without_measurements(self) -> Circuit:
        return self.replace(op for op in self.ops if op.name != "MEASURE")

    def inverse(self) -> Circuit:
        return self.replace(op.inverse() for op in reversed(self.ops) if op.name != "MEASURE")

    def count(self, name: str) -> int:
        return sum(op.name == name.upper() for op in self.ops)

    # -- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        ops = []
        for op in self.ops:
            entry = {"gate": op.name, "qubits": list(op.qubits), "params": list(op.params)}
            if op.duration is not None:
                entry["duration"] = op.duration
            ops.append(entry)
        return {"name": self.name, "num_qubits": self.num_qubits, "ops": ops}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> Circuit:
        ops = [
            Gate(o["gate"], tuple(o["qubits"]), tuple(o.get("params", ())), o.get("duration"))
            for o in data["ops"]
        ]
        return cls(int(data["num_qubits"]), tuple(ops), data.get("name", ""))

    @classmethod
    def from_json(cls, text: str) -> Circuit:
        return cls.from_dict(json.loads(text))


def unitary_of(circuit: Circuit) -> np.ndarray:
    """Dense unitary of ``circuit``; later gates multiply on the left."""
    n = circuit.num_qubits
    if n > ORACLE_MAX_QUBITS:
        raise OracleScaleError(f"oracle scale exceeded: {n} > {ORACLE_MAX_QUBITS} qubits")
    if circuit.has_measurements():
        raise OracleScaleError("oracle scale exceeded: circuit contains measurements")
    dim = 2**n
    # rows of `cols` are the columns of U, evolved as a batch of states
    cols = np.eye(dim, dtype=complex)
    for op in circuit.ops:
        if not op.is_unitary:
            continue
        cols = apply_matrix(cols, op.matrix(), op.qubits, n)
    return cols.T.copy()


def equiv_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return phase_fidelity(a, b) >= 1.0 - tol


def phase_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|tr(a^dagger b)| / dim."""
    return float(abs(np.vdot(a, b)) / a.shape[0])


def statevector(circuit: Circuit) -> np.ndarray:
    """Final state from |0...0>, ignoring measurements (no 10-qubit cap)."""
    n = circuit.num_qubits
    psi = np.zeros((1, 2**n), dtype=complex)
    psi[0, 0] = 1.0
    for op in circuit.ops:
        if op.is_unitary:
            psi = apply_matrix(psi, op.matrix(), op.qubits, n)
    return psi[0]


def ideal_distribution(circuit: Circuit) -> dict[str, float]:
    """Noiseless outcome probabilities over the measured qubits.

    Bitstring character ``i`` is the value of the i-th measured qubit in
    ascending qubit order. With no measurements every qubit is read out.
    """
    psi = statevector(circuit)
    measured = circuit.measured_qubits() or list(range(circuit.num_qubits))
    probs = np.abs(psi) ** 2
    idx = np.arange(probs.size)
    out: dict[str, float] = {}
    keys = np.zeros(probs.size, dtype=np.int64)
    for pos, q in enumerate(measured):
        keys |= ((idx >> q) & 1) << pos
    agg = np.bincount(keys, weights=probs, minlength=2 ** len(measured))
    for k, p in enumerate(agg):
        if p > 1e-15:
            out[format_bits(k, len(measured))] = float(p)
    return out


def format_bits(value: int, width: int) -> str:
    # character i <-> bit i, so the string reads in qubit order
    return "".join("1" if (value >> i) & 1 else "0" for i in range(width))
