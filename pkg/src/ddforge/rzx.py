"""Pulse-efficient rewrite: two-qubit rotations as echoed cross-resonance RZX."""

from __future__ import annotations

import math

from .circuit import Circuit
from .gates import Gate
from .transpile import PASSTHROUGH, merge_single_qubit_runs, ryy_conjugation


def fold_angle(theta: float) -> float:
    """Fold into (-pi, pi]."""
    t = math.remainder(theta, 2 * math.pi)
    return math.pi if t == -math.pi else t


def echoed_rzx(theta: float, control: int, target: int) -> list[Gate]:
    """RZX(theta) as two half-angle CR pulses echoed by X on the control."""
    qs = (control, target)
    return [
        Gate("RZX", qs, (theta / 2,)),
        Gate("X", (control,)),
        Gate("RZX", qs, (-theta / 2,)),
        Gate("X", (control,)),
    ]


def _to_plain_rzx(op: Gate) -> list[Gate]:
    name = op.name
    if op.num_qubits == 1 or name in PASSTHROUGH:
        return [op]
    a, b = op.qubits
    if name == "RZX":
        return [Gate("RZX", op.qubits, (fold_angle(op.theta),))]
    if name == "CX":
        # CX ~ RZ_c(pi/2) RX_t(pi/2) RZX(-pi/2); all three commute
        return [Gate("RZX", op.qubits, (-math.pi / 2,)), Gate("RZ", (a,), (math.pi / 2,)), Gate("SX", (b,))]
    if name == "RZZ":
        return [Gate("H", (b,)), *_to_plain_rzx(Gate("RZX", op.qubits, (op.theta,))), Gate("H", (b,))]
    if name == "CP":
        # CP(t) ~ RZ_a(t/2) RZ_b(t/2) RZZ(-t/2)
        t = op.theta
        return [
            Gate("RZ", (a,), (t / 2,)),
            Gate("RZ", (b,), (t / 2,)),
            *_to_plain_rzx(Gate("RZZ", op.qubits, (-t / 2,))),
        ]
    if name == "CZ":
        return _to_plain_rzx(Gate("CP", op.qubits, (math.pi,)))
    if name == "RYY":
        return ryy_conjugation(op, _to_plain_rzx)
    raise ValueError(f"unsupported gate kind {name!r}")


def rewrite_to_rzx(circuit: Circuit, durations=None) -> Circuit:
    """Rewrite to the {RZ, SX, X, RZX} basis with every RZX echoed.

    Each RZX op in the result is one physical cross-resonance pulse whose
    duration follows the angle model of ``durations``.
    """
    if durations is not None and durations.rzx_alpha is None:
        raise ValueError("duration table has no RZX angle model")
    plain: list[Gate] = []
    for op in circuit.ops:
        plain.extend(_to_plain_rzx(op))
    merged = merge_single_qubit_runs(circuit.replace(plain))
    echoed: list[Gate] = []
    for op in merged.ops:
        if op.name == "RZX":
            echoed.extend(echoed_rzx(op.theta, *op.qubits))
        else:
            echoed.append(op)
    return merge_single_qubit_runs(merged.replace(echoed))
