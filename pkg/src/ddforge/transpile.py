"""Basis decomposition and single-qubit resynthesis (RZ-SX-RZ-SX-RZ)."""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .circuit import Circuit
from .gates import Gate

_TOL = 1e-9


class BasisSet(Enum):
    CX_BASIS = frozenset({"RZ", "SX", "X", "CX"})
    RZX_BASIS = frozenset({"RZ", "SX", "X", "RZX"})

    @property
    def gates(self) -> frozenset[str]:
        return self.value


PASSTHROUGH = {"DELAY", "BARRIER", "MEASURE"}
ONE_QUBIT_BASIS = {"RZ", "SX", "X"}


def zyz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """Return (theta, phi, lam) with u ~ RZ(phi) RY(theta) RZ(lam) up to phase."""
    u = np.asarray(u, dtype=complex)
    v = u / np.sqrt(np.linalg.det(u))
    theta = 2.0 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    if abs(v[0, 0]) < _TOL:
        # theta = pi: only phi - lam is defined
        phi_plus_lam = 0.0
        phi_minus_lam = 2.0 * np.angle(v[1, 0])
    elif abs(v[1, 0]) < _TOL:
        phi_plus_lam = 2.0 * np.angle(v[1, 1])
        phi_minus_lam = 0.0
    else:
        phi_plus_lam = 2.0 * np.angle(v[1, 1])
        phi_minus_lam = 2.0 * np.angle(v[1, 0])
    phi = 0.5 * (phi_plus_lam + phi_minus_lam)
    lam = 0.5 * (phi_plus_lam - phi_minus_lam)
    return theta, phi, lam


def _is_trivial_rz(angle: float) -> bool:
    # RZ(2k*pi) is +-I
    r = math.remainder(angle, 2 * math.pi)
    return abs(r) < _TOL


def _rz(q: int, angle: float) -> list[Gate]:
    return [] if _is_trivial_rz(angle) else [Gate("RZ", (q,), (angle,))]


def synthesize_1q(u: np.ndarray, qubit: int) -> list[Gate]:
    """Time-ordered RZ/SX/X gates implementing ``u`` up to global phase.

    Uses the fewest physical pulses: none for diagonal unitaries, one SX for
    a pi/2 polar angle, one X for a pi polar angle, otherwise two SX.
    """
    theta, phi, lam = zyz_angles(u)
    q = qubit
    if abs(theta) < _TOL:
        return _rz(q, phi + lam)
    if abs(theta - math.pi / 2) < _TOL:
        return _rz(q, lam - math.pi / 2) + [Gate("SX", (q,))] + _rz(q, phi + math.pi / 2)
    if abs(theta - math.pi) < _TOL:
        return _rz(q, lam + math.pi) + [Gate("X", (q,))] + _rz(q, phi)
    return (
        _rz(q, lam)
        + [Gate("SX", (q,))]
        + _rz(q, theta + math.pi)
        + [Gate("SX", (q,))]
        + _rz(q, phi + math.pi)
    )


def merge_single_qubit_runs(circuit: Circuit) -> Circuit:
    """Collapse each maximal run of 1q gates on a qubit into its ZXZXZ form.

    Runs are broken by multi-qubit gates, delays, barriers and measurements.
    A run that is already a single basis gate is left untouched.
    """
    n = circuit.num_qubits
    pending: list[list[Gate]] = [[] for _ in range(n)]
    out: list[Gate] = []

    def flush(q: int):
        run = pending[q]
        if not run:
            return
        if len(run) == 1 and run[0].name in ONE_QUBIT_BASIS:
            out.append(run[0])
        else:
            u = np.eye(2, dtype=complex)
            for g in run:
                u = g.matrix() @ u
            out.extend(synthesize_1q(u, q))
        pending[q] = []

    for op in circuit.ops:
        if op.num_qubits == 1 and op.is_unitary:
            pending[op.qubits[0]].append(op)
            continue
        touched = op.qubits if op.qubits else range(n)
        for q in touched:
            flush(q)
        out.append(op)
    for q in range(n):
        flush(q)
    return circuit.replace(out)


def _cx_rules(op: Gate) -> list[Gate]:
    name, qs = op.name, op.qubits
    if name in ("CX",) or op.num_qubits == 1 or name in PASSTHROUGH:
        return [op]
    a, b = qs
    if name == "CZ":
        return [Gate("H", (b,)), Gate("CX", qs), Gate("H", (b,))]
    if name == "RZZ":
        return [Gate("CX", qs), Gate("RZ", (b,), (op.theta,)), Gate("CX", qs)]
    if name == "RZX":
        return [Gate("H", (b,))] + _cx_rules(Gate("RZZ", qs, (op.theta,))) + [Gate("H", (b,))]
    if name == "CP":
        t = op.theta
        return [
            Gate("RZ", (a,), (t / 2,)),
            Gate("CX", qs),
            Gate("RZ", (b,), (-t / 2,)),
            Gate("CX", qs),
            Gate("RZ", (b,), (t / 2,)),
        ]
    if name == "RYY":
        return ryy_conjugation(op, lambda g: _cx_rules(g))
    raise ValueError(f"unknown gate kind {name!r}")


def ryy_conjugation(op: Gate, expand) -> list[Gate]:
    """RYY(t) = W RZZ(t) W^dagger with W = RX(-pi/2) on both qubits."""
    a, b = op.qubits
    pre = [Gate("RX", (a,), (math.pi / 2,)), Gate("RX", (b,), (math.pi / 2,))]
    post = [Gate("RX", (a,), (-math.pi / 2,)), Gate("RX", (b,), (-math.pi / 2,))]
    return pre + expand(Gate("RZZ", op.qubits, (op.theta,))) + post


def decompose_to_basis(circuit: Circuit, basis: BasisSet = BasisSet.CX_BASIS) -> Circuit:
    if basis is BasisSet.RZX_BASIS:
        from .rzx import rewrite_to_rzx

        return rewrite_to_rzx(circuit)
    if basis is not BasisSet.CX_BASIS:
        raise ValueError(f"unsupported basis {basis!r}")
    ops: list[Gate] = []
    for op in circuit.ops:
        ops.extend(_cx_rules(op))
    return merge_single_qubit_runs(circuit.replace(ops))
