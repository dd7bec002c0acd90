"""Dynamical-decoupling sequence catalog and the idle-window insertion pass."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .circuit import equiv_up_to_phase
from .gates import Gate
from .scheduler import DurationTable, IdleWindow, ScheduledCircuit, idle_windows
from .transpile import synthesize_1q


class Spacing(Enum):
    EQUIDISTANT_SYMMETRIC = "equidistant_symmetric"
    EXPLICIT_POSITIONS = "explicit_positions"


CATALOG = ("HAHN_X", "HAHN_Y", "CP", "CPMG", "XY4", "XY8", "XY16", "UDD_X", "UDD_Y", "KDD")
DEFAULT_REPEATS = {"HAHN_X": 1, "HAHN_Y": 1, "CP": 2, "CPMG": 2, "XY4": 1, "XY8": 1, "XY16": 1, "UDD_X": 8, "UDD_Y": 8, "KDD": 1}

# a pulse unit is a tuple of gates on qubit 0 played back to back
PulseUnit = tuple[Gate, ...]


@dataclass(frozen=True)
class DDSequence:
    name: str
    pulses: tuple[PulseUnit, ...]
    spacing: Spacing = Spacing.EQUIDISTANT_SYMMETRIC
    positions: tuple[float, ...] | None = None
    n: int = 1

    @property
    def num_pulses(self) -> int:
        return len(self.pulses)

    @property
    def num_gates(self) -> int:
        return sum(len(u) for u in self.pulses)

    def gates(self) -> list[Gate]:
        return [g for unit in self.pulses for g in unit]

    def net_unitary(self) -> np.ndarray:
        u = np.eye(2, dtype=complex)
        for g in self.gates():
            u = g.matrix() @ u
        return u

    def is_identity(self, tol: float = 1e-10) -> bool:
        return equiv_up_to_phase(self.net_unitary(), np.eye(2), tol)

    def unit_durations(self, durations: DurationTable) -> list[int]:
        return [sum(durations.duration(g) for g in unit) for unit in self.pulses]


def _x() -> Gate:
    return Gate("X", (0,))


def _y() -> Gate:
    return Gate("Y", (0,))


def udd_positions(n: int) -> list[float]:
    """Normalized Uhrig pulse centers sin^2(pi j / (2n + 2)), j = 1..n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return [math.sin(math.pi * j / (2 * n + 2)) ** 2 for j in range(1, n + 1)]


def composite_pi(phase: float, theta: float = math.pi) -> PulseUnit:
    """(theta)_phase: rotation by -theta about the axis at ``phase`` in the XY plane.

    As an operator this is RZ(phase) RX(-theta) RZ(-phase), so RZ(-phase) is
    played first.
    """
    return (
        Gate("RZ", (0,), (-phase,)),
        Gate("RX", (0,), (-theta,)),
        Gate("RZ", (0,), (phase,)),
    )


_KDD_OFFSETS = (math.pi / 6, 0.0, math.pi / 2, 0.0, math.pi / 6)
_KDD_BLOCK_PHASES = (0.0, math.pi / 2, 0.0, math.pi / 2)


def kdd_units(phi: float = 0.0) -> list[PulseUnit]:
    return [
        composite_pi(phi + block + offset)
        for block in _KDD_BLOCK_PHASES
        for offset in _KDD_OFFSETS
    ]


def kdd_expand(phi: float = 0.0) -> list[Gate]:
    """One full KDD cycle as 60 gates (20 composite pi pulses)."""
    return [g for unit in kdd_units(phi) for g in unit]


def _inverted(unit: PulseUnit) -> PulseUnit:
    # sign-inverted pi pulse; equal up to phase, but distinct under over-rotation
    axis = {"X": "RX", "Y": "RY"}
    return tuple(Gate(axis[g.name], g.qubits, (-math.pi,)) for g in unit)


def build_sequence(name: str, n: int | None = None) -> DDSequence:
    key = name.upper()
    if key not in CATALOG:
        raise ValueError(f"unknown DD sequence {name!r}; choose from {', '.join(CATALOG)}")
    n = DEFAULT_REPEATS[key] if n is None else int(n)
    if n < 1:
        raise ValueError("n must be >= 1")

    if key in ("HAHN_X", "HAHN_Y"):
        unit = (_x(),) if key == "HAHN_X" else (_y(),)
        return DDSequence(key, (unit,) * n, n=n)
    if key in ("CP", "CPMG"):
        unit = (_x(),) if key == "CP" else (_y(),)
        return DDSequence(key, (unit,) * n, n=n)
    if key in ("UDD_X", "UDD_Y"):
        unit = (_x(),) if key == "UDD_X" else (_y(),)
        return DDSequence(key, (unit,) * n, Spacing.EXPLICIT_POSITIONS, tuple(udd_positions(n)), n=n)
    if key == "KDD":
        return DDSequence(key, tuple(kdd_units()) * n, n=n)

    xy4 = [(_x(),), (_y(),), (_x(),), (_y(),)]
    if key == "XY4":
        cycle = xy4
    else:
        xy8 = xy4 + xy4[::-1]
        cycle = xy8 if key == "XY8" else xy8 + [_inverted(u) for u in xy8]
    return DDSequence(key, tuple(cycle) * n, n=n)


@dataclass
class WindowDetail:
    qubit: int
    start: int
    length: int
    status: str  # filled | too_short | unabsorbable
    pulses: int = 0
    absorbed_into: str | None = None


@dataclass
class InsertionReport:
    sequence: str
    windows_considered: int = 0
    windows_filled: int = 0
    windows_skipped_too_short: int = 0
    hahn_skipped_unabsorbable: int = 0
    details: list[WindowDetail] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def equidistant_offsets(length: int, unit_durations: list[int]) -> list[int]:
    """Start offsets for tau/2 | p | tau | ... | p | tau/2 inside ``length``.

    tau is floored to whole dt and the leftover dt go to the trailing slack.
    """
    k = len(unit_durations)
    slack = length - sum(unit_durations)
    tau = slack // k
    t = tau // 2
    offsets = []
    for d in unit_durations:
        offsets.append(t)
        t += d + tau
    return offsets


def explicit_offsets(length: int, unit_durations: list[int], positions) -> list[int]:
    """Center unit j at ``positions[j] * length``, clamped so units never overlap."""
    starts = [round(p * length - d / 2) for p, d in zip(positions, unit_durations)]
    lo = 0
    for j, d in enumerate(unit_durations):
        starts[j] = max(starts[j], lo)
        lo = starts[j] + d
    hi = length
    for j in reversed(range(len(unit_durations))):
        starts[j] = min(starts[j], hi - unit_durations[j])
        hi = starts[j]
    return starts


def _run_bounds(sched: ScheduledCircuit, qubit: int, anchor: int, direction: int) -> list[int] | None:
    """Indices of the contiguous 1q-gate run containing ``anchor`` on ``qubit``.

    ``direction`` = -1 walks back from a left neighbor, +1 forward from a
    right neighbor. Returns None if ``anchor`` is not a 1q unitary gate.
    """
    on_q = [i for i in sched.ops_on(qubit)]
    pos = on_q.index(anchor)
    run: list[int] = []
    while 0 <= pos < len(on_q):
        i = on_q[pos]
        op = sched.ops[i]
        if op.num_qubits != 1 or not op.is_unitary:
            break
        if run:
            prev = run[-1]
            touching = sched.end_time(i) == sched.start_times[prev] if direction < 0 else sched.end_time(prev) == sched.start_times[i]
            if not touching:
                break
        run.append(i)
        pos += direction
    if not run:
        return None
    return sorted(run)


def hahn_absorbable(window: IdleWindow, sched: ScheduledCircuit) -> bool:
    """True iff a single-qubit gate borders the window on either side."""
    for idx in (window.left, window.right):
        if idx is None:
            continue
        op = sched.ops[idx]
        if op.num_qubits == 1 and op.is_unitary:
            return True
    return False


def _absorb(sched, window, net, claimed, durations):
    """Pick a neighboring run to absorb net^dagger; returns (side, run, new_gates) or None."""
    inv = net.conj().T
    for side, anchor, direction in (("left", window.left, -1), ("right", window.right, +1)):
        if anchor is None:
            continue
        run = _run_bounds(sched, window.qubit, anchor, direction)
        if run is None or claimed.intersection(run):
            continue
        u = np.eye(2, dtype=complex)
        for i in run:
            u = sched.ops[i].matrix() @ u
        u = inv @ u if side == "left" else u @ inv
        new_gates = synthesize_1q(u, window.qubit)
        span = sched.end_time(run[-1]) - sched.start_times[run[0]]
        if sum(durations.duration(g) for g in new_gates) <= span:
            return side, run, new_gates
    return None


def insert_dd(
    sched: ScheduledCircuit,
    seq: DDSequence,
    durations: DurationTable | None = None,
) -> tuple[ScheduledCircuit, InsertionReport]:
    """Fill every feasible idle window of ``sched`` with one copy of ``seq``.

    Start times of untouched ops and the total duration are preserved. Slack
    is made explicit with DELAY ops. Sequences whose net unitary is not the
    identity (Hahn) need a bordering 1q run to absorb the inverse.
    """
    durations = durations or sched.table
    report = InsertionReport(seq.name)
    unit_durs = seq.unit_durations(durations)
    needs_absorb = not seq.is_identity()
    net = seq.net_unitary()

    after: dict[int, list[tuple[int, Gate, int]]] = {}  # op index -> timed ops to place after it
    replaced: dict[int, list[tuple[int, Gate, int]] | None] = {}  # run op index -> replacement
    claimed: set[int] = set()

    for w in idle_windows(sched):
        report.windows_considered += 1
        detail = WindowDetail(w.qubit, w.start, w.length, "too_short")
        report.details.append(detail)
        if w.length < sum(unit_durs):
            report.windows_skipped_too_short += 1
            continue
        if needs_absorb:
            choice = _absorb(sched, w, net, claimed, durations) if hahn_absorbable(w, sched) else None
            if choice is None:
                detail.status = "unabsorbable"
                report.hahn_skipped_unabsorbable += 1
                continue
            side, run, new_gates = choice
            claimed.update(run)
            t = sched.start_times[run[0]]
            span_end = sched.end_time(run[-1])
            timed = []
            for g in new_gates:
                d = durations.duration(g)
                timed.append((t, g, d))
                t += d
            if t < span_end:
                timed.append((t, Gate("DELAY", (w.qubit,), duration=span_end - t), span_end - t))
            replaced[run[0]] = timed
            for i in run[1:]:
                replaced[i] = None
            detail.absorbed_into = side

        if seq.spacing is Spacing.EXPLICIT_POSITIONS:
            offsets = explicit_offsets(w.length, unit_durs, seq.positions)
        else:
            offsets = equidistant_offsets(w.length, unit_durs)
        timed = []
        cursor = w.start
        for off, unit, d in zip(offsets, seq.pulses, unit_durs):
            begin = w.start + off
            if begin > cursor:
                timed.append((cursor, Gate("DELAY", (w.qubit,), duration=begin - cursor), begin - cursor))
            t = begin
            for g in unit:
                g = Gate(g.name, (w.qubit,), g.params)
                gd = durations.duration(g)
                timed.append((t, g, gd))
                t += gd
            cursor = t
        if w.end > cursor:
            timed.append((cursor, Gate("DELAY", (w.qubit,), duration=w.end - cursor), w.end - cursor))
        after.setdefault(w.left, []).extend(timed)
        # explicit delays inside the window are superseded by the new slack
        for i in sched.ops_on(w.qubit):
            if sched.ops[i].name == "DELAY" and w.start <= sched.start_times[i] and sched.end_time(i) <= w.end:
                replaced[i] = None
        detail.status = "filled"
        detail.pulses = seq.num_pulses
        report.windows_filled += 1

    ops, starts, durs = [], [], []
    for i, op in enumerate(sched.ops):
        if i in replaced:
            for t, g, d in replaced[i] or ():
                ops.append(g)
                starts.append(t)
                durs.append(d)
        else:
            ops.append(op)
            starts.append(sched.start_times[i])
            durs.append(sched.durations[i])
        for t, g, d in after.get(i, ()):
            ops.append(g)
            starts.append(t)
            durs.append(d)
    circuit = sched.circuit.replace(ops)
    return ScheduledCircuit(circuit, tuple(starts), tuple(durs), durations), report
