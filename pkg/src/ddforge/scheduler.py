"""ASAP scheduling in dt units and idle-window extraction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .circuit import Circuit
from .config import read_config
from .gates import Gate


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class DurationTable:
    """Gate durations in dt, uniform over qubits.

    ``RZX`` is not in ``table``: its duration is ``round(alpha + beta*|theta|)``.
    """

    table: dict[str, int] = field(default_factory=dict)
    rzx_alpha: float | None = None
    rzx_beta: float | None = None
    dt_ns: float = 0.2

    def __post_init__(self):
        for name, d in self.table.items():
            if d < 0:
                raise ValueError(f"negative duration for {name}")
        if self.table.get("RZ", 0) != 0:
            raise ValueError("RZ is virtual and must take 0 dt")
        if self.rzx_beta is not None and self.rzx_beta < 0:
            raise ValueError("RZX duration must be non-decreasing in |theta|")

    @classmethod
    def default(cls) -> DurationTable:
        return cls.from_config(read_config())

    @classmethod
    def from_config(cls, parser) -> DurationTable:
        table = {k.upper(): int(v) for k, v in parser["durations"].items()}
        rzx = parser["rzx"] if parser.has_section("rzx") else None
        return cls(
            table=table,
            rzx_alpha=float(rzx["alpha"]) if rzx else None,
            rzx_beta=float(rzx["beta"]) if rzx else None,
            dt_ns=parser.getfloat("device", "dt_ns", fallback=0.2),
        )

    @classmethod
    def from_file(cls, path) -> DurationTable:
        return cls.from_config(read_config(path))

    def rzx_duration(self, theta: float) -> int:
        if self.rzx_alpha is None:
            raise ScheduleError("no RZX duration model")
        return max(0, round(self.rzx_alpha + self.rzx_beta * abs(theta)))

    def duration(self, op: Gate) -> int:
        if op.name == "DELAY":
            return op.duration
        if op.name == "BARRIER":
            return 0
        if op.name == "RZX":
            return self.rzx_duration(op.theta)
        try:
            return self.table[op.name]
        except KeyError:
            raise ScheduleError(f"gate kind {op.name} has no entry in the duration table") from None

    def dt_to_us(self, dt: float) -> float:
        return dt * self.dt_ns * 1e-3


@dataclass(frozen=True)
class IdleWindow:
    qubit: int
    start: int
    length: int
    left: int | None  # op index, None at a boundary
    right: int | None

    @property
    def end(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class ScheduledCircuit:
    circuit: Circuit
    start_times: tuple[int, ...]
    durations: tuple[int, ...]
    table: DurationTable

    @property
    def ops(self) -> tuple[Gate, ...]:
        return self.circuit.ops

    @property
    def num_qubits(self) -> int:
        return self.circuit.num_qubits

    @property
    def total_duration(self) -> int:
        return total_duration(self)

    def end_time(self, i: int) -> int:
        return self.start_times[i] + self.durations[i]

    def ops_on(self, qubit: int) -> list[int]:
        """Indices of ops touching ``qubit``, in time order."""
        n = self.num_qubits
        return [
            i
            for i, op in enumerate(self.ops)
            if qubit in op.qubits or (op.name == "BARRIER" and not op.qubits and qubit < n)
        ]

    def qubit_busy_intervals(self, qubit: int) -> list[tuple[int, int]]:
        # delays are idle time, not busy time
        return [
            (self.start_times[i], self.end_time(i))
            for i in self.ops_on(qubit)
            if self.ops[i].name != "DELAY"
        ]

    def dump(self) -> str:
        return json.dumps({str(i): t for i, t in enumerate(self.start_times)}, sort_keys=False)


def schedule_asap(circuit: Circuit, durations: DurationTable | None = None) -> ScheduledCircuit:
    durations = durations or DurationTable.default()
    free = [0] * circuit.num_qubits
    starts: list[int] = []
    lengths: list[int] = []
    for op in circuit.ops:
        d = durations.duration(op)
        qubits = op.qubits or tuple(range(circuit.num_qubits))
        t = max(free[q] for q in qubits)
        for q in qubits:
            free[q] = t + d
        starts.append(t)
        lengths.append(d)
    return ScheduledCircuit(circuit, tuple(starts), tuple(lengths), durations)


def total_duration(sched: ScheduledCircuit) -> int:
    if not sched.ops:
        return 0
    return max(s + d for s, d in zip(sched.start_times, sched.durations))


def idle_windows(sched: ScheduledCircuit) -> list[IdleWindow]:
    """Maximal gaps between busy intervals, strictly inside each qubit's activity.

    Leading idle is skipped (virtual zero-duration gates such as RZ do not
    end it), and so is the gap before a measurement.
    """
    windows: list[IdleWindow] = []
    for q in range(sched.num_qubits):
        busy = [i for i in sched.ops_on(q) if sched.ops[i].name != "DELAY"]
        first_timed = next((k for k, i in enumerate(busy) if sched.durations[i] > 0), len(busy))
        busy = busy[first_timed:]
        for left, right in zip(busy, busy[1:]):
            if sched.ops[right].name == "MEASURE" or sched.ops[left].name == "MEASURE":
                continue
            start = sched.end_time(left)
            gap = sched.start_times[right] - start
            if gap > 0:
                windows.append(IdleWindow(q, start, gap, left, right))
    return windows
