"""Stochastic-trajectory simulator with quasi-static detuning and Markovian noise.

Each trajectory draws a static detuning per qubit; idle time then rotates
that qubit about Z by detuning * time (the part DD refocuses), followed by
sampled T1/T2 jumps (the part it cannot). Gates are over-rotated if they are
physical pulses and followed by damping for their duration plus a sampled
depolarizing Pauli.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, fields

import numpy as np

from .circuit import Circuit, format_bits, unitary_of
from .config import read_config
from .gates import PAULIS, PHYSICAL_PULSES, Gate, _components, apply_matrix, gate_matrix
from .scheduler import ScheduledCircuit

SIM_MAX_QUBITS = 16
FIDELITY_MAX_QUBITS = 4


@dataclass(frozen=True)
class NoiseModel:
    quasi_static_sigma: float = 0.0  # rad/us
    t1_us: float = math.inf
    t2_us: float = math.inf
    depol_1q: float = 0.0
    depol_2q: float = 0.0
    overrotation_epsilon: float = 0.0
    seed: int = 0
    name: str = "custom"

    def __post_init__(self):
        if self.quasi_static_sigma < 0:
            raise ValueError("quasi_static_sigma must be >= 0")
        for p in (self.depol_1q, self.depol_2q):
            if not 0.0 <= p <= 1.0:
                raise ValueError("depolarizing probabilities must lie in [0, 1]")
        if self.t1_us <= 0 or self.t2_us <= 0:
            raise ValueError("T1 and T2 must be positive")
        if self.t2_us > 2 * self.t1_us:
            raise ValueError("T2 cannot exceed 2*T1")

    @classmethod
    def ideal(cls, seed: int = 0) -> NoiseModel:
        return cls(seed=seed, name="ideal")

    @classmethod
    def profile(cls, name: str = "profile-default", seed: int = 0, path=None) -> NoiseModel:
        parser = read_config(path)
        section = f"noise:{name}"
        if not parser.has_section(section):
            known = [s.split(":", 1)[1] for s in parser.sections() if s.startswith("noise:")]
            raise KeyError(f"unknown noise profile {name!r}; known: {known}")
        sec = parser[section]
        kwargs = {f.name: float(sec[f.name]) for f in fields(cls) if f.name in sec}
        return cls(**kwargs, seed=seed, name=name)

    def with_(self, **changes) -> NoiseModel:
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return NoiseModel(**values)

    @property
    def dephasing_rate(self) -> float:
        """Pure-dephasing rate 1/T_phi in 1/us."""
        return max(0.0, 1.0 / self.t2_us - 0.5 / self.t1_us)


class CountsResult(dict):
    """Bitstring -> count; character i is the i-th measured qubit."""

    @property
    def shots(self) -> int:
        return sum(self.values())

    def probabilities(self) -> dict[str, float]:
        total = self.shots
        return {k: v / total for k, v in self.items()}

    def to_json(self) -> str:
        return json.dumps(dict(sorted(self.items())))


# -- timeline ---------------------------------------------------------------


def _timeline(sched: ScheduledCircuit):
    """Yield ("idle", qubit, dt) and ("gate", op, dt) in a valid causal order.

    Idle noise for a gap is emitted just before the op that ends the gap.
    Leading idle and anything after a qubit's measurement are skipped.
    """
    last_end: list[int | None] = [None] * sched.num_qubits
    measured: set[int] = set()
    for i, op in enumerate(sched.ops):
        if op.name in ("DELAY", "BARRIER"):
            continue
        start = sched.start_times[i]
        for q in op.qubits:
            if last_end[q] is not None and q not in measured and start > last_end[q]:
                yield ("idle", q, start - last_end[q])
            last_end[q] = start + sched.durations[i]
        if op.name == "MEASURE":
            measured.update(op.qubits)
            continue
        yield ("gate", op, sched.durations[i])


def noisy_matrix(op: Gate, epsilon: float) -> np.ndarray:
    if epsilon and op.name in PHYSICAL_PULSES:
        scale = 1.0 + epsilon
        if op.name == "X":
            return gate_matrix("RX", (math.pi * scale,))
        if op.name == "Y":
            return gate_matrix("RY", (math.pi * scale,))
        if op.name == "SX":
            return gate_matrix("RX", (math.pi / 2 * scale,))
        return gate_matrix(op.name, (op.theta * scale,))
    return op.matrix()


def _damping_params(noise: NoiseModel, t_us: float) -> tuple[float, float]:
    gamma = 0.0 if math.isinf(noise.t1_us) else 1.0 - math.exp(-t_us / noise.t1_us)
    rate = noise.dephasing_rate
    p_z = 0.5 * (1.0 - math.exp(-t_us * rate)) if rate > 0 else 0.0
    return gamma, p_z


# -- trajectories -----------------------------------------------------------


class _Batch:
    def __init__(self, n: int, size: int, rng: np.random.Generator):
        self.n = n
        self.rng = rng
        self.psi = np.zeros((size, 2**n), dtype=complex)
        self.psi[:, 0] = 1.0

    def unitary(self, mat, qubits, rows=None):
        if rows is None and not np.any(mat - np.diag(np.diagonal(mat))):
            for i, comp in enumerate(_components(self.psi, qubits, self.n)):
                if mat[i, i] != 1:
                    comp *= mat[i, i]
        elif rows is None:
            self.psi = apply_matrix(self.psi, mat, qubits, self.n)
        elif rows.any():
            self.psi[rows] = apply_matrix(self.psi[rows], mat, qubits, self.n)

    def phase(self, q: int, angles: np.ndarray):
        zero, one = _components(self.psi, (q,), self.n)
        ph = np.exp(0.5j * angles).reshape((-1,) + (1,) * (one.ndim - 1))
        zero *= ph.conj()
        one *= ph

    def damp(self, q: int, gamma: float, p_z: float):
        rng = self.rng
        if gamma > 0:
            zero, one = _components(self.psi, (q,), self.n)
            p1 = np.sum(one.real**2 + one.imag**2, axis=tuple(range(1, one.ndim)))
            # trajectories stay normalized, so P(jump) = gamma * p1
            jump = rng.random(len(p1)) < gamma * p1
            keep = ~jump
            # no-jump branch: shrink the |1> part, then renormalize analytically
            scale = 1.0 / np.sqrt(1.0 - gamma * p1)
            zero[keep] *= scale[keep].reshape((-1,) + (1,) * (zero.ndim - 1))
            one[keep] *= (math.sqrt(1.0 - gamma) * scale[keep]).reshape((-1,) + (1,) * (one.ndim - 1))
            if jump.any():
                s = (1.0 / np.sqrt(p1[jump])).reshape((-1,) + (1,) * (one.ndim - 1))
                zero[jump] = one[jump] * s
                one[jump] = 0.0
        if p_z > 0:
            flip = rng.random(self.psi.shape[0]) < p_z
            if flip.any():
                one = _components(self.psi, (q,), self.n)[1]
                one[flip] *= -1

    def depolarize(self, qubits, p: float):
        if p <= 0:
            return
        size = self.psi.shape[0]
        hit = self.rng.random(size) < p
        k = len(qubits)
        which = self.rng.integers(0, 4**k, size)
        for code in range(1, 4**k):
            rows = hit & (which == code)
            if not rows.any():
                continue
            mat = np.array([[1.0]], dtype=complex)
            for j in range(k):
                # digit j selects the Pauli on qubits[j]; kron puts later qubits on top
                mat = np.kron(PAULIS[(code >> (2 * j)) & 3], mat)
            self.unitary(mat, qubits, rows)

    def sample(self, measured: list[int]) -> np.ndarray:
        probs = np.abs(self.psi) ** 2
        probs /= probs.sum(axis=1, keepdims=True)
        cdf = np.cumsum(probs, axis=1)
        u = self.rng.random((probs.shape[0], 1))
        outcome = np.minimum((cdf < u).sum(axis=1), probs.shape[1] - 1)
        keys = np.zeros_like(outcome)
        for pos, q in enumerate(measured):
            keys |= ((outcome >> q) & 1) << pos
        return keys


def simulate(
    sched: ScheduledCircuit,
    noise: NoiseModel,
    shots: int,
    batch_size: int = 1024,
) -> CountsResult:
    """Sample ``shots`` noisy trajectories of a scheduled circuit.

    Batch ``b`` draws from ``default_rng([noise.seed, b])``, so results depend
    only on the seed, the shot count and the batch size.
    """
    n = sched.num_qubits
    if n > SIM_MAX_QUBITS:
        raise ValueError(f"simulator limited to {SIM_MAX_QUBITS} qubits")
    if shots <= 0:
        raise ValueError("shots must be positive")
    measured = sched.circuit.measured_qubits() or list(range(n))
    events = list(_timeline(sched))
    eps = noise.overrotation_epsilon
    to_us = sched.table.dt_to_us
    mats = {id(e[1]): noisy_matrix(e[1], eps) for e in events if e[0] == "gate"}
    damp_cache: dict[int, tuple[float, float]] = {}

    def damping(dt):
        if dt not in damp_cache:
            damp_cache[dt] = _damping_params(noise, to_us(dt))
        return damp_cache[dt]

    tally = np.zeros(2 ** len(measured), dtype=np.int64)
    for b, start in enumerate(range(0, shots, batch_size)):
        size = min(batch_size, shots - start)
        rng = np.random.default_rng([noise.seed, b])
        batch = _Batch(n, size, rng)
        detuning = rng.normal(0.0, noise.quasi_static_sigma, (n, size)) if noise.quasi_static_sigma else None
        for kind, obj, dt in events:
            if kind == "idle":
                if detuning is not None:
                    batch.phase(obj, detuning[obj] * to_us(dt))
                batch.damp(obj, *damping(dt))
                continue
            op = obj
            batch.unitary(mats[id(op)], op.qubits)
            if dt:
                for q in op.qubits:
                    batch.damp(q, *damping(dt))
            batch.depolarize(op.qubits, noise.depol_1q if op.num_qubits == 1 else noise.depol_2q)
        tally += np.bincount(batch.sample(measured), minlength=tally.size)
    width = len(measured)
    return CountsResult({format_bits(k, width): int(c) for k, c in enumerate(tally) if c})


# -- exact channel fidelity -------------------------------------------------


def _apply_dm(rho: np.ndarray, mat: np.ndarray, qubits, n: int) -> np.ndarray:
    """mat @ rho @ mat^dagger for a batch of density matrices (B, d, d)."""
    b, d, _ = rho.shape
    left = apply_matrix(rho.transpose(0, 2, 1).reshape(b * d, d), mat, qubits, n)
    left = left.reshape(b, d, d).transpose(0, 2, 1)  # mat @ rho
    right = apply_matrix(left.conj().reshape(b * d, d), mat, qubits, n)
    # rows of right are the columns of mat @ left^dagger, so conj gives left @ mat^dagger
    return right.reshape(b, d, d).conj()


def _channel(rho, kraus, qubits, n):
    out = np.zeros_like(rho)
    for k in kraus:
        out += _apply_dm(rho, k, qubits, n)
    return out


def _damping_kraus(gamma: float, p_z: float) -> list[np.ndarray]:
    ad = [np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=complex)]
    if gamma > 0:
        ad.append(np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex))
    if p_z <= 0:
        return ad
    z = PAULIS[3]
    return [math.sqrt(1 - p_z) * k for k in ad] + [math.sqrt(p_z) * (z @ k) for k in ad]


def _depol_kraus(k: int, p: float) -> list[np.ndarray]:
    ops = []
    for combo in itertools.product(range(4), repeat=k):
        mat = np.array([[1.0]], dtype=complex)
        for j in combo:
            mat = np.kron(PAULIS[j], mat)
        ops.append(mat)
    weights = [1 - p + p / 4**k] + [p / 4**k] * (4**k - 1)
    return [math.sqrt(w) * m for w, m in zip(weights, ops)]


def _default_nodes(n: int) -> int:
    return {1: 64, 2: 32, 3: 12, 4: 6}[n]


def effective_channel_fidelity(sched: ScheduledCircuit, noise: NoiseModel, nodes: int | None = None) -> float:
    """Average gate fidelity of the noisy schedule against its ideal unitary.

    The static detuning is integrated by Gauss-Hermite quadrature (tensor grid
    over qubits) and all Markovian channels are applied exactly, so the value
    carries no sampling noise.
    """
    n = sched.num_qubits
    if n > FIDELITY_MAX_QUBITS:
        raise ValueError(f"fidelity oracle limited to {FIDELITY_MAX_QUBITS} qubits")
    circuit = sched.circuit.without_measurements()
    ideal = unitary_of(circuit)
    d = 2**n
    events = list(_timeline(sched))
    to_us = sched.table.dt_to_us
    eps = noise.overrotation_epsilon

    if noise.quasi_static_sigma > 0:
        m = nodes or _default_nodes(n)
        x, w = np.polynomial.hermite_e.hermegauss(m)
        w = w / w.sum()
        grid = np.array(list(itertools.product(x, repeat=n))) * noise.quasi_static_sigma
        weights = np.prod(np.array(list(itertools.product(w, repeat=n))), axis=1)
    else:
        grid = np.zeros((1, n))
        weights = np.ones(1)

    # basis inputs |i><j|, one batch entry per (grid point, i, j)
    basis = np.zeros((d * d, d, d), dtype=complex)
    for k, (i, j) in enumerate(itertools.product(range(d), repeat=2)):
        basis[k, i, j] = 1.0
    idx = np.arange(d)
    total = 0.0
    chunk = max(1, 4096 // (d * d))
    for lo in range(0, len(grid), chunk):
        deltas = grid[lo : lo + chunk]
        g = len(deltas)
        rho = np.tile(basis, (g, 1, 1))
        for kind, obj, dt in events:
            if kind == "idle":
                q = obj
                ang = np.repeat(deltas[:, q], d * d) * to_us(dt)
                ph = np.exp(np.where(((idx >> q) & 1)[None, :] == 1, 0.5j, -0.5j) * ang[:, None])
                rho *= ph[:, :, None] * ph.conj()[:, None, :]
                gamma, p_z = _damping_params(noise, to_us(dt))
                if gamma or p_z:
                    rho = _channel(rho, _damping_kraus(gamma, p_z), (q,), n)
                continue
            op = obj
            rho = _apply_dm(rho, noisy_matrix(op, eps), op.qubits, n)
            if dt:
                gamma, p_z = _damping_params(noise, to_us(dt))
                if gamma or p_z:
                    for q in op.qubits:
                        rho = _channel(rho, _damping_kraus(gamma, p_z), (q,), n)
            p = noise.depol_1q if op.num_qubits == 1 else noise.depol_2q
            if p:
                rho = _channel(rho, _depol_kraus(op.num_qubits, p), op.qubits, n)
        # process fidelity: (1/d^2) sum_ij (U^dagger E(|i><j|) U)_ij
        rho = rho.reshape(g, d * d, d, d)
        rotated = np.einsum("ai,gkab,bj->gkij", ideal.conj(), rho, ideal)
        diag = rotated.reshape(g, d, d, d, d)[:, idx[:, None], idx[None, :], idx[:, None], idx[None, :]]
        f_pro = diag.sum(axis=(1, 2)).real / d**2
        total += float(np.dot(weights[lo : lo + chunk], f_pro))
    return (d * total + 1) / (d + 1)
