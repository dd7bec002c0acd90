"""Application circuits (BV, HS, QFT, graph state, QAOA) and their classical oracles."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .circuit import Circuit, statevector
from .gates import Gate


def _check_bits(bits: str, what: str) -> str:
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"{what} must be a non-empty bitstring, got {bits!r}")
    return bits


def _measure_all(qubits) -> list[Gate]:
    return [Gate("MEASURE", (q,)) for q in qubits]


def bv_circuit(secret: str) -> Circuit:
    """Bernstein-Vazirani on ``len(secret)`` data qubits plus one ancilla (last index)."""
    secret = _check_bits(secret, "secret")
    n = len(secret)
    anc = n
    ops = [Gate("X", (anc,)), Gate("H", (anc,))]
    ops += [Gate("H", (q,)) for q in range(n)]
    ops += [Gate("CX", (q, anc)) for q in range(n) if secret[q] == "1"]
    ops += [Gate("H", (q,)) for q in range(n)]
    ops += _measure_all(range(n))
    return Circuit(n + 1, tuple(ops), f"bv-{n + 1}")


def hs_circuit(shift: str) -> Circuit:
    """Hidden shift for the inner-product bent function f(x) = XOR_i x_{2i} x_{2i+1}.

    f is self-dual, so both oracles are the same CZ layer; the shifted one is
    conjugated by X on the shift bits.
    """
    shift = _check_bits(shift, "shift")
    n = len(shift)
    if n % 2:
        raise ValueError("hidden shift needs an even number of qubits")
    pairs = [(2 * i, 2 * i + 1) for i in range(n // 2)]
    flips = [Gate("X", (q,)) for q in range(n) if shift[q] == "1"]
    cz = [Gate("CZ", p) for p in pairs]
    h = [Gate("H", (q,)) for q in range(n)]
    ops = h + flips + cz + flips + h + cz + h + _measure_all(range(n))
    return Circuit(n, tuple(ops), f"hs-{n}")


def qft_circuit(n: int, input_state: str | None = None) -> Circuit:
    if not 1 <= n <= 16:
        raise ValueError("QFT size must be in 1..16")
    input_state = input_state or "0" * n
    if len(_check_bits(input_state, "input_state")) != n:
        raise ValueError(f"input_state has length {len(input_state)}, expected {n}")
    ops = [Gate("X", (q,)) for q in range(n) if input_state[q] == "1"]
    for j in reversed(range(n)):
        ops.append(Gate("H", (j,)))
        for k in reversed(range(j)):
            ops.append(Gate("CP", (k, j), (math.pi / 2 ** (j - k),)))
    for i in range(n // 2):
        a, b = i, n - 1 - i
        ops += [Gate("CX", (a, b)), Gate("CX", (b, a)), Gate("CX", (a, b))]
    ops += _measure_all(range(n))
    return Circuit(n, tuple(ops), f"qft-{n}")


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]
    kind: str = "custom"  # "regular" | "random" | "custom"
    degree: int | None = None
    p: float | None = None

    def __post_init__(self):
        edges = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError("self-loop")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge {(a, b)} out of range")
            edges.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", tuple(sorted(edges)))

    @property
    def label(self) -> str:
        if self.kind == "regular":
            return f"{self.degree}-reg-{self.n}"
        if self.kind == "random":
            return f"rand-{self.n}-{self.p:g}"
        if self.kind == "line":
            return f"line-{self.n}"
        return f"graph-{self.n}"

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        adj = {i: [] for i in range(self.n)}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        while stack:
            for v in adj[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n

    def to_json(self) -> str:
        return json.dumps({"label": self.label, "n": self.n, "edges": [list(e) for e in self.edges]})

    @classmethod
    def line(cls, n: int) -> Graph:
        return cls(n, tuple((i, i + 1) for i in range(n - 1)), kind="line")

    @classmethod
    def complete(cls, n: int) -> Graph:
        return cls(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def random_regular_graph(d: int, n: int, seed=None) -> Graph:
    """Uniform d-regular graph by the pairing model, rejecting loops and multi-edges."""
    if (n * d) % 2 or not 0 <= d < n:
        raise ValueError(f"no {d}-regular graph on {n} nodes")
    rng = np.random.default_rng(seed)
    while True:
        stubs = np.repeat(np.arange(n), d)
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        edges = {(int(min(a, b)), int(max(a, b))) for a, b in pairs}
        if len(edges) == len(pairs) and all(a != b for a, b in edges):
            return Graph(n, tuple(edges), kind="regular", degree=d)


def erdos_renyi(n: int, p: float, seed=None) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return Graph(n, tuple(edges), kind="random", p=p)


def graph_state_circuit(coupling: Graph) -> Circuit:
    if coupling.n > 1 and not coupling.is_connected():
        raise ValueError("graph state needs a connected coupling graph")
    ops = [Gate("H", (q,)) for q in range(coupling.n)]
    ops += [Gate("CZ", e) for e in coupling.edges]
    ops += _measure_all(range(coupling.n))
    return Circuit(coupling.n, tuple(ops), f"gs-{coupling.n}")


def qaoa_maxcut_ansatz(graph: Graph, gamma: float, beta: float, measure: bool = True) -> Circuit:
    """Depth-1 QAOA: H layer, RZZ(2 gamma) per edge, RX(2 beta) per node."""
    ops = [Gate("H", (q,)) for q in range(graph.n)]
    ops += [Gate("RZZ", e, (2 * gamma,)) for e in graph.edges]
    ops += [Gate("RX", (q,), (2 * beta,)) for q in range(graph.n)]
    if measure:
        ops += _measure_all(range(graph.n))
    return Circuit(graph.n, tuple(ops), f"qaoa-{graph.label}")


def cut_values(graph: Graph) -> np.ndarray:
    """Cut value of every assignment z, indexed by the integer whose bit q is z_q."""
    z = np.arange(2**graph.n)
    cut = np.zeros(z.size, dtype=np.int64)
    for a, b in graph.edges:
        cut += ((z >> a) & 1) != ((z >> b) & 1)
    return cut


MAXCUT_MAX_NODES = 24


def maxcut_bruteforce(graph: Graph) -> tuple[int, float]:
    """(maximum cut, C_min) with cost C(z) = -cut(z)."""
    if graph.n > MAXCUT_MAX_NODES:
        raise ValueError(f"brute force limited to {MAXCUT_MAX_NODES} nodes")
    best = int(cut_values(graph).max())
    return best, float(-best)


def qaoa_expectation(graph: Graph, gamma: float, beta: float) -> float:
    """Exact noiseless <C> = -<cut> of the depth-1 ansatz."""
    probs = np.abs(statevector(qaoa_maxcut_ansatz(graph, gamma, beta, measure=False))) ** 2
    return float(-(probs @ cut_values(graph)))


def optimize_qaoa(graph: Graph, optimizer_budget: int = 200, seed=0, restarts: int = 5) -> tuple[float, float]:
    """Minimize <C> over (gamma, beta) with Nelder-Mead from random starts."""
    rng = np.random.default_rng(seed)
    best_val, best = math.inf, (0.0, 0.0)
    for _ in range(restarts):
        x0 = np.array([rng.uniform(0, math.pi), rng.uniform(0, math.pi / 2)])
        res = minimize(
            lambda x: qaoa_expectation(graph, x[0], x[1]),
            x0,
            method="Nelder-Mead",
            options={"maxfev": optimizer_budget, "xatol": 1e-6, "fatol": 1e-9},
        )
        if res.fun < best_val:
            best_val, best = float(res.fun), (float(res.x[0]), float(res.x[1]))
    return best
