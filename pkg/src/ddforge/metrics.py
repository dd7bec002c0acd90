"""PST, Jensen-Shannon divergence, approximation ratio, relative results."""

from __future__ import annotations

import math
from enum import Enum
from typing import Mapping

import numpy as np

from .benchmarks import Graph, maxcut_bruteforce


class MetricKind(Enum):
    PST = "pst"
    JSD = "jsd"
    APPROX_RATIO = "approx_ratio"


def _shots(counts: Mapping[str, int]) -> int:
    return int(getattr(counts, "shots", None) or sum(counts.values()))


def pst(counts: Mapping[str, int], expected: str) -> float:
    shots = _shots(counts)
    if shots <= 0:
        raise ValueError("no shots")
    return counts.get(expected, 0) / shots


def normalize(counts: Mapping[str, float]) -> dict[str, float]:
    total = sum(counts.values())
    return {k: v / total for k, v in counts.items()}


def jsd(p: Mapping[str, float], q: Mapping[str, float]) -> float:
    """Base-2 Jensen-Shannon divergence, 0 log 0 = 0; bounded in [0, 1]."""
    for name, dist in (("p", p), ("q", q)):
        if abs(sum(dist.values()) - 1.0) > 1e-9:
            raise ValueError(f"{name} is not normalized")
    keys = sorted(set(p) | set(q))
    pv = np.array([p.get(k, 0.0) for k in keys], dtype=float)
    qv = np.array([q.get(k, 0.0) for k in keys], dtype=float)
    m = 0.5 * (pv + qv)

    def kl(a):
        nz = a > 0
        return float(np.sum(a[nz] * np.log2(a[nz] / m[nz])))

    value = 0.5 * kl(pv) + 0.5 * kl(qv)
    return min(max(value, 0.0), 1.0)


def cut_of(bits: str, graph: Graph) -> int:
    return sum(bits[a] != bits[b] for a, b in graph.edges)


def approximation_ratio(counts: Mapping[str, float], graph: Graph) -> float:
    """<C> / C_min with C(z) = -cut(z); 1 is optimal."""
    if not graph.edges:
        raise ValueError("approximation ratio undefined for an edgeless graph")
    _, c_min = maxcut_bruteforce(graph)
    total = sum(counts.values())
    expect = -sum(v * cut_of(z, graph) for z, v in counts.items()) / total
    return expect / c_min


def relative_report(baseline: float, variant: float, kind: MetricKind | str) -> float:
    """Relative result, larger is better.

    PST: variant / baseline. JSD: baseline / variant (JSD is lower-better).
    Approximation ratio: variant - baseline.
    """
    kind = MetricKind(kind) if not isinstance(kind, MetricKind) else kind
    if kind is MetricKind.APPROX_RATIO:
        return variant - baseline
    if baseline == 0:
        raise ZeroDivisionError(f"zero {kind.value} baseline")
    if kind is MetricKind.PST:
        return variant / baseline
    return baseline / variant if variant else math.inf
