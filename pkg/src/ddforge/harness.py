"""End-to-end experiment grid: generate, transpile, schedule, insert DD, simulate, score."""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .benchmarks import (
    Graph,
    bv_circuit,
    erdos_renyi,
    graph_state_circuit,
    hs_circuit,
    optimize_qaoa,
    qaoa_maxcut_ansatz,
    qft_circuit,
    random_regular_graph,
)
from .circuit import Circuit, ideal_distribution
from .config import read_config
from .metrics import MetricKind, approximation_ratio, jsd, pst, relative_report
from .noise import NoiseModel, simulate
from .rzx import rewrite_to_rzx
from .scheduler import DurationTable, schedule_asap
from .sequences import CATALOG, build_sequence, insert_dd
from .transpile import BasisSet, decompose_to_basis

log = logging.getLogger(__name__)

FAMILIES = ("bv", "hs", "qft", "gs", "qaoa-reg", "qaoa-rand")
DD_CHOICES = tuple(name.lower() for name in CATALOG)
CSV_COLUMNS = (
    "benchmark", "label", "size", "method", "metric", "value", "relative",
    "seed", "repeat", "windows_filled", "applicable", "pst_gt_0p1",
)
PIPELINE = ("generate", "transpile", "schedule_asap", "insert_dd", "simulate", "score")
RUN_KEYS = {
    "benchmark", "sizes", "dd", "pulse_efficient", "noise_profile", "shots", "repeats",
    "seed", "out", "qft_input", "edge_probability", "degree", "workers", "optimizer_budget",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    benchmark: str = "bv"
    sizes: list[int] = field(default_factory=lambda: [3, 4, 5, 6])
    dd: list[str] = field(default_factory=lambda: list(DD_CHOICES))
    pulse_efficient: bool = False
    noise_profile: str = "profile-default"
    shots: int = 8192
    repeats: int = 3
    seed: int = 0
    out: str = "results"
    qft_input: str = "zero"  # zero | onehot
    edge_probability: float = 0.5
    degree: int = 3
    workers: int = 1
    optimizer_budget: int = 200
    config_path: str | None = None

    def __post_init__(self):
        self.benchmark = self.benchmark.lower()
        if self.benchmark not in FAMILIES:
            raise ConfigError(f"unknown benchmark {self.benchmark!r}; choose from {FAMILIES}")
        self.dd = [d.lower() for d in self.dd if d.lower() != "none"]
        for d in self.dd:
            if d not in DD_CHOICES:
                raise ConfigError(f"unknown DD sequence {d!r}")
        if self.shots <= 0 or self.repeats <= 0:
            raise ConfigError("shots and repeats must be positive")
        if self.qft_input not in ("zero", "onehot"):
            raise ConfigError("qft_input must be 'zero' or 'onehot'")

    def methods(self) -> list[str]:
        methods = ["baseline"] + list(self.dd)
        if self.pulse_efficient:
            methods += ["pe"] + [f"pe+{d}" for d in self.dd]
        return methods

    def canonical(self) -> dict:
        data = asdict(self)
        data.pop("config_path")
        data.pop("workers")
        return data

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.canonical(), sort_keys=True).encode()).hexdigest()


def parse_sizes(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(s) for s in text.replace(",", " ").split()]


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("on", "true", "yes", "1"):
        return True
    if value in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def load_run_config(path: str | Path) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path) as fh:
        parser.read_file(fh)
    if not parser.has_section("run"):
        raise ConfigError("config file needs a [run] section")
    section = parser["run"]
    unknown = set(section) - RUN_KEYS
    if unknown:
        raise ConfigError(f"invalid config keys: {sorted(unknown)}")
    kwargs: dict = {"config_path": str(path)}
    for key, raw in section.items():
        if key == "sizes":
            kwargs[key] = parse_sizes(raw)
        elif key == "dd":
            items = [s.strip() for s in raw.split(",") if s.strip()]
            kwargs[key] = list(DD_CHOICES) if items == ["all"] else items
        elif key == "pulse_efficient":
            kwargs[key] = _parse_bool(raw)
        elif key in ("shots", "repeats", "seed", "degree", "workers", "optimizer_budget"):
            kwargs[key] = int(raw)
        elif key == "edge_probability":
            kwargs[key] = float(raw)
        else:
            kwargs[key] = raw.strip()
    return RunConfig(**kwargs)


# -- benchmark instances ------------------------------------------------------


@dataclass
class Instance:
    circuit: Circuit
    label: str
    metric: MetricKind
    expected: str | None = None
    ideal: dict | None = None
    graph: Graph | None = None


def _sub_seed(master: int, *parts) -> int:
    key = "|".join(str(p) for p in parts).encode()
    return int(np.random.SeedSequence([master, zlib.crc32(key)]).generate_state(1)[0])


def make_instance(cfg: RunConfig, size: int) -> Instance | None:
    rng = np.random.default_rng(_sub_seed(cfg.seed, cfg.benchmark, size, "instance"))
    fam = cfg.benchmark
    if fam == "bv":
        if size < 2:
            return None
        secret = "1" * (size - 1)
        c = bv_circuit(secret)
        return Instance(c, f"bv-{size}", MetricKind.PST, expected=secret)
    if fam == "hs":
        if size % 2:
            return None
        shift = "".join(rng.choice(["0", "1"], size))
        c = hs_circuit(shift)
        return Instance(c, f"hs-{size}", MetricKind.PST, expected=shift)
    if fam == "qft":
        bits = "0" * size if cfg.qft_input == "zero" else "1" + "0" * (size - 1)
        c = qft_circuit(size, bits)
        return Instance(c, f"qft-{size}", MetricKind.JSD, ideal=ideal_distribution(c))
    if fam == "gs":
        c = graph_state_circuit(Graph.line(size))
        return Instance(c, f"gs-{size}", MetricKind.JSD, ideal=ideal_distribution(c))
    if fam == "qaoa-reg":
        if (size * cfg.degree) % 2 or size <= cfg.degree:
            return None
        graph = random_regular_graph(cfg.degree, size, seed=rng)
    else:
        graph = erdos_renyi(size, cfg.edge_probability, seed=rng)
        while not graph.edges:
            graph = erdos_renyi(size, cfg.edge_probability, seed=rng)
    gamma, beta = optimize_qaoa(graph, cfg.optimizer_budget, seed=rng)
    c = qaoa_maxcut_ansatz(graph, gamma, beta)
    return Instance(c, graph.label, MetricKind.APPROX_RATIO, graph=graph)


def transpile(circuit: Circuit, method: str, durations: DurationTable):
    """Apply ``method``'s pipeline; returns (schedule, report or None, stages)."""
    pe = method.startswith("pe")
    dd = method.split("+", 1)[1] if "+" in method else (None if method in ("baseline", "pe") else method)
    stages = ["generate"]
    if pe:
        lowered = rewrite_to_rzx(circuit, durations)
        stages.append("rewrite_to_rzx")
    else:
        lowered = decompose_to_basis(circuit, BasisSet.CX_BASIS)
        stages.append("decompose_cx")
    sched = schedule_asap(lowered, durations)
    stages.append("schedule_asap")
    report = None
    if dd:
        sched, report = insert_dd(sched, build_sequence(dd), durations)
        stages.append("insert_dd")
    return sched, report, stages


def score(inst: Instance, counts) -> float:
    if inst.metric is MetricKind.PST:
        return pst(counts, inst.expected)
    if inst.metric is MetricKind.JSD:
        return jsd(counts.probabilities(), inst.ideal)
    return approximation_ratio(counts, inst.graph)


def _run_cell(args):
    inst, method, seeds, shots, durations, noise = args
    sched, report, stages = transpile(inst.circuit, method, durations)
    applicable = report is None or report.windows_filled > 0
    values = []
    if applicable:
        for s in seeds:
            counts = simulate(sched, noise.with_(seed=s), shots)
            values.append(score(inst, counts))
    return {
        "method": method,
        "values": values,
        "applicable": applicable,
        "windows_filled": None if report is None else report.windows_filled,
        "report": None if report is None else report.to_dict(),
        "stages": stages,
        "duration": sched.total_duration,
    }


# -- run ----------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)


@dataclass
class RunResult:
    rows: list[dict]
    manifest: dict
    out_dir: Path | None = None

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        return buf.getvalue()


def run_experiment(cfg: RunConfig, write: bool = True) -> RunResult:
    parser = read_config(cfg.config_path)
    durations = DurationTable.from_config(parser)
    noise = NoiseModel.profile(cfg.noise_profile, path=cfg.config_path)
    methods = cfg.methods()

    jobs, meta = [], []
    for size in cfg.sizes:
        inst = make_instance(cfg, size)
        if inst is None:
            log.warning("skipping %s size %d (no valid instance)", cfg.benchmark, size)
            continue
        seeds = [_sub_seed(cfg.seed, cfg.benchmark, size, "repeat", r) for r in range(cfg.repeats)]
        for method in methods:
            jobs.append((inst, method, seeds, cfg.shots, durations, noise))
            meta.append((size, inst, seeds))

    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_run_cell, jobs))
    else:
        results = [_run_cell(j) for j in jobs]

    baselines: dict[tuple[int, str], list[float]] = {}
    for (size, inst, _), res in zip(meta, results):
        if res["method"] == "baseline":
            baselines[(size, inst.label)] = res["values"]

    rows, cells = [], []
    for (size, inst, seeds), res in zip(meta, results):
        base = baselines[(size, inst.label)]
        kind = inst.metric
        common = {
            "benchmark": cfg.benchmark,
            "label": inst.label,
            "size": size,
            "method": res["method"],
            "metric": kind.value,
            "windows_filled": res["windows_filled"],
            "applicable": res["applicable"],
        }
        for r, seed in enumerate(seeds):
            value = res["values"][r] if res["applicable"] else None
            rows.append({
                **common,
                "value": value,
                "relative": _relative(base[r], value, kind),
                "seed": seed,
                "repeat": r,
                "pst_gt_0p1": (value > 0.1) if (kind is MetricKind.PST and value is not None) else None,
            })
        mean = float(np.mean(res["values"])) if res["applicable"] else None
        base_mean = float(np.mean(base))
        rows.append({
            **common,
            "value": mean,
            "relative": _relative(base_mean, mean, kind),
            "seed": None,
            "repeat": "mean",
            "pst_gt_0p1": (mean > 0.1) if (kind is MetricKind.PST and mean is not None) else None,
        })
        cells.append({
            "size": size,
            "label": inst.label,
            "method": res["method"],
            "seeds": seeds,
            "pipeline": res["stages"],
            "total_duration_dt": res["duration"],
            "insertion_report": res["report"],
        })

    manifest = {
        "config": cfg.canonical(),
        "config_sha256": cfg.digest(),
        "noise_model": asdict(noise),
        "durations": asdict(durations),
        "pipeline_order": list(PIPELINE),
        "cells": cells,
    }
    result = RunResult(rows, manifest)
    if write:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "results.csv").write_text(result.csv_text())
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str))
        emit_plot_data(result, out, profile=cfg.noise_profile)
        result.out_dir = out
    return result


def _relative(base, value, kind):
    if value is None:
        return None
    try:
        return relative_report(base, value, kind)
    except ZeroDivisionError:
        return None


FIGURE_FILES = {"bv": "fig4-like.csv", "qft": "fig5-like.csv", "gs": "fig5-like.csv"}


def emit_plot_data(result: RunResult, out_dir: str | Path, profile: str = "") -> list[Path]:
    """Per-figure CSVs of mean relative results (applicable cells only)."""
    out_dir = Path(out_dir)
    groups: dict[str, list[dict]] = {}
    for row in result.rows:
        if row["repeat"] != "mean" or row["method"] == "baseline" or not row["applicable"]:
            continue
        fam = row["benchmark"]
        if fam.startswith("qaoa"):
            name = "fig7-like.csv" if row["method"].startswith("pe") else "fig6-like.csv"
        elif fam == "hs":
            continue
        else:
            name = FIGURE_FILES[fam]
        groups.setdefault(name, []).append(row)
    written = []
    for name, rows in sorted(groups.items()):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["profile", "benchmark", "label", "size", "method", "metric", "relative"])
        for row in rows:
            writer.writerow([profile, row["benchmark"], row["label"], row["size"], row["method"], row["metric"], _fmt(row["relative"])])
        path = out_dir / name
        path.write_text(buf.getvalue())
        written.append(path)
    return written
