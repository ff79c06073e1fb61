"""Benchmark harness: seeded target generation, oracle and trained-policy
algorithms, and CSV/JSON report emission.

CSV columns: ``topology,algorithm,runs,n,time_ms_mean,count2q_mean,
layers2q_mean``; the JSON mirror additionally carries per-instance
arrays. Time columns are wall time and excluded from reproducibility
comparisons.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint
from .circuits import count2q, depth2q
from .decoders import DecodeConfig, decode_greedy, decode_multi
from .envs import build_gate_set
from .operators import uniform_random_operator
from .oracles import BoundExceededError, bfs_optimal
from .topologies import topology

ORACLE_BOUNDS = {"permutation": 6, "linear": 4, "clifford": 3}


@dataclass
class BenchRow:
    topology: str
    algorithm: str  # oracle | RL_<runs>
    runs: int
    n: int  # instances measured
    time_ms_mean: float | None
    count2q_mean: float | None
    layers2q_mean: float | None
    count2q: list = field(default_factory=list)
    layers2q: list = field(default_factory=list)

    def csv_row(self) -> dict:
        fmt = lambda v: "n/a" if v is None else f"{v:.4f}"
        return {
            "topology": self.topology,
            "algorithm": self.algorithm,
            "runs": self.runs,
            "n": self.n,
            "time_ms_mean": fmt(self.time_ms_mean),
            "count2q_mean": fmt(self.count2q_mean),
            "layers2q_mean": fmt(self.layers2q_mean),
        }


@dataclass
class BenchSuite:
    kind: str
    topologies: tuple[str, ...]
    n_targets: int = 100
    runs: tuple[int, ...] = (1, 100)
    seed: int = 0
    include_oracle: bool = True
    checkpoints: dict = field(default_factory=dict)  # topology -> ckpt path
    step_limit: int = 128


CSV_FIELDS = ["topology", "algorithm", "runs", "n", "time_ms_mean", "count2q_mean", "layers2q_mean"]


def generate_targets(kind: str, n_qubits: int, n_targets: int, seed: int) -> list:
    """Deterministic target set from a master seed."""
    rng = np.random.default_rng(seed)
    return [uniform_random_operator(kind, n_qubits, rng) for _ in range(n_targets)]


def run_benchmark(suite: BenchSuite, out_dir: str | Path | None = None) -> list[BenchRow]:
    rows: list[BenchRow] = []
    for topo_name in suite.topologies:
        coupling = topology(topo_name)
        targets = generate_targets(suite.kind, coupling.n_qubits, suite.n_targets, suite.seed)
        gate_set = build_gate_set(suite.kind, coupling)

        if suite.include_oracle:
            rows.append(_oracle_row(suite, topo_name, coupling, gate_set, targets))
        ckpt_path = suite.checkpoints.get(topo_name)
        for r in suite.runs:
            if ckpt_path is None:
                raise FileNotFoundError(
                    f"no checkpoint configured for topology {topo_name!r}"
                )
            rows.append(_rl_row(suite, topo_name, gate_set, targets, ckpt_path, r))
    if out_dir is not None:
        write_report(rows, out_dir)
    return rows


def _oracle_row(suite, topo_name, coupling, gate_set, targets) -> BenchRow:
    if coupling.n_qubits > ORACLE_BOUNDS[suite.kind]:
        return BenchRow(topo_name, "oracle", 1, suite.n_targets, None, None, None)
    counts, layers, times = [], [], []
    for target in targets:
        t0 = time.perf_counter()
        try:
            circuit = bfs_optimal(target, gate_set, "count")
        except BoundExceededError:
            return BenchRow(topo_name, "oracle", 1, suite.n_targets, None, None, None)
        times.append((time.perf_counter() - t0) * 1e3)
        counts.append(count2q(circuit))
        layers.append(depth2q(circuit))
    return BenchRow(
        topo_name, "oracle", 1, len(targets),
        float(np.mean(times)), float(np.mean(counts)), float(np.mean(layers)),
        counts, layers,
    )


def _rl_row(suite, topo_name, gate_set, targets, ckpt_path, r) -> BenchRow:
    ckpt = load_checkpoint(ckpt_path)
    if ckpt.kind != suite.kind:
        raise ValueError(
            f"checkpoint {ckpt_path} is for kind {ckpt.kind!r}, suite wants {suite.kind!r}"
        )
    rng = np.random.default_rng(suite.seed + 1)
    counts, layers, times = [], [], []
    solved = 0
    for target in targets:
        t0 = time.perf_counter()
        if r == 1:
            result = decode_greedy(ckpt.params, target, gate_set, suite.step_limit)
            if not result.success:
                config = DecodeConfig(strategy="sample", runs=1, step_limit=suite.step_limit)
                result = decode_multi(ckpt.params, target, gate_set, config, rng)
        else:
            config = DecodeConfig(strategy="sample", runs=r, step_limit=suite.step_limit)
            result = decode_multi(ckpt.params, target, gate_set, config, rng)
        times.append((time.perf_counter() - t0) * 1e3)
        if result.success:
            solved += 1
            counts.append(count2q(result.circuit))
            layers.append(depth2q(result.circuit))
    return BenchRow(
        topo_name, f"RL_{r}", r, solved,
        float(np.mean(times)) if times else None,
        float(np.mean(counts)) if counts else None,
        float(np.mean(layers)) if layers else None,
        counts, layers,
    )


def write_report(rows: list[BenchRow], out_dir: str | Path) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "bench.csv"
    json_path = out / "bench.json"
    with open(csv_path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.csv_row())
    payload = []
    for row in rows:
        d = row.csv_row()
        d["count2q"] = list(row.count2q)
        d["layers2q"] = list(row.layers2q)
        payload.append(d)
    with open(json_path, "w") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
    return csv_path, json_path
