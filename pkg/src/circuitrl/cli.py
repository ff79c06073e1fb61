"""Command-line entry point.

Subcommands: ``train``, ``synth``, ``route``, ``bench``, ``topologies``.
Exit codes: 0 success, 2 configuration error, 3 verification failure,
4 all runs failed.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .bench import BenchSuite, run_benchmark
from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from .circuits import CircuitSyntaxError, count2q, depth2q, emit_circuit, parse_circuit
from .config import ConfigError, load_config
from .decoders import DecodeConfig, decode_greedy, decode_multi
from .envs import build_gate_set
from .operators import (
    CliffordOp,
    LinearOp,
    PermutationOp,
    apply_circuit,
    gf2_invertible,
    identity_op,
    random_target,
)
from .topologies import topology, topology_names

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_ALL_FAILED = 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_CONFIG):
        super().__init__(message)
        self.code = code


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (ConfigError, CheckpointError, CircuitSyntaxError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyError as e:
        # unknown topology names surface as KeyError from the registry
        print(f"error: {e.args[0] if e.args else e}", file=sys.stderr)
        return EXIT_CONFIG


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="circuitrl")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a synthesis or routing policy")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("synth", help="synthesize an operator with a trained policy")
    p.add_argument("--ckpt", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--target", help="target file (format depends on kind)")
    group.add_argument("--random", type=int, metavar="D", help="random target at difficulty D")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--out", required=True, help="output circuit path (QASM-lite)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy", default="sample", choices=("greedy", "sample", "topk", "topp"))
    p.add_argument("--step-limit", type=int, default=128)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("route", help="route a circuit onto a coupling map")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--ckpt")
    group.add_argument("--baseline", choices=("sabre",))
    p.add_argument("--circuit", required=True)
    p.add_argument("--coupling", required=True)
    p.add_argument("--iterations", type=int, default=1)
    p.add_argument("--budget", type=float, default=None, help="wall-clock seconds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="routed circuit path")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("--suite", required=True, help="suite config file ([bench] section)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("topologies", help="list registered coupling maps")
    p.add_argument("--name", default=None)
    p.set_defaults(func=cmd_topologies)
    return parser


def cmd_train(args) -> int:
    from .ppo import NonFiniteLossError
    from .training import train

    config = load_config(args.config)
    if config.env.kind != "routing":
        topology(config.env.topology)  # fail fast with the registry message
    log_path = Path(args.out).with_suffix(".log.csv")
    try:
        ckpt = train(
            config,
            seed=args.seed,
            log_path=log_path,
            deterministic=args.deterministic,
            progress=args.progress,
        )
    except NonFiniteLossError as e:
        partial = getattr(e, "partial", None)
        if partial is not None:
            ckpt = Checkpoint(
                params=partial,
                kind=config.env.kind,
                topology=config.env.topology,
                seed=args.seed,
            )
            save_checkpoint(ckpt, args.out)
            print(f"error: {e}; partial checkpoint written to {args.out}", file=sys.stderr)
        else:
            print(f"error: {e}", file=sys.stderr)
        return 1
    save_checkpoint(ckpt, args.out)
    print(json.dumps({"checkpoint": str(args.out), "log": str(log_path),
                      "steps": ckpt.training_steps, "difficulty": ckpt.final_difficulty}))
    return EXIT_OK


def _load_target(kind: str, path: str, n_qubits: int):
    text = Path(path).read_text()
    if kind == "permutation":
        tokens = text.replace(",", " ").split()
        mapping = np.array([int(t) for t in tokens], dtype=np.int64)
        if sorted(mapping.tolist()) != list(range(n_qubits)):
            raise CliError(f"{path}: not a permutation of 0..{n_qubits - 1}")
        return PermutationOp(mapping)
    if kind == "linear":
        rows = [line.split() for line in text.splitlines() if line.strip()]
        matrix = np.array([[int(b) for b in row] for row in rows], dtype=np.uint8)
        if matrix.shape != (n_qubits, n_qubits) or not np.all(matrix <= 1):
            raise CliError(f"{path}: expected a {n_qubits}x{n_qubits} bit matrix")
        if not gf2_invertible(matrix):
            raise CliError(f"{path}: matrix is singular over GF(2)")
        return LinearOp(matrix)
    if kind == "clifford":
        circuit = parse_circuit(text)
        if circuit.n_qubits != n_qubits:
            raise CliError(f"{path}: circuit has {circuit.n_qubits} qubits, expected {n_qubits}")
        return apply_circuit(identity_op("clifford", n_qubits), circuit.gates)
    raise CliError(f"unsupported checkpoint kind {kind!r}")


def cmd_synth(args) -> int:
    ckpt = load_checkpoint(args.ckpt)
    if ckpt.kind == "routing":
        raise CliError("synth needs a synthesis checkpoint, got a routing one")
    coupling = topology(ckpt.topology)
    gate_set = build_gate_set(ckpt.kind, coupling)
    rng = np.random.default_rng(args.seed)
    if args.target is not None:
        target = _load_target(ckpt.kind, args.target, coupling.n_qubits)
    else:
        target = random_target(ckpt.kind, coupling.n_qubits, args.random, gate_set, rng)

    correct_phase = ckpt.kind == "clifford"
    t0 = time.perf_counter()
    if args.strategy == "greedy":
        result = decode_greedy(ckpt.params, target, gate_set, args.step_limit, correct_phase)
    else:
        config = DecodeConfig(strategy=args.strategy, runs=args.runs, step_limit=args.step_limit)
        result = decode_multi(ckpt.params, target, gate_set, config, rng, correct_phase)
    elapsed_ms = (time.perf_counter() - t0) * 1e3

    metrics = {
        "success": result.success,
        "runs_succeeded": result.runs_succeeded,
        "count2q": count2q(result.circuit) if result.success else None,
        "depth2q": depth2q(result.circuit) if result.success else None,
        "time_ms": round(elapsed_ms, 3),
    }
    print(json.dumps(metrics))
    if not result.success:
        return EXIT_ALL_FAILED
    if not _replay_matches(target, result.circuit, correct_phase):
        print("error: synthesized circuit failed operator-replay verification", file=sys.stderr)
        return EXIT_VERIFY
    Path(args.out).write_text(emit_circuit(result.circuit))
    return EXIT_OK


def _replay_matches(target, circuit, correct_phase: bool) -> bool:
    replayed = apply_circuit(identity_op(target.kind, target.n_qubits), circuit.gates)
    if isinstance(target, PermutationOp):
        return bool(np.array_equal(replayed.mapping, target.mapping))
    if isinstance(target, LinearOp):
        return bool(np.array_equal(replayed.matrix, target.matrix))
    if isinstance(target, CliffordOp):
        ok = np.array_equal(replayed.matrix, target.matrix)
        if correct_phase:
            ok = ok and np.array_equal(replayed.phase, target.phase)
        return bool(ok)
    return False


def cmd_route(args) -> int:
    from .routing import (
        bidirectional_route,
        finalize_route,
        route_with_budget,
        route_with_policy,
        sabre_lite,
    )

    circuit = parse_circuit(Path(args.circuit).read_text())
    coupling = topology(args.coupling)
    rng = np.random.default_rng(args.seed)

    if args.baseline == "sabre":
        router = lambda c, layout: sabre_lite(c, coupling, initial_layout=layout)
        result = bidirectional_route(circuit, router, args.iterations)
    else:
        ckpt = load_checkpoint(args.ckpt)
        if ckpt.kind != "routing":
            raise CliError(f"route needs a routing checkpoint, got kind {ckpt.kind!r}")
        horizon = int(ckpt.env_config.get("horizon", 8))
        if args.budget is not None:
            result = route_with_budget(circuit, coupling, ckpt.params, horizon, args.budget, rng)
        else:
            router = lambda c, layout: route_with_policy(
                ckpt.params, horizon=horizon, circuit=c, coupling=coupling,
                rng=rng, initial_layout=layout,
            )
            result = bidirectional_route(circuit, router, args.iterations)

    report = finalize_route(result, circuit, coupling)
    out_path = Path(args.out) if args.out else Path(args.circuit).with_suffix(".routed.qasm")
    out_path.write_text(emit_circuit(result.circuit))
    payload = {
        "initial_layout": list(result.initial_layout.logical_to_physical),
        "final_layout": list(result.final_layout.logical_to_physical),
        "metrics": result.metrics,
        "circuit_file": str(out_path),
        "verification": {
            "legal": report.legal,
            "permutation_ok": report.permutation_ok,
            "dense_ok": report.dense_ok,
            "detail": report.detail,
        },
    }
    print(json.dumps(payload))
    if not report.ok:
        print(f"error: routed circuit failed verification: {report.detail}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_bench(args) -> int:
    config = load_config(args.suite)
    b = config.bench
    if not b.topologies:
        raise CliError("[bench] topologies: at least one topology is required")
    suite = BenchSuite(
        kind=b.kind,
        topologies=b.topologies,
        n_targets=b.n_targets,
        runs=b.runs,
        seed=b.seed,
        include_oracle=b.include_oracle,
        checkpoints=b.checkpoint_map(),
        step_limit=b.step_limit,
    )
    rows = run_benchmark(suite, args.out)
    print(json.dumps({"rows": len(rows), "out": str(args.out)}))
    return EXIT_OK


def cmd_topologies(args) -> int:
    if args.name is None:
        for name in topology_names():
            cm = topology(name)
            print(f"{name}: {cm.n_qubits} qubits, {len(cm.edge_list)} edges")
        return EXIT_OK
    cm = topology(args.name)
    for a, b in cm.edge_list:
        print(f"{a} {b}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
