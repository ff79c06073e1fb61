"""Inference-time decoding of trained synthesis policies.

Greedy decoding is deterministic with loop detection; sampling, top-k
and top-p decoders draw multiple candidate circuits and post-select by
(two-qubit depth, two-qubit count).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, count2q, depth2q
from .envs import GateSet, RewardConfig, recover_circuit, reset_with_target, step
from .operators import CliffordOp, Operator, fix_phase, is_identity
from .policy import Policy, PolicyParams

STRATEGIES = ("greedy", "sample", "topk", "topp")


@dataclass
class DecodeConfig:
    strategy: str = "sample"
    runs: int = 1
    step_limit: int = 128
    top_k: int = 8
    top_p: float = 0.9

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")


@dataclass
class SynthesisResult:
    circuit: Circuit | None
    runs_attempted: int
    runs_succeeded: int
    wall_time_s: float

    @property
    def success(self) -> bool:
        return self.circuit is not None


_NEUTRAL_REWARDS = RewardConfig(success_reward=1.0, penalty_2q=0.0, penalty_1q=0.0, penalty_depth=0.0)


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def _choose_action(logits: np.ndarray, strategy: str, config: DecodeConfig, rng) -> int:
    if strategy == "greedy":
        return int(np.argmax(logits))  # ties break to the lowest action id
    probs = _softmax(logits)
    if strategy == "topk":
        keep = np.argsort(-probs, kind="stable")[: config.top_k]
        masked = np.zeros_like(probs)
        masked[keep] = probs[keep]
        probs = masked / masked.sum()
    elif strategy == "topp":
        order = np.argsort(-probs, kind="stable")
        cum = np.cumsum(probs[order])
        cut = int(np.searchsorted(cum, config.top_p)) + 1
        masked = np.zeros_like(probs)
        masked[order[:cut]] = probs[order[:cut]]
        probs = masked / masked.sum()
    return int(rng.choice(len(probs), p=probs))


def _decode_once(
    policy: Policy,
    target: Operator,
    gate_set: GateSet,
    step_limit: int,
    strategy: str,
    config: DecodeConfig,
    rng,
    correct_phase: bool,
) -> Circuit | None:
    state = reset_with_target(target)
    if is_identity(state.operator):
        state.done = True
        return _finish(state, correct_phase)
    seen: set[bytes] = {state.operator.key()}
    while not state.done:
        logits, _ = policy.forward_np(state.observation().as_array())
        action_id = _choose_action(logits, strategy, config, rng)
        step(state, gate_set.actions[action_id], _NEUTRAL_REWARDS, step_limit)
        if is_identity(state.operator):
            return _finish(state, correct_phase)
        key = state.operator.key()
        if key in seen:
            if strategy == "greedy":
                return None  # deterministic closed loop
        else:
            seen.add(key)
    return None


def _finish(state, correct_phase: bool) -> Circuit:
    circuit = recover_circuit(state)
    if correct_phase and isinstance(state.operator, CliffordOp):
        fix = fix_phase(state.operator)
        circuit = Circuit(circuit.n_qubits, tuple(fix) + circuit.gates)
    return circuit


def decode_greedy(
    params: PolicyParams,
    target: Operator,
    gate_set: GateSet,
    step_limit: int = 128,
    correct_phase: bool = False,
) -> SynthesisResult:
    """Deterministic argmax decoding with closed-loop detection."""
    _check_arch(params, gate_set)
    policy = Policy(params)
    t0 = time.perf_counter()
    config = DecodeConfig(strategy="greedy", step_limit=step_limit)
    circuit = _decode_once(policy, target, gate_set, step_limit, "greedy", config, None, correct_phase)
    return SynthesisResult(circuit, 1, int(circuit is not None), time.perf_counter() - t0)


def decode_multi(
    params: PolicyParams,
    target: Operator,
    gate_set: GateSet,
    config: DecodeConfig,
    rng: np.random.Generator,
    correct_phase: bool = False,
) -> SynthesisResult:
    """Best of `runs` stochastic decodes by (depth2q, count2q)."""
    _check_arch(params, gate_set)
    policy = Policy(params)
    t0 = time.perf_counter()
    best: Circuit | None = None
    best_key = None
    succeeded = 0
    seeds = rng.integers(0, 2**63 - 1, size=config.runs)
    for run in range(config.runs):
        run_rng = np.random.default_rng(int(seeds[run]))
        circuit = _decode_once(
            policy, target, gate_set, config.step_limit, config.strategy, config, run_rng, correct_phase
        )
        if circuit is None:
            continue
        succeeded += 1
        key = (depth2q(circuit), count2q(circuit))
        if best_key is None or key < best_key:
            best, best_key = circuit, key
    return SynthesisResult(best, config.runs, succeeded, time.perf_counter() - t0)


def success_rate(
    params: PolicyParams,
    gate_set: GateSet,
    n_targets: int,
    config: DecodeConfig,
    rng: np.random.Generator,
) -> float:
    """Fraction of random maximum-difficulty targets solved within the step limit."""
    from .operators import uniform_random_operator

    if n_targets == 0:
        return 1.0
    solved = 0
    for _ in range(n_targets):
        target = uniform_random_operator(gate_set.kind, gate_set.n_qubits, rng)
        if config.strategy == "greedy":
            result = decode_greedy(params, target, gate_set, config.step_limit)
        else:
            result = decode_multi(params, target, gate_set, config, rng)
        solved += int(result.success)
    return solved / n_targets


def _check_arch(params: PolicyParams, gate_set: GateSet) -> None:
    if params.arch.n_actions != len(gate_set.actions):
        raise ValueError(
            f"policy has {params.arch.n_actions} actions but gate set has {len(gate_set.actions)}"
        )
