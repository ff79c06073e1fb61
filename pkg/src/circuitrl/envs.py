"""Sequential-decision synthesis environment.

The action set is derived from the coupling map, rewards combine gate
and depth penalties with a large completion bonus, and target difficulty
follows a success-rate-driven curriculum.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .circuits import CX, SWAP, Circuit, Gate, H, S, depth2q
from .operators import (
    Observation,
    Operator,
    apply_gate_inplace,
    encode,
    identity_op,
    is_identity,
    random_target,
    random_uniform_clifford,
)
from .topologies import CouplingMap


@dataclass(frozen=True)
class GateSet:
    """Ordered action list bound to a coupling map; index = action id."""

    kind: str
    n_qubits: int
    actions: tuple[Gate, ...]

    def __len__(self) -> int:
        return len(self.actions)


def build_gate_set(kind: str, coupling: CouplingMap) -> GateSet:
    """All legal actions: H/S per qubit (clifford), CX both ways per edge
    (clifford, linear), one SWAP per undirected edge (permutation)."""
    n = coupling.n_qubits
    actions: list[Gate] = []
    if kind == "clifford":
        actions += [H(q) for q in range(n)]
        actions += [S(q) for q in range(n)]
        for a, b in coupling.edge_list:
            actions += [CX(a, b), CX(b, a)]
    elif kind == "linear":
        for a, b in coupling.edge_list:
            actions += [CX(a, b), CX(b, a)]
    elif kind == "permutation":
        actions += [SWAP(a, b) for a, b in coupling.edge_list]
    else:
        raise ValueError(f"unknown operator kind {kind!r}")
    return GateSet(kind, n, tuple(actions))


@dataclass
class RewardConfig:
    success_reward: float = 10.0
    penalty_2q: float = -0.2
    penalty_1q: float = -0.02
    penalty_depth: float = -0.05

    def __post_init__(self):
        if self.success_reward <= 0:
            raise ValueError("success_reward must be positive")
        if any(p > 0 for p in (self.penalty_2q, self.penalty_1q, self.penalty_depth)):
            raise ValueError("penalties must be <= 0")


@dataclass
class CurriculumState:
    difficulty: int = 1
    window_size: int = 128
    threshold: float = 0.9
    max_difficulty: int = 1024
    window: deque = field(default_factory=deque)

    def __post_init__(self):
        self.window = deque(self.window, maxlen=self.window_size)
        if not 1 <= self.difficulty <= self.max_difficulty:
            raise ValueError("difficulty out of range")


def curriculum_update(curriculum: CurriculumState, episode_success: bool) -> CurriculumState:
    """Record an episode outcome; bump difficulty when the window clears the threshold."""
    curriculum.window.append(bool(episode_success))
    if (
        len(curriculum.window) == curriculum.window_size
        and np.mean(curriculum.window) >= curriculum.threshold
    ):
        curriculum.difficulty = min(curriculum.difficulty + 1, curriculum.max_difficulty)
        curriculum.window.clear()
    return curriculum


@dataclass
class EnvState:
    operator: Operator
    steps_taken: int = 0
    accumulated: list[Gate] = field(default_factory=list)
    done: bool = False
    # incremental depth2q bookkeeping for the accumulated gate sequence
    _levels: list[int] = field(default_factory=list)
    _layers_2q: set[int] = field(default_factory=set)

    def __post_init__(self):
        if not self._levels:
            self._levels = [0] * self.operator.n_qubits

    @property
    def depth_2q(self) -> int:
        return len(self._layers_2q)

    def observation(self) -> Observation:
        return encode(self.operator)


def reset(kind: str, coupling: CouplingMap, curriculum: CurriculumState, rng: np.random.Generator) -> EnvState:
    """Fresh episode with a target drawn at the current difficulty.

    Clifford targets switch to the near-uniform sampler once the
    curriculum has reached its maximum difficulty.
    """
    gate_set = build_gate_set(kind, coupling)
    if kind == "clifford" and curriculum.difficulty >= curriculum.max_difficulty:
        op = random_uniform_clifford(coupling.n_qubits, rng)
    else:
        op = random_target(kind, coupling.n_qubits, curriculum.difficulty, gate_set, rng)
    return EnvState(operator=op)


def reset_with_target(target: Operator) -> EnvState:
    return EnvState(operator=target.copy())


def step(
    state: EnvState,
    action: Gate,
    reward_config: RewardConfig,
    step_limit: int,
) -> tuple[EnvState, float, bool]:
    """Apply one action: evolve the operator, accumulate the gate and
    compute the shaped reward."""
    if state.done:
        raise RuntimeError("step() called on a finished episode")
    apply_gate_inplace(state.operator, action)
    state.accumulated.append(action)
    reward = reward_config.penalty_2q if action.is_two_qubit else reward_config.penalty_1q
    depth_before = len(state._layers_2q)
    level = max(state._levels[q] for q in action.qubits) + 1
    for q in action.qubits:
        state._levels[q] = level
    if action.is_two_qubit:
        state._layers_2q.add(level)
    if len(state._layers_2q) > depth_before:
        reward += reward_config.penalty_depth
    state.steps_taken += 1
    solved = is_identity(state.operator)
    if solved:
        reward += reward_config.success_reward
    state.done = solved or state.steps_taken >= step_limit
    return state, reward, state.done


def invert_gate_sequence(gates) -> tuple[Gate, ...]:
    out: list[Gate] = []
    for g in reversed(gates):
        if g.kind == "s":
            out.extend([S(g.qubits[0])] * 3)
        else:
            out.append(g)
    return tuple(out)


def recover_circuit(state: EnvState) -> Circuit:
    """Circuit implementing the episode's original target operator.

    The accumulated gates map the target to the identity, so the answer
    is the reversed, inverted gate sequence (S inverts as three S).
    """
    if not (state.done and is_identity(state.operator)):
        raise RuntimeError("episode did not reach the identity operator")
    n = state.operator.n_qubits
    return Circuit(n, invert_gate_sequence(state.accumulated))


@dataclass
class Transition:
    observation: np.ndarray
    action: int
    reward: float
    done: bool
    value: float
    log_prob: float


class SynthesisEnv:
    """Single environment instance with its own RNG stream.

    The curriculum object is shared by the trainer across instances;
    reset() reads the current difficulty from it.
    """

    def __init__(
        self,
        kind: str,
        coupling: CouplingMap,
        reward_config: RewardConfig,
        step_limit: int,
        curriculum: CurriculumState,
        rng: np.random.Generator,
    ):
        self.kind = kind
        self.coupling = coupling
        self.gate_set = build_gate_set(kind, coupling)
        self.reward_config = reward_config
        self.step_limit = step_limit
        self.curriculum = curriculum
        self.rng = rng
        self.state = reset(kind, coupling, curriculum, rng)

    def observation(self) -> np.ndarray:
        return self.state.observation().as_array()

    def action_mask(self):
        return None

    def step(self, action_id: int) -> tuple[float, bool, bool]:
        """Returns (reward, done, solved)."""
        action = self.gate_set.actions[action_id]
        _, reward, done = step(self.state, action, self.reward_config, self.step_limit)
        solved = done and is_identity(self.state.operator)
        return reward, done, solved

    def episode_metrics(self) -> dict:
        n2q = sum(1 for g in self.state.accumulated if g.is_two_qubit)
        return {"count2q": n2q, "depth2q": self.state.depth_2q}

    def curriculum_feedback(self, solved: bool) -> None:
        curriculum_update(self.curriculum, solved)

    def finish_episode(self):
        self.state = reset(self.kind, self.coupling, self.curriculum, self.rng)
