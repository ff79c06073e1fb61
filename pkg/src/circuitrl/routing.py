"""SWAP-insertion routing: pass-through mechanics, cancellation-aware
costs, initial-layout absorption, a distance-heuristic baseline, a
fixed-size and a generic learned SWAP selector, and an exact
verification report.

The output circuit keeps per-gate provenance (original op id or
inserted SWAP) so routed circuits can be verified by permutation
tracking and, at small sizes, dense unitary equivalence.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .circuits import CX, SWAP, Circuit, Gate, Layout, count2q, depth2q
from .envs import RewardConfig
from .policy import Policy, PolicyParams
from .topologies import CouplingMap

SWAP_COST_BARE = 3.0  # one SWAP decomposes into three CX
SWAP_COST_MERGE = 2.0  # CX followed by SWAP rewrites to two CX
SWAP_COST_CANCEL = 0.0  # SWAP cancels a pending SWAP on the same pair


@dataclass
class RoutingConfig:
    horizon: int = 8
    max_active_swaps: int = 32
    step_limit: int = 2048
    reward: RewardConfig = field(default_factory=RewardConfig)

    def __post_init__(self):
        if self.horizon < 1 or self.max_active_swaps < 1:
            raise ValueError("horizon and max_active_swaps must be >= 1")


@dataclass
class OutputGate:
    gate: Gate  # physical qubits
    op_id: int | None  # None marks an inserted SWAP


@dataclass
class RoutedResult:
    circuit: Circuit
    initial_layout: Layout
    final_layout: Layout
    output: list[OutputGate]
    stall_fallbacks: int = 0
    active_swap_overflows: int = 0

    @property
    def metrics(self) -> dict:
        return {
            "count2q": count2q(self.circuit),
            "depth2q": depth2q(self.circuit),
            "stall_fallbacks": self.stall_fallbacks,
        }

    def sort_key(self) -> tuple[int, int]:
        return (depth2q(self.circuit), count2q(self.circuit))


class RoutingState:
    """Mutable routing episode state over a coupling map."""

    def __init__(
        self,
        circuit: Circuit,
        coupling: CouplingMap,
        initial_layout: Layout | None = None,
        absorb_layout: bool = True,
    ):
        self.absorb_layout = absorb_layout
        if circuit.n_qubits > coupling.n_qubits:
            raise ValueError(
                f"circuit needs {circuit.n_qubits} qubits, map has {coupling.n_qubits}"
            )
        self.coupling = coupling
        self.n = coupling.n_qubits
        self.ops: list[Gate] = []
        self.attached_1q: dict[int, list[Gate]] = {}
        self.trailing_1q: list[Gate] = []
        pending_1q: dict[int, list[Gate]] = {}
        for g in circuit.gates:
            if g.is_two_qubit:
                op_id = len(self.ops)
                attach = []
                for q in g.qubits:
                    attach.extend(pending_1q.pop(q, ()))
                if attach:
                    self.attached_1q[op_id] = attach
                self.ops.append(g)
            else:
                pending_1q.setdefault(g.qubits[0], []).append(g)
        for q in sorted(pending_1q):
            self.trailing_1q.extend(pending_1q[q])

        self.queues: list[deque[int]] = [deque() for _ in range(self.n)]
        for op_id, g in enumerate(self.ops):
            for q in g.qubits:
                self.queues[q].append(op_id)
        layout = initial_layout or Layout.identity(self.n)
        self.initial_layout = layout
        self.layout = layout
        self.touched = [False] * self.n
        self.output: list[OutputGate] = []
        self.emitted = 0
        self.swaps_applied = 0
        self.steps_since_progress = 0
        self.stall_fallbacks = 0
        self._drain()

    # -- structure queries ------------------------------------------------

    @property
    def done(self) -> bool:
        return self.emitted == len(self.ops)

    def front_ops(self) -> list[int]:
        """Op ids whose per-qubit predecessors have all been emitted."""
        out = []
        for op_id, g in enumerate(self.ops):
            if all(self.queues[q] and self.queues[q][0] == op_id for q in g.qubits):
                out.append(op_id)
        return out

    def remaining_layers(self) -> list[list[int]]:
        """ASAP layering of the unemitted two-qubit ops."""
        level = [0] * self.n
        layers: list[list[int]] = []
        for op_id in range(len(self.ops)):
            if not self._pending(op_id):
                continue
            g = self.ops[op_id]
            lv = max(level[q] for q in g.qubits) + 1
            for q in g.qubits:
                level[q] = lv
            while len(layers) < lv:
                layers.append([])
            layers[lv - 1].append(op_id)
        return layers

    def _pending(self, op_id: int) -> bool:
        return any(op_id in self.queues[q] for q in self.ops[op_id].qubits)

    def physical_pair(self, op_id: int) -> tuple[int, int]:
        la, lb = self.ops[op_id].qubits
        l2p = self.layout.logical_to_physical
        return l2p[la], l2p[lb]

    # -- mechanics --------------------------------------------------------

    def _drain(self) -> int:
        """Move every coupling-adjacent front op to the output. Returns count."""
        moved = 0
        progress = True
        while progress:
            progress = False
            for op_id in self.front_ops():
                pa, pb = self.physical_pair(op_id)
                if self.coupling.connected(pa, pb):
                    self._emit(op_id, pa, pb)
                    moved += 1
                    progress = True
        if moved:
            self.steps_since_progress = 0
        return moved

    def _emit(self, op_id: int, pa: int, pb: int) -> None:
        g = self.ops[op_id]
        l2p = self.layout.logical_to_physical
        for h in self.attached_1q.get(op_id, ()):
            self.output.append(OutputGate(Gate(h.kind, (l2p[h.qubits[0]],)), op_id))
        self.output.append(OutputGate(Gate(g.kind, (pa, pb)), op_id))
        for q in g.qubits:
            self.queues[q].popleft()
        self.touched[pa] = self.touched[pb] = True
        self.emitted += 1

    def classify_swap(self, a: int, b: int) -> str:
        """free (untouched pair), cancel (pending SWAP), merge (pending CX)
        or bare."""
        if self.absorb_layout and not self.touched[a] and not self.touched[b]:
            return "free"
        for entry in reversed(self.output):
            if a in entry.gate.qubits or b in entry.gate.qubits:
                if set(entry.gate.qubits) == {a, b}:
                    if entry.op_id is None and entry.gate.kind == "swap":
                        return "cancel"
                    if entry.gate.kind == "cx":
                        return "merge"
                return "bare"
        return "bare"

    def output_depth2q(self) -> int:
        return depth2q(Circuit(self.n, tuple(e.gate for e in self.output)))

    def apply_swap(self, a: int, b: int, reward_config: RewardConfig | None = None) -> float:
        """Apply one SWAP decision; returns the step reward."""
        if not self.coupling.connected(a, b):
            raise ValueError(f"swap ({a}, {b}) not in coupling map")
        kind = self.classify_swap(a, b)
        depth_before = self.output_depth2q()
        if kind == "free":
            self.layout = self.layout.swapped_physical(a, b)
            self.initial_layout = self.initial_layout.swapped_physical(a, b)
            cost = 0.0
        elif kind == "cancel":
            for i in range(len(self.output) - 1, -1, -1):
                entry = self.output[i]
                if entry.op_id is None and set(entry.gate.qubits) == {a, b}:
                    del self.output[i]
                    break
            self.layout = self.layout.swapped_physical(a, b)
            cost = SWAP_COST_CANCEL
        else:
            self.output.append(OutputGate(SWAP(a, b), None))
            self.touched[a] = self.touched[b] = True
            self.layout = self.layout.swapped_physical(a, b)
            cost = SWAP_COST_MERGE if kind == "merge" else SWAP_COST_BARE
        self.swaps_applied += 1
        self.steps_since_progress += 1
        moved = self._drain()
        reward = 0.0
        if reward_config is not None:
            # penalty_2q is the per-CX-equivalent gate penalty
            reward += cost * reward_config.penalty_2q
            if self.output_depth2q() > depth_before:
                reward += reward_config.penalty_depth
            if self.done:
                reward += reward_config.success_reward
        return reward

    def finalize(self) -> RoutedResult:
        if not self.done:
            raise RuntimeError("routing episode is not finished")
        l2p = self.layout.logical_to_physical
        output = list(self.output)
        for h in self.trailing_1q:
            output.append(OutputGate(Gate(h.kind, (l2p[h.qubits[0]],)), -1))
        circuit = Circuit(self.n, tuple(e.gate for e in output))
        return RoutedResult(
            circuit=circuit,
            initial_layout=self.initial_layout,
            final_layout=self.layout,
            output=output,
            stall_fallbacks=self.stall_fallbacks,
        )


def route_step(
    state: RoutingState, swap: tuple[int, int], reward_config: RewardConfig
) -> tuple[RoutingState, float]:
    """Apply one SWAP decision plus pass-through; returns (state, reward)."""
    reward = state.apply_swap(swap[0], swap[1], reward_config)
    return state, reward


def routing_cost(state: RoutingState, swap: tuple[int, int]) -> float:
    """CX-equivalent cost of applying the SWAP at the current state."""
    kind = state.classify_swap(*swap)
    if kind == "free":
        return 0.0
    return {"cancel": SWAP_COST_CANCEL, "merge": SWAP_COST_MERGE, "bare": SWAP_COST_BARE}[kind]


def active_swaps(state: RoutingState) -> list[tuple[int, int]]:
    """Coupling SWAPs sharing a qubit with a front-layer op, in edge order."""
    front_phys: set[int] = set()
    for op_id in state.front_ops():
        front_phys.update(state.physical_pair(op_id))
    return [
        e for e in state.coupling.edge_list if e[0] in front_phys or e[1] in front_phys
    ]


def encode_fixed(state: RoutingState, n: int, horizon: int) -> np.ndarray:
    """(N, N, H) binary tensor: symmetric marks per remaining layer."""
    if state.n > n:
        raise ValueError(f"state has {state.n} qubits, encoding allows {n}")
    obs = np.zeros((n, n, horizon), dtype=np.float32)
    for h, layer in enumerate(state.remaining_layers()[:horizon]):
        for op_id in layer:
            pa, pb = state.physical_pair(op_id)
            obs[pa, pb, h] = 1.0
            obs[pb, pa, h] = 1.0
    return obs


def encode_generic(
    state: RoutingState, config: RoutingConfig
) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]], int]:
    """(S_a, H) distance-variation features plus a validity mask.

    Entry (s, h) sums, over ops in remaining layer h, the decrease in
    layout distance the SWAP would produce (each op contributes -2..2).
    Returns (observation, mask, candidate list, overflow count).
    """
    cands = active_swaps(state)
    overflow = max(0, len(cands) - config.max_active_swaps)
    cands = cands[: config.max_active_swaps]
    obs = np.zeros((config.max_active_swaps, config.horizon), dtype=np.float32)
    mask = np.zeros(config.max_active_swaps, dtype=bool)
    dist = state.coupling.dist
    layers = state.remaining_layers()[: config.horizon]
    for s, (a, b) in enumerate(cands):
        mask[s] = True
        for h, layer in enumerate(layers):
            delta = 0
            for op_id in layer:
                pa, pb = state.physical_pair(op_id)
                qa = _swapped(pa, a, b)
                qb = _swapped(pb, a, b)
                delta += int(dist[pa, pb]) - int(dist[qa, qb])
            obs[s, h] = delta
    return obs, mask, cands, overflow


def _swapped(q: int, a: int, b: int) -> int:
    return b if q == a else a if q == b else q


def _stall_threshold(state: RoutingState) -> int:
    return state.n * max(1, state.coupling.diameter)


def _forced_step(state: RoutingState) -> tuple[int, int]:
    """Shortest-path move for the first front op; guarantees progress."""
    op_id = state.front_ops()[0]
    pa, pb = state.physical_pair(op_id)
    dist = state.coupling.dist
    best = None
    for a, b in state.coupling.edge_list:
        qa, qb = _swapped(pa, a, b), _swapped(pb, a, b)
        if int(dist[qa, qb]) < int(dist[pa, pb]):
            key = int(dist[qa, qb])
            if best is None or key < best[0]:
                best = (key, (a, b))
    assert best is not None, "connected map must offer an improving swap"
    return best[1]


def _maybe_fallback(state: RoutingState) -> bool:
    if state.steps_since_progress >= _stall_threshold(state):
        a, b = _forced_step(state)
        state.apply_swap(a, b)
        state.stall_fallbacks += 1
        state.steps_since_progress = 0
        return True
    return False


def sabre_lite(
    circuit: Circuit,
    coupling: CouplingMap,
    lookahead_weight: float = 0.5,
    lookahead_window: int = 20,
    initial_layout: Layout | None = None,
    decay_factor: float = 0.001,
) -> RoutedResult:
    """Classic distance-heuristic routing with lookahead and decay.

    The baseline keeps the classic semantics: it never absorbs SWAPs
    into the initial layout, so a lone op at distance d costs d-1 SWAPs.
    """
    state = RoutingState(circuit, coupling, initial_layout, absorb_layout=False)
    decay = np.zeros(coupling.n_qubits)
    while not state.done:
        if _maybe_fallback(state):
            continue
        front = state.front_ops()
        layers = state.remaining_layers()
        lookahead = [op for layer in layers[1:] for op in layer][:lookahead_window]
        dist = coupling.dist
        best = None
        for a, b in active_swaps(state):
            score = decay[a] + decay[b]
            for ops, weight in ((front, 1.0), (lookahead, lookahead_weight)):
                for op_id in ops:
                    pa, pb = state.physical_pair(op_id)
                    score += weight * int(dist[_swapped(pa, a, b), _swapped(pb, a, b)])
            if best is None or score < best[0]:
                best = (score, (a, b))
        a, b = best[1]
        decay[a] += decay_factor
        decay[b] += decay_factor
        state.apply_swap(a, b)
    return state.finalize()


def route_with_policy(
    circuit: Circuit,
    coupling: CouplingMap,
    params: PolicyParams,
    horizon: int,
    rng: np.random.Generator | None = None,
    greedy: bool = False,
    initial_layout: Layout | None = None,
    step_limit: int = 4096,
) -> RoutedResult:
    """Route with a trained fixed-size SWAP-selection policy."""
    policy = Policy(params)
    n = params.arch.input_shape[0]
    edges = coupling.edge_list
    if params.arch.n_actions != len(edges):
        raise ValueError("policy action count does not match coupling edges")
    state = RoutingState(circuit, coupling, initial_layout)
    steps = 0
    while not state.done and steps < step_limit:
        if _maybe_fallback(state):
            continue
        obs = encode_fixed(state, n, horizon)
        logits, _ = policy.forward_np(obs)
        if greedy:
            idx = int(np.argmax(logits))
        else:
            z = logits - logits.max()
            p = np.exp(z) / np.exp(z).sum()
            idx = int(rng.choice(len(p), p=p))
        state.apply_swap(*edges[idx])
        steps += 1
    while not state.done:
        # exhausted the policy budget; finish with forced progress moves
        a, b = _forced_step(state)
        state.apply_swap(a, b)
        state.stall_fallbacks += 1
    return state.finalize()


def bidirectional_route(
    circuit: Circuit,
    router,
    iterations: int = 8,
) -> RoutedResult:
    """Alternate forward and backward passes, seeding each pass's initial
    layout with the previous final layout; best pass wins."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    two_q_only = all(g.is_two_qubit for g in circuit.gates)
    reversed_circuit = Circuit(circuit.n_qubits, tuple(reversed(circuit.gates))) if two_q_only else None
    best: RoutedResult | None = None
    layout: Layout | None = None
    for it in range(iterations):
        forward = it % 2 == 0 or reversed_circuit is None
        src = circuit if forward else reversed_circuit
        result = router(src, layout)
        layout = result.final_layout
        candidate = result if forward else _reverse_result(result)
        if best is None or candidate.sort_key() < best.sort_key():
            best = candidate
    return best


def _reverse_result(result: RoutedResult) -> RoutedResult:
    n_ops = max((e.op_id for e in result.output if e.op_id is not None), default=-1) + 1
    output = []
    for e in reversed(result.output):
        op_id = None if e.op_id is None else n_ops - 1 - e.op_id
        output.append(OutputGate(e.gate, op_id))
    return RoutedResult(
        circuit=Circuit(result.circuit.n_qubits, tuple(e.gate for e in output)),
        initial_layout=result.final_layout,
        final_layout=result.initial_layout,
        output=output,
        stall_fallbacks=result.stall_fallbacks,
    )


def route_with_budget(
    circuit: Circuit,
    coupling: CouplingMap,
    params: PolicyParams,
    horizon: int,
    budget_s: float,
    rng: np.random.Generator,
) -> RoutedResult:
    """Sample routed circuits until the wall-clock budget runs out; keep
    the best by (depth2q, count2q)."""
    deadline = time.perf_counter() + budget_s
    best: RoutedResult | None = None
    first = True
    while first or time.perf_counter() < deadline:
        first = False
        result = route_with_policy(circuit, coupling, params, horizon, rng=rng)
        if best is None or result.sort_key() < best.sort_key():
            best = result
    return best


@dataclass
class VerificationReport:
    legal: bool
    permutation_ok: bool
    dense_ok: bool | None  # None when the circuit is too large to check
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.legal and self.permutation_ok and self.dense_ok is not False


def finalize_route(
    result: RoutedResult, original: Circuit, coupling: CouplingMap
) -> VerificationReport:
    """Coupling legality, permutation tracking, and (n <= 6) dense
    unitary equivalence of a routed circuit."""
    for e in result.output:
        if e.gate.is_two_qubit and not coupling.connected(*e.gate.qubits):
            return VerificationReport(False, False, None, f"illegal gate {e.gate}")

    original_2q = [g for g in original.gates if g.is_two_qubit]
    p2l = list(result.initial_layout.physical_to_logical)
    replayed: list[tuple[int, Gate]] = []
    for e in result.output:
        if e.op_id is None:
            a, b = e.gate.qubits
            p2l[a], p2l[b] = p2l[b], p2l[a]
        elif e.gate.is_two_qubit:
            pa, pb = e.gate.qubits
            replayed.append((e.op_id, Gate(e.gate.kind, (p2l[pa], p2l[pb]))))
    if p2l != list(result.final_layout.physical_to_logical):
        return VerificationReport(True, False, None, "final layout mismatch")
    if sorted(op_id for op_id, _ in replayed) != list(range(len(original_2q))):
        return VerificationReport(True, False, None, "op multiset mismatch")
    per_qubit_seen: dict[int, int] = {}
    for op_id, g in replayed:
        if g != original_2q[op_id]:
            return VerificationReport(True, False, None, f"op {op_id} replayed as {g}")
        for q in g.qubits:
            prev = per_qubit_seen.get(q, -1)
            # per-qubit op order must match the original circuit's order
            if op_id < prev:
                return VerificationReport(True, False, None, f"op order violated on qubit {q}")
            per_qubit_seen[q] = op_id

    dense_ok: bool | None = None
    if result.circuit.n_qubits <= 6:
        from .oracles import dense_simulate

        u_routed = dense_simulate(result.circuit)
        padded = Circuit(result.circuit.n_qubits, original.gates)
        u_logical = dense_simulate(padded)
        e_init = _layout_unitary(result.initial_layout)
        e_final = _layout_unitary(result.final_layout)
        lhs = u_routed @ e_init
        rhs = e_final @ u_logical
        # compare up to global phase
        idx = np.unravel_index(np.argmax(np.abs(rhs)), rhs.shape)
        phase = lhs[idx] / rhs[idx] if abs(rhs[idx]) > 1e-12 else 1.0
        dense_ok = bool(np.allclose(lhs, phase * rhs, atol=1e-8))
        if not dense_ok:
            return VerificationReport(True, True, False, "dense unitary mismatch")
    return VerificationReport(True, True, dense_ok)


def random_qv_circuit(n_qubits: int, n_layers: int, rng: np.random.Generator) -> Circuit:
    """Quantum-volume-style circuit: each layer pairs up a random qubit
    permutation and applies one CX per pair."""
    gates: list[Gate] = []
    for _ in range(n_layers):
        order = rng.permutation(n_qubits)
        for i in range(0, n_qubits - 1, 2):
            a, b = int(order[i]), int(order[i + 1])
            gates.append(CX(a, b))
    return Circuit(n_qubits, tuple(gates))


class FixedRoutingEnv:
    """Fixed-size routing environment over all coupling SWAPs.

    Curriculum difficulty is the number of QV-style layers in the
    randomly drawn input circuit. Follows the trainer env interface.
    """

    def __init__(
        self,
        coupling: CouplingMap,
        config: RoutingConfig,
        curriculum,
        rng: np.random.Generator,
    ):
        self.coupling = coupling
        self.config = config
        self.curriculum = curriculum
        self.rng = rng
        self.edges = coupling.edge_list
        self.n_actions = len(self.edges)
        self.steps = 0
        self.state = self._new_state()

    def _new_state(self) -> RoutingState:
        circuit = random_qv_circuit(
            self.coupling.n_qubits, self.curriculum.difficulty, self.rng
        )
        self.steps = 0
        return RoutingState(circuit, self.coupling)

    def observation(self) -> np.ndarray:
        return encode_fixed(self.state, self.coupling.n_qubits, self.config.horizon)

    def action_mask(self):
        return None

    def step(self, action_id: int) -> tuple[float, bool, bool]:
        if self.state.done:
            # input drained at reset; episode resolves in one no-op step
            return self.config.reward.success_reward, True, True
        a, b = self.edges[action_id]
        reward = self.state.apply_swap(a, b, self.config.reward)
        self.steps += 1
        solved = self.state.done
        done = solved or self.steps >= self.config.step_limit
        return reward, done, solved

    def episode_metrics(self) -> dict:
        gates = tuple(e.gate for e in self.state.output)
        c = Circuit(self.coupling.n_qubits, gates)
        return {"count2q": count2q(c), "depth2q": depth2q(c)}

    def curriculum_feedback(self, solved: bool) -> None:
        from .envs import curriculum_update

        curriculum_update(self.curriculum, solved)

    def finish_episode(self):
        self.state = self._new_state()


class GenericRoutingEnv(FixedRoutingEnv):
    """Generic routing environment over masked active-SWAP slots."""

    def __init__(self, coupling, config, curriculum, rng):
        super().__init__(coupling, config, curriculum, rng)
        self.n_actions = config.max_active_swaps
        self._sync()

    def _sync(self):
        obs, mask, cands, overflow = encode_generic(self.state, self.config)
        self._obs, self._mask, self._cands = obs[:, :, None], mask, cands
        self.overflows = getattr(self, "overflows", 0) + overflow

    def observation(self) -> np.ndarray:
        return self._obs

    def action_mask(self) -> np.ndarray:
        if not self._mask.any():
            # drained circuit: any slot is acceptable for the final no-op step
            mask = self._mask.copy()
            mask[0] = True
            return mask
        return self._mask

    def step(self, action_id: int) -> tuple[float, bool, bool]:
        if self.state.done:
            return self.config.reward.success_reward, True, True
        if action_id < len(self._cands):
            a, b = self._cands[action_id]
            reward = self.state.apply_swap(a, b, self.config.reward)
        else:
            reward = 0.0
        self.steps += 1
        solved = self.state.done
        done = solved or self.steps >= self.config.step_limit
        if not done:
            self._sync()
        return reward, done, solved

    def finish_episode(self):
        self.state = self._new_state()
        self._sync()


def _layout_unitary(layout: Layout) -> np.ndarray:
    """Permutation unitary embedding logical wires into physical wires."""
    n = len(layout.logical_to_physical)
    dim = 1 << n
    u = np.zeros((dim, dim))
    l2p = layout.logical_to_physical
    for x in range(dim):
        y = 0
        for q in range(n):
            if (x >> q) & 1:
                y |= 1 << l2p[q]
        u[y, x] = 1.0
    return u
