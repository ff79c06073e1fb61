import numpy as np
import pytest

from circuitrl.circuits import CX, SWAP, H, S, count2q, depth2q
from circuitrl.envs import (
    CurriculumState,
    GateSet,
    RewardConfig,
    SynthesisEnv,
    build_gate_set,
    curriculum_update,
    invert_gate_sequence,
    recover_circuit,
    reset,
    reset_with_target,
    step,
)
from circuitrl.operators import (
    PermutationOp,
    apply_circuit,
    identity_op,
    is_identity,
)
from circuitrl.topologies import topology


class TestGateSet:
    def test_clifford_26_actions_on_7h(self):
        gs = build_gate_set("clifford", topology("7-H"))
        assert len(gs) == 26

    def test_clifford_ordering(self):
        gs = build_gate_set("clifford", topology("3-L"))
        assert gs.actions[:3] == (H(0), H(1), H(2))
        assert gs.actions[3:6] == (S(0), S(1), S(2))
        assert gs.actions[6:] == (CX(0, 1), CX(1, 0), CX(1, 2), CX(2, 1))

    def test_linear_both_directions(self):
        gs = build_gate_set("linear", topology("3-L"))
        assert gs.actions == (CX(0, 1), CX(1, 0), CX(1, 2), CX(2, 1))

    def test_permutation_one_per_edge(self):
        gs = build_gate_set("permutation", topology("4-L"))
        assert gs.actions == (SWAP(0, 1), SWAP(1, 2), SWAP(2, 3))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            build_gate_set("unitary", topology("3-L"))


class TestRewardConfig:
    def test_defaults(self):
        r = RewardConfig()
        assert r.success_reward == 10.0
        assert r.penalty_2q == -0.2
        assert r.penalty_1q == -0.02
        assert r.penalty_depth == -0.05

    def test_validation(self):
        with pytest.raises(ValueError):
            RewardConfig(success_reward=0.0)
        with pytest.raises(ValueError):
            RewardConfig(penalty_2q=0.1)


class TestCurriculum:
    def test_defaults(self):
        c = CurriculumState()
        assert c.difficulty == 1
        assert c.window_size == 128
        assert c.threshold == 0.9
        assert c.max_difficulty == 1024

    def test_no_bump_until_window_full(self):
        c = CurriculumState(window_size=4)
        for _ in range(3):
            curriculum_update(c, True)
        assert c.difficulty == 1

    def test_bump_and_clear_on_threshold(self):
        c = CurriculumState(window_size=4, threshold=0.75)
        for outcome in (True, True, True, False):
            curriculum_update(c, outcome)
        assert c.difficulty == 2
        assert len(c.window) == 0

    def test_no_bump_below_threshold(self):
        c = CurriculumState(window_size=4, threshold=0.9)
        for outcome in (True, True, False, True):
            curriculum_update(c, outcome)
        assert c.difficulty == 1
        # the window keeps sliding rather than clearing
        assert len(c.window) == 4

    def test_capped_at_max(self):
        c = CurriculumState(window_size=1, max_difficulty=2)
        for _ in range(5):
            curriculum_update(c, True)
        assert c.difficulty == 2


class TestStep:
    def test_single_action_episode_reward(self):
        # solving in one SWAP: -0.2 (gate) - 0.05 (new 2q layer) + 10
        target = PermutationOp(np.array([1, 0, 2]))
        state = reset_with_target(target)
        state, reward, done = step(state, SWAP(0, 1), RewardConfig(), 128)
        assert done and is_identity(state.operator)
        assert reward == pytest.approx(10.0 - 0.2 - 0.05)

    def test_one_qubit_penalty(self):
        state = reset_with_target(identity_op("clifford", 2))
        state.done = False
        _, reward, _ = step(state, H(0), RewardConfig(), 128)
        assert reward == pytest.approx(-0.02)

    def test_depth_penalty_only_on_new_layer(self):
        target = apply_circuit(identity_op("permutation", 4), [SWAP(0, 1), SWAP(2, 3)])
        state = reset_with_target(target)
        _, r1, _ = step(state, SWAP(0, 1), RewardConfig(), 128)
        assert r1 == pytest.approx(-0.25)
        # second SWAP fits in the same ASAP layer: no extra depth penalty
        _, r2, done = step(state, SWAP(2, 3), RewardConfig(), 128)
        assert done
        assert r2 == pytest.approx(10.0 - 0.2)

    def test_step_limit_terminates(self):
        # a 3-cycle can never be solved by toggling one SWAP
        state = reset_with_target(PermutationOp(np.array([2, 0, 1])))
        dones = []
        for _ in range(3):
            state, _, done = step(state, SWAP(0, 1), RewardConfig(), 3)
            dones.append(done)
        assert dones == [False, False, True]
        assert not is_identity(state.operator)

    def test_step_after_done_raises(self):
        state = reset_with_target(PermutationOp(np.array([1, 0])))
        step(state, SWAP(0, 1), RewardConfig(), 128)
        with pytest.raises(RuntimeError):
            step(state, SWAP(0, 1), RewardConfig(), 128)


class TestRecoverCircuit:
    def test_recovered_circuit_implements_target(self):
        rng = np.random.default_rng(0)
        gs = build_gate_set("clifford", topology("3-L"))
        from circuitrl.operators import random_target
        from circuitrl.oracles import bfs_optimal

        for _ in range(20):
            tgt = random_target("clifford", 3, int(rng.integers(1, 8)), gs, rng)
            state = reset_with_target(tgt)
            # solve by BFS and replay its inverse as env actions
            solution = bfs_optimal(tgt, gs, "count")
            for g in invert_gate_sequence(solution.gates):
                state, _, done = step(state, g, RewardConfig(), 128)
                if done:
                    break
            assert is_identity(state.operator)
            recovered = recover_circuit(state)
            replayed = apply_circuit(identity_op("clifford", 3), recovered.gates)
            assert replayed.key() == tgt.key()

    def test_raises_if_not_solved(self):
        state = reset_with_target(PermutationOp(np.array([1, 0])))
        with pytest.raises(RuntimeError):
            recover_circuit(state)

    def test_invert_gate_sequence_s_cubed(self):
        inv = invert_gate_sequence((S(0), CX(0, 1)))
        assert inv == (CX(0, 1), S(0), S(0), S(0))
        # inversion is an involution at the operator level
        op = apply_circuit(identity_op("clifford", 2), (S(0), CX(0, 1)))
        op = apply_circuit(op, inv)
        assert is_identity(op) and np.all(op.phase == 0)


class TestReset:
    def test_deterministic_with_seed(self):
        cur = CurriculumState(difficulty=5)
        a = reset("linear", topology("3-L"), cur, np.random.default_rng(9))
        b = reset("linear", topology("3-L"), cur, np.random.default_rng(9))
        assert a.operator.key() == b.operator.key()

    def test_clifford_uniform_at_max_difficulty(self):
        cur = CurriculumState(difficulty=3, max_difficulty=3, window_size=4)
        rng = np.random.default_rng(0)
        keys = {reset("clifford", topology("3-L"), cur, rng).operator.key() for _ in range(20)}
        assert len(keys) > 10  # near-uniform draws, not difficulty-3 walks


class TestSynthesisEnv:
    def test_env_interface_round_trip(self):
        cur = CurriculumState(difficulty=1, window_size=2)
        env = SynthesisEnv(
            "permutation", topology("3-L"), RewardConfig(), 16, cur, np.random.default_rng(0)
        )
        assert env.observation().shape == (3, 3, 1)
        assert env.action_mask() is None
        for _ in range(40):
            reward, done, solved = env.step(int(np.random.default_rng(1).integers(2)))
            if done:
                metrics = env.episode_metrics()
                assert set(metrics) == {"count2q", "depth2q"}
                env.curriculum_feedback(solved)
                env.finish_episode()
