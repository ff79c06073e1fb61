import csv

import numpy as np
import pytest

from circuitrl.checkpoint import save_checkpoint
from circuitrl.config import RunConfig
from circuitrl.topologies import topology
from circuitrl.training import build_arch, build_envs, train


def tiny_config(kind="permutation", topo="3-L"):
    config = RunConfig()
    config.env.kind = kind
    config.env.topology = topo
    config.env.step_limit = 16
    config.arch.conv_filters = 4
    config.arch.hidden = (32, 16)
    config.ppo.n_envs = 2
    config.ppo.rollout_steps = 64
    config.ppo.minibatch_size = 64
    config.ppo.total_steps = 1024
    config.ppo.learning_rate = 1e-3
    config.curriculum.max_difficulty = 4
    config.curriculum.window_size = 8
    return config


class TestBuildArch:
    def test_synthesis_shapes(self):
        config = tiny_config("clifford", "6-Y")
        arch = build_arch(config, topology("6-Y"))
        assert arch.input_shape == (6, 6, 4)
        assert arch.n_actions == 22  # 6 H + 6 S + 2 per each of 5 edges

    def test_routing_fixed_shapes(self):
        config = tiny_config("routing", "6-T")
        arch = build_arch(config, topology("6-T"))
        assert arch.input_shape == (6, 6, config.routing.horizon)
        assert arch.n_actions == 5  # undirected edges of 6-T

    def test_routing_generic_shapes(self):
        config = tiny_config("routing", "6-T")
        config.routing.variant = "generic"
        config.routing.max_active_swaps = 12
        arch = build_arch(config, topology("6-T"))
        assert arch.input_shape == (12, config.routing.horizon, 1)
        assert arch.n_actions == 12


class TestBuildEnvs:
    def test_independent_env_streams(self):
        config = tiny_config()
        envs = build_envs(config, config.curriculum.state(), seed=0)
        assert len(envs) == config.ppo.n_envs
        # sibling envs draw from spawned seeds, not copies of one stream
        a = envs[0].observation()
        b = envs[1].observation()
        assert a.shape == b.shape == (3, 3, 1)


class TestTrain:
    def test_returns_checkpoint_and_log(self, tmp_path):
        config = tiny_config()
        log = tmp_path / "run.log.csv"
        ckpt = train(config, seed=0, log_path=log)
        assert ckpt.kind == "permutation" and ckpt.topology == "3-L"
        assert ckpt.training_steps >= config.ppo.total_steps
        assert 1 <= ckpt.final_difficulty <= 4
        assert ckpt.env_config["step_limit"] == 16
        assert ckpt.ppo_config["gamma"] == config.ppo.gamma
        with open(log) as f:
            rows = list(csv.DictReader(f))
        assert rows, "training must emit log rows"
        assert set(rows[0]) == {
            "steps", "difficulty", "success_rate",
            "mean_2q_count", "mean_2q_depth", "mean_reward",
        }
        steps = [int(r["steps"]) for r in rows]
        assert steps == sorted(steps)

    def test_deterministic_mode_byte_identical(self, tmp_path):
        paths = []
        for name in ("a.ckpt", "b.ckpt"):
            config = tiny_config()
            config.ppo.total_steps = 512
            ckpt = train(config, seed=3, deterministic=True)
            path = tmp_path / name
            save_checkpoint(ckpt, path)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_early_stop(self, tmp_path):
        config = tiny_config()
        config.ppo.total_steps = 200_000
        config.curriculum.max_difficulty = 2
        config.curriculum.window_size = 4
        ckpt = train(config, seed=1, early_stop_success=0.9, early_stop_patience=2)
        # 3-L difficulty-2 permutations are trivial: must stop well short
        assert ckpt.training_steps < config.ppo.total_steps
        assert ckpt.final_difficulty == 2
