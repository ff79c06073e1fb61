import csv
import json

import numpy as np
import pytest

from circuitrl.bench import (
    CSV_FIELDS,
    BenchSuite,
    generate_targets,
    run_benchmark,
    write_report,
)
from circuitrl.checkpoint import Checkpoint, save_checkpoint
from circuitrl.config import RunConfig
from circuitrl.training import train


@pytest.fixture(scope="module")
def perm_ckpt(tmp_path_factory):
    config = RunConfig()
    config.env.kind = "permutation"
    config.env.topology = "3-L"
    config.env.step_limit = 16
    config.arch.conv_filters = 4
    config.arch.hidden = (32, 16)
    config.ppo.n_envs = 2
    config.ppo.rollout_steps = 64
    config.ppo.minibatch_size = 64
    config.ppo.total_steps = 8192
    config.ppo.learning_rate = 1e-3
    config.curriculum.max_difficulty = 4
    config.curriculum.window_size = 8
    ckpt = train(config, seed=0)
    path = tmp_path_factory.mktemp("ckpt") / "perm3.ckpt"
    save_checkpoint(ckpt, path)
    return path


def suite_for(path, **kw):
    defaults = dict(
        kind="permutation",
        topologies=("3-L",),
        n_targets=5,
        runs=(1, 20),
        seed=0,
        include_oracle=True,
        checkpoints={"3-L": str(path)},
        step_limit=32,
    )
    defaults.update(kw)
    return BenchSuite(**defaults)


class TestGenerateTargets:
    def test_seed_reproducible(self):
        a = generate_targets("permutation", 4, 10, 7)
        b = generate_targets("permutation", 4, 10, 7)
        assert all(x.key() == y.key() for x, y in zip(a, b))

    def test_seed_sensitivity(self):
        a = generate_targets("linear", 4, 10, 0)
        b = generate_targets("linear", 4, 10, 1)
        assert any(x.key() != y.key() for x, y in zip(a, b))


class TestRunBenchmark:
    def test_rows_and_schema(self, perm_ckpt, tmp_path):
        rows = run_benchmark(suite_for(perm_ckpt), tmp_path)
        assert [r.algorithm for r in rows] == ["oracle", "RL_1", "RL_20"]
        csv_path = tmp_path / "bench.csv"
        with open(csv_path) as f:
            reader = csv.DictReader(f)
            assert reader.fieldnames == CSV_FIELDS
            parsed = list(reader)
        assert len(parsed) == 3
        payload = json.loads((tmp_path / "bench.json").read_text())
        assert len(payload) == 3
        assert "count2q" in payload[0]

    def test_rl_not_better_than_oracle(self, perm_ckpt):
        rows = run_benchmark(suite_for(perm_ckpt))
        oracle = rows[0]
        rl20 = rows[2]
        if rl20.n == oracle.n and rl20.count2q_mean is not None:
            assert rl20.count2q_mean >= oracle.count2q_mean - 1e-9

    def test_oracle_na_beyond_bound(self, perm_ckpt):
        # permutation oracle bound is 6 qubits; 8-L reports n/a
        rows = run_benchmark(
            suite_for(perm_ckpt, topologies=("8-L",), runs=(), include_oracle=True)
        )
        assert rows[0].count2q_mean is None
        assert rows[0].csv_row()["count2q_mean"] == "n/a"

    def test_missing_checkpoint_raises(self, perm_ckpt):
        suite = suite_for(perm_ckpt, checkpoints={})
        with pytest.raises(FileNotFoundError, match="3-L"):
            run_benchmark(suite)

    def test_kind_mismatch_rejected(self, perm_ckpt):
        suite = suite_for(perm_ckpt, kind="linear")
        with pytest.raises(ValueError, match="kind"):
            run_benchmark(suite)

    def test_reproducible_excluding_time(self, perm_ckpt):
        strip = lambda rows: [
            (r.topology, r.algorithm, r.runs, r.n, r.count2q_mean, r.layers2q_mean,
             tuple(r.count2q), tuple(r.layers2q))
            for r in rows
        ]
        a = run_benchmark(suite_for(perm_ckpt))
        b = run_benchmark(suite_for(perm_ckpt))
        assert strip(a) == strip(b)
