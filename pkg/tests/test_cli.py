import json

import numpy as np
import pytest

from circuitrl.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from circuitrl.circuits import parse_circuit
from circuitrl.cli import main
from circuitrl.config import RunConfig
from circuitrl.policy import PolicyArch, init_params
from circuitrl.training import train

TINY_INI = """
[env]
kind = permutation
topology = 3-L
step_limit = 16

[arch]
conv_filters = 4
hidden = 32 16

[ppo]
n_envs = 2
rollout_steps = 64
minibatch_size = 64
total_steps = 8192
learning_rate = 1e-3

[curriculum]
max_difficulty = 4
window_size = 8
"""


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """Train a small 3-L permutation policy once for the whole module."""
    root = tmp_path_factory.mktemp("cli")
    ini = root / "run.ini"
    ini.write_text(TINY_INI)
    out = root / "perm3.ckpt"
    code = main(["train", "--config", str(ini), "--out", str(out), "--seed", "0"])
    assert code == 0
    return root, ini, out


class TestTopologies:
    def test_list(self, capsys):
        assert main(["topologies"]) == 0
        out = capsys.readouterr().out
        assert "3-L: 3 qubits, 2 edges" in out
        assert "ibm_torino" in out

    def test_named_edges(self, capsys):
        assert main(["topologies", "--name", "3-L"]) == 0
        assert capsys.readouterr().out == "0 1\n1 2\n"

    def test_unknown_name_exit_2(self, capsys):
        assert main(["topologies", "--name", "99-Z"]) == 2
        assert "99-Z" in capsys.readouterr().err


class TestTrain:
    def test_writes_checkpoint_and_log(self, trained):
        root, ini, out = trained
        assert out.exists()
        assert out.with_suffix(".log.csv").exists()
        ckpt = load_checkpoint(out)
        assert ckpt.kind == "permutation" and ckpt.topology == "3-L"

    def test_bad_config_exit_2(self, tmp_path, capsys):
        ini = tmp_path / "bad.ini"
        ini.write_text("[env]\nbogus_key = 1\n")
        code = main(["train", "--config", str(ini), "--out", str(tmp_path / "x.ckpt")])
        assert code == 2
        assert "bogus_key" in capsys.readouterr().err

    def test_missing_config_exit_2(self, tmp_path):
        code = main(
            ["train", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path / "x")]
        )
        assert code == 2


class TestSynth:
    def test_target_file_success(self, trained, tmp_path, capsys):
        _, _, ckpt = trained
        target = tmp_path / "target.txt"
        target.write_text("2 1 0\n")
        out = tmp_path / "out.qasm"
        code = main([
            "synth", "--ckpt", str(ckpt), "--target", str(target),
            "--runs", "20", "--out", str(out), "--seed", "1",
        ])
        metrics = json.loads(capsys.readouterr().out)
        assert code == 0
        assert metrics["success"] is True
        circuit = parse_circuit(out.read_text())
        assert circuit.n_qubits == 3

    def test_random_target(self, trained, tmp_path, capsys):
        _, _, ckpt = trained
        out = tmp_path / "out.qasm"
        code = main([
            "synth", "--ckpt", str(ckpt), "--random", "3",
            "--runs", "20", "--out", str(out), "--seed", "2",
        ])
        assert code == 0
        assert out.exists()

    def test_bad_target_exit_2(self, trained, tmp_path):
        _, _, ckpt = trained
        target = tmp_path / "target.txt"
        target.write_text("0 0 1\n")  # not a permutation
        code = main([
            "synth", "--ckpt", str(ckpt), "--target", str(target),
            "--out", str(tmp_path / "o.qasm"),
        ])
        assert code == 2

    def test_all_runs_failed_exit_4(self, tmp_path, capsys):
        # untrained clifford policy, one short sampled run: no success
        from circuitrl.envs import build_gate_set
        from circuitrl.topologies import topology

        gs = build_gate_set("clifford", topology("6-Y"))
        arch = PolicyArch((6, 6, 4), len(gs.actions), conv_filters=4, hidden=(16, 8))
        ckpt_path = tmp_path / "untrained.ckpt"
        save_checkpoint(
            Checkpoint(init_params(arch, np.random.default_rng(0)), "clifford", "6-Y", 0),
            ckpt_path,
        )
        code = main([
            "synth", "--ckpt", str(ckpt_path), "--random", "12",
            "--runs", "1", "--step-limit", "16",
            "--out", str(tmp_path / "o.qasm"), "--seed", "0",
        ])
        metrics = json.loads(capsys.readouterr().out)
        assert code == 4
        assert metrics["success"] is False


class TestRoute:
    def circuit_file(self, tmp_path):
        path = tmp_path / "qv.qasm"
        path.write_text(
            "qubits 6\ncx 0 5\ncx 1 4\ncx 2 3\ncx 5 3\ncx 0 4\n"
        )
        return path

    def test_sabre_baseline_verified(self, tmp_path, capsys):
        circ = self.circuit_file(tmp_path)
        out = tmp_path / "routed.qasm"
        code = main([
            "route", "--baseline", "sabre", "--circuit", str(circ),
            "--coupling", "6-T", "--iterations", "4", "--out", str(out),
        ])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["verification"]["legal"]
        assert payload["verification"]["permutation_ok"]
        assert payload["verification"]["dense_ok"]
        assert parse_circuit(out.read_text()).n_qubits == 6

    def test_synth_checkpoint_rejected(self, trained, tmp_path, capsys):
        _, _, ckpt = trained
        circ = self.circuit_file(tmp_path)
        code = main([
            "route", "--ckpt", str(ckpt), "--circuit", str(circ), "--coupling", "6-T",
        ])
        assert code == 2
        assert "routing" in capsys.readouterr().err

    def test_bad_circuit_exit_2(self, tmp_path):
        path = tmp_path / "bad.qasm"
        path.write_text("qubits 2\nfrobnicate 0 1\n")
        code = main([
            "route", "--baseline", "sabre", "--circuit", str(path), "--coupling", "3-L",
        ])
        assert code == 2


class TestBenchCommand:
    def test_end_to_end(self, trained, tmp_path, capsys):
        _, _, ckpt = trained
        suite = tmp_path / "suite.ini"
        suite.write_text(
            "[bench]\n"
            "kind = permutation\n"
            "topologies = 3-L\n"
            "n_targets = 3\n"
            "runs = 1 10\n"
            "step_limit = 32\n"
            f"checkpoints = 3-L={ckpt}\n"
        )
        out = tmp_path / "report"
        code = main(["bench", "--suite", str(suite), "--out", str(out)])
        assert code == 0
        assert (out / "bench.csv").exists()
        assert (out / "bench.json").exists()

    def test_empty_topologies_exit_2(self, tmp_path, capsys):
        suite = tmp_path / "suite.ini"
        suite.write_text("[bench]\nkind = permutation\n")
        code = main(["bench", "--suite", str(suite), "--out", str(tmp_path / "r")])
        assert code == 2
