import pytest

from circuitrl.config import ConfigError, load_config


def write(tmp_path, text):
    path = tmp_path / "run.ini"
    path.write_text(text)
    return path


class TestDefaults:
    def test_empty_file_gives_defaults(self, tmp_path):
        config = load_config(write(tmp_path, ""))
        assert config.env.kind == "permutation"
        assert config.env.topology == "3-L"
        assert config.ppo.gamma == 0.99
        assert config.curriculum.max_difficulty == 1024
        assert config.routing.variant == "fixed"
        assert config.arch.hidden == (512, 256)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "nope.ini")


class TestOverrides:
    def test_typed_parsing(self, tmp_path):
        config = load_config(
            write(
                tmp_path,
                """
[env]
kind = clifford
topology = 6-Y
step_limit = 64
penalty_2q = -0.3

[arch]
conv_filters = 8
hidden = 32 16

[ppo]
gamma = 0.9
n_envs = 4
total_steps = 1000

[curriculum]
max_difficulty = 16
threshold = 0.8

[bench]
topologies = 3-L, 4-L
runs = 1 10
include_oracle = false
checkpoints = 3-L=a.ckpt 4-L=b.ckpt
""",
            )
        )
        assert config.env.kind == "clifford"
        assert config.env.penalty_2q == -0.3
        assert config.arch.hidden == (32, 16)
        assert config.ppo.gamma == 0.9 and config.ppo.total_steps == 1000
        assert config.curriculum.max_difficulty == 16
        assert config.bench.topologies == ("3-L", "4-L")
        assert config.bench.runs == (1, 10)
        assert config.bench.include_oracle is False
        assert config.bench.checkpoint_map() == {"3-L": "a.ckpt", "4-L": "b.ckpt"}

    def test_routing_section(self, tmp_path):
        config = load_config(
            write(tmp_path, "[routing]\nvariant = generic\nhorizon = 4\n")
        )
        assert config.routing.variant == "generic"
        rc = config.routing.routing_config(config.env.reward_config())
        assert rc.horizon == 4


class TestRejection:
    def test_unknown_section(self, tmp_path):
        with pytest.raises(ConfigError, match=r"\[model\]"):
            load_config(write(tmp_path, "[model]\nx = 1\n"))

    def test_unknown_key_reports_path(self, tmp_path):
        with pytest.raises(ConfigError, match=r"\[env\] learning_rate"):
            load_config(write(tmp_path, "[env]\nlearning_rate = 0.1\n"))

    def test_bad_type(self, tmp_path):
        with pytest.raises(ConfigError, match=r"\[ppo\] gamma"):
            load_config(write(tmp_path, "[ppo]\ngamma = fast\n"))

    def test_bad_bool(self, tmp_path):
        with pytest.raises(ConfigError, match=r"\[bench\] include_oracle"):
            load_config(write(tmp_path, "[bench]\ninclude_oracle = maybe\n"))

    def test_invariant_revalidated(self, tmp_path):
        # gamma outside (0, 1] is caught by the PPO invariants
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, "[ppo]\ngamma = 1.5\n"))

    def test_bad_checkpoint_entry(self, tmp_path):
        config = load_config(write(tmp_path, "[bench]\ncheckpoints = nopath\n"))
        with pytest.raises(ConfigError, match="topology=path"):
            config.bench.checkpoint_map()
