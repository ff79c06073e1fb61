"""INI run configuration with typed keys and strict validation.

Sections: [env], [arch], [ppo], [curriculum], [decode], [routing],
[bench]. Unknown sections or keys are rejected with their full key path
so config drift surfaces immediately.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .envs import CurriculumState, RewardConfig
from .ppo import PpoConfig
from .routing import RoutingConfig


class ConfigError(ValueError):
    pass


@dataclass
class EnvSection:
    kind: str = "permutation"  # permutation | linear | clifford | routing
    topology: str = "3-L"
    step_limit: int = 128
    success_reward: float = 10.0
    penalty_2q: float = -0.2
    penalty_1q: float = -0.02
    penalty_depth: float = -0.05

    def reward_config(self) -> RewardConfig:
        return RewardConfig(
            success_reward=self.success_reward,
            penalty_2q=self.penalty_2q,
            penalty_1q=self.penalty_1q,
            penalty_depth=self.penalty_depth,
        )


@dataclass
class ArchSection:
    conv_filters: int = 32
    conv_kernel: int = 3
    hidden: tuple[int, ...] = (512, 256)


@dataclass
class CurriculumSection:
    start_difficulty: int = 1
    max_difficulty: int = 1024
    window_size: int = 128
    threshold: float = 0.9

    def state(self) -> CurriculumState:
        return CurriculumState(
            difficulty=self.start_difficulty,
            window_size=self.window_size,
            threshold=self.threshold,
            max_difficulty=self.max_difficulty,
        )


@dataclass
class DecodeSection:
    strategy: str = "sample"
    runs: int = 1
    step_limit: int = 128
    top_k: int = 8
    top_p: float = 0.9


@dataclass
class RoutingSection:
    variant: str = "fixed"  # fixed | generic
    horizon: int = 8
    max_active_swaps: int = 32
    step_limit: int = 2048

    def routing_config(self, reward: RewardConfig) -> RoutingConfig:
        return RoutingConfig(
            horizon=self.horizon,
            max_active_swaps=self.max_active_swaps,
            step_limit=self.step_limit,
            reward=reward,
        )


@dataclass
class BenchSection:
    topologies: tuple[str, ...] = ()
    kind: str = "permutation"
    n_targets: int = 100
    runs: tuple[int, ...] = (1, 100)
    seed: int = 0
    include_oracle: bool = True
    step_limit: int = 128
    checkpoints: tuple[str, ...] = ()  # entries "topology=path"

    def checkpoint_map(self) -> dict:
        out = {}
        for entry in self.checkpoints:
            if "=" not in entry:
                raise ConfigError(
                    f"[bench] checkpoints: expected 'topology=path', got {entry!r}"
                )
            topo, path = entry.split("=", 1)
            out[topo] = path
        return out


@dataclass
class RunConfig:
    env: EnvSection = field(default_factory=EnvSection)
    arch: ArchSection = field(default_factory=ArchSection)
    ppo: PpoConfig = field(default_factory=PpoConfig)
    curriculum: CurriculumSection = field(default_factory=CurriculumSection)
    decode: DecodeSection = field(default_factory=DecodeSection)
    routing: RoutingSection = field(default_factory=RoutingSection)
    bench: BenchSection = field(default_factory=BenchSection)


def _parse_value(section: str, key: str, raw: str, default):
    path = f"[{section}] {key}"
    try:
        if isinstance(default, bool):
            low = raw.strip().lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            parts = [p.strip() for p in raw.replace(",", " ").split() if p.strip()]
            if default and isinstance(default[0], int):
                return tuple(int(p) for p in parts)
            if key == "runs":
                return tuple(int(p) for p in parts)
            if key == "hidden":
                return tuple(int(p) for p in parts)
            return tuple(parts)
        return raw.strip()
    except ValueError as e:
        raise ConfigError(f"{path}: {e}") from e


_SECTIONS = {
    "env": EnvSection,
    "arch": ArchSection,
    "ppo": PpoConfig,
    "curriculum": CurriculumSection,
    "decode": DecodeSection,
    "routing": RoutingSection,
    "bench": BenchSection,
}


def load_config(path: str | Path) -> RunConfig:
    parser = configparser.ConfigParser()
    try:
        with open(path) as f:
            parser.read_file(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from e

    config = RunConfig()
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(
                f"[{section}]: unknown section (expected one of {', '.join(_SECTIONS)})"
            )
        target = getattr(config, section)
        valid = {f for f in vars(target)}
        for key, raw in parser.items(section):
            if key not in valid:
                raise ConfigError(
                    f"[{section}] {key}: unknown key (expected one of {', '.join(sorted(valid))})"
                )
            default = getattr(target, key)
            value = _parse_value(section, key, raw, default)
            setattr(target, key, value)
    try:
        # revalidate dataclass invariants with the overridden values
        config.ppo.__post_init__()
        config.env.reward_config()
        config.curriculum.state()
    except ValueError as e:
        raise ConfigError(str(e)) from e
    return config
