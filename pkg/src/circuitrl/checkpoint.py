"""Versioned binary checkpoint files for trained policies.

Layout: 8-byte magic ``QRLCKPT1``, 4-byte little-endian metadata length,
UTF-8 JSON metadata, raw little-endian float32 parameter blob, and a
trailing 8-byte checksum (first 8 bytes of the blob's SHA-256). The
metadata is plain JSON so checkpoints stay diffable and dependency-free.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .policy import PolicyArch, PolicyParams, param_count

MAGIC = b"QRLCKPT1"


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    params: PolicyParams
    kind: str  # permutation | linear | clifford | routing
    topology: str
    seed: int
    training_steps: int = 0
    final_difficulty: int = 0
    env_config: dict = field(default_factory=dict)
    ppo_config: dict = field(default_factory=dict)

    def metadata(self) -> dict:
        return {
            "kind": self.kind,
            "topology": self.topology,
            "arch": self.params.arch.describe(),
            "seed": self.seed,
            "training_steps": self.training_steps,
            "final_difficulty": self.final_difficulty,
            "env_config": self.env_config,
            "ppo_config": self.ppo_config,
        }


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> None:
    meta = json.dumps(ckpt.metadata(), sort_keys=True).encode("utf-8")
    blob = np.asarray(ckpt.params.vector, dtype="<f4").tobytes()
    checksum = hashlib.sha256(blob).digest()[:8]
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(len(meta).to_bytes(4, "little"))
        f.write(meta)
        f.write(blob)
        f.write(checksum)


def load_checkpoint(path: str | Path) -> Checkpoint:
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) + 4 + 8:
        raise CheckpointError(f"{path}: truncated checkpoint file")
    if data[:8] != MAGIC:
        if data[:7] == MAGIC[:7]:
            raise CheckpointError(
                f"{path}: unsupported checkpoint version {data[:8]!r} (expected {MAGIC!r})"
            )
        raise CheckpointError(f"{path}: not a checkpoint file (bad magic {data[:8]!r})")
    meta_len = int.from_bytes(data[8:12], "little")
    meta_end = 12 + meta_len
    try:
        meta = json.loads(data[12:meta_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: corrupt metadata block: {e}") from e
    blob = data[meta_end:-8]
    if hashlib.sha256(blob).digest()[:8] != data[-8:]:
        raise CheckpointError(f"{path}: parameter blob checksum mismatch")
    arch = PolicyArch.from_dict(meta["arch"])
    vector = np.frombuffer(blob, dtype="<f4").astype(np.float64)
    if len(vector) != param_count(arch):
        raise CheckpointError(
            f"{path}: blob has {len(vector)} parameters, arch needs {param_count(arch)}"
        )
    params = PolicyParams(arch, vector)
    return Checkpoint(
        params=params,
        kind=meta["kind"],
        topology=meta["topology"],
        seed=int(meta["seed"]),
        training_steps=int(meta["training_steps"]),
        final_difficulty=int(meta["final_difficulty"]),
        env_config=meta.get("env_config", {}),
        ppo_config=meta.get("ppo_config", {}),
    )
