"""Convolution + fully-connected policy/value network.

The network maps an operator observation (rows, cols, channels) to
action logits and a scalar value estimate. Parameters round-trip
through a flat vector so checkpoints and deterministic Xavier
initialization stay framework-agnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

MASK_FILL = -1e9


@dataclass(frozen=True)
class PolicyArch:
    input_shape: tuple[int, int, int]  # (rows, cols, channels)
    n_actions: int
    conv_filters: int = 32
    conv_kernel: int = 3
    hidden: tuple[int, ...] = (512, 256)

    def describe(self) -> dict:
        return {
            "input_shape": list(self.input_shape),
            "n_actions": self.n_actions,
            "conv_filters": self.conv_filters,
            "conv_kernel": self.conv_kernel,
            "hidden": list(self.hidden),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyArch":
        return cls(
            input_shape=tuple(d["input_shape"]),
            n_actions=int(d["n_actions"]),
            conv_filters=int(d["conv_filters"]),
            conv_kernel=int(d["conv_kernel"]),
            hidden=tuple(d["hidden"]),
        )


@dataclass
class PolicyParams:
    arch: PolicyArch
    vector: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not np.all(np.isfinite(self.vector)):
            raise ValueError("parameter vector contains non-finite entries")

    def copy(self) -> "PolicyParams":
        return PolicyParams(self.arch, self.vector.copy())


class PolicyNet(nn.Module):
    def __init__(self, arch: PolicyArch):
        super().__init__()
        rows, cols, channels = arch.input_shape
        k = arch.conv_kernel
        self.conv = nn.Conv2d(channels, arch.conv_filters, k, padding=k // 2)
        flat = arch.conv_filters * rows * cols
        layers: list[nn.Module] = []
        width = flat
        for h in arch.hidden:
            layers.append(nn.Linear(width, h))
            width = h
        self.fc = nn.ModuleList(layers)
        self.logits_head = nn.Linear(width, arch.n_actions)
        self.value_head = nn.Linear(width, 1)

    def forward(self, obs: torch.Tensor, mask: torch.Tensor | None = None):
        # obs: (B, rows, cols, channels) -> (B, C, H, W)
        x = obs.permute(0, 3, 1, 2)
        x = torch.relu(self.conv(x))
        x = x.flatten(1)
        for layer in self.fc:
            x = torch.relu(layer(x))
        logits = self.logits_head(x)
        if mask is not None:
            logits = logits.masked_fill(~mask, MASK_FILL)
        value = self.value_head(x).squeeze(-1)
        return logits, value


def _param_shapes(arch: PolicyArch) -> list[tuple[str, tuple[int, ...]]]:
    net = PolicyNet(arch)
    return [(name, tuple(p.shape)) for name, p in net.named_parameters()]


def param_count(arch: PolicyArch) -> int:
    return sum(int(np.prod(shape)) for _, shape in _param_shapes(arch))


def xavier_bound(shape: tuple[int, ...], kernel: int = 1) -> float:
    if len(shape) == 4:  # conv weight (out, in, k, k)
        receptive = shape[2] * shape[3]
        fan_in, fan_out = shape[1] * receptive, shape[0] * receptive
    else:  # linear weight (out, in)
        fan_in, fan_out = shape[1], shape[0]
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_params(arch: PolicyArch, rng: np.random.Generator) -> PolicyParams:
    """Xavier-uniform weights, zero biases, drawn from the given rng."""
    chunks: list[np.ndarray] = []
    for name, shape in _param_shapes(arch):
        if name.endswith("bias"):
            chunks.append(np.zeros(int(np.prod(shape)), dtype=np.float64))
        else:
            b = xavier_bound(shape)
            chunks.append(rng.uniform(-b, b, size=int(np.prod(shape))))
    return PolicyParams(arch, np.concatenate(chunks))


class Policy:
    """Stateful wrapper tying a PolicyNet to a flat parameter vector."""

    def __init__(self, params: PolicyParams, dtype: torch.dtype = torch.float32):
        self.arch = params.arch
        self.dtype = dtype
        self.net = PolicyNet(params.arch).to(dtype)
        self.set_params(params.vector)

    def set_params(self, vector: np.ndarray) -> None:
        flat = torch.as_tensor(np.asarray(vector, dtype=np.float64), dtype=self.dtype)
        expected = sum(p.numel() for p in self.net.parameters())
        if flat.numel() != expected:
            raise ValueError(f"parameter vector length {flat.numel()} != {expected}")
        torch.nn.utils.vector_to_parameters(flat, self.net.parameters())

    def get_params(self) -> PolicyParams:
        vec = torch.nn.utils.parameters_to_vector(self.net.parameters())
        return PolicyParams(self.arch, vec.detach().cpu().numpy().astype(np.float64))

    def forward_np(self, obs: np.ndarray, mask: np.ndarray | None = None):
        """Forward one or a batch of observations given as numpy arrays."""
        arr = np.asarray(obs)
        single = arr.ndim == 3
        if single:
            arr = arr[None]
        if arr.shape[1:] != self.arch.input_shape:
            raise ValueError(
                f"observation shape {arr.shape[1:]} != arch input {self.arch.input_shape}"
            )
        t = torch.as_tensor(arr, dtype=self.dtype)
        m = None
        if mask is not None:
            m = torch.as_tensor(np.asarray(mask, dtype=bool))
            if single:
                m = m[None]
        with torch.no_grad():
            logits, value = self.net(t, m)
        logits = logits.cpu().numpy()
        value = value.cpu().numpy()
        if single:
            return logits[0], float(value[0])
        return logits, value


def forward(params: PolicyParams, observation: np.ndarray):
    """One-shot functional forward pass; returns (logits, value)."""
    return Policy(params).forward_np(observation)
