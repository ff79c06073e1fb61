"""High-level training entry point: build envs from a RunConfig, run the
PPO loop and package the result as a checkpoint."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import torch

from .checkpoint import Checkpoint
from .config import RunConfig
from .envs import SynthesisEnv, build_gate_set
from .operators import observation_shape
from .policy import PolicyArch, init_params
from .ppo import train_loop
from .routing import FixedRoutingEnv, GenericRoutingEnv
from .topologies import topology


def configure_threads(deterministic: bool = False) -> None:
    """Apply the QRL_THREADS cap; deterministic mode forces one thread."""
    threads = 1 if deterministic else int(os.environ.get("QRL_THREADS", "0") or 0)
    if threads > 0:
        torch.set_num_threads(threads)


def build_arch(config: RunConfig, coupling) -> PolicyArch:
    kind = config.env.kind
    if kind == "routing":
        if config.routing.variant == "generic":
            input_shape = (config.routing.max_active_swaps, config.routing.horizon, 1)
            n_actions = config.routing.max_active_swaps
        else:
            n = coupling.n_qubits
            input_shape = (n, n, config.routing.horizon)
            n_actions = len(coupling.edge_list)
    else:
        input_shape = observation_shape(kind, coupling.n_qubits)
        n_actions = len(build_gate_set(kind, coupling).actions)
    return PolicyArch(
        input_shape=input_shape,
        n_actions=n_actions,
        conv_filters=config.arch.conv_filters,
        conv_kernel=config.arch.conv_kernel,
        hidden=config.arch.hidden,
    )


def build_envs(config: RunConfig, curriculum, seed: int) -> list:
    coupling = topology(config.env.topology)
    kind = config.env.kind
    seq = np.random.SeedSequence(seed)
    children = seq.spawn(config.ppo.n_envs)
    envs = []
    for child in children:
        rng = np.random.default_rng(child)
        if kind == "routing":
            routing_config = config.routing.routing_config(config.env.reward_config())
            env_cls = GenericRoutingEnv if config.routing.variant == "generic" else FixedRoutingEnv
            envs.append(env_cls(coupling, routing_config, curriculum, rng))
        else:
            envs.append(
                SynthesisEnv(
                    kind,
                    coupling,
                    config.env.reward_config(),
                    config.env.step_limit,
                    curriculum,
                    rng,
                )
            )
    return envs


def train(
    config: RunConfig,
    seed: int,
    log_path: str | Path | None = None,
    deterministic: bool = False,
    early_stop_success: float | None = None,
    early_stop_patience: int = 10,
    progress: bool = False,
) -> Checkpoint:
    configure_threads(deterministic)
    if deterministic:
        torch.manual_seed(seed)
        torch.use_deterministic_algorithms(True)
    coupling = topology(config.env.topology)
    arch = build_arch(config, coupling)
    curriculum = config.curriculum.state()
    envs = build_envs(config, curriculum, seed)
    init = init_params(arch, np.random.default_rng(seed))
    result = train_loop(
        envs,
        curriculum,
        init,
        config.ppo,
        seed,
        log_path=log_path,
        early_stop_success=early_stop_success,
        early_stop_patience=early_stop_patience,
        progress=progress,
    )
    return Checkpoint(
        params=result.params,
        kind=config.env.kind,
        topology=config.env.topology,
        seed=seed,
        training_steps=result.total_steps,
        final_difficulty=result.final_difficulty,
        env_config={
            "step_limit": config.env.step_limit,
            "success_reward": config.env.success_reward,
            "penalty_2q": config.env.penalty_2q,
            "penalty_1q": config.env.penalty_1q,
            "penalty_depth": config.env.penalty_depth,
            "horizon": config.routing.horizon,
        },
        ppo_config={
            "gamma": config.ppo.gamma,
            "gae_lambda": config.ppo.gae_lambda,
            "clip_eps": config.ppo.clip_eps,
            "learning_rate": config.ppo.learning_rate,
            "total_steps": config.ppo.total_steps,
        },
    )
