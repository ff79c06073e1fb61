"""PPO training: rollout collection over vectorized environments,
generalized advantage estimation and clipped-surrogate updates."""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import torch

from .policy import Policy, PolicyParams


class NonFiniteLossError(RuntimeError):
    pass


@dataclass
class PpoConfig:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.2
    learning_rate: float = 3e-4
    epochs: int = 4
    minibatch_size: int = 256
    rollout_steps: int = 128
    n_envs: int = 16
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    total_steps: int = 2_000_000

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if not 0 <= self.gae_lambda <= 1:
            raise ValueError("gae_lambda must be in [0, 1]")
        if self.clip_eps <= 0:
            raise ValueError("clip_eps must be positive")


@dataclass
class RolloutBatch:
    observations: np.ndarray  # (B, rows, cols, channels)
    actions: np.ndarray
    log_probs: np.ndarray
    values: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray
    masks: np.ndarray | None = None


def gae(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    gamma: float,
    lam: float,
    bootstrap_values: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Generalized advantage estimation over a (T, N) rollout.

    dones[t] marks transitions whose successor state starts a new
    episode; their TD residual does not bootstrap across the boundary.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    steps = rewards.shape[0]
    advantages = np.zeros_like(rewards)
    last_adv = np.zeros(rewards.shape[1:], dtype=np.float64)
    next_values = bootstrap_values
    for t in reversed(range(steps)):
        not_done = ~dones[t]
        delta = rewards[t] + gamma * next_values * not_done - values[t]
        last_adv = delta + gamma * lam * not_done * last_adv
        advantages[t] = last_adv
        next_values = values[t]
    returns = advantages + values
    return advantages, returns


def ppo_update(
    policy: Policy,
    optimizer: torch.optim.Optimizer,
    batch: RolloutBatch,
    config: PpoConfig,
    generator: torch.Generator,
) -> dict:
    """Minibatch clipped-surrogate updates; on a non-finite loss the
    parameters are restored and NonFiniteLossError is raised."""
    device_dtype = policy.dtype
    obs = torch.as_tensor(batch.observations, dtype=device_dtype)
    actions = torch.as_tensor(batch.actions, dtype=torch.long)
    old_log_probs = torch.as_tensor(batch.log_probs, dtype=device_dtype)
    adv = np.asarray(batch.advantages, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        # non-finite advantages are caught by the loss guard below
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    advantages = torch.as_tensor(adv, dtype=device_dtype)
    returns = torch.as_tensor(batch.returns, dtype=device_dtype)
    masks = None
    if batch.masks is not None:
        masks = torch.as_tensor(batch.masks, dtype=torch.bool)

    saved = policy.get_params()
    n = obs.shape[0]
    ratio_sum = clip_count = 0.0
    pol_loss_sum = val_loss_sum = ent_sum = 0.0
    n_batches = 0
    for _ in range(config.epochs):
        order = torch.randperm(n, generator=generator)
        for start in range(0, n, config.minibatch_size):
            idx = order[start : start + config.minibatch_size]
            logits, values = policy.net(obs[idx], None if masks is None else masks[idx])
            dist = torch.distributions.Categorical(logits=logits)
            log_probs = dist.log_prob(actions[idx])
            ratio = torch.exp(log_probs - old_log_probs[idx])
            a = advantages[idx]
            surrogate = torch.minimum(
                ratio * a,
                torch.clamp(ratio, 1 - config.clip_eps, 1 + config.clip_eps) * a,
            )
            policy_loss = -surrogate.mean()
            value_loss = ((values - returns[idx]) ** 2).mean()
            entropy = dist.entropy().mean()
            loss = policy_loss + config.value_coef * value_loss - config.entropy_coef * entropy
            if not torch.isfinite(loss):
                policy.set_params(saved.vector)
                raise NonFiniteLossError(f"non-finite loss {loss.item()!r}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            with torch.no_grad():
                ratio_sum += ratio.mean().item()
                clip_count += (
                    ((ratio < 1 - config.clip_eps) | (ratio > 1 + config.clip_eps))
                    .float()
                    .mean()
                    .item()
                )
                pol_loss_sum += policy_loss.item()
                val_loss_sum += value_loss.item()
                ent_sum += entropy.item()
            n_batches += 1
    return {
        "mean_ratio": ratio_sum / n_batches,
        "clip_fraction": clip_count / n_batches,
        "policy_loss": pol_loss_sum / n_batches,
        "value_loss": val_loss_sum / n_batches,
        "entropy": ent_sum / n_batches,
    }


@dataclass
class TrainResult:
    params: PolicyParams
    log_rows: list[dict] = field(default_factory=list)
    total_steps: int = 0
    final_difficulty: int = 0


LOG_FIELDS = ["steps", "difficulty", "success_rate", "mean_2q_count", "mean_2q_depth", "mean_reward"]


def train_loop(
    envs: list,
    curriculum,
    init: PolicyParams,
    config: PpoConfig,
    seed: int,
    log_path=None,
    early_stop_success: float | None = None,
    early_stop_patience: int = 10,
    progress: bool = False,
) -> TrainResult:
    """Outer loop: rollouts -> GAE -> ppo_update -> curriculum updates.

    envs follow the SynthesisEnv interface (observation/step/
    finish_episode/episode_metrics/action_mask); the curriculum object
    is shared by all of them.
    """
    policy = Policy(init, dtype=torch.float32)
    optimizer = torch.optim.Adam(policy.net.parameters(), lr=config.learning_rate)
    generator = torch.Generator().manual_seed(seed)
    n_envs = len(envs)
    use_masks = envs[0].action_mask() is not None

    log_file = writer = None
    if log_path is not None:
        log_file = open(log_path, "w", newline="")
        writer = csv.DictWriter(log_file, fieldnames=LOG_FIELDS)
        writer.writeheader()

    result = TrainResult(params=init)
    steps_done = 0
    # success rate is reported over a trailing episode window so the
    # logged curve reflects the policy, not per-rollout sampling noise
    recent_solved: deque[bool] = deque(maxlen=512)
    last_success = 0.0
    streak = 0
    try:
        while steps_done < config.total_steps:
            obs_buf = np.zeros((config.rollout_steps, n_envs) + policy.arch.input_shape, dtype=np.float32)
            mask_buf = (
                np.zeros((config.rollout_steps, n_envs, policy.arch.n_actions), dtype=bool)
                if use_masks
                else None
            )
            act_buf = np.zeros((config.rollout_steps, n_envs), dtype=np.int64)
            logp_buf = np.zeros((config.rollout_steps, n_envs))
            val_buf = np.zeros((config.rollout_steps, n_envs))
            rew_buf = np.zeros((config.rollout_steps, n_envs))
            done_buf = np.zeros((config.rollout_steps, n_envs), dtype=bool)
            ep_solved: list[bool] = []
            ep_counts: list[int] = []
            ep_depths: list[int] = []
            ep_rewards: list[float] = []
            ep_reward_acc = [0.0] * n_envs

            for t in range(config.rollout_steps):
                obs = np.stack([e.observation() for e in envs])
                masks = np.stack([e.action_mask() for e in envs]) if use_masks else None
                with torch.no_grad():
                    logits, values = policy.net(
                        torch.as_tensor(obs, dtype=policy.dtype),
                        None if masks is None else torch.as_tensor(masks),
                    )
                    dist = torch.distributions.Categorical(logits=logits)
                    actions = _sample(dist, generator)
                    log_probs = dist.log_prob(actions)
                obs_buf[t] = obs
                if use_masks:
                    mask_buf[t] = masks
                act_buf[t] = actions.numpy()
                logp_buf[t] = log_probs.numpy()
                val_buf[t] = values.numpy()
                for i, env in enumerate(envs):
                    reward, done, solved = env.step(int(actions[i]))
                    rew_buf[t, i] = reward
                    done_buf[t, i] = done
                    ep_reward_acc[i] += reward
                    if done:
                        metrics = env.episode_metrics()
                        ep_solved.append(solved)
                        ep_counts.append(metrics["count2q"])
                        ep_depths.append(metrics["depth2q"])
                        ep_rewards.append(ep_reward_acc[i])
                        ep_reward_acc[i] = 0.0
                        env.curriculum_feedback(solved)
                        env.finish_episode()
            steps_done += config.rollout_steps * n_envs

            final_obs = np.stack([e.observation() for e in envs])
            final_masks = np.stack([e.action_mask() for e in envs]) if use_masks else None
            with torch.no_grad():
                _, bootstrap = policy.net(
                    torch.as_tensor(final_obs, dtype=policy.dtype),
                    None if final_masks is None else torch.as_tensor(final_masks),
                )
            advantages, returns = gae(
                rew_buf, val_buf, done_buf, config.gamma, config.gae_lambda, bootstrap.numpy()
            )
            batch = RolloutBatch(
                observations=obs_buf.reshape((-1,) + policy.arch.input_shape),
                actions=act_buf.reshape(-1),
                log_probs=logp_buf.reshape(-1),
                values=val_buf.reshape(-1),
                advantages=advantages.reshape(-1),
                returns=returns.reshape(-1),
                masks=None if mask_buf is None else mask_buf.reshape(-1, policy.arch.n_actions),
            )
            try:
                ppo_update(policy, optimizer, batch, config, generator)
            except NonFiniteLossError as e:
                # parameters were restored; expose them for partial checkpoints
                e.partial = policy.get_params()
                raise

            if ep_solved:
                recent_solved.extend(ep_solved)
                last_success = float(np.mean(recent_solved))
            solved_counts = [c for c, s in zip(ep_counts, ep_solved) if s]
            solved_depths = [d for d, s in zip(ep_depths, ep_solved) if s]
            row = {
                "steps": steps_done,
                "difficulty": curriculum.difficulty,
                "success_rate": round(last_success, 6),
                "mean_2q_count": round(float(np.mean(solved_counts)), 4) if solved_counts else "",
                "mean_2q_depth": round(float(np.mean(solved_depths)), 4) if solved_depths else "",
                "mean_reward": round(float(np.mean(ep_rewards)), 4) if ep_rewards else "",
            }
            result.log_rows.append(row)
            if writer is not None:
                writer.writerow(row)
                log_file.flush()
            if progress:
                print(
                    f"steps={steps_done} d={curriculum.difficulty} "
                    f"success={last_success:.3f}",
                    flush=True,
                )

            if early_stop_success is not None:
                at_max = curriculum.difficulty >= curriculum.max_difficulty
                if at_max and ep_solved and last_success >= early_stop_success:
                    streak += 1
                else:
                    streak = 0
                if streak >= early_stop_patience:
                    break
    finally:
        if log_file is not None:
            log_file.close()

    result.params = policy.get_params()
    result.total_steps = steps_done
    result.final_difficulty = curriculum.difficulty
    return result


def _sample(dist: torch.distributions.Categorical, generator: torch.Generator) -> torch.Tensor:
    probs = dist.probs
    u = torch.rand(probs.shape[:-1] + (1,), generator=generator)
    cdf = probs.cumsum(-1)
    return torch.clamp((cdf < u).sum(-1), max=probs.shape[-1] - 1)
