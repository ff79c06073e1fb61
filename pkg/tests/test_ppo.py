import numpy as np
import pytest
import torch

from circuitrl.policy import Policy, PolicyArch, init_params
from circuitrl.ppo import (
    NonFiniteLossError,
    PpoConfig,
    RolloutBatch,
    gae,
    ppo_update,
)

ARCH = PolicyArch(input_shape=(2, 2, 1), n_actions=2, conv_filters=2, conv_kernel=3, hidden=(8,))


def make_batch(policy, obs, actions, advantages, returns):
    with torch.no_grad():
        logits, values = policy.net(torch.as_tensor(obs, dtype=policy.dtype))
        dist = torch.distributions.Categorical(logits=logits)
        log_probs = dist.log_prob(torch.as_tensor(actions)).numpy()
    return RolloutBatch(
        observations=obs,
        actions=np.asarray(actions),
        log_probs=log_probs,
        values=values.numpy(),
        advantages=np.asarray(advantages, dtype=np.float64),
        returns=np.asarray(returns, dtype=np.float64),
    )


class TestPpoConfig:
    def test_defaults(self):
        c = PpoConfig()
        assert c.gamma == 0.99 and c.gae_lambda == 0.95 and c.clip_eps == 0.2
        assert c.learning_rate == 3e-4 and c.epochs == 4 and c.minibatch_size == 256
        assert c.rollout_steps == 128 and c.n_envs == 16

    def test_validation(self):
        with pytest.raises(ValueError):
            PpoConfig(gamma=0.0)
        with pytest.raises(ValueError):
            PpoConfig(gae_lambda=1.5)
        with pytest.raises(ValueError):
            PpoConfig(clip_eps=0.0)


class TestGae:
    def test_single_step(self):
        # one transition, episode ends: A = r - V
        adv, ret = gae(
            np.array([[1.0]]), np.array([[0.3]]), np.array([[True]]),
            0.99, 0.95, np.array([5.0]),
        )
        assert adv[0, 0] == pytest.approx(1.0 - 0.3)
        assert ret[0, 0] == pytest.approx(1.0)

    def test_two_step_hand_computed(self):
        gamma, lam = 0.9, 0.8
        rewards = np.array([[0.0], [1.0]])
        values = np.array([[0.5], [0.6]])
        dones = np.array([[False], [True]])
        adv, ret = gae(rewards, values, dones, gamma, lam, np.array([0.0]))
        d1 = 1.0 - 0.6
        d0 = 0.0 + gamma * 0.6 - 0.5
        assert adv[1, 0] == pytest.approx(d1)
        assert adv[0, 0] == pytest.approx(d0 + gamma * lam * d1)
        assert np.allclose(ret, adv + values)

    def test_done_blocks_bootstrap(self):
        rewards = np.array([[1.0], [1.0]])
        values = np.array([[0.0], [0.0]])
        dones = np.array([[True], [True]])
        adv, _ = gae(rewards, values, dones, 0.99, 0.95, np.array([100.0]))
        assert np.allclose(adv, 1.0)

    def test_lambda_zero_is_td(self):
        rng = np.random.default_rng(0)
        rewards = rng.random((5, 3))
        values = rng.random((5, 3))
        dones = np.zeros((5, 3), dtype=bool)
        boot = rng.random(3)
        adv, _ = gae(rewards, values, dones, 0.9, 0.0, boot)
        nxt = np.vstack([values[1:], boot[None]])
        td = rewards + 0.9 * nxt - values
        assert np.allclose(adv, td)


class TestPpoUpdate:
    def test_bandit_probability_increases(self):
        # one state, two actions, rewarding action 0 only
        params = init_params(ARCH, np.random.default_rng(0))
        policy = Policy(params, dtype=torch.float32)
        optimizer = torch.optim.Adam(policy.net.parameters(), lr=1e-2)
        obs = np.zeros((64,) + ARCH.input_shape, dtype=np.float32)
        rng = np.random.default_rng(1)
        actions = rng.integers(0, 2, size=64)
        advantages = np.where(actions == 0, 1.0, -1.0)
        returns = np.where(actions == 0, 1.0, 0.0)
        batch = make_batch(policy, obs, actions, advantages, returns)

        def p_action0():
            logits, _ = policy.forward_np(obs[0])
            z = np.exp(logits - logits.max())
            return (z / z.sum())[0]

        before = p_action0()
        config = PpoConfig(epochs=1, minibatch_size=64)
        metrics = ppo_update(policy, optimizer, batch, config, torch.Generator().manual_seed(0))
        assert p_action0() > before
        assert set(metrics) == {
            "mean_ratio", "clip_fraction", "policy_loss", "value_loss", "entropy",
        }

    def test_clipped_transition_contributes_no_policy_gradient(self):
        params = init_params(ARCH, np.random.default_rng(2))
        policy = Policy(params, dtype=torch.float64)
        obs = np.zeros((1,) + ARCH.input_shape)
        logits, _ = policy.forward_np(obs[0])
        z = np.exp(logits - logits.max())
        probs = z / z.sum()
        # fake an old log-prob so the current ratio is far above 1 + eps
        old_log_prob = np.log(probs[0]) - 1.0  # ratio = e > 1.2
        batch = RolloutBatch(
            observations=obs,
            actions=np.array([0]),
            log_probs=np.array([old_log_prob]),
            values=np.array([0.0]),
            advantages=np.array([1.0]),
            returns=np.array([0.0]),
        )
        config = PpoConfig(clip_eps=0.2)
        t_obs = torch.as_tensor(obs, dtype=torch.float64)
        lg, value = policy.net(t_obs)
        dist = torch.distributions.Categorical(logits=lg)
        ratio = torch.exp(dist.log_prob(torch.tensor([0])) - torch.tensor([old_log_prob]))
        adv = torch.tensor([1.0], dtype=torch.float64)
        surrogate = torch.minimum(
            ratio * adv, torch.clamp(ratio, 0.8, 1.2) * adv
        )
        (-surrogate.mean()).backward()
        grads = [p.grad for p in policy.net.parameters() if p.grad is not None]
        total = sum(float(g.abs().sum()) for g in grads)
        assert ratio.item() > 1.2
        # clipped branch is constant in the parameters -> zero gradient
        assert total == pytest.approx(0.0, abs=1e-12)

    def test_non_finite_loss_restores_params(self):
        params = init_params(ARCH, np.random.default_rng(3))
        policy = Policy(params, dtype=torch.float32)
        optimizer = torch.optim.Adam(policy.net.parameters(), lr=1e-3)
        obs = np.zeros((8,) + ARCH.input_shape, dtype=np.float32)
        batch = make_batch(
            policy, obs, np.zeros(8, dtype=np.int64),
            np.full(8, np.inf), np.zeros(8),
        )
        before = policy.get_params().vector.copy()
        with pytest.raises(NonFiniteLossError):
            ppo_update(policy, optimizer, batch, PpoConfig(), torch.Generator().manual_seed(0))
        assert np.array_equal(policy.get_params().vector, before)
