"""Train a small permutation-synthesis policy and decode a few targets.

Runs in about a minute on CPU. Shows the full loop: config -> PPO
training with a difficulty curriculum -> greedy / multi-run decoding ->
QASM-lite emission, with the BFS oracle as the optimality reference.
"""

import numpy as np

from circuitrl.circuits import count2q, emit_circuit
from circuitrl.config import RunConfig
from circuitrl.decoders import DecodeConfig, decode_greedy, decode_multi
from circuitrl.envs import build_gate_set
from circuitrl.operators import uniform_random_operator
from circuitrl.oracles import bfs_optimal, inversion_count
from circuitrl.topologies import topology
from circuitrl.training import train


def main():
    config = RunConfig()
    config.env.kind = "permutation"
    config.env.topology = "4-L"
    config.env.step_limit = 32
    config.arch.conv_filters = 8
    config.arch.hidden = (64, 32)
    config.ppo.n_envs = 4
    config.ppo.rollout_steps = 64
    config.ppo.minibatch_size = 128
    config.ppo.total_steps = 120_000
    config.curriculum.max_difficulty = 16
    config.curriculum.window_size = 32

    print("training a 4-qubit line permutation policy ...")
    ckpt = train(config, seed=0, early_stop_success=1.0, early_stop_patience=5)
    print(f"  done after {ckpt.training_steps} env steps, "
          f"final difficulty {ckpt.final_difficulty}\n")

    coupling = topology("4-L")
    gate_set = build_gate_set("permutation", coupling)
    rng = np.random.default_rng(1)
    for i in range(3):
        target = uniform_random_operator("permutation", 4, rng)
        optimum = inversion_count(target)
        oracle = bfs_optimal(target, gate_set, "count")
        greedy = decode_greedy(ckpt.params, target, gate_set, step_limit=32)
        multi = decode_multi(
            ckpt.params, target, gate_set,
            DecodeConfig(strategy="sample", runs=50, step_limit=32), rng,
        )
        print(f"target {i}: mapping {target.mapping.tolist()}")
        print(f"  inversion-count optimum : {optimum} SWAPs "
              f"(BFS oracle: {count2q(oracle)})")
        if greedy.success:
            print(f"  greedy decode           : {count2q(greedy.circuit)} SWAPs")
        print(f"  best of 50 sampled runs : {count2q(multi.circuit)} SWAPs")
        print("  circuit:")
        for line in emit_circuit(multi.circuit).splitlines():
            print(f"    {line}")
        print()


if __name__ == "__main__":
    main()
