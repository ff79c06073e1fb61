"""Reinforcement-learning synthesis and routing of Clifford-family
circuits under coupling-map constraints.

Submodules:
  circuits    gates, circuits, layouts, metrics, QASM-lite text format
  topologies  coupling-map registry (lines, rings, trees, heavy-hex)
  operators   permutation / GF(2) linear / Clifford tableau engines
  envs        synthesis environment, rewards, curriculum
  policy      conv + FC policy/value network
  ppo         PPO training loop with GAE
  decoders    greedy / sampling / top-k / top-p inference
  routing     SWAP-insertion routing (learned and heuristic)
  oracles     dense simulation, BFS-optimal synthesis, inversion count
  bench       benchmark harness and reports
  checkpoint  versioned policy persistence
  config      INI run configuration
  training    high-level train() entry point
"""

from .circuits import (
    CX,
    SWAP,
    Circuit,
    CircuitSyntaxError,
    Gate,
    H,
    Layout,
    S,
    count2q,
    depth2q,
    emit_circuit,
    parse_circuit,
)
from .operators import (
    CliffordOp,
    LinearOp,
    PermutationOp,
    apply_circuit,
    apply_gate,
    encode,
    fix_phase,
    identity_op,
    is_identity,
)
from .topologies import CouplingMap, topology, topology_names

__all__ = [
    "CX",
    "SWAP",
    "Circuit",
    "CircuitSyntaxError",
    "CliffordOp",
    "CouplingMap",
    "Gate",
    "H",
    "Layout",
    "LinearOp",
    "PermutationOp",
    "S",
    "apply_circuit",
    "apply_gate",
    "count2q",
    "depth2q",
    "emit_circuit",
    "encode",
    "fix_phase",
    "identity_op",
    "is_identity",
    "parse_circuit",
    "topology",
    "topology_names",
]

__version__ = "0.1.0"
