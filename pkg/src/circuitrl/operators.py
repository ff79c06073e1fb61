"""Permutation, GF(2) linear and Clifford tableau operators.

All three kinds evolve under gate application by left multiplication
(the gate acts after the circuit accumulated so far) and support an
identity test and a fixed observation encoding for the policy network.

Tableau convention: rows 0..N-1 are the destabilizer generators (images
of X_i), rows N..2N-1 the stabilizers (images of Z_i); columns 0..N-1
hold the X part and columns N..2N-1 the Z part. The phase vector stores
one sign bit per row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Gate

KINDS = ("permutation", "linear", "clifford")


@dataclass(frozen=True)
class Observation:
    """Fixed-shape numeric encoding of an operator."""

    shape: tuple[int, int, int]
    data: np.ndarray

    def __post_init__(self):
        if self.data.size != int(np.prod(self.shape)):
            raise ValueError("observation data length does not match shape")

    def as_array(self) -> np.ndarray:
        return self.data.reshape(self.shape)


@dataclass
class PermutationOp:
    """Qubit relabeling; mapping[i] is the input qubit whose state ends at wire i."""

    mapping: np.ndarray

    kind = "permutation"

    @classmethod
    def identity(cls, n: int) -> "PermutationOp":
        return cls(np.arange(n, dtype=np.int64))

    @property
    def n_qubits(self) -> int:
        return len(self.mapping)

    def copy(self) -> "PermutationOp":
        return PermutationOp(self.mapping.copy())

    def key(self) -> bytes:
        return self.mapping.tobytes()


@dataclass
class LinearOp:
    """Invertible N x N matrix over GF(2); basis states map as x -> Mx."""

    matrix: np.ndarray

    kind = "linear"

    @classmethod
    def identity(cls, n: int) -> "LinearOp":
        return cls(np.eye(n, dtype=np.uint8))

    @property
    def n_qubits(self) -> int:
        return self.matrix.shape[0]

    def copy(self) -> "LinearOp":
        return LinearOp(self.matrix.copy())

    def key(self) -> bytes:
        return np.packbits(self.matrix).tobytes()


@dataclass
class CliffordOp:
    """Symplectic 2N x 2N bit matrix plus 2N phase bits."""

    matrix: np.ndarray
    phase: np.ndarray

    kind = "clifford"

    @classmethod
    def identity(cls, n: int) -> "CliffordOp":
        return cls(np.eye(2 * n, dtype=np.uint8), np.zeros(2 * n, dtype=np.uint8))

    @property
    def n_qubits(self) -> int:
        return self.matrix.shape[0] // 2

    def copy(self) -> "CliffordOp":
        return CliffordOp(self.matrix.copy(), self.phase.copy())

    def key(self) -> bytes:
        # identity/search state key deliberately ignores the phase bits
        return np.packbits(self.matrix).tobytes()


Operator = PermutationOp | LinearOp | CliffordOp


def identity_op(kind: str, n: int) -> Operator:
    if kind == "permutation":
        return PermutationOp.identity(n)
    if kind == "linear":
        return LinearOp.identity(n)
    if kind == "clifford":
        return CliffordOp.identity(n)
    raise ValueError(f"unknown operator kind {kind!r}")


def apply_gate_inplace(op: Operator, g: Gate) -> None:
    """Evolve op by gate g, mutating op's arrays."""
    if isinstance(op, PermutationOp):
        if g.kind != "swap":
            raise ValueError(f"gate {g.kind!r} illegal for permutation operators")
        a, b = g.qubits
        op.mapping[[a, b]] = op.mapping[[b, a]]
        return
    if isinstance(op, LinearOp):
        if g.kind != "cx":
            raise ValueError(f"gate {g.kind!r} illegal for linear operators")
        c, t = g.qubits
        op.matrix[t, :] ^= op.matrix[c, :]
        return
    if isinstance(op, CliffordOp):
        n = op.n_qubits
        m, p = op.matrix, op.phase
        if g.kind == "h":
            (q,) = g.qubits
            p ^= m[:, q] & m[:, n + q]
            m[:, [q, n + q]] = m[:, [n + q, q]]
        elif g.kind == "s":
            (q,) = g.qubits
            p ^= m[:, q] & m[:, n + q]
            m[:, n + q] ^= m[:, q]
        elif g.kind == "cx":
            c, t = g.qubits
            p ^= m[:, c] & m[:, n + t] & (m[:, t] ^ m[:, n + c] ^ 1)
            m[:, t] ^= m[:, c]
            m[:, n + c] ^= m[:, n + t]
        else:
            raise ValueError(f"gate {g.kind!r} illegal for clifford operators")
        return
    raise TypeError(f"not an operator: {op!r}")


def apply_gate(op: Operator, g: Gate) -> Operator:
    """Pure version of apply_gate_inplace."""
    out = op.copy()
    apply_gate_inplace(out, g)
    return out


def apply_circuit(op: Operator, gates) -> Operator:
    out = op.copy()
    for g in gates:
        apply_gate_inplace(out, g)
    return out


def is_identity(op: Operator) -> bool:
    """Identity test; Clifford ignores the phase vector."""
    if isinstance(op, PermutationOp):
        return bool(np.array_equal(op.mapping, np.arange(op.n_qubits)))
    if isinstance(op, LinearOp):
        return bool(np.array_equal(op.matrix, np.eye(op.n_qubits, dtype=np.uint8)))
    if isinstance(op, CliffordOp):
        return bool(np.array_equal(op.matrix, np.eye(2 * op.n_qubits, dtype=np.uint8)))
    raise TypeError(f"not an operator: {op!r}")


def symplectic_form(n: int) -> np.ndarray:
    omega = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    omega[:n, n:] = np.eye(n, dtype=np.uint8)
    omega[n:, :n] = np.eye(n, dtype=np.uint8)
    return omega


def is_symplectic(matrix: np.ndarray) -> bool:
    n = matrix.shape[0] // 2
    omega = symplectic_form(n)
    return bool(np.array_equal((matrix @ omega @ matrix.T) % 2, omega))


def gf2_invertible(matrix: np.ndarray) -> bool:
    m = matrix.copy() % 2
    n = m.shape[0]
    rank = 0
    for col in range(n):
        pivots = np.nonzero(m[rank:, col])[0]
        if len(pivots) == 0:
            continue
        pivot = rank + pivots[0]
        m[[rank, pivot]] = m[[pivot, rank]]
        mask = m[:, col].copy()
        mask[rank] = 0
        m[mask == 1] ^= m[rank]
        rank += 1
    return rank == n


def random_target(kind: str, n_qubits: int, difficulty: int, gate_set, rng: np.random.Generator) -> Operator:
    """Operator reachable from identity in `difficulty` gate-set actions."""
    if difficulty < 1:
        raise ValueError(f"difficulty must be >= 1, got {difficulty}")
    if gate_set.kind != kind:
        raise ValueError(f"gate set kind {gate_set.kind!r} does not match {kind!r}")
    op = identity_op(kind, n_qubits)
    actions = gate_set.actions
    for _ in range(difficulty):
        apply_gate_inplace(op, actions[rng.integers(len(actions))])
    return op


def random_uniform_clifford(n_qubits: int, rng: np.random.Generator) -> CliffordOp:
    """Approximately uniform Clifford via a long all-to-all random walk."""
    from .circuits import CX, H, S

    gates: list[Gate] = []
    for q in range(n_qubits):
        gates.append(H(q))
        gates.append(S(q))
    for a in range(n_qubits):
        for b in range(n_qubits):
            if a != b:
                gates.append(CX(a, b))
    op = CliffordOp.identity(n_qubits)
    # every action is a matrix-level involution, so a fixed-length walk
    # conserves word-length parity; randomize it to cover both cosets
    steps = 40 * n_qubits * n_qubits + int(rng.integers(2))
    for _ in range(steps):
        apply_gate_inplace(op, gates[rng.integers(len(gates))])
    return op


def uniform_random_operator(kind: str, n_qubits: int, rng: np.random.Generator) -> Operator:
    """Uniform random permutation / GL(n,2) matrix, or near-uniform Clifford."""
    if kind == "permutation":
        return PermutationOp(rng.permutation(n_qubits).astype(np.int64))
    if kind == "linear":
        while True:
            m = rng.integers(0, 2, size=(n_qubits, n_qubits)).astype(np.uint8)
            if gf2_invertible(m):
                return LinearOp(m)
    if kind == "clifford":
        return random_uniform_clifford(n_qubits, rng)
    raise ValueError(f"unknown operator kind {kind!r}")


def encode(op: Operator) -> Observation:
    """Encode an operator as a (rows, cols, channels) observation."""
    n = op.n_qubits
    if isinstance(op, PermutationOp):
        arr = np.zeros((n, n, 1), dtype=np.float32)
        arr[np.arange(n), op.mapping, 0] = 1.0
    elif isinstance(op, LinearOp):
        arr = op.matrix.astype(np.float32)[:, :, None]
    elif isinstance(op, CliffordOp):
        m = op.matrix
        arr = np.stack(
            [m[:n, :n], m[:n, n:], m[n:, :n], m[n:, n:]], axis=-1
        ).astype(np.float32)
    else:
        raise TypeError(f"not an operator: {op!r}")
    return Observation(arr.shape, arr.reshape(-1))


def observation_shape(kind: str, n_qubits: int) -> tuple[int, int, int]:
    channels = 4 if kind == "clifford" else 1
    return (n_qubits, n_qubits, channels)


def fix_phase(op: CliffordOp) -> list[Gate]:
    """Single-qubit gates that zero the phase vector of an identity-matrix tableau.

    A set phase bit on destabilizer row q needs a Z on q (two S gates);
    on stabilizer row q an X (H S S H). At most 2N Pauli corrections.
    """
    from .circuits import H, S

    n = op.n_qubits
    if not np.array_equal(op.matrix, np.eye(2 * n, dtype=np.uint8)):
        raise ValueError("fix_phase requires an identity tableau matrix")
    gates: list[Gate] = []
    for q in range(n):
        if op.phase[q]:
            gates.extend([S(q), S(q)])
        if op.phase[n + q]:
            gates.extend([H(q), S(q), S(q), H(q)])
    return gates
