"""Ground-truth oracles: dense unitary simulation, operator extraction
from unitaries, exhaustive BFS synthesis and the inversion-count bound.

These are deliberately independent of the tableau/GF(2)/permutation
engines so the two paths can be cross-checked exactly.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .circuits import Circuit, Gate, S
from .operators import (
    CliffordOp,
    LinearOp,
    Operator,
    PermutationOp,
    apply_circuit,
    identity_op,
    is_identity,
)

MAX_DENSE_QUBITS = 6


class BoundExceededError(ValueError):
    """Search/simulation size outside the oracle's exhaustive bounds."""

_H1 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S1 = np.array([[1, 0], [0, 1j]], dtype=complex)
_X1 = np.array([[0, 1], [1, 0]], dtype=complex)
_Z1 = np.array([[1, 0], [0, -1]], dtype=complex)


def gate_unitary(g: Gate, n: int) -> np.ndarray:
    """Full 2^n unitary of a single gate; qubit 0 is the least significant bit."""
    dim = 1 << n
    u = np.zeros((dim, dim), dtype=complex)
    if g.kind in ("h", "s"):
        (q,) = g.qubits
        m = _H1 if g.kind == "h" else _S1
        bit = 1 << q
        for x in range(dim):
            xq = (x >> q) & 1
            for b in (0, 1):
                y = (x & ~bit) | (b << q)
                u[y, x] = m[b, xq]
    elif g.kind == "cx":
        c, t = g.qubits
        for x in range(dim):
            y = x ^ (1 << t) if (x >> c) & 1 else x
            u[y, x] = 1.0
    elif g.kind == "swap":
        a, b = g.qubits
        for x in range(dim):
            ba, bb = (x >> a) & 1, (x >> b) & 1
            y = x & ~((1 << a) | (1 << b)) | (bb << a) | (ba << b)
            u[y, x] = 1.0
    else:
        raise ValueError(f"unknown gate kind {g.kind!r}")
    return u


def dense_simulate(circuit: Circuit, n: int | None = None) -> np.ndarray:
    """Gate-by-gate matrix product of the circuit's unitary."""
    n = circuit.n_qubits if n is None else n
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense simulation limited to {MAX_DENSE_QUBITS} qubits")
    u = np.eye(1 << n, dtype=complex)
    for g in circuit.gates:
        u = gate_unitary(g, n) @ u
    return u


def pauli_matrix(x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Canonical Pauli for bit vectors x, z; (1,1) on a qubit is +Y."""
    m = np.array([[1.0 + 0j]])
    for q in reversed(range(len(x))):
        if x[q] and z[q]:
            p = 1j * _X1 @ _Z1
        elif x[q]:
            p = _X1
        elif z[q]:
            p = _Z1
        else:
            p = np.eye(2, dtype=complex)
        m = np.kron(m, p)
    return m


def _extract_pauli(c: np.ndarray, n: int, atol: float = 1e-8):
    """Decompose c as sign * canonical Pauli; raises if it is not one."""
    col0 = c[:, 0]
    rows = np.nonzero(np.abs(col0) > atol)[0]
    if len(rows) != 1:
        raise ValueError("unitary does not conjugate Paulis to Paulis")
    xmask = int(rows[0])
    x = np.array([(xmask >> q) & 1 for q in range(n)], dtype=np.uint8)
    z = np.zeros(n, dtype=np.uint8)
    for q in range(n):
        ratio = c[xmask ^ (1 << q), 1 << q] / col0[xmask]
        if abs(ratio - 1) < atol:
            z[q] = 0
        elif abs(ratio + 1) < atol:
            z[q] = 1
        else:
            raise ValueError("unitary does not conjugate Paulis to Paulis")
    sign = col0[xmask] / (1j ** int(np.sum(x & z)))
    if abs(sign - 1) < atol:
        r = 0
    elif abs(sign + 1) < atol:
        r = 1
    else:
        raise ValueError("unitary does not conjugate Paulis to Paulis")
    expected = ((-1) ** r) * pauli_matrix(x, z)
    if not np.allclose(c, expected, atol=1e-6):
        raise ValueError("unitary does not conjugate Paulis to Paulis")
    return x, z, r


def clifford_from_unitary(u: np.ndarray) -> CliffordOp:
    """Read the tableau (rows and phase bits) off a dense Clifford unitary."""
    dim = u.shape[0]
    n = dim.bit_length() - 1
    matrix = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    phase = np.zeros(2 * n, dtype=np.uint8)
    udag = u.conj().T
    for i in range(n):
        for row, (px, pz) in ((i, (1, 0)), (n + i, (0, 1))):
            xv = np.zeros(n, dtype=np.uint8)
            zv = np.zeros(n, dtype=np.uint8)
            xv[i], zv[i] = px, pz
            conj = u @ pauli_matrix(xv, zv) @ udag
            x, z, r = _extract_pauli(conj, n)
            matrix[row, :n] = x
            matrix[row, n:] = z
            phase[row] = r
    return CliffordOp(matrix, phase)


def linear_from_unitary(u: np.ndarray) -> LinearOp:
    """Read the GF(2) matrix off a basis-permuting CX-circuit unitary."""
    dim = u.shape[0]
    n = dim.bit_length() - 1
    matrix = np.zeros((n, n), dtype=np.uint8)
    for j in range(n):
        col = u[:, 1 << j]
        rows = np.nonzero(np.abs(col) > 1e-8)[0]
        if len(rows) != 1 or abs(col[rows[0]] - 1) > 1e-8:
            raise ValueError("unitary is not a CX-circuit unitary")
        y = int(rows[0])
        matrix[:, j] = [(y >> q) & 1 for q in range(n)]
    return matrix_op_checked(matrix, u, n)


def matrix_op_checked(matrix: np.ndarray, u: np.ndarray, n: int) -> LinearOp:
    for x in range(1 << n):
        xv = np.array([(x >> q) & 1 for q in range(n)], dtype=np.uint8)
        y = int(np.sum((matrix @ xv) % 2 * (1 << np.arange(n))))
        if abs(u[y, x] - 1) > 1e-8:
            raise ValueError("unitary is not a CX-circuit unitary")
    return LinearOp(matrix)


def permutation_from_unitary(u: np.ndarray) -> PermutationOp:
    """Read the wire permutation off a SWAP-circuit unitary."""
    lin = linear_from_unitary(u)
    matrix = lin.matrix
    if not np.array_equal(matrix.sum(axis=0), np.ones(matrix.shape[0], dtype=np.uint8)):
        raise ValueError("unitary is not a SWAP-circuit unitary")
    # y_i = x_{mapping[i]}  <=>  matrix[i, mapping[i]] = 1
    mapping = np.argmax(matrix, axis=1).astype(np.int64)
    return PermutationOp(mapping)


def extract_operator(kind: str, u: np.ndarray) -> Operator:
    if kind == "permutation":
        return permutation_from_unitary(u)
    if kind == "linear":
        return linear_from_unitary(u)
    if kind == "clifford":
        return clifford_from_unitary(u)
    raise ValueError(f"unknown operator kind {kind!r}")


def inversion_count(perm: PermutationOp) -> int:
    """Out-of-order pairs; the minimal SWAP count on a line topology."""
    m = perm.mapping
    n = len(m)
    return sum(1 for i in range(n) for j in range(i + 1, n) if m[i] > m[j])


_BFS_BOUNDS = {"permutation": 6, "linear": 4, "clifford": 3}


def _invert_gates(gates) -> list[Gate]:
    out = []
    for g in reversed(gates):
        if g.kind == "s":
            out.extend([S(g.qubits[0])] * 3)
        else:
            out.append(g)
    return out


def bfs_optimal(op: Operator, gate_set, objective: str = "count") -> Circuit:
    """Provably minimal circuit implementing op within the gate set.

    objective "count" minimizes the number of gate-set actions;
    "layers" minimizes the number of layers of pairwise-disjoint
    actions (two-qubit-only gate sets).
    """
    n = op.n_qubits
    bound = _BFS_BOUNDS[op.kind]
    if n > bound:
        raise BoundExceededError(f"BFS oracle limited to {bound} qubits for {op.kind}")
    actions = list(gate_set.actions)
    if objective == "count":
        moves: list[tuple[Gate, ...]] = [(g,) for g in actions]
    elif objective == "layers":
        if any(not g.is_two_qubit for g in actions):
            raise ValueError("layer-optimal BFS supports two-qubit-only gate sets")
        moves = _disjoint_layers(actions)
    else:
        raise ValueError(f"unknown objective {objective!r}")

    start = op.copy()
    if is_identity(start):
        return Circuit(n)
    visited: dict[bytes, tuple[bytes, tuple[Gate, ...]] | None] = {start.key(): None}
    queue = deque([start.key()])
    while queue:
        key = queue.popleft()
        state = _op_from_key(op.kind, n, key)
        for move in moves:
            nxt = apply_circuit(state, move)
            nkey = nxt.key()
            if nkey in visited:
                continue
            visited[nkey] = (key, move)
            if is_identity(nxt):
                seq: list[Gate] = []
                cur = nkey
                while visited[cur] is not None:
                    prev, mv = visited[cur]
                    seq = list(mv) + seq
                    cur = prev
                return Circuit(n, tuple(_invert_gates(seq)))
            queue.append(nkey)
    raise RuntimeError("BFS exhausted the state space without reaching identity")


def _op_from_key(kind: str, n: int, key: bytes) -> Operator:
    if kind == "permutation":
        return PermutationOp(np.frombuffer(key, dtype=np.int64).copy())
    if kind == "linear":
        bits = np.unpackbits(np.frombuffer(key, dtype=np.uint8), count=n * n)
        return LinearOp(bits.reshape(n, n))
    bits = np.unpackbits(np.frombuffer(key, dtype=np.uint8), count=4 * n * n)
    return CliffordOp(bits.reshape(2 * n, 2 * n), np.zeros(2 * n, dtype=np.uint8))


def _disjoint_layers(actions: list[Gate]) -> list[tuple[Gate, ...]]:
    layers: list[tuple[Gate, ...]] = []

    def extend(prefix: list[Gate], used: set[int], start: int):
        if prefix:
            layers.append(tuple(prefix))
        for i in range(start, len(actions)):
            g = actions[i]
            if not used.intersection(g.qubits):
                extend(prefix + [g], used | set(g.qubits), i + 1)

    extend([], set(), 0)
    return layers
