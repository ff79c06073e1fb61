"""Gates, circuits, layouts and the QASM-lite text format.

Gate kinds are restricted to the Clifford basis used throughout: H, S,
CX and SWAP. Circuits are immutable value objects; all qubit indices are
physical once a layout has been applied.
"""

from __future__ import annotations

from dataclasses import dataclass, field

ONE_QUBIT_KINDS = frozenset({"h", "s"})
TWO_QUBIT_KINDS = frozenset({"cx", "swap"})
GATE_KINDS = ONE_QUBIT_KINDS | TWO_QUBIT_KINDS


@dataclass(frozen=True)
class Gate:
    """A single gate: lowercase kind plus an ordered qubit tuple."""

    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        arity = 1 if self.kind in ONE_QUBIT_KINDS else 2
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} expects {arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"duplicate qubit in {self.kind} {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit index in {self.qubits}")

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT_KINDS


def H(q: int) -> Gate:
    return Gate("h", (q,))


def S(q: int) -> Gate:
    return Gate("s", (q,))


def CX(c: int, t: int) -> Gate:
    return Gate("cx", (c, t))


def SWAP(a: int, b: int) -> Gate:
    return Gate("swap", (a, b))


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list on a fixed number of qubits."""

    n_qubits: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(q >= self.n_qubits for q in g.qubits):
                raise ValueError(f"gate {g} out of range for {self.n_qubits} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    def appended(self, *gates: Gate) -> "Circuit":
        return Circuit(self.n_qubits, self.gates + tuple(gates))


@dataclass(frozen=True)
class Layout:
    """Bijection logical qubit -> physical qubit."""

    logical_to_physical: tuple[int, ...]

    def __post_init__(self):
        l2p = tuple(self.logical_to_physical)
        object.__setattr__(self, "logical_to_physical", l2p)
        if sorted(l2p) != list(range(len(l2p))):
            raise ValueError(f"layout {l2p} is not a permutation")

    @classmethod
    def identity(cls, n: int) -> "Layout":
        return cls(tuple(range(n)))

    @property
    def physical_to_logical(self) -> tuple[int, ...]:
        p2l = [0] * len(self.logical_to_physical)
        for l, p in enumerate(self.logical_to_physical):
            p2l[p] = l
        return tuple(p2l)

    def swapped_physical(self, a: int, b: int) -> "Layout":
        """Layout after swapping whatever logicals sit at physical a and b."""
        p2l = list(self.physical_to_logical)
        p2l[a], p2l[b] = p2l[b], p2l[a]
        l2p = [0] * len(p2l)
        for p, l in enumerate(p2l):
            l2p[l] = p
        return Layout(tuple(l2p))


def count2q(circuit: Circuit) -> int:
    """Number of two-qubit gates (CX or SWAP)."""
    return sum(1 for g in circuit.gates if g.is_two_qubit)


def depth2q(circuit: Circuit) -> int:
    """Two-qubit depth under greedy as-soon-as-possible layering.

    Single-qubit gates advance their qubit's timeline but only layers
    containing at least one two-qubit gate are counted.
    """
    level = [0] * circuit.n_qubits
    layers_2q: set[int] = set()
    for g in circuit.gates:
        lv = max(level[q] for q in g.qubits) + 1
        for q in g.qubits:
            level[q] = lv
        if g.is_two_qubit:
            layers_2q.add(lv)
    return len(layers_2q)


class CircuitSyntaxError(ValueError):
    """QASM-lite parse failure, annotated with a 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def parse_circuit(text: str) -> Circuit:
    """Parse QASM-lite: `qubits N` header then one gate per line."""
    n_qubits = None
    gates: list[Gate] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if n_qubits is None:
            if tokens[0] != "qubits" or len(tokens) != 2:
                raise CircuitSyntaxError(line_no, "expected header 'qubits N'")
            try:
                n_qubits = int(tokens[1])
            except ValueError:
                raise CircuitSyntaxError(line_no, f"bad qubit count {tokens[1]!r}") from None
            if n_qubits <= 0:
                raise CircuitSyntaxError(line_no, "qubit count must be positive")
            continue
        kind = tokens[0]
        if kind not in GATE_KINDS:
            raise CircuitSyntaxError(line_no, f"unknown gate {kind!r}")
        try:
            qubits = tuple(int(t) for t in tokens[1:])
        except ValueError:
            raise CircuitSyntaxError(line_no, f"bad qubit index in {line!r}") from None
        if any(q >= n_qubits for q in qubits):
            raise CircuitSyntaxError(line_no, f"qubit index out of range in {line!r}")
        try:
            gates.append(Gate(kind, qubits))
        except ValueError as exc:
            raise CircuitSyntaxError(line_no, str(exc)) from None
    if n_qubits is None:
        raise CircuitSyntaxError(1, "missing 'qubits N' header")
    return Circuit(n_qubits, tuple(gates))


def emit_circuit(circuit: Circuit) -> str:
    """Render a circuit in normalized QASM-lite."""
    lines = [f"qubits {circuit.n_qubits}"]
    for g in circuit.gates:
        lines.append(" ".join([g.kind, *map(str, g.qubits)]))
    return "\n".join(lines) + "\n"
