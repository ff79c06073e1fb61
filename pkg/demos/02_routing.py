"""Route a random QV-style circuit onto the 6-T coupling map.

Shows the SABRE-style baseline, bidirectional passes, and the routed
result's verification report (coupling legality, permutation tracking,
and dense unitary equivalence).
"""

import numpy as np

from circuitrl.circuits import count2q, depth2q, emit_circuit
from circuitrl.routing import (
    bidirectional_route,
    finalize_route,
    random_qv_circuit,
    sabre_lite,
)
from circuitrl.topologies import topology


def main():
    coupling = topology("6-T")
    rng = np.random.default_rng(0)
    circuit = random_qv_circuit(6, 3, rng)
    print("logical circuit:")
    for line in emit_circuit(circuit).splitlines():
        print(f"  {line}")
    print(f"  2q count {count2q(circuit)}, 2q depth {depth2q(circuit)}\n")

    single = sabre_lite(circuit, coupling)
    print(f"single sabre_lite pass : count {count2q(single.circuit)}, "
          f"depth {depth2q(single.circuit)}")

    router = lambda c, layout: sabre_lite(c, coupling, initial_layout=layout)
    best = bidirectional_route(circuit, router, iterations=8)
    print(f"8 bidirectional passes : count {count2q(best.circuit)}, "
          f"depth {depth2q(best.circuit)}")
    print(f"  initial layout {list(best.initial_layout.logical_to_physical)}")
    print(f"  final layout   {list(best.final_layout.logical_to_physical)}\n")

    reportcard = finalize_route(best, circuit, coupling)
    print("verification:")
    print(f"  coupling legality : {reportcard.legal}")
    print(f"  permutation check : {reportcard.permutation_ok}")
    print(f"  dense equivalence : {reportcard.dense_ok}")
    print("\nrouted circuit:")
    for line in emit_circuit(best.circuit).splitlines():
        print(f"  {line}")


if __name__ == "__main__":
    main()
