"""Synthesise the butterfly circuit and check it against the Fourier matrix.

The m = 2^p Fourier transform needs only (m/2) * p balanced couplers when it
is built as a radix-2 butterfly: step j couples the mode pairs whose binary
labels differ in bit j, phases sit in front of the couplers they feed, and a
final bit-reversal relabels the outputs. This script prints the full layer
table for the 8-mode circuit, verifies the composition for p = 1..6, and
shows what a fabrication error on one phase shifter does to the fidelity.
"""

import numpy as np

from qfftsim import (
    circuit_to_unitary,
    fidelity,
    nontrivial_phase_positions,
    perturb_circuit,
    qft_matrix,
    synthesize_qfft,
)
from qfftsim.circuit import relabeling_swaps


def main():
    print("composition check, fidelity of the composed circuit vs the Fourier matrix:")
    for p in range(1, 7):
        circuit = synthesize_qfft(p)
        fid = fidelity(circuit_to_unitary(circuit), qft_matrix(circuit.m))
        print(f"  p={p}  m={circuit.m:3d}  couplers={circuit.coupler_count:4d}  "
              f"1 - F = {1 - fid:.2e}")

    circuit = synthesize_qfft(3)
    print("\nlayer table for m = 8 (modes 1-based):")
    for layer in circuit.layers:
        pairs = ", ".join(f"{a + 1}-{b + 1}" for a, b in layer.couplers)
        phases = ", ".join(
            f"mode {t + 1}: {angle / np.pi:.2f} pi" for t, angle in sorted(layer.phases.items())
        )
        print(f"  step {layer.step}: couplers {pairs}")
        print(f"           phases  {phases or '(none)'}")
    swaps = ", ".join(f"{a}<->{b}" for a, b in relabeling_swaps(circuit))
    print(f"  output relabeling: {swaps}")

    positions = nontrivial_phase_positions(circuit)
    print(f"\nthe {len(positions)} fabrication-phase positions: {positions}")
    rng = np.random.default_rng(1)
    for scale in (0.01, 0.05, 0.2):
        errors = {pos: rng.normal(0.0, scale) for pos in positions}
        u = circuit_to_unitary(perturb_circuit(circuit, errors))
        print(f"  phase noise sigma = {scale:.2f} rad  ->  fidelity {fidelity(u, qft_matrix(8)):.5f}")


if __name__ == "__main__":
    main()
