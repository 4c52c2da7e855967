"""End-to-end certification run on synthetic counting data.

Simulates a delay-scan coincidence experiment on the exact 4-mode Fourier
transform with a realistic source (indistinguishability 0.95), then feeds
the counts through the analysis chain: plateau reference extraction,
violation curve with Poissonian Monte Carlo error bars, and the final
hypothesis test. With 10^5 expected counts per delay point both alternative
hypotheses are excluded by hundreds of standard deviations.
"""

import numpy as np

from qfftsim import DelayModel, certify, qft_matrix, violation_curve
from qfftsim.certify import classical_pair_probabilities
from qfftsim.cli import simulate_experiment
from qfftsim.fourier import occupied_modes, partition_outputs


def main():
    m = 4
    u = qft_matrix(m)
    input_pair = (1, 3)  # modes 2 and 4
    model = DelayModel(alpha=0.95, coherence_length=100.0)
    delays = np.linspace(-300.0, 300.0, 21)
    rng = np.random.default_rng(42)

    records = simulate_experiment(u, input_pair, model, delays, 1e5, rng)
    print(f"simulated {len(records)} coincidence records "
          f"({len(delays)} delays x {len(records) // len(delays)} output pairs)")

    partition = partition_outputs(2, m, collision_free_only=True)
    pairs = sorted(tuple(occupied_modes(s)) for s in partition.forbidden)
    pc = classical_pair_probabilities(u, input_pair, pairs)

    curve = violation_curve(records, pc, trials=3000, seed=7)
    print("\nviolation degree versus delay (expected: 0.5 plateau, 0.025 floor):")
    for dx, d_obs, sigma in curve:
        if abs(dx) in (0.0, 60.0, 120.0, 180.0, 300.0):
            bar = "#" * int(round(d_obs * 60))
            print(f"  dx = {dx:+6.0f} um  D = {d_obs:.4f} +/- {sigma:.4f}  {bar}")

    d0, s0 = next((d, s) for dx, d, s in curve if dx == 0.0)
    report = certify(d0, s0)
    print(f"\nzero-delay violation: {report.d_obs:.5f} +/- {report.sigma:.5f}")
    print(f"  vs distinguishable (0.5): {report.sigmas_vs_distinguishable:7.1f} sigma")
    print(f"  vs mean field     (0.25): {report.sigmas_vs_mean_field:7.1f} sigma")
    print(f"  verdict: {report.verdict}")


if __name__ == "__main__":
    main()
