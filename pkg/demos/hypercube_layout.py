"""Planar hypercube placement of the butterfly waveguides.

In a 3-D photonic chip the 2^p modes can sit on the vertices of a
p-dimensional hypercube projected onto the chip cross-section. All couplers
of a given butterfly step are then parallel, equally long, and crossing-free,
so one coupler design serves the whole step. This script prints the vertex
coordinates and per-step edge geometry for p = 1..4 and validates the
invariants for every supported dimension.
"""

import numpy as np

from qfftsim import hypercube_layout
from qfftsim.layout import step_edge_vectors, validate_layout


def main():
    for p in range(1, 5):
        lay = hypercube_layout(p)
        print(f"\n=== p = {p} ({2**p} modes) ===")
        for mode, (x, y) in enumerate(lay.vertices):
            print(f"  mode {mode + 1:2d} at ({x:7.3f}, {y:7.3f})")
        for s in range(p):
            vecs = step_edge_vectors(lay, s)
            lengths = np.linalg.norm(vecs, axis=1)
            direction = vecs[0] / lengths[0]
            print(f"  step {s + 1}: {len(vecs)} parallel edges, length {lengths[0]:.3f}, "
                  f"direction ({direction[0]:+.3f}, {direction[1]:+.3f}), "
                  f"length spread {np.ptp(lengths):.1e}")

    print("\nvalidating geometric invariants for p = 1..6:")
    for p in range(1, 7):
        validate_layout(hypercube_layout(p))
        print(f"  p={p}: distinct vertices, equal parallel edges, no crossings")


if __name__ == "__main__":
    main()
