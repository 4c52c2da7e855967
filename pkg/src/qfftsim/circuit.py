"""Butterfly synthesis of the Fourier transform on m = 2^p optical modes.

The circuit uses the radix-2 decimation-in-frequency factorisation. Step j
(j = 1..p) couples every pair of modes whose binary labels differ only in
bit j, counting from the most significant bit, through a balanced
Hadamard-type coupler ``[[1, 1], [1, -1]]/sqrt(2)``. The twiddle phases
produced after step j are folded into the phase map of step j+1 (phases are
applied *before* the couplers of their layer), so the first layer carries no
phases. After the last layer the outputs appear in bit-reversed order; a
final mode relabeling brings the composed matrix to the Fourier matrix
exactly. For m = 8 that relabeling is the pair of swaps 2<->5 and 4<->7 in
1-based labels, and the nominal circuit carries exactly five nontrivial
phase shifters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError
from .fourier import qft_matrix

#: Largest supported layer count for synthesis (m = 2^cap modes).
SYNTH_CAP = 10

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Layer:
    """One butterfly step: phase shifts applied first, then the couplers.

    ``step`` is the 1-based step index j; every coupler pair differs in bit j
    of the mode label (most significant bit = bit 1). ``phases`` maps mode
    index to a phase in [0, 2*pi) applied before the couplers of this layer.
    """

    step: int
    couplers: tuple[tuple[int, int], ...]
    phases: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class QfftCircuit:
    """Layered coupler/phase description plus the final output relabeling.

    ``output_relabeling[k]`` is the logical output index assigned to physical
    port k after the last layer; for the nominal circuit this is the
    bit-reversal permutation (an involution).
    """

    p: int
    m: int
    layers: tuple[Layer, ...]
    output_relabeling: tuple[int, ...]

    @property
    def coupler_count(self) -> int:
        return sum(len(layer.couplers) for layer in self.layers)


def bit_reversal(p: int) -> tuple[int, ...]:
    """Bit-reversal permutation of 0..2^p-1."""
    m = 1 << p
    out = []
    for k in range(m):
        r = 0
        x = k
        for _ in range(p):
            r = (r << 1) | (x & 1)
            x >>= 1
        out.append(r)
    return tuple(out)


def synthesize_qfft(p: int, cap: int = SYNTH_CAP) -> QfftCircuit:
    """Nominal p-layer butterfly circuit composing to ``qft_matrix(2^p)``.

    Layer j pairs the modes differing in bit j (MSB first) and carries the
    twiddle phases 2*pi*q/2^(p-j+2) left over from step j-1 on the modes
    whose bit j-1 is set, q being the mode's offset within the lower half of
    its step-(j-1) block. Layer 1 carries no phases.
    """
    if not 1 <= p <= cap:
        raise DomainError(f"layer count p must be in 1..{cap}, got {p}")
    m = 1 << p
    layers = []
    for j in range(1, p + 1):
        half = 1 << (p - j)  # value of bit j in the mode label
        couplers = tuple((t, t + half) for t in range(m) if not t & half)
        phases: dict[int, float] = {}
        if j >= 2:
            prev_half = 1 << (p - j + 1)  # value of bit j-1
            block = 2 * prev_half  # DFT block size of the previous step
            for t in range(m):
                if t & prev_half:
                    angle = TWO_PI * (t % prev_half) / block
                    if angle != 0.0:
                        phases[t] = angle
        layers.append(Layer(step=j, couplers=couplers, phases=phases))
    return QfftCircuit(p=p, m=m, layers=tuple(layers), output_relabeling=bit_reversal(p))


def validate_circuit(circuit: QfftCircuit) -> None:
    """Check structural invariants; raise ValidationError on the first failure."""
    m = circuit.m
    if m != 1 << circuit.p:
        raise ValidationError(f"mode count {m} is not 2^p for p={circuit.p}")
    if len(circuit.layers) != circuit.p:
        raise ValidationError(f"expected {circuit.p} layers, got {len(circuit.layers)}")
    if sorted(circuit.output_relabeling) != list(range(m)):
        raise ValidationError("output relabeling is not a permutation of the modes")
    for layer in circuit.layers:
        seen: set[int] = set()
        for a, b in layer.couplers:
            if not (0 <= a < m and 0 <= b < m):
                raise ValidationError(f"layer {layer.step}: coupler ({a},{b}) out of range")
            if a in seen or b in seen or a == b:
                raise ValidationError(f"layer {layer.step}: mode reused in coupler ({a},{b})")
            seen.update((a, b))
        if len(seen) != m:
            raise ValidationError(f"layer {layer.step}: {m - len(seen)} modes left uncoupled")
        for t in layer.phases:
            if not 0 <= t < m:
                raise ValidationError(f"layer {layer.step}: phase on unknown mode {t}")


def circuit_to_unitary(circuit: QfftCircuit) -> np.ndarray:
    """Compose phase layers, coupler layers and the output relabeling."""
    validate_circuit(circuit)
    m = circuit.m
    u = np.eye(m, dtype=complex)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for layer in circuit.layers:
        for t, angle in layer.phases.items():
            u[t, :] = u[t, :] * np.exp(1j * angle)
        upper = np.array([a for a, _ in layer.couplers])
        lower = np.array([b for _, b in layer.couplers])
        ra = u[upper, :].copy()
        rb = u[lower, :]
        u[upper, :] = (ra + rb) * inv_sqrt2
        u[lower, :] = (ra - rb) * inv_sqrt2
    out = np.empty_like(u)
    out[list(circuit.output_relabeling), :] = u
    return out


def _with_phase_map(circuit: QfftCircuit, update) -> QfftCircuit:
    layers = []
    for layer in circuit.layers:
        layers.append(Layer(step=layer.step, couplers=layer.couplers, phases=update(layer)))
    return QfftCircuit(
        p=circuit.p, m=circuit.m, layers=tuple(layers), output_relabeling=circuit.output_relabeling
    )


def _check_positions(circuit: QfftCircuit, positions) -> None:
    steps = {layer.step for layer in circuit.layers}
    for step, mode in positions:
        if step not in steps:
            raise DomainError(f"no layer with step index {step}")
        if not 0 <= mode < circuit.m:
            raise DomainError(f"mode {mode} out of range for m={circuit.m}")


def perturb_circuit(circuit: QfftCircuit, phase_errors: dict[tuple[int, int], float]) -> QfftCircuit:
    """Add ``phase_errors[(step, mode)]`` radians to the nominal phases."""
    _check_positions(circuit, phase_errors)

    def update(layer: Layer) -> dict[int, float]:
        phases = dict(layer.phases)
        for (step, mode), delta in phase_errors.items():
            if step == layer.step:
                phases[mode] = (phases.get(mode, 0.0) + delta) % TWO_PI
        return phases

    return _with_phase_map(circuit, update)


def set_phases(circuit: QfftCircuit, assignments: dict[tuple[int, int], float]) -> QfftCircuit:
    """Replace the phases at ``(step, mode)`` positions with absolute values."""
    _check_positions(circuit, assignments)

    def update(layer: Layer) -> dict[int, float]:
        phases = dict(layer.phases)
        for (step, mode), value in assignments.items():
            if step == layer.step:
                phases[mode] = value % TWO_PI
        return phases

    return _with_phase_map(circuit, update)


def nontrivial_phase_positions(circuit: QfftCircuit) -> list[tuple[int, int]]:
    """(step, mode) positions carrying a nonzero phase, in layer-then-mode order.

    On the nominal 8-mode circuit these are the five fabrication-phase
    degrees of freedom used by the reconstruction fit.
    """
    positions = []
    for layer in circuit.layers:
        for mode in sorted(layer.phases):
            if layer.phases[mode] % TWO_PI != 0.0:
                positions.append((layer.step, mode))
    return positions


def circuit_fidelity_to_qft(circuit: QfftCircuit) -> float:
    """Fidelity of the composed circuit against the exact Fourier matrix."""
    from .linalg import fidelity

    return fidelity(circuit_to_unitary(circuit), qft_matrix(circuit.m))


def relabeling_swaps(circuit: QfftCircuit) -> list[tuple[int, int]]:
    """The relabeling as disjoint swaps in 1-based labels (it is an involution)."""
    perm = circuit.output_relabeling
    for k, v in enumerate(perm):
        if perm[v] != k:
            raise ValidationError("output relabeling is not an involution")
    return [(k + 1, v + 1) for k, v in enumerate(perm) if v > k]


def circuit_to_json(circuit: QfftCircuit) -> dict:
    """Serialise with 1-based mode labels and the relabeling as swap pairs."""
    return {
        "p": circuit.p,
        "m": circuit.m,
        "layers": [
            {
                "step": layer.step,
                "couplers": [[a + 1, b + 1] for a, b in layer.couplers],
                "phases": {str(t + 1): angle for t, angle in sorted(layer.phases.items())},
            }
            for layer in circuit.layers
        ],
        "relabeling": [list(pair) for pair in relabeling_swaps(circuit)],
    }


def circuit_from_json(obj) -> QfftCircuit:
    try:
        p = int(obj["p"])
        m = int(obj["m"])
        raw_layers = obj["layers"]
        raw_swaps = obj["relabeling"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"circuit object needs 'p', 'm', 'layers', 'relabeling': {exc}") from exc
    layers = []
    for raw in raw_layers:
        layers.append(
            Layer(
                step=int(raw["step"]),
                couplers=tuple((int(a) - 1, int(b) - 1) for a, b in raw["couplers"]),
                phases={int(t) - 1: float(v) for t, v in raw.get("phases", {}).items()},
            )
        )
    relabeling = list(range(m))
    for a, b in raw_swaps:
        relabeling[int(a) - 1], relabeling[int(b) - 1] = int(b) - 1, int(a) - 1
    circuit = QfftCircuit(p=p, m=m, layers=tuple(layers), output_relabeling=tuple(relabeling))
    validate_circuit(circuit)
    return circuit
