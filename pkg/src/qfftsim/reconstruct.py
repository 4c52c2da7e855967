"""Recovery of the implemented unitary from measurement data.

Element moduli come from single-photon transmission probabilities; the
circuit's free phase shifters are then fitted to the measured two-photon
visibilities by chi-squared minimisation over the phase torus.

Identifiability caveats, both handled here:

* Singles and two-photon visibilities are invariant under per-mode phases on
  the inputs and outputs, and also under complex conjugation of the whole
  matrix (for the butterfly templates, conjugation is exactly the negation
  of all phase parameters). :func:`canonical_gauge` fixes both freedoms, and
  fidelities between reconstructed and target matrices are computed in that
  gauge.
* Not every input set determines the phases: visibilities from the cyclic
  inputs alone leave flat directions. :func:`phase_sensitivity` reports the
  conditioning of the visibility Jacobian so input sets can be screened
  before measuring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .circuit import QfftCircuit, _check_positions, circuit_from_json, circuit_to_json, circuit_to_unitary, set_phases
from .errors import ConvergenceError, DomainError, ValidationError
from .linalg import as_complex_matrix, fidelity
from .models import two_photon_probabilities

TWO_PI = 2.0 * math.pi

DEFAULT_RESTARTS = 32


@dataclass(frozen=True)
class ReconstructionProblem:
    """Template circuit, free phase positions, and the measured data.

    ``singles`` maps (input mode, output mode) to a transmission probability;
    ``visibilities`` maps (input pair, output pair) to a (value, sigma) pair.
    Mode indices are 0-based; pairs are ascending.
    """

    template: QfftCircuit
    free_phases: tuple[tuple[int, int], ...]
    singles: dict[tuple[int, int], float]
    visibilities: dict[tuple[tuple[int, int], tuple[int, int]], tuple[float, float]]

    def __post_init__(self):
        _check_positions(self.template, self.free_phases)
        m = self.template.m
        col_sums: dict[int, float] = {}
        for (i, o), p in self.singles.items():
            if not (0 <= i < m and 0 <= o < m):
                raise DomainError(f"singles entry ({i},{o}) out of range for m={m}")
            if not -1e-12 <= p <= 1.0 + 1e-9:
                raise DomainError(f"singles probability {p} for ({i},{o}) outside [0, 1]")
            col_sums[i] = col_sums.get(i, 0.0) + p
        for i, total in col_sums.items():
            if total > 1.0 + 1e-6:
                raise DomainError(f"singles for input {i} sum to {total} > 1")
        for (inp, out), (_, sigma) in self.visibilities.items():
            a, b = inp
            i, j = out
            if not (0 <= a < b < m and 0 <= i <= j < m):
                raise DomainError(f"visibility key ({inp},{out}) out of range or unordered")
            if sigma <= 0:
                raise DomainError(f"visibility for ({inp},{out}) needs sigma > 0, got {sigma}")


@dataclass(frozen=True)
class ReconstructionResult:
    fitted_phases: dict[tuple[int, int], float]
    reconstructed_unitary: np.ndarray
    chi2: float
    fidelity_vs_target: float | None


def _compile(problem: ReconstructionProblem):
    """Flatten the measured visibilities into gather arrays for fast residuals."""
    entries = sorted(problem.visibilities.items())
    a_idx = np.array([inp[0] for (inp, _), _ in entries], dtype=int)
    b_idx = np.array([inp[1] for (inp, _), _ in entries], dtype=int)
    i_idx = np.array([out[0] for (_, out), _ in entries], dtype=int)
    j_idx = np.array([out[1] for (_, out), _ in entries], dtype=int)
    norm = np.where(i_idx == j_idx, 2.0, 1.0)
    v_meas = np.array([v for _, (v, _) in entries])
    sigmas = np.array([s for _, (_, s) in entries])
    return a_idx, b_idx, i_idx, j_idx, norm, v_meas, sigmas


def _model_chi2(unitary: np.ndarray, compiled) -> float:
    a_idx, b_idx, i_idx, j_idx, norm, v_meas, sigmas = compiled
    if a_idx.size == 0:
        return 0.0
    ia = unitary[i_idx, a_idx]
    jb = unitary[j_idx, b_idx]
    ib = unitary[i_idx, b_idx]
    ja = unitary[j_idx, a_idx]
    pq = np.abs(ia * jb + ib * ja) ** 2 / norm
    pc = (np.abs(ia) ** 2 * np.abs(jb) ** 2 + np.abs(ib) ** 2 * np.abs(ja) ** 2) / norm
    if np.any(pc <= 0.0):
        bad = int(np.argmax(pc <= 0.0))
        raise DomainError(
            "model visibility undefined: zero classical rate for input "
            f"({a_idx[bad]},{b_idx[bad]}) output ({i_idx[bad]},{j_idx[bad]})"
        )
    v_model = 1.0 - pq / pc
    return float(np.sum(((v_model - v_meas) / sigmas) ** 2))


def _unitary_at(problem: ReconstructionProblem, phases) -> np.ndarray:
    assignment = dict(zip(problem.free_phases, (float(x) for x in phases)))
    return circuit_to_unitary(set_phases(problem.template, assignment))


def chi2_objective(problem: ReconstructionProblem, phases) -> float:
    """Chi-squared of the template at the given absolute phase values."""
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (len(problem.free_phases),):
        raise DomainError(
            f"expected {len(problem.free_phases)} phase parameters, got shape {phases.shape}"
        )
    return _model_chi2(_unitary_at(problem, phases), _compile(problem))


def fit_phases(
    problem: ReconstructionProblem,
    restarts: int = DEFAULT_RESTARTS,
    seed=None,
    target=None,
) -> ReconstructionResult:
    """Multi-start minimisation of the visibility chi-squared over the phases.

    Starts are drawn uniformly on [0, 2*pi)^k from ``seed``; each runs a
    derivative-free (Powell) local minimisation and the lowest chi-squared
    wins, ties broken by restart index, so the result is deterministic for a
    fixed seed and restart count. When ``target`` is given the fidelity of
    the reconstruction against it is computed in the canonical gauge.
    """
    k = len(problem.free_phases)
    compiled = _compile(problem)
    if len(problem.visibilities) < k:
        raise DomainError(
            f"underdetermined fit: {len(problem.visibilities)} visibilities for {k} phases"
        )

    if k == 0:
        unitary = circuit_to_unitary(problem.template)
        chi2 = _model_chi2(unitary, compiled)
        fid = gauge_fixed_fidelity(unitary, target) if target is not None else None
        return ReconstructionResult({}, unitary, chi2, fid)

    if restarts < 1:
        raise DomainError(f"need at least one restart, got {restarts}")

    def objective(x):
        return _model_chi2(_unitary_at(problem, x), compiled)

    rng = np.random.default_rng(seed)
    starts = rng.uniform(0.0, TWO_PI, size=(restarts, k))
    best = None
    failures = []
    options = {"xtol": 1e-11, "ftol": 1e-13, "maxiter": 5000}
    for idx in range(restarts):
        res = minimize(objective, starts[idx], method="Powell", options=options)
        if not res.success:
            failures.append(f"restart {idx}: {res.message}")
        if best is None or res.fun < best[0]:
            best = (float(res.fun), idx, np.asarray(res.x, dtype=float))
    if len(failures) == restarts:
        raise ConvergenceError(
            "no restart converged: " + "; ".join(failures[:3]) + ("..." if len(failures) > 3 else "")
        )
    polished = minimize(objective, best[2], method="Powell", options=options)
    x_best = polished.x if polished.fun <= best[0] else best[2]
    phases = np.mod(np.asarray(x_best, dtype=float), TWO_PI)
    unitary = _unitary_at(problem, phases)
    chi2 = _model_chi2(unitary, compiled)
    fid = gauge_fixed_fidelity(unitary, target) if target is not None else None
    fitted = dict(zip(problem.free_phases, (float(x) for x in phases)))
    return ReconstructionResult(fitted, unitary, chi2, fid)


def moduli_from_singles(singles) -> np.ndarray:
    """Moduli matrix sqrt(P(out|in)), each column renormalised to unit norm.

    Requires a complete m x m table; column renormalisation removes any
    uniform per-input loss.
    """
    if not singles:
        raise DomainError("empty singles table")
    m = max(max(i, o) for i, o in singles) + 1
    table = np.full((m, m), np.nan)
    for (i, o), p in singles.items():
        if p < 0:
            raise DomainError(f"negative singles probability {p} for ({i},{o})")
        table[o, i] = p
    if np.any(np.isnan(table)):
        missing = int(np.sum(np.isnan(table)))
        raise DomainError(f"singles table incomplete: {missing} of {m * m} entries missing")
    moduli = np.sqrt(table)
    norms = np.linalg.norm(moduli, axis=0)
    if np.any(norms == 0):
        raise DomainError("singles table has an all-zero input column")
    return moduli / norms


def singles_from_unitary(u) -> dict[tuple[int, int], float]:
    """Ideal singles table P(out|in) = |U[out, in]|^2."""
    u = as_complex_matrix(u)
    m = u.shape[0]
    return {(i, o): float(abs(u[o, i]) ** 2) for i in range(m) for o in range(m)}


def visibilities_from_unitary(u, input_pairs, sigma: float) -> dict:
    """Ideal visibility table for the collision-free output pairs of each input."""
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    u = as_complex_matrix(u)
    m = u.shape[0]
    table = {}
    for inp in input_pairs:
        a, b = int(inp[0]), int(inp[1])
        pq, pc = two_photon_probabilities(u, (a, b))
        for i in range(m):
            for j in range(i + 1, m):
                if pc[i, j] > 0:
                    table[((a, b), (i, j))] = (float(1.0 - pq[i, j] / pc[i, j]), sigma)
    return table


def canonical_gauge(u, tol: float = 1e-8) -> np.ndarray:
    """Fix the gauge freedoms left by singles and visibility data.

    Output and input mode phases are chosen so the first row and first
    column are real and non-negative; the conjugation branch is then fixed
    by requiring the first entry (row-major) with a significant imaginary
    part to have a positive one.
    """
    u = as_complex_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise ValidationError(f"gauge fixing needs a square matrix, got {u.shape}")
    w = u * np.exp(-1j * np.angle(u[0, :]))[None, :]
    w = w * np.exp(-1j * np.angle(w[:, 0]))[:, None]
    scale = float(np.max(np.abs(w))) or 1.0
    for z in w.ravel():
        if abs(z.imag) > tol * scale:
            if z.imag < 0:
                w = np.conj(w)
            break
    return w


def gauge_fixed_fidelity(u, v) -> float:
    """Fidelity after canonical gauge fixing of both arguments."""
    return fidelity(canonical_gauge(u), canonical_gauge(v))


def phase_sensitivity(
    template: QfftCircuit,
    free_phases,
    input_pairs,
    eps: float = 1e-6,
) -> tuple[np.ndarray, float]:
    """Conditioning of the visibility data with respect to the free phases.

    Builds the Jacobian of all collision-free visibilities for the given
    input pairs with respect to the free phases (central differences at the
    template's nominal values) and returns its singular values and condition
    number. An effectively infinite condition number means the input set
    cannot determine the phases.
    """
    free_phases = list(free_phases)
    _check_positions(template, free_phases)
    m = template.m

    def stacked(phases):
        assignment = dict(zip(free_phases, phases))
        u = circuit_to_unitary(set_phases(template, assignment))
        out = []
        for inp in input_pairs:
            pq, pc = two_photon_probabilities(u, tuple(inp))
            iu = np.triu_indices(m, k=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                v = 1.0 - pq[iu] / pc[iu]
            out.append(np.where(pc[iu] > 0, v, 0.0))
        return np.concatenate(out)

    base = np.array(
        [
            next(l.phases.get(mode, 0.0) for l in template.layers if l.step == step)
            for step, mode in free_phases
        ]
    )
    cols = []
    for idx in range(len(free_phases)):
        shift = np.zeros(len(free_phases))
        shift[idx] = eps
        cols.append((stacked(base + shift) - stacked(base - shift)) / (2 * eps))
    jac = np.column_stack(cols)
    svals = np.linalg.svd(jac, compute_uv=False)
    cond = float(svals[0] / svals[-1]) if svals[-1] > 0 else float("inf")
    return svals, cond


def problem_to_json(problem: ReconstructionProblem) -> dict:
    return {
        "template": circuit_to_json(problem.template),
        "free_phases": [[step, mode + 1] for step, mode in problem.free_phases],
        "singles": [
            {"input": i + 1, "output": o + 1, "p": p}
            for (i, o), p in sorted(problem.singles.items())
        ],
        "visibilities": [
            {"input": [a + 1, b + 1], "output": [i + 1, j + 1], "v": v, "sigma": s}
            for ((a, b), (i, j)), (v, s) in sorted(problem.visibilities.items())
        ],
    }


def problem_from_json(obj) -> ReconstructionProblem:
    try:
        template = circuit_from_json(obj["template"])
        free = tuple((int(step), int(mode) - 1) for step, mode in obj["free_phases"])
        singles = {
            (int(e["input"]) - 1, int(e["output"]) - 1): float(e["p"])
            for e in obj.get("singles", [])
        }
        visibilities = {
            (
                (int(e["input"][0]) - 1, int(e["input"][1]) - 1),
                (int(e["output"][0]) - 1, int(e["output"][1]) - 1),
            ): (float(e["v"]), float(e["sigma"]))
            for e in obj.get("visibilities", [])
        }
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"malformed reconstruction problem: {exc}") from exc
    return ReconstructionProblem(template, free, singles, visibilities)


def result_to_json(result: ReconstructionResult) -> dict:
    from .linalg import matrix_to_json

    return {
        "fitted_phases": [
            {"step": step, "mode": mode + 1, "value": value}
            for (step, mode), value in sorted(result.fitted_phases.items())
        ],
        "reconstructed_unitary": matrix_to_json(result.reconstructed_unitary),
        "chi2": result.chi2,
        "fidelity_vs_target": result.fidelity_vs_target,
    }
