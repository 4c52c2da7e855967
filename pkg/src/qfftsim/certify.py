"""Suppression-law certification from coincidence-counting data.

Given coincidence counts versus relative delay, this module computes HOM
visibilities, the violation degree D (the classical-probability-weighted
count ratio summed over the forbidden output pairs), Poissonian Monte Carlo
error bars, and the hypothesis test against the distinguishable-particle
and mean-field reference values D = 0.5 and D = 0.25.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParseError, UndefinedVisibilityError
from .models import two_photon_probabilities

#: Reference violation degrees for two-photon inputs.
D_DISTINGUISHABLE = 0.5
D_MEAN_FIELD = 0.25

RULES_OUT_NEITHER = "rules_out_neither"
RULES_OUT_DISTINGUISHABLE = "rules_out_distinguishable"
RULES_OUT_BOTH = "rules_out_both"

DEFAULT_TRIALS = 3000


@dataclass(frozen=True)
class CoincidenceRecord:
    """One coincidence measurement: counts for an input/output mode pair at a delay."""

    input: tuple[int, int]
    output: tuple[int, int]
    delta_x: float
    counts: int
    integration_tag: str | None = None

    def __post_init__(self):
        if self.counts < 0:
            raise DomainError(f"counts must be non-negative, got {self.counts}")


@dataclass(frozen=True)
class ViolationReport:
    """Violation degree with uncertainty and the two hypothesis rejections."""

    d_obs: float
    sigma: float
    sigmas_vs_distinguishable: float
    sigmas_vs_mean_field: float
    verdict: str
    d_distinguishable: float = D_DISTINGUISHABLE
    d_mean_field: float = D_MEAN_FIELD

    def to_json(self, pc_source: str | None = None, **extra) -> dict:
        obj = {
            "d_obs": self.d_obs,
            "sigma": self.sigma,
            "d_distinguishable": self.d_distinguishable,
            "d_mean_field": self.d_mean_field,
            "sigmas_vs_distinguishable": self.sigmas_vs_distinguishable,
            "sigmas_vs_mean_field": self.sigmas_vs_mean_field,
            "verdict": self.verdict,
        }
        if pc_source is not None:
            obj["pc_source"] = pc_source
        obj.update(extra)
        return obj


def visibility(c: float, q: float) -> float:
    """HOM visibility (c - q) / c from distinguishable and indistinguishable counts."""
    if c <= 0:
        raise UndefinedVisibilityError(f"visibility undefined for reference counts c={c}")
    return (c - q) / c


def violation_degree(pc, v) -> float:
    """D = sum over forbidden pairs of pc * (1 - visibility)."""
    if set(pc) != set(v):
        missing = set(pc) ^ set(v)
        raise DomainError(f"probability and visibility maps disagree on pairs {sorted(missing)}")
    return float(sum(pc[key] * (1.0 - v[key]) for key in pc))


def classical_pair_probabilities(u, input_pair, pairs) -> dict[tuple[int, int], float]:
    """Distinguishable-particle probability of each requested output pair."""
    _, pc = two_photon_probabilities(u, input_pair)
    return {(i, j): float(pc[i, j]) for (i, j) in pairs}


def reference_counts(records, pairs=None) -> dict[tuple[int, int], float]:
    """Distinguishable-reference counts per output pair.

    Default plateau rule: the mean of the counts measured at the two delay
    values of largest magnitude (or the single extreme value if only one
    delay was measured).
    """
    records = list(records)
    if not records:
        raise DomainError("no records to take reference counts from")
    delays = sorted({r.delta_x for r in records}, key=abs, reverse=True)
    extremes = delays[:2] if len(delays) >= 2 else delays
    wanted = set(pairs) if pairs is not None else {r.output for r in records}
    ref: dict[tuple[int, int], float] = {}
    for pair in wanted:
        values = [r.counts for r in records if r.output == pair and r.delta_x in extremes]
        if not values:
            raise DomainError(f"no extreme-delay records for output pair {pair}")
        ref[pair] = float(np.mean(values))
    return ref


def _thread_count(threads) -> int:
    if threads is None:
        threads = os.environ.get("QFFT_THREADS", "1")
    n = int(threads)
    if n < 1:
        raise DomainError(f"thread count must be >= 1, got {threads}")
    return n


def _map_trials(func, seeds, threads):
    n = _thread_count(threads)
    if n == 1:
        return [func(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, seeds))


def monte_carlo_errors(counts, statistic, trials: int = DEFAULT_TRIALS, seed=None, threads=None) -> float:
    """Poissonian Monte Carlo standard deviation of ``statistic(counts)``.

    Each trial redraws every count from a Poisson law whose mean is the
    observed count and re-evaluates the statistic; the sample standard
    deviation over trials is returned. Trials use seeds derived from
    ``seed`` so the result is independent of the degree of parallelism.
    """
    if trials < 2:
        raise DomainError(f"need at least 2 trials, got {trials}")
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 0):
        raise DomainError("counts must be non-negative")
    child_seeds = np.random.SeedSequence(seed).spawn(trials)

    def one(ss):
        rng = np.random.default_rng(ss)
        return statistic(rng.poisson(counts))

    values = np.asarray(_map_trials(one, child_seeds, threads), dtype=float)
    return float(np.std(values, ddof=1))


def violation_curve(
    records,
    pc,
    n_d=None,
    *,
    trials: int = DEFAULT_TRIALS,
    seed=None,
    threads=None,
) -> list[tuple[float, float, float]]:
    """Observed violation degree versus delay, with Monte Carlo error bars.

    ``D(dx) = sum over forbidden pairs of pc * N(dx) / N_ref``. The
    reference counts default to the plateau rule of :func:`reference_counts`
    computed from ``records``; explicit ``n_d`` values are treated as
    measured counts and enter the Monte Carlo resampling like the rest.
    Returns ``(delta_x, d_obs, sigma)`` triples sorted by delay.
    """
    records = [r for r in records if r.output in pc]
    if not records:
        raise DomainError("no records for any forbidden output pair")
    pairs = sorted(pc)
    if n_d is None:
        n_d = reference_counts(records, pairs)
    missing = [pair for pair in pairs if pair not in n_d]
    if missing:
        raise DomainError(f"missing reference counts for pairs {missing}")
    bad = [pair for pair in pairs if n_d[pair] <= 0]
    if bad:
        raise DomainError(f"reference counts must be positive, zero for pairs {bad}")

    delays = sorted({r.delta_x for r in records})
    table = np.empty((len(delays), len(pairs)))
    table.fill(np.nan)
    for r in records:
        table[delays.index(r.delta_x), pairs.index(r.output)] = r.counts
    if np.any(np.isnan(table)):
        holes = [(delays[i], pairs[j]) for i, j in zip(*np.nonzero(np.isnan(table)))]
        raise DomainError(f"missing counts for (delay, pair) combinations {holes[:5]}")

    weights = np.array([pc[pair] for pair in pairs])
    refs = np.array([float(n_d[pair]) for pair in pairs])

    def curve_of(counts_table, ref_values):
        return counts_table @ (weights / ref_values)

    d_obs = curve_of(table, refs)
    if trials < 2:
        raise DomainError(f"need at least 2 trials, got {trials}")
    child_seeds = np.random.SeedSequence(seed).spawn(trials)

    def one(ss):
        rng = np.random.default_rng(ss)
        t = rng.poisson(table)
        ref = rng.poisson(refs).astype(float)
        ref[ref == 0.0] = np.nan  # degenerate trial entries drop out of the spread
        return curve_of(t, ref)

    sims = np.asarray(_map_trials(one, child_seeds, threads))
    sigma = np.array([np.nanstd(sims[:, i], ddof=1) for i in range(len(delays))])
    sigma = np.nan_to_num(sigma, nan=0.0)
    return [(float(dx), float(d), float(s)) for dx, d, s in zip(delays, d_obs, sigma)]


def certify(d_obs: float, sigma: float, threshold_sigmas: float = 3.0) -> ViolationReport:
    """Hypothesis test of the observed violation degree against both references.

    The distinguishable (mean-field) hypothesis is rejected when the observed
    value lies more than ``threshold_sigmas`` standard deviations *below* the
    reference 0.5 (0.25).
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    s_dist = (D_DISTINGUISHABLE - d_obs) / sigma
    s_mf = (D_MEAN_FIELD - d_obs) / sigma
    if s_dist >= threshold_sigmas and s_mf >= threshold_sigmas:
        verdict = RULES_OUT_BOTH
    elif s_dist >= threshold_sigmas:
        verdict = RULES_OUT_DISTINGUISHABLE
    else:
        verdict = RULES_OUT_NEITHER
    return ViolationReport(
        d_obs=float(d_obs),
        sigma=float(sigma),
        sigmas_vs_distinguishable=float(s_dist),
        sigmas_vs_mean_field=float(s_mf),
        verdict=verdict,
    )


CSV_COLUMNS = ("input_i", "input_j", "output_i", "output_j", "delta_x_um", "counts")


def write_coincidence_csv(records, stream) -> None:
    """Write records with 1-based mode labels and a header row."""
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for r in records:
        stream.write(
            f"{r.input[0] + 1},{r.input[1] + 1},{r.output[0] + 1},{r.output[1] + 1},"
            f"{float(r.delta_x)!r},{r.counts}\n"
        )


def read_coincidence_csv(stream, source: str = "<csv>") -> list[CoincidenceRecord]:
    """Parse a coincidence CSV (1-based mode labels) into records.

    Malformed rows raise :class:`ParseError` naming the line and field.
    """
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{source}: empty file, expected header {','.join(CSV_COLUMNS)}") from None
    if [h.strip() for h in header] != list(CSV_COLUMNS):
        raise ParseError(f"{source}:1: expected header {','.join(CSV_COLUMNS)}, got {','.join(header)}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise ParseError(f"{source}:{lineno}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        values = {}
        for name, cell in zip(CSV_COLUMNS, row):
            try:
                values[name] = float(cell) if name == "delta_x_um" else int(cell)
            except ValueError:
                raise ParseError(f"{source}:{lineno}: field {name!r} has invalid value {cell!r}") from None
        for name in ("input_i", "input_j", "output_i", "output_j"):
            if values[name] < 1:
                raise ParseError(f"{source}:{lineno}: field {name!r} must be a 1-based mode label")
        if values["counts"] < 0:
            raise ParseError(f"{source}:{lineno}: field 'counts' must be non-negative")
        # mode pairs are unordered; store them ascending
        records.append(
            CoincidenceRecord(
                input=tuple(sorted((values["input_i"] - 1, values["input_j"] - 1))),
                output=tuple(sorted((values["output_i"] - 1, values["output_j"] - 1))),
                delta_x=values["delta_x_um"],
                counts=values["counts"],
            )
        )
    return records
