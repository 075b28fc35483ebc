"""Monte Carlo simulation of click patterns, deterministic per (seed, shot).

Every shot draws its randomness from fixed Philox counter lanes (see _rng),
so results are bit-identical across chunk sizes and worker counts. Lane
layout per shot:

* Coherent source, B bins: lanes [0, B) drive per-bin Poisson photon counts,
  [B, 2B) dark clicks, [2B, 3B) undershoot suppression.
* Fock source with n photons: lanes [0, n) route photons to bins, then
  [n, n + B) dark clicks and [n + B, n + 2B) undershoot suppression.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ._rng import philox_key, uniform_lanes
from .detector_model import (
    DetectorSpec,
    MechanisticUndershoot,
    effective_efficiency,
    per_bin_dark_probabilities,
)
from .multiplexer import BinWeights

FOCK_MC_CAP = 1_000_000

# Keep per-chunk uniform blocks near 128 MB even for very wide lane layouts.
_CHUNK_BUDGET_DOUBLES = 16_777_216


@dataclass(frozen=True)
class Coherent:
    """Coherent (laser) pulse with Poissonian photon number of mean mu."""

    mu: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.mu) or self.mu < 0.0:
            raise ValueError(f"Coherent.mu must be finite and >= 0, got {self.mu!r}")


@dataclass(frozen=True)
class Fock:
    """Pulse with exactly n_photons photons."""

    n_photons: int

    def __post_init__(self) -> None:
        if self.n_photons < 0:
            raise ValueError(f"Fock.n_photons must be >= 0, got {self.n_photons!r}")


Source = Coherent | Fock


def describe_source(source: Source) -> dict:
    if isinstance(source, Coherent):
        return {"kind": "coherent", "mu": source.mu}
    return {"kind": "fock", "n_photons": source.n_photons}


@dataclass(frozen=True)
class ClickRecord:
    """One shot: which bins clicked and the click total."""

    pattern: np.ndarray
    n: int
    shot_index: int


@dataclass
class BatchResult:
    """Aggregated clicks from a batch of shots.

    histogram[k] counts shots with exactly k clicks. photon_sum holds the
    total detected photons per bin (before dark counts and undershoot).
    click_totals and records are populated only on request.
    """

    histogram: np.ndarray
    n_shots: int
    bin_click_counts: np.ndarray
    photon_sum: np.ndarray
    click_totals: np.ndarray | None = None
    records: list[ClickRecord] | None = None

    @property
    def distribution(self) -> np.ndarray:
        return self.histogram / self.n_shots

    @property
    def mean_clicks(self) -> float:
        return float(self.histogram @ np.arange(self.histogram.size)) / self.n_shots


def _poisson_cdf_table(lam: np.ndarray) -> np.ndarray:
    """Rows of Poisson CDFs, one per bin, up to a common safe cutoff."""
    if lam.max() == 0.0:
        return np.ones((lam.size, 1))
    k_hi = int(stats.poisson.ppf(1.0 - 1e-15, lam.max())) + 8
    return stats.poisson.cdf(np.arange(k_hi + 1)[None, :], lam[:, None])


class _Kernel:
    """Precomputed tables plus the per-chunk simulation pass."""

    def __init__(self, source: Source, weights: BinWeights, detector: DetectorSpec):
        detector.validate()
        b = weights.num_bins
        self.n_bins = b
        self.dark = per_bin_dark_probabilities(weights, detector)
        self.source = source
        if isinstance(source, Coherent):
            eta = effective_efficiency(detector, source.mu)
            self.lanes = 3 * b
            self.dark_off = b
            self.cdf = _poisson_cdf_table(source.mu * weights.weights * eta)
        else:
            if source.n_photons > FOCK_MC_CAP:
                raise ValueError(
                    f"Fock.n_photons={source.n_photons} exceeds the Monte Carlo cap of {FOCK_MC_CAP}"
                )
            eta = effective_efficiency(detector, float(source.n_photons))
            self.lanes = source.n_photons + 2 * b
            self.dark_off = source.n_photons
            cells = np.append(weights.weights * eta, max(0.0, 1.0 - eta * weights.weights.sum()))
            self.route_cum = np.cumsum(cells)
            self.route_cum[-1] = max(self.route_cum[-1], 1.0)
        self.us_off = self.dark_off + b
        if detector.history_dependent:
            self.p_miss = detector.undershoot.p_miss_next
            self.det_bins = [np.flatnonzero(weights.detector_of_bin == d) for d in (0, 1)]
        else:
            self.p_miss = 0.0
            self.det_bins = []

    def _photon_counts(self, u: np.ndarray) -> np.ndarray:
        n = u.shape[0]
        b = self.n_bins
        counts = np.zeros((n, b), dtype=np.int64)
        if isinstance(self.source, Coherent):
            for j in range(b):
                counts[:, j] = np.searchsorted(self.cdf[j], u[:, j], side="right")
            return counts
        k = self.source.n_photons
        if k == 0:
            return counts
        if k <= 64 or k > n:
            rows = np.arange(n)
            for lane in range(k):
                idx = np.searchsorted(self.route_cum, u[:, lane], side="right")
                hit = idx < b
                np.add.at(counts, (rows[hit], idx[hit]), 1)
        else:
            for i in range(n):
                idx = np.searchsorted(self.route_cum, u[i, :k], side="right")
                counts[i] = np.bincount(idx[idx < b], minlength=b + 1)[:b]
        return counts

    def run(self, key: np.ndarray, start_shot: int, n_shots: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Simulate shots [start_shot, start_shot + n_shots): (clicks, totals, counts)."""
        u = uniform_lanes(key, start_shot, n_shots, self.lanes)
        counts = self._photon_counts(u[:, : self.dark_off])
        dark_hits = u[:, self.dark_off : self.dark_off + self.n_bins] < self.dark[None, :]
        clicks = (counts > 0) | dark_hits
        if self.p_miss > 0.0:
            u_us = u[:, self.us_off : self.us_off + self.n_bins]
            for bins in self.det_bins:
                prev = np.zeros(n_shots, dtype=bool)
                for j in bins:
                    cl = clicks[:, j] & ~(prev & (u_us[:, j] < self.p_miss))
                    clicks[:, j] = cl
                    prev = cl
        return clicks, clicks.sum(axis=1), counts


def _resolve_workers(workers: int | None) -> int:
    if workers is not None:
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        return workers
    env = os.environ.get("BINFLUX_THREADS", "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ValueError(f"BINFLUX_THREADS must be an integer, got {env!r}") from None
        return max(1, cap)
    return 1


def simulate_batch(
    source: Source,
    weights: BinWeights,
    detector: DetectorSpec,
    n_shots: int,
    seed: int,
    *,
    start_shot: int = 0,
    chunk_size: int = 65536,
    workers: int | None = None,
    store_totals: bool = False,
    store_records: bool = False,
) -> BatchResult:
    """Simulate n_shots pulses and aggregate their click statistics.

    Results depend only on (seed, shot indices): chunk_size and workers are
    performance knobs that never change the outcome.
    """
    if n_shots < 1:
        raise ValueError(f"n_shots must be >= 1, got {n_shots}")
    kernel = _Kernel(source, weights, detector)
    key = philox_key(seed)
    chunk = max(1, min(chunk_size, _CHUNK_BUDGET_DOUBLES // kernel.lanes))
    starts = list(range(start_shot, start_shot + n_shots, chunk))
    sizes = [min(chunk, start_shot + n_shots - s) for s in starts]

    def process(job: tuple[int, int]):
        s, m = job
        clicks, totals, counts = kernel.run(key, s, m)
        hist = np.bincount(totals, minlength=kernel.n_bins + 1)
        recs = None
        if store_records:
            recs = [ClickRecord(pattern=clicks[i].copy(), n=int(totals[i]), shot_index=s + i) for i in range(m)]
        return hist, clicks.sum(axis=0), counts.sum(axis=0), totals if store_totals else None, recs

    n_workers = _resolve_workers(workers)
    jobs = list(zip(starts, sizes))
    if n_workers == 1 or len(jobs) == 1:
        parts = [process(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(process, jobs))

    histogram = np.zeros(kernel.n_bins + 1, dtype=np.int64)
    bin_clicks = np.zeros(kernel.n_bins, dtype=np.int64)
    photon_sum = np.zeros(kernel.n_bins, dtype=np.int64)
    totals_parts: list[np.ndarray] = []
    records: list[ClickRecord] | None = [] if store_records else None
    for hist, bc, ps, totals, recs in parts:
        histogram += hist
        bin_clicks += bc
        photon_sum += ps
        if totals is not None:
            totals_parts.append(totals)
        if recs is not None:
            records.extend(recs)
    return BatchResult(
        histogram=histogram,
        n_shots=n_shots,
        bin_click_counts=bin_clicks,
        photon_sum=photon_sum,
        click_totals=np.concatenate(totals_parts) if totals_parts else None,
        records=records,
    )


def simulate_shot(
    source: Source,
    weights: BinWeights,
    detector: DetectorSpec,
    seed: int,
    shot_index: int = 0,
) -> ClickRecord:
    """Simulate the single shot addressed by (seed, shot_index)."""
    kernel = _Kernel(source, weights, detector)
    clicks, totals, _ = kernel.run(philox_key(seed), shot_index, 1)
    return ClickRecord(pattern=clicks[0], n=int(totals[0]), shot_index=shot_index)
