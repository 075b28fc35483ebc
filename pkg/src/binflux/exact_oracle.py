"""Closed-form click-count distributions for independent-gate models.

With independent gates the click total is a Poisson-binomial variable: each
bin clicks with its own probability and the distribution of the sum follows
from one polynomial convolution per bin. History-dependent models (the
mechanistic undershoot) break independence and are rejected here; use the
Monte Carlo engine for those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detector_model import (
    DetectorSpec,
    click_probability,
    effective_efficiency,
    per_bin_dark_probabilities,
)
from .errors import ModelUnsupportedError
from .mc_engine import Coherent, Fock, Source
from .multiplexer import BinWeights

FOCK_EXACT_CAP = 12


@dataclass
class ClickDistribution:
    """Probability of observing k clicks, k = 0..num_bins."""

    probs: np.ndarray
    source: Source

    def __post_init__(self) -> None:
        self.probs.setflags(write=False)

    @property
    def num_bins(self) -> int:
        return self.probs.size - 1

    @property
    def mean(self) -> float:
        return float(self.probs @ np.arange(self.probs.size))

    @property
    def variance(self) -> float:
        k = np.arange(self.probs.size)
        return float(self.probs @ k**2) - self.mean**2


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def poisson_binomial_pmf(click_probs: np.ndarray) -> np.ndarray:
    """Distribution of the number of successes among independent gates."""
    dist = np.array([1.0])
    for p in np.asarray(click_probs, dtype=float):
        dist = np.convolve(dist, [1.0 - p, p])
    # Convolution roundoff can leave tiny negatives.
    np.clip(dist, 0.0, None, out=dist)
    return dist / dist.sum()


def per_bin_click_probabilities(mu: float, weights: BinWeights, detector: DetectorSpec) -> np.ndarray:
    """Click probability of each gate under a coherent pulse of mean mu.

    The photon number reaching bin b is Poisson with mean mu * q_b, so the
    no-click factor (1 - eta)**k averages to exp(-mu * q_b * eta).
    """
    eta = effective_efficiency(detector, mu)
    dark = per_bin_dark_probabilities(weights, detector)
    return 1.0 - (1.0 - dark) * np.exp(-mu * weights.weights * eta)


def coherent_click_distribution(mu: float, weights: BinWeights, detector: DetectorSpec) -> ClickDistribution:
    """Exact click-count law for a coherent pulse."""
    if detector.history_dependent:
        raise ModelUnsupportedError(
            "mechanistic undershoot couples neighboring gates; no closed form, use the Monte Carlo engine"
        )
    if not math.isfinite(mu) or mu < 0.0:
        raise ValueError(f"mu must be finite and >= 0, got {mu!r}")
    probs = poisson_binomial_pmf(per_bin_click_probabilities(mu, weights, detector))
    return ClickDistribution(probs=probs, source=Coherent(mu))


def fock_click_distribution(
    n_photons: int,
    weights: BinWeights,
    detector: DetectorSpec,
    cap: int = FOCK_EXACT_CAP,
) -> ClickDistribution:
    """Exact click-count law for an n-photon pulse.

    Photons split over bins multinomially (weights q_b, remainder lost in
    the fibers); the dynamic program tracks (photons still unassigned,
    clicks so far) while sweeping the bins, so the cost stays polynomial
    instead of the (B + 1)**n of direct enumeration.
    """
    if detector.history_dependent:
        raise ModelUnsupportedError(
            "mechanistic undershoot couples neighboring gates; no closed form, use the Monte Carlo engine"
        )
    if n_photons < 0:
        raise ValueError(f"n_photons must be >= 0, got {n_photons}")
    if n_photons > cap:
        raise ValueError(f"n_photons={n_photons} exceeds the exact-method cap of {cap}")
    detector.validate()

    q = weights.weights
    b = weights.num_bins
    eta = effective_efficiency(detector, float(n_photons))
    dark = per_bin_dark_probabilities(weights, detector)
    lost = max(0.0, 1.0 - float(q.sum()))
    # suffix[j] = probability mass not yet consumed before bin j.
    suffix = np.concatenate([np.cumsum(q[::-1])[::-1] + lost, [lost]])

    dp = np.zeros((n_photons + 1, b + 1))
    dp[n_photons, 0] = 1.0
    for j in range(b):
        share = q[j] / suffix[j] if suffix[j] > 0.0 else 0.0
        new = np.zeros_like(dp)
        for r in range(n_photons + 1):
            row = dp[r]
            if not row.any():
                continue
            for k in range(r + 1):
                w = math.comb(r, k) * share**k * (1.0 - share) ** (r - k)
                if w == 0.0:
                    continue
                pc = click_probability(k, eta, float(dark[j]))
                new[r - k, :] += row * (w * (1.0 - pc))
                new[r - k, 1:] += row[:-1] * (w * pc)
        dp = new

    probs = dp.sum(axis=0)
    np.clip(probs, 0.0, None, out=probs)
    return ClickDistribution(probs=probs / probs.sum(), source=Fock(n_photons))


def click_distribution(source: Source, weights: BinWeights, detector: DetectorSpec) -> ClickDistribution:
    if isinstance(source, Coherent):
        return coherent_click_distribution(source.mu, weights, detector)
    return fock_click_distribution(source.n_photons, weights, detector)
