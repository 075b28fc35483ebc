"""Gated avalanche photodiode model: efficiency, dark counts, undershoot.

The detector pair is gated once per bin. A gate either clicks or stays
silent; photon number within the gate is not resolved. Two undershoot
models describe the gain sag that follows an avalanche:

* GlobalEfficiency derates the quantum efficiency as a function of the mean
  photon number of the incident pulse, interpolating between measured
  anchor points. It keeps every click statistically independent, so exact
  distributions stay available.
* MechanisticUndershoot suppresses each gate immediately following a click
  on the same detector with a fixed probability. This makes bins interact
  and is only supported by the Monte Carlo engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .multiplexer import BinWeights


@dataclass(frozen=True)
class GlobalEfficiency:
    """Efficiency anchors (mu, eta) interpolated linearly, clamped at the ends."""

    points: tuple[tuple[float, float], ...]

    def validate(self) -> None:
        if len(self.points) == 0:
            raise ConfigurationError("undershoot.points: need at least one anchor")
        last_mu = -math.inf
        for i, (mu, eta) in enumerate(self.points):
            if not math.isfinite(mu) or mu < 0.0:
                raise ConfigurationError(f"undershoot.points[{i}]: mu must be finite and >= 0, got {mu!r}")
            if mu <= last_mu:
                raise ConfigurationError("undershoot.points: mu anchors must be strictly increasing")
            if not (0.0 < eta <= 1.0):
                raise ConfigurationError(f"undershoot.points[{i}]: eta must lie in (0, 1], got {eta!r}")
            last_mu = mu

    def efficiency_at(self, mu: float) -> float:
        mus = [p[0] for p in self.points]
        etas = [p[1] for p in self.points]
        return float(np.interp(mu, mus, etas))


@dataclass(frozen=True)
class MechanisticUndershoot:
    """Each gate right after a click on the same detector misses with this probability."""

    p_miss_next: float

    def validate(self) -> None:
        if not (0.0 <= self.p_miss_next <= 1.0):
            raise ConfigurationError(f"undershoot.p_miss_next: must lie in [0, 1], got {self.p_miss_next!r}")


@dataclass(frozen=True)
class DetectorSpec:
    """Parameters of the two gated detectors.

    efficiency is the nominal quantum efficiency; dark_prob_per_gate holds
    one dark-click probability per detector. afterpulse_metadata is carried
    along for reporting only and never enters any calculation.
    """

    efficiency: float
    dark_prob_per_gate: tuple[float, float]
    gate_width: float
    deadtime: float
    undershoot: GlobalEfficiency | MechanisticUndershoot | None = None
    afterpulse_metadata: tuple[tuple[str, float], ...] | None = None

    def validate(self) -> None:
        if not (0.0 < self.efficiency <= 1.0):
            raise ConfigurationError(f"efficiency: must lie in (0, 1], got {self.efficiency!r}")
        if len(self.dark_prob_per_gate) != 2:
            raise ConfigurationError("dark_prob_per_gate: expected one value per detector (two values)")
        for i, d in enumerate(self.dark_prob_per_gate):
            if not (0.0 <= d < 1.0):
                raise ConfigurationError(f"dark_prob_per_gate[{i}]: must lie in [0, 1), got {d!r}")
        if self.gate_width <= 0.0 or not math.isfinite(self.gate_width):
            raise ConfigurationError(f"gate_width: must be positive and finite, got {self.gate_width!r}")
        if self.deadtime < 0.0 or not math.isfinite(self.deadtime):
            raise ConfigurationError(f"deadtime: must be >= 0 and finite, got {self.deadtime!r}")
        if self.undershoot is not None:
            self.undershoot.validate()

    @property
    def history_dependent(self) -> bool:
        """True when clicks in one bin can suppress later bins."""
        return isinstance(self.undershoot, MechanisticUndershoot) and self.undershoot.p_miss_next > 0.0


def click_probability(photons_in_bin: int, efficiency: float, dark_prob: float) -> float:
    """Probability that a gate clicks given the photon number reaching it.

    Photon detections and dark events are independent, each photon is seen
    with probability ``efficiency``, and any single success fires the gate:
    1 - (1 - dark) * (1 - eta)**k.
    """
    if photons_in_bin < 0:
        raise ValueError(f"photons_in_bin must be >= 0, got {photons_in_bin}")
    return 1.0 - (1.0 - dark_prob) * (1.0 - efficiency) ** photons_in_bin


def effective_efficiency(spec: DetectorSpec, mean_photon_number: float) -> float:
    """Quantum efficiency after applying the global undershoot derating, if any."""
    if mean_photon_number < 0.0:
        raise ValueError(f"mean_photon_number must be >= 0, got {mean_photon_number!r}")
    if isinstance(spec.undershoot, GlobalEfficiency):
        return spec.undershoot.efficiency_at(mean_photon_number)
    return spec.efficiency


def per_bin_dark_probabilities(weights: BinWeights, spec: DetectorSpec) -> np.ndarray:
    """Dark-click probability of each bin, looked up by its detector."""
    darks = np.asarray(spec.dark_prob_per_gate, dtype=float)
    return darks[weights.detector_of_bin]


def shot_dark_probability(spec: DetectorSpec, bins_per_detector: int) -> float:
    """Probability that at least one of the gates of a full train darks out."""
    if bins_per_detector < 0:
        raise ValueError(f"bins_per_detector must be >= 0, got {bins_per_detector}")
    quiet = 1.0
    for d in spec.dark_prob_per_gate:
        quiet *= (1.0 - d) ** bins_per_detector
    return 1.0 - quiet
