"""Fiber-loop time multiplexer: bin weights, arrival times, timing checks.

A pulse entering the multiplexer passes a chain of couplers. At stage i it
either goes straight through or takes a fiber loop that delays it by
``loop_delays[i]``; a final coupler splits the output between two detectors.
Each of the 2**(m+1) binary path choices lands in its own time bin, so an
m-loop device spreads the pulse over 2**m arrival times on each of the two
detectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class UniformLoss:
    """Identical insertion loss for every bin, given as an average in dB."""

    avg_loss_db: float = 0.0


@dataclass(frozen=True)
class ExplicitTransmission:
    """One transmission factor per bin, indexed by sorted bin order."""

    values: tuple[float, ...]


@dataclass(frozen=True)
class MultiplexerSpec:
    """Static description of the loop-and-coupler network.

    coupler_ratios[i] is the power fraction routed into the delay branch at
    stage i; the last entry is the fraction sent to detector 1 at the output
    coupler. All default to a balanced 50/50 split.

    detector_assignment is either "final_coupler" (the output coupler branch
    decides which detector sees the bin) or an explicit tuple with one
    detector index, 0 or 1, per sorted bin.
    """

    loop_delays: tuple[float, ...]
    coupler_ratios: tuple[float, ...] | None = None
    transmission: UniformLoss | ExplicitTransmission = field(default_factory=UniformLoss)
    detector_assignment: str | tuple[int, ...] = "final_coupler"

    @property
    def num_loops(self) -> int:
        return len(self.loop_delays)

    @property
    def num_bins(self) -> int:
        return 2 ** (self.num_loops + 1)

    def ratios(self) -> tuple[float, ...]:
        if self.coupler_ratios is None:
            return (0.5,) * (self.num_loops + 1)
        return self.coupler_ratios

    def validate(self) -> None:
        if len(self.loop_delays) == 0:
            raise ConfigurationError("loop_delays: need at least one loop")
        for i, d in enumerate(self.loop_delays):
            if not (d > 0.0) or not math.isfinite(d):
                raise ConfigurationError(f"loop_delays[{i}]: must be positive and finite, got {d!r}")
        ratios = self.ratios()
        if len(ratios) != self.num_loops + 1:
            raise ConfigurationError(
                f"coupler_ratios: expected {self.num_loops + 1} entries "
                f"(one per loop stage plus the output coupler), got {len(ratios)}"
            )
        for i, r in enumerate(ratios):
            if not (0.0 < r < 1.0):
                raise ConfigurationError(f"coupler_ratios[{i}]: must lie strictly in (0, 1), got {r!r}")
        t = self.transmission
        if isinstance(t, UniformLoss):
            if t.avg_loss_db < 0.0 or not math.isfinite(t.avg_loss_db):
                raise ConfigurationError(f"transmission.avg_loss_db: must be >= 0 and finite, got {t.avg_loss_db!r}")
        elif isinstance(t, ExplicitTransmission):
            if len(t.values) != self.num_bins:
                raise ConfigurationError(
                    f"transmission.values: expected {self.num_bins} entries, got {len(t.values)}"
                )
            for i, v in enumerate(t.values):
                if not (0.0 < v <= 1.0):
                    raise ConfigurationError(f"transmission.values[{i}]: must lie in (0, 1], got {v!r}")
        else:
            raise ConfigurationError(f"transmission: unsupported type {type(t).__name__}")
        da = self.detector_assignment
        if isinstance(da, str):
            if da != "final_coupler":
                raise ConfigurationError(f"detector_assignment: unknown mode {da!r}")
        else:
            if len(da) != self.num_bins:
                raise ConfigurationError(
                    f"detector_assignment: expected {self.num_bins} entries, got {len(da)}"
                )
            if any(v not in (0, 1) for v in da):
                raise ConfigurationError("detector_assignment: entries must be 0 or 1")
            half = self.num_bins // 2
            if sum(da) != half:
                raise ConfigurationError(
                    f"detector_assignment: each detector must watch exactly {half} bins"
                )


@dataclass
class BinWeights:
    """Per-bin routing weights, sorted by arrival time.

    weights[b] is the probability that a photon entering the multiplexer
    exits in bin b (coupler path probability times bin transmission), so the
    total can fall below 1 when the fibers are lossy. arrival_times is
    nondecreasing; detector_of_bin holds 0 or 1.
    """

    weights: np.ndarray
    arrival_times: np.ndarray
    detector_of_bin: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.weights, self.arrival_times, self.detector_of_bin):
            arr.setflags(write=False)

    @property
    def num_bins(self) -> int:
        return self.weights.size

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def bins_of_detector(self, detector: int) -> np.ndarray:
        return np.flatnonzero(self.detector_of_bin == detector)


@dataclass(frozen=True)
class TimingReport:
    """Result of checking bin spacing against detector deadtime."""

    min_spacing: float
    train_length: float
    max_rep_rate: float
    deadtime: float
    guard: float
    deadtime_ok: bool


def build_bin_weights(spec: MultiplexerSpec) -> BinWeights:
    """Enumerate all coupler paths and return the sorted bin table."""
    spec.validate()
    m = spec.num_loops
    n_bins = spec.num_bins
    ratios = spec.ratios()

    probs = np.empty(n_bins)
    times = np.empty(n_bins)
    branch = np.empty(n_bins, dtype=np.int64)
    for path in range(n_bins):
        p = 1.0
        t = 0.0
        for i in range(m):
            if (path >> i) & 1:
                p *= ratios[i]
                t += spec.loop_delays[i]
            else:
                p *= 1.0 - ratios[i]
        out = (path >> m) & 1
        p *= ratios[m] if out else 1.0 - ratios[m]
        probs[path] = p
        times[path] = t
        branch[path] = out

    order = np.lexsort((branch, times))
    probs = probs[order]
    times = times[order]
    branch = branch[order]

    t = spec.transmission
    if isinstance(t, UniformLoss):
        trans = np.full(n_bins, 10.0 ** (-t.avg_loss_db / 10.0))
    else:
        trans = np.asarray(t.values, dtype=float)

    if isinstance(spec.detector_assignment, str):
        detector = branch
    else:
        detector = np.asarray(spec.detector_assignment, dtype=np.int64)

    return BinWeights(weights=probs * trans, arrival_times=times, detector_of_bin=detector)


def validate_timing(weights: BinWeights, deadtime: float, guard: float | None = None) -> TimingReport:
    """Check that consecutive bins on each detector clear its deadtime.

    guard defaults to the deadtime itself: the next pulse may not arrive
    until the last bin's gate has closed and the detector has recovered.
    Equality of spacing and deadtime counts as satisfying the constraint
    (back-to-back gating is the designed operating point).
    """
    if deadtime < 0.0:
        raise ConfigurationError(f"deadtime: must be >= 0, got {deadtime!r}")
    if guard is None:
        guard = deadtime
    if guard < 0.0:
        raise ConfigurationError(f"guard: must be >= 0, got {guard!r}")

    min_spacing = math.inf
    for det in (0, 1):
        ts = np.sort(weights.arrival_times[weights.bins_of_detector(det)])
        if ts.size >= 2:
            gap = float(np.min(np.diff(ts)))
            min_spacing = min(min_spacing, gap)

    train_length = float(weights.arrival_times.max()) + guard
    max_rep_rate = math.inf if train_length == 0.0 else 1.0 / train_length
    # Relative slack absorbs float rounding in sums of repeated delays.
    ok = min_spacing >= deadtime * (1.0 - 1e-9)
    return TimingReport(
        min_spacing=min_spacing,
        train_length=train_length,
        max_rep_rate=max_rep_rate,
        deadtime=deadtime,
        guard=guard,
        deadtime_ok=ok,
    )
