"""Bayesian pulse-energy estimation from click counts.

The response matrix plays the role of the likelihood: column n holds
P(n clicks | mu) on the integer mu grid. With a flat prior over that grid
the posterior after one shot is just the renormalized column; repeated
shots multiply columns (summed in log space).

Interval convention: credible intervals live on the integer mu grid and
their width counts the number of grid values covered, hi - lo + 1. A
single-value interval has width 1, and the photon-equivalent energy of an
interval is width times the single-photon energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._rng import derive_seed
from .config import SystemConfig
from .errors import DegenerateEvidenceError
from .mc_engine import Coherent, simulate_batch
from .response_matrix import ResponseMatrix, build_matrix

PLANCK_CONSTANT = 6.62607015e-34  # J s
SPEED_OF_LIGHT = 2.99792458e8  # m / s


@dataclass
class Posterior:
    """Posterior over integer mu under a flat prior.

    log_evidence is the log marginal likelihood of the data under that
    prior, useful for comparing candidate system models.
    """

    probs: np.ndarray
    log_evidence: float

    def __post_init__(self) -> None:
        self.probs.setflags(write=False)

    @property
    def mu_max(self) -> int:
        return self.probs.size - 1

    @property
    def mode(self) -> int:
        # argmax breaks ties toward the smaller mu.
        return int(np.argmax(self.probs))

    @property
    def mean(self) -> float:
        return float(self.probs @ np.arange(self.probs.size))


@dataclass(frozen=True)
class CredibleInterval:
    """Highest-density contiguous interval on the integer mu grid."""

    level: float
    lo: int
    hi: int
    mass: float
    mode: int

    @property
    def width(self) -> int:
        """Number of mu values covered (a point interval has width 1)."""
        return self.hi - self.lo + 1


def posterior_single(matrix: ResponseMatrix, n: int) -> Posterior:
    """Posterior after observing a single shot with n clicks."""
    if not (0 <= n <= matrix.num_bins):
        raise ValueError(f"n must lie in [0, {matrix.num_bins}], got {n}")
    col = matrix.rows[:, n]
    total = col.sum()
    if total == 0.0:
        raise DegenerateEvidenceError(f"{n} clicks has zero probability for every mu in the matrix")
    return Posterior(probs=col / total, log_evidence=math.log(total) - math.log(col.size))


def posterior_multi(
    matrix: ResponseMatrix,
    observations: Sequence[int],
    max_admissible_n: int | None = None,
) -> Posterior:
    """Posterior after a sequence of independent shots.

    Columns multiply, so the result does not depend on observation order.
    When max_admissible_n is given, any larger click count is rejected up
    front: such counts carry posterior mass beyond the mu grid and their
    columns are not trustworthy (see stability_max_n).
    """
    obs = np.asarray(list(observations), dtype=np.int64)
    if obs.size == 0:
        raise ValueError("observations must contain at least one click count")
    if obs.min() < 0 or obs.max() > matrix.num_bins:
        raise ValueError(f"click counts must lie in [0, {matrix.num_bins}]")
    if max_admissible_n is not None and obs.max() > max_admissible_n:
        raise ValueError(
            f"click count {int(obs.max())} exceeds the stability cutoff {max_admissible_n}: "
            f"the posterior for such counts leaks beyond mu_max={matrix.mu_max} and the "
            "grid answer would be an artifact of the truncation"
        )
    with np.errstate(divide="ignore"):
        logp = np.log(matrix.rows[:, obs]).sum(axis=1)
    top = logp.max()
    if not np.isfinite(top):
        raise DegenerateEvidenceError("the observed sequence has zero probability for every mu")
    post = np.exp(logp - top)
    total = post.sum()
    return Posterior(probs=post / total, log_evidence=float(top + math.log(total) - math.log(post.size)))


def credible_interval(posterior: Posterior, level: float = 0.90) -> CredibleInterval:
    """Smallest contiguous interval around the mode holding >= level mass.

    Grows greedily from the mode, at each step adding the more probable
    neighbor; ties extend toward smaller mu.
    """
    if not (0.0 < level < 1.0):
        raise ValueError(f"level must lie in (0, 1), got {level!r}")
    p = posterior.probs
    lo = hi = posterior.mode
    mass = float(p[lo])
    while mass < level and (lo > 0 or hi < p.size - 1):
        left = p[lo - 1] if lo > 0 else -1.0
        right = p[hi + 1] if hi < p.size - 1 else -1.0
        if left >= right:
            lo -= 1
        else:
            hi += 1
        mass = float(p[lo : hi + 1].sum())
    return CredibleInterval(level=level, lo=lo, hi=hi, mass=mass, mode=posterior.mode)


def interval_to_energy(width_photons: float, wavelength: float = 1.55e-6) -> float:
    """Photon-count uncertainty expressed as pulse energy in joules."""
    if width_photons < 0.0:
        raise ValueError(f"width_photons must be >= 0, got {width_photons!r}")
    if wavelength <= 0.0:
        raise ValueError(f"wavelength must be > 0, got {wavelength!r}")
    return width_photons * PLANCK_CONSTANT * SPEED_OF_LIGHT / wavelength


def stability_max_n(
    system: SystemConfig,
    mu_max: int,
    tolerance: float = 0.01,
    method: str = "auto",
    *,
    n_shots: int = 100_000,
    seed: int | None = None,
    workers: int | None = None,
) -> int:
    """Largest click count whose posterior is insensitive to the grid bound.

    For each n, compares the posterior built on [0, mu_max] with the one
    built on [0, 2 * mu_max] (the former padded with zeros) and requires
    their total-variation distance to stay below tolerance for every count
    up to n. Counts above the returned value should be discarded rather
    than inverted.
    """
    if tolerance <= 0.0:
        raise ValueError(f"tolerance must be > 0, got {tolerance!r}")
    if method == "auto":
        method = "mc" if system.detector.history_dependent else "exact"

    def mc_kwargs(idx: int) -> dict:
        if method != "mc":
            return {}
        return {"n_shots": n_shots, "seed": None if seed is None else derive_seed(seed, idx)}

    narrow = build_matrix(system, mu_max, method, workers=workers, **mc_kwargs(0))
    wide = build_matrix(system, 2 * mu_max, method, workers=workers, **mc_kwargs(1))

    n_bins = narrow.num_bins
    cutoff = n_bins
    for n in range(n_bins + 1):
        try:
            a = posterior_single(narrow, n).probs
            b = posterior_single(wide, n).probs
        except DegenerateEvidenceError:
            cutoff = n - 1
            break
        padded = np.zeros(b.size)
        padded[: a.size] = a
        if 0.5 * np.abs(padded - b).sum() >= tolerance:
            cutoff = n - 1
            break
    return cutoff


@dataclass
class RelativeErrorCurve:
    """Credible-interval width against accumulated shots, over repeated trials.

    rel_err[t, k - 1] is the 90% interval width divided by the true mu
    after k shots in trial t.
    """

    mu_true: float
    level: float
    rel_err: np.ndarray
    max_admissible_n: int | None

    @property
    def max_shots(self) -> int:
        return self.rel_err.shape[1]

    @property
    def shot_counts(self) -> np.ndarray:
        return np.arange(1, self.max_shots + 1)

    def median(self) -> np.ndarray:
        return np.median(self.rel_err, axis=0)

    def quantile(self, q: float) -> np.ndarray:
        return np.quantile(self.rel_err, q, axis=0)

    def shots_to(self, threshold: float) -> float:
        """Median over trials of the first shot count reaching the threshold."""
        reached = self.rel_err <= threshold
        first = np.where(reached.any(axis=1), reached.argmax(axis=1) + 1, np.inf)
        return float(np.median(first))


def relative_error_curve(
    system: SystemConfig,
    matrix: ResponseMatrix,
    mu_true: float,
    max_shots: int,
    n_trials: int,
    seed: int,
    *,
    level: float = 0.90,
    max_admissible_n: int | None = None,
    workers: int | None = None,
) -> RelativeErrorCurve:
    """Simulate repeated measurement runs and track interval convergence.

    Each trial draws shots at the true mean, discards counts above the
    stability cutoff (drawing replacements), and records the posterior
    interval width after every accumulated shot.
    """
    if mu_true <= 0.0:
        raise ValueError(f"mu_true must be > 0, got {mu_true!r}")
    if max_shots < 1 or n_trials < 1:
        raise ValueError("max_shots and n_trials must be >= 1")
    weights = system.bin_weights()
    cutoff = matrix.num_bins if max_admissible_n is None else max_admissible_n
    with np.errstate(divide="ignore"):
        log_rows = np.log(matrix.rows)

    rel_err = np.empty((n_trials, max_shots))
    for t in range(n_trials):
        trial_seed = derive_seed(seed, t)
        counts = np.empty(0, dtype=np.int64)
        start = 0
        empty_rounds = 0
        while counts.size < max_shots:
            want = max_shots - counts.size
            batch = simulate_batch(
                Coherent(mu_true),
                weights,
                system.detector,
                max(32, int(want * 1.25) + 8),
                trial_seed,
                start_shot=start,
                store_totals=True,
                workers=workers,
            )
            start += batch.n_shots
            fresh = batch.click_totals[batch.click_totals <= cutoff]
            # Guard against a cutoff that rejects essentially every shot.
            empty_rounds = empty_rounds + 1 if fresh.size == 0 else 0
            if empty_rounds >= 3:
                raise DegenerateEvidenceError(
                    f"stability cutoff {cutoff} rejects nearly every shot at mu={mu_true}; "
                    "the mu grid is too small for this source"
                )
            counts = np.concatenate([counts, fresh[:want]])
        cum = np.cumsum(log_rows[:, counts], axis=1)
        for k in range(max_shots):
            col = cum[:, k]
            top = col.max()
            if not np.isfinite(top):
                raise DegenerateEvidenceError("observed sequence impossible for every mu on the grid")
            e = np.exp(col - top)
            post = Posterior(probs=e / e.sum(), log_evidence=0.0)
            rel_err[t, k] = credible_interval(post, level).width / mu_true
    return RelativeErrorCurve(mu_true=mu_true, level=level, rel_err=rel_err, max_admissible_n=max_admissible_n)
