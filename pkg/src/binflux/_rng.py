"""Counter-based random numbers with a fixed per-shot budget.

Reproducibility contract: a shot is addressed by (seed, shot_index) alone.
Each shot owns a fixed number of uniform "lanes" decided up front by the
source and system, and lane j of shot i is always drawn from the same Philox
counters, so batch size, chunking, and worker count cannot change a shot's
outcome.

Philox emits 4 64-bit words per counter and numpy turns one word into one
double, so a shot with L lanes reserves ceil(L / 4) counters. Shot i uses
counters [i * steps, (i + 1) * steps); unused tail lanes are reserved but
never read.
"""

from __future__ import annotations

import numpy as np

_OUTPUTS_PER_COUNTER = 4


def philox_key(seed: int, *stream: int) -> np.ndarray:
    """Derive a 128-bit Philox key from a user seed and optional stream ids.

    Distinct stream ids give statistically independent streams for the same
    seed (per-trial or per-row substreams).
    """
    return np.random.SeedSequence([int(seed), *map(int, stream)]).generate_state(2, np.uint64)


def derive_seed(seed: int, *stream: int) -> int:
    """Collapse (seed, stream ids) into a plain integer seed for a sub-run.

    Used where a component (a matrix row, a repeated trial) needs its own
    recordable seed that is still a pure function of the user seed.
    """
    return int(np.random.SeedSequence([int(seed), *map(int, stream)]).generate_state(1, np.uint64)[0])


def lanes_to_steps(lanes: int) -> int:
    return -(-lanes // _OUTPUTS_PER_COUNTER)


def uniform_lanes(key: np.ndarray, start_shot: int, n_shots: int, lanes: int) -> np.ndarray:
    """Uniform [0, 1) draws, shape (n_shots, lanes), for a contiguous shot range.

    Row i corresponds to shot start_shot + i and is independent of how the
    overall run is split into calls.
    """
    if lanes <= 0:
        raise ValueError(f"lanes must be positive, got {lanes}")
    if n_shots < 0 or start_shot < 0:
        raise ValueError("shot range must be nonnegative")
    steps = lanes_to_steps(lanes)
    bitgen = np.random.Philox(counter=start_shot * steps, key=key)
    block = np.random.Generator(bitgen).random(n_shots * steps * _OUTPUTS_PER_COUNTER)
    return block.reshape(n_shots, steps * _OUTPUTS_PER_COUNTER)[:, :lanes]
