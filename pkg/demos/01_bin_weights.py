"""Where the photons go: bin weights and train timing.

A pulse entering the multiplexer is split at each coupler; every path
through the loop network ends in one time bin on one detector. The weight
of a bin is the probability that a photon takes that path and survives the
fiber losses on the way.
"""

import numpy as np

from binflux import (
    ExplicitTransmission,
    MultiplexerSpec,
    UniformLoss,
    build_bin_weights,
    get_preset,
    validate_timing,
)

for name in ("conventional16", "rapid32"):
    system = get_preset(name)
    weights = system.bin_weights()
    w = weights.weights
    print(f"== {name}: {len(system.multiplexer.loop_delays)} loops -> {weights.num_bins} bins")
    print(f"   loop delays (s): {system.multiplexer.loop_delays}")
    print(f"   first bin weight {w[0]:.6f}, last {w[-1]:.6f}, sum {w.sum():.4f} (rest is fiber loss)")

    # the two output branches interleave in time; each APD sees every other bin
    for det in (0, 1):
        bins = weights.bins_of_detector(det)
        print(f"   detector {det}: {len(bins)} bins, first arrival {weights.arrival_times[bins[0]]:.3e} s")

    report = validate_timing(weights, system.detector.deadtime, system.guard)
    print(
        f"   train {report.train_length:.4g} s, max repetition rate {report.max_rep_rate:,.0f} Hz, "
        f"spacing clears deadtime: {report.deadtime_ok}"
    )

# A custom network: unbalanced couplers pile weight onto the early bins,
# explicit per-bin transmission models uneven splices.
print("== custom 8-bin network, 70/30 couplers")
spec = MultiplexerSpec(
    loop_delays=(10e-9, 20e-9),
    coupler_ratios=(0.7, 0.7, 0.5),
    transmission=ExplicitTransmission(tuple(0.95 - 0.02 * b for b in range(8))),
)
weights = build_bin_weights(spec)
for b in range(8):
    print(
        f"   bin {b}: t={weights.arrival_times[b]:.1e} s  det={weights.detector_of_bin[b]}  "
        f"weight {weights.weights[b]:.4f}"
    )

# weight conservation: with lossless fiber the weights sum to exactly 1
lossless = MultiplexerSpec(loop_delays=(10e-9, 20e-9), transmission=UniformLoss(0.0))
print(f"   lossless network weight sum: {build_bin_weights(lossless).weights.sum():.17f}")
print(f"   unbalanced lossy sum:        {np.sum(weights.weights):.6f}")
