"""The competition: one attenuated binary detector.

The standard way to measure a bright pulse with a click detector is to
attenuate it to a convenient click probability and invert the click
fraction. This script reproduces that technique's error budget and puts it
next to the multiplexed measurement.
"""

import numpy as np

from binflux import (
    attenuation_for_target,
    baseline_error_curve,
    build_matrix,
    get_preset,
    optimal_detection_probability,
    relative_error_curve,
    relative_error_factor,
    shots_to_relative_error,
    simulate_baseline,
    stability_max_n,
)

# The per-shot error factor f(p) is flat around its minimum: anywhere near
# p=0.5 is a fine operating point.
print("== per-shot error factor f(p)")
for p in (0.1, 0.3, 0.45, 0.5, 0.7, 0.9):
    print(f"   f({p:.2f}) = {relative_error_factor(p):.4f}")
print(f"   grid optimum: p = {optimal_detection_probability():.2f}")

mu = 100.0
eta = 0.165
alpha = attenuation_for_target(mu, eta, p_target=0.5)
print(f"== attenuating mu={mu:.0f} to p=0.5 with eta={eta}: transmission alpha = {alpha:.4f}")

# Two interval conventions, a factor of four apart in shot count.
half = shots_to_relative_error(0.1, convention="half")
full = shots_to_relative_error(0.1, convention="full")
print(f"   shots to 10%: {half} (half width z*sigma) / {full} (full width 2*z*sigma)")

# The analytic curve matches a simulation of the actual protocol.
sim = simulate_baseline(mu, eta, max_shots=3000, n_trials=30, seed=5)
analytic = baseline_error_curve(mu, 3000)
k = 2999
print(f"   after {k + 1} gates: simulated median {np.nanmedian(sim[:, k]):.4f}, analytic {analytic[k]:.4f}")

# Head to head at the same full-width convention.
system = get_preset("rapid32")
matrix = build_matrix(system, mu_max=400, method="exact")
cutoff = stability_max_n(system, 400, tolerance=0.01)
curve = relative_error_curve(
    system, matrix, mu, max_shots=400, n_trials=100, seed=42, max_admissible_n=cutoff
)
mux = curve.shots_to(0.1)
print("== shots to 10% relative width at mu=100")
print(f"   multiplexed (median of 100 trials): {mux:.0f}")
print(f"   single pixel, full width:           {full}")
print(f"   single pixel, half width:           {half}")
print(f"   advantage: x{full / mux:.1f} (full) / x{half / mux:.1f} (half)")
