"""One train, one click count: what was the pulse energy?

With a flat prior over integer mu, the posterior is just the normalized
matrix column for the observed count. Skewed posteriors get asymmetric
highest-posterior-density intervals; the interval width converts straight
into an energy resolution.
"""

from binflux import (
    build_matrix,
    credible_interval,
    get_preset,
    interval_to_energy,
    posterior_single,
    stability_max_n,
    total_variation,
)

system = get_preset("rapid32")
matrix = build_matrix(system, mu_max=400, method="exact")

print("== posteriors after a single rapid32 train (90% HPD)")
print("   n   mode   interval        width   energy")
for n in (0, 1, 2, 5, 8, 12, 16):
    post = posterior_single(matrix, n)
    iv = credible_interval(post, 0.90)
    energy = interval_to_energy(iv.width)
    interval = f"[{iv.lo}, {iv.hi}]"
    print(f"   {n:2d}  {post.mode:4d}   {interval:<14}  {iv.width:3d}   {energy * 1e18:6.2f} aJ")

# The headline single-click case.
post = posterior_single(matrix, 1)
iv = credible_interval(post, 0.90)
print(
    f"   one click -> mode {post.mode}, interval [{iv.lo}, {iv.hi}], "
    f"{interval_to_energy(iv.width)*1e18:.2f} aJ at 1550 nm"
)

# High counts saturate the detector: their posteriors lean on the grid
# bound and would change if the grid were extended. The stability cutoff
# finds the largest count whose posterior survives doubling mu_max.
cutoff = stability_max_n(system, 400, tolerance=0.01)
print(f"== stability cutoff at mu_max=400: counts above {cutoff} should be discarded")

wide = build_matrix(system, mu_max=800, method="exact")
for n in (cutoff, cutoff + 1, 20):
    narrow_probs = list(posterior_single(matrix, n).probs) + [0.0] * 400
    tv = total_variation(narrow_probs, posterior_single(wide, n).probs)
    verdict = "stable" if tv < 0.01 else "grid-dependent"
    print(f"   n={n:2d}: TV between mu_max=400 and 800 posteriors {tv:.4f} ({verdict})")
