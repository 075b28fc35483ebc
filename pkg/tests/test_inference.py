import numpy as np
import pytest

from binflux import (
    DegenerateEvidenceError,
    DetectorSpec,
    MultiplexerSpec,
    Posterior,
    ResponseMatrix,
    SystemConfig,
    UniformLoss,
    build_matrix,
    credible_interval,
    fingerprint,
    interval_to_energy,
    posterior_multi,
    posterior_single,
    relative_error_curve,
    stability_max_n,
    total_variation,
)
from binflux.response_matrix import RowProvenance


def _hand_matrix(rows):
    rows = np.asarray(rows, dtype=float)
    system = SystemConfig(
        name="hand",
        multiplexer=MultiplexerSpec(loop_delays=(1e-9,), transmission=UniformLoss(0.0)),
        detector=DetectorSpec(efficiency=0.5, dark_prob_per_gate=(0.0, 0.0), gate_width=1e-9, deadtime=0.0),
    )
    return ResponseMatrix(
        system=system,
        mu_max=rows.shape[0] - 1,
        rows=rows,
        provenance=tuple(RowProvenance(kind="exact") for _ in range(rows.shape[0])),
        method="exact",
        fingerprint=fingerprint(system),
    )


def test_posterior_single_normalizes_column():
    m = _hand_matrix([[0.5, 0.5, 0.0], [0.2, 0.8, 0.0], [0.1, 0.9, 0.0]])
    post = posterior_single(m, 1)
    assert np.allclose(post.probs, np.array([0.5, 0.8, 0.9]) / 2.2)
    assert post.probs.sum() == pytest.approx(1.0)


def test_posterior_identical_rows_is_uniform():
    m = _hand_matrix([[0.3, 0.7, 0.0], [0.3, 0.7, 0.0]])
    post = posterior_single(m, 1)
    assert np.allclose(post.probs, 0.5)


def test_posterior_single_mu_zero_point_mass():
    m = _hand_matrix([[1.0, 0.0, 0.0], [0.4, 0.6, 0.0]])
    post = posterior_single(m, 1)
    assert np.allclose(post.probs, [0.0, 1.0])


def test_posterior_zero_column_degenerate():
    m = _hand_matrix([[1.0, 0.0, 0.0], [0.4, 0.6, 0.0]])
    with pytest.raises(DegenerateEvidenceError):
        posterior_single(m, 2)


def test_posterior_count_out_of_range():
    m = _hand_matrix([[1.0, 0.0, 0.0], [0.4, 0.6, 0.0]])
    with pytest.raises(ValueError):
        posterior_single(m, 3)
    with pytest.raises(ValueError):
        posterior_single(m, -1)


def test_mode_ties_toward_smaller_mu():
    post = Posterior(probs=np.array([0.2, 0.4, 0.4]), log_evidence=0.0)
    assert post.mode == 1


def test_credible_interval_hand_posterior():
    post = Posterior(probs=np.array([0.05, 0.9, 0.05]), log_evidence=0.0)
    iv = credible_interval(post, 0.90)
    assert (iv.lo, iv.hi, iv.width) == (1, 1, 1)
    assert iv.mass == pytest.approx(0.9)
    # Needing more mass, the tie between the equal neighbors extends left.
    iv95 = credible_interval(post, 0.95)
    assert (iv95.lo, iv95.hi, iv95.width) == (0, 1, 2)
    assert iv95.mass == pytest.approx(0.95)


def test_credible_interval_level_validation():
    post = Posterior(probs=np.array([1.0]), log_evidence=0.0)
    with pytest.raises(ValueError):
        credible_interval(post, 0.0)
    with pytest.raises(ValueError):
        credible_interval(post, 1.0)


def test_credible_interval_whole_support():
    post = Posterior(probs=np.full(4, 0.25), log_evidence=0.0)
    iv = credible_interval(post, 0.99)
    assert (iv.lo, iv.hi) == (0, 3)
    assert iv.mass == pytest.approx(1.0)


def test_single_shot_anchors_rapid32(rapid32_matrix400):
    post = posterior_single(rapid32_matrix400, 1)
    iv = credible_interval(post, 0.90)
    assert post.mode == 8
    assert (iv.lo, iv.hi) == (1, 33)
    assert iv.width == 33
    assert iv.mass == pytest.approx(0.9035, abs=5e-4)


def test_multi_shot_anchor_rapid32(rapid32_matrix400):
    post = posterior_multi(rapid32_matrix400, [8])
    single = posterior_single(rapid32_matrix400, 8)
    assert np.allclose(post.probs, single.probs, atol=1e-12)


def test_posterior_multi_order_invariant(rapid32_matrix400):
    a = posterior_multi(rapid32_matrix400, [5, 3, 4, 5])
    b = posterior_multi(rapid32_matrix400, [5, 5, 4, 3])
    assert np.allclose(a.probs, b.probs, atol=1e-15)
    assert a.log_evidence == pytest.approx(b.log_evidence)


def test_posterior_multi_narrows_with_evidence(rapid32_matrix400):
    seq = [5, 3, 4, 5]
    widths = []
    modes = []
    for k in range(1, len(seq) + 1):
        post = posterior_multi(rapid32_matrix400, seq[:k])
        iv = credible_interval(post, 0.90)
        widths.append(iv.width)
        modes.append(post.mode)
    assert widths[-1] < widths[0]
    assert widths == sorted(widths, reverse=True)
    # All prefixes should point at the mid-tens range implied by 3-5 clicks.
    assert all(20 <= m <= 60 for m in modes)


def test_posterior_multi_validation(rapid32_matrix400):
    with pytest.raises(ValueError, match="at least one"):
        posterior_multi(rapid32_matrix400, [])
    with pytest.raises(ValueError, match=r"\[0, 32\]"):
        posterior_multi(rapid32_matrix400, [33])
    with pytest.raises(ValueError, match="stability cutoff"):
        posterior_multi(rapid32_matrix400, [5, 17], max_admissible_n=16)
    # At or below the cutoff the same sequence is accepted.
    post = posterior_multi(rapid32_matrix400, [5, 16], max_admissible_n=16)
    assert post.probs.sum() == pytest.approx(1.0)


def test_posterior_multi_degenerate():
    m = _hand_matrix([[1.0, 0.0, 0.0], [0.4, 0.6, 0.0]])
    with pytest.raises(DegenerateEvidenceError):
        posterior_multi(m, [1, 0, 1, 2])


def test_interval_to_energy_single_photon():
    # h * c / lambda at 1550 nm.
    assert interval_to_energy(1) == pytest.approx(1.2815773043631424e-19, rel=1e-12)
    assert interval_to_energy(33) == pytest.approx(4.229e-18, rel=1e-3)
    assert interval_to_energy(0) == 0.0
    with pytest.raises(ValueError):
        interval_to_energy(-1)
    with pytest.raises(ValueError):
        interval_to_energy(1, wavelength=0.0)


def test_stability_cutoff_rapid32(rapid32):
    assert stability_max_n(rapid32, 400, 0.01) == 16


def test_stability_tightening_tolerance_never_raises_cutoff(rapid32):
    cuts = [stability_max_n(rapid32, 400, tol) for tol in (0.001, 0.01, 0.1)]
    assert cuts == sorted(cuts)


def test_stability_saturates_below_bin_count():
    # A four-bin system against a huge grid: every partial count is stable.
    # The all-bins-click count never is: its likelihood grows monotonically
    # with mu, so that posterior always rides the top of the grid and moves
    # when the grid is doubled. The cutoff therefore tops out at B - 1.
    system = SystemConfig(
        name="tiny",
        multiplexer=MultiplexerSpec(loop_delays=(1e-9,), transmission=UniformLoss(0.0)),
        detector=DetectorSpec(efficiency=0.5, dark_prob_per_gate=(1e-4, 1e-4), gate_width=1e-9, deadtime=0.0),
    )
    assert stability_max_n(system, 200, 0.01) == 3


def test_stability_tolerance_validation(rapid32):
    with pytest.raises(ValueError):
        stability_max_n(rapid32, 400, 0.0)


def test_relative_error_curve_shrinks(rapid32, rapid32_matrix400):
    curve = relative_error_curve(
        rapid32, rapid32_matrix400, 100.0, max_shots=80, n_trials=8, seed=5, max_admissible_n=16
    )
    assert curve.rel_err.shape == (8, 80)
    med = curve.median()
    assert med[-1] < med[0]
    assert np.all(curve.rel_err > 0)
    assert curve.shots_to(0.5) < curve.shots_to(0.15)
    assert np.isinf(curve.shots_to(1e-9))


def test_relative_error_curve_deterministic(rapid32, rapid32_matrix400):
    a = relative_error_curve(rapid32, rapid32_matrix400, 50.0, 20, 3, seed=9, max_admissible_n=16)
    b = relative_error_curve(rapid32, rapid32_matrix400, 50.0, 20, 3, seed=9, max_admissible_n=16)
    assert np.array_equal(a.rel_err, b.rel_err)


def test_relative_error_curve_impossible_cutoff(rapid32, rapid32_matrix400):
    # A cutoff of zero clicks rejects essentially every bright shot.
    with pytest.raises(DegenerateEvidenceError, match="cutoff"):
        relative_error_curve(
            rapid32, rapid32_matrix400, 100.0, max_shots=10, n_trials=1, seed=1, max_admissible_n=0
        )


def test_relative_error_curve_validation(rapid32, rapid32_matrix400):
    with pytest.raises(ValueError):
        relative_error_curve(rapid32, rapid32_matrix400, 0.0, 10, 2, seed=1)
    with pytest.raises(ValueError):
        relative_error_curve(rapid32, rapid32_matrix400, 10.0, 0, 2, seed=1)


def test_bayes_consistency_identity(rapid32_matrix400):
    # Scaling the normalized posterior back by the column sum must recover
    # the matrix column exactly; only a normalization happened in between.
    for n in range(rapid32_matrix400.num_bins + 1):
        column = rapid32_matrix400.rows[:, n]
        post = posterior_single(rapid32_matrix400, n)
        recovered = post.probs * column.sum()
        assert np.allclose(recovered, column, rtol=0.0, atol=1e-12)


def test_point_mass_posterior_interval():
    probs = np.zeros(11)
    probs[7] = 1.0
    iv = credible_interval(Posterior(probs=probs, log_evidence=0.0), 0.90)
    assert (iv.lo, iv.hi, iv.width) == (7, 7, 1)
    assert iv.mass == pytest.approx(1.0)


def test_symmetric_posterior_symmetric_interval():
    probs = np.array([1.0, 2.0, 3.0, 2.0, 1.0]) / 9.0
    iv = credible_interval(Posterior(probs=probs, log_evidence=0.0), 0.75)
    assert (iv.lo, iv.hi) == (1, 3)
    assert iv.mass == pytest.approx(7.0 / 9.0)


def test_mu_max_invariance_below_cutoff(rapid32, rapid32_matrix400):
    # The defining property of the cutoff: doubling the grid leaves the
    # posterior for every admissible count essentially unchanged.
    wide = build_matrix(rapid32, 800, method="exact")
    cutoff = stability_max_n(rapid32, 400, 0.01)
    for n in range(cutoff + 1):
        narrow = np.zeros(801)
        narrow[:401] = posterior_single(rapid32_matrix400, n).probs
        tv = total_variation(narrow, posterior_single(wide, n).probs)
        assert tv < 0.01
    beyond = np.zeros(801)
    beyond[:401] = posterior_single(rapid32_matrix400, cutoff + 1).probs
    assert total_variation(beyond, posterior_single(wide, cutoff + 1).probs) >= 0.01


def test_multi_shot_contraction(rapid32, rapid32_matrix400):
    # More shots must tighten the interval: median width at 100 shots is
    # strictly below the width at 10 shots across the bright-to-dim range.
    for mu_true in (10.0, 50.0, 100.0):
        curve = relative_error_curve(
            rapid32, rapid32_matrix400, mu_true, 100, 50, seed=7, max_admissible_n=16
        )
        med = curve.median()
        assert med[99] < med[9]


def test_median_curve_nonincreasing(rapid32, rapid32_matrix400):
    curve = relative_error_curve(
        rapid32, rapid32_matrix400, 100.0, 150, 100, seed=42, max_admissible_n=16
    )
    med = curve.median()
    assert np.all(np.diff(med) <= 1e-12)
