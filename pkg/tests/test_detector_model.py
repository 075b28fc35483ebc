import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binflux import (
    ConfigurationError,
    DetectorSpec,
    GlobalEfficiency,
    MechanisticUndershoot,
    click_probability,
    effective_efficiency,
    per_bin_dark_probabilities,
    shot_dark_probability,
)


def make_detector(**overrides):
    base = dict(
        efficiency=0.165,
        dark_prob_per_gate=(1e-5, 5e-5),
        gate_width=2e-10,
        deadtime=9.78e-9,
    )
    base.update(overrides)
    return DetectorSpec(**base)


def test_click_probability_zero_photons_is_dark_only():
    assert click_probability(0, 0.165, 1e-5) == pytest.approx(1e-5)
    assert click_probability(0, 0.165, 0.0) == 0.0


def test_click_probability_formula():
    # 1 - (1 - dark) * (1 - eta)**k, frozen from direct evaluation.
    assert click_probability(3, 0.165, 1e-5) == pytest.approx(0.4178229468287501, rel=1e-12)
    assert click_probability(1, 0.5, 0.0) == pytest.approx(0.5)
    assert click_probability(2, 0.5, 0.1) == pytest.approx(1 - 0.9 * 0.25)


def test_click_probability_saturates():
    assert click_probability(10_000, 0.165, 1e-5) == pytest.approx(1.0)


@given(
    k=st.integers(min_value=0, max_value=200),
    eta=st.floats(min_value=0.01, max_value=0.99),
    dark=st.floats(min_value=0.0, max_value=0.5),
)
@settings(max_examples=100, deadline=None)
def test_click_probability_monotone_and_bounded(k, eta, dark):
    p = click_probability(k, eta, dark)
    assert 0.0 <= p <= 1.0
    assert click_probability(k + 1, eta, dark) >= p
    assert p >= click_probability(k, eta, 0.0)


def test_click_probability_rejects_negative_photons():
    with pytest.raises(ValueError):
        click_probability(-1, 0.1, 0.0)


def test_effective_efficiency_without_undershoot():
    det = make_detector()
    assert effective_efficiency(det, 0.0) == 0.165
    assert effective_efficiency(det, 1000.0) == 0.165


def test_effective_efficiency_mechanistic_does_not_derate():
    det = make_detector(undershoot=MechanisticUndershoot(0.3))
    assert effective_efficiency(det, 400.0) == 0.165


def test_global_efficiency_interpolates_and_clamps():
    det = make_detector(undershoot=GlobalEfficiency(points=((10.0, 0.165), (400.0, 0.145))))
    assert effective_efficiency(det, 10.0) == pytest.approx(0.165)
    assert effective_efficiency(det, 400.0) == pytest.approx(0.145)
    assert effective_efficiency(det, 205.0) == pytest.approx(0.155)
    # Clamped outside the anchor range.
    assert effective_efficiency(det, 1.0) == pytest.approx(0.165)
    assert effective_efficiency(det, 4000.0) == pytest.approx(0.145)


def test_effective_efficiency_rejects_negative_mu():
    with pytest.raises(ValueError):
        effective_efficiency(make_detector(), -1.0)


def test_per_bin_dark_lookup(tiny_weights):
    det = make_detector(dark_prob_per_gate=(0.01, 0.02))
    darks = per_bin_dark_probabilities(tiny_weights, det)
    assert np.allclose(darks, np.where(tiny_weights.detector_of_bin == 0, 0.01, 0.02))


def test_shot_dark_probability_rapid32():
    det = make_detector()
    # 16 gates per detector at 1e-5 and 5e-5 per gate.
    got = shot_dark_probability(det, 16)
    assert got == pytest.approx(0.0009595601281325861, rel=1e-12)
    expected = 1 - (1 - 1e-5) ** 16 * (1 - 5e-5) ** 16
    assert got == pytest.approx(expected, rel=1e-15)


def test_shot_dark_probability_zero_bins():
    assert shot_dark_probability(make_detector(), 0) == 0.0


def test_history_dependence_flag():
    assert not make_detector().history_dependent
    assert not make_detector(undershoot=GlobalEfficiency(points=((1.0, 0.1),))).history_dependent
    assert not make_detector(undershoot=MechanisticUndershoot(0.0)).history_dependent
    assert make_detector(undershoot=MechanisticUndershoot(0.2)).history_dependent


@pytest.mark.parametrize(
    "overrides, field",
    [
        (dict(efficiency=0.0), "efficiency"),
        (dict(efficiency=1.2), "efficiency"),
        (dict(dark_prob_per_gate=(0.1,)), "dark_prob_per_gate"),
        (dict(dark_prob_per_gate=(0.1, 1.0)), "dark_prob_per_gate\\[1\\]"),
        (dict(gate_width=0.0), "gate_width"),
        (dict(deadtime=-1.0), "deadtime"),
        (dict(undershoot=MechanisticUndershoot(1.5)), "p_miss_next"),
        (dict(undershoot=GlobalEfficiency(points=())), "points"),
        (dict(undershoot=GlobalEfficiency(points=((5.0, 0.1), (2.0, 0.2)))), "increasing"),
        (dict(undershoot=GlobalEfficiency(points=((5.0, 0.0),))), "eta"),
    ],
)
def test_detector_validation(overrides, field):
    with pytest.raises(ConfigurationError, match=field):
        make_detector(**overrides).validate()
