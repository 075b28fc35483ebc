import dataclasses

import pytest

from binflux import (
    ConfigurationError,
    DetectorSpec,
    ExplicitTransmission,
    GlobalEfficiency,
    MechanisticUndershoot,
    MultiplexerSpec,
    SystemConfig,
    UniformLoss,
    canonical_json,
    fingerprint,
    get_preset,
    load_system,
    save_system,
    system_from_dict,
    system_to_dict,
)


def _explicit_system():
    return SystemConfig(
        name="explicit",
        multiplexer=MultiplexerSpec(
            loop_delays=(1e-8, 2e-8),
            coupler_ratios=(0.4, 0.6, 0.5),
            transmission=ExplicitTransmission(tuple(0.9 - 0.05 * b for b in range(8))),
            detector_assignment=(0, 1, 0, 1, 1, 0, 1, 0),
        ),
        detector=DetectorSpec(
            efficiency=0.3,
            dark_prob_per_gate=(1e-5, 2e-5),
            gate_width=1e-9,
            deadtime=5e-9,
            undershoot=MechanisticUndershoot(0.02),
            afterpulse_metadata=(("amplitude", 0.008), ("tau_us", 1.2)),
        ),
        guard=1e-9,
    )


@pytest.mark.parametrize("name", ["rapid32", "conventional16"])
def test_preset_round_trip(name):
    system = get_preset(name)
    assert system_from_dict(system_to_dict(system)) == system


def test_explicit_round_trip():
    system = _explicit_system()
    assert system_from_dict(system_to_dict(system)) == system


def test_global_efficiency_round_trip():
    system = get_preset("rapid32")
    assert isinstance(system.detector.undershoot, GlobalEfficiency)
    back = system_from_dict(system_to_dict(system))
    assert back.detector.undershoot == system.detector.undershoot


def test_fingerprint_is_stable():
    a = fingerprint(get_preset("rapid32"))
    b = fingerprint(get_preset("rapid32"))
    assert a == b
    assert len(a) == 64
    assert set(a) <= set("0123456789abcdef")


def test_fingerprint_sensitive_to_any_field():
    base = get_preset("rapid32")
    bumped = dataclasses.replace(
        base, detector=dataclasses.replace(base.detector, efficiency=0.166)
    )
    assert fingerprint(bumped) != fingerprint(base)
    renamed = dataclasses.replace(base, name="rapid32b")
    assert fingerprint(renamed) != fingerprint(base)


def test_canonical_json_is_compact_and_sorted():
    text = canonical_json(get_preset("conventional16"))
    assert ": " not in text and ", " not in text
    assert text.index('"detector"') < text.index('"multiplexer"') < text.index('"name"')


def test_save_load_file_round_trip(tmp_path):
    system = _explicit_system()
    path = tmp_path / "system.json"
    save_system(system, path)
    assert load_system(path) == system
    assert fingerprint(load_system(path)) == fingerprint(system)


def test_load_rejects_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigurationError, match="invalid JSON"):
        load_system(path)


def test_from_dict_rejects_non_object():
    with pytest.raises(ConfigurationError):
        system_from_dict(["not", "a", "dict"])


def test_from_dict_reports_missing_field():
    data = system_to_dict(get_preset("rapid32"))
    del data["detector"]
    with pytest.raises(ConfigurationError, match="detector"):
        system_from_dict(data)
    data = system_to_dict(get_preset("rapid32"))
    del data["multiplexer"]["loop_delays"]
    with pytest.raises(ConfigurationError, match="loop_delays"):
        system_from_dict(data)


def test_from_dict_rejects_unknown_kinds():
    data = system_to_dict(get_preset("rapid32"))
    data["multiplexer"]["transmission"]["kind"] = "mystery"
    with pytest.raises(ConfigurationError, match="unknown kind"):
        system_from_dict(data)
    data = system_to_dict(get_preset("rapid32"))
    data["detector"]["undershoot"] = {"kind": "mystery"}
    with pytest.raises(ConfigurationError, match="unknown kind"):
        system_from_dict(data)


def test_from_dict_validates_resulting_system():
    data = system_to_dict(get_preset("rapid32"))
    data["detector"]["efficiency"] = 1.5
    with pytest.raises(ConfigurationError, match="efficiency"):
        system_from_dict(data)


def test_guard_validation():
    base = get_preset("rapid32")
    bad = dataclasses.replace(base, guard=-1.0)
    with pytest.raises(ConfigurationError, match="guard"):
        bad.validate()


def test_num_bins_and_weights_shortcuts():
    system = get_preset("conventional16")
    assert system.num_bins == 16
    weights = system.bin_weights()
    assert weights.weights.shape == (16,)


def test_unknown_preset_lists_available():
    with pytest.raises(ConfigurationError, match="conventional16"):
        get_preset("nope")
