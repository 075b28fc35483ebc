"""System configuration: multiplexer plus detectors, serialization, fingerprint.

A SystemConfig is the unit that simulations, response matrices, and the
command line all operate on. Its canonical JSON form (sorted keys, compact
separators, shortest round-trip float repr) feeds a SHA-256 fingerprint that
ties saved artifacts back to the exact configuration that produced them.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .detector_model import DetectorSpec, GlobalEfficiency, MechanisticUndershoot
from .errors import ConfigurationError
from .multiplexer import (
    BinWeights,
    ExplicitTransmission,
    MultiplexerSpec,
    UniformLoss,
    build_bin_weights,
)


@dataclass(frozen=True)
class SystemConfig:
    name: str
    multiplexer: MultiplexerSpec
    detector: DetectorSpec
    guard: float | None = None

    def validate(self) -> None:
        self.multiplexer.validate()
        self.detector.validate()
        if self.guard is not None and self.guard < 0.0:
            raise ConfigurationError(f"guard: must be >= 0, got {self.guard!r}")

    def bin_weights(self) -> BinWeights:
        return build_bin_weights(self.multiplexer)

    @property
    def num_bins(self) -> int:
        return self.multiplexer.num_bins


def system_to_dict(system: SystemConfig) -> dict[str, Any]:
    mux = system.multiplexer
    t = mux.transmission
    if isinstance(t, UniformLoss):
        trans: dict[str, Any] = {"kind": "uniform_loss", "avg_loss_db": t.avg_loss_db}
    else:
        trans = {"kind": "explicit", "values": list(t.values)}
    da = mux.detector_assignment
    det = system.detector
    u = det.undershoot
    if u is None:
        under: Any = None
    elif isinstance(u, GlobalEfficiency):
        under = {"kind": "global_efficiency", "points": [list(p) for p in u.points]}
    else:
        under = {"kind": "mechanistic", "p_miss_next": u.p_miss_next}
    return {
        "name": system.name,
        "multiplexer": {
            "loop_delays": list(mux.loop_delays),
            "coupler_ratios": None if mux.coupler_ratios is None else list(mux.coupler_ratios),
            "transmission": trans,
            "detector_assignment": da if isinstance(da, str) else list(da),
        },
        "detector": {
            "efficiency": det.efficiency,
            "dark_prob_per_gate": list(det.dark_prob_per_gate),
            "gate_width": det.gate_width,
            "deadtime": det.deadtime,
            "undershoot": under,
            "afterpulse_metadata": None
            if det.afterpulse_metadata is None
            else {k: v for k, v in det.afterpulse_metadata},
        },
        "guard": system.guard,
    }


def _require(d: dict[str, Any], key: str, where: str) -> Any:
    if key not in d:
        raise ConfigurationError(f"{where}.{key}: missing required field")
    return d[key]


def system_from_dict(data: dict[str, Any]) -> SystemConfig:
    if not isinstance(data, dict):
        raise ConfigurationError("config: expected a JSON object")
    mux_d = _require(data, "multiplexer", "config")
    det_d = _require(data, "detector", "config")

    trans_d = mux_d.get("transmission", {"kind": "uniform_loss", "avg_loss_db": 0.0})
    kind = trans_d.get("kind")
    if kind == "uniform_loss":
        trans: UniformLoss | ExplicitTransmission = UniformLoss(float(trans_d["avg_loss_db"]))
    elif kind == "explicit":
        trans = ExplicitTransmission(tuple(float(v) for v in trans_d["values"]))
    else:
        raise ConfigurationError(f"multiplexer.transmission.kind: unknown kind {kind!r}")

    da = mux_d.get("detector_assignment", "final_coupler")
    if not isinstance(da, str):
        da = tuple(int(v) for v in da)

    ratios = mux_d.get("coupler_ratios")
    mux = MultiplexerSpec(
        loop_delays=tuple(float(v) for v in _require(mux_d, "loop_delays", "multiplexer")),
        coupler_ratios=None if ratios is None else tuple(float(v) for v in ratios),
        transmission=trans,
        detector_assignment=da,
    )

    under_d = det_d.get("undershoot")
    if under_d is None:
        under: GlobalEfficiency | MechanisticUndershoot | None = None
    elif under_d.get("kind") == "global_efficiency":
        under = GlobalEfficiency(tuple((float(m), float(e)) for m, e in under_d["points"]))
    elif under_d.get("kind") == "mechanistic":
        under = MechanisticUndershoot(float(under_d["p_miss_next"]))
    else:
        raise ConfigurationError(f"detector.undershoot.kind: unknown kind {under_d.get('kind')!r}")

    ap = det_d.get("afterpulse_metadata")
    det = DetectorSpec(
        efficiency=float(_require(det_d, "efficiency", "detector")),
        dark_prob_per_gate=tuple(float(v) for v in _require(det_d, "dark_prob_per_gate", "detector")),
        gate_width=float(_require(det_d, "gate_width", "detector")),
        deadtime=float(_require(det_d, "deadtime", "detector")),
        undershoot=under,
        afterpulse_metadata=None if ap is None else tuple(sorted((str(k), float(v)) for k, v in ap.items())),
    )

    guard = data.get("guard")
    system = SystemConfig(
        name=str(data.get("name", "custom")),
        multiplexer=mux,
        detector=det,
        guard=None if guard is None else float(guard),
    )
    system.validate()
    return system


def canonical_json(system: SystemConfig) -> str:
    return json.dumps(system_to_dict(system), sort_keys=True, separators=(",", ":"))


def fingerprint(system: SystemConfig) -> str:
    """SHA-256 hex digest of the canonical configuration JSON."""
    return hashlib.sha256(canonical_json(system).encode("ascii")).hexdigest()


def save_system(system: SystemConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(system_to_dict(system), indent=2, sort_keys=True) + "\n")


def load_system(path: str | Path) -> SystemConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path}: invalid JSON ({exc})") from exc
    return system_from_dict(data)
