"""JSON configuration for experiment runs.

The on-disk format is versioned and strict: unknown keys are rejected
rather than ignored, so a typo in an option name fails loudly instead
of silently running with defaults.  Loading returns both the parsed
configuration and a digest of the raw file bytes so result files can
record exactly which configuration produced them.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .detection import CoincidenceWindow, DetectorModel
from .errors import ConfigurationError
from .experiment import ExperimentConfig, ImperfectionBudget, SourceModel
from .protocol import PurificationSetup

SCHEMA_VERSION = 1


def _check_keys(data: dict, required: set, optional: set, where: str) -> None:
    keys = set(data)
    unknown = keys - required - optional
    if unknown:
        raise ConfigurationError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - keys
    if missing:
        raise ConfigurationError(f"{where}: missing keys {sorted(missing)}")


def _phases_from_spec(spec, where: str) -> np.ndarray:
    if isinstance(spec, list):
        if len(spec) < 2:
            raise ConfigurationError(f"{where}: need at least 2 phase points")
        return np.asarray(spec, dtype=float)
    if isinstance(spec, dict):
        _check_keys(spec, {"start", "stop", "count"}, set(), where)
        count = spec["count"]
        if not isinstance(count, int) or count < 2:
            raise ConfigurationError(f"{where}: count must be an integer >= 2")
        return np.linspace(float(spec["start"]), float(spec["stop"]), count)
    raise ConfigurationError(f"{where}: expected a list or a start/stop/count mapping")


def _detector_from_dict(data, where: str) -> DetectorModel | None:
    if data is None:
        return None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{where}: expected a mapping or null")
    _check_keys(
        data,
        {"efficiency", "dark_prob_per_window", "number_resolving"},
        {"dead_time_s", "gate_rate_hz"},
        where,
    )
    return DetectorModel(
        efficiency=float(data["efficiency"]),
        dark_prob_per_window=float(data["dark_prob_per_window"]),
        number_resolving=bool(data["number_resolving"]),
        dead_time_s=float(data.get("dead_time_s", 0.0)),
        gate_rate_hz=float(data.get("gate_rate_hz", 0.0)),
    )


def _detector_to_dict(detector: DetectorModel | None):
    if detector is None:
        return None
    out = {
        "efficiency": detector.efficiency,
        "dark_prob_per_window": detector.dark_prob_per_window,
        "number_resolving": detector.number_resolving,
    }
    if detector.dead_time_s:
        out["dead_time_s"] = detector.dead_time_s
    if detector.gate_rate_hz:
        out["gate_rate_hz"] = detector.gate_rate_hz
    return out


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed JSON document."""
    if not isinstance(data, dict):
        raise ConfigurationError("configuration root must be a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigurationError(
            f"schema_version must be {SCHEMA_VERSION}, got {version!r}"
        )
    _check_keys(
        data,
        {"schema_version"},
        {
            "seed",
            "shots_per_point",
            "dwell_s",
            "scan_phases",
            "noise_sigma_1",
            "noise_sigma_2",
            "noise_switch_index",
            "subtract_accidentals",
            "source",
            "budget",
            "setup",
            "detectors",
            "window",
            "hom_overlaps",
        },
        "configuration",
    )

    kwargs = {}
    if "seed" in data:
        kwargs["seed"] = int(data["seed"])
    if "shots_per_point" in data:
        value = data["shots_per_point"]
        kwargs["shots_per_point"] = None if value is None else int(value)
    if "dwell_s" in data:
        value = data["dwell_s"]
        kwargs["dwell_s"] = None if value is None else float(value)
    if "scan_phases" in data:
        kwargs["scan_phases"] = _phases_from_spec(data["scan_phases"], "scan_phases")
    for key in ("noise_sigma_1", "noise_sigma_2"):
        if key in data:
            kwargs[key] = float(data[key])
    if "noise_switch_index" in data:
        kwargs["noise_switch_index"] = int(data["noise_switch_index"])
    if "subtract_accidentals" in data:
        kwargs["subtract_accidentals"] = bool(data["subtract_accidentals"])

    if "source" in data:
        src = data["source"]
        _check_keys(
            src, set(), {"emission_prob", "internal_overlap", "pair_rate_hz"}, "source"
        )
        kwargs["source"] = SourceModel(
            emission_prob=float(src.get("emission_prob", 1e-3)),
            internal_overlap=float(src.get("internal_overlap", 0.995)),
            pair_rate_hz=float(src.get("pair_rate_hz", 1.3e6)),
        )

    if "budget" in data:
        bud = data["budget"]
        if bud is None:
            kwargs["budget"] = None
        else:
            _check_keys(
                bud,
                set(),
                {
                    "mode_overlap",
                    "double_pair",
                    "herald_dark",
                    "phase_drift",
                    "coupler_ratio_systematic",
                },
                "budget",
            )
            defaults = ImperfectionBudget()
            kwargs["budget"] = ImperfectionBudget(
                **{name: float(bud.get(name, getattr(defaults, name)))
                   for name in (
                       "mode_overlap",
                       "double_pair",
                       "herald_dark",
                       "phase_drift",
                       "coupler_ratio_systematic",
                   )}
            )

    if "setup" in data:
        stp = data["setup"]
        _check_keys(stp, set(), {"t_alice", "t_bob", "herald_mode"}, "setup")
        defaults = PurificationSetup()
        kwargs["setup"] = PurificationSetup(
            t_alice=float(stp.get("t_alice", defaults.t_alice)),
            t_bob=float(stp.get("t_bob", defaults.t_bob)),
            herald_mode=str(stp.get("herald_mode", defaults.herald_mode)),
        )

    if "detectors" in data:
        dets = data["detectors"]
        _check_keys(dets, set(), {"herald", "scan"}, "detectors")
        if "herald" in dets:
            kwargs["herald_detector"] = _detector_from_dict(dets["herald"], "detectors.herald")
        if "scan" in dets:
            scan_det = _detector_from_dict(dets["scan"], "detectors.scan")
            if scan_det is None:
                raise ConfigurationError("detectors.scan cannot be null")
            kwargs["scan_detector"] = scan_det

    if "window" in data:
        win = data["window"]
        _check_keys(win, {"tau_s"}, set(), "window")
        kwargs["window"] = CoincidenceWindow(tau_s=float(win["tau_s"]))

    if "hom_overlaps" in data and data["hom_overlaps"] is not None:
        kwargs["hom_overlaps"] = np.asarray(data["hom_overlaps"], dtype=float)

    return ExperimentConfig(**kwargs)


def config_to_dict(config: ExperimentConfig) -> dict:
    """Serialize a configuration to a JSON-compatible dict."""
    phases = config.scan_phases
    steps = np.diff(phases)
    if steps.size and np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        phase_spec = {
            "start": float(phases[0]),
            "stop": float(phases[-1]),
            "count": int(phases.size),
        }
    else:
        phase_spec = [float(p) for p in phases]

    budget = config.budget
    return {
        "schema_version": SCHEMA_VERSION,
        "seed": config.seed,
        "shots_per_point": config.shots_per_point,
        "dwell_s": config.dwell_s,
        "scan_phases": phase_spec,
        "noise_sigma_1": config.noise_sigma_1,
        "noise_sigma_2": config.noise_sigma_2,
        "noise_switch_index": config.noise_switch_index,
        "subtract_accidentals": config.subtract_accidentals,
        "source": {
            "emission_prob": config.source.emission_prob,
            "internal_overlap": config.source.internal_overlap,
            "pair_rate_hz": config.source.pair_rate_hz,
        },
        "budget": None
        if budget is None
        else {
            "mode_overlap": budget.mode_overlap,
            "double_pair": budget.double_pair,
            "herald_dark": budget.herald_dark,
            "phase_drift": budget.phase_drift,
            "coupler_ratio_systematic": budget.coupler_ratio_systematic,
        },
        "setup": {
            "t_alice": config.setup.t_alice,
            "t_bob": config.setup.t_bob,
            "herald_mode": config.setup.herald_mode,
        },
        "detectors": {
            "herald": _detector_to_dict(config.herald_detector),
            "scan": _detector_to_dict(config.scan_detector),
        },
        "window": {"tau_s": config.window.tau_s},
        "hom_overlaps": None
        if config.hom_overlaps is None
        else [float(v) for v in config.hom_overlaps],
    }


def config_digest(text: str | bytes) -> str:
    """sha256 hex digest of the raw configuration bytes."""
    if isinstance(text, str):
        text = text.encode("utf-8")
    return hashlib.sha256(text).hexdigest()


def load_config(path) -> tuple[ExperimentConfig, str]:
    """Read a configuration file; returns (config, digest of file bytes)."""
    path = Path(path)
    raw = path.read_bytes()
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"{path}: not valid JSON: {exc}") from exc
    return config_from_dict(data), config_digest(raw)


def save_config(config: ExperimentConfig, path) -> str:
    """Write a configuration file; returns the digest of the written bytes."""
    path = Path(path)
    text = json.dumps(config_to_dict(config), indent=2) + "\n"
    path.write_text(text, encoding="utf-8")
    return config_digest(text)


def sample_config() -> dict:
    """Default configuration document, suitable as a starting template."""
    return config_to_dict(ExperimentConfig())
