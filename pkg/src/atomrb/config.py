"""Experiment configuration: a single JSON document with units in the keys."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from atomrb.readout import DestructiveParams, NdroParams
from atomrb.sites import ArrayConfig

DEFAULT_LENGTHS = (1, 2, 5, 10, 20, 50, 100, 200, 500, 700, 1000)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ArrayBlock:
    rows: int = 15
    cols: int = 15
    spacing_um: float = 8.0
    rabi_khz: float = 9.6
    rabi_spread: float = 0.03
    t2star_ms: float = 14.09
    t2star_std_ms: float = 0.8
    ac_stark_hz: float = 39.0
    ac_stark_std_hz: float = 0.0
    p_load: float = 0.55
    lifetime_s: float = 9.7
    sequence_survival: float = 0.93
    prep_fidelity: float = 0.971


@dataclass(frozen=True)
class PulseBlock:
    bb1: bool = True


@dataclass(frozen=True)
class RBBlock:
    n_strings: int = 8
    lengths: tuple[int, ...] = DEFAULT_LENGTHS
    shots_per_point: int = 150
    hold_ms: float = 375.0
    # strings are drawn from this seed, so experiments can share them
    string_seed: int = 2023


@dataclass(frozen=True)
class NdroBlock:
    linewidth_mhz: float = 5.2
    saturation: float = 1.0
    detuning_linewidths: float = -0.75
    efficiency: float = NdroParams.efficiency
    background_cps: float = NdroParams.background_rate
    duration_ms: float = 10.0
    trap_depth_mk: float = 13.3
    loss_rate_ref_per_s: float = NdroParams.loss_rate_ref
    ref_depth_mk: float = 13.3
    loss_depth_scale_mk: float = 5.0
    leak_probability: float = NdroParams.leak_probability
    transfer_efficiency: float = 0.99


@dataclass(frozen=True)
class ReadoutBlock:
    mode: str = "destructive"
    miss_f3: float = 0.010
    keep_f4: float = 0.005
    ndro: NdroBlock = NdroBlock()


@dataclass(frozen=True)
class FitBlock:
    survival_scale: float = 0.93


@dataclass(frozen=True)
class CharacterizationBlock:
    shots: int = 100_000
    durations_ms: tuple[float, ...] = (0.0, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 15.0, 20.0)
    depths_mk: tuple[float, ...] = (4.0, 6.0, 8.0, 10.0, 12.0, 13.3)


@dataclass(frozen=True)
class CalibrationBlock:
    rabi_times_us: tuple[float, ...] = tuple(float(x) for x in np.arange(0, 1001, 10))
    rabi_shots: int = 200
    ramsey_detuning_hz: float = 400.0
    ramsey_times_ms: tuple[float, ...] = tuple(float(x) for x in np.round(np.arange(0, 28.2, 0.25), 2))
    ramsey_shots: int = 400


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    name: str = "experiment"
    array: ArrayBlock = ArrayBlock()
    pulse: PulseBlock = PulseBlock()
    rb: RBBlock = RBBlock()
    readout: ReadoutBlock = ReadoutBlock()
    fit: FitBlock = FitBlock()
    characterization: CharacterizationBlock = CharacterizationBlock()
    calibration: CalibrationBlock = CalibrationBlock()
    output_dir: str = "out"

    def validate(self) -> "ExperimentConfig":
        a = self.array
        if a.rows < 1 or a.cols < 1:
            raise ConfigError("array needs at least one site")
        if not 0 <= a.p_load <= 1 or not 0 <= a.sequence_survival <= 1 or not 0 <= a.prep_fidelity <= 1:
            raise ConfigError("probabilities must lie in [0, 1]")
        if a.rabi_khz <= 0 or a.t2star_ms <= 0 or a.lifetime_s <= 0:
            raise ConfigError("rates and times must be positive")
        if self.rb.n_strings < 1 or self.rb.shots_per_point < 1:
            raise ConfigError("need at least one string and one shot")
        if len(set(self.rb.lengths)) < 3 or min(self.rb.lengths) < 0:
            raise ConfigError("need at least three distinct non-negative lengths")
        if self.readout.mode not in ("destructive", "ndro"):
            raise ConfigError(f"unknown readout mode {self.readout.mode!r}")
        if not 0 < self.fit.survival_scale <= 1:
            raise ConfigError("survival_scale must lie in (0, 1]")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        return self

    # -- conversions to model objects

    def array_config(self) -> ArrayConfig:
        a = self.array
        return ArrayConfig(
            rows=a.rows,
            cols=a.cols,
            spacing_um=a.spacing_um,
            rabi_mean=2 * np.pi * a.rabi_khz * 1e3,
            rabi_spread=a.rabi_spread,
            t2star_mean=a.t2star_ms * 1e-3,
            t2star_std=a.t2star_std_ms * 1e-3,
            detuning_offset=2 * np.pi * a.ac_stark_hz,
            detuning_offset_std=2 * np.pi * a.ac_stark_std_hz,
            p_load=a.p_load,
            lifetime=a.lifetime_s,
            survival=a.sequence_survival,
            prep_fidelity=a.prep_fidelity,
            seed=self.seed,
        )

    def ndro_params(self) -> NdroParams:
        b = self.readout.ndro
        return NdroParams(
            linewidth=2 * np.pi * b.linewidth_mhz * 1e6,
            saturation=b.saturation,
            detuning=b.detuning_linewidths,
            efficiency=b.efficiency,
            background_rate=b.background_cps,
            duration=b.duration_ms * 1e-3,
            trap_depth=b.trap_depth_mk,
            loss_rate_ref=b.loss_rate_ref_per_s,
            ref_depth=b.ref_depth_mk,
            loss_depth_scale=b.loss_depth_scale_mk,
            leak_probability=b.leak_probability,
            transfer_efficiency=b.transfer_efficiency,
        )

    def destructive_params(self) -> DestructiveParams:
        return DestructiveParams(self.readout.miss_f3, self.readout.keep_f4)

    # -- serialisation

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if "seed" not in data:
            raise ConfigError("config must set a seed")
        return _build(cls, data).validate()

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text())

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw).validate()


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def _build(cls, data: dict):
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"unknown keys for {cls.__name__}: {sorted(unknown)}")
    kwargs = {}
    defaults = cls.__dataclass_fields__
    for name, value in data.items():
        default = defaults[name].default
        if hasattr(default, "__dataclass_fields__"):
            if not isinstance(value, dict):
                raise ConfigError(f"block {name!r} must be an object")
            kwargs[name] = _build(type(default), value)
        elif isinstance(default, tuple):
            kwargs[name] = tuple(value)
        elif isinstance(default, bool):
            kwargs[name] = bool(value)
        elif isinstance(default, float):
            kwargs[name] = float(value)
        elif isinstance(default, int) and not isinstance(default, bool):
            kwargs[name] = int(value)
        else:
            kwargs[name] = copy.deepcopy(value)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def large_array_preset(seed: int = 1, rows: int = 15, cols: int = 15) -> ExperimentConfig:
    """Destructive-readout RB on the large array (14 ms T2*, 39 Hz light shift)."""
    return ExperimentConfig(seed=seed, name="rb-large-array", array=ArrayBlock(rows=rows, cols=cols))


def small_array_preset(seed: int = 1, mode: str = "ndro", rows: int = 7, cols: int = 7) -> ExperimentConfig:
    """RB on the 7x7 NDRO array: deeper traps, 12 ms T2*, 211 Hz light shift."""
    array = ArrayBlock(
        rows=rows,
        cols=cols,
        t2star_ms=12.0,
        t2star_std_ms=0.6,
        ac_stark_hz=211.0,
        sequence_survival=0.95,
    )
    scale = 1.0 if mode == "ndro" else 0.95
    return ExperimentConfig(
        seed=seed,
        name=f"rb-small-array-{mode}",
        array=array,
        readout=ReadoutBlock(mode=mode),
        fit=FitBlock(survival_scale=scale),
    )
