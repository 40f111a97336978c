import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atomrb.config import (
    DEFAULT_LENGTHS,
    ConfigError,
    ExperimentConfig,
    large_array_preset,
    small_array_preset,
)
from atomrb.readout import NdroParams


def test_defaults_round_trip():
    cfg = ExperimentConfig(seed=3)
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg


@pytest.mark.parametrize("cfg", [large_array_preset(7), small_array_preset(8, "ndro"), small_array_preset(9, "destructive")])
def test_preset_round_trip(cfg):
    back = ExperimentConfig.from_json(cfg.to_json())
    assert back == cfg
    assert back.digest() == cfg.digest()


@given(
    seed=st.integers(0, 2**64 - 1),
    rows=st.integers(1, 20),
    rabi=st.floats(1.0, 50.0),
    lengths=st.lists(st.integers(0, 2000), min_size=3, max_size=12, unique=True),
    mode=st.sampled_from(["destructive", "ndro"]),
)
@settings(max_examples=60)
def test_parse_serialise_parse_is_identity(seed, rows, rabi, lengths, mode):
    data = {
        "seed": seed,
        "array": {"rows": rows, "rabi_khz": rabi},
        "rb": {"lengths": lengths},
        "readout": {"mode": mode},
    }
    cfg = ExperimentConfig.from_dict(data)
    again = ExperimentConfig.from_json(cfg.to_json())
    assert again == cfg
    assert again.to_json() == cfg.to_json()


def test_seed_is_mandatory():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"array": {"rows": 2}})


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"seed": 1, "arrray": {}})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"seed": 1, "array": {"rabi_hz": 9600}})


@pytest.mark.parametrize(
    "patch",
    [
        {"array": {"rows": 0}},
        {"array": {"p_load": 1.5}},
        {"rb": {"lengths": [1, 1, 2]}},
        {"readout": {"mode": "magic"}},
        {"fit": {"survival_scale": 0.0}},
        {"rb": {"shots_per_point": 0}},
        {"array": "not a block"},
    ],
)
def test_validation_errors(patch):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"seed": 1, **patch})


def test_bad_seed_and_bad_json():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"seed": -1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json("{not json")


def test_units_are_converted():
    cfg = ExperimentConfig(seed=1)
    a = cfg.array_config()
    assert a.rabi_mean == pytest.approx(2 * np.pi * 9.6e3)
    assert a.t2star_mean == pytest.approx(14.09e-3)
    assert a.detuning_offset == pytest.approx(2 * np.pi * 39.0)
    assert cfg.ndro_params() == NdroParams()
    assert cfg.rb.lengths == DEFAULT_LENGTHS
    assert cfg.rb.n_strings == 8 and cfg.rb.shots_per_point == 150 and cfg.rb.hold_ms == 375.0


def test_small_array_preset():
    ndro = small_array_preset(1, "ndro")
    dest = small_array_preset(1, "destructive")
    assert ndro.array.t2star_ms == 12.0 and ndro.array.rows == 7
    assert ndro.fit.survival_scale == 1.0 and dest.fit.survival_scale == 0.95
    assert ndro.rb == dest.rb


def test_overrides_and_digest():
    cfg = ExperimentConfig(seed=1)
    other = cfg.with_overrides(seed=2)
    assert other.seed == 2 and other.digest() != cfg.digest()
    with pytest.raises(ConfigError):
        cfg.with_overrides(seed=-5)


def test_load_from_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"seed": 4, "name": "x"}))
    assert ExperimentConfig.load(path).name == "x"
