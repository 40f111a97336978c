import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from atomrb.experiments import ramsey_population
from atomrb.sites import (
    COHERENT,
    EMPTY,
    SPECTATOR,
    ArrayConfig,
    SiteModel,
    build_array,
    coherence_alpha,
    lifetime_survival,
    predicted_gate_error,
    prepare_atom,
    sample_detuning,
    sequence_survival,
)

SITE = SiteModel(0, 0, 2 * np.pi * 9.6e3, 14.09e-3)


def test_single_site_without_spread_has_mean_parameters():
    cfg = ArrayConfig(rows=1, cols=1, rabi_spread=0.0, t2star_std=0.0)
    (site,) = build_array(cfg)
    assert site.rabi == cfg.rabi_mean
    assert site.t2star == cfg.t2star_mean
    assert site.p_load == cfg.p_load


def test_rabi_spread_bound_on_large_array():
    sites = build_array(ArrayConfig(rows=15, cols=15, seed=4))
    r = np.array([s.rabi for s in sites])
    assert r.max() / r.min() - 1 <= 0.03 + 1e-9
    assert r.mean() == pytest.approx(ArrayConfig().rabi_mean, rel=1e-12)


def test_build_is_deterministic():
    cfg = ArrayConfig(rows=4, cols=3, seed=9)
    assert build_array(cfg) == build_array(cfg)
    assert build_array(cfg) != build_array(ArrayConfig(rows=4, cols=3, seed=10))


def test_t2_distribution_on_large_array():
    t2 = np.array([s.t2star for s in build_array(ArrayConfig(seed=2))])
    assert t2.mean() == pytest.approx(14.09e-3, abs=4 * 0.8e-3 / 15)
    assert t2.std() == pytest.approx(0.8e-3, rel=0.25)


def test_coherence_examples():
    assert coherence_alpha(0.0, 0.014) == 1.0
    assert coherence_alpha(0.014, 0.014) == pytest.approx(0.5 + 0.5 * 1.95**-1.5, rel=1e-12)
    assert coherence_alpha(0.014, 0.014) == pytest.approx(0.6836, abs=1e-4)
    assert coherence_alpha(1e3, 0.014) == pytest.approx(0.5, abs=1e-9)


@given(st.floats(1e-4, 1.0), st.floats(1e-6, 0.1), st.floats(1e-6, 0.1))
def test_coherence_is_decreasing_and_bounded(t2, a, b):
    lo, hi = sorted((a, b))
    if hi - lo < 1e-9:
        return
    assert 0.5 < coherence_alpha(hi, t2) < coherence_alpha(lo, t2) <= 1.0


def test_infinite_t2_gives_zero_detuning():
    rng = np.random.default_rng(0)
    assert sample_detuning(np.inf, rng) == 0.0
    assert np.all(sample_detuning(np.inf, rng, 5) == 0.0)


def test_detuning_reproduces_coherence_function():
    rng = np.random.default_rng(12)
    t2 = 14e-3
    delta = sample_detuning(t2, rng, 1_000_000)
    emp = np.cos(delta * 14e-3).mean()
    assert emp == pytest.approx(2 * coherence_alpha(14e-3, t2) - 1, abs=0.01)
    assert emp == pytest.approx(0.3672, abs=0.01)
    # odd moments vanish, so the Ramsey phase is not shifted
    assert np.sin(delta * 14e-3).mean() == pytest.approx(0.0, abs=0.005)


def test_detuning_is_centred():
    rng = np.random.default_rng(13)
    delta = sample_detuning(14e-3, rng, 1_000_000)
    assert abs(delta.mean()) < 5 * delta.std() / 1000


def test_predicted_error_matches_quoted_value():
    err = predicted_gate_error(2 * np.pi * 9600, 14.09e-3, 2.95 * np.pi)
    assert err == pytest.approx(4.2e-5, abs=0.1e-5)
    assert predicted_gate_error(2 * np.pi * 9600, np.inf) == 0.0


def test_predicted_error_grows_with_area():
    a = predicted_gate_error(2 * np.pi * 9600, 14.09e-3, 2.95 * np.pi)
    b = predicted_gate_error(2 * np.pi * 9600, 14.09e-3, 5.9 * np.pi)
    assert b > a
    assert b / a == pytest.approx(4.0, rel=0.01)


def test_prepare_atom_ideal():
    site = SiteModel(0, 0, 1.0, 1.0, p_load=1.0, prep_fidelity=1.0)
    out = prepare_atom(site, np.random.default_rng(0), 1000)
    assert np.all(out == COHERENT)


def test_prepare_atom_statistics():
    out = prepare_atom(SITE, np.random.default_rng(1), 100_000)
    loaded = out != EMPTY
    assert loaded.mean() == pytest.approx(0.55, abs=0.005)
    spectators = (out[loaded] == SPECTATOR).mean()
    assert spectators == pytest.approx(0.029, abs=0.002)


def test_sequence_survival():
    rng = np.random.default_rng(2)
    perfect = SiteModel(0, 0, 1.0, 1.0, survival=1.0)
    assert np.all(sequence_survival(perfect, rng, 1000))
    assert sequence_survival(SITE, rng, 100_000).mean() == pytest.approx(0.93, abs=0.003)


def test_lifetime_bound_exceeds_measured_survival():
    assert lifetime_survival(SITE) == pytest.approx(np.exp(-0.375 / 9.7))
    assert lifetime_survival(SITE) >= SITE.survival


def test_invalid_site_rejected():
    with pytest.raises(ValueError):
        SiteModel(0, 0, -1.0, 1.0)
    with pytest.raises(ValueError):
        SiteModel(0, 0, 1.0, 1.0, p_load=1.5)


def test_ramsey_simulation_matches_envelope():
    rng = np.random.default_rng(21)
    t2 = 14.09e-3
    times = np.linspace(0, 2 * t2, 41)
    delta = sample_detuning(t2, rng, 100_000)
    p = ramsey_population(times, 2 * np.pi * 400, delta).mean(axis=1)
    model = 0.5 + (coherence_alpha(times, t2) - 0.5) * np.cos(2 * np.pi * 400 * times)
    assert np.max(np.abs(p - model)) < 0.01


def test_site_streams_are_order_independent():
    from atomrb.engine import site_stream

    a = [site_stream(5, s, k).random(3) for s in range(3) for k in range(2)]
    b = [site_stream(5, s, k).random(3) for k in reversed(range(2)) for s in reversed(range(3))]
    lookup = {(s, k): site_stream(5, s, k).random(3).tolist() for s in range(3) for k in range(2)}
    assert [x.tolist() for x in a] == [lookup[(s, k)] for s in range(3) for k in range(2)]
    assert len({tuple(x) for x in a}) == len(a)
    assert sorted(map(tuple, a)) == sorted(map(tuple, b))
