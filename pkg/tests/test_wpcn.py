import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semalloc.perf_model import DEFAULT_CURVE, PayloadModel, lookup
from semalloc.wpcn import (
    NetworkConfig,
    device_state,
    harvested_energy,
    profile_rng,
    sample_channels,
    sample_valuation_profile,
    sample_valuation_profiles,
    valuation_levels,
)


def test_channels_deterministic():
    cfg = NetworkConfig(devices=8)
    a = sample_channels(cfg, np.random.default_rng(3))
    b = sample_channels(cfg, np.random.default_rng(3))
    assert np.array_equal(a, b)
    assert a.shape == (8,) and np.all(a > 0)


def test_exponential_channel_mean():
    cfg = NetworkConfig(devices=1)
    h = sample_channels(cfg, np.random.default_rng(0), size=10**6)
    assert abs(h.mean() - 1.0) < 0.01


def test_constant_channel():
    cfg = NetworkConfig(devices=4, channel="const")
    assert np.all(sample_channels(cfg, np.random.default_rng(0)) == 1.0)


def test_uniform_channel_range():
    cfg = NetworkConfig(devices=3, channel="uniform")
    h = sample_channels(cfg, np.random.default_rng(0), size=1000)
    assert np.all((h > 0) & (h < 2))


def test_harvested_energy():
    assert harvested_energy(NetworkConfig(eta=0.5, power_w=2, slot_s=1), 0.1) == pytest.approx(0.1)
    assert harvested_energy(NetworkConfig(eta=1, power_w=1, slot_s=1), 1.0) == 1.0
    e1 = harvested_energy(NetworkConfig(power_w=1.0), 0.7)
    e2 = harvested_energy(NetworkConfig(power_w=2.0), 0.7)
    assert e2 == pytest.approx(2 * e1, rel=1e-15)


@pytest.mark.parametrize("h", [0.0, -1.0])
def test_harvested_energy_rejects_bad_gain(h):
    with pytest.raises(ValueError):
        harvested_energy(NetworkConfig(), h)


def _cfg_for_budget(bits, **kw):
    # eta = P = tau = h = 1, so E = 1 J and the budget is 1 / e_b
    return NetworkConfig(eta=1, power_w=1, slot_s=1, energy_per_bit_j=1.0 / bits, **kw)


def test_device_state_full_dimension():
    s = device_state(_cfg_for_budget(16384), 1.0)
    assert s.dimension == 16 and s.bit_budget == 16384
    assert s.valuation == pytest.approx(0.5 * 0.86169747 + 0.5 * 0.82109432, abs=1e-15)
    assert s.valuation == pytest.approx(0.84139590, abs=1e-8)
    assert s.bid == s.valuation


def test_device_state_one_dimension_similarity_only():
    s = device_state(_cfg_for_budget(1024, w_sim=1.0, w_bleu=0.0), 1.0)
    assert s.dimension == 1
    assert s.valuation == 0.39550235


def test_device_state_cannot_transmit():
    s = device_state(_cfg_for_budget(1000), 1.0)
    assert s.dimension is None and s.valuation == 0.0 and s.bid == 0.0


def test_device_state_invariants():
    cfg = NetworkConfig()
    for h in [0.05, 0.3, 1.0, 2.7]:
        s = device_state(cfg, h)
        assert s.harvested_energy == cfg.eta * cfg.power_w * h * cfg.slot_s
        assert s.bit_budget == int(np.floor(s.harvested_energy / cfg.energy_per_bit_j))


def test_constant_channel_gives_equal_valuations():
    v = sample_valuation_profile(NetworkConfig(devices=6, channel="const"), np.random.default_rng(0))
    assert np.all(v == v[0])


def test_profile_reproducible():
    cfg = NetworkConfig()
    a = sample_valuation_profile(cfg, np.random.default_rng(11))
    b = sample_valuation_profile(cfg, np.random.default_rng(11))
    assert np.array_equal(a, b)


def test_vectorised_profiles_match_scalar_path():
    cfg = NetworkConfig(devices=4)
    batch = sample_valuation_profiles(cfg, np.random.default_rng(5), 200)
    gains = sample_channels(cfg, np.random.default_rng(5), size=200)
    for row, hs in zip(batch, gains):
        assert np.array_equal(row, [device_state(cfg, float(h)).valuation for h in hs])


def test_valuation_support_is_the_table():
    cfg = NetworkConfig()
    # 17 reachable levels enumerated straight from the curve
    levels = {0.0} | {0.5 * s + 0.5 * b for s, b in (lookup(DEFAULT_CURVE, d) for d in range(1, 17))}
    v = sample_valuation_profiles(cfg, np.random.default_rng(0), 10**5)
    assert set(np.unique(v)) <= levels
    pos = v[v > 0]
    assert pos.min() >= min(levels - {0.0}) and pos.max() <= max(levels)


def test_weighted_score_nondecreasing_in_dimension():
    levels = valuation_levels(NetworkConfig())
    assert len(levels) == 17
    assert np.all(np.diff(levels) >= 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-4, 5.0), st.floats(1e-4, 5.0))
def test_valuation_monotone_in_gain(h1, h2):
    cfg = NetworkConfig()
    lo, hi = sorted((h1, h2))
    assert device_state(cfg, lo).valuation <= device_state(cfg, hi).valuation


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(1e-3, 10.0))
def test_valuation_in_unit_interval(w, h):
    cfg = NetworkConfig(w_sim=w, w_bleu=1 - w)
    assert 0.0 <= device_state(cfg, h).valuation <= 1.0


def test_config_errors_are_collected():
    errs = NetworkConfig(devices=0, eta=1.5, w_sim=0.7, w_bleu=0.7, channel="rayleigh").errors()
    joined = " ".join(errs)
    for key in ("devices", "eta", "w_sim", "channel"):
        assert key in joined


def test_independent_batch_streams():
    a = profile_rng(9, 0).uniform(size=4)
    b = profile_rng(9, 1).uniform(size=4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, profile_rng(9, 0).uniform(size=4))
