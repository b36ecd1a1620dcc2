import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adrlite.channel import (
    BELOW_SENSITIVITY,
    COLLISION,
    OK,
    ChannelParams,
    TransmissionAttempt,
    noise_floor_dbm,
    path_loss_db,
    received_power_dbm,
    resolve_receptions,
    sample_shadowing,
    snr_db,
)
from adrlite.phy import LoRaConfig

P = ChannelParams()


def test_path_loss_reference_points():
    assert path_loss_db(1000.0, P) == pytest.approx(128.95)
    assert path_loss_db(10_000.0, P) == pytest.approx(128.95 + 23.2)
    assert path_loss_db(2000.0, P) == pytest.approx(135.93, abs=5e-3)


def test_path_loss_clamps_tiny_distances(caplog):
    assert path_loss_db(0.0, P) == path_loss_db(1.0, P)
    assert "clamped" in caplog.text


@given(d1=st.floats(1.0, 1e5), d2=st.floats(1.0, 1e5))
def test_path_loss_monotone(d1, d2):
    if d1 < d2:
        assert path_loss_db(d1, P) <= path_loss_db(d2, P)


def test_received_power_and_snr():
    rx = received_power_dbm(14, 1000.0, 0.0, P)
    assert rx == pytest.approx(-114.95)
    assert noise_floor_dbm(125_000, 6) == pytest.approx(-117.03, abs=5e-3)
    assert snr_db(rx, 125_000, 6) == pytest.approx(2.08, abs=5e-3)
    assert snr_db(noise_floor_dbm(125_000, 6), 125_000, 6) == pytest.approx(0.0)


def test_shadowing_zero_sigma_is_exact():
    rng = np.random.default_rng(0)
    assert all(sample_shadowing(rng, 0.0) == 0.0 for _ in range(100))
    with pytest.raises(ValueError):
        sample_shadowing(rng, -1.0)


def test_shadowing_std():
    rng = np.random.default_rng(11)
    xs = np.array([sample_shadowing(rng, 7.08) for _ in range(100_000)])
    assert abs(xs.std(ddof=1) - 7.08) / 7.08 < 0.02


def attempt(ed, start, end, rx, sf=7, cf=868.1):
    cfg = LoRaConfig(sf=sf, tp=14, cf=cf, cr=Fraction(4, 5))
    return TransmissionAttempt(ed_id=ed, config=cfg, start_s=start, end_s=end, rx_power_dbm=rx)


def test_single_frame_above_sensitivity():
    assert resolve_receptions([attempt(0, 0, 1, -100)]) == [OK]


def test_below_sensitivity():
    assert resolve_receptions([attempt(0, 0, 1, -124.5)]) == [BELOW_SENSITIVITY]
    # SF12 hears what SF7 cannot
    assert resolve_receptions([attempt(0, 0, 1, -124.5, sf=12)]) == [OK]


def test_equal_power_overlap_loses_both():
    assert resolve_receptions([attempt(0, 0, 1, -100), attempt(1, 0.5, 1.5, -100)]) == [COLLISION, COLLISION]


def test_capture_of_stronger_frame():
    out = resolve_receptions([attempt(0, 0, 1, -90), attempt(1, 0.5, 1.5, -100)])
    assert out == [OK, COLLISION]


def test_capture_threshold_boundary():
    # exactly 6 dB clears the threshold
    assert resolve_receptions([attempt(0, 0, 1, -94), attempt(1, 0, 1, -100)]) == [OK, COLLISION]
    assert resolve_receptions([attempt(0, 0, 1, -94.5), attempt(1, 0, 1, -100)]) == [COLLISION, COLLISION]


def test_different_sf_or_cf_are_orthogonal():
    assert resolve_receptions([attempt(0, 0, 1, -100), attempt(1, 0, 1, -100, sf=8)]) == [OK, OK]
    assert resolve_receptions([attempt(0, 0, 1, -100), attempt(1, 0, 1, -100, cf=868.4)]) == [OK, OK]


def test_back_to_back_frames_do_not_overlap():
    assert resolve_receptions([attempt(0, 0, 1, -100), attempt(1, 1, 2, -100)]) == [OK, OK]


@given(
    powers=st.lists(st.floats(-130, -60), min_size=1, max_size=6),
    starts=st.lists(st.floats(0, 3), min_size=6, max_size=6),
)
def test_at_most_one_capture_per_overlap_group(powers, starts):
    frames = [attempt(i, s, s + 1.0, p) for i, (p, s) in enumerate(zip(powers, starts))]
    out = resolve_receptions(frames)
    for i, a in enumerate(frames):
        if out[i] == OK:
            for j, b in enumerate(frames):
                if i != j and a.overlaps(b):
                    assert out[j] != OK
                    assert a.rx_power_dbm - b.rx_power_dbm >= 6.0


def test_channel_params_validation():
    with pytest.raises(ValueError):
        ChannelParams(sigma_db=-1)
    with pytest.raises(ValueError):
        ChannelParams(d0_m=0)
    assert math.isfinite(ChannelParams().pl0_db)
