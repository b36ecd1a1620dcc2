from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adrlite.configspace import (
    NAMED_DIMENSIONS,
    ConfigDimensions,
    ConfigSpaceError,
    build_space,
    parse_dims,
)
from adrlite.phy import CF_VALUES, CR_VALUES, SF_VALUES, TP_VALUES, LoRaConfig, RadioConstants, energy_per_packet

from oracles import brute_force_order


@pytest.mark.parametrize("name, size", [("config-1", 30), ("config-2", 90), ("config-3", 120), ("config-4", 360)])
def test_named_sizes(name, size):
    space = build_space(NAMED_DIMENSIONS[name])
    assert len(space) == size
    assert list(space.energies) == sorted(space.energies)
    first, last = space.config_at(1), space.config_at(size)
    assert (first.sf, first.tp) == (7, 2)
    assert (last.sf, last.tp) == (12, 14)


@pytest.mark.parametrize("mode", ["literal", "semtech"])
@pytest.mark.parametrize("name", list(NAMED_DIMENSIONS))
def test_order_matches_brute_force(name, mode):
    dims = NAMED_DIMENSIONS[name]
    space = build_space(dims, airtime_mode=mode)
    expected = brute_force_order(dims.sf_values, dims.tp_values, dims.cf_values, dims.cr_values, mode)
    got = [(c.sf, c.tp, c.cf, c.cr) for c in space.configs]
    assert got == [key for _, key in expected]


def test_config1_is_sf_major():
    space = build_space(NAMED_DIMENSIONS["config-1"])
    pairs = [(c.sf, c.tp) for c in space.configs]
    assert pairs == [(sf, tp) for sf in SF_VALUES for tp in TP_VALUES]


def test_index_lookup_round_trip():
    space = build_space(NAMED_DIMENSIONS["config-4"])
    for i in range(1, len(space) + 1):
        assert space.index_of(space.config_at(i)) == i
        assert space.energy_at(i) == space.energies[i - 1]


def test_index_errors():
    space = build_space(NAMED_DIMENSIONS["config-1"])
    with pytest.raises(IndexError):
        space.config_at(0)
    with pytest.raises(IndexError):
        space.config_at(31)
    with pytest.raises(ConfigSpaceError):
        space.index_of(LoRaConfig(sf=7, tp=2, cf=868.4, cr=Fraction(4, 5)))


def test_build_is_deterministic():
    a = build_space(NAMED_DIMENSIONS["config-4"])
    b = build_space(NAMED_DIMENSIONS["config-4"])
    assert a.configs == b.configs
    assert a.to_csv() == b.to_csv()


def test_dimension_validation():
    with pytest.raises(ConfigSpaceError):
        ConfigDimensions(sf_values=())
    with pytest.raises(ConfigSpaceError):
        ConfigDimensions(tp_values=(3,))
    with pytest.raises(ConfigSpaceError):
        ConfigDimensions(sf_values=(7, 7))


def test_parse_dims():
    assert parse_dims("config-3") == NAMED_DIMENSIONS["config-3"]
    dims = parse_dims("sf=7,9; tp=2,14; cf=868.1,868.7; cr=4/5,4/8")
    assert dims.size == 16
    assert dims.cr_values == (Fraction(1, 2), Fraction(4, 5))
    with pytest.raises(ConfigSpaceError):
        parse_dims("sf7")
    with pytest.raises(ConfigSpaceError):
        parse_dims("sf=7;bw=125")
    with pytest.raises(ConfigSpaceError):
        parse_dims("cr=4/9")


def test_dimensions_dict_round_trip():
    dims = NAMED_DIMENSIONS["config-4"]
    assert ConfigDimensions.from_dict(dims.to_dict()) == dims


def test_csv_header_and_rows():
    text = build_space(NAMED_DIMENSIONS["config-1"]).to_csv().splitlines()
    assert text[0] == "index,sf,tp,cf_mhz,cr,toa_s,energy_j"
    assert len(text) == 31
    assert text[1].startswith("1,7,2,868.1,4/5,")


@settings(max_examples=40, deadline=None)
@given(
    sfs=st.sets(st.sampled_from(SF_VALUES), min_size=1),
    tps=st.sets(st.sampled_from(TP_VALUES), min_size=1),
    cfs=st.sets(st.sampled_from(CF_VALUES), min_size=1),
    crs=st.sets(st.sampled_from(CR_VALUES), min_size=1),
    mcu=st.floats(0.001, 1.0),
)
def test_any_dimension_subset_is_sorted(sfs, tps, cfs, crs, mcu):
    dims = ConfigDimensions(tuple(sfs), tuple(tps), tuple(cfs), tuple(crs))
    radio = RadioConstants(p_on_mcu=mcu)
    space = build_space(dims, radio)
    assert len(space) == len(sfs) * len(tps) * len(cfs) * len(crs)
    assert len(set(space.configs)) == len(space)
    rescored = [energy_per_packet(c, radio) for c in space.configs]
    assert rescored == list(space.energies)
    assert all(a <= b for a, b in zip(rescored, rescored[1:]))
