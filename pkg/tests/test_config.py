import json
import math

import pytest
from hypothesis import given, strategies as st

from raman_egn.config import emit_normalized, load_config, parse_config, parse_quantity
from raman_egn.core import ConfigError, Tabulated

DESK = """
[channels]
count = 5
spacing = "10.001 GHz"
bandwidth = "10 GHz"
power = "0 dBm"
format = "16QAM"

[[spans]]
length = "100 km"
attenuation = "0.2 dB/km"
dispersion = "17 ps/nm/km"
gamma = "1.2 1/W/km"
raman_product = "0.0889 1/km"
repeat = 2

[formats.BPSK]
points = [[1, 0], [-1, 0]]

[run]
seed = 7
"""


def test_parse_quantity_units():
    assert parse_quantity("10.001 GHz", "frequency") == pytest.approx(10.001e9)
    assert parse_quantity("0 dBm", "power") == pytest.approx(1e-3)
    assert parse_quantity("20 dB", "gain") == pytest.approx(100.0)
    assert parse_quantity("0.2 dB/km", "attenuation") == pytest.approx(0.2 * math.log(10) / 1e4)
    assert parse_quantity("17 ps/nm/km", "dispersion") == pytest.approx(17e-6)
    assert parse_quantity("1.2 1/W/km", "gamma") == pytest.approx(1.2e-3)
    assert parse_quantity("-21.68 ps^2/km", "beta2") == pytest.approx(-21.68e-27)
    assert parse_quantity(3.5, "length") == 3.5


@pytest.mark.parametrize("value", ["10 parsec", "fast", True, None])
def test_parse_quantity_rejects(value):
    with pytest.raises(ConfigError):
        parse_quantity(value, "length", "here")


@given(st.floats(1e-3, 1e3))
def test_ghz_round_trip(x):
    assert parse_quantity(f"{x!r} GHz", "frequency") == pytest.approx(x * 1e9, rel=1e-15)


def test_load_toml(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text(DESK)
    cfg = load_config(path)
    assert len(cfg.plan) == 5 and cfg.link.n_spans == 2
    assert cfg.plan[1].format_id == "16QAM"
    span = cfg.link.spans[0]
    lo, hi = cfg.plan.band_edges
    assert span.raman_slope * cfg.plan.total_power * (hi - lo) == pytest.approx(0.0889e-3)
    assert span.compensating
    assert "BPSK" in cfg.formats and cfg.run["seed"] == 7


def test_normalized_round_trip_is_bit_identical(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text(DESK)
    first = emit_normalized(load_config(path), tmp_path / "n.json")
    second = emit_normalized(load_config(tmp_path / "n.json"))
    assert first == second
    data = json.loads(first)
    assert isinstance(data["channels"]["list"][0]["center"], float)


def test_tables_and_explicit_channels():
    cfg = parse_config({
        "channels": {"list": [{"center": "-10 GHz", "bandwidth": "8 GHz", "power": "1 mW", "format": "QPSK"},
                              {"center": "10 GHz", "bandwidth": "8 GHz", "power": "-3 dBm"}]},
        "spans": [{"length": "50 km", "beta2": "-21 ps^2/km",
                   "attenuation": {"freqs": ["-20 GHz", "20 GHz"], "values": [0.19, 0.21], "unit": "dB/km"},
                   "gain": {"freqs": [-20e9, 20e9], "values": ["10 dB", "11 dB"]}}],
    })
    span = cfg.link.spans[0]
    assert isinstance(span.attenuation, Tabulated)
    assert span.gain(0.0) == pytest.approx((10 + 10**1.1) / 2)
    assert cfg.plan[2].launch_power == pytest.approx(10**-0.3 * 1e-3)


def test_config_errors():
    with pytest.raises(ConfigError, match="channels"):
        parse_config({"spans": []})
    with pytest.raises(ConfigError, match="missing key 'length'"):
        parse_config({"channels": {"count": 1, "spacing": 1e9, "bandwidth": 1e9, "power": 1e-3},
                      "spans": [{"attenuation": 0.0, "beta2": 0.0}]})
    with pytest.raises(ConfigError, match="need beta2 or dispersion"):
        parse_config({"channels": {"count": 1, "spacing": 1e9, "bandwidth": 1e9, "power": 1e-3},
                      "spans": [{"length": 1e3, "attenuation": 0.0}]})


def test_bad_toml(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[channels\n")
    with pytest.raises(ConfigError):
        load_config(path)
