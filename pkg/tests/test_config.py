import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinkstab.config import ConfigError, RunConfig, config_from_dict, load_config


def test_defaults_round_trip():
    cfg = config_from_dict({})
    assert config_from_dict(cfg.to_dict()) == cfg
    assert cfg.grid.n == 4001 and cfg.darboux.epsilon == 1e-2
    assert cfg.simulation.dt_factor == 0.4 and cfg.simulation.cadence == 0.5


def test_effective_config_is_input_plus_defaults():
    raw = {"potential": {"kind": "phi8", "m": 5}, "simulation": {"delta": 0.02}}
    eff = config_from_dict(raw).to_dict()
    assert eff["potential"] == raw["potential"]
    assert eff["simulation"]["delta"] == 0.02
    assert eff["simulation"]["T"] == RunConfig().simulation.T


@pytest.mark.parametrize("raw", [{"foo": 1}, {"grid": {"N": 10}}, {"simulation": {"sponge_size": 1}}])
def test_unknown_keys_rejected(raw):
    with pytest.raises(ConfigError, match="unknown"):
        config_from_dict(raw)


@pytest.mark.parametrize("raw", [
    {"grid": {"n": 2}},
    {"simulation": {"dt_factor": 0.6}},
    {"simulation": {"mode": "gaussian"}},
    {"darboux": {"epsilon": 0.0}},
    {"virial": {"gammas": [0.5, 1.0]}},
    {"virial": {"A": 10.0, "B": 20.0}},
    {"scan": {"parameter": "omega"}},
    {"potential": {"m": 3}},
    {"seed": -1},
])
def test_out_of_range_rejected(raw):
    with pytest.raises(ConfigError):
        config_from_dict(raw)


def test_load_from_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"grid": {"n": 2001}, "seed": 7}))
    cfg = load_config(p)
    assert cfg.grid.n == 2001 and cfg.seed == 7


@given(st.integers(min_value=3, max_value=10**6), st.floats(min_value=1e-3, max_value=0.999),
       st.floats(min_value=0.01, max_value=0.5), st.integers(min_value=0, max_value=2**63))
@settings(max_examples=50, deadline=None)
def test_round_trip_property(n, eps, dtf, seed):
    cfg = config_from_dict({"grid": {"n": n}, "darboux": {"epsilon": eps},
                            "simulation": {"dt_factor": dtf}, "seed": seed})
    assert config_from_dict(json.loads(cfg.to_json())) == cfg
