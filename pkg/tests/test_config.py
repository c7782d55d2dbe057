import json

import pytest

from semrec.config import EngineConfig, load_config
from semrec.errors import ConfigError


def test_defaults():
    c = EngineConfig()
    assert c.attribute_weights == (1.0, 1.0, 1.0)
    assert c.agreement == c.overall_attribute == 3
    assert c.threshold == 0.5 and c.coverage_budget == 0.8


def test_json_round_trip():
    c = EngineConfig(threshold=0.3, influence_measure="closeness", attribute_weights=(1, 2, 3))
    again = EngineConfig.from_dict(json.loads(c.to_json()))
    assert again == c
    assert again.digest == c.digest
    assert EngineConfig().digest != c.digest


def test_missing_required_key():
    with pytest.raises(ConfigError, match="attribute_weights"):
        EngineConfig.from_dict({"threshold": 0.4})


def test_unknown_key():
    with pytest.raises(ConfigError, match="W_Z"):
        EngineConfig.from_dict({"attribute_weights": [1, 1, 1], "W_Z": 1})


@pytest.mark.parametrize("data", [
    {"attribute_weights": [1, 1], "attributes": ["a", "b", "c"]},
    {"attribute_weights": [0, 0, 0]},
    {"attribute_weights": [1, 1, 1], "coverage_budget": 0},
    {"attribute_weights": [1, 1, 1], "threshold": -1},
    {"attribute_weights": [1, 1, 1], "influence_measure": "eigen"},
    {"attribute_weights": [1, 1, 1], "hybrid_weights": {"cf": 0, "semantic": 0}},
    {"attribute_weights": [1, 1, 1], "hybrid_weights": {"alpha": 1}},
    {"attribute_weights": [1, 1, 1], "liking_threshold": 9},
    {"attribute_weights": [1, 1, 1], "agreement_attribute": 4},
    {"attribute_weights": [1, 1, 1], "rating_scale": [1]},
])
def test_invalid_values(data):
    with pytest.raises(ConfigError):
        EngineConfig.from_dict(data)


def test_rating_scale_forms():
    c = EngineConfig.from_dict({"attribute_weights": [1], "rating_scale": [0, 1], "liking_threshold": 0.5})
    assert c.rating_scale.low == 0 and c.attributes == ("subject",)
    c = EngineConfig.from_dict({"attribute_weights": [1, 1], "rating_scale": {"low": 0, "high": 1, "integral": False},
                                "liking_threshold": 0.7})
    assert not c.rating_scale.integral


def test_replace_ignores_none():
    c = EngineConfig().replace(threshold=None, coverage_budget=0.5)
    assert c.threshold == 0.5 and c.coverage_budget == 0.5


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="bad.json"):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    ok = tmp_path / "ok.json"
    ok.write_text('{"attribute_weights": [2, 1, 1]}')
    assert load_config(ok).attribute_weights == (2.0, 1.0, 1.0)
