import json

import pytest
from conftest import CONFIG_DIR, bundled

from laxkit.core.errors import ConfigError
from laxkit.models import build_marked_config, load_run_config, parse_run_config

BUNDLED = sorted(p.stem for p in CONFIG_DIR.glob("*.json"))


def minimal(**overrides):
    data = {"algebra": {"family": "sl", "n": 2}, "in_points": ["0"], "out_points": ["inf"]}
    data.update(overrides)
    return data


class TestParsing:
    def test_defaults(self):
        run = parse_run_config(minimal())
        assert run.name == "run"
        assert run.tyurin == [] and run.cycles == []

    def test_floats_are_rejected(self):
        with pytest.raises(ConfigError) as info:
            parse_run_config(minimal(tyurin=[{"gamma": "2", "alpha": [1.5, "0"]}]))
        assert info.value.field_path == ("tyurin", 0, "alpha", 0)

    def test_unknown_field(self):
        with pytest.raises(ConfigError) as info:
            parse_run_config(minimal(genus=1))
        assert info.value.field_path == ("genus",)

    def test_unknown_family(self):
        with pytest.raises(ConfigError) as info:
            parse_run_config(minimal(algebra={"family": "e", "n": 8}))
        assert info.value.field_path[0] == "algebra"

    def test_bad_window(self):
        with pytest.raises(ConfigError):
            parse_run_config(minimal(window="3:1"))

    def test_invalid_json(self):
        with pytest.raises(ConfigError):
            parse_run_config("{not json")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "absent.json")


class TestBuilding:
    def test_malformed_point(self):
        with pytest.raises(ConfigError) as info:
            build_marked_config(parse_run_config(minimal(in_points=["0", "1/0"])))
        assert info.value.field_path == ("in_points", 1)
        assert info.value.exit_code == 2

    def test_repeated_point(self):
        with pytest.raises(ConfigError) as info:
            build_marked_config(parse_run_config(minimal(out_points=["0"])))
        assert info.value.field_path == ("out_points", 0)

    def test_so_needs_isotropic_alpha(self):
        data = minimal(algebra={"family": "so", "n": 4}, tyurin=[{"gamma": "1", "alpha": ["1", "1", "0", "0"]}])
        with pytest.raises(ConfigError) as info:
            build_marked_config(parse_run_config(data))
        assert info.value.field_path == ("tyurin", 0, "alpha")

    def test_prescription_kinds(self):
        _, prescription = build_marked_config(parse_run_config(minimal(in_points=["0", "1"])))
        assert prescription.kind == "m1"
        data = minimal(in_points=["0", "1"], out_points=["inf", "2"])
        assert build_marked_config(parse_run_config(data))[1].kind == "standard"

    def test_custom_prescription(self):
        data = minimal(in_points=["0", "1"], prescription={"kind": "custom", "a": ["2"], "b": ["1"]})
        _, prescription = build_marked_config(parse_run_config(data))
        assert prescription.expected_S() == 1

    def test_custom_prescription_must_sum_to_N(self):
        data = minimal(in_points=["0", "1"], prescription={"kind": "custom", "a": ["1"], "b": ["1"]})
        with pytest.raises(ConfigError) as info:
            build_marked_config(parse_run_config(data))
        assert info.value.field_path == ("prescription",)

    def test_m1_needs_one_out_point(self):
        data = minimal(out_points=["inf", "2"], prescription={"kind": "m1"})
        with pytest.raises(ConfigError):
            build_marked_config(parse_run_config(data))

    def test_gaussian_prescription_values(self):
        data = minimal(prescription={"kind": "custom", "a": ["1"], "b": ["i"]})
        with pytest.raises(ConfigError) as info:
            build_marked_config(parse_run_config(data))
        assert info.value.field_path == ("prescription", "b", 0)


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_configs(name):
    run = parse_run_config(bundled(name))
    config, prescription = build_marked_config(run)
    assert config.N == len(run.in_points)
    assert run.canonical() == parse_run_config(json.dumps(run.canonical())).canonical()
