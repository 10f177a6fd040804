import json
import logging
import time

import pytest
from conftest import bundled

from laxkit.api.report import Report, dumps, inputs_hash
from laxkit.core.config import parse_window
from laxkit.core.errors import ConfigError, LaxkitError, NonGenericError, WindowError
from laxkit.core.log import configure_logging
from laxkit.core.parallel import parallel_map
from laxkit.models import Check, parse_run_config


@pytest.mark.parametrize("text, window", [("-6:6", (-6, 6)), ("0:0", (0, 0)), ("-3:-1", (-3, -1))])
def test_parse_window(text, window):
    assert parse_window(text) == window


@pytest.mark.parametrize("text", ["3:1", "1", "a:b", "1:2:3"])
def test_parse_window_rejects(text):
    with pytest.raises(ValueError):
        parse_window(text)


@pytest.mark.parametrize("jobs", [1, 4])
def test_parallel_map_keeps_input_order(jobs):
    def slow_square(k):
        time.sleep(0.001 * (5 - k % 5))
        return k * k

    assert parallel_map(slow_square, range(12), jobs) == [k * k for k in range(12)]


class TestErrors:
    def test_config_error_prefixes_the_field_path(self):
        err = ConfigError("not a point", field_path=("in_points", 1))
        assert err.detail == "in_points.1: not a point"
        assert err.exit_code == 2
        assert err.to_dict() == {"error": "ConfigError", "detail": "in_points.1: not a point", "context": {}}

    def test_window_error_names_the_needed_degree(self):
        err = WindowError("window too small", needed=-3)
        assert err.exit_code == 1
        assert err.context == {"needed_degree": -3}

    def test_non_generic_error_lists_failures(self):
        err = NonGenericError("no normalised section", [(2, 1, 0)])
        assert isinstance(err, LaxkitError)
        assert err.failing == [(2, 1, 0)]
        assert err.to_dict()["context"] == {"failing": [[2, 1, 0]]}


def test_configure_logging_installs_one_handler():
    root = logging.getLogger("laxkit")
    previous = root.level
    try:
        configure_logging("DEBUG")
        configure_logging("ERROR")
        assert len([h for h in root.handlers if getattr(h, "_laxkit", False)]) == 1
        assert root.level == logging.ERROR
    finally:
        root.setLevel(previous)


class TestReport:
    def make(self, *checks):
        return Report(command="basis", config_name="demo", inputs_hash="0" * 64, window=(-1, 1), seed=0,
                      checks=list(checks))

    def test_verdict(self):
        assert self.make(Check(name="a", passed=True)).to_json()["verdict"] == "PASS"
        report = self.make(Check(name="a", passed=True), Check(name="b", passed=False))
        assert report.to_json()["verdict"] == "FAIL"
        assert [c.name for c in report.failures] == ["b"]

    def test_timing_is_omitted_by_default(self):
        assert "timing" not in self.make().to_json()

    def test_write(self, tmp_path):
        report = self.make(Check(name="a", passed=True))
        path = report.write(tmp_path, {"z.json": {"b": 1, "a": 2}, "a.json": []})
        assert report.artifacts == ["a.json", "z.json"]
        assert (tmp_path / "z.json").read_text(encoding="utf-8") == dumps({"a": 2, "b": 1})
        assert json.loads(path.read_text(encoding="utf-8"))["artifacts"] == ["a.json", "z.json"]

    def test_inputs_hash_depends_on_every_input(self):
        run = parse_run_config(bundled("sl2_classical"))
        base = inputs_hash("basis", run, (-1, 1), 0)
        assert base == inputs_hash("basis", run, (-1, 1), 0)
        assert base != inputs_hash("cocycle", run, (-1, 1), 0)
        assert base != inputs_hash("basis", run, (-2, 1), 0)
        assert base != inputs_hash("basis", run, (-1, 1), 1)
