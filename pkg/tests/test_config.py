"""
blowup-lab — Job Configuration Tests
Run: pytest tests/test_config.py -v
"""
import math
from pathlib import Path

import pytest

from blowup_lab.barrier_crossing import Orientation
from blowup_lab.blowup_cdf import InitialKind
from blowup_lab.config import (
    Command,
    JobConfig,
    OutputFormat,
    build_job,
    dump_config,
    load_job,
    merge_overrides,
    parse_config_text,
)
from blowup_lab.errors import ConfigError, ExitStatus

CONFIG_DIR = Path(__file__).parent.parent / "config"

EXAMPLE = """\
# exponential initial value
command=validate
model.c1=1.0
model.c2=0.5

g.kind=exponential
g.scale=1.0
g.rate=1.0     # g(x) = e^x
r=0.5,1,2
mc.paths=20000
mc.bridge_correction=false
output.format=jsonl
"""


@pytest.fixture
def example_job():
    return build_job(parse_config_text(EXAMPLE))


class TestParsing:
    def test_sections_and_comments(self, example_job):
        assert example_job.command is Command.VALIDATE
        assert example_job.model.c2 == 0.5
        assert example_job.g.kind is InitialKind.EXPONENTIAL
        assert example_job.r_grid == (0.5, 1.0, 2.0)
        assert example_job.mc.paths == 20000
        assert example_job.mc.bridge_correction is False
        assert example_job.output.format is OutputFormat.JSONL

    def test_defaults(self):
        job = build_job({})
        assert job == JobConfig()
        assert job.quad.tol == 1e-9 and job.quad.truncation_sigmas == 8.0
        assert job.crossing.r == math.inf and job.crossing.T is None

    def test_conversions(self, example_job):
        params = example_job.model.to_params()
        assert (params.c1, params.c2, params.p, params.T) == (1.0, 0.5, 2.0, 1.0)
        assert example_job.g.to_spec().g(0.0) == pytest.approx(1.0)
        assert example_job.quad.to_config().abs_tol == 1e-9

    def test_table_knots(self):
        job = build_job(parse_config_text("g.kind=table\ng.knots=-1:0.5, 0:1, 2:3\n"))
        assert job.g.knots == ((-1.0, 0.5), (0.0, 1.0), (2.0, 3.0))
        assert job.g.to_spec().g(1.0) == pytest.approx(2.0)

    def test_range_grid(self):
        job = build_job(parse_config_text("r_from=0.5\nr_to=2\nr_steps=4\n"))
        assert job.r_grid == (0.5, 1.0, 1.5, 2.0)

    def test_crossing_section(self):
        job = build_job(parse_config_text("crossing.orientation=minus\ncrossing.r=inf\ncrossing.T=2\n"))
        assert job.crossing.orientation is Orientation.MINUS
        assert job.crossing.r == math.inf and job.crossing.T == 2.0

    def test_empty_values_keep_defaults(self):
        job = build_job(parse_config_text("crossing.a=2\ncrossing.T=\ncrossing.x=\noutput.path=\n"))
        assert job.crossing.a == 2.0
        assert job.crossing.T is None and job.crossing.x == 0.0
        assert job.output.path is None

    def test_empty_flag_clears_file_value(self):
        entries = parse_config_text("crossing.T=2\n")
        job = build_job(merge_overrides(entries, {"crossing.T": ""}))
        assert job.crossing.T is None


class TestErrors:
    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("model.c1=1\n\nmodel.speed=2\n")
        assert info.value.line == 3 and info.value.field == "model.speed"
        assert info.value.exit_status is ExitStatus.CONFIG_ERROR

    def test_malformed_line(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("# header\nmodel.c1 1.0\n")
        assert info.value.line == 2

    def test_invalid_value_reports_field_and_line(self):
        with pytest.raises(ConfigError) as info:
            build_job(parse_config_text("model.c1=1\nmodel.p=0.5\n"))
        assert info.value.field == "model.p" and info.value.line == 2

    def test_incomplete_initial_value(self):
        with pytest.raises(ConfigError) as info:
            build_job(parse_config_text("g.kind=exponential\ng.scale=1\n"))
        assert info.value.field == "g"
        assert info.value.line == 1

    def test_non_numeric_grid(self):
        with pytest.raises(ConfigError) as info:
            build_job(parse_config_text("r=0.5,abc\n"))
        assert info.value.field == "r" and info.value.line == 1

    def test_decreasing_grid(self):
        with pytest.raises(ConfigError) as info:
            build_job(parse_config_text("# grid\nr=2,1\n"))
        assert info.value.field == "r_grid" and info.value.line == 2

    def test_partial_range(self):
        with pytest.raises(ConfigError):
            build_job(parse_config_text("r_from=0.5\nr_to=2\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_job(str(tmp_path / "absent.conf"))

    def test_too_few_paths(self):
        with pytest.raises(ConfigError) as info:
            build_job(parse_config_text("mc.paths=10\n"))
        assert info.value.field == "mc.paths"


class TestOverridesAndDump:
    def test_flags_override_file(self):
        merged = merge_overrides(parse_config_text("model.c1=3\nr=1,2\n"), {"model.c1": "2", "r_from": "1",
                                                                            "r_to": "3", "r_steps": "3",
                                                                            "model.c2": None})
        job = build_job(merged)
        assert job.model.c1 == 2.0
        assert job.r_grid == (1.0, 2.0, 3.0)

    def test_round_trip(self, example_job):
        assert build_job(parse_config_text(dump_config(example_job))) == example_job

    def test_round_trip_with_table_and_crossing(self):
        text = "g.kind=table\ng.knots=-1:0.5,0:1,2:3\ncrossing.T=1.5\ncrossing.x=-0.25\noutput.path=rows.csv\n"
        job = build_job(parse_config_text(text))
        dumped = dump_config(job)
        assert build_job(parse_config_text(dumped)) == job
        assert dumped.splitlines() == sorted(dumped.splitlines())


class TestShippedJobs:
    @pytest.mark.parametrize("name", ["unit_constant.conf", "exponential.conf", "clamped_curve.conf"])
    def test_example_files_load(self, name):
        job = load_job(str(CONFIG_DIR / name))
        assert job.r_grid and job.g.to_spec() is not None
