"""Config file loading, validation and environment overrides."""

import json
from pathlib import Path

import pytest

from scatterkit.config import (
    ENV_BIND,
    ENV_MATERIALS_DIR,
    AppConfig,
    apply_env_overrides,
    load_config,
    parse_bind,
)
from scatterkit.errors import ConfigError

FULL_TOML = """
bind = "0.0.0.0:9000"
materials_dir = "mats"
output_dir = "out"
job_workers = 2

[preview]
width = 64
height = 48

[ga]
population_size = 8
max_generations = 5

[render]
samples_per_pixel = 2
irradiance_sample_count = 128
thread_count = 4
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, "utf-8")
    return path


class TestDefaults:
    def test_no_file_yields_usable_defaults(self):
        cfg = load_config(None, env={})
        assert cfg.bind_host == "127.0.0.1" and cfg.bind_port == 8517
        assert cfg.ga.population_size == 32
        assert cfg.render.samples_per_pixel == 4
        assert cfg.preview_width == cfg.preview_height == 256
        assert cfg.job_workers == 1

    def test_direct_construction_validates(self):
        with pytest.raises(ConfigError):
            AppConfig(bind_port=0)
        with pytest.raises(ConfigError):
            AppConfig(bind_port=65536)
        with pytest.raises(ConfigError):
            AppConfig(job_workers=0)
        with pytest.raises(ConfigError):
            AppConfig(preview_width=0)
        with pytest.raises(ConfigError):
            AppConfig(bind_host="")


class TestFileLoading:
    def test_toml_round_trip(self, tmp_path):
        cfg = load_config(write(tmp_path, "app.toml", FULL_TOML), env={})
        assert (cfg.bind_host, cfg.bind_port) == ("0.0.0.0", 9000)
        assert cfg.materials_dir == tmp_path / "mats"
        assert cfg.output_dir == tmp_path / "out"
        assert cfg.job_workers == 2
        assert (cfg.preview_width, cfg.preview_height) == (64, 48)
        assert cfg.ga.population_size == 8 and cfg.ga.max_generations == 5
        assert cfg.render.samples_per_pixel == 2
        assert cfg.render.irradiance_sample_count == 128
        assert cfg.render.thread_count == 4

    def test_json_equivalent(self, tmp_path):
        doc = {
            "bind": "10.1.2.3:81",
            "materials_dir": "m",
            "ga": {"population_size": 4},
        }
        cfg = load_config(write(tmp_path, "app.json", json.dumps(doc)), env={})
        assert (cfg.bind_host, cfg.bind_port) == ("10.1.2.3", 81)
        assert cfg.materials_dir == tmp_path / "m"
        assert cfg.ga.population_size == 4

    def test_absolute_paths_kept(self, tmp_path):
        cfg = load_config(
            write(tmp_path, "a.toml", 'materials_dir = "/abs/mats"\noutput_dir = "/abs/out"\n'),
            env={},
        )
        assert cfg.materials_dir == Path("/abs/mats")
        assert cfg.output_dir == Path("/abs/out")

    def test_unset_sections_fall_back_to_defaults(self, tmp_path):
        cfg = load_config(write(tmp_path, "a.toml", 'bind = "h:1"\n'), env={})
        assert cfg.ga == AppConfig().ga
        assert cfg.render == AppConfig().render

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.toml", env={})

    def test_unsupported_extension(self, tmp_path):
        with pytest.raises(ConfigError, match="toml or .json"):
            load_config(write(tmp_path, "a.yaml", "x: 1\n"), env={})

    def test_bad_toml_syntax(self, tmp_path):
        with pytest.raises(ConfigError, match="failed to parse"):
            load_config(write(tmp_path, "a.toml", "= nonsense ="), env={})

    def test_bad_json_syntax(self, tmp_path):
        with pytest.raises(ConfigError, match="failed to parse"):
            load_config(write(tmp_path, "a.json", "{"), env={})

    def test_json_top_level_must_be_object(self, tmp_path):
        with pytest.raises(ConfigError, match="top level"):
            load_config(write(tmp_path, "a.json", "[1, 2]"), env={})


class TestRejection:
    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("bogus = 1\n", "unknown config keys"),
            ("[ga]\nnot_a_knob = 2\n", "unknown ga keys"),
            ("[render]\nnot_a_knob = 2\n", "unknown render keys"),
            ("[preview]\ndepth = 2\n", "unknown preview keys"),
            ('bind = "nocolon"\n', "host:port"),
            ('bind = ":5000"\n', "host:port"),
            ('bind = "h:notaport"\n', "not an integer"),
            ('bind = "h:99999"\n', "outside"),
            ("bind = 5000\n", "string"),
            ("materials_dir = 3\n", "string path"),
            ("job_workers = true\n", "integer"),
            ('job_workers = "2"\n', "integer"),
            ("[ga]\npopulation_size = 0\n", "population_size"),
            ("[render]\nsamples_per_pixel = 0\n", "samples_per_pixel"),
            ('preview = "wide"\n', "table"),
            ('ga = "fast"\n', "table"),
        ],
    )
    def test_bad_config_rejected(self, tmp_path, text, fragment):
        with pytest.raises(ConfigError, match=fragment):
            load_config(write(tmp_path, "bad.toml", text), env={})


class TestParseBind:
    def test_valid(self):
        assert parse_bind("127.0.0.1:8000") == ("127.0.0.1", 8000)
        assert parse_bind("::1:9000") == ("::1", 9000)

    @pytest.mark.parametrize("text", ["nope", ":80", "h:", "h:0", "h:70000", "h:8e3"])
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_bind(text)


class TestEnvOverrides:
    def test_bind_override(self, tmp_path):
        path = write(tmp_path, "a.toml", 'bind = "filehost:1111"\n')
        cfg = load_config(path, env={ENV_BIND: "envhost:2222"})
        assert (cfg.bind_host, cfg.bind_port) == ("envhost", 2222)

    def test_materials_override(self, tmp_path):
        path = write(tmp_path, "a.toml", 'materials_dir = "from_file"\n')
        cfg = load_config(path, env={ENV_MATERIALS_DIR: "/from/env"})
        assert cfg.materials_dir == Path("/from/env")

    def test_overrides_apply_without_file(self):
        cfg = load_config(None, env={ENV_BIND: "0.0.0.0:4242"})
        assert (cfg.bind_host, cfg.bind_port) == ("0.0.0.0", 4242)

    def test_empty_env_values_ignored(self):
        cfg = apply_env_overrides(AppConfig(), env={ENV_BIND: "", ENV_MATERIALS_DIR: ""})
        assert cfg == AppConfig()

    def test_bad_env_bind_rejected(self):
        with pytest.raises(ConfigError):
            load_config(None, env={ENV_BIND: "nonsense"})

    def test_other_fields_untouched(self, tmp_path):
        path = write(tmp_path, "a.toml", "[ga]\npopulation_size = 6\n")
        cfg = load_config(path, env={ENV_MATERIALS_DIR: "/x"})
        assert cfg.ga.population_size == 6
