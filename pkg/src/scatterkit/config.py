"""Shared configuration for the CLI and the HTTP service.

One file (TOML or JSON, picked by extension) sets the optimizer defaults,
render defaults, material directory, output directory and bind address.
Relative paths in the file resolve against the file's own directory so a
config checked into a project tree works from any cwd.

Two environment variables override the file after it is read:

    SCATTERKIT_BIND           "host:port"
    SCATTERKIT_MATERIALS_DIR  path to the material archives
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

from scatterkit.errors import ConfigError, InvalidInputError
from scatterkit.ga.types import GaConfig
from scatterkit.render.core import RenderSettings

ENV_BIND = "SCATTERKIT_BIND"
ENV_MATERIALS_DIR = "SCATTERKIT_MATERIALS_DIR"

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8517


@dataclass(frozen=True)
class AppConfig:
    """Validated runtime configuration with usable defaults everywhere."""

    bind_host: str = DEFAULT_HOST
    bind_port: int = DEFAULT_PORT
    materials_dir: Path = Path("materials")
    output_dir: Path = Path("scatterkit-out")
    job_workers: int = 1
    preview_width: int = 256
    preview_height: int = 256
    ga: GaConfig = field(default_factory=GaConfig)
    render: RenderSettings = field(default_factory=RenderSettings)

    def __post_init__(self):
        if not self.bind_host:
            raise ConfigError("bind host must be non-empty")
        for name in ("bind_port", "job_workers", "preview_width", "preview_height"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if not (1 <= self.bind_port <= 65535):
            raise ConfigError(f"bind port {self.bind_port} outside [1, 65535]")
        if self.job_workers < 1:
            raise ConfigError("job_workers must be positive")
        if self.preview_width < 1 or self.preview_height < 1:
            raise ConfigError("preview dimensions must be positive")
        object.__setattr__(self, "materials_dir", Path(self.materials_dir))
        object.__setattr__(self, "output_dir", Path(self.output_dir))


def parse_bind(text: str) -> tuple[str, int]:
    """Split "host:port" from the right so IPv6-ish hosts keep their colons."""
    host, sep, port_text = text.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"bind address {text!r} is not host:port")
    try:
        port = int(port_text)
    except ValueError:
        raise ConfigError(f"bind port {port_text!r} is not an integer") from None
    if not (1 <= port <= 65535):
        raise ConfigError(f"bind port {port} outside [1, 65535]")
    return host, port


def _section(data: Mapping[str, Any], key: str, cls, label: str):
    raw = data.get(key)
    if raw is None:
        return cls()
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{label} must be a table/object, got {type(raw).__name__}")
    allowed = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"unknown {label} keys: {', '.join(unknown)}")
    try:
        return cls(**raw)
    except InvalidInputError as exc:
        raise ConfigError(f"{label}: {exc}") from exc


_TOP_KEYS = {"bind", "materials_dir", "output_dir", "job_workers", "preview", "ga", "render"}


def _from_mapping(data: Mapping[str, Any], base_dir: Path) -> AppConfig:
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    host, port = DEFAULT_HOST, DEFAULT_PORT
    if "bind" in data:
        if not isinstance(data["bind"], str):
            raise ConfigError("bind must be a \"host:port\" string")
        host, port = parse_bind(data["bind"])

    preview = data.get("preview", {})
    if not isinstance(preview, Mapping):
        raise ConfigError("preview must be a table/object")
    unknown = sorted(set(preview) - {"width", "height"})
    if unknown:
        raise ConfigError(f"unknown preview keys: {', '.join(unknown)}")

    def resolve(key: str, default: Path) -> Path:
        raw = data.get(key)
        if raw is None:
            return default
        if not isinstance(raw, str):
            raise ConfigError(f"{key} must be a string path")
        path = Path(raw)
        return path if path.is_absolute() else base_dir / path

    return AppConfig(
        bind_host=host,
        bind_port=port,
        materials_dir=resolve("materials_dir", base_dir / "materials"),
        output_dir=resolve("output_dir", base_dir / "scatterkit-out"),
        job_workers=data.get("job_workers", 1),
        preview_width=preview.get("width", 256),
        preview_height=preview.get("height", 256),
        ga=_section(data, "ga", GaConfig, "ga"),
        render=_section(data, "render", RenderSettings, "render"),
    )


def apply_env_overrides(config: AppConfig, env: Mapping[str, str] | None = None) -> AppConfig:
    env = os.environ if env is None else env
    updates: dict[str, Any] = {}
    if env.get(ENV_BIND):
        host, port = parse_bind(env[ENV_BIND])
        updates["bind_host"] = host
        updates["bind_port"] = port
    if env.get(ENV_MATERIALS_DIR):
        updates["materials_dir"] = Path(env[ENV_MATERIALS_DIR])
    return dataclasses.replace(config, **updates) if updates else config


def load_config(path: str | Path | None = None, env: Mapping[str, str] | None = None) -> AppConfig:
    """Read a config file (or start from defaults) and apply env overrides."""
    if path is None:
        return apply_env_overrides(AppConfig(), env)

    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    suffix = path.suffix.lower()
    try:
        if suffix == ".toml":
            data = tomllib.loads(blob.decode("utf-8"))
        elif suffix == ".json":
            data = json.loads(blob.decode("utf-8"))
        else:
            raise ConfigError(f"config {path.name}: expected a .toml or .json file")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"config {path.name} failed to parse: {exc}") from exc

    if not isinstance(data, dict):
        raise ConfigError(f"config {path.name}: top level must be a table/object")
    try:
        config = _from_mapping(data, path.resolve().parent)
    except (InvalidInputError, TypeError) as exc:
        raise ConfigError(f"config {path.name}: {exc}") from exc
    return apply_env_overrides(config, env)
