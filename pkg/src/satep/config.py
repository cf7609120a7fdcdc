"""Plain-text key=value configuration.

Precedence, lowest to highest: built-in defaults, config file, environment
variables (SATEP_<KEY>), command-line overrides. Every key is a flat field
on Config so that parse(render(config)) round-trips exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from satep.errors import ConfigError

ENV_PREFIX = "SATEP_"
MAIL_TRANSPORTS = ("file_sink", "smtp")


@dataclass(frozen=True)
class Config:
    listen_address: str = "127.0.0.1:8088"
    data_root: str = "data"
    database_location: str = "data/satep.db"
    mail_transport: str = "file_sink"
    mail_directory: str = "data/mail"
    smtp_host: str = "localhost"
    smtp_port: int = 25
    smtp_user: str = ""
    smtp_secret: str = ""
    session_ttl_hours: int = 12
    max_upload_mib: int = 50
    final_mc: int = 20
    final_gf: int = 10
    lecture_mc: int = 5
    lecture_gf: int = 5
    rng_seed: int | None = None

    def __post_init__(self):
        self._split_listen()
        if self.mail_transport not in MAIL_TRANSPORTS:
            raise ConfigError(
                f"mail_transport must be one of {', '.join(MAIL_TRANSPORTS)},"
                f" not {self.mail_transport!r}"
            )
        if not (1 <= self.smtp_port <= 65535):
            raise ConfigError(f"smtp_port {self.smtp_port} outside 1..65535")
        if self.session_ttl_hours < 1:
            raise ConfigError("session_ttl_hours must be at least 1")
        if self.max_upload_mib < 1:
            raise ConfigError("max_upload_mib must be at least 1")
        for name in ("final_mc", "final_gf", "lecture_mc", "lecture_gf"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must not be negative")
        for name in ("data_root", "database_location", "mail_directory"):
            if not getattr(self, name).strip():
                raise ConfigError(f"{name} must not be empty")

    def _split_listen(self) -> tuple[str, int]:
        host, sep, port_text = self.listen_address.rpartition(":")
        if not sep or not host:
            raise ConfigError(
                f"listen_address must look like host:port, not {self.listen_address!r}"
            )
        try:
            port = int(port_text)
        except ValueError:
            raise ConfigError(f"listen port {port_text!r} is not a number") from None
        if not (1 <= port <= 65535):
            raise ConfigError(f"listen port {port} outside 1..65535")
        return host, port

    @property
    def listen_host(self) -> str:
        return self._split_listen()[0]

    @property
    def listen_port(self) -> int:
        return self._split_listen()[1]

    @property
    def max_upload_bytes(self) -> int:
        return self.max_upload_mib * 1024 * 1024


_FIELDS = {f.name: f for f in dataclasses.fields(Config)}


def _coerce(key: str, raw: str):
    field = _FIELDS[key]
    if field.type == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, not {raw!r}") from None
    if key == "rng_seed":
        if raw.strip() == "":
            return None
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"rng_seed must be an integer, not {raw!r}") from None
    return raw


def parse_config(text: str) -> Config:
    """Parse key=value text; '#' starts a comment, later keys win."""
    return Config(**_parse_pairs(text, origin="config"))


def _parse_pairs(text: str, origin: str) -> dict:
    values = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, raw = stripped.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{origin} line {number}: expected key = value, got {line!r}")
        if key not in _FIELDS:
            raise ConfigError(f"{origin} line {number}: unknown key {key!r}")
        values[key] = _coerce(key, raw.strip())
    return values


def render_config(config: Config) -> str:
    """Emit the key=value form; rng_seed is omitted while unset."""
    lines = []
    for name in _FIELDS:
        value = getattr(config, name)
        if name == "rng_seed" and value is None:
            continue
        lines.append(f"{name} = {value}")
    return "\n".join(lines) + "\n"


def load_config(
    path: str | Path | None = None,
    *,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, str] | None = None,
    allow_deterministic: bool = False,
) -> Config:
    """Resolve the effective configuration from file, environment, and flags."""
    values: dict = {}
    if path is not None:
        file_path = Path(path)
        if not file_path.is_file():
            raise ConfigError(f"config file {file_path} does not exist")
        values.update(_parse_pairs(file_path.read_text(encoding="utf-8"), origin=str(file_path)))
    for key in _FIELDS:
        raw = (env or {}).get(ENV_PREFIX + key.upper())
        if raw is not None:
            values[key] = _coerce(key, raw)
    for key, raw in (overrides or {}).items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown config override {key!r}")
        values[key] = _coerce(key, raw) if isinstance(raw, str) else raw
    config = Config(**values)
    if config.rng_seed is not None and not allow_deterministic:
        raise ConfigError(
            "rng_seed makes the platform predictable; pass --allow-deterministic"
            " to confirm this is a controlled test run"
        )
    return config
