"""Plain-text configuration files.

Grammar, one setting per line::

    # comment (also allowed after a value)
    key = value

Keys are :class:`~kerrtda.pipeline.SweepConfig` field names; dashes and
underscores are interchangeable. A ``preset = desk|full`` line selects the
base values the other keys override, wherever it appears. ``tau``, ``d`` and
``bin_stride`` accept ``auto``. Booleans accept true/false, on/off, yes/no.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError
from .pipeline import SweepConfig, config_from_mapping, preset


def parse_config_text(text: str, source: str = "<string>") -> dict:
    """Key/value pairs in file order; later duplicates win."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        values[key.replace("-", "_")] = value.strip()
    return values


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text, str(path))


def build_config(file_values: dict | None = None, overrides: dict | None = None,
                 preset_name: str | None = None) -> SweepConfig:
    """Merge preset, file values and overrides, in increasing priority.

    An explicit ``preset_name`` beats a ``preset`` key in the file.
    """
    file_values = dict(file_values or {})
    name = preset_name or file_values.pop("preset", None)
    file_values.pop("preset", None)
    base = preset(name) if name else SweepConfig()
    merged = {**file_values, **{k.replace("-", "_"): v
                                for k, v in (overrides or {}).items()}}
    return config_from_mapping(merged, base)


def dump_config(config: SweepConfig) -> str:
    """Text that :func:`parse_config_text` reads back to the same config."""
    lines = []
    for key, value in vars(config).items():
        if value is None:
            value = "auto"
        elif isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
