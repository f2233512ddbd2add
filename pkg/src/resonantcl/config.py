"""INI run/sweep configuration files.

Every section and key is whitelisted; anything else raises
:class:`~resonantcl.errors.ConfigFileError` so that typos never pass silently.
See the README for the meaning of each key.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import ConfigFileError

__all__ = ["SCHEMA", "RunFile", "parse_config", "load_config", "parse_floats", "parse_blocks"]

_FIELD_KEYS = {"kind", "background", "blocks", "region", "width", "low", "high", "axis",
               "center", "radius", "height"}

SCHEMA = {
    "scenario": {"name", "notes", "role", "expected_failures"},
    "model": {"family", "params", "state_bounds", "coeff_bounds"},
    "domain": {"x_min", "x_max", "y_min", "y_max"},
    "coeff_k": _FIELD_KEYS,
    "coeff_l": _FIELD_KEYS,
    "initial": _FIELD_KEYS,
    "solver": {"nx", "epsilon", "balance_c", "t_end", "cfl_safety", "output_times",
               "timestep_rule", "mollifier_profile", "track_psi"},
    "sweep": {"eps0", "n_levels", "grid_ratio", "compare_fractions", "monitor_samples",
              "window", "test_centers", "test_radius", "energy_slack"},
    "output": {"directory"},
}
REQUIRED = {"scenario": {"name"}, "model": {"family"}, "domain": {"x_min", "x_max", "y_min", "y_max"},
            "initial": {"kind"}}


def parse_floats(text: str, n: Optional[int] = None, where: str = "") -> tuple[float, ...]:
    """Comma- or whitespace-separated reals."""
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigFileError(f"{where}: expected numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise ConfigFileError(f"{where}: expected {n} numbers, got {len(vals)}")
    return vals


def parse_blocks(text: str, where: str = "") -> tuple[tuple[float, ...], ...]:
    """One ``x0 x1 y0 y1 value`` rectangle per non-empty line."""
    out = []
    for line in text.strip().splitlines():
        line = line.split("#")[0].strip()
        if line:
            out.append(parse_floats(line, 5, where))
    return tuple(out)


@dataclass
class RunFile:
    """A parsed configuration: raw string sections, validated against :data:`SCHEMA`."""

    sections: dict
    path: Optional[Path] = None

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    def float(self, section: str, key: str, default=None):
        v = self.get(section, key)
        if v is None:
            return default
        return parse_floats(v, 1, f"[{section}] {key}")[0]

    def int(self, section: str, key: str, default=None):
        v = self.float(section, key)
        if v is None:
            return default
        if v != int(v):
            raise ConfigFileError(f"[{section}] {key}: expected an integer, got {v}")
        return int(v)

    def floats(self, section: str, key: str, n=None, default=None):
        v = self.get(section, key)
        return default if v is None else parse_floats(v, n, f"[{section}] {key}")

    def bool(self, section: str, key: str, default=False):
        v = self.get(section, key)
        if v is None:
            return default
        low = v.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigFileError(f"[{section}] {key}: expected a boolean, got {v!r}")


def parse_config(text: str, path: Optional[Path] = None) -> RunFile:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    try:
        cp.read_string(text, source=str(path or "<string>"))
    except configparser.Error as exc:
        raise ConfigFileError(str(exc)) from None
    sections = {}
    for name in cp.sections():
        if name not in SCHEMA:
            raise ConfigFileError(f"unknown section [{name}]; known: {sorted(SCHEMA)}")
        keys = dict(cp.items(name))
        unknown = set(keys) - SCHEMA[name]
        if unknown:
            raise ConfigFileError(f"unknown key(s) {sorted(unknown)} in [{name}]")
        sections[name] = keys
    for name, need in REQUIRED.items():
        missing = need - set(sections.get(name, {}))
        if missing:
            raise ConfigFileError(f"missing key(s) {sorted(missing)} in [{name}]")
    return RunFile(sections, path)


def load_config(path) -> RunFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigFileError(f"cannot read {path}: {exc}") from None
    return parse_config(text, path)
