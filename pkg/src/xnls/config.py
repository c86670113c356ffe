"""Experiment configuration: schema, validation, resolution, hashing.

Configs are TOML documents with a fixed section layout.  Every key is
checked against the schema before any computation starts; unknown keys
are hard errors (a typo must never silently fall back to a default).
The resolved config (defaults filled in) can be echoed back as
canonical TOML whose sha256 identifies the run.
"""

import hashlib
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .errors import ConfigError
from .evolution import SimConfig
from .grid import Field2D, GridSpec
from .profiles import clipped_profiles, moser_field, profile_field

# section -> key -> (type, default); a None default means required
SCHEMA = {
    "grid": {
        "n": (int, 256),
        "l": (float, 40.0),
    },
    "time": {
        "dt": (float, 1e-3),
        "t_end": (float, 1.0),
    },
    "initial": {
        "family": (str, "gaussian"),
        "amplitude": (float, 0.1),
        "width": (float, 1.0),
        "alpha": (float, 8.0),
        "delta": (float, 0.25),
        "path": (str, ""),
    },
    "virial": {
        "radii": (list, [2.0, 4.0]),
    },
    "diagnostics": {
        "series_every": (int, 20),
        "interval": (list, [0.0, -1.0]),
        "pairs": (list, [[4.0, 4.0]]),
        "boundary_threshold": (float, 1e-6),
    },
    "bank": {
        "families": (list, ["gaussian", "bump", "moser", "random"]),
        "seed": (int, 0),
        "size": (int, 20),
    },
    "orlicz": {
        "variant": (str, "Ltilde"),
        "threshold": (float, 1.0),
    },
    "output": {
        "directory": (str, "run"),
        "snapshot_every": (int, 500),
    },
}

INITIAL_FAMILIES = ("gaussian", "moser", "profile", "file", "zero")


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved configuration: every schema key present with its final
    value; ``sections`` maps section name to a plain dict."""

    sections: dict

    def __getitem__(self, section):
        return self.sections[section]

    def canonical_toml(self):
        """Deterministic TOML rendering of the resolved config."""
        lines = []
        for section in SCHEMA:
            lines.append(f"[{section}]")
            for key in SCHEMA[section]:
                lines.append(f"{key} = {_toml_value(self.sections[section][key])}")
            lines.append("")
        return "\n".join(lines)

    def digest(self):
        return hashlib.sha256(self.canonical_toml().encode()).hexdigest()


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigError(f"unsupported config value type {type(v).__name__}")


def _coerce(section, key, want, value):
    where = f"[{section}] {key}"
    if want is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number, got {value!r}")
        return float(value)
    if want is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        return value
    if want is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string, got {value!r}")
        return value
    if want is list:
        if not isinstance(value, list):
            raise ConfigError(f"{where} must be an array, got {value!r}")
        return value
    raise ConfigError(f"{where}: unhandled schema type")


def resolve(raw):
    """Validate a parsed TOML mapping against the schema and fill in
    defaults; raises ConfigError naming the offending key."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table")
    for section in raw:
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(raw[section], dict):
            raise ConfigError(f"[{section}] must be a table")
        for key in raw[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    sections = {}
    for section, keys in SCHEMA.items():
        got = raw.get(section, {})
        out = {}
        for key, (want, default) in keys.items():
            if key in got:
                out[key] = _coerce(section, key, want, got[key])
            else:
                out[key] = default
        sections[section] = out
    cfg = ExperimentConfig(sections=sections)
    _semantic_checks(cfg)
    return cfg


def _semantic_checks(cfg):
    t = cfg["time"]
    if t["dt"] <= 0:
        raise ConfigError("[time] dt must be positive")
    if t["t_end"] < t["dt"]:
        raise ConfigError("[time] t_end must be at least dt")
    ini = cfg["initial"]
    if ini["family"] not in INITIAL_FAMILIES:
        raise ConfigError(
            f"[initial] family must be one of {INITIAL_FAMILIES}, "
            f"got {ini['family']!r}"
        )
    if ini["family"] == "file" and not ini["path"]:
        raise ConfigError("[initial] family 'file' needs a path")
    if cfg["orlicz"]["variant"] not in ("L", "Ltilde"):
        raise ConfigError("[orlicz] variant must be 'L' or 'Ltilde'")
    if cfg["orlicz"]["threshold"] <= 0:
        raise ConfigError("[orlicz] threshold must be positive")
    d = cfg["diagnostics"]
    if d["series_every"] < 1:
        raise ConfigError("[diagnostics] series_every must be >= 1")
    if cfg["output"]["snapshot_every"] < 1:
        raise ConfigError("[output] snapshot_every must be >= 1")
    if cfg["output"]["snapshot_every"] % d["series_every"] != 0:
        raise ConfigError(
            "[output] snapshot_every must be a multiple of "
            "[diagnostics] series_every"
        )
    if cfg["bank"]["size"] < 1:
        raise ConfigError("[bank] size must be >= 1")
    for pair in d["pairs"]:
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ConfigError("[diagnostics] pairs entries must be [q, r]")


def load(path):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from None
    return resolve(raw)


def apply_overrides(raw, overrides):
    """Apply 'section.key=value' command-line overrides to the parsed
    mapping before resolution; values are parsed as TOML scalars."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        dotted, _, text = item.partition("=")
        parts = dotted.strip().split(".")
        if len(parts) != 2:
            raise ConfigError(f"override key {dotted!r} must be section.key")
        try:
            value = tomllib.loads(f"v = {text.strip()}")["v"]
        except tomllib.TOMLDecodeError:
            raise ConfigError(f"cannot parse override value {text!r}") from None
        raw.setdefault(parts[0], {})[parts[1]] = value
    return raw


def grid_of(cfg):
    return GridSpec(cfg["grid"]["n"], cfg["grid"]["l"])


def sim_config(cfg):
    return SimConfig(
        grid=grid_of(cfg),
        dt=cfg["time"]["dt"],
        t_end=cfg["time"]["t_end"],
        virial_r=tuple(float(r) for r in cfg["virial"]["radii"]),
        output_every=cfg["output"]["snapshot_every"],
        series_every=cfg["diagnostics"]["series_every"],
        boundary_threshold=cfg["diagnostics"]["boundary_threshold"],
    )


def initial_field(cfg):
    """Build the initial data named by [initial] on the config grid."""
    g = grid_of(cfg)
    ini = cfg["initial"]
    family = ini["family"]
    if family == "zero":
        return Field2D.zero(g)
    if family == "gaussian":
        c, w = ini["amplitude"], ini["width"]
        return Field2D.from_function(g, lambda x, y: c * np.exp(-(x**2 + y**2) / w**2))
    if family == "moser":
        return ini["amplitude"] * moser_field(ini["alpha"], g)
    if family == "profile":
        # first clipped profile (ramp to 1 - delta, then plateau)
        psi1, _ = clipped_profiles(ini["delta"])
        return ini["amplitude"] * profile_field(psi1, ini["alpha"], g)
    if family == "file":
        from .rundir import read_snapshot

        t, u = read_snapshot(ini["path"])
        if u.grid != g:
            raise ConfigError(
                f"snapshot grid ({u.grid.n}, {u.grid.l}) differs from "
                f"[grid] ({g.n}, {g.l})"
            )
        return u
    raise ConfigError(f"unknown initial family {family!r}")
