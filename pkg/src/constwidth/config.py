"""Job configuration: per-command defaults, file loading with line diagnostics, effective-config output."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigurationError

COMMANDS = ("construct", "family", "rstar", "planar", "reuleaux", "embed-arc", "complete", "verify")

_COMMON = {"report": None, "rng_seed": 0}

DEFAULTS = {
    "construct": {"seed": "cos3theta", "eps": 0.0625, "dim": None, "r": None, "r_factor": 1.1,
                  "samples": None, "scheme": None, "width_directions": 2048, "tol": 1e-6,
                  "override": False, "out": None},
    "family": {"seed": "cos3theta", "eps": 0.0625, "dim": None, "r": None, "samples": None,
               "scheme": None, "lambdas": None, "steps": 20, "out": None},
    "rstar": {"seed": "cos3theta", "eps": 0.0625, "dim": None, "start": 256, "cap": 65536, "rtol": 1e-4},
    "planar": {"profile": {"kind": "trig", "cos": {"3": -1.0}}, "r": 1.0, "steps": 4096, "tol": 1e-6,
               "out": None},
    "reuleaux": {"k": 1, "r": 1.0, "steps": 4096, "tol": 1e-6, "out": None},
    "embed-arc": {"rho": 1.0, "theta_star": math.pi / 3, "r": 1.0, "steps": 4096, "tol": 1e-6,
                  "out": None, "profile_out": None},
    "complete": {"in": None, "r": None, "norm": "euclidean", "h": None, "budget": 10**7, "tol": 0.0,
                 "out": None},
    "verify": {"in": None, "r": None, "tol": 1e-6, "directions": None},
}

REQUIRED = {"complete": ("in", "r"), "verify": ("in", "r")}


def defaults_for(command: str) -> dict:
    if command not in DEFAULTS:
        raise ConfigurationError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    return {**_COMMON, **DEFAULTS[command]}


@dataclass
class JobConfig:
    command: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        known = defaults_for(self.command)
        unknown = sorted(set(self.options) - set(known))
        if unknown:
            raise ConfigurationError(f"unknown key(s) for {self.command}: {', '.join(unknown)}")
        self.options = {**known, **self.options}

    def __getitem__(self, key):
        return self.options[key]

    def validate(self) -> "JobConfig":
        for key in REQUIRED.get(self.command, ()):
            if self.options.get(key) is None:
                raise ConfigurationError(f"{self.command}: '{key}' is required")
        return self

    def effective(self) -> dict:
        """All keys with defaults filled in; feeding this back reproduces the job."""
        return {"command": self.command, **{k: self.options[k] for k in sorted(self.options)}}

    def dump(self) -> str:
        return yaml.safe_dump(self.effective(), sort_keys=False, default_flow_style=False)


def _key_lines(text: str) -> dict:
    """Top-level key -> 1-based line number, from the YAML node tree."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value if isinstance(k, yaml.ScalarNode)}


def parse_config_text(text: str, source: str = "<config>", command: str | None = None) -> JobConfig:
    """Parse YAML (or JSON) text into a JobConfig.

    Errors name the source, line and offending key.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark else source
        raise ConfigurationError(f"{where}: {getattr(exc, 'problem', None) or exc}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{source}:1: top level must be a mapping")
    lines = _key_lines(text)
    data = dict(data)
    file_cmd = data.pop("command", None)
    if command is not None and file_cmd is not None and file_cmd != command:
        raise ConfigurationError(
            f"{source}:{lines.get('command', 1)}: field 'command': file says {file_cmd!r}, "
            f"command line says {command!r}")
    cmd = command or file_cmd
    if cmd is None:
        raise ConfigurationError(f"{source}: no command given")
    if cmd not in DEFAULTS:
        raise ConfigurationError(f"{source}:{lines.get('command', 1)}: field 'command': unknown command {cmd!r}")
    known = defaults_for(cmd)
    for key in data:
        if key not in known:
            raise ConfigurationError(f"{source}:{lines.get(key, '?')}: field '{key}': unknown key for {cmd}")
    return JobConfig(cmd, data)


def load_config(path, command: str | None = None) -> JobConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigurationError(f"{p}: {exc.strerror}") from None
    return parse_config_text(text, str(p), command)


def parse_inline(value: str, what: str):
    """A JSON/YAML literal, or the contents of the file it names."""
    p = Path(value)
    text = p.read_text() if p.suffix.lower() in (".json", ".yaml", ".yml") and p.exists() else value
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{what}: cannot parse {value!r} ({exc})") from None


def to_jsonable(cfg: JobConfig) -> dict:
    return json.loads(json.dumps(cfg.effective()))
