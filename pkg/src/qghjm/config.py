"""Run configuration: a TOML (or JSON) file with a ``[model]`` block and
one block per subcommand. Command-line flags override file values.

Example::

    output = "out"
    formats = ["csv", "json"]

    [model]
    sigma = 0.2
    beta = 0.0
    curve = { kind = "flat", lambda0 = 0.05 }

    [solve]
    t_end = 80.0
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .curve import ModelParams, params_from_dict
from .errors import ConfigError

COMMANDS = ("solve", "explosion", "phase", "mc", "futures", "repro")
FORMATS = frozenset({"csv", "json", "gnuplot"})

DEFAULT_MODEL = {"sigma": 0.2, "beta": 0.0, "curve": {"kind": "flat", "lambda0": 0.05}}


@dataclass
class RunConfig:
    model: ModelParams
    command: str
    block: dict = field(default_factory=dict)
    output: Path = Path("out")
    formats: frozenset = frozenset({"csv", "json"})

    def get(self, key: str, default: Any = None) -> Any:
        return self.block.get(key, default)


def load_raw(path: Optional[str]) -> dict:
    if path is None:
        return {}
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if p.suffix.lower() == ".json":
        loaders = (json.loads,)
    elif p.suffix.lower() == ".toml":
        loaders = (tomllib.loads,)
    else:
        loaders = (tomllib.loads, json.loads)
    for load in loaders:
        try:
            return load(text)
        except (tomllib.TOMLDecodeError, json.JSONDecodeError):
            continue
    raise ConfigError(f"config {path} is neither valid TOML nor JSON")


def build_config(raw: dict, command: str, *, out: Optional[str] = None,
                 formats: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    model_spec = {**DEFAULT_MODEL, **raw.get("model", {})}
    model = params_from_dict(model_spec)
    block = dict(raw.get(command, {}))
    if not isinstance(block, dict):
        raise ConfigError(f"[{command}] must be a table")
    for k, v in (overrides or {}).items():
        if v is not None:
            block[k] = v
    output = Path(out if out is not None else raw.get("output", "out"))
    fmts = raw.get("formats", ["csv", "json"]) if formats is None else formats.split(",")
    fmts = frozenset(f.strip().lower() for f in fmts if f.strip())
    bad = fmts - FORMATS
    if bad:
        raise ConfigError(f"unknown formats {sorted(bad)}")
    return RunConfig(model, command, block, output, fmts)
