"""Run configuration for the command-line driver.

Values come from an optional INI file (section ``[plan]``) and are then
overridden by explicit command-line flags. Nothing is read from the
environment.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, field, fields
from typing import Optional

from .errors import InvalidInput

COMMANDS = ("verify", "sweep", "lift", "decompose", "envelope")
FORMATS = ("json", "csv")


@dataclass
class RunConfig:
    command: str
    target: str
    chart_params: dict = field(default_factory=dict)
    grid: int = 16
    normals: Optional[int] = None
    curves: int = 4
    curve_length: float = 0.5
    step: float = 1e-3
    tol: Optional[float] = None
    fd_step: Optional[float] = None
    seed: int = 0
    out: Optional[str] = None
    format: str = "json"
    mobius_deform: Optional[int] = None
    require: tuple = ()
    # envelope only
    radius: float = 1.0
    radius_gradient: Optional[list] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidInput(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise InvalidInput(f"unknown format {self.format!r}")
        for name in ("tol", "fd_step", "curve_length", "step"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise InvalidInput(f"{name} must be positive")
        if self.grid < 1 or self.curves < 0:
            raise InvalidInput("grid must be >= 1 and curves >= 0")
        if not 0 <= self.seed < 2**64:
            raise InvalidInput("seed must be a 64-bit unsigned integer")

    def echo(self):
        """Plain-data view written into every report (the output path is
        left out so reports do not depend on where they are written)."""
        out = {}
        for f in fields(self):
            if f.name == "out":
                continue
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


def parse_scalar(text):
    """'3' -> 3, '0.5' -> 0.5, '[1,2]' -> [1, 2], anything else stays a string."""
    try:
        return json.loads(text)
    except (json.JSONDecodeError, TypeError):
        return text


def parse_params(items):
    """['R=2', 'r=0.5'] -> {'R': 2, 'r': 0.5}."""
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise InvalidInput(f"chart parameter {item!r} is not key=value")
        out[key.strip().replace("-", "_")] = parse_scalar(value.strip())
    return out


def parse_deform_seed(text):
    """Accept '7' or 'seed=7'."""
    if text is None:
        return None
    key, sep, value = str(text).partition("=")
    raw = value if sep else key
    if sep and key.strip() != "seed":
        raise InvalidInput(f"--mobius-deform expects seed=<int>, got {text!r}")
    try:
        return int(raw)
    except ValueError as exc:
        raise InvalidInput(f"--mobius-deform seed must be an integer, got {raw!r}") from exc


_INI_TYPES = {
    "grid": int,
    "normals": int,
    "curves": int,
    "curve_length": float,
    "step": float,
    "tol": float,
    "fd_step": float,
    "seed": int,
    "out": str,
    "format": str,
    "mobius_deform": parse_deform_seed,
    "radius": float,
}


def read_ini(path):
    """Options from the [plan] section of an INI file, typed."""
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read config {path}: {exc}") from exc
    if not cp.has_section("plan"):
        return {}
    out = {}
    for key, raw in cp.items("plan"):
        key = key.replace("-", "_")
        if key not in _INI_TYPES:
            raise InvalidInput(f"unknown config key {key!r}")
        try:
            out[key] = _INI_TYPES[key](raw)
        except ValueError as exc:
            raise InvalidInput(f"bad value for {key}: {raw!r}") from exc
    return out


def build_config(args) -> RunConfig:
    """Merge INI defaults with argparse flags (flags win when given)."""
    base = read_ini(args.config) if getattr(args, "config", None) else {}
    flags = {
        "grid": args.grid,
        "normals": args.normals,
        "curves": args.curves,
        "tol": args.tol,
        "fd_step": args.fd_step,
        "seed": args.seed,
        "out": args.out,
        "format": args.format,
        "mobius_deform": parse_deform_seed(args.mobius_deform),
    }
    if args.command == "envelope":
        flags["radius"] = args.radius
        flags["radius_gradient"] = args.radius_gradient
    merged = {**base, **{k: v for k, v in flags.items() if v is not None}}
    return RunConfig(
        command=args.command,
        target=args.target,
        chart_params=parse_params(getattr(args, "param", None)),
        require=tuple(args.require or ()),
        **merged,
    )
