"""Experiment configuration: defaults, quick-mode overrides and the flat key-value file format.

A config file holds ``key = value`` lines; ``#`` starts a comment and lists
are comma separated::

    grid = 64
    n_list = 4, 8, 16
    seeds = 10
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

_SECTION = "reslab"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "all"
    grid: int = 64
    k_min: int = 0
    k_max: Optional[int] = None
    n_list: Tuple[int, ...] = (4, 8, 16)
    lambda_list: Tuple[int, ...] = (8, 16, 32, 64)
    packet_lambda_list: Tuple[int, ...] = (8, 16, 32)
    decoupling_lambda_list: Tuple[int, ...] = (8, 16, 32)
    narrow_lambda_list: Tuple[int, ...] = (16, 32, 64, 128, 256)
    bridge_lambda_list: Tuple[int, ...] = (16, 32, 64, 128, 256)
    phase_lambda_list: Tuple[int, ...] = (16, 32, 64, 128)
    cap_n_list: Tuple[int, ...] = (8, 16, 32, 64)
    delta: float = 2.0 / 3.0
    delta_list: Tuple[float, ...] = (0.55, 2.0 / 3.0, 0.72)
    box_scale: float = 4.0
    m_cut: float = 0.125
    output_projector: str = "dyadic"
    profile_exponent: float = -2.0
    seed: int = 0
    seeds: int = 10
    trials: int = 10
    frame_trials: int = 20
    samples: int = 200_000
    phase_count: int = 4000
    nullform_pairs: int = 10_000
    nt: int = 8
    out: Optional[str] = None
    format: str = "csv"
    quick: bool = False

    def __post_init__(self):
        n = self.grid
        if n < 16 or n & (n - 1):
            raise ConfigError(f"grid must be a power of two >= 16, got {n}")
        top = max(self.n_list)
        if top * 4 > n:
            raise ConfigError(f"N = {top} is not representable on a {n}^3 grid (need 4 N <= n)")
        for N in self.n_list + self.lambda_list + self.packet_lambda_list + self.cap_n_list:
            if N < 1 or N & (N - 1):
                raise ConfigError(f"scales must be powers of two, got {N}")
        if not (0.5 < self.delta < 0.75) or any(not (0.5 < d < 0.75) for d in self.delta_list):
            raise ConfigError("delta values must lie strictly in (1/2, 3/4)")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.seeds < 1 or self.trials < 5 or self.frame_trials < 10:
            raise ConfigError("need seeds >= 1, trials >= 5, frame_trials >= 10")
        if self.output_projector not in ("dyadic", "leq"):
            raise ConfigError(f"unknown output projector {self.output_projector!r}")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        """Parameter echo for reports; the output path is left out so bytes do not depend on it."""
        d = dataclasses.asdict(self)
        d.pop("out")
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


QUICK_OVERRIDES = dict(
    grid=32, n_list=(4, 8), seeds=3, lambda_list=(4, 8, 16), packet_lambda_list=(4, 8, 16),
    decoupling_lambda_list=(4, 8, 16), cap_n_list=(8, 16, 32), trials=5, frame_trials=10,
    samples=20_000, phase_count=500, quick=True,
)


def quick_config(base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    base = ExperimentConfig() if base is None else base
    return base.replace(**QUICK_OVERRIDES)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _convert(name: str, raw: str):
    default = _FIELDS[name].default
    raw = raw.strip()
    if name in ("k_max", "out"):
        if raw.lower() in ("", "none"):
            return None
        return int(raw) if name == "k_max" else raw
    if isinstance(default, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(default, tuple):
        kind = float if default and isinstance(default[0], float) else int
        return tuple(kind(_frac(v) if kind is float else v) for v in raw.split(",") if v.strip())
    if isinstance(default, float):
        return float(_frac(raw))
    if isinstance(default, int):
        return int(raw)
    return raw


def _frac(s: str) -> float:
    s = s.strip()
    if "/" in s:
        a, b = s.split("/", 1)
        return float(a) / float(b)
    return float(s)


def parse_config_text(text: str, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",),
                                   interpolation=None)
    try:
        cp.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    base = ExperimentConfig() if base is None else base
    changes = {}
    for key, raw in cp.items(_SECTION):
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            changes[key] = _convert(key, raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    if changes.get("quick") or (base.quick and "quick" not in changes):
        merged = {**QUICK_OVERRIDES, **changes}
    else:
        merged = changes
    try:
        return base.replace(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, base)
