"""Scenario configuration: flat ``section.key = value`` files and presets.

A configuration file is plain text, one assignment per line::

    # heavier block, coarser grid
    preset = exp1
    block.mass_per_area = 350
    n_intervals = 24

``#`` starts a comment.  Keys are either top-level scenario fields or
dotted ``material.*``, ``block.*`` and ``solver.*`` fields.  An optional
``preset`` key selects the base values, otherwise ``exp1`` is used; every
other key overrides its base value.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ConfigError
from .integrator import SolverConfig
from .material import MaterialParams
from .rod import BlockParams

__all__ = [
    "ScenarioConfig",
    "PRESETS",
    "DEFAULT_PRESET",
    "load_config",
    "parse_config",
    "dump_config",
    "apply_overrides",
    "flatten",
    "from_flat",
]

# Values shared by all presets.
_BASE = {
    "rod_length": 1.0,
    "n_intervals": 40,
    "strain0": 0.115,
    "theta0": 210.0,
    "t_end": 4.0,
    "block.friction": 0.0,
    "block.stiffness": 0.0,
}

# The four experiments; the single place where their numbers live.
PRESETS: dict[str, dict[str, object]] = {
    "exp1": {"block.mass_per_area": 200.0, "block.v0": -3.0, "material.nu": 10.0},
    "exp2": {"block.mass_per_area": 500.0, "block.v0": -3.0, "material.nu": 10.0},
    "exp3-novisc": {"block.mass_per_area": 20.0, "block.v0": -1.0, "material.nu": 0.0,
                    "t_end": 20.0},
    "exp3-visc": {"block.mass_per_area": 20.0, "block.v0": -1.0, "material.nu": 20.0,
                  "t_end": 20.0},
}
DEFAULT_PRESET = "exp1"

_INT_KEYS = {"n_intervals", "output_every", "snapshot_every",
             "solver.bdf_order", "solver.max_newton_iters"}
_STR_KEYS = {"name", "output_path", "solver.jacobian_mode"}


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to run one scenario.

    ``output_every`` is in time steps, ``snapshot_every`` in recorded
    samples (0 disables field snapshots).  ``output_path`` is the output
    directory.
    """

    name: str = DEFAULT_PRESET
    material: MaterialParams = field(default_factory=MaterialParams)
    block: BlockParams = field(default_factory=BlockParams)
    rod_length: float = 1.0        # cm
    n_intervals: int = 40
    strain0: float = 0.115
    theta0: float = 210.0          # K
    t_end: float = 4.0             # ms
    solver: SolverConfig = field(default_factory=SolverConfig)
    output_every: int = 10
    snapshot_every: int = 500
    output_path: str = "out"

    def __post_init__(self):
        bad = []
        for name in ("rod_length", "strain0", "theta0", "t_end"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                bad.append(f"{name}: must be a finite number, got {value!r}")
        if not bad:
            if self.rod_length <= 0:
                bad.append(f"rod_length: must be > 0, got {self.rod_length}")
            if self.theta0 <= 0:
                bad.append(f"theta0: must be > 0, got {self.theta0}")
            if self.t_end <= 0:
                bad.append(f"t_end: must be > 0, got {self.t_end}")
        if not (isinstance(self.n_intervals, int) and self.n_intervals >= 4):
            bad.append(f"n_intervals: must be an integer >= 4, got {self.n_intervals!r}")
        if not (isinstance(self.output_every, int) and self.output_every >= 1):
            bad.append(f"output_every: must be an integer >= 1, got {self.output_every!r}")
        if not (isinstance(self.snapshot_every, int) and self.snapshot_every >= 0):
            bad.append(f"snapshot_every: must be an integer >= 0, got {self.snapshot_every!r}")
        if not self.output_path:
            bad.append("output_path: must not be empty")
        if bad:
            raise ConfigError("; ".join(bad))


_SECTIONS = {"material": MaterialParams, "block": BlockParams, "solver": SolverConfig}
_TOP_KEYS = [f.name for f in fields(ScenarioConfig) if f.name not in _SECTIONS]
KNOWN_KEYS = _TOP_KEYS + [f"{sec}.{f.name}" for sec, cls in _SECTIONS.items()
                          for f in fields(cls)]


def flatten(cfg: ScenarioConfig) -> dict[str, object]:
    """Dotted-key view of a configuration, in a fixed key order."""
    flat: dict[str, object] = {}
    for key in _TOP_KEYS:
        flat[key] = getattr(cfg, key)
    for sec in _SECTIONS:
        for name, value in asdict(getattr(cfg, sec)).items():
            flat[f"{sec}.{name}"] = value
    return flat


def from_flat(values: dict[str, object]) -> ScenarioConfig:
    """Build a configuration from dotted keys on top of the class defaults.

    Invariant violations of every section are collected into one
    ``ConfigError``.
    """
    unknown = sorted(set(values) - set(KNOWN_KEYS))
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    errors = []
    parts: dict[str, object] = {}
    for sec, cls in _SECTIONS.items():
        kwargs = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith(sec + ".")}
        try:
            parts[sec] = cls(**kwargs)
        except ConfigError as exc:
            errors.append(str(exc))
    top = {k: v for k, v in values.items() if "." not in k}
    if errors:
        # Still report top-level problems alongside the section errors.
        try:
            ScenarioConfig(**top)
        except ConfigError as exc:
            errors.append(str(exc))
        raise ConfigError("; ".join(errors))
    return ScenarioConfig(**top, **parts)


def _preset_values(name: str) -> dict[str, object]:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return {"name": name, **_BASE, **PRESETS[name]}


def _convert(key: str, raw: str, where: str):
    if key in _STR_KEYS:
        return raw
    try:
        if key in _INT_KEYS:
            return int(raw)
        return float(raw)
    except ValueError:
        kind = "an integer" if key in _INT_KEYS else "a number"
        raise ConfigError(f"{where}: {key} must be {kind}, got {raw!r}") from None


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    """Parse configuration text (see the module docstring for the format)."""
    overrides: dict[str, object] = {}
    preset = DEFAULT_PRESET
    for lineno, line in enumerate(text.splitlines(), start=1):
        where = f"{source}:{lineno}"
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if not key or not raw:
            raise ConfigError(f"{where}: empty key or value")
        if key in overrides or (key == "preset" and "preset" in overrides):
            raise ConfigError(f"{where}: duplicate key {key!r}")
        if key == "preset":
            preset = raw
            overrides[key] = raw
            continue
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        overrides[key] = _convert(key, raw, where)
    overrides.pop("preset", None)
    values = _preset_values(preset)
    values.update(overrides)
    return from_flat(values)


def apply_overrides(cfg: ScenarioConfig, items) -> ScenarioConfig:
    """Return ``cfg`` with ``"key=value"`` strings applied on top."""
    values = flatten(cfg)
    for item in items:
        where = f"override {item!r}"
        if "=" not in item:
            raise ConfigError(f"{where}: expected 'key=value'")
        key, raw = (part.strip() for part in item.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        values[key] = _convert(key, raw, where)
    return from_flat(values)


def load_config(source: str | Path) -> ScenarioConfig:
    """Return a preset by name, or parse a configuration file.

    Raises
    ------
    ConfigError
        Unknown preset, malformed line, unknown key or invalid value.
    OSError
        The file cannot be read.
    """
    source = str(source)
    if source in PRESETS:
        return from_flat(_preset_values(source))
    path = Path(source)
    if not path.exists() and path.suffix == "" and "/" not in source:
        raise ConfigError(f"unknown preset {source!r}; choose from {', '.join(PRESETS)}")
    return parse_config(path.read_text(encoding="utf-8"), source=source)


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(cfg: ScenarioConfig) -> str:
    """Serialise every field so that ``parse_config`` reproduces ``cfg``."""
    lines = [f"# scenario {cfg.name}"]
    for key, value in flatten(cfg).items():
        lines.append(f"{key} = {_format(value)}")
    return "\n".join(lines) + "\n"
