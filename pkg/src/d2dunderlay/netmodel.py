"""System configuration, unit conversions and parameter validation.

Everything downstream works in SI linear units (meters, watts, linear SINR).
Decibel values only appear at the edges (CLI flags, reports).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    """A configuration value violates one of the model invariants."""


def db_to_linear(x_db: float, dbm: bool = False) -> float:
    """Convert decibels to a linear ratio, or dBm to watts when ``dbm`` is set."""
    value = 10.0 ** (x_db / 10.0)
    return value / 1000.0 if dbm else value


def linear_to_db(x: float, dbm: bool = False) -> float:
    """Convert a linear ratio to dB, or watts to dBm when ``dbm`` is set."""
    if not x > 0:
        raise ValueError(f"cannot express non-positive value {x!r} in dB")
    return 10.0 * math.log10(x * 1000.0 if dbm else x)


@dataclass(frozen=True)
class SystemConfig:
    """Physical and experiment parameters of one D2D-underlay scenario.

    Defaults reproduce the dense deployment of the reference simulation
    setup (lambda = 5e-5 links/m^2, two CUEs sharing resources).
    """

    cell_radius_m: float = 500.0
    d2d_max_range_m: float = 50.0
    d2d_min_range_m: float = 5.0
    density_per_m2: float = 5e-5
    pathloss_exponent: float = 4.0
    num_cues: int = 2
    cue_tx_power_w: float = 0.1
    d2d_max_power_w: float = 1e-4
    d2d_min_power_w: float = 2e-7
    noise_power_w: float = db_to_linear(-112.4, dbm=True)
    estimation_margin: float = 0.5
    edppc_mu: float = 5e-4
    edppc_gate: float = db_to_linear(-40.0, dbm=True)
    sddpc_beta_max: float = db_to_linear(18.0)
    sddpc_beta_min: float = db_to_linear(0.0)
    sddpc_max_iters: int = 100
    sddpc_tolerance: float = 0.05
    outer_margin_m: float = 250.0
    interference_limited: bool = False
    num_trials: int = 1000
    rng_seed: int = 42

    # derived quantities

    @property
    def rho_rx(self) -> float:
        """Receiver sensitivity P_max,D * R_D^-alpha (W)."""
        return self.d2d_max_power_w * self.d2d_max_range_m ** (-self.pathloss_exponent)

    @property
    def q(self) -> float:
        """Probability that a link is allocated to a given CUE."""
        return 1.0 / self.num_cues

    @property
    def expected_links(self) -> float:
        """Mean number of D2D transmitters inside the cell, E[K]."""
        return math.pi * self.density_per_m2 * self.cell_radius_m ** 2

    @property
    def expected_group_links(self) -> float:
        """Mean number of in-cell links sharing one CUE's resource, E[K']."""
        return self.expected_links / self.num_cues

    @property
    def effective_noise_w(self) -> float:
        return 0.0 if self.interference_limited else self.noise_power_w

    @property
    def deployment_radius_m(self) -> float:
        return self.cell_radius_m + self.outer_margin_m

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)


_CHECKS = (
    ("cell_radius_m must be positive", lambda c: c.cell_radius_m > 0),
    ("d2d_min_range_m must be positive", lambda c: c.d2d_min_range_m > 0),
    ("d2d_min_range_m must be below d2d_max_range_m",
     lambda c: c.d2d_min_range_m < c.d2d_max_range_m),
    ("d2d_max_range_m must not exceed cell_radius_m",
     lambda c: c.d2d_max_range_m <= c.cell_radius_m),
    ("density_per_m2 must be non-negative", lambda c: c.density_per_m2 >= 0),
    ("alpha must exceed 2", lambda c: c.pathloss_exponent > 2),
    ("num_cues must be at least 1", lambda c: c.num_cues >= 1),
    ("d2d_min_power_w must be positive", lambda c: c.d2d_min_power_w > 0),
    ("d2d_min_power_w must not exceed d2d_max_power_w",
     lambda c: c.d2d_min_power_w <= c.d2d_max_power_w),
    ("d2d_max_power_w must not exceed cue_tx_power_w",
     lambda c: c.d2d_max_power_w <= c.cue_tx_power_w),
    ("noise_power_w must be non-negative", lambda c: c.noise_power_w >= 0),
    ("estimation_margin must lie in [0, 1]", lambda c: 0 <= c.estimation_margin <= 1),
    ("edppc_mu must be positive", lambda c: c.edppc_mu > 0),
    ("edppc_gate must be non-negative", lambda c: c.edppc_gate >= 0),
    ("sddpc_beta_min must be positive", lambda c: c.sddpc_beta_min > 0),
    ("sddpc_beta_min must not exceed sddpc_beta_max",
     lambda c: c.sddpc_beta_min <= c.sddpc_beta_max),
    ("sddpc_max_iters must be at least 1", lambda c: c.sddpc_max_iters >= 1),
    ("sddpc_tolerance must lie in [0, 1)", lambda c: 0 <= c.sddpc_tolerance < 1),
    ("outer_margin_m must be non-negative", lambda c: c.outer_margin_m >= 0),
    ("num_trials must be at least 1", lambda c: c.num_trials >= 1),
    ("rho_rx must be positive", lambda c: c.rho_rx > 0),
)


def validate(config: SystemConfig) -> SystemConfig:
    """Check every invariant and return ``config`` unchanged.

    Raises
    ------
    ConfigError
        Naming the first violated invariant.
    """
    for message, check in _CHECKS:
        try:
            ok = bool(check(config))
        except (TypeError, ValueError, OverflowError):
            ok = False
        if not ok:
            raise ConfigError(message)
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"{f.name} must be finite")
    return config


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SystemConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    if kind == "bool":
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    try:
        if kind == "int":
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None


def parse_config_text(text: str, base: SystemConfig | None = None) -> SystemConfig:
    """Parse ``key = value`` lines (``#`` starts a comment) over ``base``."""
    changes = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        changes[key] = _coerce(key, raw)
    return dataclasses.replace(base or SystemConfig(), **changes)


def load_config(path: str | Path, base: SystemConfig | None = None) -> SystemConfig:
    return parse_config_text(Path(path).read_text(), base)


def format_config(config: SystemConfig) -> str:
    """Serialize ``config`` in the same ``key = value`` format."""
    lines = []
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        lines.append(f"{f.name} = {value!r}" if not isinstance(value, bool)
                     else f"{f.name} = {str(value).lower()}")
    return "\n".join(lines) + "\n"
