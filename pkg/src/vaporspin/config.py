"""Flat key=value run configuration.

Config files are plain text: one ``key = value`` per line, ``#`` comments,
blank lines ignored.  Every key has a typed default in :class:`RunConfig`;
unknown or duplicated keys are hard errors with the offending line number,
because a silently ignored typo in a physics parameter is the worst failure
mode a tool like this can have.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

from .cell_rates import CellConfig

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config"]

PUMP_AXES = ("x", "y", "z")

# keys that a sweep may vary (numeric scalars only)
SWEEPABLE = (
    "radius_cm",
    "temperature_c",
    "p_he_torr",
    "p_n2_torr",
    "s_magnitude",
    "r_op_over_gamma_se",
    "a_hfs_over_gamma_se",
    "t_end_over_t_se",
)


class ConfigError(ValueError):
    """Malformed, unknown, duplicate, or out-of-range configuration input."""


@dataclass
class RunConfig:
    """Every knob of a single run, with physical defaults.

    Rates are specified relative to the spin-exchange rate computed from the
    cell parameters, so one config scales coherently with temperature.
    """

    # cell geometry and fill
    radius_cm: float = 1.5
    temperature_c: float = 120.0
    p_he_torr: float = 200.0
    p_n2_torr: float = 75.0
    # collision cross sections (cm^2) and diffusion constants (cm^2/s)
    sigma_se_rbrb: float = 1.9e-14
    sigma_sd_rbrb: float = 9.0e-18
    sigma_sd_rbhe: float = 8.7e-24
    sigma_sd_rbn2: float = 1.0e-22
    d0_he_cm2_s: float = 0.35
    d0_n2_cm2_s: float = 0.16
    d_temp_exponent: float = 0.0
    include_wall: bool = True
    # spin system and drive
    nuclear_spin: float = 1.5
    pump_axis: str = "z"
    s_magnitude: float = 0.5
    r_op_over_gamma_se: float = 1.0
    a_hfs_over_gamma_se: float = 100.0
    # integration controls: by default run until the state actually settles
    # (drive at R_op ~ G_SE needs ~70 spin-exchange times), holding a hard cap
    t_end_over_t_se: float = 150.0
    dt_steps_per_rate: float = 50.0
    sample_every: int = 10
    stop_at_steady: bool = True
    steady_tol: float = 1e-7
    # outputs and sweeps
    out_dir: str = "out"
    sweep_variable: str = ""
    sweep_values: tuple[float, ...] = ()

    def validate(self) -> "RunConfig":
        try:
            # geometry/fill bounds live on CellConfig; surface them as config errors
            CellConfig(
                radius_cm=self.radius_cm,
                temperature_c=self.temperature_c,
                p_he_torr=self.p_he_torr,
                p_n2_torr=self.p_n2_torr,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.pump_axis not in PUMP_AXES:
            raise ConfigError(f"pump_axis must be one of {PUMP_AXES}, got {self.pump_axis!r}")
        if not 0.0 <= self.s_magnitude <= 1.0:
            raise ConfigError(f"s_magnitude must be in [0, 1], got {self.s_magnitude}")
        if self.r_op_over_gamma_se < 0.0:
            raise ConfigError("r_op_over_gamma_se must be >= 0")
        if self.a_hfs_over_gamma_se <= 0.0:
            raise ConfigError("a_hfs_over_gamma_se must be > 0")
        if self.t_end_over_t_se <= 0.0:
            raise ConfigError("t_end_over_t_se must be > 0")
        if self.dt_steps_per_rate < 1.0:
            raise ConfigError("dt_steps_per_rate must be >= 1")
        if self.sample_every < 1:
            raise ConfigError("sample_every must be >= 1")
        if self.steady_tol <= 0.0:
            raise ConfigError("steady_tol must be > 0")
        two_i = 2.0 * self.nuclear_spin
        if self.nuclear_spin < 0.5 or abs(two_i - round(two_i)) > 1e-9:
            raise ConfigError(f"nuclear_spin must be a half-integer >= 1/2, got {self.nuclear_spin}")
        if self.sweep_variable and self.sweep_variable not in SWEEPABLE:
            raise ConfigError(
                f"sweep_variable {self.sweep_variable!r} not sweepable; choose from {SWEEPABLE}"
            )
        if self.sweep_variable and not self.sweep_values:
            raise ConfigError("sweep_variable set but sweep_values is empty")
        if self.sweep_values and not self.sweep_variable:
            raise ConfigError("sweep_values set but sweep_variable is empty")
        return self


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(key: str, raw: str, lineno: int, source: str):
    f = _FIELDS[key]
    err = lambda msg: ConfigError(f"{source}:{lineno}: {msg}")  # noqa: E731
    if key == "sweep_values":
        try:
            return tuple(float(tok) for tok in raw.split(",") if tok.strip())
        except ValueError:
            raise err(f"sweep_values must be comma-separated numbers, got {raw!r}") from None
    if f.type == "bool":
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise err(f"{key} must be a boolean, got {raw!r}")
    if f.type == "int":
        try:
            return int(raw)
        except ValueError:
            raise err(f"{key} must be an integer, got {raw!r}") from None
    if f.type == "float":
        try:
            value = float(raw)
        except ValueError:
            raise err(f"{key} must be a number, got {raw!r}") from None
        if not math.isfinite(value):
            raise err(f"{key} must be finite, got {raw!r}")
        return value
    return raw


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse config text into a validated :class:`RunConfig`."""
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _FIELDS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if raw == "":
            raise ConfigError(f"{source}:{lineno}: empty value for {key!r}")
        values[key] = _coerce(key, raw, lineno, source)
    try:
        return RunConfig(**values).validate()
    except ConfigError as exc:
        # re-tag range errors with the file they came from
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return parse_config(text, source=str(path))
