"""Collision and wall rates for a buffer-gas alkali vapor cell.

Everything in this module is classical gas kinetics in CGS units: number
densities in cm^-3, velocities in cm/s, cross sections in cm^2, rates in
1/s.  The chain is

    vapor pressure (fit)  ->  Rb density
    Maxwell-Boltzmann     ->  mean relative speeds per collision pair
    n * sigma * v         ->  spin-exchange and spin-destruction rates
    diffusion to the wall ->  lowest-mode wall relaxation rate

The defaults describe a spherical cell of radius 1.5 cm at 120 C filled
with 200 Torr of He and 75 Torr of N2 (pressures at operating temperature).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from . import constants as c

__all__ = [
    "CrossSections",
    "DiffusionParams",
    "CellConfig",
    "RateSet",
    "rb_vapor_pressure_torr",
    "rb_number_density_cm3",
    "buffer_number_density_cm3",
    "mean_relative_velocity_cm_s",
    "diffusion_coefficient_cm2_s",
    "wall_relaxation_rate",
    "compute_rates",
]

TEMPERATURE_MIN_C = 20.0
TEMPERATURE_MAX_C = 200.0


@dataclass(frozen=True)
class CrossSections:
    """Collision cross sections in cm^2.

    Spin exchange is Rb-Rb only; spin destruction has an Rb-Rb channel and
    much weaker buffer-gas channels (He is the gentlest partner, which is
    why it is the majority buffer gas).
    """

    se_rbrb: float = 1.9e-14
    sd_rbrb: float = 9.0e-18
    sd_rbhe: float = 8.7e-24
    sd_rbn2: float = 1.0e-22


@dataclass(frozen=True)
class DiffusionParams:
    """Rb diffusion coefficients in each buffer gas, cm^2/s at 760 Torr.

    ``temp_exponent`` optionally rescales both by (T / 273.15 K)^p; the
    default 0 uses the tabulated values as-is.
    """

    d0_he: float = 0.35
    d0_n2: float = 0.16
    temp_exponent: float = 0.0


@dataclass(frozen=True)
class CellConfig:
    """Geometry, temperature and fill pressures of one vapor cell."""

    radius_cm: float = 1.5
    temperature_c: float = 120.0
    p_he_torr: float = 200.0
    p_n2_torr: float = 75.0
    cross_sections: CrossSections = field(default_factory=CrossSections)
    diffusion: DiffusionParams = field(default_factory=DiffusionParams)

    def __post_init__(self):
        if not (self.radius_cm > 0.0 and math.isfinite(self.radius_cm)):
            raise ValueError(f"cell radius must be positive, got {self.radius_cm} cm")
        if not (TEMPERATURE_MIN_C <= self.temperature_c <= TEMPERATURE_MAX_C):
            raise ValueError(
                f"temperature {self.temperature_c} C outside the validity window "
                f"[{TEMPERATURE_MIN_C:.0f}, {TEMPERATURE_MAX_C:.0f}] C of the "
                "vapor-pressure fit"
            )
        for name in ("p_he_torr", "p_n2_torr"):
            p = getattr(self, name)
            if not (p >= 0.0 and math.isfinite(p)):
                raise ValueError(f"{name} must be >= 0 Torr, got {p}")

    @property
    def temperature_k(self) -> float:
        return self.temperature_c + c.CELSIUS_OFFSET

    def with_radius(self, radius_cm: float) -> "CellConfig":
        return replace(self, radius_cm=radius_cm)


def rb_vapor_pressure_torr(t_k: float) -> float:
    """Saturated Rb vapor pressure in Torr (Nesmeyanov-type fit).

    Two branches joined at the melting point, each of the form
    log10 P = A + B/T + C*T + D*log10 T with T in kelvin.
    """
    if t_k <= 0.0:
        raise ValueError("temperature must be positive")
    if t_k < c.RB_MELT_K:
        log10_p = -94.04826 - 1961.258 / t_k - 0.03771687 * t_k + 42.57526 * math.log10(t_k)
    else:
        log10_p = 15.88253 - 4529.635 / t_k + 0.00058663 * t_k - 2.99138 * math.log10(t_k)
    return 10.0 ** log10_p


def rb_number_density_cm3(temperature_c: float) -> float:
    """Saturated Rb number density in cm^-3 via the ideal gas law."""
    t_k = temperature_c + c.CELSIUS_OFFSET
    p_ba = rb_vapor_pressure_torr(t_k) * c.TORR_BA
    return p_ba / (c.K_B_ERG * t_k)


def buffer_number_density_cm3(p_torr: float, t_k: float) -> float:
    """Buffer-gas number density in cm^-3 for a pressure quoted at T."""
    return p_torr * c.TORR_BA / (c.K_B_ERG * t_k)


def mean_relative_velocity_cm_s(t_k: float, m1_amu: float, m2_amu: float) -> float:
    """Mean relative thermal speed sqrt(8 kT / pi mu) of a collision pair, cm/s."""
    mu_g = (m1_amu * m2_amu) / (m1_amu + m2_amu) * c.AMU_G
    return math.sqrt(8.0 * c.K_B_ERG * t_k / (math.pi * mu_g))


def diffusion_coefficient_cm2_s(cell: CellConfig) -> float:
    """Effective Rb diffusion coefficient in the buffer mix, cm^2/s.

    Each tabulated coefficient is scaled inversely with its gas's pressure
    in units of 760 Torr, and the two dilutions are summed.  A cell with no
    buffer gas at all has no diffusion bottleneck to speak of, so that is
    rejected rather than extrapolated.
    """
    if cell.p_he_torr <= 0.0 and cell.p_n2_torr <= 0.0:
        raise ValueError("at least one buffer gas pressure must be positive")
    dp = cell.diffusion
    scale = (cell.temperature_k / c.T_REF_K) ** dp.temp_exponent if dp.temp_exponent else 1.0
    d = 0.0
    if cell.p_he_torr > 0.0:
        d += dp.d0_he * scale / (cell.p_he_torr / c.P_REF_TORR)
    if cell.p_n2_torr > 0.0:
        d += dp.d0_n2 * scale / (cell.p_n2_torr / c.P_REF_TORR)
    return d


def wall_relaxation_rate(cell: CellConfig) -> float:
    """Lowest diffusion-mode relaxation rate (pi/R)^2 * D for a sphere, 1/s."""
    d = diffusion_coefficient_cm2_s(cell)
    return (math.pi / cell.radius_cm) ** 2 * d


@dataclass(frozen=True)
class RateSet:
    """All rates (1/s) and intermediate kinetic quantities for one cell."""

    cell: CellConfig
    vapor_pressure_torr: float
    n_rb_cm3: float
    n_he_cm3: float
    n_n2_cm3: float
    v_rbrb_cm_s: float
    v_rbhe_cm_s: float
    v_rbn2_cm_s: float
    d_cm2_s: float
    gamma_se: float
    gamma_sd_rbrb: float
    gamma_sd_rbhe: float
    gamma_sd_rbn2: float
    gamma_wall: float
    include_wall: bool

    @property
    def gamma_sd(self) -> float:
        """Total electron spin-destruction rate, 1/s."""
        total = self.gamma_sd_rbrb + self.gamma_sd_rbhe + self.gamma_sd_rbn2
        if self.include_wall:
            total += self.gamma_wall
        return total

    @property
    def se_to_sd_ratio(self) -> float:
        return self.gamma_se / self.gamma_sd


def compute_rates(cell: CellConfig, include_wall: bool = True) -> RateSet:
    """Full rate budget for a cell.

    ``include_wall=False`` drops the diffusion-to-wall channel from the
    total (useful for isolating bulk collision physics); the wall rate
    itself is still reported.
    """
    t_k = cell.temperature_k
    xs = cell.cross_sections
    p_rb = rb_vapor_pressure_torr(t_k)
    n_rb = p_rb * c.TORR_BA / (c.K_B_ERG * t_k)
    n_he = buffer_number_density_cm3(cell.p_he_torr, t_k)
    n_n2 = buffer_number_density_cm3(cell.p_n2_torr, t_k)
    v_rbrb = mean_relative_velocity_cm_s(t_k, c.M_RB87, c.M_RB87)
    v_rbhe = mean_relative_velocity_cm_s(t_k, c.M_RB87, c.M_HE4)
    v_rbn2 = mean_relative_velocity_cm_s(t_k, c.M_RB87, c.M_N2)
    return RateSet(
        cell=cell,
        vapor_pressure_torr=p_rb,
        n_rb_cm3=n_rb,
        n_he_cm3=n_he,
        n_n2_cm3=n_n2,
        v_rbrb_cm_s=v_rbrb,
        v_rbhe_cm_s=v_rbhe,
        v_rbn2_cm_s=v_rbn2,
        d_cm2_s=diffusion_coefficient_cm2_s(cell),
        gamma_se=n_rb * xs.se_rbrb * v_rbrb,
        gamma_sd_rbrb=n_rb * xs.sd_rbrb * v_rbrb,
        gamma_sd_rbhe=n_he * xs.sd_rbhe * v_rbhe,
        gamma_sd_rbn2=n_n2 * xs.sd_rbn2 * v_rbn2,
        gamma_wall=wall_relaxation_rate(cell),
        include_wall=include_wall,
    )
