"""Environmental submodel: soil water, runoff, erosion and herbage.

State per representative hectare: soil moisture (mm), remaining topsoil depth
(mm), standing green herbage and standing dry herbage (kg DM/ha). One step
applies, in order: surface runoff and infiltration, actual evapotranspiration,
erosion and weathering of the soil column, drainage of water above the (new)
storage capacity, then herbage growth/senescence/decay/grazing.

The scalar step math lives in numba-compiled helpers; the public operations
call the same compiled code the batch engine runs, so there is exactly one
implementation of the physics.

Water balance is exact bookkeeping: moisture' - moisture = rain - runoff -
actual_et - drainage for every step (drainage includes water squeezed out
when erosion shrinks the storage capacity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .drivers import DriverSample
from .params import PARAM_INDEX, ParamSet

_njit = numba.njit(cache=True)

# canonical vector positions used by the compiled helpers
_I_SWC_FC = PARAM_INDEX["swc_field_capacity"]
_I_SWC_WILT = PARAM_INDEX["swc_wilting_ratio"]
_I_POROSITY = PARAM_INDEX["initial_topsoil_porosity"]
_I_ROCK = PARAM_INDEX["parent_rock_density"]
_I_PARTICLE = PARAM_INDEX["soil_particle_density"]
_I_BD_THRESH = PARAM_INDEX["bd_threshold_herbage"]
_I_ERODIBILITY = PARAM_INDEX["init_topsoil_erodibility"]
_I_WEATHERING = PARAM_INDEX["weathering_rate"]
_I_RUNOFF_DBS = PARAM_INDEX["avg_runoff_dbs"]
_I_RUNOFF_EN_EXP = PARAM_INDEX["runoff_energy_exponent"]
_I_RUNOFF_CANOPY = PARAM_INDEX["runoff_canopy_protection"]
_I_ERO_RUNOFF_EXP = PARAM_INDEX["erosion_runoff_exponent"]
_I_ERO_EN_EXP = PARAM_INDEX["erosion_energy_exponent"]
_I_ERO_CANOPY = PARAM_INDEX["erosion_canopy_protection"]
_I_HILL_LEN = PARAM_INDEX["hillslope_length"]
_I_HILL_GRAD = PARAM_INDEX["hillslope_gradient"]
_I_GH_GROWTH = PARAM_INDEX["gh_pot_growth_rate"]
_I_GH_CAP = PARAM_INDEX["gh_capacity"]
_I_GH_SEN = PARAM_INDEX["gh_senescence_rate"]
_I_DH_DECAY = PARAM_INDEX["dh_decaying_rate"]
_I_CAN_HALF = PARAM_INDEX["canopy_half_saturation"]
_I_BARE_EVAP = PARAM_INDEX["bare_soil_evap_fraction"]
_I_HERB_ENERGY = PARAM_INDEX["herbage_energy_content"]
_I_GRAZE_HALF = PARAM_INDEX["grazing_half_saturation"]
_I_EN_COEF = PARAM_INDEX["rain_energy_coef"]
_I_EN_EXP = PARAM_INDEX["rain_energy_exponent"]
_I_ENERGY_LU = PARAM_INDEX["energy_intake_per_lu"]
_I_ERO_CAL = PARAM_INDEX["erosion_rate_calibration"]
_I_RUNOFF_CAL = PARAM_INDEX["runoff_calibration"]
_I_CAN_CAL = PARAM_INDEX["canopy_cover_calibration"]
_I_INIT_DEPTH = PARAM_INDEX["initial_soil_depth"]

# reference hill-slope geometry at which the length/gradient factor is one
_HILL_LEN_REF = 80.0
_HILL_GRAD_REF = 0.12


@dataclass(frozen=True)
class EnvState:
    """Environmental stocks for one representative hectare."""

    moisture: float    # mm of stored soil water
    soil_depth: float  # mm of remaining topsoil
    green: float       # kg DM/ha standing green herbage
    dry: float         # kg DM/ha standing dry herbage


@dataclass(frozen=True)
class EnvDerived:
    """Diagnostics of one environmental step."""

    bulk_density: float    # g/cm3 at the current surface
    canopy: float          # cover fraction in [0, 1]
    runoff: float          # mm this step
    infiltration: float    # mm this step
    actual_et: float       # mm this step
    drainage: float        # mm this step
    erosion: float         # mm of soil lost this step
    growth_fraction: float
    intake: float          # kg DM/ha grazed this step


def init_state(ps: ParamSet) -> EnvState:
    """Initial stocks; initial moisture is a fraction of storage capacity."""
    depth = ps["initial_soil_depth"]
    cap = ps["swc_field_capacity"] * depth
    return EnvState(
        moisture=ps["initial_soil_moisture_frac"] * cap,
        soil_depth=depth,
        green=ps["initial_green_herbage"],
        dry=ps["initial_dry_herbage"],
    )


@_njit
def _bulk_density(soil_depth, pv):
    rho0 = pv[_I_PARTICLE] * (1.0 - pv[_I_POROSITY])
    rock = max(pv[_I_ROCK], rho0)
    d0 = max(pv[_I_INIT_DEPTH], 1e-12)
    frac = min(soil_depth / d0, 1.0)
    return rock - (rock - rho0) * frac


@_njit
def _canopy_cover(green, dry, stocking, pv):
    htot = green + dry
    cc = htot / (htot + pv[_I_CAN_HALF]) - pv[_I_CAN_CAL] * stocking
    return min(1.0, max(0.0, cc))


@_njit
def _rel_moisture(moisture, soil_depth, pv):
    cap = pv[_I_SWC_FC] * soil_depth
    wilt = pv[_I_SWC_WILT] * cap
    if cap - wilt <= 0.0:
        # no storage at all: treat as saturated so rain cannot infiltrate
        return 1.0 if soil_depth <= 0.0 else 0.0
    return min(1.0, max(0.0, (moisture - wilt) / (cap - wilt)))


@_njit
def _growth_fraction(moisture, soil_depth, pv):
    if _bulk_density(soil_depth, pv) >= pv[_I_BD_THRESH]:
        return 0.0
    d0 = max(pv[_I_INIT_DEPTH], 1e-12)
    depth_factor = min(soil_depth / d0, 1.0)
    return _rel_moisture(moisture, soil_depth, pv) * depth_factor


@_njit
def _grazed_fraction(herbage, pv):
    return herbage / (herbage + pv[_I_GRAZE_HALF])


@_njit
def _surface_runoff(rain_depth, rain_energy, moisture, soil_depth, canopy, noise, pv):
    if rain_depth <= 0.0:
        return 0.0
    coef_dry = min(1.0, pv[_I_RUNOFF_DBS] * noise)
    rel = _rel_moisture(moisture, soil_depth, pv)
    coef = coef_dry + (1.0 - coef_dry) * rel ** pv[_I_RUNOFF_CAL]
    coef *= 1.0 - pv[_I_RUNOFF_CANOPY] * canopy
    e_det = pv[_I_EN_COEF] * rain_depth ** pv[_I_EN_EXP]
    if e_det > 0.0 and rain_energy > 0.0:
        coef *= (rain_energy / e_det) ** pv[_I_RUNOFF_EN_EXP]
    return min(1.0, max(0.0, coef)) * rain_depth


@_njit
def _erosion_rate(runoff, rain_energy, canopy, bulk_density, pv):
    if runoff <= 0.0 or rain_energy <= 0.0:
        return 0.0
    ls = math.sqrt(pv[_I_HILL_LEN] / _HILL_LEN_REF) * (pv[_I_HILL_GRAD] / _HILL_GRAD_REF)
    kappa = pv[_I_ERO_CAL] * pv[_I_ERODIBILITY] * ls
    shield = 1.0 - pv[_I_ERO_CANOPY] * canopy
    return kappa * runoff ** pv[_I_ERO_RUNOFF_EXP] \
        * rain_energy ** pv[_I_ERO_EN_EXP] * shield / bulk_density


@_njit
def _env_step(moisture, soil_depth, green, dry,
              rain, energy, et0, runoff_noise, stocking, pv, dt):
    bd = _bulk_density(soil_depth, pv)
    canopy = _canopy_cover(green, dry, stocking, pv)

    # water in
    runoff = _surface_runoff(rain, energy, moisture, soil_depth, canopy,
                             runoff_noise, pv)
    infiltration = rain - runoff
    m1 = moisture + infiltration

    # water out through the vegetation and the bare surface
    ramp = _rel_moisture(m1, soil_depth, pv)
    if soil_depth <= 0.0:
        ramp = 0.0
    blend = pv[_I_BARE_EVAP] + (1.0 - pv[_I_BARE_EVAP]) * canopy
    aet = min(et0 * ramp * blend, m1)
    m2 = m1 - aet

    # soil column
    erosion = _erosion_rate(runoff, energy, canopy, bd, pv)
    new_depth = max(0.0, soil_depth + pv[_I_WEATHERING] * dt - erosion)

    # drainage of anything above the (possibly shrunk) capacity
    cap = pv[_I_SWC_FC] * new_depth
    drainage = max(0.0, m2 - cap)
    new_moisture = m2 - drainage

    # herbage: growth responds to the step's post-infiltration water
    gfrac = _growth_fraction(m1, soil_depth, pv)
    growth = pv[_I_GH_GROWTH] * gfrac * max(0.0, 1.0 - green / pv[_I_GH_CAP]) * dt
    sen = min(pv[_I_GH_SEN] * green * dt, green)
    dec = min(pv[_I_DH_DECAY] * dry * dt, dry)
    htot = green + dry
    avail = _grazed_fraction(htot, pv)
    demand = stocking * (pv[_I_ENERGY_LU] / pv[_I_HERB_ENERGY]) * avail * dt
    eat_g = min(demand, green + growth - sen)
    eat_d = min(demand - eat_g, dry + sen - dec)
    new_green = green + growth - sen - eat_g
    new_dry = dry + sen - dec - eat_d

    return (new_moisture, new_depth, new_green, new_dry,
            bd, canopy, runoff, infiltration, aet, drainage, erosion,
            gfrac, eat_g + eat_d)


# -- public operations -------------------------------------------------------

def bulk_density(soil_depth: float, ps: ParamSet) -> float:
    """Topsoil bulk density (g/cm3); rises toward the parent material as the
    column thins, anchored at particle_density * (1 - porosity) at full depth."""
    return float(_bulk_density(soil_depth, ps.values))


def canopy_cover(green: float, dry: float, stocking: float, ps: ParamSet) -> float:
    """Cover fraction: saturating in standing herbage, reduced by the bare
    area trampled open per unit of stocking."""
    return float(_canopy_cover(green, dry, stocking, ps.values))


def growth_fraction(moisture: float, soil_depth: float, ps: ParamSet) -> float:
    """Growth limitation in [0, 1].

    Zero at or below the wilting point, zero with the soil eroded away, zero
    once bulk density reaches 'BD threshold herbage'; one only at field
    capacity with the full initial soil depth.
    """
    return float(_growth_fraction(moisture, soil_depth, ps.values))


def surface_runoff(rain_depth: float, rain_energy: float, moisture: float,
                   soil_depth: float, canopy: float, ps: ParamSet,
                   noise: float = 1.0) -> float:
    """Runoff (mm) for one step, bounded by [0, rain_depth].

    On dry bare soil with noise off the coefficient equals 'Av. Runoff DBS';
    it rises with relative saturation and the storm-energy anomaly and falls
    with canopy cover.
    """
    return float(_surface_runoff(rain_depth, rain_energy, moisture, soil_depth,
                                 canopy, noise, ps.values))


def erosion_rate(runoff: float, rain_energy: float, canopy: float,
                 bd: float, ps: ParamSet) -> float:
    """Soil loss (mm per step), a power law of runoff and storm energy scaled
    by erodibility and hill-slope geometry, shielded by canopy, divided by
    bulk density to convert mass loss into depth."""
    return float(_erosion_rate(runoff, rain_energy, canopy, bd, ps.values))


def step_env(state: EnvState, drv: DriverSample, stocking: float,
             ps: ParamSet, dt: float,
             runoff_noise: float = 1.0) -> tuple[EnvState, EnvDerived]:
    """Advance the environmental stocks by one step of length dt (years)."""
    out = _env_step(state.moisture, state.soil_depth, state.green, state.dry,
                    drv.rain_depth, drv.rain_energy, drv.et0, runoff_noise,
                    stocking, ps.values, dt)
    (m, d, g, h, bd, canopy, runoff, infil, aet, drain, ero, gfrac, intake) = out
    return (EnvState(m, d, g, h),
            EnvDerived(bd, canopy, runoff, infil, aet, drain, ero, gfrac, intake))


def grazed_energy_fraction(herbage: float, ps: ParamSet) -> float:
    """Fraction of a livestock unit's energy need covered by grazing when the
    standing herbage is `herbage` kg DM/ha. Shared with the socio submodel so
    feed demand and actual grazing never disagree."""
    return float(_grazed_fraction(herbage, ps.values))
