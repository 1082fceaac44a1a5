"""Exogenous drivers: stochastic weather and cyclical prices and costs.

Weather is generated per model step: wet/dry occurrence is Bernoulli with a
probability modulated by an annual cycle and a slow drought cycle, wet-step
depth is lognormal (moment-matched to the configured mean and standard
deviation), and storm kinetic energy follows a power law of depth with
unit-mean lognormal noise. Reference evapotranspiration carries its own annual
cycle and noise. Economic series are deterministic sinusoidal cycles around
their mean levels.

All randomness is counter-based (see rng): each step owns a fixed block of
counters, one slot per noise channel, so a run's weather is a pure function of
its stream key whatever order values are drawn in.

Time t is in years; per-step quantities (rain depth, energy, ET_o) are
amounts for one step, not rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from . import rng as _rng
from .params import PARAM_INDEX, ParamSet

_njit = numba.njit(cache=True)

TWO_PI = 2.0 * math.pi

_I_RAIN_PROB = PARAM_INDEX["avg_rain_probability"]
_I_RAIN_SEAS = PARAM_INDEX["rainfall_seasonality"]
_I_RAIN_PHASE = PARAM_INDEX["rain_season_phase"]
_I_RAIN_MEAN = PARAM_INDEX["avg_rain_depth"]
_I_RAIN_SD = PARAM_INDEX["sd_rain_depth"]
_I_EN_COEF = PARAM_INDEX["rain_energy_coef"]
_I_EN_EXP = PARAM_INDEX["rain_energy_exponent"]
_I_EN_CV = PARAM_INDEX["cv_rain_energy"]
_I_DR_SEV = PARAM_INDEX["drought_severity"]
_I_DR_PERIOD = PARAM_INDEX["drought_return_period"]
_I_DR_PHASE = PARAM_INDEX["drought_phase"]
_I_DR_SHARP = PARAM_INDEX["drought_sharpness"]
_I_ET0_MEAN = PARAM_INDEX["avg_et0"]
_I_ET0_CV = PARAM_INDEX["cv_et0"]
_I_ET0_SEAS = PARAM_INDEX["et0_seasonality"]
_I_ET0_PHASE = PARAM_INDEX["et0_season_phase"]
_I_RUNOFF_CV = PARAM_INDEX["cv_runoff_dbs"]
_I_WOP = PARAM_INDEX["avg_wop_level"]
_I_WOFP = PARAM_INDEX["avg_wofp_level"]
_I_WSFP = PARAM_INDEX["avg_wsfp_level"]
_I_WBFP = PARAM_INDEX["avg_wbfp_level"]
_I_OC = PARAM_INDEX["avg_oc_level"]
_I_OPC = PARAM_INDEX["avg_opc_level"]
_I_AMP = PARAM_INDEX["amplitude_price_cycles"]
_I_T_WOP = PARAM_INDEX["period_wop_cycles"]
_I_T_OC = PARAM_INDEX["period_oc_cycles"]
_I_PH_PRICE = PARAM_INDEX["price_cycle_phase"]
_I_PH_OC = PARAM_INDEX["oc_cycle_phase"]

# per-step counter slots
SLOTS_PER_STEP = 6
SLOT_WET = 0
SLOT_DEPTH = 1
SLOT_ENERGY = 2
SLOT_ET0 = 3
SLOT_RUNOFF = 4  # consumed by the environmental submodel

# fixed offsets separating the individual price/cost series on their cycles
PHASE_WOFP = 0.9
PHASE_WSFP = 2.1
PHASE_WBFP = 3.3
PHASE_OPC = 1.1

_PRICE_FLOOR = 1e-9


@_njit
def _drought_factor(t, pv):
    w = 0.5 + 0.5 * math.sin(TWO_PI * t / pv[_I_DR_PERIOD] + pv[_I_DR_PHASE])
    return 1.0 - pv[_I_DR_SEV] * w ** pv[_I_DR_SHARP]


@_njit
def _rain_probability(t, pv):
    season = 1.0 + pv[_I_RAIN_SEAS] * math.sin(TWO_PI * t + pv[_I_RAIN_PHASE])
    p = pv[_I_RAIN_PROB] * season * _drought_factor(t, pv)
    return min(1.0, max(0.0, p))


@_njit
def _unit_lognormal(z, cv):
    # unit-mean lognormal factor with the given coefficient of variation
    if cv <= 0.0:
        return 1.0
    s2 = math.log(1.0 + cv * cv)
    return math.exp(math.sqrt(s2) * z - 0.5 * s2)


@_njit
def _rain_core(t, u, z_depth, z_energy, pv):
    if u >= _rain_probability(t, pv):
        return 0.0, 0.0
    mean = pv[_I_RAIN_MEAN]
    sd = pv[_I_RAIN_SD]
    if mean <= 0.0:
        return 0.0, 0.0
    if sd > 0.0:
        # arithmetic-moment lognormal: E[X] = mean, SD[X] = sd
        s2 = math.log(1.0 + (sd / mean) ** 2)
        depth = math.exp(math.log(mean) - 0.5 * s2 + math.sqrt(s2) * z_depth)
    else:
        depth = mean
    eps = _unit_lognormal(z_energy, pv[_I_EN_CV])
    energy = pv[_I_EN_COEF] * depth ** pv[_I_EN_EXP] * eps
    return depth, energy


@_njit
def _et0_core(t, z, pv):
    season = 1.0 + pv[_I_ET0_SEAS] * math.sin(TWO_PI * t + pv[_I_ET0_PHASE])
    return max(0.0, pv[_I_ET0_MEAN] * season * _unit_lognormal(z, pv[_I_ET0_CV]))


@_njit
def _runoff_noise_core(z, pv):
    return _unit_lognormal(z, pv[_I_RUNOFF_CV])


def drought_factor(t: float, ps: ParamSet) -> float:
    """Multiplier in [0, 1] reducing wet-step probability inside droughts."""
    return float(_drought_factor(t, ps.values))


def rain_probability(t: float, ps: ParamSet) -> float:
    """Probability that the step at time t is wet, clamped to [0, 1]."""
    return float(_rain_probability(t, ps.values))


def _lognormal_pars(mean: float, sd: float) -> tuple[float, float]:
    # arithmetic-moment parameterization: E[X] = mean, SD[X] = sd
    s2 = math.log(1.0 + (sd / mean) ** 2)
    return math.log(mean) - 0.5 * s2, math.sqrt(s2)


def sample_rain(t: float, stream: _rng.RngStream, ps: ParamSet) -> tuple[float, float]:
    """One step of rainfall: (depth in mm, storm kinetic energy in MJ/ha).

    Always consumes three stream values (occurrence, depth, energy) so steps
    stay aligned across paired runs regardless of wet/dry outcomes.
    """
    u = stream.uniform()
    z_depth = stream.normal()
    z_energy = stream.normal()
    depth, energy = _rain_core(t, u, z_depth, z_energy, ps.values)
    return float(depth), float(energy)


def reference_et(t: float, stream: _rng.RngStream, ps: ParamSet) -> float:
    """Reference evapotranspiration for one step, in mm."""
    return float(_et0_core(t, stream.normal(), ps.values))


@dataclass(frozen=True)
class EconomicDrivers:
    """Exogenous prices and costs at one instant."""

    wop: float   # world/regional output price, EUR/head
    wofp: float  # world/regional old-female price, EUR/head
    wsfp: float  # world/regional supplementary feed price, EUR/kg
    wbfp: float  # world/regional breeding-female price, EUR/head
    other_costs: float       # EUR/farm/yr
    opportunity_cost: float  # EUR/farm/yr


@_njit
def _cycle(level, amp, period, phase, t):
    x = level * (1.0 + amp * math.sin(TWO_PI * t / period + phase))
    return max(x, _PRICE_FLOOR * level)


@_njit
def _econ_core(t, pv):
    amp = pv[_I_AMP]
    tp = pv[_I_T_WOP]
    tc = pv[_I_T_OC]
    php = pv[_I_PH_PRICE]
    phc = pv[_I_PH_OC]
    return (_cycle(pv[_I_WOP], amp, tp, php, t),
            _cycle(pv[_I_WOFP], amp, tp, php + PHASE_WOFP, t),
            _cycle(pv[_I_WSFP], amp, tp, php + PHASE_WSFP, t),
            _cycle(pv[_I_WBFP], amp, tp, php + PHASE_WBFP, t),
            _cycle(pv[_I_OC], amp, tc, phc, t),
            _cycle(pv[_I_OPC], amp, tc, phc + PHASE_OPC, t))


def economic_drivers(t: float, ps: ParamSet) -> EconomicDrivers:
    """All six economic series at time t. Deterministic in (t, ps)."""
    return EconomicDrivers(*(float(x) for x in _econ_core(t, ps.values)))


@dataclass(frozen=True)
class DriverSample:
    """All exogenous inputs for one model step."""

    rain_depth: float
    rain_energy: float
    et0: float
    econ: EconomicDrivers


def sample_drivers(t: float, stream: _rng.RngStream, ps: ParamSet) -> DriverSample:
    depth, energy = sample_rain(t, stream, ps)
    et0 = reference_et(t, stream, ps)
    return DriverSample(depth, energy, et0, economic_drivers(t, ps))


@dataclass(frozen=True)
class DriverArrays:
    """Per-step driver series for a whole run (struct of float64 arrays).

    runoff_noise holds the unit-mean multiplicative factor consumed by the
    runoff coefficient; it belongs to the run's noise block even though the
    environmental submodel applies it.
    """

    t: np.ndarray
    rain_depth: np.ndarray
    rain_energy: np.ndarray
    et0: np.ndarray
    runoff_noise: np.ndarray
    wop: np.ndarray
    wofp: np.ndarray
    wsfp: np.ndarray
    wbfp: np.ndarray
    other_costs: np.ndarray
    opportunity_cost: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.t.shape[0]


def generate_drivers(n_steps: int, dt: float, key: int, ps: ParamSet) -> DriverArrays:
    """Vectorized generation of every exogenous series for one run.

    Matches the per-step sampling functions slot for slot: step i consumes
    counters i*SLOTS_PER_STEP + slot under the same key.
    """
    base = np.arange(n_steps, dtype=np.uint64) * np.uint64(SLOTS_PER_STEP)
    u_wet = _rng.uniforms_for(key, base + np.uint64(SLOT_WET))
    z_depth = _rng.normals_for(key, base + np.uint64(SLOT_DEPTH))
    z_energy = _rng.normals_for(key, base + np.uint64(SLOT_ENERGY))
    z_et0 = _rng.normals_for(key, base + np.uint64(SLOT_ET0))
    z_runoff = _rng.normals_for(key, base + np.uint64(SLOT_RUNOFF))

    t = np.arange(n_steps, dtype=np.float64) * dt

    # wet-step probability
    season = 1.0 + ps["rainfall_seasonality"] * np.sin(TWO_PI * t + ps["rain_season_phase"])
    w = 0.5 + 0.5 * np.sin(TWO_PI * t / ps["drought_return_period"] + ps["drought_phase"])
    drought = 1.0 - ps["drought_severity"] * w ** ps["drought_sharpness"]
    p = np.clip(ps["avg_rain_probability"] * season * drought, 0.0, 1.0)
    wet = u_wet < p

    # depth and energy
    mean, sd = ps["avg_rain_depth"], ps["sd_rain_depth"]
    if mean <= 0.0:
        depth = np.zeros(n_steps)
    elif sd > 0.0:
        mu, sig = _lognormal_pars(mean, sd)
        depth = np.where(wet, np.exp(mu + sig * z_depth), 0.0)
    else:
        depth = np.where(wet, mean, 0.0)
    cv_e = ps["cv_rain_energy"]
    if cv_e > 0.0:
        s2 = math.log(1.0 + cv_e * cv_e)
        eps_e = np.exp(math.sqrt(s2) * z_energy - 0.5 * s2)
    else:
        eps_e = np.ones(n_steps)
    energy = np.where(depth > 0.0,
                      ps["rain_energy_coef"] * depth ** ps["rain_energy_exponent"] * eps_e,
                      0.0)

    # reference evapotranspiration
    season_e = 1.0 + ps["et0_seasonality"] * np.sin(TWO_PI * t + ps["et0_season_phase"])
    cv = ps["cv_et0"]
    if cv > 0.0:
        s2 = math.log(1.0 + cv * cv)
        noise = np.exp(math.sqrt(s2) * z_et0 - 0.5 * s2)
    else:
        noise = np.ones(n_steps)
    et0 = np.maximum(0.0, ps["avg_et0"] * season_e * noise)

    # runoff-coefficient noise factor (unit mean)
    cv_r = ps["cv_runoff_dbs"]
    if cv_r > 0.0:
        s2 = math.log(1.0 + cv_r * cv_r)
        eps_r = np.exp(math.sqrt(s2) * z_runoff - 0.5 * s2)
    else:
        eps_r = np.ones(n_steps)

    # economic cycles
    amp = ps["amplitude_price_cycles"]
    tp, tc = ps["period_wop_cycles"], ps["period_oc_cycles"]
    php, phc = ps["price_cycle_phase"], ps["oc_cycle_phase"]

    def cyc(level, period, phase):
        x = level * (1.0 + amp * np.sin(TWO_PI * t / period + phase))
        return np.maximum(x, _PRICE_FLOOR * level)

    return DriverArrays(
        t=t,
        rain_depth=depth,
        rain_energy=energy,
        et0=et0,
        runoff_noise=eps_r,
        wop=cyc(ps["avg_wop_level"], tp, php),
        wofp=cyc(ps["avg_wofp_level"], tp, php + PHASE_WOFP),
        wsfp=cyc(ps["avg_wsfp_level"], tp, php + PHASE_WSFP),
        wbfp=cyc(ps["avg_wbfp_level"], tp, php + PHASE_WBFP),
        other_costs=cyc(ps["avg_oc_level"], tc, phc),
        opportunity_cost=cyc(ps["avg_opc_level"], tc, phc + PHASE_OPC),
    )
