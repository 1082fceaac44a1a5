"""Parameter registry, parameter files and the sensitivity sampling space.

The registry below is the single source of truth for the model's 87
parameters: identifier, short display label, units, default value, group,
whether the parameter is varied in sensitivity campaigns, and hard physical
bounds. The canonical ordering of the registry is load-bearing (engine
kernels address parameter vectors by position), so it is fixed here in code
and the shipped JSON default file is generated from it, never the other way
around.

Defaults are reconstructed estimates for a Mediterranean wooded rangeland
grazed by cattle; each description carries a "(reconstructed)" marker.

Groups:
    driver-weather    exogenous rainfall / evapotranspiration forcing
    driver-economic   exogenous prices, costs and their cycles
    system-env        soil, water, erosion and herbage structure
    system-socio      farm demography, livestock, markets and behaviour
    calibration       shape factors without a direct field counterpart
    initial-stock     initial values of the model's stock variables
"""

from __future__ import annotations

import configparser
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

INF = math.inf
PI = math.pi

GROUPS = (
    "driver-weather",
    "driver-economic",
    "system-env",
    "system-socio",
    "calibration",
    "initial-stock",
)


@dataclass(frozen=True)
class ParamDef:
    """Definition of one model parameter."""

    id: str
    label: str
    units: str
    default: float
    group: str
    vary_in_sa: bool
    hard_bounds: tuple[float, float]
    description: str


def _p(pid, label, units, default, group, vary, bounds, desc):
    return ParamDef(pid, label, units, float(default), group, vary,
                    (float(bounds[0]), float(bounds[1])), desc + " (reconstructed)")


# ---------------------------------------------------------------------------
# Registry. Order is canonical and must not change between releases without
# bumping the params schema: engine kernels bind column indices at import.
# ---------------------------------------------------------------------------

DEFS: tuple[ParamDef, ...] = (
    # -- driver-weather ------------------------------------------------------
    _p("avg_rain_probability", "Av. Rain. Probilty. / TS", "-", 0.30,
       "driver-weather", True, (0.0, 1.0),
       "Mean probability that a model step is wet, before seasonal and drought modulation"),
    _p("rainfall_seasonality", "Rainfall seasonality", "-", 0.65,
       "driver-weather", True, (0.0, 1.0),
       "Relative amplitude of the annual cycle of wet-step probability"),
    _p("avg_rain_depth", "Av. Rain. depth / TS", "mm", 11.0,
       "driver-weather", True, (0.001, INF),
       "Mean rainfall depth of a wet step"),
    _p("sd_rain_depth", "SD Rain. depth / TS", "mm", 9.0,
       "driver-weather", True, (0.0, INF),
       "Standard deviation of wet-step rainfall depth; raises torrentiality at fixed mean"),
    _p("rain_energy_coef", "Rain energy coefficient", "MJ ha-1", 0.18,
       "driver-weather", True, (1e-6, INF),
       "Scale of storm kinetic energy as a power law of depth"),
    _p("rain_energy_exponent", "Rain energy exponent", "-", 1.2,
       "driver-weather", False, (0.5, 3.0),
       "Exponent of storm kinetic energy versus rainfall depth"),
    _p("cv_rain_energy", "CV rain energy", "-", 0.35,
       "driver-weather", True, (0.0, 2.0),
       "Coefficient of variation of the unit-mean noise on storm energy"),
    _p("drought_severity", "Severity droughts", "-", 0.45,
       "driver-weather", True, (0.0, 1.0),
       "Peak reduction of wet-step probability at the top of the drought cycle"),
    _p("drought_return_period", "Return period droughts", "yr", 8.0,
       "driver-weather", True, (0.5, INF),
       "Period of the slow drought cycle"),
    _p("avg_et0", "Av. ET_o per TS", "mm", 8.5,
       "driver-weather", True, (0.0, INF),
       "Mean reference evapotranspiration per step"),
    _p("cv_et0", "CV ET_o per TS", "-", 0.12,
       "driver-weather", True, (0.0, 2.0),
       "Coefficient of variation of the unit-mean noise on reference evapotranspiration"),
    _p("et0_seasonality", "ET_o seasonality", "-", 0.55,
       "driver-weather", True, (0.0, 1.0),
       "Relative amplitude of the annual cycle of reference evapotranspiration"),
    _p("random_seed", "Random seed", "-", 1000.0,
       "driver-weather", True, (0.0, 2.0 ** 31),
       "Seed of the weather noise stream; floored to an integer stream key"),
    _p("rain_season_phase", "Rainfall season phase", "rad", 0.0,
       "driver-weather", False, (-2 * PI, 2 * PI),
       "Phase of the annual rainfall cycle; zero starts the run at wet-season onset"),
    _p("et0_season_phase", "ET_o season phase", "rad", PI,
       "driver-weather", False, (-2 * PI, 2 * PI),
       "Phase of the annual evapotranspiration cycle, opposed to the rainfall cycle"),
    _p("drought_phase", "Drought cycle phase", "rad", -PI / 2,
       "driver-weather", False, (-2 * PI, 2 * PI),
       "Phase of the drought cycle; the default starts the run between droughts"),

    # -- driver-economic -----------------------------------------------------
    _p("avg_wop_level", "Av. WOP level", "EUR head-1", 550.0,
       "driver-economic", True, (1e-6, INF),
       "Mean world/regional price of weaned output"),
    _p("avg_wofp_level", "Av. WOFP level", "EUR head-1", 480.0,
       "driver-economic", True, (1e-6, INF),
       "Mean world/regional price of old females leaving production"),
    _p("avg_wsfp_level", "Av. WSFP level", "EUR kg-1", 0.22,
       "driver-economic", True, (1e-6, INF),
       "Mean world/regional price of supplementary feed"),
    _p("avg_wbfp_level", "Av. WBFP level", "EUR head-1", 1100.0,
       "driver-economic", True, (1e-6, INF),
       "Mean world/regional price of breeding females"),
    _p("avg_oc_level", "Av. OC level", "EUR farm-1 yr-1", 28000.0,
       "driver-economic", True, (0.0, INF),
       "Mean level of other production costs per active farm"),
    _p("avg_opc_level", "Av. OPC level", "EUR farm-1 yr-1", 17000.0,
       "driver-economic", True, (1e-6, INF),
       "Mean opportunity cost of farming, the benchmark earnings outside the sector"),
    _p("amplitude_price_cycles", "Amplitude price cycles", "-", 0.15,
       "driver-economic", True, (0.0, 0.95),
       "Relative amplitude shared by the price and cost cycles"),
    _p("period_wop_cycles", "Period WOP cycles", "yr", 6.0,
       "driver-economic", True, (0.5, INF),
       "Period of the world price cycles"),
    _p("period_oc_cycles", "Period OC cycles", "yr", 9.0,
       "driver-economic", True, (0.5, INF),
       "Period of the cost and opportunity-cost cycles"),
    _p("price_cycle_phase", "Price cycle phase", "rad", 0.0,
       "driver-economic", False, (-2 * PI, 2 * PI),
       "Base phase of the world price cycles"),
    _p("oc_cycle_phase", "Cost cycle phase", "rad", 0.0,
       "driver-economic", False, (-2 * PI, 2 * PI),
       "Base phase of the cost cycles"),

    # -- system-env ----------------------------------------------------------
    _p("swc_field_capacity", "SWC field capacity", "m3 m-3", 0.24,
       "system-env", True, (0.01, 0.65),
       "Volumetric soil water content at field capacity"),
    _p("swc_wilting_ratio", "SWC wilting ratio", "-", 0.35,
       "system-env", True, (0.05, 0.95),
       "Wilting-point water content as a fraction of field capacity"),
    _p("initial_topsoil_porosity", "Initial topsoil porosity", "-", 0.45,
       "system-env", True, (0.05, 0.80),
       "Porosity of the topsoil at full initial depth; sets surface bulk density"),
    _p("parent_rock_density", "Parent rock density", "g cm-3", 2.2,
       "system-env", True, (1.0, 2.75),
       "Bulk density approached as the soil erodes down to the parent material"),
    _p("soil_particle_density", "Soil particle density", "g cm-3", 2.65,
       "system-env", False, (2.0, 2.9),
       "Density of the mineral soil particles"),
    _p("bd_threshold_herbage", "BD threshold herbage", "g cm-3", 2.0,
       "system-env", True, (0.8, 2.4),
       "Topsoil bulk density above which herbage growth stops"),
    _p("init_topsoil_erodibility", "Init. Topsoil erodibilty.", "-", 1.0,
       "system-env", True, (1e-6, INF),
       "Relative erodibility of the intact topsoil"),
    _p("weathering_rate", "Weathering rate", "mm yr-1", 0.08,
       "system-env", True, (0.0, INF),
       "Rate at which parent material weathers into new soil"),
    _p("avg_runoff_dbs", "Av. Runoff DBS", "-", 0.30,
       "system-env", True, (1e-6, 1.0),
       "Expected runoff coefficient on dry bare soil"),
    _p("cv_runoff_dbs", "CV Runoff DBS", "-", 0.30,
       "system-env", True, (0.0, 2.0),
       "Coefficient of variation of the runoff-coefficient noise"),
    _p("runoff_energy_exponent", "Runoff energy exponent", "-", 0.3,
       "system-env", False, (0.0, 2.0),
       "Exponent of the storm-energy anomaly in the runoff coefficient"),
    _p("runoff_canopy_protection", "Runoff canopy protection", "-", 0.70,
       "system-env", True, (0.0, 1.0),
       "Fractional reduction of runoff under full canopy cover"),
    _p("erosion_runoff_exponent", "Erosion runoff exponent", "-", 1.4,
       "system-env", False, (1.0, 3.0),
       "Exponent of runoff depth in the erosion law"),
    _p("erosion_energy_exponent", "Erosion energy exponent", "-", 0.6,
       "system-env", False, (0.0, 2.0),
       "Exponent of storm energy in the erosion law"),
    _p("erosion_canopy_protection", "Erosion canopy protection", "-", 0.90,
       "system-env", True, (0.0, 1.0),
       "Fractional reduction of soil loss under full canopy cover"),
    _p("hillslope_length", "Hill-slope length", "m", 80.0,
       "system-env", False, (1.0, INF),
       "Representative hill-slope length of the grazed slopes"),
    _p("hillslope_gradient", "Hill-slope gradient", "m m-1", 0.12,
       "system-env", False, (0.001, 1.0),
       "Representative hill-slope gradient of the grazed slopes"),
    _p("gh_pot_growth_rate", "GH pot. growth rate", "kg ha-1 yr-1", 9000.0,
       "system-env", True, (1.0, INF),
       "Potential growth rate of green herbage under no limitation"),
    _p("gh_capacity", "GH standing capacity", "kg ha-1", 3800.0,
       "system-env", True, (1.0, INF),
       "Standing green herbage at which self-shading stops growth"),
    _p("gh_senescence_rate", "GH senescence rate", "yr-1", 1.5,
       "system-env", True, (0.01, INF),
       "Rate at which green herbage turns into dry herbage"),
    _p("dh_decaying_rate", "DH decaying rate", "yr-1", 0.9,
       "system-env", True, (0.01, INF),
       "Decay rate of standing dry herbage"),
    _p("canopy_half_saturation", "Canopy half-saturation", "kg ha-1", 700.0,
       "system-env", True, (1.0, INF),
       "Standing herbage at which canopy cover reaches one half"),
    _p("bare_soil_evap_fraction", "Bare-soil evaporation fraction", "-", 0.35,
       "system-env", True, (0.0, 1.0),
       "Share of reference evapotranspiration still acting on bare soil"),
    _p("herbage_energy_content", "Herbage energy content", "MJ kg-1", 9.0,
       "system-env", True, (0.5, INF),
       "Metabolizable energy content of grazed herbage"),
    _p("grazing_half_saturation", "Grazing half-saturation", "kg ha-1", 250.0,
       "system-env", True, (1.0, INF),
       "Standing herbage at which grazing intake reaches half its demand"),

    # -- system-socio --------------------------------------------------------
    _p("potential_farmers", "Potential No. Farmers", "farms", 100.0,
       "system-socio", True, (1.0, INF),
       "Number of farm slots the area supports; active farms never exceed it"),
    _p("total_area", "Total area", "ha", 50000.0,
       "system-socio", False, (1.0, INF),
       "Total grazeable area of the study region"),
    _p("target_output_per_lu", "Target output per LU", "head LU-1 yr-1", 0.75,
       "system-socio", True, (0.01, INF),
       "Weaned output a fully fed livestock unit can produce per year"),
    _p("energy_intake_per_lu", "Energy intake per LU", "MJ LU-1 yr-1", 30000.0,
       "system-socio", True, (100.0, INF),
       "Metabolizable energy requirement of one livestock unit"),
    _p("sfeed_energy_content", "S. Feed energy content", "MJ kg-1", 12.0,
       "system-socio", True, (0.5, INF),
       "Metabolizable energy content of supplementary feed"),
    _p("subsidy_per_farmer", "Subsidy per farmer", "EUR farm-1 yr-1", 12000.0,
       "system-socio", True, (0.0, INF),
       "Direct payment received by each active farm"),
    _p("default_market_output", "Default market output", "head yr-1", 10000.0,
       "system-socio", True, (1.0, INF),
       "Reference size of the external market for weaned output"),
    _p("default_market_sfeed", "Default market S. Feed", "kg yr-1", 9.0e6,
       "system-socio", True, (1.0, INF),
       "Reference size of the external market for supplementary feed"),
    _p("snstty_farmers_profit", "Snstty. Farmers - profit", "yr-1", 0.10,
       "system-socio", True, (0.0, INF),
       "Responsiveness of farm entry and exit to the profit gap"),
    _p("snstty_farmers_prices", "Snstty. Farmers - prices", "yr-1", 0.25,
       "system-socio", True, (0.0, INF),
       "Responsiveness of herd investment and divestment to price and profit signals"),
    _p("snstty_traders_market", "Snstty. Traders - market", "-", 1.0,
       "system-socio", True, (0.0, INF),
       "Responsiveness of traders moving goods against the local/world price gap"),
    _p("dtta_expectations", "DTTA expectations", "yr", 0.5,
       "system-socio", True, (0.01, INF),
       "Delay time for traders to adjust their expectations of market flows"),
    _p("dtta_targets", "DTTA targets", "yr", 0.25,
       "system-socio", True, (0.01, INF),
       "Delay time for traders to adjust inventories toward target coverage"),
    _p("dtfa_expectations", "DTFA expectations", "yr", 1.5,
       "system-socio", True, (0.01, INF),
       "Delay time for farmers to adjust profit and price expectations"),
    _p("culling_rate", "Culling rate", "yr-1", 0.14,
       "system-socio", True, (0.005, 1.0),
       "Fraction of breeding females leaving production per year"),
    _p("young_maturation_time", "Young maturation time", "yr", 2.0,
       "system-socio", False, (0.1, INF),
       "Years a retained young female needs before entering the breeding herd"),
    _p("lu_per_breeding_female", "LU per breeding female", "LU head-1", 1.0,
       "system-socio", False, (0.01, INF),
       "Livestock-unit weight of one breeding female"),
    _p("lu_per_young_female", "LU per young female", "LU head-1", 0.6,
       "system-socio", False, (0.01, INF),
       "Livestock-unit weight of one young female"),

    # -- calibration ---------------------------------------------------------
    _p("erosion_rate_calibration", "Erosion rate calibration", "-", 0.0025,
       "calibration", True, (1e-9, INF),
       "Scale of the erosion law linking runoff and storm energy to soil loss"),
    _p("runoff_calibration", "Runoff calibration", "-", 2.0,
       "calibration", True, (0.2, 8.0),
       "Exponent shaping how runoff rises with relative soil saturation"),
    _p("canopy_cover_calibration", "Canopy cover calibration", "ha LU-1", 0.10,
       "calibration", True, (0.0, INF),
       "Bare area opened per unit of stocking, reducing canopy cover"),
    _p("farmer_flow_calibration", "Farmer flow calibration", "-", 1.5,
       "calibration", True, (1e-6, INF),
       "Steepness of the saturating response of farm entry/exit to the profit gap"),
    _p("price_adjust_calibration", "Price adjustment calibration", "yr-1", 1.2,
       "calibration", True, (1e-6, INF),
       "Speed at which local prices react to inventory imbalance"),
    _p("drought_sharpness", "Drought sharpness", "-", 4.0,
       "calibration", False, (0.5, 12.0),
       "Exponent concentrating the drought cycle into narrow episodes"),

    # -- initial-stock -------------------------------------------------------
    _p("initial_soil_depth", "Initial soil depth", "mm", 400.0,
       "initial-stock", True, (0.0, INF),
       "Topsoil depth at the start of the run"),
    _p("initial_soil_moisture_frac", "Initial soil moisture fraction", "-", 0.5,
       "initial-stock", True, (0.0, 1.0),
       "Initial soil moisture as a fraction of storage capacity"),
    _p("initial_green_herbage", "Initial green herbage", "kg ha-1", 300.0,
       "initial-stock", True, (0.0, INF),
       "Standing green herbage at the start of the run"),
    _p("initial_dry_herbage", "Initial dry herbage", "kg ha-1", 1200.0,
       "initial-stock", True, (0.0, INF),
       "Standing dry herbage at the start of the run"),
    _p("initial_active_farmers", "Initial active farmers", "farms", 80.0,
       "initial-stock", True, (0.0, INF),
       "Active farms at the start of the run, capped at the potential number"),
    _p("initial_breeding_females", "Initial breeding females", "head", 12000.0,
       "initial-stock", True, (0.0, INF),
       "Breeding females at the start of the run"),
    _p("initial_young_females", "Initial young females", "head", 3400.0,
       "initial-stock", True, (0.0, INF),
       "Replacement young females at the start of the run"),
    _p("initial_local_output_price", "Initial local output price", "EUR head-1", 550.0,
       "initial-stock", True, (1e-6, INF),
       "Local price of weaned output at the start of the run"),
    _p("initial_local_old_price", "Initial local old-female price", "EUR head-1", 480.0,
       "initial-stock", True, (1e-6, INF),
       "Local price of old females at the start of the run"),
    _p("initial_local_feed_price", "Initial local S. Feed price", "EUR kg-1", 0.22,
       "initial-stock", True, (1e-6, INF),
       "Local price of supplementary feed at the start of the run"),
    _p("initial_local_breeding_price", "Initial local breeding price", "EUR head-1", 1100.0,
       "initial-stock", True, (1e-6, INF),
       "Local price of breeding females at the start of the run"),
)

N_PARAMS = len(DEFS)
PARAM_INDEX: dict[str, int] = {d.id: i for i, d in enumerate(DEFS)}
VARIED_IDS: tuple[str, ...] = tuple(d.id for d in DEFS if d.vary_in_sa)
N_VARIED = len(VARIED_IDS)

# Display labels; a few quantities circulate under more than one short label.
LABEL_TO_ID: dict[str, str] = {d.label: d.id for d in DEFS}
ALT_LABELS: dict[str, str] = {
    "Soil field capacity": "swc_field_capacity",
}
LABEL_TO_ID.update(ALT_LABELS)

DEFAULTS_FILENAME = "default_params.json"
_SCHEMA = "rangesim-params-v1"

# Domain split used for aggregate sensitivity reporting: parameters that act
# through prices, behaviour or herd management versus those that act through
# weather, soil and vegetation.
_ECONOMIC_CALIBRATION = {"farmer_flow_calibration", "price_adjust_calibration"}
_ECONOMIC_STOCKS = {
    "initial_active_farmers", "initial_breeding_females",
    "initial_young_females", "initial_local_output_price",
    "initial_local_old_price", "initial_local_feed_price",
    "initial_local_breeding_price",
}


def sa_domain(pid: str) -> str:
    """'economic' or 'biophysical' domain of a parameter id."""
    group = DEFS[PARAM_INDEX[pid]].group
    if group in ("driver-economic", "system-socio"):
        return "economic"
    if group in ("driver-weather", "system-env"):
        return "biophysical"
    if group == "calibration":
        return "economic" if pid in _ECONOMIC_CALIBRATION else "biophysical"
    return "economic" if pid in _ECONOMIC_STOCKS else "biophysical"


def index_of(pid: str) -> int:
    """Position of a parameter id in the canonical vector."""
    return PARAM_INDEX[pid]


class ParamSet:
    """An immutable full assignment of the 87 parameters.

    Values live in a float64 vector in canonical registry order; items are
    accessed by parameter id.
    """

    __slots__ = ("values",)

    def __init__(self, values):
        v = np.asarray(values, dtype=np.float64)
        if v.shape != (N_PARAMS,):
            raise ValueError(f"expected {N_PARAMS} parameter values, got shape {v.shape}")
        object.__setattr__(self, "values", v.copy())
        self.values.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("ParamSet is immutable")

    def __getitem__(self, pid: str) -> float:
        return float(self.values[PARAM_INDEX[pid]])

    def __eq__(self, other):
        return isinstance(other, ParamSet) and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"ParamSet({N_PARAMS} params)"

    def as_dict(self) -> dict[str, float]:
        return {d.id: float(self.values[i]) for i, d in enumerate(DEFS)}

    def with_updates(self, updates: dict[str, float] | None = None,
                     **kw: float) -> "ParamSet":
        """New set with the given id -> value entries replaced."""
        merged = dict(updates or {})
        merged.update(kw)
        v = self.values.copy()
        for pid, val in merged.items():
            if pid not in PARAM_INDEX:
                raise KeyError(f"unknown parameter id: {pid!r}")
            v[PARAM_INDEX[pid]] = float(val)
        return ParamSet(v)

    def violations(self) -> list[str]:
        """Hard-bound violations, one message per offending parameter."""
        out = []
        for i, d in enumerate(DEFS):
            x = self.values[i]
            lo, hi = d.hard_bounds
            if not math.isfinite(x):
                out.append(f"{d.id}: value {x} is not finite")
            elif x < lo or x > hi:
                out.append(f"{d.id}: value {x:g} outside hard bounds [{lo:g}, {hi:g}]")
        return out

    def validate(self) -> None:
        probs = self.violations()
        if probs:
            raise ValueError("invalid parameter set:\n  " + "\n  ".join(probs))


def default_params() -> ParamSet:
    """The shipped default parameter set."""
    return ParamSet(np.array([d.default for d in DEFS], dtype=np.float64))


@dataclass(frozen=True)
class ParamSpace:
    """Box sampling space over the varied parameters, canonical order."""

    ids: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray

    @property
    def k(self) -> int:
        return len(self.ids)

    def contains(self, row: np.ndarray) -> bool:
        return bool(np.all(row >= self.lower) and np.all(row <= self.upper))


def build_space(ps: ParamSet | None = None, fraction: float = 0.3) -> ParamSpace:
    """Sampling space spanning +-fraction around each varied parameter's value.

    Each range is intersected with the parameter's hard bounds. A range that
    collapses (a zero value, or bounds that pinch it away) falls back to the
    hard bounds when those are finite, and raises otherwise.
    """
    if ps is None:
        ps = default_params()
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    lows, highs = [], []
    for pid in VARIED_IDS:
        d = DEFS[PARAM_INDEX[pid]]
        x = ps[pid]
        lo, hi = x * (1.0 - fraction), x * (1.0 + fraction)
        if lo > hi:  # negative value
            lo, hi = hi, lo
        lo = max(lo, d.hard_bounds[0])
        hi = min(hi, d.hard_bounds[1])
        if not lo < hi:
            blo, bhi = d.hard_bounds
            if math.isfinite(blo) and math.isfinite(bhi) and blo < bhi:
                lo, hi = blo, bhi
            else:
                raise ValueError(
                    f"parameter {pid!r}: degenerate range around {x:g} and no "
                    f"finite hard bounds to fall back on")
        lows.append(lo)
        highs.append(hi)
    lo = np.array(lows)
    hi = np.array(highs)
    lo.setflags(write=False)
    hi.setflags(write=False)
    return ParamSpace(tuple(VARIED_IDS), lo, hi)


def apply_scenario(base: ParamSet, space: ParamSpace, row: np.ndarray) -> ParamSet:
    """Overlay one sampled row of the space onto a base set.

    Non-varied parameters keep their base values bit-for-bit.
    """
    row = np.asarray(row, dtype=np.float64)
    if row.shape != (space.k,):
        raise ValueError(f"scenario row has shape {row.shape}, expected ({space.k},)")
    v = base.values.copy()
    for j, pid in enumerate(space.ids):
        v[PARAM_INDEX[pid]] = row[j]
    return ParamSet(v)


# ---------------------------------------------------------------------------
# Parameter files. Canonical form is JSON; a sectioned key = value file
# (configparser syntax, one section per group) is accepted for hand edits.
# ---------------------------------------------------------------------------

def _bound_to_json(b: float):
    return None if math.isinf(b) else b

def _bound_from_json(b, sign: float) -> float:
    return sign * INF if b is None else float(b)


def canonical_document(ps: ParamSet) -> dict:
    """Canonical JSON-ready document for a parameter set."""
    return {
        "schema": _SCHEMA,
        "params": [
            {
                "id": d.id,
                "label": d.label,
                "description": d.description,
                "units": d.units,
                "default": float(ps.values[i]),
                "group": d.group,
                "vary_in_sa": d.vary_in_sa,
                "hard_bounds": [_bound_to_json(d.hard_bounds[0]),
                                _bound_to_json(d.hard_bounds[1])],
            }
            for i, d in enumerate(DEFS)
        ],
    }


def save_params(ps: ParamSet, path) -> None:
    """Write a parameter set as the canonical JSON document."""
    Path(path).write_text(json.dumps(canonical_document(ps), indent=2) + "\n")


def _values_from_json(doc: dict) -> dict[str, float]:
    if not isinstance(doc, dict):
        raise ValueError("parameter document must be a JSON object")
    if "params" in doc:
        entries = doc["params"]
        out = {}
        for e in entries:
            pid = e.get("id")
            if pid not in PARAM_INDEX:
                raise ValueError(f"unknown parameter id: {pid!r}")
            d = DEFS[PARAM_INDEX[pid]]
            for fld, expect in (("group", d.group), ("vary_in_sa", d.vary_in_sa)):
                if fld in e and e[fld] != expect:
                    raise ValueError(f"parameter {pid!r}: field {fld!r} disagrees "
                                     f"with the registry ({e[fld]!r} vs {expect!r})")
            out[pid] = float(e["default"])
        return out
    if "values" in doc:
        out = {}
        for pid, val in doc["values"].items():
            if pid not in PARAM_INDEX:
                raise ValueError(f"unknown parameter id: {pid!r}")
            out[pid] = float(val)
        return out
    raise ValueError("parameter document needs a 'params' or 'values' entry")


def _values_from_ini(text: str) -> dict[str, float]:
    cp = configparser.ConfigParser()
    cp.read_string(text)
    out = {}
    for section in cp.sections():
        for pid, raw in cp.items(section):
            if pid not in PARAM_INDEX:
                raise ValueError(f"unknown parameter id: {pid!r} (section [{section}])")
            try:
                out[pid] = float(raw)
            except ValueError as err:
                raise ValueError(f"parameter {pid!r}: not a number: {raw!r}") from err
    return out


def load_params(path=None, merge_defaults: bool = False) -> ParamSet:
    """Load a parameter set from a file.

    path=None returns the shipped defaults. JSON files may carry the canonical
    document or a bare {"values": {id: number}} mapping; any other extension is
    parsed as a sectioned key = value file. Unknown ids are rejected. A file
    that covers only part of the registry is an error unless merge_defaults is
    set, in which case missing ids take their shipped defaults.
    """
    if path is None:
        return default_params()
    p = Path(path)
    text = p.read_text()
    if p.suffix.lower() == ".json":
        values = _values_from_json(json.loads(text))
    else:
        values = _values_from_ini(text)
    missing = [pid for pid in PARAM_INDEX if pid not in values]
    if missing and not merge_defaults:
        raise ValueError(
            f"parameter file {p} covers {len(values)} of {N_PARAMS} parameters "
            f"(first missing: {missing[0]!r}); pass merge_defaults=True to fill "
            f"the rest from shipped defaults")
    return default_params().with_updates(values)
