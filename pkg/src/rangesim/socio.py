"""Socio-economic submodel: farms, herd, local markets and expectations.

Seventeen stocks: active farms, breeding females, young females, four local
prices, four trader inventories, the farmers' expected per-farm profit and
expected breeding price, and four smoothed market throughputs used by traders
to size their inventory targets.

All four markets (young output, culled old females, supplementary feed,
breeding females) share one mechanism. Traders hold an inventory with a
target of `DTTA targets` years of smoothed local throughput; they trade with
the world market to close the gap and to arbitrage the local/world price
difference. The local price moves multiplicatively with inventory scarcity
and is anchored to the world price, so its fixed point for a steady scarcity
h is world_price * (1 + h / snstty_traders_market).

Herd energy comes from grazing first (a saturating share of standing
herbage); the gap can be closed with purchased feed, bought according to a
willingness that falls with the feed-cost/revenue ratio and with poor profit
expectations. Energy adequacy scales output. Farms enter or exit on the gap
between expected profit and opportunity cost; entrants buy a canonical herd
on the breeding market, exiting farms sell their share of the herd.

The scalar step math is numba-compiled and operates on flat float64 state
vectors; the engine reuses the same compiled code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .drivers import EconomicDrivers
from .env import _grazed_fraction
from .params import PARAM_INDEX, ParamSet

_njit = numba.njit(cache=True)

# state vector layout
S_FARMERS = 0
S_BREEDING = 1
S_YOUNG = 2
S_P_OUT = 3
S_P_OLD = 4
S_P_FEED = 5
S_P_BR = 6
S_INV_OUT = 7
S_INV_OLD = 8
S_INV_FEED = 9
S_INV_BR = 10
S_E_PROFIT = 11
S_E_PBR = 12
S_SM_OUT = 13
S_SM_OLD = 14
S_SM_FEED = 15
S_SM_BR = 16
N_STATE = 17

# flow-report layout
FL_STOCKING = 0
FL_LU = 1
FL_ADEQUACY = 2
FL_WILLINGNESS = 3
FL_OUT_SUPPLY = 4
FL_OLD_SUPPLY = 5
FL_FEED_DEMAND = 6
FL_FEED_REALIZED = 7
FL_BR_DEMAND = 8
FL_BR_REALIZED = 9
FL_BR_SUPPLY = 10
FL_PROFIT_TOTAL = 11
FL_PROFIT_PER_FARM = 12
FL_FARMER_RATE = 13
N_FLOW = 14

_I_POT_FARMERS = PARAM_INDEX["potential_farmers"]
_I_TOTAL_AREA = PARAM_INDEX["total_area"]
_I_TARGET_OUT = PARAM_INDEX["target_output_per_lu"]
_I_ENERGY_LU = PARAM_INDEX["energy_intake_per_lu"]
_I_SFE = PARAM_INDEX["sfeed_energy_content"]
_I_SUBSIDY = PARAM_INDEX["subsidy_per_farmer"]
_I_DEF_MKT_OUT = PARAM_INDEX["default_market_output"]
_I_DEF_MKT_FEED = PARAM_INDEX["default_market_sfeed"]
_I_SN_PROFIT = PARAM_INDEX["snstty_farmers_profit"]
_I_SN_PRICES = PARAM_INDEX["snstty_farmers_prices"]
_I_SN_TRADERS = PARAM_INDEX["snstty_traders_market"]
_I_DTTA_EXP = PARAM_INDEX["dtta_expectations"]
_I_DTTA_TARGETS = PARAM_INDEX["dtta_targets"]
_I_DTFA_EXP = PARAM_INDEX["dtfa_expectations"]
_I_CULL = PARAM_INDEX["culling_rate"]
_I_T_MAT = PARAM_INDEX["young_maturation_time"]
_I_LU_B = PARAM_INDEX["lu_per_breeding_female"]
_I_LU_Y = PARAM_INDEX["lu_per_young_female"]
_I_FARMER_CAL = PARAM_INDEX["farmer_flow_calibration"]
_I_PRICE_CAL = PARAM_INDEX["price_adjust_calibration"]
_I_INIT_F = PARAM_INDEX["initial_active_farmers"]
_I_INIT_B = PARAM_INDEX["initial_breeding_females"]

# a sector below this many farms is treated as empty and its herd liquidated
FARM_FLOOR = 1e-3
# structural guard: purchases stop once the herd reaches this stocking (LU/ha)
LU_CAP_PER_HA = 10.0
_TINY = 1e-12


@dataclass(frozen=True)
class SocioState:
    """Socio-economic stocks; mirrors the flat vector used by the engine."""

    farmers: float
    breeding: float       # head of breeding females
    young: float          # head of young females
    p_out: float          # local output price, EUR/head
    p_old: float          # local old-female price, EUR/head
    p_feed: float         # local feed price, EUR/kg
    p_br: float           # local breeding-female price, EUR/head
    inv_out: float        # trader inventories, market units
    inv_old: float
    inv_feed: float
    inv_br: float
    e_profit: float       # expected profit, EUR/farm/yr
    e_pbr: float          # expected breeding price, EUR/head
    sm_out: float         # smoothed market throughputs, units/yr
    sm_old: float
    sm_feed: float
    sm_br: float

    def as_array(self) -> np.ndarray:
        return np.array([
            self.farmers, self.breeding, self.young,
            self.p_out, self.p_old, self.p_feed, self.p_br,
            self.inv_out, self.inv_old, self.inv_feed, self.inv_br,
            self.e_profit, self.e_pbr,
            self.sm_out, self.sm_old, self.sm_feed, self.sm_br,
        ])

    @staticmethod
    def from_array(v: np.ndarray) -> "SocioState":
        return SocioState(*(float(x) for x in v))


@dataclass(frozen=True)
class FlowReport:
    """Per-step flow diagnostics."""

    stocking: float        # LU per grazed hectare
    lu: float
    adequacy: float        # energy adequacy of the herd in [0, 1]
    willingness: float     # willingness to buy feed in [0, 1]
    out_supply: float      # head/yr sold by farms (incl. exit sales of young)
    old_supply: float      # head/yr culled
    feed_demand: float     # kg/yr demanded
    feed_realized: float   # kg/yr delivered
    br_demand: float       # head/yr demanded (incl. entrant herds)
    br_realized: float     # head/yr actually purchased
    br_supply: float       # head/yr sold by farms
    profit_total: float    # EUR/yr for the whole sector
    profit_per_farm: float
    farmer_rate: float     # net farms/yr

    @staticmethod
    def from_array(v: np.ndarray) -> "FlowReport":
        return FlowReport(*(float(x) for x in v))


@_njit
def _clamp01(x):
    return min(1.0, max(0.0, x))


@_njit
def _price_update(price, inv, inv_target, world_price, pv, dt):
    """Multiplicative price update: inventory scarcity pushes the price up,
    the world price anchors it. Fixed point at steady scarcity h:
    price = world_price * (1 + h / snstty_traders_market)."""
    h = (inv_target - inv) / (inv_target + inv + _TINY)
    kappa = pv[_I_SN_TRADERS]
    x = pv[_I_PRICE_CAL] * (h - kappa * (price - world_price) / world_price) * dt
    x = min(1.0, max(-1.0, x))
    return price * math.exp(x)


@_njit
def _market_step(price, inv, sm_flow, world_price, local_in, local_out_desired,
                 scale, pv, dt):
    """One market step. Returns (new_price, new_inventory, realized_local_out).

    local_in flows into the trader inventory (farm sales, or nothing for
    import markets); local_out_desired is drawn from it (farm purchases, or
    nothing for export markets). Traders trade with the world to steer the
    inventory to `DTTA targets` years of smoothed throughput and to arbitrage
    the local/world price gap; world trade can never drive inventory negative.
    """
    tau = pv[_I_DTTA_TARGETS]
    inv_target = tau * sm_flow
    world_flow = (inv_target - inv) / tau \
        + scale * pv[_I_SN_TRADERS] * (price - world_price) / world_price
    imports = max(world_flow, 0.0)
    available = inv / dt + local_in + imports
    realized = min(local_out_desired, available)
    export = min(max(-world_flow, 0.0), available - realized)
    new_inv = max(inv + (local_in + imports - realized - export) * dt, 0.0)
    new_price = _price_update(price, inv, inv_target, world_price, pv, dt)
    return new_price, new_inv, realized


@_njit
def _willingness(gap_cost_per_lu, revenue_per_lu, e_profit, opc):
    ratio = gap_cost_per_lu / max(revenue_per_lu, _TINY)
    return (1.0 / (1.0 + ratio * ratio)) * _clamp01(0.5 + 0.5 * e_profit / opc)


@_njit
def _farmer_rate(e_profit, opc, farmers, potential, pv):
    x = pv[_I_FARMER_CAL] * (e_profit - opc) / opc
    g = math.tanh(x)
    if g > 0.0:
        return pv[_I_SN_PROFIT] * g * max(potential - farmers, 0.0)
    return pv[_I_SN_PROFIT] * g * farmers


@_njit
def _socio_step(s, herbage, wop, wofp, wsfp, wbfp, oc, opc, pv, dt, out, fl):
    farmers = s[S_FARMERS]
    breeding = s[S_BREEDING]
    young = s[S_YOUNG]
    p_out = s[S_P_OUT]
    p_old = s[S_P_OLD]
    p_feed = s[S_P_FEED]
    p_br = s[S_P_BR]
    e_profit = s[S_E_PROFIT]
    e_pbr = s[S_E_PBR]

    active = farmers > FARM_FLOOR
    lu = pv[_I_LU_B] * breeding + pv[_I_LU_Y] * young
    area = pv[_I_TOTAL_AREA] / pv[_I_POT_FARMERS] * max(farmers, FARM_FLOOR)
    stocking = lu / area

    avail = _grazed_fraction(herbage, pv)
    gap = 1.0 - avail

    # feed demand and the feed market
    feed_per_lu = pv[_I_ENERGY_LU] * gap / pv[_I_SFE]
    revenue_per_lu = pv[_I_TARGET_OUT] * p_out + pv[_I_CULL] * p_old
    will = _willingness(feed_per_lu * p_feed, revenue_per_lu, e_profit, opc)
    feed_demand = lu * feed_per_lu * will if active else 0.0
    new_p_feed, new_inv_feed, feed_real = _market_step(
        p_feed, s[S_INV_FEED], s[S_SM_FEED], wsfp,
        0.0, feed_demand, pv[_I_DEF_MKT_FEED], pv, dt)

    if lu > 0.0:
        adequacy = avail + feed_real * pv[_I_SFE] / (lu * pv[_I_ENERGY_LU])
    else:
        adequacy = 1.0

    # production and culling
    output = breeding * pv[_I_LU_B] * pv[_I_TARGET_OUT] * adequacy
    retained = min(output, pv[_I_CULL] * breeding)
    out_supply = output - retained
    old_supply = pv[_I_CULL] * breeding

    # voluntary breeding-female trade
    xb = (e_profit - opc) / opc - (p_br - e_pbr) / max(e_pbr, _TINY)
    trade = pv[_I_SN_PRICES] * breeding * math.tanh(xb)
    buy_desired = max(trade, 0.0) * _clamp01(e_profit / opc)
    sell_vol = max(-trade, 0.0)

    # farm entry and exit; entrants buy the canonical herd, exits sell theirs
    rate = _farmer_rate(e_profit, opc, farmers, pv[_I_POT_FARMERS], pv) \
        if active else 0.0
    entry = max(rate, 0.0)
    exits = max(-rate, 0.0)
    entrant_herd = pv[_I_INIT_B] / max(pv[_I_INIT_F], 1.0)
    herd_per_farm = breeding / farmers if active else 0.0
    young_per_farm = young / farmers if active else 0.0
    buy_desired += entry * entrant_herd
    sell_vol += exits * herd_per_farm
    exit_young = exits * young_per_farm

    if lu >= LU_CAP_PER_HA * pv[_I_TOTAL_AREA]:
        buy_desired = 0.0

    # stock-limited outflows: sales this step cannot exceed the animals held
    sell_vol = min(sell_vol, breeding / dt)
    exit_young = min(exit_young, young / dt)
    old_supply = min(old_supply, max(breeding / dt - sell_vol, 0.0))

    # remaining markets (all flows priced at start-of-step local prices)
    new_p_out, new_inv_out, _ = _market_step(
        p_out, s[S_INV_OUT], s[S_SM_OUT], wop,
        out_supply + exit_young, 0.0, pv[_I_DEF_MKT_OUT], pv, dt)
    new_p_old, new_inv_old, _ = _market_step(
        p_old, s[S_INV_OLD], s[S_SM_OLD], wofp,
        old_supply, 0.0, s[S_SM_OLD], pv, dt)
    new_p_br, new_inv_br, buy_real = _market_step(
        p_br, s[S_INV_BR], s[S_SM_BR], wbfp,
        sell_vol, buy_desired, s[S_SM_BR], pv, dt)

    # sector profit at current local prices
    profit_total = (out_supply + exit_young) * p_out + old_supply * p_old \
        + sell_vol * p_br - buy_real * p_br - feed_real * p_feed \
        - (oc - pv[_I_SUBSIDY]) * farmers
    per_farm = profit_total / farmers if active else 0.0

    # stock updates
    mature = young / pv[_I_T_MAT]
    new_b = breeding + (mature + buy_real - sell_vol - old_supply) * dt
    new_y = young + (retained - mature - exit_young) * dt
    new_f = min(max(farmers + rate * dt, 0.0), pv[_I_POT_FARMERS])
    new_b = max(new_b, 0.0)
    new_y = max(new_y, 0.0)
    if new_f <= FARM_FLOOR:
        # sector empties: the residual herd is liquidated
        new_b = 0.0
        new_y = 0.0

    tau_f = pv[_I_DTFA_EXP]
    tau_t = pv[_I_DTTA_EXP]
    out[S_FARMERS] = new_f
    out[S_BREEDING] = new_b
    out[S_YOUNG] = new_y
    out[S_P_OUT] = new_p_out
    out[S_P_OLD] = new_p_old
    out[S_P_FEED] = new_p_feed
    out[S_P_BR] = new_p_br
    out[S_INV_OUT] = new_inv_out
    out[S_INV_OLD] = new_inv_old
    out[S_INV_FEED] = new_inv_feed
    out[S_INV_BR] = new_inv_br
    out[S_E_PROFIT] = e_profit + (per_farm - e_profit) * dt / tau_f
    out[S_E_PBR] = e_pbr + (p_br - e_pbr) * dt / tau_f
    out[S_SM_OUT] = s[S_SM_OUT] + (out_supply + exit_young - s[S_SM_OUT]) * dt / tau_t
    out[S_SM_OLD] = s[S_SM_OLD] + (old_supply - s[S_SM_OLD]) * dt / tau_t
    out[S_SM_FEED] = s[S_SM_FEED] + (feed_demand - s[S_SM_FEED]) * dt / tau_t
    out[S_SM_BR] = s[S_SM_BR] + (buy_desired - s[S_SM_BR]) * dt / tau_t

    fl[FL_STOCKING] = stocking
    fl[FL_LU] = lu
    fl[FL_ADEQUACY] = adequacy
    fl[FL_WILLINGNESS] = will
    fl[FL_OUT_SUPPLY] = out_supply + exit_young
    fl[FL_OLD_SUPPLY] = old_supply
    fl[FL_FEED_DEMAND] = feed_demand
    fl[FL_FEED_REALIZED] = feed_real
    fl[FL_BR_DEMAND] = buy_desired
    fl[FL_BR_REALIZED] = buy_real
    fl[FL_BR_SUPPLY] = sell_vol
    fl[FL_PROFIT_TOTAL] = profit_total
    fl[FL_PROFIT_PER_FARM] = per_farm
    fl[FL_FARMER_RATE] = rate


# -- public operations -------------------------------------------------------

def init_state(ps: ParamSet, herbage: float | None = None) -> SocioState:
    """Initial socio-economic stocks.

    Prices start at their initial local values, profit expectation at the
    opportunity-cost level (no pressure either way), and trader inventories
    at target for the throughputs implied by the initial herd, so a balanced
    parameterization starts near rest rather than with a transient.
    """
    if herbage is None:
        herbage = ps["initial_green_herbage"] + ps["initial_dry_herbage"]
    farmers = min(ps["initial_active_farmers"], ps["potential_farmers"])
    breeding = ps["initial_breeding_females"]
    young = ps["initial_young_females"]
    lu = ps["lu_per_breeding_female"] * breeding + ps["lu_per_young_female"] * young

    avail = float(_grazed_fraction(herbage, ps.values))
    output = breeding * ps["lu_per_breeding_female"] * ps["target_output_per_lu"] * avail
    retained = min(output, ps["culling_rate"] * breeding)
    sm_out = output - retained
    sm_old = ps["culling_rate"] * breeding
    feed_per_lu = ps["energy_intake_per_lu"] * (1.0 - avail) / ps["sfeed_energy_content"]
    revenue_per_lu = (ps["target_output_per_lu"] * ps["initial_local_output_price"]
                      + ps["culling_rate"] * ps["initial_local_old_price"])
    will = float(_willingness(feed_per_lu * ps["initial_local_feed_price"],
                              revenue_per_lu, ps["avg_opc_level"], ps["avg_opc_level"]))
    sm_feed = lu * feed_per_lu * will
    sm_br = 0.0

    tau = ps["dtta_targets"]
    return SocioState(
        farmers=farmers,
        breeding=breeding,
        young=young,
        p_out=ps["initial_local_output_price"],
        p_old=ps["initial_local_old_price"],
        p_feed=ps["initial_local_feed_price"],
        p_br=ps["initial_local_breeding_price"],
        inv_out=tau * sm_out,
        inv_old=tau * sm_old,
        inv_feed=tau * sm_feed,
        inv_br=tau * sm_br,
        e_profit=ps["avg_opc_level"],
        e_pbr=ps["initial_local_breeding_price"],
        sm_out=sm_out,
        sm_old=sm_old,
        sm_feed=sm_feed,
        sm_br=sm_br,
    )


def step_socio(state: SocioState, herbage: float, econ: EconomicDrivers,
               ps: ParamSet, dt: float) -> tuple[SocioState, FlowReport]:
    """Advance the socio-economic stocks by one step of length dt (years)."""
    s = state.as_array()
    out = np.empty(N_STATE)
    fl = np.empty(N_FLOW)
    _socio_step(s, herbage, econ.wop, econ.wofp, econ.wsfp, econ.wbfp,
                econ.other_costs, econ.opportunity_cost, ps.values, dt, out, fl)
    return SocioState.from_array(out), FlowReport.from_array(fl)


def farmer_flow(e_profit: float, opportunity_cost: float, farmers: float,
                ps: ParamSet) -> float:
    """Net farm entry rate (farms/yr).

    Saturating in the relative profit gap; entry is proportional to the
    remaining headroom below 'Potential No. Farmers', exit to the farms
    present. Zero exactly at e_profit == opportunity_cost.
    """
    return float(_farmer_rate(e_profit, opportunity_cost, farmers,
                              ps["potential_farmers"], ps.values))


def feed_demand(lu: float, herbage: float, p_feed: float, p_out: float,
                p_old: float, e_profit: float, opportunity_cost: float,
                ps: ParamSet, willingness: float | None = None) -> float:
    """Supplementary feed demand rate (kg/yr) for a herd of `lu` on pasture
    holding `herbage` kg DM/ha. Pass `willingness` to pin the behavioural
    factor (1.0 buys the full energy gap)."""
    gap = 1.0 - float(_grazed_fraction(herbage, ps.values))
    feed_per_lu = ps["energy_intake_per_lu"] * gap / ps["sfeed_energy_content"]
    if willingness is None:
        revenue_per_lu = ps["target_output_per_lu"] * p_out + ps["culling_rate"] * p_old
        willingness = float(_willingness(feed_per_lu * p_feed, revenue_per_lu,
                                         e_profit, opportunity_cost))
    return lu * feed_per_lu * willingness


def local_price_update(price: float, supply_rate: float, demand_rate: float,
                       inventory: float, world_price: float, ps: ParamSet,
                       dt: float) -> float:
    """One local price adjustment against an inventory target of
    'DTTA targets' years of mean throughput (supply+demand)/2."""
    inv_target = ps["dtta_targets"] * 0.5 * (supply_rate + demand_rate)
    return float(_price_update(price, inventory, inv_target, world_price,
                               ps.values, dt))


def sector_profit(out_sold: float, old_sold: float, br_sold: float,
                  br_bought: float, feed_bought: float,
                  p_out: float, p_old: float, p_br: float, p_feed: float,
                  other_costs: float, farmers: float,
                  ps: ParamSet) -> tuple[float, float]:
    """Sector profit rate (EUR/yr) and per-farm rate from realized flows:
    animal sales minus purchases, feed and per-farm net fixed costs
    (other costs less 'Subsidy per farmer')."""
    total = (out_sold * p_out + old_sold * p_old + br_sold * p_br
             - br_bought * p_br - feed_bought * p_feed
             - (other_costs - ps["subsidy_per_farmer"]) * farmers)
    per_farm = total / farmers if farmers > FARM_FLOOR else 0.0
    return total, per_farm
