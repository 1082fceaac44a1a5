"""Parameter registry, bounds, spaces, scenarios, and file round-trips."""

import json

import numpy as np
import pytest

from rangesim import params

# Frozen registry order. The compiled step cores bake positional indices in
# at compile time, so any reorder or rename here is a breaking change and
# must fail loudly (it would also silently invalidate on-disk jit caches).
GOLDEN_IDS = (
    "avg_rain_probability", "rainfall_seasonality", "avg_rain_depth",
    "sd_rain_depth", "rain_energy_coef", "rain_energy_exponent",
    "cv_rain_energy", "drought_severity", "drought_return_period", "avg_et0",
    "cv_et0", "et0_seasonality", "random_seed", "rain_season_phase",
    "et0_season_phase", "drought_phase", "avg_wop_level", "avg_wofp_level",
    "avg_wsfp_level", "avg_wbfp_level", "avg_oc_level", "avg_opc_level",
    "amplitude_price_cycles", "period_wop_cycles", "period_oc_cycles",
    "price_cycle_phase", "oc_cycle_phase", "swc_field_capacity",
    "swc_wilting_ratio", "initial_topsoil_porosity", "parent_rock_density",
    "soil_particle_density", "bd_threshold_herbage", "init_topsoil_erodibility",
    "weathering_rate", "avg_runoff_dbs", "cv_runoff_dbs",
    "runoff_energy_exponent", "runoff_canopy_protection",
    "erosion_runoff_exponent", "erosion_energy_exponent",
    "erosion_canopy_protection", "hillslope_length", "hillslope_gradient",
    "gh_pot_growth_rate", "gh_capacity", "gh_senescence_rate",
    "dh_decaying_rate", "canopy_half_saturation", "bare_soil_evap_fraction",
    "herbage_energy_content", "grazing_half_saturation", "potential_farmers",
    "total_area", "target_output_per_lu", "energy_intake_per_lu",
    "sfeed_energy_content", "subsidy_per_farmer", "default_market_output",
    "default_market_sfeed", "snstty_farmers_profit", "snstty_farmers_prices",
    "snstty_traders_market", "dtta_expectations", "dtta_targets",
    "dtfa_expectations", "culling_rate", "young_maturation_time",
    "lu_per_breeding_female", "lu_per_young_female", "erosion_rate_calibration",
    "runoff_calibration", "canopy_cover_calibration", "farmer_flow_calibration",
    "price_adjust_calibration", "drought_sharpness", "initial_soil_depth",
    "initial_soil_moisture_frac", "initial_green_herbage",
    "initial_dry_herbage", "initial_active_farmers", "initial_breeding_females",
    "initial_young_females", "initial_local_output_price",
    "initial_local_old_price", "initial_local_feed_price",
    "initial_local_breeding_price",
)


def test_registry_order_frozen():
    assert tuple(d.id for d in params.DEFS) == GOLDEN_IDS


def test_counts():
    assert params.N_PARAMS == 87
    assert len(params.VARIED_IDS) == 70
    assert sum(1 for d in params.DEFS if not d.vary_in_sa) == 17
    stocks = [d for d in params.DEFS if d.group == "initial-stock"]
    assert len(stocks) == 11
    assert all(d.vary_in_sa for d in stocks)


def test_ids_unique_and_indexed():
    ids = [d.id for d in params.DEFS]
    assert len(set(ids)) == len(ids)
    for i, d in enumerate(params.DEFS):
        assert params.PARAM_INDEX[d.id] == i
        assert params.index_of(d.id) == i
    with pytest.raises(KeyError):
        params.index_of("not_a_parameter")


def test_groups_are_known():
    for d in params.DEFS:
        assert d.group in params.GROUPS


def test_labels_cover_defs_and_alias():
    for d in params.DEFS:
        assert params.LABEL_TO_ID[d.label] == d.id
    # the capacity parameter is reachable under both of its display names
    assert params.LABEL_TO_ID["Soil field capacity"] == "swc_field_capacity"


def test_defaults_inside_bounds():
    ps = params.default_params()
    assert ps.violations() == []
    for d in params.DEFS:
        assert d.hard_bounds[0] <= d.default <= d.hard_bounds[1], d.id


def test_paramset_access_and_immutability():
    ps = params.default_params()
    i = params.index_of("initial_soil_depth")
    assert ps["initial_soil_depth"] == ps.values[i]
    with pytest.raises(AttributeError):
        ps.values = np.zeros(87)
    assert not ps.values.flags.writeable
    with pytest.raises(ValueError):
        ps.values[0] = 1.0


def test_paramset_shape_checked():
    with pytest.raises(ValueError):
        params.ParamSet(np.zeros(86))


def test_with_updates():
    ps = params.default_params()
    q = ps.with_updates({"avg_rain_depth": 9.0}, initial_soil_depth=250.0)
    assert q["avg_rain_depth"] == 9.0
    assert q["initial_soil_depth"] == 250.0
    assert ps["avg_rain_depth"] != 9.0  # original untouched
    changed = {"avg_rain_depth", "initial_soil_depth"}
    for d in params.DEFS:
        if d.id not in changed:
            assert q[d.id] == ps[d.id]
    with pytest.raises(KeyError):
        ps.with_updates({"nope": 1.0})


def test_violations_reported():
    ps = params.default_params().with_updates({"avg_rain_probability": 2.0})
    out = ps.violations()
    assert len(out) == 1 and "avg_rain_probability" in out[0]
    with pytest.raises(ValueError):
        ps.validate()
    nan_ps = params.default_params().with_updates({"avg_et0": float("nan")})
    assert any("not finite" in v for v in nan_ps.violations())


def test_build_space_ranges():
    ps = params.default_params()
    space = params.build_space(ps, fraction=0.3)
    assert space.k == 70
    assert list(space.ids) == [d.id for d in params.DEFS if d.vary_in_sa]
    for pid, lo, hi in zip(space.ids, space.lower, space.upper):
        d = params.DEFS[params.index_of(pid)]
        v = ps[pid]
        raw_lo, raw_hi = sorted((0.7 * v, 1.3 * v))
        assert lo == max(raw_lo, d.hard_bounds[0]) or (
            lo == d.hard_bounds[0])  # collapsed-range fallback
        assert lo >= d.hard_bounds[0] and hi <= d.hard_bounds[1]
        assert lo < hi, pid
        assert lo <= v <= hi or not raw_lo < raw_hi


def test_build_space_plain_case_exact():
    ps = params.default_params()
    space = params.build_space(ps, fraction=0.3)
    j = list(space.ids).index("avg_rain_depth")
    v = ps["avg_rain_depth"]
    assert space.lower[j] == 0.7 * v
    assert space.upper[j] == 1.3 * v


def test_build_space_rejects_bad_fraction():
    with pytest.raises(ValueError):
        params.build_space(fraction=0.0)
    with pytest.raises(ValueError):
        params.build_space(fraction=1.0)


def test_space_contains():
    space = params.build_space(params.default_params())
    mid = 0.5 * (space.lower + space.upper)
    assert space.contains(mid)
    bad = mid.copy()
    bad[3] = space.upper[3] * 2 + 1
    assert not space.contains(bad)


def test_apply_scenario_touches_only_varied():
    ps = params.default_params()
    space = params.build_space(ps)
    row = 0.25 * space.lower + 0.75 * space.upper
    q = params.apply_scenario(ps, space, row)
    for pid, val in zip(space.ids, row):
        assert q[pid] == val
    for d in params.DEFS:
        if not d.vary_in_sa:
            assert q[d.id] == ps[d.id]
    with pytest.raises(ValueError):
        params.apply_scenario(ps, space, row[:-1])


def test_json_round_trip(tmp_path):
    ps = params.default_params().with_updates({"avg_et0": 1.4})
    path = tmp_path / "p.json"
    params.save_params(ps, path)
    back = params.load_params(path)
    assert np.array_equal(back.values, ps.values)
    doc = json.loads(path.read_text())
    assert doc["schema"] == "rangesim-params-v1"
    assert len(doc["params"]) == 87


def test_values_mapping_round_trip(tmp_path):
    path = tmp_path / "v.json"
    path.write_text(json.dumps(
        {"values": {"avg_rain_depth": 8.25, "culling_rate": 0.11}}))
    with pytest.raises(ValueError):
        params.load_params(path)  # partial file needs the merge flag
    ps = params.load_params(path, merge_defaults=True)
    assert ps["avg_rain_depth"] == 8.25
    assert ps["culling_rate"] == 0.11


def test_ini_round_trip(tmp_path):
    defaults = params.default_params()
    path = tmp_path / "p.ini"
    path.write_text("[driver-weather]\navg_rain_depth = 7.5\n"
                    "[initial-stock]\ninitial_soil_depth = 321.0\n")
    with pytest.raises(ValueError):
        params.load_params(path)
    merged = params.load_params(path, merge_defaults=True)
    assert merged["avg_rain_depth"] == 7.5
    assert merged["initial_soil_depth"] == 321.0
    assert merged["avg_et0"] == defaults["avg_et0"]


def test_unknown_id_rejected(tmp_path):
    doc = params.canonical_document(params.default_params())
    doc["params"].append({"id": "mystery_knob", "default": 1.0})
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        params.load_params(path)
    ini = tmp_path / "bad.ini"
    ini.write_text("[driver-weather]\nmystery_knob = 1\n")
    with pytest.raises(ValueError):
        params.load_params(ini, merge_defaults=True)


def test_metadata_disagreement_rejected(tmp_path):
    doc = params.canonical_document(params.default_params())
    doc["params"][0]["group"] = "initial-stock"
    path = tmp_path / "meta.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        params.load_params(path)


def test_shipped_defaults_in_sync():
    import importlib.resources as res
    shipped = (res.files("rangesim") / "data"
               / params.DEFAULTS_FILENAME).read_text()
    assert json.loads(shipped) == params.canonical_document(
        params.default_params())


def test_load_default_path_equals_defaults():
    assert params.load_params(None) == params.default_params()


def test_sa_domain_partition():
    seen = {"economic": 0, "biophysical": 0}
    for pid in params.VARIED_IDS:
        dom = params.sa_domain(pid)
        assert dom in seen
        seen[dom] += 1
    assert seen["economic"] + seen["biophysical"] == 70
    # spot checks on both sides of the split
    assert params.sa_domain("avg_wop_level") == "economic"
    assert params.sa_domain("snstty_farmers_profit") == "economic"
    assert params.sa_domain("initial_local_output_price") == "economic"
    assert params.sa_domain("farmer_flow_calibration") == "economic"
    assert params.sa_domain("avg_rain_depth") == "biophysical"
    assert params.sa_domain("random_seed") == "biophysical"
    assert params.sa_domain("initial_soil_depth") == "biophysical"
    assert params.sa_domain("erosion_rate_calibration") == "biophysical"
