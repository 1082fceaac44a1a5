"""Integrated simulation engine.

One run couples the two submodels over a fixed-step horizon: each step the
socio-economic submodel acts on the herbage standing at the start of the step,
then the environmental submodel advances under the stocking rate that results.
The whole loop is one numba kernel built from the exact same compiled step
cores the public per-step functions use, so a kernel run and a hand-stepped
run agree bit for bit.

A run is a pure function of its parameter vector and the campaign base seed:
weather noise comes from a counter-based stream keyed on
(base_seed, floor(random_seed)), so two parameter vectors sharing a
'Random seed' value experience identical weather whatever else differs.

Targets reported per run:
  soil_depth_end   remaining topsoil depth at the end of the horizon (mm)
  avg_farmers      mean active farms over the run
  avg_stocking     mean stocking rate on grazed land (LU/ha)
  avg_herbage      mean standing herbage grazed each step (kg DM/ha)
  avg_earnings     mean per-farm profit rate (EUR/farm/yr; 0 with no farms)
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from . import rng as _rng
from .drivers import (SLOT_DEPTH, SLOT_ENERGY, SLOT_ET0, SLOT_RUNOFF,
                      SLOT_WET, SLOTS_PER_STEP, _econ_core, _et0_core,
                      _rain_core, _runoff_noise_core)
from .env import EnvState, _env_step, init_state as init_env_state
from .params import PARAM_INDEX, ParamSet
from .socio import (FL_ADEQUACY, FL_PROFIT_PER_FARM, FL_STOCKING, N_FLOW,
                    N_STATE, S_P_OUT, SocioState, _socio_step,
                    init_state as init_socio_state)

_njit = numba.njit(cache=True)

_I_SEED = PARAM_INDEX["random_seed"]

TARGET_NAMES = ("soil_depth_end", "avg_farmers", "avg_stocking",
                "avg_herbage", "avg_earnings")

TRACE_COLUMNS = ("soil_depth", "moisture", "green", "dry", "farmers",
                 "breeding", "young", "stocking", "herbage",
                 "profit_per_farm", "adequacy", "p_out")

# kernel status codes
STATUS_OK = 0
STATUS_ENV_NOT_FINITE = 1
STATUS_SOCIO_NOT_FINITE = 2

_STATUS_TEXT = {
    STATUS_OK: "ok",
    STATUS_ENV_NOT_FINITE: "environmental state not finite",
    STATUS_SOCIO_NOT_FINITE: "socio-economic state not finite",
}


@dataclass(frozen=True)
class RunConfig:
    """Execution settings shared by every run of a campaign."""

    dt: float = 1.0 / 128.0   # years per step
    horizon: float = 300.0    # years
    base_seed: int = 0        # campaign-level seed folded into every stream key

    @property
    def n_steps(self) -> int:
        n = round(self.horizon / self.dt)
        if n <= 0:
            raise ValueError("horizon must cover at least one step")
        return n


@dataclass(frozen=True)
class Targets:
    soil_depth_end: float
    avg_farmers: float
    avg_stocking: float
    avg_herbage: float
    avg_earnings: float

    def as_array(self) -> np.ndarray:
        return np.array([self.soil_depth_end, self.avg_farmers,
                         self.avg_stocking, self.avg_herbage,
                         self.avg_earnings])


@dataclass(frozen=True)
class RunResult:
    targets: Targets
    final_env: EnvState
    final_socio: SocioState
    trace: dict[str, np.ndarray] | None


class SimulationError(RuntimeError):
    """A run left the valid state space."""

    def __init__(self, status: int, step: int):
        self.status = status
        self.step = step
        text = _STATUS_TEXT.get(status, f"status {status}")
        super().__init__(f"simulation failed at step {step}: {text}")


@_njit
def _run_kernel(pv, u_wet, z_depth, z_energy, z_et0, z_runoff,
                n_steps, dt, env0, socio0, targets_out, env_out, socio_out,
                trace_out, record):
    moisture = env0[0]
    soil = env0[1]
    green = env0[2]
    dry = env0[3]
    s = socio0.copy()
    s_next = np.empty(N_STATE)
    fl = np.empty(N_FLOW)

    acc_farmers = 0.0
    acc_stocking = 0.0
    acc_herbage = 0.0
    acc_earnings = 0.0

    for i in range(n_steps):
        t = i * dt
        rain, energy = _rain_core(t, u_wet[i], z_depth[i], z_energy[i], pv)
        et0 = _et0_core(t, z_et0[i], pv)
        eps_r = _runoff_noise_core(z_runoff[i], pv)
        wop, wofp, wsfp, wbfp, oc, opc = _econ_core(t, pv)

        herbage = green + dry
        _socio_step(s, herbage, wop, wofp, wsfp, wbfp, oc, opc, pv, dt,
                    s_next, fl)
        stocking = fl[FL_STOCKING]
        (moisture, soil, green, dry,
         _bd, _canopy, _runoff, _infil, _aet, _drain, _ero, _gfrac,
         _intake) = _env_step(moisture, soil, green, dry,
                              rain, energy, et0, eps_r, stocking, pv, dt)

        if not (math.isfinite(moisture) and math.isfinite(soil)
                and math.isfinite(green) and math.isfinite(dry)):
            return STATUS_ENV_NOT_FINITE, i
        for j in range(N_STATE):
            if not math.isfinite(s_next[j]):
                return STATUS_SOCIO_NOT_FINITE, i

        s, s_next = s_next, s
        acc_farmers += s[0]
        acc_stocking += stocking
        acc_herbage += herbage
        acc_earnings += fl[FL_PROFIT_PER_FARM]

        if record:
            trace_out[i, 0] = soil
            trace_out[i, 1] = moisture
            trace_out[i, 2] = green
            trace_out[i, 3] = dry
            trace_out[i, 4] = s[0]
            trace_out[i, 5] = s[1]
            trace_out[i, 6] = s[2]
            trace_out[i, 7] = stocking
            trace_out[i, 8] = herbage
            trace_out[i, 9] = fl[FL_PROFIT_PER_FARM]
            trace_out[i, 10] = fl[FL_ADEQUACY]
            trace_out[i, 11] = s[S_P_OUT]

    targets_out[0] = soil
    targets_out[1] = acc_farmers / n_steps
    targets_out[2] = acc_stocking / n_steps
    targets_out[3] = acc_herbage / n_steps
    targets_out[4] = acc_earnings / n_steps
    env_out[0] = moisture
    env_out[1] = soil
    env_out[2] = green
    env_out[3] = dry
    socio_out[:] = s
    return STATUS_OK, n_steps


def run_key(ps_or_values, base_seed: int) -> int:
    """Stream key for one run: campaign seed folded with floor('Random seed').

    Runs sharing a seed value share their weather exactly; the scenario's
    position in a campaign plays no part.
    """
    values = ps_or_values.values if isinstance(ps_or_values, ParamSet) else ps_or_values
    return _rng.derive_key(base_seed, int(math.floor(values[_I_SEED])))


def noise_arrays(key: int, n_steps: int):
    """The five per-step noise channels for one run, slot-aligned with the
    per-step sampling functions."""
    base = np.arange(n_steps, dtype=np.uint64) * np.uint64(SLOTS_PER_STEP)
    return (_rng.uniforms_for(key, base + np.uint64(SLOT_WET)),
            _rng.normals_for(key, base + np.uint64(SLOT_DEPTH)),
            _rng.normals_for(key, base + np.uint64(SLOT_ENERGY)),
            _rng.normals_for(key, base + np.uint64(SLOT_ET0)),
            _rng.normals_for(key, base + np.uint64(SLOT_RUNOFF)))


def _run_values(values: np.ndarray, cfg: RunConfig, record: bool):
    n_steps = cfg.n_steps
    key = run_key(values, cfg.base_seed)
    u_wet, z_depth, z_energy, z_et0, z_runoff = noise_arrays(key, n_steps)
    env0 = np.empty(4)
    ps = ParamSet(values)
    e = init_env_state(ps)
    env0[0], env0[1], env0[2], env0[3] = e.moisture, e.soil_depth, e.green, e.dry
    socio0 = init_socio_state(ps).as_array()
    targets = np.empty(5)
    env_out = np.empty(4)
    socio_out = np.empty(N_STATE)
    trace = np.empty((n_steps, len(TRACE_COLUMNS))) if record else np.empty((1, len(TRACE_COLUMNS)))
    status, step = _run_kernel(values, u_wet, z_depth, z_energy, z_et0,
                               z_runoff, n_steps, cfg.dt, env0, socio0,
                               targets, env_out, socio_out, trace, record)
    return status, step, targets, env_out, socio_out, trace


def simulate(ps: ParamSet, cfg: RunConfig | None = None,
             record_trace: bool = False) -> RunResult:
    """Run the coupled model once; raises SimulationError on failure."""
    cfg = cfg or RunConfig()
    status, step, targets, env_out, socio_out, trace = _run_values(
        np.ascontiguousarray(ps.values, dtype=np.float64), cfg, record_trace)
    if status != STATUS_OK:
        raise SimulationError(status, step)
    trace_dict = None
    if record_trace:
        trace_dict = {"t": np.arange(cfg.n_steps) * cfg.dt + cfg.dt}
        for j, name in enumerate(TRACE_COLUMNS):
            trace_dict[name] = trace[:, j].copy()
    return RunResult(
        targets=Targets(*(float(x) for x in targets)),
        final_env=EnvState(*(float(x) for x in env_out)),
        final_socio=SocioState.from_array(socio_out),
        trace=trace_dict,
    )


# -- batch execution ---------------------------------------------------------

_WORKER_CFG: RunConfig | None = None


def _init_worker(cfg: RunConfig) -> None:
    global _WORKER_CFG
    _WORKER_CFG = cfg


def _run_chunk(args):
    start, rows = args
    cfg = _WORKER_CFG
    out = np.empty((rows.shape[0], 5))
    statuses = np.zeros(rows.shape[0], dtype=np.int64)
    steps = np.zeros(rows.shape[0], dtype=np.int64)
    for j in range(rows.shape[0]):
        status, step, targets, _e, _s, _t = _run_values(rows[j], cfg, False)
        statuses[j] = status
        steps[j] = step
        out[j] = targets if status == STATUS_OK else np.nan
    return start, out, statuses, steps


@dataclass(frozen=True)
class BatchResult:
    """Targets and statuses for a batch; failed rows hold NaN targets."""

    targets: np.ndarray    # (n, 5)
    statuses: np.ndarray   # (n,) kernel status codes
    fail_steps: np.ndarray  # (n,) step of failure for non-ok rows

    @property
    def n_failed(self) -> int:
        return int(np.count_nonzero(self.statuses))

    def status_text(self, i: int) -> str:
        return _STATUS_TEXT.get(int(self.statuses[i]), f"status {self.statuses[i]}")


def run_batch(param_rows: np.ndarray, cfg: RunConfig | None = None,
              workers: int = 1, chunk_size: int | None = None) -> BatchResult:
    """Run one row of parameter values per scenario, preserving order.

    Failures are reported per row (status + step), never silently dropped;
    their target cells are NaN.
    """
    cfg = cfg or RunConfig()
    rows = np.ascontiguousarray(param_rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != len(PARAM_INDEX):
        raise ValueError(f"param_rows must be (n, {len(PARAM_INDEX)})")
    n = rows.shape[0]
    targets = np.empty((n, 5))
    statuses = np.zeros(n, dtype=np.int64)
    fail_steps = np.zeros(n, dtype=np.int64)

    if chunk_size is None:
        chunk_size = max(1, min(256, n // max(workers * 4, 1) or 1))
    chunks = [(i, rows[i:i + chunk_size]) for i in range(0, n, chunk_size)]

    if workers <= 1:
        _init_worker(cfg)
        results = map(_run_chunk, chunks)
        for start, out, st, fs in results:
            targets[start:start + out.shape[0]] = out
            statuses[start:start + out.shape[0]] = st
            fail_steps[start:start + out.shape[0]] = fs
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(cfg,)) as pool:
            for start, out, st, fs in pool.map(_run_chunk, chunks):
                targets[start:start + out.shape[0]] = out
                statuses[start:start + out.shape[0]] = st
                fail_steps[start:start + out.shape[0]] = fs
    return BatchResult(targets=targets, statuses=statuses, fail_steps=fail_steps)
