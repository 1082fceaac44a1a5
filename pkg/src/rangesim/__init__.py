"""Coupled rangeland system-dynamics model with variance-based sensitivity analysis.

The package simulates a grazed rangeland as three coupled submodels (weather
and economic drivers, an environmental soil/water/herbage submodel, and a
socio-economic farm/market submodel) and ships a full Sobol-style global
sensitivity pipeline over the model's varied parameters.
"""

__version__ = "0.1.0"

from .engine import (
    TARGET_NAMES,
    BatchResult,
    RunConfig,
    RunResult,
    SimulationError,
    Targets,
    run_batch,
    simulate,
)
from .params import (
    DEFS,
    ParamDef,
    ParamSet,
    ParamSpace,
    apply_scenario,
    build_space,
    default_params,
    load_params,
    sa_domain,
    save_params,
)
from .sa import (
    METHODS,
    SobolResult,
    convergence_series,
    design_matrices,
    estimate_indices,
    lhs_sample,
    scenario_matrix,
    scenario_rows,
    split_outputs,
)

__all__ = [
    "BatchResult",
    "DEFS",
    "METHODS",
    "ParamDef",
    "ParamSet",
    "ParamSpace",
    "RunConfig",
    "RunResult",
    "SimulationError",
    "SobolResult",
    "TARGET_NAMES",
    "Targets",
    "apply_scenario",
    "build_space",
    "convergence_series",
    "default_params",
    "design_matrices",
    "estimate_indices",
    "lhs_sample",
    "load_params",
    "run_batch",
    "sa_domain",
    "save_params",
    "scenario_matrix",
    "scenario_rows",
    "simulate",
    "split_outputs",
    "__version__",
]
