"""Variance-based global sensitivity analysis.

Design: two independent Latin hypercube matrices A and B over the parameter
space, plus one hybrid matrix AB(i) per input, equal to A with column i taken
from B. The scenario list is the rows of A, then B, then each AB(i) block, so
a space with k inputs costs N*(k+2) model runs.

Two estimators are provided for the first-order (Si) and total-effect (STi)
indices:

'jansen-saltelli'
    Si  = mean(yB * (yAB_i - yA)) / V        (Saltelli's 2010 first-order)
    STi = mean((yA - yAB_i)^2) / (2 V)       (Jansen's total effect)
    with V the population variance of yA and yB pooled.

'b3'
    A correlation form: standardize yA, yB and each yAB_i to zero mean and
    unit variance, let r0 = corr(zA, zB) (the spurious baseline), then
    Si  = (corr(zB, zAB_i) - r0) / (1 - r0)
    STi = 1 - (corr(zA, zAB_i) - r0) / (1 - r0).
    The r0 correction removes the finite-sample correlation between the two
    base matrices from both indices.

Both are checked against closed-form benchmarks in the test suite. Standard
errors come from joint bootstrap resampling of scenario rows. A constant
output is reported as degenerate with all indices zero rather than 0/0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import rng as _rng
from .params import PARAM_INDEX, ParamSet, ParamSpace

_DESIGN_TAG = 0x5A17
_BOOT_TAG = 0xB007
# relative variance below this marks an output as effectively constant
_DEGENERATE_REL_VAR = 1e-12


def lhs_sample(space: ParamSpace, n: int, stream: _rng.RngStream) -> np.ndarray:
    """Latin hypercube sample of n points over the space, shape (n, k).

    Each column is independently stratified: exactly one point falls in each
    of the n equal-width bins of every parameter's range.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    out = np.empty((n, space.k))
    width = (space.upper - space.lower) / n
    for j in range(space.k):
        perm = stream.permutation(n).astype(np.float64)
        u = stream.uniforms(n)
        out[:, j] = space.lower[j] + (perm + u) * width[j]
    return out


def design_matrices(space: ParamSpace, n: int,
                    base_seed: int) -> tuple[np.ndarray, np.ndarray]:
    """The two independent LHS base matrices for a campaign, deterministically
    derived from the campaign seed."""
    stream = _rng.RngStream(_rng.derive_key(base_seed, _DESIGN_TAG))
    a = lhs_sample(space, n, stream)
    b = lhs_sample(space, n, stream)
    return a, b


def scenario_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Stack the full scenario list: rows of A, of B, then each AB(i) block,
    where AB(i) is A with column i replaced by B's column i. Shape (n(k+2), k)."""
    if a.shape != b.shape:
        raise ValueError("A and B must have identical shapes")
    n, k = a.shape
    blocks = [a, b]
    for i in range(k):
        ab = a.copy()
        ab[:, i] = b[:, i]
        blocks.append(ab)
    return np.vstack(blocks)


def split_outputs(y: np.ndarray, n: int, k: int):
    """Inverse of scenario_matrix ordering: (yA, yB, yAB) with yAB (n, k)."""
    if y.shape[0] != n * (k + 2):
        raise ValueError(f"expected {n * (k + 2)} outputs, got {y.shape[0]}")
    y_a = y[:n]
    y_b = y[n:2 * n]
    y_ab = np.empty((n, k))
    for i in range(k):
        y_ab[:, i] = y[(2 + i) * n:(3 + i) * n]
    return y_a, y_b, y_ab


def scenario_rows(base: ParamSet, space: ParamSpace,
                  scenarios: np.ndarray) -> np.ndarray:
    """Full parameter-vector rows for a scenario matrix: non-varied entries
    keep the base values bit for bit."""
    rows = np.tile(base.values, (scenarios.shape[0], 1))
    idx = np.array([PARAM_INDEX[pid] for pid in space.ids])
    rows[:, idx] = scenarios
    return rows


@dataclass(frozen=True)
class SobolResult:
    method: str
    n: int
    si: np.ndarray
    sti: np.ndarray
    variance: float
    mean: float
    degenerate: bool
    se_si: np.ndarray | None = None
    se_sti: np.ndarray | None = None


def _check_shapes(y_a, y_b, y_ab):
    n = y_a.shape[0]
    if y_b.shape[0] != n or y_ab.shape[0] != n:
        raise ValueError("yA, yB and yAB must share their first dimension")


def _js_indices(y_a, y_b, y_ab):
    pooled = np.concatenate([y_a, y_b])
    v = float(np.var(pooled))
    si = np.mean(y_b[:, None] * (y_ab - y_a[:, None]), axis=0) / v
    sti = np.mean((y_a[:, None] - y_ab) ** 2, axis=0) / (2.0 * v)
    return si, sti, v


def _standardize(x):
    s = float(np.std(x))
    if s == 0.0:
        return np.zeros_like(x)
    return (x - np.mean(x)) / s


def _b3_indices(y_a, y_b, y_ab):
    za = _standardize(y_a)
    zb = _standardize(y_b)
    sd = np.std(y_ab, axis=0)
    zab = np.divide(y_ab - np.mean(y_ab, axis=0),
                    np.where(sd == 0.0, 1.0, sd))
    r0 = float(np.mean(za * zb))
    v = float(np.var(np.concatenate([y_a, y_b])))
    denom = 1.0 - r0
    if denom <= 1e-12:
        # A and B outputs indistinguishable: the sample carries no
        # information about either index.
        k = y_ab.shape[1]
        return np.zeros(k), np.zeros(k), v
    r_b = np.mean(zb[:, None] * zab, axis=0)
    r_a = np.mean(za[:, None] * zab, axis=0)
    si = (r_b - r0) / denom
    sti = 1.0 - (r_a - r0) / denom
    return si, sti, v


_ESTIMATORS = {"jansen-saltelli": _js_indices, "b3": _b3_indices}

METHODS = tuple(_ESTIMATORS)


def _is_degenerate(y_a, y_b):
    pooled = np.concatenate([y_a, y_b])
    v = float(np.var(pooled))
    m = float(np.mean(pooled))
    return v <= _DEGENERATE_REL_VAR * max(1.0, m * m), v, m


def estimate_indices(y_a: np.ndarray, y_b: np.ndarray, y_ab: np.ndarray,
                     method: str = "jansen-saltelli", n_boot: int = 0,
                     stream: _rng.RngStream | None = None) -> SobolResult:
    """Si and STi for every input from the outputs of one scenario list.

    n_boot > 0 adds bootstrap standard errors from joint row resampling.
    """
    if method not in _ESTIMATORS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    y_a = np.asarray(y_a, dtype=np.float64)
    y_b = np.asarray(y_b, dtype=np.float64)
    y_ab = np.asarray(y_ab, dtype=np.float64)
    _check_shapes(y_a, y_b, y_ab)
    n, k = y_ab.shape

    degenerate, v, m = _is_degenerate(y_a, y_b)
    if degenerate:
        zero = np.zeros(k)
        return SobolResult(method, n, zero, zero.copy(), v, m, True,
                           se_si=np.zeros(k) if n_boot else None,
                           se_sti=np.zeros(k) if n_boot else None)

    est = _ESTIMATORS[method]
    si, sti, v = est(y_a, y_b, y_ab)

    se_si = se_sti = None
    if n_boot > 0:
        if stream is None:
            stream = _rng.RngStream(_rng.derive_key(0, _BOOT_TAG))
        reps_si = np.empty((n_boot, k))
        reps_sti = np.empty((n_boot, k))
        for r in range(n_boot):
            idx = stream.integers(n, n)
            ra, rb, rab = y_a[idx], y_b[idx], y_ab[idx]
            if _is_degenerate(ra, rb)[0]:
                reps_si[r] = 0.0
                reps_sti[r] = 0.0
            else:
                reps_si[r], reps_sti[r], _ = est(ra, rb, rab)
        se_si = np.std(reps_si, axis=0, ddof=1)
        se_sti = np.std(reps_sti, axis=0, ddof=1)

    return SobolResult(method, n, si, sti, float(v), float(m), False,
                       se_si=se_si, se_sti=se_sti)


@dataclass(frozen=True)
class ConvergencePoint:
    n: int
    si: np.ndarray
    sti: np.ndarray


def convergence_series(y_a: np.ndarray, y_b: np.ndarray, y_ab: np.ndarray,
                       method: str = "jansen-saltelli",
                       fractions=(0.125, 0.25, 0.5, 1.0)) -> list[ConvergencePoint]:
    """Indices re-estimated on nested prefixes of the design, to show how the
    estimates settle as N grows."""
    n = y_a.shape[0]
    sizes = sorted({max(2, int(round(n * f))) for f in fractions})
    out = []
    for m in sizes:
        r = estimate_indices(y_a[:m], y_b[:m], y_ab[:m], method=method)
        out.append(ConvergencePoint(m, r.si, r.sti))
    return out


def monotone_signs(a: np.ndarray, y_a: np.ndarray) -> np.ndarray:
    """Spearman rank correlation of each design column with the output on
    matrix A; the sign gives the direction of monotone influence. A constant
    column or output has no rank relation and scores 0."""
    k = a.shape[1]
    rho = np.empty(k)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", stats.ConstantInputWarning)
        for i in range(k):
            r = stats.spearmanr(a[:, i], y_a).statistic
            rho[i] = 0.0 if np.isnan(r) else r
    return rho
