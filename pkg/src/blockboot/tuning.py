"""Data-driven selection of the number of blocks and block length.

Candidate plans are parametrized as ``n_blocks = floor(c1 * n**(1/3))`` and
``block_length = floor(c2 * n**(1/3))``.  For each candidate, the full-sample
bootstrap CDF estimate at a point ``x`` is compared against the analogous
estimates computed on shorter subsamples of ``M`` consecutive observations;
the average ``rho``-th absolute power of the discrepancies estimates the
plan's distribution-estimation error, and the grid minimizer is selected.

Evaluating all ``n - M + 1`` subsamples is supported but expensive; by
default 20 subsamples equally spaced along the series are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .empirical import as_values, guarded_floor
from .estimators import quantile_deviation_prob
from .resample import BlockPlan, ResamplePlan
from .seeding import float_key, subseed

__all__ = [
    "TuneConfig",
    "CellDiagnostics",
    "SelectionResult",
    "NoFeasiblePlanError",
    "plan_from_constants",
    "default_subsample_len",
    "subsample_starts",
    "tuning_subseed",
    "tuning_error",
    "grid_diagnostics",
    "select_plan",
]

_TUNE_TAG = 0x74756E65  # ascii "tune"


class NoFeasiblePlanError(ValueError):
    """Raised when no grid cell yields a valid plan at both sample sizes."""


@dataclass(frozen=True)
class TuneConfig:
    """Settings for the subsample-based plan selection.

    Attributes
    ----------
    c1_grid, c2_grid : tuple of float
        Candidate constants for the number of blocks and the block length.
    x : float
        Evaluation point of the bootstrap CDF estimates.
    n_boot : int
        Bootstrap replicates per CDF evaluation (full sample and subsamples).
    seed : int
        Master seed; every evaluation derives an independent substream from
        it, keyed by the candidate constants and the subsample window.
    subsample_len : int or None
        Subsample length ``M``; defaults to ``max(32, n // 8)``.
    subsample_count : int
        Number of equally spaced subsamples; 0 means all ``n - M + 1``.
    rho : float
        Exponent of the absolute discrepancy (default squared error).
    p : float
        Quantile level under study.
    """

    c1_grid: tuple
    c2_grid: tuple
    x: float
    n_boot: int
    seed: int
    subsample_len: int | None = None
    subsample_count: int = 20
    rho: float = 2.0
    p: float = 0.5

    def __post_init__(self):
        if len(self.c1_grid) == 0 or len(self.c2_grid) == 0:
            raise ValueError("candidate grids must be nonempty")
        if self.rho <= 0:
            raise ValueError("rho must be positive")


@dataclass(frozen=True)
class CellDiagnostics:
    """Per-cell tuning output: error estimate plus the full-sample CDF value."""

    c1: float
    c2: float
    plan: BlockPlan | None
    err: float
    full_sample_prob: float


@dataclass(frozen=True)
class SelectionResult:
    c1: float
    c2: float
    plan: BlockPlan
    table: tuple


def plan_from_constants(n: int, c1: float, c2: float) -> BlockPlan:
    """Block plan ``(floor(c1 * n**(1/3)), floor(c2 * n**(1/3)))``.

    The cube root is guarded against half-ulp rounding so exact cubes like
    ``512`` or ``1728`` floor to their integer roots.
    """
    root = float(np.cbrt(n))
    b = guarded_floor(c1 * root)
    ell = guarded_floor(c2 * root)
    if b < 1 or ell < 1 or ell > n:
        raise ValueError(f"degenerate plan for n={n}, c1={c1}, c2={c2}: b={b}, ell={ell}")
    return BlockPlan(n_blocks=b, block_length=ell)


def default_subsample_len(n: int) -> int:
    """Heuristic subsample length ``max(32, n // 8)`` (clipped to ``n``)."""
    return min(n, max(32, n // 8))


def subsample_starts(n: int, subsample_len: int, count: int) -> np.ndarray:
    """Start offsets (0-based) of ``count`` equally spaced length-``M`` subsamples.

    ``count = 0`` yields all ``n - M + 1`` starts.  Otherwise starts are
    ``round((j - 1) * (n - M) / (count - 1))`` for ``j = 1..count`` with
    half-up rounding, deduplicated preserving order.
    """
    m = int(subsample_len)
    if m < 1 or m > n:
        raise ValueError(f"subsample length must satisfy 1 <= M <= n, got M={m}, n={n}")
    if count == 0:
        return np.arange(n - m + 1, dtype=np.int64)
    if count < 2:
        raise ValueError("subsample count must be 0 (all) or at least 2")
    j = np.arange(count, dtype=float)
    starts = np.floor(j * (n - m) / (count - 1) + 0.5).astype(np.int64)
    _, first = np.unique(starts, return_index=True)
    return starts[np.sort(first)]


def tuning_subseed(seed: int, c1: float, c2: float, start: int, length: int) -> int:
    """Sub-seed of one CDF evaluation, keyed by candidate constants and window.

    Keying by the window rather than by subsample ordinal makes the
    full-sample evaluation and a subsample covering the whole series share a
    stream, so their estimates coincide exactly.
    """
    return subseed(seed, _TUNE_TAG, float_key(c1), float_key(c2), start, length)


def _cell_diagnostics(values: np.ndarray, cfg: TuneConfig, c1: float, c2: float) -> CellDiagnostics:
    n = values.size
    m = default_subsample_len(n) if cfg.subsample_len is None else int(cfg.subsample_len)
    try:
        plan_full = plan_from_constants(n, c1, c2)
        plan_sub = plan_from_constants(m, c1, c2)
    except ValueError:
        return CellDiagnostics(c1=c1, c2=c2, plan=None, err=math.nan, full_sample_prob=math.nan)
    rp_full = ResamplePlan(plan_full, cfg.n_boot, tuning_subseed(cfg.seed, c1, c2, 0, n))
    g_full = quantile_deviation_prob(values, rp_full, cfg.p, cfg.x)
    deviations = []
    for start in subsample_starts(n, m, cfg.subsample_count):
        window = values[start : start + m]
        rp_sub = ResamplePlan(plan_sub, cfg.n_boot, tuning_subseed(cfg.seed, c1, c2, int(start), m))
        g_sub = quantile_deviation_prob(window, rp_sub, cfg.p, cfg.x)
        deviations.append(abs(g_sub - g_full) ** cfg.rho)
    return CellDiagnostics(c1=c1, c2=c2, plan=plan_full, err=float(np.mean(deviations)), full_sample_prob=g_full)


def tuning_error(series, cfg: TuneConfig, c1: float, c2: float) -> float:
    """Subsample-based error estimate of the plan induced by ``(c1, c2)``.

    Averages ``|G_M^(j)(x) - G_n(x)| ** rho`` over the selected subsamples,
    where each ``G`` is a Monte Carlo bootstrap CDF estimate at ``x`` using
    the plan constants scaled to the respective sample size.
    """
    values = as_values(series)
    diag = _cell_diagnostics(values, cfg, c1, c2)
    if diag.plan is None:
        raise ValueError(f"degenerate plan for c1={c1}, c2={c2}")
    return diag.err


def grid_diagnostics(series, cfg: TuneConfig) -> list[CellDiagnostics]:
    """Tuning diagnostics for every cell of the candidate grid.

    Cells whose plan is degenerate at either sample size carry ``nan`` error
    and a ``None`` plan; the row order is ``c1`` outer, ``c2`` inner.
    """
    values = as_values(series)
    return [_cell_diagnostics(values, cfg, c1, c2) for c1 in cfg.c1_grid for c2 in cfg.c2_grid]


def argmin_cell(diagnostics) -> int:
    """Index of the minimal-error cell, ties broken by smaller c2 then smaller c1."""
    best = -1
    best_key = None
    for i, d in enumerate(diagnostics):
        if d.plan is None or math.isnan(d.err):
            continue
        key = (d.err, d.c2, d.c1)
        if best_key is None or key < best_key:
            best, best_key = i, key
    if best < 0:
        raise NoFeasiblePlanError("every candidate cell yields a degenerate plan")
    return best


def select_plan(series, cfg: TuneConfig) -> SelectionResult:
    """Select the candidate constants minimizing the subsample error estimate.

    Returns the winning constants, the induced full-sample plan, and the
    complete diagnostics table.
    """
    table = grid_diagnostics(series, cfg)
    best = table[argmin_cell(table)]
    return SelectionResult(c1=best.c1, c2=best.c2, plan=best.plan, table=tuple(table))
