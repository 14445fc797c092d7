"""Monte Carlo experiment engine: reference values, error grids, rate and tuning studies.

Every experiment follows the same protocol: simulate ``n_reps`` independent
series, evaluate a bootstrap estimator on each over a grid of block plans,
and aggregate per-cell metrics against a reference value obtained from a
separate massive simulation.  Seeding is hierarchical; the substream of each
(cell, replication) pair is derived from the master seed alone, so results
are bit-identical for any worker count and any scheduling order.

Grids default to ``n_blocks`` 1..40 by even ``block_length`` 2..40
intersected with ``n_blocks * block_length <= n``, extended with the
moving-block rows ``n_blocks = floor(n / block_length)`` that fall outside
that rectangle.
"""

from __future__ import annotations

import json
import math
import multiprocessing
import os
import tempfile
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .empirical import order_stat_index
from .estimators import cdf_deviation_prob, lower_confidence_bound, quantile_deviation_prob
from .models import ModelSpec, simulate_batch
from .resample import BlockPlan, ResamplePlan, exact_quantile_distribution
from .seeding import subseed, substream
from .tuning import TuneConfig, argmin_cell, grid_diagnostics, plan_from_constants

__all__ = [
    "GridSpec",
    "ExperimentConfig",
    "GridRow",
    "GridResult",
    "RefResult",
    "RateResult",
    "AdaptiveResult",
    "ReferenceCache",
    "mbb_plan",
    "reference_value",
    "mse_grid",
    "coverage_grid",
    "cdf_mse_grid",
    "rate_study",
    "adaptive_study",
    "log_log_slope",
    "replication_seed",
    "cell_seed",
    "reference_seed",
    "tuning_replication_seed",
    "write_grid_csv",
    "write_reference_csv",
    "write_err_table_csv",
    "err_table_rows",
    "write_tune_study_csv",
    "write_rate_csvs",
    "write_manifest",
]

_TAG_REFERENCE = 0
_TAG_SERIES = 1
_TAG_BOOT = 2
_TAG_TUNE = 3

_REP_CHUNK = 32
_REF_CHUNK = 10_000


def replication_seed(master_seed: int, rep: int) -> int:
    """Sub-seed generating the series of outer replication ``rep``."""
    return subseed(master_seed, _TAG_SERIES, rep)


def cell_seed(master_seed: int, cell_index: int, rep: int) -> int:
    """Sub-seed of the bootstrap draws for one grid cell in one replication."""
    return subseed(master_seed, _TAG_BOOT, cell_index, rep)


def reference_seed(master_seed: int, chunk_index: int) -> int:
    """Sub-seed of one fixed-size chunk of the reference simulation."""
    return subseed(master_seed, _TAG_REFERENCE, chunk_index)


def tuning_replication_seed(master_seed: int, rep: int) -> int:
    """Master seed handed to the plan-selection procedure in replication ``rep``."""
    return subseed(master_seed, _TAG_TUNE, rep)


def mbb_plan(n: int, block_length: int) -> BlockPlan:
    """Moving-block plan for sample size ``n``: ``floor(n/ell)`` blocks of length ``ell``."""
    return BlockPlan.mbb(n, block_length)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular (n_blocks, block_length) grid, optionally with explicit cells.

    The block length advances in steps of ``ell_step`` (default 2, i.e. even
    lengths only).  At ``p = 1/2`` an odd pasted-series length makes the
    resampled quantile the exact middle order statistic while an even length
    gives the lower middle; tiny odd products ``n_blocks * block_length``
    exploit that parity to track median-deviation probabilities far better
    than the surrounding surface, which distorts row minima.  The even-length
    default keeps the surface comparable across cells; set ``ell_step=1`` to
    scan every length.
    """

    b_min: int = 1
    b_max: int = 40
    ell_min: int = 2
    ell_max: int = 40
    ell_step: int = 2
    cap_to_n: bool = True
    include_mbb: bool = True
    cells: tuple | None = None

    def plans(self, n: int) -> list[BlockPlan]:
        if self.cells is not None:
            plans = [BlockPlan(int(b), int(ell)) for b, ell in self.cells]
            if not plans:
                raise ValueError("explicit cell list is empty")
            return plans
        plans = []
        lengths = [ell for ell in range(self.ell_min, self.ell_max + 1, self.ell_step) if ell <= n]
        for ell in lengths:
            b_top = min(self.b_max, n // ell) if self.cap_to_n else self.b_max
            for b in range(self.b_min, b_top + 1):
                plans.append(BlockPlan(b, ell))
        if self.include_mbb:
            seen = {(p.n_blocks, p.block_length) for p in plans}
            for ell in lengths:
                b = n // ell
                if b >= 1 and (b, ell) not in seen:
                    plans.append(BlockPlan(b, ell))
                    seen.add((b, ell))
        if not plans:
            raise ValueError(f"grid is empty for n={n}")
        return plans


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings shared by all experiments; unused fields are ignored.

    ``n_reps`` and ``n_boot`` default to a desk-scale 2000/2000;
    ``ref_sims`` to one million.  ``ref_value`` (or ``ref_values`` keyed by
    sample size) bypasses the reference simulation.
    """

    model: ModelSpec
    n: int = 200
    n_list: tuple = ()
    p: float = 0.5
    x: float = 0.0
    y: float | None = None
    alpha: float | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    n_reps: int = 2000
    n_boot: int = 2000
    ref_sims: int = 1_000_000
    ref_value: float | None = None
    ref_values: tuple = ()
    exact: bool = False
    exact_cap: int = 10**6
    c1_grid: tuple = (0.5, 0.75, 1.0, 1.5, 2.0)
    c2_grid: tuple = (0.5, 0.75, 1.0, 1.5, 2.0)
    subsample_len: int | None = None
    subsample_count: int = 20
    rho: float = 2.0
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.n_reps < 1 or self.n_boot < 1 or self.ref_sims < 1:
            raise ValueError("n_reps, n_boot and ref_sims must be at least 1")


@dataclass(frozen=True)
class RefResult:
    value: float
    stderr: float
    n_sims: int


@dataclass(frozen=True)
class GridRow:
    n_blocks: int
    block_length: int
    metric: str
    value: float
    stderr: float


@dataclass(frozen=True)
class GridResult:
    rows: tuple
    meta: dict

    def cells(self) -> list[tuple[int, int]]:
        return [(r.n_blocks, r.block_length) for r in self.rows]

    def min_row(self, where=None) -> GridRow:
        candidates = [r for r in self.rows if where is None or where(r)]
        if not candidates:
            raise ValueError("no grid rows match the predicate")
        return min(candidates, key=lambda r: (r.value, r.block_length, r.n_blocks))

    def subsampling_min(self) -> GridRow:
        return self.min_row(lambda r: r.n_blocks == 1)

    def mbb_min(self) -> GridRow:
        n = self.meta["n"]
        return self.min_row(lambda r: r.n_blocks == n // r.block_length)


@dataclass(frozen=True)
class RateResult:
    slope: float
    minima: tuple
    grids: dict


@dataclass(frozen=True)
class AdaptiveCellRow:
    c1: float
    c2: float
    n_blocks: int
    block_length: int
    err_mean: float
    mse: float
    mse_stderr: float
    selected_count: int


@dataclass(frozen=True)
class AdaptiveResult:
    cell_rows: tuple
    adaptive_mse: float
    adaptive_stderr: float
    n_reps: int
    meta: dict

    def best_cell_mse(self) -> float:
        return min(r.mse for r in self.cell_rows)

    def worst_cell_mse(self) -> float:
        return max(r.mse for r in self.cell_rows)


def _run_chunked(worker, payload, n_items: int, workers: int, chunk: int):
    """Map ``worker(payload, lo, hi)`` over fixed chunks, reducing in chunk order.

    Chunk boundaries depend only on ``n_items``, so float accumulations
    combined in order are bit-identical for every worker count.
    """
    bounds = [(lo, min(lo + chunk, n_items)) for lo in range(0, n_items, chunk)]
    tasks = [(worker, payload, lo, hi) for lo, hi in bounds]
    if workers <= 1 or len(tasks) == 1:
        return [worker(payload, lo, hi) for _, _, lo, hi in tasks]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(processes=workers) as pool:
        return pool.map(_invoke_chunk, tasks)


def _invoke_chunk(task):
    worker, payload, lo, hi = task
    return worker(payload, lo, hi)


def _reference_chunk(payload, lo, hi):
    model, n, kind, x, y, p, seed = payload
    rng = substream(reference_seed(seed, lo // _REF_CHUNK))
    batch = simulate_batch(model, n, hi - lo, rng)
    if kind == "quantile":
        k = order_stat_index(n, p)
        threshold = model.marginal_quantile(p) + x / math.sqrt(n)
        hits = (batch <= threshold).sum(axis=1) >= k
    else:
        bound = n * model.marginal_cdf(x) + y * math.sqrt(n)
        hits = (batch <= x).sum(axis=1) <= bound
    return int(np.count_nonzero(hits))


def reference_value(model: ModelSpec, n: int, kind: str, x: float, y: float | None = None, p: float = 0.5, n_sims: int = 1_000_000, seed: int = 0, workers: int = 1) -> RefResult:
    """Approximate a reference probability by massive independent simulation.

    ``kind="quantile"`` estimates the probability that the centered, scaled
    sample p-quantile ``sqrt(n) * (q_hat - q_true)`` is at most ``x``;
    ``kind="cdf"`` estimates the probability that
    ``sqrt(n) * (F_n(x) - F(x))`` is at most ``y``.  The model must provide
    the closed-form target (``marginal_quantile`` or ``marginal_cdf``).

    Returns the estimate with its binomial standard error.
    """
    return _reference_value(model, n, kind, x, y=y, p=p, n_sims=n_sims, seed=seed, workers=workers)


def _reference_value(model, n, kind, x, y, p, n_sims, seed, workers) -> RefResult:
    if kind not in ("quantile", "cdf"):
        raise ValueError(f"unknown reference kind {kind!r}")
    if kind == "cdf" and y is None:
        raise ValueError("kind='cdf' requires an evaluation point y")
    # Raises ValueError up front for models without a closed-form target.
    if kind == "quantile":
        model.marginal_quantile(p)
    else:
        model.marginal_cdf(x)
    payload = (model, n, kind, x, y, p, seed)
    counts = _run_chunked(_reference_chunk, payload, n_sims, workers, _REF_CHUNK)
    value = sum(counts) / n_sims
    stderr = math.sqrt(max(value * (1.0 - value), 0.0) / n_sims)
    return RefResult(value=float(value), stderr=float(stderr), n_sims=n_sims)


def _resolve_reference(cfg: ExperimentConfig, kind: str) -> RefResult:
    if cfg.ref_value is not None:
        return RefResult(value=float(cfg.ref_value), stderr=0.0, n_sims=0)
    for n_key, value in cfg.ref_values:
        if int(n_key) == cfg.n:
            return RefResult(value=float(value), stderr=0.0, n_sims=0)
    return reference_value(cfg.model, cfg.n, kind, cfg.x, y=cfg.y, p=cfg.p, n_sims=cfg.ref_sims, seed=cfg.master_seed, workers=cfg.workers)


def _mse_chunk(payload, lo, hi):
    model, n, p, x, plans, n_boot, seed, g_ref, exact, exact_cap = payload
    s2 = np.zeros(len(plans))
    s4 = np.zeros(len(plans))
    for rep in range(lo, hi):
        series = simulate_batch(model, n, 1, substream(replication_seed(seed, rep)))[0]
        for ci, plan in enumerate(plans):
            if exact:
                estimate = exact_quantile_distribution(series, plan, p, max_tuples=exact_cap).cdf(x)
            else:
                rp = ResamplePlan(plan, n_boot, cell_seed(seed, ci, rep))
                estimate = quantile_deviation_prob(series, rp, p, x)
            d2 = (estimate - g_ref) ** 2
            s2[ci] += d2
            s4[ci] += d2 * d2
    return s2, s4


def _cdf_mse_chunk(payload, lo, hi):
    model, n, x, y, plans, n_boot, seed, g_ref = payload
    s2 = np.zeros(len(plans))
    s4 = np.zeros(len(plans))
    for rep in range(lo, hi):
        series = simulate_batch(model, n, 1, substream(replication_seed(seed, rep)))[0]
        for ci, plan in enumerate(plans):
            rp = ResamplePlan(plan, n_boot, cell_seed(seed, ci, rep))
            estimate = cdf_deviation_prob(series, rp, x, y)
            d2 = (estimate - g_ref) ** 2
            s2[ci] += d2
            s4[ci] += d2 * d2
    return s2, s4


def _coverage_chunk(payload, lo, hi):
    model, n, p, alpha, plans, n_boot, seed, q_true = payload
    covered = np.zeros(len(plans), dtype=np.int64)
    for rep in range(lo, hi):
        series = simulate_batch(model, n, 1, substream(replication_seed(seed, rep)))[0]
        for ci, plan in enumerate(plans):
            rp = ResamplePlan(plan, n_boot, cell_seed(seed, ci, rep))
            ci_result = lower_confidence_bound(series, rp, p, alpha)
            covered[ci] += q_true >= ci_result.lower
    return (covered,)


def _grid_result(cfg: ExperimentConfig, plans, metric, values, stderrs, ref: RefResult | None, extra_meta=None) -> GridResult:
    rows = tuple(
        GridRow(n_blocks=pl.n_blocks, block_length=pl.block_length, metric=metric, value=float(v), stderr=float(s))
        for pl, v, s in zip(plans, values, stderrs)
    )
    meta = {
        "model": cfg.model.kind,
        "n": cfg.n,
        "p": cfg.p,
        "x": cfg.x,
        "y": cfg.y,
        "alpha": cfg.alpha,
        "n_reps": cfg.n_reps,
        "n_boot": cfg.n_boot,
        "master_seed": cfg.master_seed,
        "metric": metric,
    }
    if ref is not None:
        meta["ref_value"] = ref.value
        meta["ref_stderr"] = ref.stderr
        meta["ref_sims"] = ref.n_sims
    if extra_meta:
        meta.update(extra_meta)
    return GridResult(rows=rows, meta=meta)


def _mse_rows(partials, n_reps):
    s2 = sum((part[0] for part in partials), start=np.zeros_like(partials[0][0]))
    s4 = sum((part[1] for part in partials), start=np.zeros_like(partials[0][1]))
    mse = s2 / n_reps
    variance = np.maximum(s4 / n_reps - mse**2, 0.0)
    return mse, np.sqrt(variance / n_reps)


def mse_grid(cfg: ExperimentConfig) -> GridResult:
    """Squared-error surface of the bootstrap quantile-CDF estimator at ``cfg.x``.

    For each plan, averages ``(G_hat(x) - G_ref)**2`` over ``cfg.n_reps``
    independent series, where each ``G_hat`` uses ``cfg.n_boot`` bootstrap
    replicates (or exact enumeration when ``cfg.exact``).
    """
    ref = _resolve_reference(cfg, "quantile")
    plans = cfg.grid.plans(cfg.n)
    payload = (cfg.model, cfg.n, cfg.p, cfg.x, tuple(plans), cfg.n_boot, cfg.master_seed, ref.value, cfg.exact, cfg.exact_cap)
    partials = _run_chunked(_mse_chunk, payload, cfg.n_reps, cfg.workers, _REP_CHUNK)
    mse, stderr = _mse_rows(partials, cfg.n_reps)
    return _grid_result(cfg, plans, "mse", mse, stderr, ref)


def cdf_mse_grid(cfg: ExperimentConfig) -> GridResult:
    """Squared-error surface of the bootstrap CDF-deviation estimator at ``(x, y)``."""
    if cfg.y is None:
        raise ValueError("cdf_mse_grid requires the evaluation point y")
    ref = _resolve_reference(cfg, "cdf")
    plans = cfg.grid.plans(cfg.n)
    payload = (cfg.model, cfg.n, cfg.x, cfg.y, tuple(plans), cfg.n_boot, cfg.master_seed, ref.value)
    partials = _run_chunked(_cdf_mse_chunk, payload, cfg.n_reps, cfg.workers, _REP_CHUNK)
    mse, stderr = _mse_rows(partials, cfg.n_reps)
    return _grid_result(cfg, plans, "mse", mse, stderr, ref)


def coverage_grid(cfg: ExperimentConfig) -> GridResult:
    """Coverage of the nominal-``alpha`` lower percentile confidence bound per plan."""
    if cfg.alpha is None:
        raise ValueError("coverage_grid requires alpha")
    q_true = cfg.model.marginal_quantile(cfg.p)
    plans = cfg.grid.plans(cfg.n)
    payload = (cfg.model, cfg.n, cfg.p, cfg.alpha, tuple(plans), cfg.n_boot, cfg.master_seed, q_true)
    partials = _run_chunked(_coverage_chunk, payload, cfg.n_reps, cfg.workers, _REP_CHUNK)
    covered = sum((part[0] for part in partials), start=np.zeros(len(plans), dtype=np.int64))
    coverage = covered / cfg.n_reps
    stderr = np.sqrt(np.maximum(coverage * (1.0 - coverage), 0.0) / cfg.n_reps)
    return _grid_result(cfg, plans, "coverage", coverage, stderr, None, extra_meta={"quantile_true": q_true})


def _tune_chunk(payload, lo, hi):
    model, n, p, x, c1_grid, c2_grid, subsample_len, subsample_count, rho, n_boot, seed, g_ref = payload
    n_cells = len(c1_grid) * len(c2_grid)
    err_sum = np.zeros(n_cells)
    s2 = np.zeros(n_cells)
    s4 = np.zeros(n_cells)
    selected = np.zeros(n_cells, dtype=np.int64)
    a2 = 0.0
    a4 = 0.0
    for rep in range(lo, hi):
        series = simulate_batch(model, n, 1, substream(replication_seed(seed, rep)))[0]
        tune_cfg = TuneConfig(
            c1_grid=c1_grid,
            c2_grid=c2_grid,
            x=x,
            n_boot=n_boot,
            seed=tuning_replication_seed(seed, rep),
            subsample_len=subsample_len,
            subsample_count=subsample_count,
            rho=rho,
            p=p,
        )
        diags = grid_diagnostics(series, tune_cfg)
        for ci, diag in enumerate(diags):
            err_sum[ci] += diag.err
            d2 = (diag.full_sample_prob - g_ref) ** 2
            s2[ci] += d2
            s4[ci] += d2 * d2
        best = argmin_cell(diags)
        selected[best] += 1
        d2 = (diags[best].full_sample_prob - g_ref) ** 2
        a2 += d2
        a4 += d2 * d2
    return err_sum, s2, s4, selected, a2, a4


def adaptive_study(cfg: ExperimentConfig) -> AdaptiveResult:
    """Replicated study of the subsample-based plan selection.

    Per replication, evaluates the bootstrap CDF estimate at ``cfg.x`` for
    every candidate constant pair, selects the pair minimizing the subsample
    error criterion, and records the selected cell's estimate.  Reports
    per-cell mean error criterion, per-cell fixed-plan MSE, selection counts,
    and the MSE of the adaptively selected estimator.
    """
    ref = _resolve_reference(cfg, "quantile")
    payload = (
        cfg.model,
        cfg.n,
        cfg.p,
        cfg.x,
        tuple(cfg.c1_grid),
        tuple(cfg.c2_grid),
        cfg.subsample_len,
        cfg.subsample_count,
        cfg.rho,
        cfg.n_boot,
        cfg.master_seed,
        ref.value,
    )
    partials = _run_chunked(_tune_chunk, payload, cfg.n_reps, cfg.workers, _REP_CHUNK)
    n_cells = len(cfg.c1_grid) * len(cfg.c2_grid)
    err_sum = sum((p[0] for p in partials), start=np.zeros(n_cells))
    s2 = sum((p[1] for p in partials), start=np.zeros(n_cells))
    s4 = sum((p[2] for p in partials), start=np.zeros(n_cells))
    selected = sum((p[3] for p in partials), start=np.zeros(n_cells, dtype=np.int64))
    a2 = math.fsum(p[4] for p in partials)
    a4 = math.fsum(p[5] for p in partials)
    mse = s2 / cfg.n_reps
    stderr = np.sqrt(np.maximum(s4 / cfg.n_reps - mse**2, 0.0) / cfg.n_reps)
    cells = [(c1, c2) for c1 in cfg.c1_grid for c2 in cfg.c2_grid]
    rows = []
    for ci, (c1, c2) in enumerate(cells):
        plan = plan_from_constants(cfg.n, c1, c2)
        rows.append(
            AdaptiveCellRow(
                c1=c1,
                c2=c2,
                n_blocks=plan.n_blocks,
                block_length=plan.block_length,
                err_mean=float(err_sum[ci] / cfg.n_reps),
                mse=float(mse[ci]),
                mse_stderr=float(stderr[ci]),
                selected_count=int(selected[ci]),
            )
        )
    adaptive_mse = a2 / cfg.n_reps
    adaptive_var = max(a4 / cfg.n_reps - adaptive_mse**2, 0.0)
    meta = {
        "model": cfg.model.kind,
        "n": cfg.n,
        "p": cfg.p,
        "x": cfg.x,
        "n_reps": cfg.n_reps,
        "n_boot": cfg.n_boot,
        "master_seed": cfg.master_seed,
        "ref_value": ref.value,
        "ref_stderr": ref.stderr,
        "subsample_len": cfg.subsample_len,
        "subsample_count": cfg.subsample_count,
        "rho": cfg.rho,
    }
    return AdaptiveResult(
        cell_rows=tuple(rows),
        adaptive_mse=float(adaptive_mse),
        adaptive_stderr=float(math.sqrt(adaptive_var / cfg.n_reps)),
        n_reps=cfg.n_reps,
        meta=meta,
    )


def log_log_slope(xs, ys) -> float:
    """Ordinary least squares slope of ``log(ys)`` on ``log(xs)``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size != ys.size or xs.size < 2:
        raise ValueError("need at least two (x, y) pairs")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def rate_study(cfg: ExperimentConfig) -> RateResult:
    """Grid-minimum MSE per sample size and the log-log regression slope.

    Runs :func:`mse_grid` for every ``n`` in ``cfg.n_list`` (at least three
    sizes), takes each grid's minimum, and regresses ``log(min MSE)`` on
    ``log(n)``.
    """
    if len(cfg.n_list) < 3:
        raise ValueError("rate_study requires at least three sample sizes")
    minima = []
    grids = {}
    for n in cfg.n_list:
        sub = replace(cfg, n=int(n))
        grid = mse_grid(sub)
        row = grid.min_row()
        minima.append((int(n), row.value, row.n_blocks, row.block_length))
        grids[int(n)] = grid
    slope = log_log_slope([m[0] for m in minima], [m[1] for m in minima])
    return RateResult(slope=slope, minima=tuple(minima), grids=grids)


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_grid_csv(path: str, result: GridResult) -> None:
    """Emit grid rows as ``b,ell,metric,value,stderr`` (6 significant digits)."""
    lines = ["b,ell,metric,value,stderr"]
    for r in result.rows:
        lines.append(f"{r.n_blocks},{r.block_length},{r.metric},{r.value:.6g},{r.stderr:.6g}")
    _write_atomic(path, "\n".join(lines) + "\n")


def write_reference_csv(path: str, model_kind: str, n: int, kind: str, x: float, y: float | None, ref: RefResult) -> None:
    lines = ["model,n,kind,x,y,value,stderr,n_sims"]
    y_text = "" if y is None else f"{y:.6g}"
    lines.append(f"{model_kind},{n},{kind},{x:.6g},{y_text},{ref.value:.6g},{ref.stderr:.6g},{ref.n_sims}")
    _write_atomic(path, "\n".join(lines) + "\n")


def write_err_table_csv(path: str, rows) -> None:
    """Emit a tuning error table as ``c1,c2,b_n,ell_n,err``.

    ``rows`` holds ``(c1, c2, n_blocks, block_length, err)`` tuples; the plan
    columns may be ``None`` for degenerate cells.
    """
    lines = ["c1,c2,b_n,ell_n,err"]
    for c1, c2, b, ell, err in rows:
        plan_text = "," if b is None else f"{b},{ell}"
        lines.append(f"{c1:.6g},{c2:.6g},{plan_text},{err:.6g}")
    _write_atomic(path, "\n".join(lines) + "\n")


def err_table_rows(table) -> list:
    """Rows for :func:`write_err_table_csv` from tuning diagnostics or study cells."""
    rows = []
    for cell in table:
        if hasattr(cell, "err_mean"):
            rows.append((cell.c1, cell.c2, cell.n_blocks, cell.block_length, cell.err_mean))
        elif cell.plan is None:
            rows.append((cell.c1, cell.c2, None, None, math.nan))
        else:
            rows.append((cell.c1, cell.c2, cell.plan.n_blocks, cell.plan.block_length, cell.err))
    return rows


def write_tune_study_csv(path: str, result: AdaptiveResult) -> None:
    lines = ["c1,c2,b,ell,metric,value,stderr"]
    for r in result.cell_rows:
        lines.append(f"{r.c1:.6g},{r.c2:.6g},{r.n_blocks},{r.block_length},mse,{r.mse:.6g},{r.mse_stderr:.6g}")
        lines.append(f"{r.c1:.6g},{r.c2:.6g},{r.n_blocks},{r.block_length},err_mean,{r.err_mean:.6g},0")
        lines.append(f"{r.c1:.6g},{r.c2:.6g},{r.n_blocks},{r.block_length},selected_frac,{r.selected_count / result.n_reps:.6g},0")
    lines.append(f",,,,adaptive_mse,{result.adaptive_mse:.6g},{result.adaptive_stderr:.6g}")
    _write_atomic(path, "\n".join(lines) + "\n")


def write_rate_csvs(out_dir: str, result: RateResult) -> list[str]:
    minima_path = os.path.join(out_dir, "rate_minima.csv")
    lines = ["n,min_mse,b,ell"]
    for n, value, b, ell in result.minima:
        lines.append(f"{n},{value:.6g},{b},{ell}")
    _write_atomic(minima_path, "\n".join(lines) + "\n")
    summary_path = os.path.join(out_dir, "rate_summary.csv")
    _write_atomic(summary_path, "metric,value\nslope,%.6g\n" % result.slope)
    written = [minima_path, summary_path]
    for n, grid in result.grids.items():
        grid_path = os.path.join(out_dir, f"mse_grid_n{n}.csv")
        write_grid_csv(grid_path, grid)
        written.append(grid_path)
    return written


def model_to_dict(model: ModelSpec) -> dict:
    out = asdict(model)
    out["beta_bound"] = None if math.isinf(model.beta_bound) else model.beta_bound
    return out


def write_manifest(path: str, command: str, cfg: ExperimentConfig, outputs: list[str]) -> None:
    """Echo the run configuration next to its outputs for provenance."""
    payload = {
        "command": command,
        "package": f"blockboot {__version__}",
        "master_seed": cfg.master_seed,
        "workers": cfg.workers,
        "config": {
            "model": model_to_dict(cfg.model),
            "n": cfg.n,
            "n_list": list(cfg.n_list),
            "p": cfg.p,
            "x": cfg.x,
            "y": cfg.y,
            "alpha": cfg.alpha,
            "grid": asdict(cfg.grid),
            "n_reps": cfg.n_reps,
            "n_boot": cfg.n_boot,
            "ref_sims": cfg.ref_sims,
            "ref_value": cfg.ref_value,
            "ref_values": [list(item) for item in cfg.ref_values],
            "exact": cfg.exact,
            "c1_grid": list(cfg.c1_grid),
            "c2_grid": list(cfg.c2_grid),
            "subsample_len": cfg.subsample_len,
            "subsample_count": cfg.subsample_count,
            "rho": cfg.rho,
        },
        "outputs": [os.path.basename(p) for p in outputs],
    }
    _write_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


class ReferenceCache:
    """JSON-file cache of reference values keyed by the full simulation settings."""

    def __init__(self, path: str | None = None):
        self.path = path
        self._store: dict = {}
        if path is not None and os.path.exists(path):
            with open(path, encoding="utf-8") as handle:
                self._store = json.load(handle)

    @staticmethod
    def _key(model: ModelSpec, n: int, kind: str, x: float, y: float | None, p: float, n_sims: int, seed: int) -> str:
        params = ",".join(f"{k}={model.params[k]!r}" for k in sorted(model.params))
        return f"{model.kind}[{params}]|n={n}|{kind}|p={p!r}|x={x!r}|y={y!r}|sims={n_sims}|seed={seed}"

    def get_or_compute(self, model: ModelSpec, n: int, kind: str, x: float, y: float | None = None, p: float = 0.5, n_sims: int = 1_000_000, seed: int = 0, workers: int = 1) -> RefResult:
        key = self._key(model, n, kind, x, y, p, n_sims, seed)
        if key not in self._store:
            ref = reference_value(model, n, kind, x, y=y, p=p, n_sims=n_sims, seed=seed, workers=workers)
            self._store[key] = {"value": ref.value, "stderr": ref.stderr, "n_sims": ref.n_sims}
            if self.path is not None:
                _write_atomic(self.path, json.dumps(self._store, indent=2, sort_keys=True) + "\n")
        entry = self._store[key]
        return RefResult(value=entry["value"], stderr=entry["stderr"], n_sims=entry["n_sims"])
