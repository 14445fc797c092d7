"""Error surface of the bootstrap distribution estimator over (b, ell).

Reduced-scale rerun of the n=200 ARMA(1,1) experiment: for every block plan
on a coarse grid, the mean squared error of the bootstrap estimate of
P(sqrt(n) * (sample median) <= 1) is simulated against a fixed reference
value.  The surface bottoms out at a moderate number of moderate blocks;
both classical corners (a single long block, and floor(n/ell) short blocks)
do visibly worse.  The desk-scale run (replications = bootstrap_samples =
2000 on the full default grid) reproduces the published minima; it takes a
few minutes, so this demo trims both knobs.
"""

import os
import tempfile

from blockboot.harness import ExperimentConfig, GridSpec, mse_grid, write_grid_csv
from blockboot.models import arma11_model

REFERENCE_G200_AT_1 = 0.67824  # from `blockboot reference` with 10^6 simulations

cfg = ExperimentConfig(
    model=arma11_model(),
    n=200,
    x=1.0,
    grid=GridSpec(b_max=36, ell_min=4, ell_max=20, ell_step=4),
    n_reps=400,
    n_boot=500,
    ref_value=REFERENCE_G200_AT_1,
    master_seed=1,
)
result = mse_grid(cfg)

lengths = sorted({r.block_length for r in result.rows})
blocks = sorted({r.n_blocks for r in result.rows})
table = {(r.n_blocks, r.block_length): r.value for r in result.rows}
print(f"MSE x 1000 over {len(result.rows)} cells (rows b, columns ell):\n")
print("   b\\ell " + "".join(f"{ell:>7d}" for ell in lengths))
for b in blocks:
    cells = [f"{1000 * table[(b, ell)]:7.2f}" if (b, ell) in table else "      ." for ell in lengths]
    print(f"  {b:4d}  " + "".join(cells))

best = result.min_row()
print(f"\nsurface minimum {best.value:.5f} at (b={best.n_blocks}, ell={best.block_length})")
print(f"single-block row minimum   {result.subsampling_min().value:.5f}")
print(f"moving-block row minimum   {result.mbb_min().value:.5f}")

out = os.path.join(tempfile.gettempdir(), "blockboot_demo_mse.csv")
write_grid_csv(out, result)
print(f"\nplot-ready CSV written to {out}")
