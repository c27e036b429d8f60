"""Spatial and temporal order study on the manufactured solution.

Prints L2(R^2) and max-norm errors for a sequence of grids, and the RK4
error against a fine-step reference.  The max norm converges at third order
because the divergence closure at the origin is second order on four cells.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from manufactured import exact, solve, temporal_ratios  # noqa: E402

from eplab.radial import radial_integral  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="64,128,256,512,1024,2048")
    ap.add_argument("--dt0", type=float, default=0.02)
    args = ap.parse_args()

    prev = None
    print(f"{'cells':>6} {'L2 error':>12} {'max error':>12} {'L2 ratio':>9} {'max ratio':>9}")
    for n in (int(s) for s in args.sizes.split(",")):
        grid, got = solve(n)
        want = exact(grid, 1.0)
        diffs = [got.n - want.n, got.u - want.u, got.E - want.E]
        l2 = float(np.sqrt(sum(radial_integral(d**2, grid) for d in diffs)))
        mx = max(float(np.max(np.abs(d))) for d in diffs)
        ratios = f"{prev[0] / l2:9.2f} {prev[1] / mx:9.2f}" if prev else ""
        print(f"{n:>6} {l2:12.3e} {mx:12.3e} {ratios}")
        prev = (l2, mx)

    errs, ratios = temporal_ratios(args.dt0)
    print(f"\nRK4, reference dt = {args.dt0 / 16:g}")
    for k, (e, r) in enumerate(zip(errs, [None] + ratios)):
        print(f"dt = {args.dt0 / 2**k:<8g} error {e:.3e}" + (f"  ratio {r:.2f}" if r else ""))


if __name__ == "__main__":
    main()
