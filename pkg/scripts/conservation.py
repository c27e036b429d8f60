"""Mass and energy bookkeeping of a smooth run, step by step."""

import argparse
from pathlib import Path

import numpy as np

from eplab.experiments import initial_state
from eplab.io_diag import load_config
from eplab.radial import run

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "smooth.ini"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(CONFIG))
    args = ap.parse_args()

    spec = load_config(args.config)
    w = spec.config.grid.weights
    state = initial_state(spec)
    n0 = spec.config.params.n0
    scale = float(np.sum(w * np.abs(state.n - n0)))
    mass = [float(np.sum(w * (state.n - n0)))]
    res = run(spec.config, state, keep_snapshots=False,
              on_step=lambda s: mass.append(float(np.sum(w * (s.n - n0)))))
    energy = res.series("energy")
    print(f"status {res.status} after {res.steps} steps, t = {res.final_state.time:g}")
    print(f"max mass change per step / int|n - n0|: {np.max(np.abs(np.diff(mass))) / scale:.2e}")
    print(f"max energy drift / initial energy:      {np.max(np.abs(energy - energy[0])) / energy[0]:.2e}")


if __name__ == "__main__":
    main()
