"""Fitted decay exponent of the linear Klein-Gordon flow for several fit windows and masses."""

import argparse

from eplab.experiments import kg_decay


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=1024)
    ap.add_argument("--box", type=float, default=320.0)
    ap.add_argument("--masses", default="0.5,1,2")
    args = ap.parse_args()

    windows = [(10.0, 60.0), (20.0, 120.0), (60.0, 120.0)]
    print(f"{'m0':>5} {'window':>12} {'exponent':>9} {'log rms':>8}")
    for m0 in (float(x) for x in args.masses.split(",")):
        for win in windows:
            fit = kg_decay(args.grid, args.box, m0, 120.0, win, samples=96).fit
            print(f"{m0:5g} {f'[{win[0]:g}, {win[1]:g}]':>12} {fit.exponent:9.3f} {fit.residual:8.4f}")


if __name__ == "__main__":
    main()
