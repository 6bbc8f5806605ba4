"""Monte Carlo mean of the short rate against the deterministic path for several noise scales.

Usage: python scripts/mc_small_noise.py [--paths 10000] [--t-end 30] [--seed 1]
"""

import argparse

import numpy as np

from qghjm.curve import ForwardCurve, ModelParams
from qghjm.detsys import solve
from qghjm.export import write_csv
from qghjm.mc import McConfig, simulate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=10_000)
    ap.add_argument("--t-end", type=float, default=30.0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default="out/mc_small_noise.csv")
    args = ap.parse_args()
    p = ModelParams(0.2, 0.0, ForwardCurve.flat(0.05))
    cols, names = [], []
    for eps in (0.0, 0.02, 0.05, 0.1):
        s = simulate(p, McConfig(n_paths=args.paths, noise_scale=eps, seed=args.seed), args.t_end)
        if not cols:
            ref = solve(p, args.t_end, t_eval=s.times)
            cols += [s.times, ref.r]
            names += ["t", "r_det"]
        cols += [s.mean_r, s.stderr_r]
        names += [f"mean_r_eps{eps:g}", f"stderr_eps{eps:g}"]
        dev = np.max(np.abs(s.mean_r - ref.r) / ref.r)
        print(f"eps={eps:<5} max relative deviation {dev:.3e}")
    write_csv(args.out, names, cols)
    print(args.out)


if __name__ == "__main__":
    main()
