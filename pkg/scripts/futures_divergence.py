"""Maturity at which the futures lower bound first exceeds a threshold, across mean reversions.

Usage: python scripts/futures_divergence.py [--delta 0.25] [--threshold 1e6]
"""

import argparse

from qghjm.curve import ForwardCurve, ModelParams
from qghjm.detsys import solve
from qghjm.futures import BondParams, divergence_maturity


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delta", type=float, default=0.25)
    ap.add_argument("--threshold", type=float, default=1e6)
    args = ap.parse_args()
    for beta in (0.0, 0.02, 0.04, 0.06, 0.1, 0.5):
        p = ModelParams(0.2, beta, ForwardCurve.flat(0.05))
        t_div = divergence_maturity(BondParams(p), args.delta, args.threshold, t_max=600.0, step=0.05)
        bracket = solve(p, 600.0).blowup_bracket
        print(f"beta={beta:<5} divergence={t_div} blow-up bracket={bracket}")


if __name__ == "__main__":
    main()
