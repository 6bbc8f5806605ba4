"""Explosion times for a grid of volatilities and mean reversions.

Usage: python scripts/explosion_table.py [--lambda0 0.05] [--out out/explosion_table.csv]
"""

import argparse
import math

from qghjm.curve import ForwardCurve, ModelParams
from qghjm.detsys import solve
from qghjm.errors import SupercriticalError
from qghjm.explosion import beta_critical, explosion_time_beta0, explosion_time_quadrature
from qghjm.export import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambda0", type=float, default=0.05)
    ap.add_argument("--out", default="out/explosion_table.csv")
    args = ap.parse_args()
    curve = ForwardCurve.flat(args.lambda0)
    rows = []
    for sigma in (0.05, 0.1, 0.2, 0.3):
        b_c = beta_critical(sigma, args.lambda0)
        for frac in (0.0, 0.25, 0.5, 0.75, 0.95):
            p = ModelParams(sigma, frac * b_c, curve)
            try:
                tau = (explosion_time_beta0(p) if frac == 0 else explosion_time_quadrature(p)).tau
            except SupercriticalError:
                tau = math.inf
            mid = solve(p, 20 * tau if math.isfinite(tau) else 1e4).blowup_midpoint()
            rows.append((sigma, p.beta, tau, math.nan if mid is None else mid))
            print(f"sigma={sigma:<5} beta={p.beta:.6f} tau={tau:12.4f} ode={rows[-1][3]:12.4f}")
    write_csv(args.out, ("sigma", "beta", "tau_quadrature", "tau_ode"), list(zip(*rows)))
    print(args.out)


if __name__ == "__main__":
    main()
