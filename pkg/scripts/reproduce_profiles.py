"""Travel-speed profiles v(x) below, at and above the critical mean reversion.

Writes a long-format CSV and a gnuplot script. Usage:
python scripts/reproduce_profiles.py [--sigma 0.2] [--lambda0 0.05] [--out out/profiles]
"""

import argparse
from pathlib import Path

from qghjm.explosion import beta_critical, fixed_point_roots, v_profiles_figure
from qghjm.export import write_v_profiles_csv, write_v_profiles_gnuplot


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigma", type=float, default=0.2)
    ap.add_argument("--lambda0", type=float, default=0.05)
    ap.add_argument("--out", default="out/profiles")
    args = ap.parse_args()
    b_c = beta_critical(args.sigma, args.lambda0)
    betas = [0.988 * b_c, b_c, 1.0436 * b_c]
    figs = v_profiles_figure(args.sigma, args.lambda0, betas)
    for b, prof in figs.items():
        roots = fixed_point_roots(args.sigma, b, args.lambda0)
        print(f"beta={b:.6f} vanished={prof.vanished} x*={prof.min_location} "
              f"min={prof.min_value} roots={roots}")
    out = Path(args.out)
    write_v_profiles_csv(out / "v_profiles.csv", figs)
    write_v_profiles_gnuplot(out / "v_profiles.gp", "v_profiles.csv", figs)
    print(out)


if __name__ == "__main__":
    main()
