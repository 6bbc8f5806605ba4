"""Command-line entry point.

Subcommands: solve | explosion | phase | mc | futures | repro. Exit codes:
0 success, 1 numerical failure, 2 configuration error, 3 reproduction FAIL.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import detsys, explosion, export, futures, mc, repro
from .config import build_config, load_raw, RunConfig
from .errors import (ConfigError, DomainError, NumericalFailure, SupercriticalError,
                     UnsupportedConfiguration, WrongRegime)

log = logging.getLogger("qghjm")

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG, EXIT_REPRO = 0, 1, 2, 3


def _wants(cfg: RunConfig, fmt: str) -> bool:
    return fmt in cfg.formats


def cmd_solve(cfg: RunConfig) -> list[Path]:
    p = cfg.model
    t_end = float(cfg.get("t_end", 80.0))
    ctrl = detsys.StepControl(rtol=float(cfg.get("rtol", 1e-10)), atol=float(cfg.get("atol", 1e-10)),
                              r_ceiling=float(cfg.get("r_ceiling", detsys.R_CEILING)),
                              max_steps=int(cfg.get("max_steps", 2_000_000)))
    step = cfg.get("output_step")
    t_eval = None if step is None else futures.maturity_grid(t_end, float(step))
    out = []
    try:
        traj = detsys.solve(p, t_end, ctrl, t_eval=t_eval)
    except NumericalFailure as exc:
        if exc.partial is not None and _wants(cfg, "csv"):
            export.write_trajectory_csv(cfg.output / "trajectory_partial.csv", exc.partial)
        raise
    summary = {
        "blown_up": traj.blown_up,
        "blowup_bracket": traj.blowup_bracket,
        "final_state": {"t": traj.t_end, "r": float(traj.r[-1]), "y": float(traj.y[-1])},
        "stationary_limit": detsys.stationary_limit(p),
        "uniform_bound": detsys.uniform_bound(p),
        "monotone_increasing": traj.is_monotone_increasing(),
        "steps": traj.info,
    }
    if cfg.get("picard", False):
        horizon = min(t_end, traj.blowup_bracket[0]) if traj.blown_up else t_end
        pic = detsys.picard_solve(p, horizon, int(cfg.get("picard_grid", 4001)),
                                  int(cfg.get("picard_iters", 100)))
        ref = detsys.solve(p, horizon, ctrl, t_eval=pic.times)
        summary["picard"] = {"sup_diff": float(np.max(np.abs(ref.r - pic.r))), **pic.info}
    if _wants(cfg, "csv"):
        out.append(export.write_trajectory_csv(cfg.output / "trajectory.csv", traj))
        out.append(export.write_csv(cfg.output / "forward_curve.csv", ("t", "lambda"),
                                    (traj.times, p.curve.value(traj.times))))
    if _wants(cfg, "json"):
        out.append(export.write_json(cfg.output / "solve.json", summary))
    log.info("solve: blown_up=%s bracket=%s", traj.blown_up, traj.blowup_bracket)
    return out


def cmd_explosion(cfg: RunConfig) -> list[Path]:
    p = cfg.model
    out = []
    result: dict = {"beta_critical": explosion.beta_critical(p.sigma, p.lambda0)}
    try:
        rep = explosion.explosion_report(p)
        result["report"] = rep.to_dict()
        result["notes"] = list(rep.notes)
    except SupercriticalError as exc:
        result["report"] = None
        result["notes"] = [str(exc)]
    if p.beta == 0.0 and p.curve.is_flat:
        result["energy_oracle_tau"] = explosion.explosion_time_energy_oracle(p)
    if cfg.get("bisect", False) and p.curve.is_flat:
        result["beta_critical_bisection"] = explosion.critical_beta(
            p.sigma, p.curve, float(cfg.get("tol", 1e-5)))
    betas = cfg.get("betas", [0.0625, 0.063246, 0.066])
    if betas:
        profiles = explosion.v_profiles_figure(p.sigma, p.lambda0, [float(b) for b in betas],
                                               cfg.get("x_max"))
        result["profiles"] = {str(b): {"vanished": pr.vanished, "min_location": pr.min_location,
                                       "min_value": pr.min_value} for b, pr in profiles.items()}
        if _wants(cfg, "csv") or _wants(cfg, "gnuplot"):
            out.append(export.write_v_profiles_csv(cfg.output / "v_profiles.csv", profiles))
        if _wants(cfg, "gnuplot"):
            out.append(export.write_v_profiles_gnuplot(cfg.output / "v_profiles.gp",
                                                       "v_profiles.csv", profiles))
    if _wants(cfg, "json"):
        out.append(export.write_json(cfg.output / "explosion.json", result))
    return out


def cmd_phase(cfg: RunConfig) -> list[Path]:
    p = cfg.model
    rep = detsys.fixed_points(p)
    out = []
    if _wants(cfg, "json"):
        out.append(export.write_json(cfg.output / "fixed_points.json", rep.to_dict()))
    r_values = cfg.get("r_values", [0.02, 0.05, 0.1, 0.2, 0.5])
    y_values = cfg.get("y_values", [0.0, 0.001, 0.01])
    if r_values and y_values:
        probes = detsys.basin_probe(p, r_values, y_values, float(cfg.get("t_end", 200.0)))
        if _wants(cfg, "csv"):
            codes = {"pi1": 1.0, "infinity": -1.0, "undecided": 0.0}
            out.append(export.write_csv(
                cfg.output / "basin.csv", ("r0", "y0", "outcome", "r_final"),
                ([b.r0 for b in probes], [b.y0 for b in probes],
                 [codes[b.outcome] for b in probes], [b.r_final for b in probes])))
    return out


def _mc_config(cfg: RunConfig) -> mc.McConfig:
    return mc.McConfig(
        n_paths=int(cfg.get("n_paths", 10_000)),
        dt=float(cfg.get("dt", 1.0 / 250.0)),
        noise_scale=float(cfg.get("eps", 1.0)),
        seed=int(cfg.get("seed", 0)),
        barrier=cfg.get("barrier"),
        scheme=cfg.get("scheme", mc.Scheme.LOG_EULER_DIFFUSION.value),
        absorbed=cfg.get("absorbed", "carry"),
        antithetic=bool(cfg.get("antithetic", False)),
    )


def cmd_mc(cfg: RunConfig) -> list[Path]:
    mcc = _mc_config(cfg)
    t_end = float(cfg.get("t_end", 30.0))
    summary = mc.simulate(cfg.model, mcc, t_end)
    stats = mc.hit_stats_from_summary(summary)
    out = []
    if _wants(cfg, "csv"):
        out.append(export.write_csv(cfg.output / "mc_summary.csv", ("t", "mean_r", "stderr_r", "mean_y"),
                                    (summary.times, summary.mean_r, summary.stderr_r, summary.mean_y)))
    if _wants(cfg, "json"):
        out.append(export.write_json(cfg.output / "hit_stats.json",
                                     {**stats.to_dict(), "hit_fraction": summary.hit_fraction,
                                      "t_end": t_end, "config": summary.meta,
                                      "n_paths": mcc.n_paths, "dt": mcc.dt}))
    return out


def cmd_futures(cfg: RunConfig) -> list[Path]:
    p = cfg.model
    bond = futures.BondParams(p)
    deltas = [float(d) for d in cfg.get("deltas", [0.25])]
    threshold = float(cfg.get("threshold", 1e6))
    t_max = float(cfg.get("t_max", 100.0))
    step = float(cfg.get("step", 0.01))
    out, report = [], {"threshold": threshold, "t_max": t_max, "source": "deterministic"}
    traj = None
    if cfg.get("use_mc", False):
        mcc = _mc_config(cfg)
        t_mc = mcc.dt * mc.n_steps_for(t_max, mcc.dt)
        s = mc.simulate(p, mcc, t_mc)
        traj = detsys.Trajectory(s.times, s.mean_r, s.mean_y)
        report["source"] = "mc_mean"
        report["noise_scale"] = mcc.noise_scale
    for d in deltas:
        if traj is None:
            grid, tr, terms = futures.bound_curve(bond, d, t_max, step)
        else:
            grid = futures.maturity_grid(min(t_max, traj.t_end), step)
            tr = traj
            terms = [futures.futures_bounds(bond, float(T), d, tr) for T in grid]
        div = next((float(T) for T, t in zip(grid, terms) if t.one_term > threshold), None)
        report[f"delta={d:g}"] = {"divergence_maturity": div, "blowup_bracket": tr.blowup_bracket}
        if _wants(cfg, "csv"):
            out.append(export.write_csv(
                cfg.output / f"futures_delta_{d:g}.csv", ("T", "bound", "bound_two_term", "x_T"),
                (grid, [t.one_term for t in terms], [t.two_term for t in terms], [t.x_T for t in terms])))
    if _wants(cfg, "json"):
        out.append(export.write_json(cfg.output / "futures.json", report))
    return out


def cmd_repro(cfg: RunConfig) -> tuple[list[Path], bool]:
    checks = repro.run_checks(with_bisection=bool(cfg.get("bisect", True)))
    text = repro.report(checks)
    sys.stdout.write(text)
    cfg.output.mkdir(parents=True, exist_ok=True)
    path = cfg.output / "repro.txt"
    path.write_text(text)
    out = [path]
    if _wants(cfg, "json"):
        out.append(export.write_json(cfg.output / "repro.json",
                                     [{"name": c.name, "value": c.value, "expected": c.expected,
                                       "passed": c.passed} for c in checks]))
    return out, all(c.passed for c in checks)


COMMANDS = {"solve": cmd_solve, "explosion": cmd_explosion, "phase": cmd_phase,
            "mc": cmd_mc, "futures": cmd_futures}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON run configuration")
    common.add_argument("--out", help="output directory (default from config, else ./out)")
    common.add_argument("--format", dest="formats", help="comma list of csv,json,gnuplot")
    common.add_argument("-v", "--verbose", action="store_true")
    stochastic = argparse.ArgumentParser(add_help=False)
    stochastic.add_argument("--seed", type=int)
    stochastic.add_argument("--eps", type=float, help="noise scale in [0, 1]")

    parser = argparse.ArgumentParser(prog="qghjm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="integrate the deterministic system")
    sub.add_parser("explosion", parents=[common], help="explosion time and v(x) profiles")
    sub.add_parser("phase", parents=[common], help="fixed points and basin probe")
    sub.add_parser("mc", parents=[common, stochastic], help="Monte Carlo small-noise check")
    fut = sub.add_parser("futures", parents=[common, stochastic], help="Eurodollar futures bound")
    fut.add_argument("--mc", dest="use_mc", action="store_true", default=None,
                     help="use the Monte Carlo mean path instead of the deterministic one")
    sub.add_parser("repro", parents=[common], help="reproduce the reference numbers")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k, None) for k in ("seed", "eps", "use_mc")}
    try:
        cfg = build_config(load_raw(args.config), args.command, out=args.out,
                           formats=args.formats, overrides=overrides)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "repro":
            files, ok = cmd_repro(cfg)
            code = EXIT_OK if ok else EXIT_REPRO
        else:
            files = COMMANDS[args.command](cfg)
            code = EXIT_OK
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, DomainError, UnsupportedConfiguration, WrongRegime) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for f in files:
        print(f)
    return code


if __name__ == "__main__":
    sys.exit(main())
