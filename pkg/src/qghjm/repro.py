"""One-shot reproduction of the published reference numbers with pass/fail lines."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .curve import ForwardCurve, ModelParams
from .detsys import Regime, fixed_points, solve
from .explosion import (critical_beta, explosion_time_beta0, fixed_point_roots,
                        solve_y_profile)
from .weierstrass import wp_constants

SIGMA, LAMBDA0 = 0.2, 0.05


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    expected: str
    passed: bool

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.value:.10g} (expected {self.expected})"


def _within(x, target, tol):
    return abs(x - target) <= tol


def run_checks(sigma: float = SIGMA, lambda0: float = LAMBDA0, with_bisection: bool = True) -> list[Check]:
    checks = []
    flat = ForwardCurve.flat(lambda0)
    p = ModelParams(sigma, 0.0, flat)

    k = wp_constants().blowup_constant
    checks.append(Check("universal constant sqrt(6 p0) omega2", k, "2.97448 +- 5e-6",
                        _within(k, 2.97448, 5e-6)))

    tau = explosion_time_beta0(p).tau
    checks.append(Check("explosion time sigma=0.2 lambda0=0.05", tau, "66.51 +- 0.02",
                        _within(tau, 66.51, 0.02)))
    traj = solve(p, 80.0)
    lo, hi = traj.blowup_bracket if traj.blown_up else (math.nan, math.nan)
    checks.append(Check("ODE blow-up bracket midpoint", 0.5 * (lo + hi), "bracket in [66, 67]",
                        traj.blown_up and 66.0 <= lo < hi <= 67.0))

    for s, target in ((0.05, 266.0), (0.1, 133.0), (0.3, 44.3)):
        t = explosion_time_beta0(ModelParams(s, 0.0, flat)).tau
        checks.append(Check(f"explosion time sigma={s}", t, f"{target} +- 0.5%",
                            abs(t - target) <= 0.005 * target))

    b_c = sigma * math.sqrt(2.0 * lambda0)
    checks.append(Check("beta_C analytic", b_c, "0.063246 +- 1e-6", _within(b_c, 0.063246, 1e-6)))
    if with_bisection:
        b_bis = critical_beta(sigma, flat, tol=1e-5)
        checks.append(Check("beta_C bisection", b_bis, "[0.06315, 0.06334]",
                            0.06315 <= b_bis <= 0.06334))

    prof = solve_y_profile(ModelParams(sigma, 0.063246, flat), 3 * lambda0)
    x0 = prof.min_location if prof.vanished else math.nan
    checks.append(Check("profile vanishing point at beta_C", x0, "2 lambda0 = 0.1 +- 1e-3",
                        prof.vanished and _within(x0, 2 * lambda0, 1e-3)))
    prof = solve_y_profile(ModelParams(sigma, 0.066, flat), 3 * lambda0)
    x1 = fixed_point_roots(sigma, 0.066, lambda0)[0]
    xv = prof.min_location if prof.vanished else math.nan
    checks.append(Check("profile vanishing point beta=0.066", xv, f"x1 = {x1:.6f} +- 1e-3",
                        prof.vanished and _within(xv, x1, 1e-3)))
    prof = solve_y_profile(ModelParams(sigma, 0.0625, flat), 3 * lambda0)
    checks.append(Check("profile minimum beta=0.0625", prof.min_value or math.nan, "> 0",
                        (not prof.vanished) and prof.min_value is not None and prof.min_value > 0))

    rep = fixed_points(ModelParams(sigma, 0.1, flat))
    ok = (rep.regime is Regime.TWO_FIXED_POINTS and max(rep.eigen1) < 0
          and min(rep.eigen2) < 0 < max(rep.eigen2))
    checks.append(Check("fixed-point eigen signs beta=0.1", max(rep.eigen1),
                        "Pi1 both < 0, Pi2 mixed", ok))
    return checks


def report(checks: list[Check]) -> str:
    n_fail = sum(not c.passed for c in checks)
    head = f"reproduction report: {len(checks) - n_fail}/{len(checks)} PASS"
    return "\n".join([head] + [c.line() for c in checks]) + "\n"
