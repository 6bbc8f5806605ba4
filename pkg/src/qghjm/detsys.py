"""Deterministic small-noise limit of the short-rate system.

With the Brownian term switched off, ``(r, y)`` obey

    r' = y - beta r + beta lambda(t) + lambda'(t),    r(0) = lambda(0)
    y' = sigma^2 r^2 - 2 beta y,                       y(0) = 0

This module integrates that system (with blow-up detection), solves the
equivalent Volterra equation for ``r`` by Picard iteration as an independent
cross-check, and evaluates the closed-form bounds, stationary limit and
flat-curve fixed points.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .curve import ModelParams
from .errors import DomainError, NumericalFailure, PicardDivergence, UnsupportedConfiguration
from .rk45 import dopri45

R_CEILING = 1e6
TOL_CRIT = 1e-9


class DetState(NamedTuple):
    r: float
    y: float


@dataclass(frozen=True)
class StepControl:
    """Tolerances for :func:`solve`.

    ``h_min`` is ``h_min_factor * t_end``; running below it before the rate
    ceiling is reached raises :class:`NumericalFailure`.
    """

    rtol: float = 1e-10
    atol: float = 1e-10
    h_min_factor: float = 1e-14
    r_ceiling: float = R_CEILING
    max_steps: int = 2_000_000
    h0: Optional[float] = None

    def halved(self) -> "StepControl":
        return StepControl(self.rtol / 2, self.atol / 2, self.h_min_factor,
                           self.r_ceiling, self.max_steps, self.h0)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    r: np.ndarray
    y: np.ndarray
    blown_up: bool = False
    blowup_bracket: Optional[tuple[float, float]] = None
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("times", "r", "y"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def states(self) -> list[DetState]:
        return [DetState(float(a), float(b)) for a, b in zip(self.r, self.y)]

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def blowup_midpoint(self) -> Optional[float]:
        if self.blowup_bracket is None:
            return None
        lo, hi = self.blowup_bracket
        return 0.5 * (lo + hi)

    def r_at(self, t):
        """Linear interpolation of r on the recorded grid."""
        return np.interp(t, self.times, self.r)

    def is_monotone_increasing(self) -> bool:
        return bool(np.all(np.diff(self.r) >= 0))


def rhs(params: ModelParams, t: float, state) -> tuple[float, float]:
    r, y = state
    dr = y - params.beta * r + float(params.drift_forcing(t))
    dy = params.sigma**2 * r * r - 2.0 * params.beta * y
    return dr, dy


def _vector_field(params: ModelParams):
    b, s2 = params.beta, params.sigma**2
    c = params.curve
    if c.kind == "flat":
        forcing = b * c.lambda0

        def f(t, u):
            return np.array([u[1] - b * u[0] + forcing, s2 * u[0] * u[0] - 2.0 * b * u[1]])
    else:
        def f(t, u):
            return np.array([u[1] - b * u[0] + b * c.value(t) + c.d1(t),
                             s2 * u[0] * u[0] - 2.0 * b * u[1]])
    return f


def solve(
    params: ModelParams,
    t_end: float,
    ctrl: StepControl = StepControl(),
    *,
    t_eval: Optional[Sequence[float]] = None,
    initial: Optional[Sequence[float]] = None,
) -> Trajectory:
    """Integrate the deterministic system from ``(lambda(0), 0)``.

    Integration stops once ``r`` exceeds ``ctrl.r_ceiling``; the returned
    trajectory then has ``blown_up`` set and ``blowup_bracket`` holding the
    last accepted time below the ceiling and the first one above it.

    Parameters
    ----------
    t_eval : sequence of float, optional
        Record only these times (the integrator lands on each exactly).
        ``t_end`` is always appended. Default records every accepted step.
    initial : (r, y), optional
        Alternative starting state, used by the basin probe.
    """
    if not t_end > 0:
        raise DomainError("t_end must be positive")
    u0 = (params.lambda0, 0.0) if initial is None else tuple(map(float, initial))
    ceiling = ctrl.r_ceiling
    if t_eval is not None:
        t_eval = np.union1d(np.asarray(t_eval, dtype=float), [t_end])
    res = dopri45(
        _vector_field(params), 0.0, u0, float(t_end),
        rtol=ctrl.rtol, atol=ctrl.atol, h_min=ctrl.h_min_factor * t_end, h0=ctrl.h0,
        t_eval=t_eval, stop=lambda t, u: u[0] > ceiling, max_steps=ctrl.max_steps,
    )
    info = {"n_accepted": res.n_accepted, "n_rejected": res.n_rejected, "status": res.status}
    traj = Trajectory(res.t, res.y[:, 0], res.y[:, 1], res.status == "stopped", res.bracket, info)
    if res.status in ("h_min", "max_steps"):
        raise NumericalFailure(
            f"integration stalled at t={res.t[-1]:.6g} ({res.status}) before reaching the ceiling",
            partial=traj,
        )
    return traj


def _picard_kernels(beta: float, lags: np.ndarray):
    if beta == 0.0:
        return lags.copy(), np.ones_like(lags)
    e1 = np.exp(-beta * lags)
    # (e^{-bu} - e^{-2bu}) / b without cancellation for small b*u
    return e1 * (-np.expm1(-beta * lags)) / beta, e1 * e1


def _trap_convolution(f: np.ndarray, ker: np.ndarray, h: float) -> np.ndarray:
    n = f.size
    full = np.convolve(f, ker)[:n]
    return h * (full - 0.5 * f[0] * ker - 0.5 * f * ker[0])


def picard_solve(
    params: ModelParams,
    t_end: float,
    grid: int = 4001,
    iters: int = 100,
    *,
    tol: float = 1e-10,
    r_ceiling: float = R_CEILING,
) -> Trajectory:
    r"""Solve the Volterra form of the system by Picard iteration.

    Iterates ``r <- lambda + sigma^2 \int_0^t r(s)^2 K(t - s) ds`` with
    ``K(u) = (e^{-beta u} - e^{-2 beta u}) / beta`` (``K(u) = u`` at beta = 0)
    on a uniform grid using the trapezoidal rule, starting from ``lambda``.
    ``y`` is reconstructed from ``sigma^2 \int_0^t r^2 e^{2 beta (s - t)} ds``.
    """
    if not t_end > 0:
        raise DomainError("t_end must be positive")
    if grid < 2:
        raise DomainError("grid must have at least two points")
    ts = np.linspace(0.0, float(t_end), int(grid))
    h = ts[1] - ts[0]
    lam = np.asarray(params.curve.value(ts), dtype=float)
    k_r, k_y = _picard_kernels(params.beta, ts)
    s2 = params.sigma**2

    r = lam.copy()
    change = math.inf
    n_done = 0
    for n_done in range(1, int(iters) + 1):
        r_next = lam + s2 * _trap_convolution(r * r, k_r, h)
        if not np.all(np.isfinite(r_next)) or np.max(r_next) > r_ceiling:
            partial = Trajectory(ts, np.where(np.isfinite(r), r, np.inf), np.zeros_like(ts),
                                 info={"iterations": n_done})
            raise PicardDivergence(f"Picard iterate exceeded {r_ceiling:g} at iteration {n_done}",
                                   partial=partial)
        change = float(np.max(np.abs(r_next - r)))
        r = r_next
        if change <= tol:
            break
    y = s2 * _trap_convolution(r * r, k_y, h)
    info = {"iterations": n_done, "last_change": change, "converged": change <= tol}
    return Trajectory(ts, r, y, info=info)


def _smaller_root(lam: float, sigma: float, beta: float, tol: float = 1e-12) -> Optional[float]:
    """Smaller root of ``r = lam + r^2 sigma^2 / (2 beta^2)``, in cancellation-free form."""
    if sigma == 0.0:
        return lam
    if beta == 0.0:
        return None if lam > 0 else 0.0
    disc = 1.0 - 2.0 * lam * sigma**2 / beta**2
    if disc < -tol:
        return None
    return 2.0 * lam / (1.0 + math.sqrt(max(disc, 0.0)))


def uniform_bound(params: ModelParams) -> Optional[float]:
    """Uniform upper bound on r(t) when mean reversion dominates; None if inapplicable."""
    lam_max = params.curve.sup()
    if not math.isfinite(lam_max):
        return None
    return _smaller_root(lam_max, params.sigma, params.beta)


def stationary_limit(params: ModelParams) -> Optional[float]:
    """Large-time limit of r(t) implied by the Volterra equation, or None."""
    lam_inf = params.curve.limit()
    if lam_inf is None:
        return None
    return _smaller_root(lam_inf, params.sigma, params.beta)


class Corollary1Gap(NamedTuple):
    measured_gap: float
    bound: float


def corollary1_gap(params: ModelParams, horizon: float, ctrl: StepControl = StepControl()) -> Corollary1Gap:
    """Sup distance between r and lambda on a horizon, with its leading-order bound."""
    if uniform_bound(params) is None:
        raise DomainError("uniform bound not applicable for these parameters")
    lam_max = params.curve.sup()
    bound = lam_max**2 * params.sigma**2 / (2.0 * params.beta**2) if params.beta > 0 else 0.0
    if params.sigma == 0.0:
        return Corollary1Gap(0.0, bound)
    traj = solve(params, horizon, ctrl)
    gap = float(np.max(np.abs(traj.r - np.asarray(params.curve.value(traj.times)))))
    return Corollary1Gap(gap, bound)


class Regime(str, enum.Enum):
    NO_FIXED_POINTS = "NoFixedPoints"
    DEGENERATE = "Degenerate"
    TWO_FIXED_POINTS = "TwoFixedPoints"


class PointClass(str, enum.Enum):
    ATTRACTIVE_NODE = "AttractiveNode"
    SADDLE_POINT = "SaddlePoint"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class FixedPointReport:
    beta_critical: float
    regime: Regime
    pi1: Optional[tuple[float, float]] = None
    pi2: Optional[tuple[float, float]] = None
    eigen1: Optional[tuple[float, float]] = None
    eigen2: Optional[tuple[float, float]] = None
    class1: Optional[PointClass] = None
    class2: Optional[PointClass] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["regime"] = self.regime.value
        for k in ("class1", "class2"):
            d[k] = None if d[k] is None else getattr(self, k).value
        return d


def jacobian(params: ModelParams, r: float) -> np.ndarray:
    """Jacobian of the flat-curve vector field at a point with short rate ``r``."""
    return np.array([[-params.beta, 1.0], [2.0 * params.sigma**2 * r, -2.0 * params.beta]])


def _classify(eig) -> PointClass:
    lo, hi = min(eig), max(eig)
    if hi < 0:
        return PointClass.ATTRACTIVE_NODE
    if lo < 0 < hi:
        return PointClass.SADDLE_POINT
    return PointClass.DEGENERATE


def fixed_points(params: ModelParams, tol_crit: float = TOL_CRIT) -> FixedPointReport:
    """Fixed points of the flat-curve system and their linear stability.

    Eigenvalues use the closed forms
    ``(-3b +- 3b sqrt(1 -+ (8/9) sqrt(D))) / 2`` with
    ``D = 1 - 2 lambda0 sigma^2 / b^2``; each pair is ordered (larger, smaller).
    """
    if not params.curve.is_flat:
        raise UnsupportedConfiguration("fixed-point analysis requires a flat forward curve")
    if params.sigma <= 0:
        raise DomainError("fixed-point analysis requires sigma > 0")
    s2, b, lam0 = params.sigma**2, params.beta, params.lambda0
    beta_c = params.sigma * math.sqrt(2.0 * lam0)

    if abs(b - beta_c) <= tol_crit * beta_c:
        r1, y1 = b * b / s2, b**3 / (2.0 * s2)
        eig = (0.0, -3.0 * b)
        return FixedPointReport(beta_c, Regime.DEGENERATE, pi1=(r1, y1), eigen1=eig,
                                class1=PointClass.DEGENERATE)
    if b < beta_c:
        return FixedPointReport(beta_c, Regime.NO_FIXED_POINTS)

    sq = math.sqrt(1.0 - 2.0 * lam0 * s2 / b**2)
    r1 = 2.0 * lam0 / (1.0 + sq)
    r2 = b * b / s2 * (1.0 + sq)
    y1 = s2 * r1 * r1 / (2.0 * b)
    y2 = b**3 / (2.0 * s2) * (1.0 + sq) ** 2
    w1 = 3.0 * b * math.sqrt(1.0 - 8.0 / 9.0 * sq)
    w2 = 3.0 * b * math.sqrt(1.0 + 8.0 / 9.0 * sq)
    e1 = (0.5 * (-3.0 * b + w1), 0.5 * (-3.0 * b - w1))
    e2 = (0.5 * (-3.0 * b + w2), 0.5 * (-3.0 * b - w2))
    return FixedPointReport(beta_c, Regime.TWO_FIXED_POINTS, (r1, y1), (r2, y2), e1, e2,
                            _classify(e1), _classify(e2))


class BasinProbe(NamedTuple):
    r0: float
    y0: float
    outcome: str  # "pi1" | "infinity" | "undecided"
    r_final: float


def basin_probe(
    params: ModelParams,
    r_values: Sequence[float],
    y_values: Sequence[float],
    t_end: float = 200.0,
    ctrl: StepControl = StepControl(rtol=1e-8, atol=1e-12),
    tol: float = 1e-6,
) -> list[BasinProbe]:
    """Integrate from a grid of initial states and record where each one ends.

    This is a sampling of outcomes, not a computation of basin boundaries.
    """
    target = None
    rep = fixed_points(params)
    if rep.pi1 is not None and rep.regime is Regime.TWO_FIXED_POINTS:
        target = rep.pi1
    out = []
    for r0 in r_values:
        for y0 in y_values:
            traj = solve(params, t_end, ctrl, initial=(r0, y0))
            if traj.blown_up:
                outcome = "infinity"
            elif target is not None and abs(traj.r[-1] - target[0]) <= tol * max(1.0, target[0]):
                outcome = "pi1"
            else:
                outcome = "undecided"
            out.append(BasinProbe(float(r0), float(y0), outcome, float(traj.r[-1])))
    return out
