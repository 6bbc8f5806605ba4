"""Jensen lower bound for Eurodollar futures along the deterministic path.

The futures price is driven by ``E[1 / P(T, T + delta)]``. Jensen's
inequality and ``y >= 0`` give

    E[1/P(T, T+d)] >= P(0,T)/P(0,T+d) * exp(G(T, T+d) E[x_T]),

and in the small-noise limit ``E[x_T]`` is replaced by ``r(T) - lambda(T)``
from the deterministic system. The bound therefore diverges no later than
the short rate does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, NamedTuple, Optional

import numpy as np

from .curve import ForwardCurve, ModelParams
from .detsys import StepControl, Trajectory, solve
from .errors import DomainError


def g_factor(beta: float, t: float, T: float) -> float:
    """Quasi-Gaussian duration ``(1 - exp(-beta (T - t))) / beta``; ``T - t`` as beta -> 0."""
    if T < t:
        raise DomainError("T must be >= t")
    tau = T - t
    if beta < 1e-12:
        return tau
    return -math.expm1(-beta * tau) / beta


@dataclass(frozen=True)
class BondParams:
    model: ModelParams
    G: Callable[[float, float], float] = field(default=None)

    def __post_init__(self):
        if self.G is None:
            object.__setattr__(self, "G", partial(g_factor, self.model.beta))


class BoundTerms(NamedTuple):
    one_term: float
    two_term: float
    x_T: float
    y_T: float


def _state_at(traj: Trajectory, T: float) -> Optional[tuple[float, float]]:
    """(r, y) at T by linear interpolation; None once past a blow-up."""
    if T < traj.times[0]:
        raise DomainError("T precedes the trajectory")
    if T > traj.t_end:
        if traj.blown_up:
            return None
        raise DomainError(f"T={T} lies beyond the trajectory end {traj.t_end}")
    if traj.blown_up and T > traj.times[-2]:
        return None
    return float(np.interp(T, traj.times, traj.r)), float(np.interp(T, traj.times, traj.y))


def futures_bounds(bond: BondParams, T: float, delta: float, traj: Trajectory,
                   discount_curve: Optional[ForwardCurve] = None) -> BoundTerms:
    """Both the one-term (``exp(G x)``) and two-term (``exp(G x + G^2 y / 2)``) lower bounds."""
    if not delta > 0:
        raise DomainError("delta must be positive")
    curve = bond.model.curve if discount_curve is None else discount_curve
    ratio = math.exp(float(curve.integral(T + delta)) - float(curve.integral(T)))
    state = _state_at(traj, T)
    if state is None:
        return BoundTerms(math.inf, math.inf, math.inf, math.inf)
    r_T, y_T = state
    x_T = r_T - float(bond.model.curve.value(T))
    g = bond.G(T, T + delta)
    with np.errstate(over="ignore"):
        one = ratio * float(np.exp(g * x_T))
        two = ratio * float(np.exp(g * x_T + 0.5 * g * g * y_T))
    return BoundTerms(one, two, x_T, y_T)


def futures_bound(bond: BondParams, T: float, delta: float, traj: Trajectory,
                  discount_curve: Optional[ForwardCurve] = None) -> float:
    """``P(0,T)/P(0,T+delta) * exp(G(T, T+delta) x(T))``; ``inf`` past a blow-up."""
    return futures_bounds(bond, T, delta, traj, discount_curve).one_term


def maturity_grid(t_max: float, step: float) -> np.ndarray:
    n = int(math.floor(t_max / step + 1e-9))
    return step * np.arange(n + 1)


def bound_curve(bond: BondParams, delta: float, t_max: float, step: float = 0.01,
                ctrl: StepControl = StepControl()):
    """Solve once on a maturity grid and evaluate the bounds at every grid point.

    Returns ``(grid, trajectory, list of BoundTerms)``.
    """
    grid = maturity_grid(t_max, step)
    traj = solve(bond.model, float(grid[-1]), ctrl, t_eval=grid)
    terms = [futures_bounds(bond, float(T), delta, traj) for T in grid]
    return grid, traj, terms


def divergence_maturity(bond: BondParams, delta: float, threshold: float,
                        t_max: float = 200.0, step: float = 0.01,
                        ctrl: StepControl = StepControl()) -> Optional[float]:
    """Smallest grid maturity at which the one-term bound exceeds ``threshold``, else None."""
    if not threshold > 1:
        raise DomainError("threshold must exceed 1")
    grid, _, terms = bound_curve(bond, delta, t_max, step, ctrl)
    for T, term in zip(grid, terms):
        if term.one_term > threshold:
            return float(T)
    return None
