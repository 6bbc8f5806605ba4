"""Explosion times of the deterministic short rate.

Three routes are provided:

* zero mean reversion, closed form through the equianharmonic Weierstrass
  function, with an independent energy-integral quadrature as oracle;
* positive subcritical mean reversion, via the travel-speed profile
  ``y(x) = r'(t)^2`` at ``r(t) = x`` and ``tau = int dx / sqrt(y(x))``;
* the critical mean reversion, located by bisection on whether the profile
  vanishes.

For non-flat curves every number returned is an upper bound (valid when the
curve-shape functional is nonnegative), never a sharp explosion time.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp

from .curve import ForwardCurve, ModelParams, assumption1_margin
from .errors import (DomainError, NumericalFailure, SupercriticalError,
                     UnsupportedConfiguration, WrongRegime)
from .weierstrass import wp_constants, wp_scaled

_EPS = np.finfo(float).eps


class Method(str, enum.Enum):
    CLOSED_FORM_BETA0 = "ClosedFormBeta0"
    QUADRATURE_BETA_POSITIVE = "QuadratureBetaPositive"
    ODE_BRACKET = "OdeBracket"


@dataclass(frozen=True)
class ExplosionReport:
    tau: float
    method: Method
    is_upper_bound: bool
    error_estimate: float
    subcritical: bool
    notes: tuple[str, ...] = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {"tau": self.tau, "method": self.method.value, "is_upper_bound": self.is_upper_bound,
                "error_estimate": self.error_estimate, "subcritical": self.subcritical}


def beta_critical(sigma: float, lambda0: float) -> float:
    return sigma * math.sqrt(2.0 * lambda0)


def _require_explosive_inputs(params: ModelParams):
    if params.sigma <= 0:
        raise DomainError("sigma must be positive for an explosion to occur")


def explosion_time_beta0(params: ModelParams) -> ExplosionReport:
    """``sqrt(6 p0) omega2 / (sigma sqrt(lambda0))``, sharp for a flat curve."""
    if params.beta != 0.0:
        raise WrongRegime("beta > 0: use explosion_time_quadrature")
    _require_explosive_inputs(params)
    tau = wp_constants().blowup_constant / (params.sigma * math.sqrt(params.lambda0))
    return ExplosionReport(tau, Method.CLOSED_FORM_BETA0, not params.curve.is_flat,
                           8 * _EPS * tau, True)


def explosion_time_energy_oracle(params: ModelParams) -> float:
    r"""Zero-mean-reversion explosion time by quadrature of the energy integral.

    With ``Z'' = sigma^2 Z^2``, ``Z(0) = lambda0``, ``Z'(0) = 0`` one has
    ``Z'^2 = (2 sigma^2 / 3)(Z^3 - lambda0^3)``. Substituting ``u = lambda0 / Z``,

    .. math::
        \tau = \frac{\sqrt{3/2}}{\sigma\sqrt{\lambda_0}}
               \int_0^1 u^{-1/2} (1-u)^{-1/2} (1+u+u^2)^{-1/2}\,du,

    evaluated with an algebraic-endpoint-weight rule.
    """
    if params.beta != 0.0:
        raise WrongRegime("energy integral only holds at beta = 0")
    _require_explosive_inputs(params)
    val, _ = quad(lambda u: 1.0 / math.sqrt(1.0 + u + u * u), 0.0, 1.0,
                  weight="alg", wvar=(-0.5, -0.5), epsabs=0.0, epsrel=1e-13)
    return math.sqrt(1.5) * val / (params.sigma * math.sqrt(params.lambda0))


def z_closed_form(params: ModelParams, t):
    """Flat-curve zero-mean-reversion rate path written with the Weierstrass function."""
    if params.beta != 0.0:
        raise WrongRegime("closed form only at beta = 0")
    _require_explosive_inputs(params)
    s2, lam0 = params.sigma**2, params.lambda0
    p0 = wp_constants().p0
    c1 = explosion_time_beta0(params).tau
    c2 = lam0**3 * s2 / (6.0 * p0**3)
    scale = (s2 / 6.0) ** (1.0 / 3.0)
    vals = [wp_scaled(scale * (float(ti) + c1), c2) for ti in np.atleast_1d(t)]
    out = (6.0 / s2) ** (1.0 / 3.0) * np.array(vals)
    return float(out[0]) if np.ndim(t) == 0 else out


@dataclass(frozen=True)
class YProfile:
    """Squared travel speed ``y = v^2`` as a function of the rate level ``x``."""

    beta: float
    xs: np.ndarray
    ys: np.ndarray
    min_location: Optional[float] = None
    min_value: Optional[float] = None
    vanished: bool = False

    @property
    def vs(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.ys, 0.0))


def _profile_forcing(sigma: float, beta: float, lam0: float):
    s2, b2 = sigma**2, beta**2
    return lambda x: s2 * x * x - 2.0 * b2 * x + 2.0 * b2 * lam0


def _profile_start(sigma: float, beta: float, lam0: float, delta: float):
    # y = a s + b s^(3/2) + O(s^2) near the start, s = x - lambda0
    a = 2.0 * sigma**2 * lam0**2
    b = -4.0 * beta * math.sqrt(a)
    return a, b, a * delta + b * delta**1.5


def _flat_lambda0(params: ModelParams) -> float:
    if not params.curve.is_flat:
        raise UnsupportedConfiguration("the travel-speed profile requires a flat forward curve")
    return params.lambda0


def solve_y_profile(params: ModelParams, x_max: float, n_out: int = 2001,
                    rtol: float = 1e-12, atol: float = 1e-24) -> YProfile:
    """Integrate ``y'(x) = 2 (f(x) - 3 beta sqrt(y))`` from ``y(lambda0) = 0``.

    ``f(x) = sigma^2 x^2 - 2 beta^2 x + 2 beta^2 lambda0``. The first point is
    seeded from the local expansion with slope ``2 sigma^2 lambda0^2``. If the
    profile reaches zero past ``lambda0`` the integration stops there and the
    result is marked ``vanished`` with ``min_value = 0``.
    """
    lam0 = _flat_lambda0(params)
    if not x_max > lam0:
        raise DomainError("x_max must exceed lambda0")
    sigma, beta = params.sigma, params.beta
    f = _profile_forcing(sigma, beta, lam0)
    delta = 1e-6 * lam0
    _, _, y_start = _profile_start(sigma, beta, lam0, delta)

    def slope(x, u):
        return [2.0 * (f(x) - 3.0 * beta * math.sqrt(max(u[0], 0.0)))]

    def hits_zero(x, u):
        return u[0]

    hits_zero.terminal = True
    hits_zero.direction = -1

    def turns_up(x, u):
        return slope(x, u)[0]

    turns_up.direction = 1

    sol = solve_ivp(slope, (lam0 + delta, float(x_max)), [y_start], method="DOP853",
                    rtol=rtol, atol=atol, events=[hits_zero, turns_up], dense_output=True)
    if sol.status < 0:
        raise NumericalFailure(f"profile integration failed: {sol.message}")

    vanished = sol.t_events[0].size > 0
    x_end = float(sol.t_events[0][0]) if vanished else float(x_max)
    xs = np.linspace(lam0 + delta, x_end, max(int(n_out) - 1, 2))
    ys = sol.sol(xs)[0]
    xs = np.concatenate([[lam0], xs])
    ys = np.concatenate([[0.0], ys])
    if vanished:
        ys[-1] = 0.0
        min_loc, min_val = x_end, 0.0
    elif sol.t_events[1].size:
        cand = [(float(sol.sol(x)[0]), float(x)) for x in sol.t_events[1]]
        min_val, min_loc = min(cand)
    else:
        min_loc = min_val = None
    return YProfile(beta, xs, ys, min_loc, min_val, vanished)


def explosion_time_quadrature(params: ModelParams, x_cut: Optional[float] = None,
                              rtol: float = 1e-12) -> ExplosionReport:
    """Subcritical explosion time ``int_{lambda0}^inf dx / sqrt(y(x))``.

    The integral is split into an analytic piece next to ``lambda0`` (width
    ``1e-6 lambda0``), a middle piece integrated together with the profile in
    the variable ``w = sqrt(x - lambda0)`` (which removes the inverse square
    root), and a tail beyond ``x_cut`` treated in ``u = sqrt(lambda0 / x)``
    where the integrand tends to ``2 / (c sqrt(lambda0))``, ``c^2 = 2 sigma^2 / 3``.
    ``error_estimate`` combines the integrator tolerance with the tail
    truncation error measured by moving the cut to ``x_cut / 4``.
    """
    lam0 = _flat_lambda0(params)
    _require_explosive_inputs(params)
    sigma, beta = params.sigma, params.beta
    b_c = beta_critical(sigma, lam0)
    if beta >= b_c:
        raise SupercriticalError(
            f"beta={beta:g} >= beta_C={b_c:g}: no explosion on a flat curve")
    s2 = sigma**2
    if x_cut is None:
        x_cut = max(100.0 * lam0, 10.0 * beta**2 / s2)
    f = _profile_forcing(sigma, beta, lam0)
    delta = 1e-6 * lam0
    a, _, y_start = _profile_start(sigma, beta, lam0, delta)
    head = 2.0 * math.sqrt(delta / a) + 2.0 * beta * delta / a

    def rhs(w, u):
        x = lam0 + w * w
        y = max(u[0], 0.0)
        sy = math.sqrt(y)
        return [4.0 * w * (f(x) - 3.0 * beta * sy), 2.0 * w / sy if sy > 0 else math.inf]

    def hits_zero(w, u):
        return u[0]

    hits_zero.terminal = True
    hits_zero.direction = -1

    w_cut = math.sqrt(x_cut - lam0)
    sol = solve_ivp(rhs, (math.sqrt(delta), w_cut), [y_start, 0.0], method="DOP853",
                    rtol=rtol, atol=[1e-30, 1e-14], events=[hits_zero], dense_output=True)
    if sol.status != 0 or sol.t_events[0].size:
        raise NumericalFailure("profile reached zero in the subcritical regime; "
                               "beta is too close to critical for this tolerance")

    c = math.sqrt(2.0 * s2 / 3.0)

    def total(x):
        y_x, mid = sol.sol(math.sqrt(x - lam0))
        tail = (1.0 / c + x**1.5 / math.sqrt(y_x)) / math.sqrt(x)
        return head + mid + tail

    tau = total(x_cut)
    trunc = abs(tau - total(x_cut / 4.0)) / 7.0
    err = trunc + 10.0 * rtol * tau + delta**1.5
    return ExplosionReport(tau, Method.QUADRATURE_BETA_POSITIVE, not params.curve.is_flat,
                           err, True)


def _profile_vanishes(sigma: float, beta: float, lam0: float, x_max: float,
                      rtol: float = 1e-11) -> bool:
    f = _profile_forcing(sigma, beta, lam0)
    delta = 1e-6 * lam0
    _, _, y_start = _profile_start(sigma, beta, lam0, delta)

    def slope(x, u):
        return [2.0 * (f(x) - 3.0 * beta * math.sqrt(max(u[0], 0.0)))]

    def hits_zero(x, u):
        return u[0]

    hits_zero.terminal = True
    hits_zero.direction = -1
    sol = solve_ivp(slope, (lam0 + delta, x_max), [y_start], method="DOP853",
                    rtol=rtol, atol=1e-24, events=[hits_zero])
    if sol.status < 0:
        raise NumericalFailure(f"profile integration failed: {sol.message}")
    return sol.t_events[0].size > 0


def critical_beta(sigma: float, curve: ForwardCurve, tol: float = 1e-5,
                  x_max: Optional[float] = None) -> float:
    """Bisect on beta for the onset of a vanishing travel-speed profile."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    if not curve.is_flat:
        raise UnsupportedConfiguration("critical beta is defined for a flat curve")
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    lam0 = curve.lambda0
    x_max = 4.0 * lam0 if x_max is None else x_max

    def supercritical(beta):
        return _profile_vanishes(sigma, beta, lam0, x_max)

    lo, hi = 0.0, 2.0 * beta_critical(sigma, lam0)
    if supercritical(lo) or not supercritical(hi):
        raise NumericalFailure("critical-beta bracket does not straddle the transition")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if supercritical(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def fixed_point_roots(sigma: float, beta: float, lambda0: float) -> Optional[tuple[float, float]]:
    """Zeros ``x1 <= x2`` of the profile forcing ``f``; None when ``f > 0`` everywhere."""
    if beta == 0.0:
        return None
    disc = 1.0 - 2.0 * sigma**2 * lambda0 / beta**2
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    return 2.0 * lambda0 / (1.0 + sq), beta**2 / sigma**2 * (1.0 + sq)


def v_profiles_figure(sigma: float, lambda0: float, betas: Sequence[float],
                      x_max: Optional[float] = None, n_out: int = 801) -> dict[float, YProfile]:
    """Travel-speed profiles ``v(x) = sqrt(y(x))`` for several mean reversions."""
    if not betas:
        raise DomainError("betas must be nonempty")
    x_max = 3.0 * lambda0 if x_max is None else x_max
    curve = ForwardCurve.flat(lambda0)
    return {float(b): solve_y_profile(ModelParams(sigma, float(b), curve), x_max, n_out=n_out)
            for b in betas}


def explosion_report(params: ModelParams, assumption_horizon: float = 100.0) -> ExplosionReport:
    """Dispatch to the appropriate route.

    Non-flat curves get the flat-curve value at ``lambda(0)`` as an upper
    bound; a note is attached if the curve-shape check fails on the scanned
    horizon. Supercritical mean reversion raises :class:`SupercriticalError`
    (for non-flat curves the question is left to direct integration).
    """
    notes = []
    flat_params = params
    if not params.curve.is_flat:
        margin = assumption1_margin(params, assumption_horizon, 4001)
        if not margin.holds:
            notes.append(f"curve-shape condition fails at t={margin.argmin:.4g}; bound not guaranteed")
        flat_params = ModelParams(params.sigma, params.beta, ForwardCurve.flat(params.lambda0))
    if params.beta == 0.0:
        rep = explosion_time_beta0(flat_params)
    else:
        try:
            rep = explosion_time_quadrature(flat_params)
        except SupercriticalError:
            if params.curve.is_flat:
                raise
            raise SupercriticalError("undetermined: numerical study required "
                                     "(run solve on this configuration)") from None
    return ExplosionReport(rep.tau, rep.method, not params.curve.is_flat, rep.error_estimate,
                           rep.subcritical, tuple(notes))


def explosion_from_trajectory(params: ModelParams, traj) -> Optional[ExplosionReport]:
    """Report built from a direct integration's blow-up bracket, if any."""
    if not traj.blown_up:
        return None
    lo, hi = traj.blowup_bracket
    subcritical = params.beta < beta_critical(params.sigma, params.lambda0)
    return ExplosionReport(hi, Method.ODE_BRACKET, not params.curve.is_flat, hi - lo, subcritical)
