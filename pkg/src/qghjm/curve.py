"""Initial forward curves and model parameters.

A :class:`ForwardCurve` represents the time-zero instantaneous forward rate
``lambda(t) = f(0, t)``. Four families are supported: flat, linear,
exponentially relaxing and tabulated (natural cubic spline through knots,
flat beyond the last knot). All evaluation methods accept scalars or numpy
arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError, DomainError

TOL_ASSUMPTION = 1e-12

KINDS = ("flat", "linear", "exponential", "tabulated")


def _check_t(t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or not np.all(np.isfinite(t_arr)):
        raise DomainError(f"time must be finite and >= 0, got {t!r}")
    return t_arr


def _out(t_in, values):
    return float(values) if np.ndim(t_in) == 0 else values


@dataclass(frozen=True)
class ForwardCurve:
    """Initial forward rate curve.

    Use the constructors :meth:`flat`, :meth:`linear`, :meth:`exponential`
    and :meth:`tabulated` rather than the raw initializer.
    """

    kind: str
    lambda0: float
    slope: float = 0.0
    lambda_inf: float = 0.0
    decay: float = 0.0
    knots: tuple[tuple[float, float], ...] = ()
    _spline: Any = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown curve kind {self.kind!r}")
        if self.kind == "tabulated":
            if len(self.knots) < 2:
                raise DomainError("tabulated curve needs at least two knots")
            ts = np.array([k[0] for k in self.knots], dtype=float)
            rs = np.array([k[1] for k in self.knots], dtype=float)
            if ts[0] != 0.0:
                raise DomainError("first knot must sit at t = 0")
            if np.any(np.diff(ts) <= 0):
                raise DomainError("knot times must be strictly increasing")
            object.__setattr__(self, "lambda0", float(rs[0]))
            object.__setattr__(self, "_spline", CubicSpline(ts, rs, bc_type="natural"))
        if self.kind == "exponential" and self.decay < 0:
            raise DomainError("decay must be >= 0")
        if not self.lambda0 > 0:
            raise DomainError(f"lambda(0) must be positive, got {self.lambda0}")

    # constructors

    @classmethod
    def flat(cls, lambda0: float) -> "ForwardCurve":
        return cls("flat", float(lambda0))

    @classmethod
    def linear(cls, lambda0: float, slope: float) -> "ForwardCurve":
        return cls("linear", float(lambda0), slope=float(slope))

    @classmethod
    def exponential(cls, lambda_inf: float, lambda0: float, decay: float) -> "ForwardCurve":
        """``lambda(t) = lambda_inf + (lambda0 - lambda_inf) * exp(-decay * t)``."""
        return cls("exponential", float(lambda0), lambda_inf=float(lambda_inf), decay=float(decay))

    @classmethod
    def tabulated(cls, knots: Sequence[Sequence[float]]) -> "ForwardCurve":
        knots = tuple((float(t), float(r)) for t, r in knots)
        return cls("tabulated", knots[0][1] if knots else 0.0, knots=knots)

    @property
    def is_flat(self) -> bool:
        if self.kind == "flat":
            return True
        if self.kind == "linear":
            return self.slope == 0.0
        if self.kind == "exponential":
            return self.decay == 0.0 or self.lambda_inf == self.lambda0
        return all(r == self.lambda0 for _, r in self.knots)

    @property
    def t_last(self) -> float:
        return self.knots[-1][0] if self.kind == "tabulated" else math.inf

    # evaluation

    def value(self, t):
        """lambda(t); flat extrapolation beyond the last knot of a tabulated curve."""
        ta = _check_t(t)
        if self.kind == "flat":
            v = np.full_like(ta, self.lambda0)
        elif self.kind == "linear":
            v = self.lambda0 + self.slope * ta
        elif self.kind == "exponential":
            v = self.lambda_inf + (self.lambda0 - self.lambda_inf) * np.exp(-self.decay * ta)
        else:
            tc = np.minimum(ta, self.t_last)
            v = self._spline(tc)
        return _out(t, v)

    def d1(self, t):
        ta = _check_t(t)
        if self.kind == "flat":
            v = np.zeros_like(ta)
        elif self.kind == "linear":
            v = np.full_like(ta, self.slope)
        elif self.kind == "exponential":
            v = -self.decay * (self.lambda0 - self.lambda_inf) * np.exp(-self.decay * ta)
        else:
            v = np.where(ta <= self.t_last, self._spline(np.minimum(ta, self.t_last), 1), 0.0)
        return _out(t, v)

    def d2(self, t):
        ta = _check_t(t)
        if self.kind in ("flat", "linear"):
            v = np.zeros_like(ta)
        elif self.kind == "exponential":
            v = self.decay**2 * (self.lambda0 - self.lambda_inf) * np.exp(-self.decay * ta)
        else:
            v = np.where(ta <= self.t_last, self._spline(np.minimum(ta, self.t_last), 2), 0.0)
        return _out(t, v)

    __call__ = value

    def integral(self, t):
        """Integral of lambda over [0, t]; ``exp(-integral)`` is the discount factor P(0, t)."""
        ta = _check_t(t)
        if self.kind == "flat":
            v = self.lambda0 * ta
        elif self.kind == "linear":
            v = self.lambda0 * ta + 0.5 * self.slope * ta**2
        elif self.kind == "exponential":
            k = self.decay
            if k == 0.0:
                v = self.lambda0 * ta
            else:
                v = self.lambda_inf * ta + (self.lambda0 - self.lambda_inf) * (-np.expm1(-k * ta)) / k
        else:
            tl = self.t_last
            tc = np.minimum(ta, tl)
            inner = np.vectorize(lambda s: self._spline.integrate(0.0, s))(tc)
            v = inner + self.knots[-1][1] * np.maximum(ta - tl, 0.0)
        return _out(t, v)

    def discount(self, t):
        return _out(t, np.exp(-np.asarray(self.integral(t))))

    def sup(self) -> float:
        """Supremum of lambda over [0, inf); ``inf`` for an increasing linear curve."""
        if self.kind == "flat":
            return self.lambda0
        if self.kind == "linear":
            return self.lambda0 if self.slope <= 0 else math.inf
        if self.kind == "exponential":
            return max(self.lambda0, self.lambda_inf) if self.decay > 0 else self.lambda0
        crit = self._spline.derivative().roots(extrapolate=False)
        cand = [r for _, r in self.knots] + [float(self._spline(c)) for c in crit]
        return max(cand)

    def limit(self) -> float | None:
        """lambda(inf) when it exists, else None."""
        if self.kind == "flat":
            return self.lambda0
        if self.kind == "linear":
            return self.lambda0 if self.slope == 0 else None
        if self.kind == "exponential":
            return self.lambda_inf if self.decay > 0 else self.lambda0
        return self.knots[-1][1]

    def to_dict(self) -> dict:
        if self.kind == "flat":
            return {"kind": "flat", "lambda0": self.lambda0}
        if self.kind == "linear":
            return {"kind": "linear", "lambda0": self.lambda0, "slope": self.slope}
        if self.kind == "exponential":
            return {"kind": "exponential", "lambda_inf": self.lambda_inf,
                    "lambda0": self.lambda0, "decay": self.decay}
        return {"kind": "tabulated", "knots": [list(k) for k in self.knots]}


def curve_from_dict(spec: Mapping[str, Any]) -> ForwardCurve:
    """Build a curve from a config block such as ``{"kind": "flat", "lambda0": 0.05}``."""
    try:
        kind = str(spec.get("kind", "flat")).lower()
        if kind == "flat":
            return ForwardCurve.flat(spec["lambda0"])
        if kind == "linear":
            return ForwardCurve.linear(spec["lambda0"], spec["slope"])
        if kind == "exponential":
            return ForwardCurve.exponential(spec["lambda_inf"], spec["lambda0"], spec["decay"])
        if kind == "tabulated":
            return ForwardCurve.tabulated(spec["knots"])
    except KeyError as exc:
        raise ConfigError(f"curve block missing field {exc}") from None
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown curve kind {kind!r}")


@dataclass(frozen=True)
class ModelParams:
    """One-factor log-normal quasi-Gaussian HJM model.

    Attributes
    ----------
    sigma : float
        Log-normal short-rate volatility. Zero is accepted as the deterministic limit.
    beta : float
        Mean reversion of the volatility kernel ``exp(-beta (T - t))``.
    curve : ForwardCurve
        Initial forward curve.
    """

    sigma: float
    beta: float
    curve: ForwardCurve

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma >= 0):
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise DomainError(f"beta must be >= 0, got {self.beta}")

    @property
    def lambda0(self) -> float:
        return self.curve.lambda0

    def with_beta(self, beta: float) -> "ModelParams":
        return replace(self, beta=float(beta))

    def with_sigma(self, sigma: float) -> "ModelParams":
        return replace(self, sigma=float(sigma))

    def drift_forcing(self, t):
        """``beta * lambda(t) + lambda'(t)``, the curve-driven part of the r drift."""
        return self.beta * np.asarray(self.curve.value(t)) + np.asarray(self.curve.d1(t))


def params_from_dict(spec: Mapping[str, Any]) -> ModelParams:
    try:
        sigma = float(spec.get("sigma", 0.2))
        beta = float(spec.get("beta", 0.0))
        curve = curve_from_dict(spec.get("curve", {"kind": "flat", "lambda0": 0.05}))
        return ModelParams(sigma, beta, curve)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


class Assumption1Margin(NamedTuple):
    min_value: float
    argmin: float
    holds: bool
    horizon: float


def lambda_functional(params: ModelParams, t):
    """``2 beta^2 (lambda(t) - lambda(0)) + 3 beta lambda'(t) + lambda''(t)``."""
    c, b = params.curve, params.beta
    return 2 * b * b * (np.asarray(c.value(t)) - c.lambda0) + 3 * b * np.asarray(c.d1(t)) + np.asarray(c.d2(t))


def assumption1_margin(params: ModelParams, horizon: float, grid: int = 2001) -> Assumption1Margin:
    """Grid scan of the curve-shape functional over ``[0, horizon]``.

    This certifies nonnegativity only on the scanned grid and horizon.
    """
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    if grid < 2:
        raise DomainError("grid must have at least two points")
    ts = np.linspace(0.0, horizon, int(grid))
    vals = lambda_functional(params, ts)
    i = int(np.argmin(vals))
    mv = float(vals[i])
    return Assumption1Margin(mv, float(ts[i]), mv >= -TOL_ASSUMPTION, float(horizon))
