"""Equianharmonic Weierstrass function on the real axis.

``wp(z) = P(z; g2=0, g3=1)`` satisfies ``wp'^2 = 4 wp^3 - 1``. On the real
line it has double poles at multiples of ``2 * omega2`` and attains its
minimum ``p0 = 4**(-1/3)`` at ``z = omega2``. Evaluation reduces the
argument to ``(0, omega2]``, halves it until it lies inside the Laurent
disc, sums the series and doubles back with the duplication formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import PoleProximityError

LAURENT_RADIUS = 0.5
POLE_TOL = 1e-10
_N_TERMS = 8  # coefficients of z^4, z^10, ..., z^46


@dataclass(frozen=True)
class WpConstants:
    p0: float
    omega2: float

    @property
    def blowup_constant(self) -> float:
        """``sqrt(6 p0) * omega2``; the flat-curve explosion time is this over ``sigma sqrt(lambda0)``."""
        return math.sqrt(6.0 * self.p0) * self.omega2


@lru_cache(maxsize=None)
def wp_constants() -> WpConstants:
    # real root of 4 p^3 = 1 and the real half-period G(1/3)^3 / (4 pi)
    return WpConstants(p0=4.0 ** (-1.0 / 3.0), omega2=math.gamma(1.0 / 3.0) ** 3 / (4.0 * math.pi))


@lru_cache(maxsize=None)
def laurent_coefficients(n_terms: int = _N_TERMS) -> tuple[float, ...]:
    """Coefficients ``c_k`` of ``wp = z^-2 + sum_k c_k z^(2k-2)`` for g2 = 0, g3 = 1.

    Recurrence: ``c_2 = g2/20``, ``c_3 = g3/28`` and
    ``c_k = 3 / ((2k+1)(k-3)) * sum_{m=2}^{k-2} c_m c_{k-m}``.
    Only every third coefficient is nonzero; returned are ``c_3, c_6, c_9, ...``.
    """
    kmax = 3 * n_terms
    c = [0.0] * (kmax + 1)
    c[3] = 1.0 / 28.0
    for k in range(4, kmax + 1):
        s = sum(c[m] * c[k - m] for m in range(2, k - 1))
        c[k] = 3.0 * s / ((2 * k + 1) * (k - 3))
    return tuple(c[3 * j] for j in range(1, n_terms + 1))


def _laurent(z: float) -> float:
    z2 = z * z
    z6 = z2 * z2 * z2
    acc = 0.0
    for coef in reversed(laurent_coefficients()):
        acc = acc * z6 + coef
    return 1.0 / z2 + acc * z2 * z2


def _duplicate(p: float) -> float:
    # P(2z) = -2P + (P''/P')^2 / 4 with P'' = 6P^2, P'^2 = 4P^3 - 1
    return -2.0 * p + 9.0 * p**4 / (4.0 * p**3 - 1.0)


def wp_equianharmonic(z: float) -> float:
    """Evaluate ``P(z; 0, 1)`` for real ``z``."""
    w2 = wp_constants().omega2
    period = 2.0 * w2
    u = math.fmod(abs(float(z)), period)
    if min(u, period - u) < POLE_TOL:
        raise PoleProximityError(f"z={z!r} lies within {POLE_TOL:g} of a pole")
    if u > w2:
        u = period - u
    n = 0
    while u > LAURENT_RADIUS:
        u *= 0.5
        n += 1
    p = _laurent(u)
    for _ in range(n):
        p = _duplicate(p)
    return p


def wp_scaled(z: float, g3: float) -> float:
    """``P(z; 0, g3) = g3^(1/3) P(z g3^(1/6); 0, 1)`` for ``g3 > 0``."""
    return g3 ** (1.0 / 3.0) * wp_equianharmonic(z * g3 ** (1.0 / 6.0))
