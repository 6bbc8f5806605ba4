"""Deterministic and small-noise analysis of rate explosion in a log-normal
one-factor quasi-Gaussian HJM model."""

from .curve import ForwardCurve, ModelParams
from .detsys import StepControl, Trajectory, fixed_points, solve
from .explosion import explosion_report, explosion_time_beta0, explosion_time_quadrature
from .errors import QGHJMError
from .mc import McConfig, simulate

__all__ = [
    "ForwardCurve", "ModelParams", "StepControl", "Trajectory", "fixed_points", "solve",
    "explosion_report", "explosion_time_beta0", "explosion_time_quadrature",
    "QGHJMError", "McConfig", "simulate",
]
__version__ = "0.1.0"
