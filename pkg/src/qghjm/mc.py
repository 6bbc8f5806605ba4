"""Monte Carlo simulation of the stochastic (r, y) system with a noise dial.

The diffusion term ``sigma r dW`` is multiplied by ``noise_scale`` (epsilon);
the ``sigma^2 r^2`` drift of ``y`` is left untouched, so epsilon -> 0
recovers the deterministic system exactly. Epsilon is an implementation
construct for studying the small-noise limit, not a model parameter.

Explosion is proxied by absorption at a finite barrier. Paths are simulated
in fixed-size chunks, each with its own counter-based (Philox) stream keyed
by ``(seed, chunk index)``, so results do not depend on how chunks are
scheduled.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .curve import ModelParams
from .errors import DomainError, SimulationFault

CHUNK_SIZE = 4096
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


class Scheme(str, enum.Enum):
    LOG_EULER_DIFFUSION = "LogEulerDiffusion"
    EULER_ABSORBED = "EulerAbsorbed"


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings.

    ``barrier`` defaults to ``1000 * lambda(0)``. ``absorbed`` selects how
    absorbed paths enter the means: ``"carry"`` freezes them at their
    crossing value, ``"survivors"`` averages over live paths only.
    """

    n_paths: int = 10_000
    dt: float = 1.0 / 250.0
    noise_scale: float = 1.0
    seed: int = 0
    barrier: Optional[float] = None
    scheme: Scheme = Scheme.LOG_EULER_DIFFUSION
    absorbed: str = "carry"
    antithetic: bool = False

    def __post_init__(self):
        if self.n_paths < 1:
            raise DomainError("n_paths must be >= 1")
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if not 0.0 <= self.noise_scale <= 1.0:
            raise DomainError("noise_scale must lie in [0, 1]")
        if self.absorbed not in ("carry", "survivors"):
            raise DomainError("absorbed must be 'carry' or 'survivors'")
        object.__setattr__(self, "scheme", Scheme(self.scheme))

    def barrier_for(self, params: ModelParams) -> float:
        b = 1e3 * params.lambda0 if self.barrier is None else float(self.barrier)
        if not b > params.lambda0:
            raise DomainError("barrier must exceed lambda(0)")
        return b


@dataclass(frozen=True)
class McSummary:
    times: np.ndarray
    mean_r: np.ndarray
    stderr_r: np.ndarray
    mean_y: np.ndarray
    hit_fraction: float
    hit_times: np.ndarray  # hitting times of absorbed paths, path order
    n_paths: int
    meta: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class HitStats:
    mean: Optional[float]
    std: Optional[float]
    quantiles: dict
    n_hit: int
    n_censored: int

    @property
    def censored_only(self) -> bool:
        return self.n_hit == 0

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std,
                "quantiles": {str(k): v for k, v in self.quantiles.items()},
                "n_hit": self.n_hit, "n_censored": self.n_censored}


def n_steps_for(t_end: float, dt: float) -> int:
    n = t_end / dt
    n_int = int(round(n))
    if n_int < 1 or abs(n - n_int) > 1e-9 * max(1.0, n):
        raise DomainError(f"t_end/dt = {n} is not a whole number of steps")
    return n_int


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _normals(rng: np.random.Generator, m: int, antithetic: bool) -> np.ndarray:
    # a full chunk is drawn every step so a path's noise does not depend on n_paths
    if not antithetic:
        return rng.standard_normal(CHUNK_SIZE)[:m]
    half = rng.standard_normal((m + 1) // 2)
    return np.concatenate([half, -half])[:m]


class _Stepper:
    """One time step of the discretized system for a vector of paths."""

    def __init__(self, params: ModelParams, cfg: McConfig):
        self.p = params
        self.dt = cfg.dt
        self.eps_sigma = cfg.noise_scale * params.sigma
        self.scheme = cfg.scheme
        b, dt = params.beta, cfg.dt
        self.y_decay = math.exp(-2.0 * b * dt)
        # exact-in-r weight of sigma^2 r^2 over the step
        self.y_weight = dt if b < 1e-12 else -math.expm1(-2.0 * b * dt) / (2.0 * b)

    def __call__(self, t: float, r: np.ndarray, y: np.ndarray, z: np.ndarray):
        p, dt = self.p, self.dt
        # y first (exact given r over the step), then r sees the updated y
        y_new = y * self.y_decay + p.sigma**2 * r * r * self.y_weight
        drift = y_new - p.beta * r + float(p.drift_forcing(t))
        dw = math.sqrt(dt) * z
        r_drift = r + drift * dt
        if self.scheme is Scheme.LOG_EULER_DIFFUSION:
            es = self.eps_sigma
            r_new = r_drift * np.exp(es * dw - 0.5 * es * es * dt)
        else:
            r_new = r_drift + self.eps_sigma * r * dw
        return r_new, y_new, r_new - r_drift


def _chunk_moments(x: np.ndarray, mask: Optional[np.ndarray]):
    if mask is None:
        n = x.size
        mean = float(np.mean(x))
        m2 = float(np.sum((x - mean) ** 2))
        return n, mean, m2
    n = int(mask.sum())
    if n == 0:
        return 0, 0.0, 0.0
    xs = x[mask]
    mean = float(np.mean(xs))
    return n, mean, float(np.sum((xs - mean) ** 2))


def _combine(acc, n_b, mean_b, m2_b, i):
    # Chan et al. pairwise update of (count, mean, M2) at time index i
    n_a, mean_a, m2_a = acc[0][i], acc[1][i], acc[2][i]
    n = n_a + n_b
    if n == 0:
        return
    d = mean_b - mean_a
    acc[1][i] = mean_a + d * n_b / n
    acc[2][i] = m2_a + m2_b + d * d * n_a * n_b / n
    acc[0][i] = n


def simulate(params: ModelParams, cfg: McConfig, t_end: float) -> McSummary:
    """Simulate ``cfg.n_paths`` paths to ``t_end`` and summarize them per step."""
    n_steps = n_steps_for(t_end, cfg.dt)
    barrier = cfg.barrier_for(params)
    step = _Stepper(params, cfg)
    times = cfg.dt * np.arange(n_steps + 1)
    survivors_only = cfg.absorbed == "survivors"

    acc_r = (np.zeros(n_steps + 1), np.zeros(n_steps + 1), np.zeros(n_steps + 1))
    acc_y = (np.zeros(n_steps + 1), np.zeros(n_steps + 1), np.zeros(n_steps + 1))
    hit_times = []

    n_chunks = -(-cfg.n_paths // CHUNK_SIZE)
    for c in range(n_chunks):
        m = min(CHUNK_SIZE, cfg.n_paths - c * CHUNK_SIZE)
        rng = chunk_rng(cfg.seed, c)
        r = np.full(m, params.lambda0)
        y = np.zeros(m)
        alive = np.ones(m, dtype=bool)
        t_hit = np.full(m, np.nan)
        mask = alive if survivors_only else None
        _combine(acc_r, *_chunk_moments(r, mask), 0)
        _combine(acc_y, *_chunk_moments(y, mask), 0)
        for k in range(n_steps):
            z = _normals(rng, m, cfg.antithetic)
            r_new, y_new, _ = step(times[k], r, y, z)
            r = np.where(alive, r_new, r)
            y = np.where(alive, y_new, y)
            bad = alive & ~np.isfinite(r)
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise SimulationFault(
                    f"non-finite rate on path {c * CHUNK_SIZE + i} at t={times[k + 1]:.6g}",
                    partial={"path": c * CHUNK_SIZE + i, "t": float(times[k + 1]), "y": float(y[i])})
            crossed = alive & (r >= barrier)
            if crossed.any():
                t_hit[crossed] = times[k + 1]
                alive &= ~crossed
            mask = alive if survivors_only else None
            _combine(acc_r, *_chunk_moments(r, mask), k + 1)
            _combine(acc_y, *_chunk_moments(y, mask), k + 1)
        hit_times.append(t_hit)

    t_hit_all = np.concatenate(hit_times)
    n_r = acc_r[0]
    with np.errstate(invalid="ignore", divide="ignore"):
        var = np.where(n_r > 1, acc_r[2] / np.maximum(n_r - 1, 1), 0.0)
        stderr = np.sqrt(var / np.maximum(n_r, 1))
    hit = np.isfinite(t_hit_all)
    meta = {"noise_scale": cfg.noise_scale, "noise_scale_note": "implementation small-noise dial",
            "scheme": cfg.scheme.value, "barrier": barrier, "seed": cfg.seed,
            "absorbed": cfg.absorbed}
    return McSummary(times, acc_r[1].copy(), stderr, acc_y[1].copy(),
                     float(hit.mean()), t_hit_all[hit], cfg.n_paths, meta)


def simulate_paths(params: ModelParams, cfg: McConfig, t_end: float):
    """Full ``(times, r, y, diffusion)`` arrays, shape ``(n_steps + 1, n_paths)``.

    Intended for small path counts; no absorption is applied. ``diffusion``
    holds the per-step diffusive increment of ``r`` (zero in the first row).
    """
    n_steps = n_steps_for(t_end, cfg.dt)
    step = _Stepper(params, cfg)
    times = cfg.dt * np.arange(n_steps + 1)
    shape = (n_steps + 1, cfg.n_paths)
    rs, ys, ds = np.empty(shape), np.empty(shape), np.zeros(shape)
    n_chunks = -(-cfg.n_paths // CHUNK_SIZE)
    for c in range(n_chunks):
        lo = c * CHUNK_SIZE
        m = min(CHUNK_SIZE, cfg.n_paths - lo)
        rng = chunk_rng(cfg.seed, c)
        r, y = np.full(m, params.lambda0), np.zeros(m)
        rs[0, lo:lo + m], ys[0, lo:lo + m] = r, y
        for k in range(n_steps):
            r, y, d = step(times[k], r, y, _normals(rng, m, cfg.antithetic))
            rs[k + 1, lo:lo + m], ys[k + 1, lo:lo + m], ds[k + 1, lo:lo + m] = r, y, d
    return times, rs, ys, ds


def hit_time_stats(params: ModelParams, cfg: McConfig, t_end: float) -> HitStats:
    """Distribution of barrier-hitting times; paths alive at ``t_end`` are censored."""
    return hit_stats_from_summary(simulate(params, cfg, t_end))


def hit_stats_from_summary(summary: McSummary) -> HitStats:
    ht = summary.hit_times
    n_hit = int(ht.size)
    n_cens = summary.n_paths - n_hit
    if n_hit == 0:
        return HitStats(None, None, {}, 0, n_cens)
    qs = {q: float(np.quantile(ht, q)) for q in QUANTILES}
    std = float(np.std(ht, ddof=1)) if n_hit > 1 else 0.0
    return HitStats(float(np.mean(ht)), std, qs, n_hit, n_cens)
