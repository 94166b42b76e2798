"""Stochastic-localization wrapper around the discrete MCMC kernels.

Drives the discretized observation SDE: at each time step the posterior is
the same quadratic model with a shifted external field, the posterior mean
is estimated by running an inner MCMC chain, and the observation vector is
advanced with Gaussian noise. The final observation, rescaled and
sign-rounded, is the sample.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .model import BqdModel, ConfigError, SpinState
from .samplers import Chain, SamplerKind

CLASSIC = "classic"
GEOM = "geom"

UNIFORM_GRID = "uniform"
LOG_SNR_GRID = "log-snr"

IDENTICAL = "identical"
EXP_DECAY = "exp-decay"


@dataclass(frozen=True)
class AlphaSchedule:
    """Observation gain alpha(t): classic alpha(t) = t, or the geometric
    family t^(a1/2) * (1-t)^(-a2/2) on [0, 1)."""

    kind: str = GEOM
    a1: float = 2.0
    a2: float = 1.0

    def __post_init__(self):
        if self.kind not in (CLASSIC, GEOM):
            raise ConfigError(f"unknown schedule kind {self.kind!r}")
        if self.kind == GEOM and (self.a1 < 1.0 or self.a2 <= 0.0):
            raise ConfigError("geometric schedule requires a1 >= 1 and a2 > 0")


def alpha_of(schedule: AlphaSchedule, t: float) -> float:
    if t < 0:
        raise ConfigError(f"time {t} outside schedule domain")
    if schedule.kind == CLASSIC:
        return float(t)
    if t >= 1.0:
        raise ConfigError(f"time {t} outside [0, 1) for the geometric schedule")
    if t == 0.0:
        return 0.0
    return float(t ** (0.5 * schedule.a1) * (1.0 - t) ** (-0.5 * schedule.a2))


def log_snr(schedule: AlphaSchedule, t: float, sigma: float) -> float:
    """log(alpha(t) / (sigma sqrt(t))), the quantity driven to +inf."""
    return math.log(alpha_of(schedule, t)) - math.log(sigma) - 0.5 * math.log(t)


@dataclass(frozen=True)
class SlConfig:
    schedule: AlphaSchedule = field(default_factory=AlphaSchedule)
    grid: str = UNIFORM_GRID
    k: int = 256
    sigma: float = 1.0
    eps: float = 1e-3
    eps_end: float = 1e-2
    total_mcmc: int = 10000
    allocation: str = IDENTICAL
    decay_rate: float = 0.01  # ExpDecay r
    n_min: int = 4  # ExpDecay per-iteration floor
    sample_ratio: float = 0.5
    warm_start: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if not (0.0 < self.eps < 0.5 and 0.0 < self.eps_end < 0.5):
            raise ConfigError("grid endpoints must lie in (0, 0.5)")
        if self.eps + self.eps_end >= 1.0:
            raise ConfigError("eps + eps_end must be < 1")
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")
        if not (0.0 < self.sample_ratio <= 1.0):
            raise ConfigError("sample_ratio must be in (0, 1]")
        if self.grid not in (UNIFORM_GRID, LOG_SNR_GRID):
            raise ConfigError(f"unknown grid {self.grid!r}")
        if self.allocation not in (IDENTICAL, EXP_DECAY):
            raise ConfigError(f"unknown allocation {self.allocation!r}")
        if self.allocation == EXP_DECAY:
            if not (0.0 < self.decay_rate < 1.0):
                raise ConfigError("decay rate must be in (0, 1)")
            if self.total_mcmc < self.k * self.n_min:
                raise ConfigError("budget below k * n_min")
        elif self.total_mcmc < self.k:
            raise ConfigError("budget below one step per iteration")


def build_time_grid(cfg: SlConfig) -> np.ndarray:
    """K+1 strictly increasing times on [eps, 1 - eps_end]."""
    t0, t1 = cfg.eps, 1.0 - cfg.eps_end
    if cfg.grid == UNIFORM_GRID:
        return np.linspace(t0, t1, cfg.k + 1)
    # log-SNR grid: equal spacing in log(alpha(t)/(sigma sqrt(t))),
    # each interior point located by monotone bisection.
    lo = log_snr(cfg.schedule, t0, cfg.sigma)
    hi = log_snr(cfg.schedule, t1, cfg.sigma)
    if not hi > lo:
        raise ConfigError("log-SNR not increasing over the grid interval")
    targets = np.linspace(lo, hi, cfg.k + 1)
    grid = np.empty(cfg.k + 1)
    grid[0], grid[-1] = t0, t1
    for idx in range(1, cfg.k):
        a, b = t0, t1
        for _ in range(80):
            mid = 0.5 * (a + b)
            if log_snr(cfg.schedule, mid, cfg.sigma) < targets[idx]:
                a = mid
            else:
                b = mid
        grid[idx] = 0.5 * (a + b)
    if not np.all(np.diff(grid) > 0):
        raise ConfigError("log-SNR grid failed to be strictly increasing")
    return grid


def allocate_steps(total: int, k: int, cfg: SlConfig) -> np.ndarray:
    """Split a total MCMC budget over k iterations; sums exactly to total.

    identical: as equal as possible, remainder to the earliest iterations.
    exp-decay: n_t = n_min + floor(c * r^(t/k)) with c matching the
    continuous sum, leftover steps handed one each to the earliest
    iterations (keeps the allocation non-increasing).
    """
    if cfg.allocation == IDENTICAL:
        if total < k:
            raise ConfigError("budget below one step per iteration")
        base, rem = divmod(total, k)
        out = np.full(k, base, dtype=np.int64)
        out[:rem] += 1
        return out
    n_min, r = cfg.n_min, cfg.decay_rate
    if total < k * n_min:
        raise ConfigError("budget below k * n_min")
    weights = r ** (np.arange(k) / k)
    spare = total - k * n_min
    c = spare / weights.sum()
    out = n_min + np.floor(c * weights).astype(np.int64)
    leftover = total - int(out.sum())
    out[:leftover] += 1
    assert int(out.sum()) == total
    return out


def posterior_model(
    target: BqdModel,
    y: np.ndarray,
    t: float,
    schedule: AlphaSchedule,
    sigma: float,
) -> BqdModel:
    """Tilted model with field b + alpha(t) y / (sigma^2 t); W, beta kept."""
    if t <= 0:
        raise ConfigError(f"posterior time must be positive, got {t}")
    scale = alpha_of(schedule, t) / (sigma * sigma * t)
    return target.with_field(target.b + scale * np.asarray(y, dtype=float))


def estimate_posterior_mean(
    post: BqdModel,
    chain: Chain,
    n_steps: int,
    sample_ratio: float,
) -> np.ndarray:
    """Run the chain n_steps on the posterior and average the trailing
    ceil(sample_ratio * n_steps) spin vectors."""
    if n_steps < 1:
        raise ConfigError("n_steps must be >= 1")
    keep = int(math.ceil(sample_ratio * n_steps))
    burn = n_steps - keep
    for _ in range(burn):
        chain.step(post)
    acc = np.zeros(post.n)
    for _ in range(keep):
        chain.step(post)
        acc += chain.state.spins
    return acc / keep


def condition_field_margin(post: BqdModel) -> tuple:
    """(min_i |h_i|, 2 beta max row sum) for the Condition-4.1 indicator."""
    h_eff = float(np.min(np.abs(post.b)))
    threshold = 2.0 * post.beta * post.max_offdiag_row_sum()
    return h_eff, threshold


@dataclass
class SlTrace:
    """Per-iteration record of one SL run, serializable as JSON lines."""

    records: list = field(default_factory=list)
    y_final: np.ndarray = None  # type: ignore[assignment]
    alpha_final: float = 0.0

    def to_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec) + "\n")

    @classmethod
    def from_jsonl(cls, path) -> "SlTrace":
        trace = cls()
        with open(path) as fh:
            trace.records = [json.loads(ln) for ln in fh if ln.strip()]
        return trace


def sl_run(
    target: BqdModel,
    kind: SamplerKind,
    cfg: SlConfig,
    seed,
) -> tuple:
    """One sequential SL run; returns (sample, trace).

    The raw output y_K / alpha(t_K) is sign-rounded coordinate-wise with
    ties broken toward +1.
    """
    rng = np.random.default_rng(seed)
    grid = build_time_grid(cfg)
    steps = allocate_steps(cfg.total_mcmc, cfg.k, cfg)
    sigma = cfg.sigma

    y = rng.standard_normal(target.n) * (sigma * math.sqrt(grid[0]))
    chain = Chain.start(target, kind, rng)
    trace = SlTrace()

    for i in range(cfg.k):
        t_i, t_next = float(grid[i]), float(grid[i + 1])
        delta = t_next - t_i
        w = alpha_of(cfg.schedule, t_next) - alpha_of(cfg.schedule, t_i)
        post = posterior_model(target, y, t_i, cfg.schedule, sigma)
        if not cfg.warm_start:
            chain = Chain.start(post, kind, rng)
        u = estimate_posterior_mean(post, chain, int(steps[i]), cfg.sample_ratio)
        h_eff, threshold = condition_field_margin(post)
        trace.records.append(
            {
                "iteration": i,
                "t": t_i,
                "alpha": alpha_of(cfg.schedule, t_i),
                "y": [float(v) for v in y],
                "u": [float(v) for v in u],
                "mcmc_steps_used": int(steps[i]),
                "min_abs_field": h_eff,
                "condition_4_1_satisfied": bool(h_eff >= threshold),
            }
        )
        y = y + w * u + sigma * math.sqrt(delta) * rng.standard_normal(target.n)

    alpha_end = alpha_of(cfg.schedule, float(grid[-1]))
    trace.y_final = y
    trace.alpha_final = alpha_end
    spins = np.where(y / alpha_end >= 0.0, 1, -1).astype(np.int8)
    return SpinState.from_spins(target, spins), trace


def sl_run_ensemble(
    target: BqdModel,
    cfg: SlConfig,
    n_replicas: int,
    seed,
) -> np.ndarray:
    """Many independent SL+Glauber runs advanced in lockstep.

    Vectorizes the inner Glauber chain across replicas so that ensemble
    statistics (output laws, tail frequencies) are affordable; semantics
    per replica match sl_run with a Glauber inner kernel and warm starts.
    Returns the (n_replicas, N) matrix of sign-rounded outputs.
    """
    rng = np.random.default_rng(seed)
    grid = build_time_grid(cfg)
    steps = allocate_steps(cfg.total_mcmc, cfg.k, cfg)
    sigma = cfg.sigma
    n, r = target.n, n_replicas
    w_dense = target.dense()
    beta = target.beta

    y = rng.standard_normal((r, n)) * (sigma * math.sqrt(grid[0]))
    spins = np.where(rng.random((r, n)) < 0.5, -1.0, 1.0)
    cache = spins @ w_dense
    rows_idx = np.arange(r)

    for i in range(cfg.k):
        t_i, t_next = float(grid[i]), float(grid[i + 1])
        delta = t_next - t_i
        w_inc = alpha_of(cfg.schedule, t_next) - alpha_of(cfg.schedule, t_i)
        scale = alpha_of(cfg.schedule, t_i) / (sigma * sigma * t_i)
        h = target.b[None, :] + scale * y

        n_steps = int(steps[i])
        keep = int(math.ceil(cfg.sample_ratio * n_steps))
        acc = np.zeros((r, n))
        for s in range(n_steps):
            sites = rng.integers(0, n, size=r)
            local = h[rows_idx, sites] - beta * cache[rows_idx, sites]
            p_plus = 1.0 / (1.0 + np.exp(-2.0 * local))
            new = np.where(rng.random(r) < p_plus, 1.0, -1.0)
            diff = new - spins[rows_idx, sites]
            changed = diff != 0.0
            if np.any(changed):
                spins[rows_idx[changed], sites[changed]] = new[changed]
                cache[changed] += diff[changed, None] * w_dense[sites[changed], :]
            if s >= n_steps - keep:
                acc += spins
        u = acc / keep
        y = y + w_inc * u + sigma * math.sqrt(delta) * rng.standard_normal((r, n))

    alpha_end = alpha_of(cfg.schedule, float(grid[-1]))
    return np.where(y / alpha_end >= 0.0, 1, -1).astype(np.int8)
