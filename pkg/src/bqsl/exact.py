"""Exact small-N machinery for verifying the sampler theory.

Everything here enumerates the full state space: exact distributions, exact
transition kernels for every sampler kind, Poincare constants through the
Dirichlet form, brute-force interdependence (Dobrushin-style) coefficients,
the closed-form spectral-gap lower bounds, the Gaussian tail formula of the
observation process, and a Monte Carlo probe of the error-decay rate.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh, null_space
from scipy.special import logsumexp

from .model import BqdModel, ConfigError, SpinState
from .samplers import (
    DMALA,
    DULA,
    GLAUBER,
    GRADIENT_MH,
    METROPOLIS,
    SOFTMAX_SITES,
    UNIFORM_SITE,
    Chain,
    SamplerKind,
)
from .sl import AlphaSchedule, alpha_of

CAP_ENUM = 20  # full distribution
CAP_KERNEL = 12  # dense transition matrices
CAP_DOBRUSHIN = 16  # pairwise conditional sups


class CapacityError(ConfigError):
    """State space too large for dense enumeration."""


def state_matrix(n: int) -> np.ndarray:
    """(2^n, n) matrix of all spin configurations; state s has spin +1 at
    site i exactly when bit i of s is set."""
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> np.arange(n)[None, :]) & 1
    return (2.0 * bits - 1.0).astype(float)


def _log_weights(model: BqdModel) -> np.ndarray:
    """Unnormalized log-mass of every state."""
    x = state_matrix(model.n)
    w = model.dense()
    return -0.5 * model.beta * np.einsum("si,si->s", x, x @ w) + x @ model.b


def _flip_deltas(model: BqdModel) -> np.ndarray:
    """(2^n, n) matrix of per-site log-density changes."""
    x = state_matrix(model.n)
    cache = x @ model.dense()
    return 2.0 * model.beta * x * cache - 2.0 * x * model.b[None, :]


@dataclass
class ExactEnsemble:
    """Full probability vector of the target over lexicographic states."""

    n: int
    probs: np.ndarray
    log_weights: np.ndarray  # unnormalized, kept for stable ratios

    def mean(self) -> np.ndarray:
        return self.probs @ state_matrix(self.n)


def exact_distribution(model: BqdModel) -> ExactEnsemble:
    """Normalize over all 2^N states with log-sum-exp."""
    if model.n > CAP_ENUM:
        raise CapacityError(f"N={model.n} exceeds the enumeration cap {CAP_ENUM}")
    lw = _log_weights(model)
    probs = np.exp(lw - logsumexp(lw))
    probs /= probs.sum()
    return ExactEnsemble(n=model.n, probs=probs, log_weights=lw)


@dataclass
class ExactKernel:
    """Dense row-stochastic transition matrix for one sampler kind."""

    p: np.ndarray
    kind: SamplerKind


def _sigmoid_arr(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _single_site_kernel(n: int, flip_probs: np.ndarray) -> np.ndarray:
    """Assemble a uniform-site kernel from local (2^n, n) flip probabilities."""
    size = 1 << n
    p = np.zeros((size, size))
    idx = np.arange(size)
    for i in range(n):
        p[idx, idx ^ (1 << i)] += flip_probs[:, i] / n
    p[idx, idx] += 1.0 - p.sum(axis=1)
    return p


def _dula_log_kernel(model: BqdModel, step_size: float) -> np.ndarray:
    """Log of the factorized all-site proposal kernel, (2^n, 2^n)."""
    n = model.n
    damping = 0.0 if np.isinf(step_size) else 2.0 / step_size
    z = 0.5 * _flip_deltas(model) - damping
    log_flip = -np.logaddexp(0.0, -z)
    log_keep = -np.logaddexp(0.0, z)
    idx = np.arange(1 << n)
    logp = np.zeros((1 << n, 1 << n))
    for i in range(n):
        flips = ((idx[:, None] ^ idx[None, :]) >> i) & 1
        logp += np.where(flips.astype(bool), log_flip[:, i : i + 1], log_keep[:, i : i + 1])
    return logp


def exact_kernel(model: BqdModel, kind: SamplerKind) -> ExactKernel:
    """Dense transition matrix matching the step functions in samplers."""
    n = model.n
    if n > CAP_KERNEL:
        raise CapacityError(f"N={n} exceeds the kernel cap {CAP_KERNEL}")
    d = _flip_deltas(model)
    tag = kind.tag

    if tag == GLAUBER:
        # heat-bath flip probability is sigma(flip_delta)
        p = _single_site_kernel(n, _sigmoid_arr(d))
    elif tag == METROPOLIS:
        p = _single_site_kernel(n, np.minimum(1.0, np.exp(np.minimum(d, 0.0))))
    elif tag == GRADIENT_MH and kind.site_selection == UNIFORM_SITE:
        # proposal sigma(d/2); the MH ratio collapses to exp(d/2)
        local = _sigmoid_arr(0.5 * d) * np.minimum(1.0, np.exp(np.minimum(0.5 * d, 0.0)))
        p = _single_site_kernel(n, local)
    elif tag == GRADIENT_MH and kind.site_selection == SOFTMAX_SITES:
        half = 0.5 * d
        shift = half.max(axis=1, keepdims=True)
        w = np.exp(half - shift)
        log_z = shift[:, 0] + np.log(w.sum(axis=1))
        size = 1 << n
        idx = np.arange(size)
        p = np.zeros((size, size))
        for i in range(n):
            flip = idx ^ (1 << i)
            prop = np.exp(half[:, i] - log_z)
            acc = np.minimum(1.0, np.exp(log_z - log_z[flip]))
            p[idx, flip] += prop * acc
        p[idx, idx] += 1.0 - p.sum(axis=1)
    elif tag == DULA:
        p = np.exp(_dula_log_kernel(model, kind.step_size))
    elif tag == DMALA:
        logq = _dula_log_kernel(model, kind.step_size)
        lw = _log_weights(model)
        log_ratio = (lw[None, :] - lw[:, None]) + logq.T - logq
        acc = np.minimum(1.0, np.exp(np.minimum(log_ratio, 0.0)))
        q = np.exp(logq)
        p = q * acc
        idx = np.arange(1 << n)
        # self-proposals are always accepted (acc diagonal is 1); rejected
        # off-diagonal mass returns to the diagonal
        p[idx, idx] += (q * (1.0 - acc)).sum(axis=1)
    else:
        raise ConfigError(f"no exact kernel for {tag!r}/{kind.site_selection!r}")

    row_err = np.abs(p.sum(axis=1) - 1.0).max()
    if row_err > 1e-10:
        raise AssertionError(f"kernel rows off stochastic by {row_err}")
    return ExactKernel(p=p, kind=kind)


def poincare_constant(kernel: ExactKernel, ensemble: ExactEnsemble) -> float:
    """sup over nonconstant f of Var(f) / E(f,f) for the two-point Dirichlet
    form E(f,f) = (1/2) sum nu(x) P(x,y) (f(x)-f(y))^2.

    Worked in density-whitened coordinates g = sqrt(nu) f, where the variance
    form restricted to the complement of the constants is the identity; the
    answer is then 1 over the smallest eigenvalue of the projected energy
    form. Returns inf when the form is degenerate (reducible kernel).
    """
    lw = ensemble.log_weights
    with np.errstate(divide="ignore"):
        logp = np.log(kernel.p)
    half_diff = 0.5 * (lw[:, None] - lw[None, :])
    cross = np.exp(logp + half_diff)
    col_ratio = np.exp(logsumexp(logp + 2.0 * half_diff, axis=0))
    # Non-stationary kernels can pump mass ratios of e^{hundreds} into rare
    # states; those show up only on this diagonal and would wreck the
    # eigensolve's absolute accuracy. Clipping shrinks the energy form, so
    # the returned constant can only grow (a conservative estimate); the
    # clipped directions are so expensive that the effect is ~1e-12 relative.
    col_ratio = np.minimum(col_ratio, 1e8)
    m = 0.5 * np.diag(1.0 + col_ratio) - 0.5 * (cross + cross.T)
    s = np.exp(0.5 * (lw - logsumexp(lw)))
    s /= np.linalg.norm(s)
    q = null_space(s[None, :])
    mq = q.T @ m @ q
    mq = 0.5 * (mq + mq.T)
    lam = eigvalsh(mq)
    lam_min = float(lam[0])
    if lam_min <= 1e-12:
        return float("inf")
    return 1.0 / lam_min


GLAUBER_CONDITIONAL = "conditional"


def _conditional_plus(model: BqdModel) -> np.ndarray:
    """(2^n, n) matrix of P(x_i = +1 | rest) for every state."""
    x = state_matrix(model.n)
    cache = x @ model.dense()
    return _sigmoid_arr(2.0 * (model.b[None, :] - model.beta * cache))


@dataclass
class DobrushinMatrix:
    c: np.ndarray

    def inf_norm(self) -> float:
        return float(self.c.sum(axis=1).max())


def dobrushin_matrix(model: BqdModel) -> DobrushinMatrix:
    """Brute-force conditional-sensitivity matrix.

    c[i][j] is the largest change in the conditional law of x_i when only
    x_j flips, maximized over all assignments of the remaining sites; for
    two-point conditionals this is just the difference of the +1 masses.
    """
    n = model.n
    if n > CAP_DOBRUSHIN:
        raise CapacityError(f"N={n} exceeds the Dobrushin cap {CAP_DOBRUSHIN}")
    cond = _conditional_plus(model)
    idx = np.arange(1 << n)
    c = np.zeros((n, n))
    for j in range(n):
        diff = np.abs(cond - cond[idx ^ (1 << j)])
        c[:, j] = diff.max(axis=0)
        c[j, j] = 0.0
    return DobrushinMatrix(c=c)


def kernel_coefficients(model: BqdModel, kind: SamplerKind) -> np.ndarray:
    """Kernel-level interdependence matrix for the single-site MH kernels.

    Entry (i, j) is the sup over states of the change in the local flip
    probability at site i when site j alone flips.
    """
    n = model.n
    if n > CAP_DOBRUSHIN:
        raise CapacityError(f"N={n} exceeds the Dobrushin cap {CAP_DOBRUSHIN}")
    d = _flip_deltas(model)
    if kind.tag == METROPOLIS:
        local = np.minimum(1.0, np.exp(np.minimum(d, 0.0)))
    elif kind.tag == GRADIENT_MH:
        local = _sigmoid_arr(0.5 * d) * np.minimum(1.0, np.exp(np.minimum(0.5 * d, 0.0)))
    else:
        raise ConfigError(f"kernel coefficients undefined for {kind.tag!r}")
    idx = np.arange(1 << n)
    c = np.zeros((n, n))
    for j in range(n):
        diff = np.abs(local - local[idx ^ (1 << j)])
        c[:, j] = diff.max(axis=0)
        c[j, j] = 0.0
    return c


def dula_column_coefficients(model: BqdModel) -> np.ndarray:
    """Per-column TV sensitivity of the undamped all-site proposal.

    c[j] is half the sup over states x of the L1 distance between the full
    factorized proposal laws from x and from x with site j flipped. The
    coordinate-j outcome marginals of the two laws coincide exactly, so
    only the cross-site couplings contribute.
    """
    n = model.n
    if n > CAP_KERNEL:
        raise CapacityError(f"N={n} exceeds the kernel cap {CAP_KERNEL}")
    k = np.exp(_dula_log_kernel(model, float("inf")))
    idx = np.arange(1 << n)
    c = np.zeros(n)
    for j in range(n):
        c[j] = 0.5 * np.abs(k - k[idx ^ (1 << j)]).sum(axis=1).max()
    return c


def dula_flip_product_gap(model: BqdModel) -> np.ndarray:
    """Per-column sup change of the all-site flip mass prod_i sigma(d_i/2).

    Diagnostic only: this single-outcome quantity is NOT dominated by the
    closed-form column bound (it saturates near 1 whenever a state can sit
    fully against a strong field), so it is reported but never asserted.
    """
    n = model.n
    if n > CAP_DOBRUSHIN:
        raise CapacityError(f"N={n} exceeds the Dobrushin cap {CAP_DOBRUSHIN}")
    log_flip = -np.logaddexp(0.0, -0.5 * _flip_deltas(model))
    flip_all = np.exp(log_flip.sum(axis=1))
    idx = np.arange(1 << n)
    c = np.zeros(n)
    for j in range(n):
        c[j] = np.abs(flip_all - flip_all[idx ^ (1 << j)]).max()
    return c


def theorem_bound(kind_tag: str, h_eff: float, beta: float, n: int) -> float:
    """Spectral-gap lower bound for each dynamic as a function of the field
    magnitude; may be nonpositive (caller checks before asserting)."""
    if h_eff < 0:
        raise ConfigError("field magnitude must be nonnegative")
    h = float(h_eff)
    if kind_tag == GLAUBER:
        return 1.0 - h / (math.exp(0.75 * h) + math.exp(-0.75 * h))
    if kind_tag == METROPOLIS:
        return 1.0 - 2.0 * h * math.exp(-h)
    if kind_tag == GRADIENT_MH:
        return 1.0 - h / (math.exp(0.25 * h) + math.exp(-0.25 * h)) ** 2
    if kind_tag == DULA:
        return 1.0 - 4.0 * h * n / (math.exp(0.25 * h) + math.exp(-0.25 * h)) ** 2
    raise ConfigError(f"no bound formula for kind {kind_tag!r}")


def check_condition_4_1(model: BqdModel):
    """Field-dominance check: min_i |b_i| >= 2 beta max_i sum_k |W_ik|."""
    h_eff = float(np.min(np.abs(model.b)))
    threshold = 2.0 * model.beta * model.max_offdiag_row_sum()
    return h_eff >= threshold, h_eff, threshold


def model_hash(model: BqdModel) -> str:
    h = hashlib.sha256()
    h.update(str(model.n).encode())
    h.update(np.round(np.asarray(model.b, dtype=float), 12).tobytes())
    h.update(np.round(model.dense(), 12).tobytes())
    h.update(repr(round(model.beta, 12)).encode())
    return h.hexdigest()[:12]


def verify_poincare(model: BqdModel, kind: SamplerKind) -> dict:
    """Compare the exact Poincare constant against 1/theorem_bound.

    Single-site dynamics are rescaled from the uniform-site kernel to the
    unit-rate sum-over-sites generator (divide C_P by N); the all-site
    factorized kernel is used as-is. Inapplicable models (condition fails or
    nonpositive bound) are reported without assertion.
    """
    ok, h_eff, threshold = check_condition_4_1(model)
    bound = theorem_bound(kind.tag, h_eff, model.beta, model.n)
    report = {
        "check": "poincare",
        "model_hash": model_hash(model),
        "kind": kind.tag,
        "h_eff": h_eff,
        "threshold": threshold,
        "bound": bound,
    }
    if not ok or bound <= 0:
        report["verdict"] = "inapplicable"
        return report
    ens = exact_distribution(model)
    if kind.tag == DULA:
        kernel = exact_kernel(model, SamplerKind(tag=DULA, step_size=float("inf")))
        cp_kernel = poincare_constant(kernel, ens)
        cp_generator = cp_kernel
    else:
        k = kind
        if kind.tag == GRADIENT_MH:
            k = SamplerKind(tag=GRADIENT_MH, site_selection=UNIFORM_SITE)
        kernel = exact_kernel(model, k)
        cp_kernel = poincare_constant(kernel, ens)
        cp_generator = cp_kernel / model.n
    inverse_bound = 1.0 / bound
    report.update(
        {
            "exact_cp": cp_generator,
            "exact_cp_kernel": cp_kernel,
            "inverse_bound": inverse_bound,
            "margin": inverse_bound - cp_generator,
            "verdict": "ok" if cp_generator <= inverse_bound + 1e-9 else "violation",
        }
    )
    return report


def verify_dobrushin_chain(model: BqdModel, kind: SamplerKind) -> dict:
    """Check brute-force interdependence coefficients against the per-kind
    entrywise and column closed-form bounds (valid under the field-dominance
    condition). Tolerance 1e-9."""
    ok, h_eff, threshold = check_condition_4_1(model)
    report = {
        "check": "dobrushin",
        "model_hash": model_hash(model),
        "kind": kind.tag,
        "h_eff": h_eff,
        "threshold": threshold,
    }
    if not ok:
        report["verdict"] = "inapplicable"
        return report
    h = h_eff
    w_abs = np.abs(model.dense())
    tol = 1e-9
    if kind.tag == GLAUBER:
        den = math.exp(0.75 * h) + math.exp(-0.75 * h)
        c = dobrushin_matrix(model).c
        entry_bound = 2.0 * model.beta * w_abs / den
        col_bound = h / den
    elif kind.tag == METROPOLIS:
        c = kernel_coefficients(model, kind)
        entry_bound = 4.0 * model.beta * w_abs * math.exp(-h)
        col_bound = 2.0 * h * math.exp(-h)
    elif kind.tag == GRADIENT_MH:
        den_sq = (math.exp(0.25 * h) + math.exp(-0.25 * h)) ** 2
        c = kernel_coefficients(model, SamplerKind(tag=GRADIENT_MH, site_selection=UNIFORM_SITE))
        entry_bound = 2.0 * model.beta * w_abs / den_sq
        col_bound = h / den_sq
    elif kind.tag == DULA:
        den_sq = (math.exp(0.25 * h) + math.exp(-0.25 * h)) ** 2
        col = dula_column_coefficients(model)
        per_col_bound = 4.0 * h / den_sq
        norm_bound = 4.0 * h * model.n / den_sq
        entry_violation = float((col - per_col_bound).max())
        norm_violation = float(col.sum() - norm_bound)
        report.update(
            {
                "max_coefficient": float(col.max()),
                "per_col_bound": per_col_bound,
                "inf_norm": float(col.sum()),
                "inf_norm_bound": norm_bound,
                "flip_product_gap": float(dula_flip_product_gap(model).max()),
                "verdict": "ok"
                if entry_violation <= tol and norm_violation <= tol
                else "violation",
            }
        )
        return report
    else:
        raise ConfigError(f"no interdependence bounds for {kind.tag!r}")

    entry_violation = float((c - entry_bound).max())
    inf_norm = float(c.sum(axis=1).max())
    report.update(
        {
            "max_entry_violation": entry_violation,
            "inf_norm": inf_norm,
            "inf_norm_bound": col_bound,
            "verdict": "ok"
            if entry_violation <= tol and inf_norm <= col_bound + tol
            else "violation",
        }
    )
    return report


def theorem31_tail(zeta: float, t: float, schedule: AlphaSchedule, sigma: float) -> float:
    """Exact per-coordinate P(|Y_t| >= zeta) of the observation process for
    a +1 signal: Y_t = alpha(t) + sigma sqrt(t) Z with Z standard normal."""
    if t <= 0:
        raise ConfigError("time must be positive")
    if zeta <= 0:
        return 1.0
    a = alpha_of(schedule, t)
    s = sigma * math.sqrt(t)

    def phi(z):
        return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))

    return 1.0 - (phi((zeta - a) / s) - phi((-zeta - a) / s))


def tail_mc_check(points, draws: int, seed) -> list:
    """Monte Carlo audit of the closed-form observation-process tail.

    Each point is (zeta, t, schedule, sigma); draws samples of
    Y_t = alpha(t) + sigma sqrt(t) Z are compared against the closed form,
    reporting the z-score of the empirical frequency.
    """
    rng = np.random.default_rng(seed)
    out = []
    for zeta, t, schedule, sigma in points:
        exact = theorem31_tail(zeta, t, schedule, sigma)
        y = alpha_of(schedule, t) + sigma * math.sqrt(t) * rng.standard_normal(draws)
        freq = float(np.mean(np.abs(y) >= zeta))
        stderr = math.sqrt(max(exact * (1.0 - exact), 1e-30) / draws)
        out.append(
            {
                "zeta": zeta,
                "t": t,
                "sigma": sigma,
                "exact": exact,
                "mc": freq,
                "stderr": stderr,
                "z": (freq - exact) / stderr if stderr > 0 else 0.0,
            }
        )
    return out


def tail_monotone_check(schedule: AlphaSchedule, grid, zeta: float, sigma: float) -> bool:
    """True iff the closed-form tail probability is strictly increasing in t
    along the last half of the grid."""
    times = [float(t) for t in grid]
    tail = [theorem31_tail(zeta, t, schedule, sigma) for t in times if t > 0]
    half = tail[len(tail) // 2 :]
    return all(b > a for a, b in zip(half, half[1:]))


def chernoff_decay_probe(
    post: BqdModel,
    kind: SamplerKind,
    n_grid,
    replicas: int,
    seed,
) -> float:
    """Fitted log-log slope of the posterior-mean RMS error versus the
    number of MCMC samples averaged.

    Each replica runs one chain of length max(n_grid) (after a short
    burn-in) and the n-sample prefix means are compared against the exact
    mean from full enumeration. Glauber replicas are advanced in lockstep
    as a vectorized ensemble; other kinds fall back to per-chain loops.
    """
    n_grid = sorted(int(v) for v in n_grid)
    if replicas < 2:
        raise ConfigError("need at least 2 replicas for a slope fit")
    if len(n_grid) < 2:
        raise ConfigError("need at least 2 grid points for a slope fit")
    exact_mean = exact_distribution(post).mean()
    rng = np.random.default_rng(seed)
    total = n_grid[-1]
    burn = max(64, post.n * 8)
    n_sites = post.n

    sums = np.zeros((replicas, n_sites))
    rms = []
    if kind.tag == GLAUBER:
        w_dense = post.dense()
        spins = np.where(rng.random((replicas, n_sites)) < 0.5, -1.0, 1.0)
        cache = spins @ w_dense
        rows = np.arange(replicas)
        grid_pos = 0
        for step in range(burn + total):
            sites = rng.integers(0, n_sites, size=replicas)
            local = post.b[sites] - post.beta * cache[rows, sites]
            p_plus = 1.0 / (1.0 + np.exp(-2.0 * local))
            new = np.where(rng.random(replicas) < p_plus, 1.0, -1.0)
            diff = new - spins[rows, sites]
            changed = diff != 0.0
            if np.any(changed):
                spins[rows[changed], sites[changed]] = new[changed]
                cache[changed] += diff[changed, None] * w_dense[sites[changed], :]
            if step >= burn:
                sums += spins
                k = step - burn + 1
                if grid_pos < len(n_grid) and k == n_grid[grid_pos]:
                    err = sums / k - exact_mean[None, :]
                    rms.append(math.sqrt(float(np.mean(err**2))))
                    grid_pos += 1
    else:
        errs = np.zeros((replicas, len(n_grid), n_sites))
        for r in range(replicas):
            chain = Chain.start(post, kind, rng)
            for _ in range(burn):
                chain.step(post)
            acc = np.zeros(n_sites)
            grid_pos = 0
            for k in range(1, total + 1):
                chain.step(post)
                acc += chain.state.spins
                if grid_pos < len(n_grid) and k == n_grid[grid_pos]:
                    errs[r, grid_pos] = acc / k - exact_mean
                    grid_pos += 1
        rms = [math.sqrt(float(np.mean(errs[:, g] ** 2))) for g in range(len(n_grid))]

    slope = float(np.polyfit(np.log(np.array(n_grid, dtype=float)), np.log(rms), 1)[0])
    return slope


def min_admissible_field(n: int) -> float:
    """Smallest field magnitude making every gap lower bound positive.

    The all-site bound is the binding one; solved by bisection on the
    region where the bounds are increasing in h.
    """
    kinds = (GLAUBER, METROPOLIS, GRADIENT_MH, DULA)

    def all_positive(h):
        return all(theorem_bound(k, h, 1.0, n) > 0 for k in kinds)

    lo, hi = 1e-6, 200.0
    if not all_positive(hi):
        raise ConfigError("no admissible field found below the search cap")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if all_positive(mid):
            hi = mid
        else:
            lo = mid
    return hi


def gen_admissible_model(
    n: int,
    seed,
    beta: float = 0.3,
    edge_prob: float = 0.5,
    margin: float = 1.1,
    require_all_bounds: bool = True,
) -> BqdModel:
    """Seeded random model satisfying the field-dominance condition.

    With require_all_bounds, the field is also raised until every gap lower
    bound is strictly positive (the all-site bound is binding, pushing the
    field magnitude above ~10); without it the field sits just above the
    dominance threshold, leaving the mean unsaturated.
    """
    rng = np.random.default_rng(seed)
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                w[i, j] = w[j, i] = rng.uniform(0.5, 1.5) * (1 if rng.random() < 0.5 else -1)
    base_model = BqdModel.from_dense(w, np.zeros(n), beta)
    threshold = 2.0 * beta * base_model.max_offdiag_row_sum()
    base = margin * threshold
    if require_all_bounds:
        base = margin * max(threshold, min_admissible_field(n))
    signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    b = signs * base * (1.0 + 0.3 * rng.random(n))
    return BqdModel.from_dense(w, b, beta)


def run_verification_suite(
    n_models: int = 50,
    seed: int = 0,
    n_range=(4, 8),
) -> list:
    """Poincare and interdependence checks over seeded admissible models for
    all four dynamics; returns the flat list of reports."""
    reports = []
    kinds = (
        SamplerKind(tag=GLAUBER),
        SamplerKind(tag=METROPOLIS),
        SamplerKind(tag=GRADIENT_MH, site_selection=UNIFORM_SITE),
        SamplerKind(tag=DULA, step_size=float("inf")),
    )
    lo, hi = n_range
    for m in range(n_models):
        n = lo + m % (hi - lo + 1)
        model = gen_admissible_model(n, seed=(seed, m))
        for kind in kinds:
            reports.append(verify_poincare(model, kind))
            reports.append(verify_dobrushin_chain(model, kind))
    return reports


def write_reports(reports, path) -> None:
    with open(path, "w") as fh:
        for rep in reports:
            fh.write(json.dumps(rep) + "\n")


def suite_violations(reports) -> list:
    return [r for r in reports if r.get("verdict") == "violation"]
