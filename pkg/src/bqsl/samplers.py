"""Discrete MCMC kernels for binary quadratic distributions.

Four kernels: Glauber dynamics (heat bath), the classical single-site
Metropolis chain, single-site gradient-informed MH (softmax-over-sites or
uniform-site proposal), and the factorized all-site gradient proposal
without (DULA) or with (DMALA) MH adjustment.

Every kernel consumes random draws in a fixed documented order so that runs
with the same seed are bit-reproducible:

* glauber:      1 uniform for the site, 1 uniform for the conditional.
* metropolis:   1 uniform for the site, 1 uniform for the accept decision.
* gradient-mh:  1 uniform for the site (inverse-CDF on the proposal
                weights), 1 uniform for the accept decision.
* dula:         N uniforms, one per site.
* dmala:        N uniforms for the proposal, 1 uniform for the accept.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    BqdModel,
    SpinState,
    apply_flip,
    apply_flips,
    flip_delta,
    flip_delta_all,
    log_density_unnormalized,
)

TARGET_ACCEPTANCE = 0.574
ADAPT_INTERVAL = 100
ADAPT_RATE = 0.1

GLAUBER = "glauber"
METROPOLIS = "metropolis"
GRADIENT_MH = "gradient-mh"
DULA = "dula"
DMALA = "dmala"

SOFTMAX_SITES = "softmax"
UNIFORM_SITE = "uniform"


@dataclass(frozen=True)
class SamplerKind:
    """Which kernel to run and its knobs.

    ``balancing`` is the local balancing function; only sqrt is supported
    (it is what turns density ratios into half log-differences).
    ``site_selection`` only matters for gradient-mh. ``step_size`` is the
    DULA/DMALA damping scale and is ignored by the other kernels.
    """

    tag: str
    site_selection: str = SOFTMAX_SITES
    step_size: float = 0.2
    balancing: str = "sqrt"

    def __post_init__(self):
        if self.tag not in (GLAUBER, METROPOLIS, GRADIENT_MH, DULA, DMALA):
            raise ValueError(f"unknown sampler kind {self.tag!r}")
        if self.site_selection not in (SOFTMAX_SITES, UNIFORM_SITE):
            raise ValueError(f"unknown site selection {self.site_selection!r}")
        if self.tag in (DULA, DMALA) and self.step_size <= 0:
            raise ValueError("step_size must be positive for dula/dmala")
        if self.balancing != "sqrt":
            raise ValueError("only the sqrt balancing function is supported")


# GWG and PAS coincide at single-site updates with sqrt balancing; both names
# map to the same softmax-over-sites gradient-informed kernel.
def gwg() -> SamplerKind:
    return SamplerKind(tag=GRADIENT_MH, site_selection=SOFTMAX_SITES)


def pas() -> SamplerKind:
    return SamplerKind(tag=GRADIENT_MH, site_selection=SOFTMAX_SITES)


@dataclass
class ChainStats:
    steps: int = 0
    accepted: int = 0
    last_adapt_step: int = 0
    window_steps: int = 0
    window_accepted: int = 0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.steps if self.steps else 0.0

    def record(self, accepted: bool) -> None:
        self.steps += 1
        self.window_steps += 1
        if accepted:
            self.accepted += 1
            self.window_accepted += 1


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


def step_glauber(model: BqdModel, state: SpinState, rng: np.random.Generator) -> None:
    """Heat-bath update: uniform site, resample from the exact conditional."""
    i = int(rng.random() * model.n)
    # conditional does not involve spins[i] because diag(W) == 0
    p_plus = _sigmoid(2.0 * (model.b[i] - model.beta * state.cache[i]))
    new = 1 if rng.random() < p_plus else -1
    if new != state.spins[i]:
        apply_flip(model, state, i)


def step_metropolis(model: BqdModel, state: SpinState, rng: np.random.Generator) -> bool:
    """Uniform site, accept the flip with min(1, exp(flip_delta))."""
    i = int(rng.random() * model.n)
    d = flip_delta(model, state, i)
    if d >= 0 or rng.random() < np.exp(d):
        apply_flip(model, state, i)
        return True
    return False


def proposal_weights(model: BqdModel, state: SpinState) -> np.ndarray:
    """Unnormalized per-site proposal weights exp(flip_delta / 2).

    This is the sqrt local balancing function applied to the per-site
    density ratios; softmax over these weights is the GWG site law.
    """
    return np.exp(0.5 * flip_delta_all(model, state))


def pas_site_weights(model: BqdModel, state: SpinState) -> np.ndarray:
    """Path-auxiliary weights g(nu(x^i)/nu(x)) with g = sqrt, written via
    the gradient inner product; coincides with proposal_weights because the
    log-density is exactly linear in each coordinate."""
    from .model import pseudo_gradient

    grad = pseudo_gradient(model, state)
    return np.sqrt(np.exp(-2.0 * state.spins * grad))


def step_gradient_mh(
    model: BqdModel,
    state: SpinState,
    kind: SamplerKind,
    rng: np.random.Generator,
) -> bool:
    """Single-site gradient-informed MH step.

    softmax: site drawn from Softmax(flip_delta/2); the acceptance ratio
    collapses to Z(x)/Z(x') where Z is the softmax normalizer.
    uniform: site drawn uniformly; proposal is the two-point law
    exp(d/2)/(1 + exp(d/2)), accepted with the usual MH ratio.
    """
    if kind.site_selection == SOFTMAX_SITES:
        half = 0.5 * flip_delta_all(model, state)
        shift = half.max()
        w = np.exp(half - shift)
        cum = np.cumsum(w)
        z = cum[-1]
        i = int(np.searchsorted(cum, rng.random() * z, side="right"))
        i = min(i, model.n - 1)
        log_z = shift + np.log(z)
        apply_flip(model, state, i)
        half_new = 0.5 * flip_delta_all(model, state)
        shift_new = half_new.max()
        log_z_new = shift_new + np.log(np.exp(half_new - shift_new).sum())
        log_acc = log_z - log_z_new
        if log_acc >= 0 or rng.random() < np.exp(log_acc):
            return True
        apply_flip(model, state, i)
        return False

    if kind.site_selection == UNIFORM_SITE:
        i = int(rng.random() * model.n)
        d = flip_delta(model, state, i)
        # forward proposal sigma(d/2); reverse proposal sigma(-d/2)
        log_fwd = -np.log1p(np.exp(-0.5 * d)) if d >= 0 else 0.5 * d - np.log1p(np.exp(0.5 * d))
        log_rev = -np.log1p(np.exp(0.5 * d)) if d <= 0 else -0.5 * d - np.log1p(np.exp(-0.5 * d))
        log_acc = d + log_rev - log_fwd
        if log_acc >= 0 or rng.random() < np.exp(log_acc):
            apply_flip(model, state, i)
            return True
        return False

    raise ValueError(f"unknown site selection {kind.site_selection!r}")


def dula_flip_probs(model: BqdModel, state: SpinState, step_size: float) -> np.ndarray:
    """Per-site flip probabilities of the factorized proposal.

    Two-point softmax over {keep, flip} with logits (0, d/2 - 2/alpha);
    at alpha = inf the damping vanishes and the proposal is the pure
    factorized gradient law.
    """
    damping = 0.0 if np.isinf(step_size) else 2.0 / step_size
    z = 0.5 * flip_delta_all(model, state) - damping
    out = np.empty(model.n)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def step_dula(
    model: BqdModel,
    state: SpinState,
    kind: SamplerKind,
    rng: np.random.Generator,
):
    """Sample the factorized proposal and apply all flips simultaneously.

    Returns (flipped_sites, flip_probs); the state is mutated into the
    proposal. No MH correction, so the chain is biased by construction.
    """
    probs = dula_flip_probs(model, state, kind.step_size)
    u = rng.random(model.n)
    flipped = np.nonzero(u < probs)[0]
    apply_flips(model, state, flipped)
    return flipped, probs


def step_dmala(
    model: BqdModel,
    state: SpinState,
    kind: SamplerKind,
    rng: np.random.Generator,
) -> bool:
    """DULA proposal followed by the MH adjustment."""
    probs = dula_flip_probs(model, state, kind.step_size)
    u = rng.random(model.n)
    mask = u < probs
    flipped = np.nonzero(mask)[0]
    if flipped.size == 0:
        return True  # proposal equals the current state, ratio 1
    with np.errstate(divide="ignore"):
        log_fwd = float(
            np.log(probs[mask]).sum() + np.log1p(-probs[~mask]).sum()
        )
    ell_old = log_density_unnormalized(model, state)
    apply_flips(model, state, flipped)
    probs_rev = dula_flip_probs(model, state, kind.step_size)
    with np.errstate(divide="ignore"):
        log_rev = float(
            np.log(probs_rev[mask]).sum() + np.log1p(-probs_rev[~mask]).sum()
        )
    ell_new = log_density_unnormalized(model, state)
    log_acc = (ell_new - ell_old) + log_rev - log_fwd
    if log_acc >= 0 or rng.random() < np.exp(log_acc):
        return True
    apply_flips(model, state, flipped)
    return False


def adapt_step_size(step_size: float, stats: ChainStats) -> float:
    """Multiplicative adaptation toward the 0.574 target acceptance rate.

    Resets the acceptance window.
    """
    if stats.window_steps == 0:
        return step_size
    rate = stats.window_accepted / stats.window_steps
    new = step_size * float(np.exp(ADAPT_RATE * (rate - TARGET_ACCEPTANCE)))
    stats.window_steps = 0
    stats.window_accepted = 0
    stats.last_adapt_step = stats.steps
    return new


@dataclass
class Chain:
    """Single-owner bundle of state + rng + stats for one MCMC chain.

    DMALA chains adapt their step size every ADAPT_INTERVAL steps.
    """

    state: SpinState
    kind: SamplerKind
    rng: np.random.Generator
    stats: ChainStats = field(default_factory=ChainStats)
    step_size: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.step_size is None:
            self.step_size = self.kind.step_size

    @classmethod
    def start(cls, model: BqdModel, kind: SamplerKind, seed) -> "Chain":
        rng = np.random.default_rng(seed)
        state = SpinState.random(model, rng)
        return cls(state=state, kind=kind, rng=rng)

    def step(self, model: BqdModel) -> None:
        tag = self.kind.tag
        if tag == GLAUBER:
            step_glauber(model, self.state, self.rng)
            self.stats.record(True)
        elif tag == METROPOLIS:
            self.stats.record(step_metropolis(model, self.state, self.rng))
        elif tag == GRADIENT_MH:
            self.stats.record(step_gradient_mh(model, self.state, self.kind, self.rng))
        elif tag == DULA:
            step_dula(model, self.state, self._with_step_size(), self.rng)
            self.stats.record(True)
        elif tag == DMALA:
            self.stats.record(
                step_dmala(model, self.state, self._with_step_size(), self.rng)
            )
            if self.stats.window_steps >= ADAPT_INTERVAL:
                self.step_size = adapt_step_size(self.step_size, self.stats)
        else:  # pragma: no cover
            raise ValueError(tag)

    def _with_step_size(self) -> SamplerKind:
        if self.step_size == self.kind.step_size:
            return self.kind
        return SamplerKind(
            tag=self.kind.tag,
            site_selection=self.kind.site_selection,
            step_size=self.step_size,
        )
