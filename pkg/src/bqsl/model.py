"""Binary quadratic distributions on the hypercube {-1,+1}^N.

The target family is nu(x) proportional to exp(-beta/2 <x, W x> + <x, b>)
with W symmetric, zero diagonal. W is stored as sparse adjacency rows so a
single spin flip costs O(deg).
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass

import numpy as np


class ConfigError(ValueError):
    """Inconsistent model/state configuration."""


@dataclass(frozen=True)
class BqdModel:
    """Immutable triple (W, b, beta) plus sparse adjacency of W.

    ``rows[i]`` holds the sorted neighbor indices of site i and ``vals[i]``
    the matching coupling weights. The diagonal of W is always zero
    (it only shifts the log-density by a constant on the hypercube).
    """

    n: int
    beta: float
    b: np.ndarray
    rows: tuple
    vals: tuple

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.n}")
        if self.beta < 0:
            raise ConfigError(f"beta must be >= 0, got {self.beta}")
        if self.b.shape != (self.n,):
            raise ConfigError(f"field length {self.b.shape} != ({self.n},)")

    @classmethod
    def from_dense(cls, w, b, beta: float) -> "BqdModel":
        """Build from a dense coupling matrix.

        Asymmetric input is symmetrized as (W + W^T)/2 with a warning; the
        diagonal is stripped.
        """
        w = np.asarray(w, dtype=float)
        n = w.shape[0]
        if w.shape != (n, n):
            raise ConfigError(f"coupling matrix must be square, got {w.shape}")
        if not np.allclose(w, w.T, atol=1e-12, rtol=0.0):
            warnings.warn("asymmetric coupling matrix symmetrized as (W + W^T)/2")
            w = 0.5 * (w + w.T)
        w = w.copy()
        np.fill_diagonal(w, 0.0)
        rows = []
        vals = []
        for i in range(n):
            nz = np.nonzero(w[i])[0]
            rows.append(nz.astype(np.int64))
            vals.append(w[i, nz].copy())
        b = np.asarray(b, dtype=float)
        if b.size != n:
            raise ConfigError(f"field length {b.size} != {n}")
        b = b.reshape(n).copy()
        b.setflags(write=False)
        return cls(n=n, beta=float(beta), b=b, rows=tuple(rows), vals=tuple(vals))

    @classmethod
    def from_edges(cls, n: int, edges, b, beta: float) -> "BqdModel":
        """Build from (i, j, w_ij) triples; duplicate pairs accumulate."""
        w = np.zeros((n, n))
        for i, j, wij in edges:
            w[i, j] += wij
            w[j, i] += wij
        return cls.from_dense(w, b, beta)

    def dense(self) -> np.ndarray:
        """Dense symmetric coupling matrix (small-N fallback)."""
        w = np.zeros((self.n, self.n))
        for i in range(self.n):
            w[i, self.rows[i]] = self.vals[i]
        return w

    def with_field(self, b) -> "BqdModel":
        b = np.asarray(b, dtype=float).reshape(self.n).copy()
        b.setflags(write=False)
        return dataclasses.replace(self, b=b)

    def with_beta(self, beta: float) -> "BqdModel":
        return dataclasses.replace(self, beta=float(beta))

    def max_offdiag_row_sum(self) -> float:
        """max_i sum_{k != i} |W_ik|, the Condition-4.1 row norm."""
        return max((float(np.abs(v).sum()) for v in self.vals), default=0.0)


@dataclass
class SpinState:
    """A configuration in {-1,+1}^N with cached interaction vector W x.

    ``cache[i] == sum_j W_ij spins[j]`` is maintained through every flip.
    The state is exclusively owned by one chain.
    """

    spins: np.ndarray
    cache: np.ndarray

    @classmethod
    def from_spins(cls, model: BqdModel, spins) -> "SpinState":
        spins = np.asarray(spins, dtype=np.int8).reshape(model.n).copy()
        if not np.all(np.abs(spins) == 1):
            raise ConfigError("spins must be +/-1")
        cache = np.zeros(model.n)
        for i in range(model.n):
            cache[i] = float(model.vals[i] @ spins[model.rows[i]])
        return cls(spins=spins, cache=cache)

    @classmethod
    def random(cls, model: BqdModel, rng: np.random.Generator) -> "SpinState":
        spins = np.where(rng.random(model.n) < 0.5, -1, 1).astype(np.int8)
        return cls.from_spins(model, spins)

    def copy(self) -> "SpinState":
        return SpinState(spins=self.spins.copy(), cache=self.cache.copy())


def _check_dims(model: BqdModel, state: SpinState) -> None:
    if state.spins.shape != (model.n,):
        raise ConfigError(
            f"state dimension {state.spins.shape[0]} != model dimension {model.n}"
        )


def log_density_unnormalized(model: BqdModel, state: SpinState) -> float:
    """log of the unnormalized mass: -(beta/2) <x, Wx> + <b, x>."""
    _check_dims(model, state)
    x = state.spins
    return float(-0.5 * model.beta * (x @ state.cache) + model.b @ x)


def pseudo_gradient(model: BqdModel, state: SpinState) -> np.ndarray:
    """Gradient of the log-density read from the cache: -beta W x + b."""
    _check_dims(model, state)
    return -model.beta * state.cache + model.b


def flip_delta(model: BqdModel, state: SpinState, i: int) -> float:
    """Log-density change from flipping site i, in O(1).

    Equals 2*beta*x_i*(Wx)_i - 2*b_i*x_i; exact because the diagonal of W
    is zero.
    """
    if not 0 <= i < model.n:
        raise IndexError(f"site index {i} out of range [0, {model.n})")
    xi = float(state.spins[i])
    return 2.0 * model.beta * xi * state.cache[i] - 2.0 * model.b[i] * xi


def flip_delta_all(model: BqdModel, state: SpinState) -> np.ndarray:
    """Vector of flip_delta(i) for every site, in O(N)."""
    x = state.spins.astype(float)
    return 2.0 * model.beta * x * state.cache - 2.0 * model.b * x


def apply_flip(model: BqdModel, state: SpinState, i: int) -> None:
    """Negate spins[i] and repair the cache over the sparse column, O(deg)."""
    if not 0 <= i < model.n:
        raise IndexError(f"site index {i} out of range [0, {model.n})")
    old = state.spins[i]
    state.spins[i] = -old
    state.cache[model.rows[i]] += -2.0 * float(old) * model.vals[i]


def apply_flips(model: BqdModel, state: SpinState, sites) -> None:
    """Apply a batch of simultaneous flips (used by the factorized kernels)."""
    for i in sites:
        apply_flip(model, state, int(i))


def save_model(model: BqdModel, path) -> None:
    """Write the text model format: N / beta / field line / edge lines."""
    w = model.dense()
    with open(path, "w") as fh:
        fh.write(f"{model.n}\n")
        fh.write(f"{model.beta!r}\n")
        fh.write("b " + " ".join(repr(float(v)) for v in model.b) + "\n")
        for i in range(model.n):
            for j in model.rows[i]:
                if j > i:
                    fh.write(f"{i} {j} {float(w[i, j])!r}\n")


def load_model(path) -> BqdModel:
    """Read the text model format; symmetrizes and strips the diagonal."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    try:
        n = int(lines[0])
        beta = float(lines[1])
        field_parts = lines[2].split()
        if field_parts[0] != "b":
            raise ValueError("expected field line starting with 'b'")
        b = np.array([float(v) for v in field_parts[1:]])
        edges = []
        for ln in lines[3:]:
            i_s, j_s, w_s = ln.split()
            edges.append((int(i_s), int(j_s), float(w_s)))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"malformed model file {path}: {exc}") from exc
    if len(b) != n:
        raise ConfigError(f"field length {len(b)} != {n} in {path}")
    return BqdModel.from_edges(n, edges, b, beta)
