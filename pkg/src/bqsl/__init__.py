"""Sampling toolkit for binary quadratic distributions on the hypercube."""

from .model import (
    BqdModel,
    ConfigError,
    SpinState,
    apply_flip,
    flip_delta,
    load_model,
    log_density_unnormalized,
    save_model,
)
from .samplers import Chain, SamplerKind, gwg, pas
from .sl import AlphaSchedule, SlConfig, SlTrace, allocate_steps, sl_run

__all__ = [
    "BqdModel",
    "ConfigError",
    "SpinState",
    "apply_flip",
    "flip_delta",
    "load_model",
    "log_density_unnormalized",
    "save_model",
    "Chain",
    "SamplerKind",
    "gwg",
    "pas",
    "AlphaSchedule",
    "SlConfig",
    "SlTrace",
    "allocate_steps",
    "sl_run",
]
