"""Combinatorial multi-armed bandits with probabilistically triggered arms."""

from ._core import (
    ConfigError,
    bounds,
    classical_bound,
    ic_spread,
    riemann_zeta,
    rng_algorithm,
    run,
    sampling_threshold,
    theorem2_bound,
    ucb_adjust,
    validate,
)

__all__ = [
    "ConfigError",
    "bounds",
    "classical_bound",
    "ic_spread",
    "riemann_zeta",
    "rng_algorithm",
    "run",
    "sampling_threshold",
    "theorem2_bound",
    "ucb_adjust",
    "validate",
]
