"""Monte Carlo estimation, exact oracles, sweeps and the command line."""

from .estimate import RunConfig, SigmaEstimate, StateSpec, closed_form_sigma, estimate_sigma
from .exact import EnumerationTooLarge, exact_sigma
from .experiments import channel_checks, invariance_experiments, sweep_passersby

__all__ = [
    "EnumerationTooLarge",
    "RunConfig",
    "SigmaEstimate",
    "StateSpec",
    "channel_checks",
    "closed_form_sigma",
    "estimate_sigma",
    "exact_sigma",
    "invariance_experiments",
    "sweep_passersby",
]
