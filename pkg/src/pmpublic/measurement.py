"""Projective measurement of PM observables: sampling, Lueders update, sequential expectations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .pm_scenario import PMObservable
from .qalgebra import hermitize

ZERO_PROB_CUTOFF = 1e-12

#: Anything mapping a density matrix to a density matrix, e.g. a ``Channel``.
StateMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MeasurementOutcome:
    value: int
    post_state: np.ndarray = field(repr=False)
    probability: float


def _born(rho: np.ndarray, proj: np.ndarray) -> float:
    return float(np.real(np.trace(proj @ rho)))


def outcome_distribution(rho: np.ndarray, obs: PMObservable) -> tuple[float, float]:
    p_plus = min(max(_born(rho, obs.proj_plus), 0.0), 1.0)
    return p_plus, 1.0 - p_plus


def lueders_update(rho: np.ndarray, obs: PMObservable, outcome: int) -> np.ndarray:
    """Post-measurement state ``P rho P / tr(P rho P)`` for the outcome's projector."""
    proj = obs.projector(outcome)
    unnorm = proj @ rho @ proj
    p = float(np.real(np.trace(unnorm)))
    if p < ZERO_PROB_CUTOFF:
        raise ValueError(
            f"outcome {outcome:+d} of {obs.label} has probability {p:.3g}; cannot condition on it"
        )
    return hermitize(unnorm / p)


def measure_sample(rho: np.ndarray, obs: PMObservable, rng) -> MeasurementOutcome:
    """Sample an outcome and collapse the state. ``rng`` only needs a ``random()`` method."""
    p_plus, p_minus = outcome_distribution(rho, obs)
    value = 1 if rng.random() < p_plus else -1
    prob = p_plus if value == 1 else p_minus
    if prob < ZERO_PROB_CUTOFF:
        # only reachable through round-off at p ~ 0 or 1
        value, prob = -value, 1.0 - prob
    return MeasurementOutcome(value, lueders_update(rho, obs, value), prob)


def branch_distribution(
    rho: np.ndarray,
    obs_list: Sequence[PMObservable],
    between: StateMap | None = None,
) -> list[tuple[tuple[int, ...], float]]:
    """All outcome sequences with their probabilities.

    ``between`` is applied to the post-measurement state between consecutive
    measurements. Branches below the zero-probability cutoff are dropped.
    """
    if not 1 <= len(obs_list) <= 3:
        raise ValueError(f"expected 1 to 3 observables, got {len(obs_list)}")
    out = []

    def walk(state, k, prefix, prob):
        if k == len(obs_list):
            out.append((prefix, prob))
            return
        if k > 0 and between is not None:
            state = between(state)
        obs = obs_list[k]
        for value, p in zip((1, -1), outcome_distribution(state, obs)):
            if p < ZERO_PROB_CUTOFF:
                continue
            walk(lueders_update(state, obs, value), k + 1, prefix + (value,), prob * p)

    walk(np.asarray(rho, dtype=complex), 0, (), 1.0)
    return out


def sequential_expectation(
    rho: np.ndarray,
    obs_list: Sequence[PMObservable],
    between: StateMap | None = None,
) -> float:
    """Exact mean of the product of outcomes of a measurement sequence."""
    return sum(np.prod(values) * p for values, p in branch_distribution(rho, obs_list, between))


def outcome_table(
    rho: np.ndarray,
    obs_list: Sequence[PMObservable],
    between: StateMap | None = None,
) -> np.ndarray:
    """Probabilities of all ``2**k`` outcome strings (``+1`` first), unnormalized propagation.

    Unlike :func:`branch_distribution` no branch is dropped, which makes the
    table suitable for comparing two ``between`` maps entry by entry.
    """
    probs = []
    for values in itertools.product((1, -1), repeat=len(obs_list)):
        x = np.asarray(rho, dtype=complex)
        for k, (obs, v) in enumerate(zip(obs_list, values)):
            if k > 0 and between is not None:
                x = between(x)
            proj = obs.projector(v)
            x = proj @ x @ proj
        probs.append(float(np.real(np.trace(x))))
    return np.array(probs)
