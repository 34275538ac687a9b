"""Rounds on the shared system: one Main Observer plus ``N`` passersby taking turns.

Randomness is consumed from any object with a ``random()`` method returning a float in
[0, 1). The draw order is fixed and mirrored by the batched engine in
:mod:`pmpublic.harness.engine`:

1. ``N`` draws: Fisher-Yates shuffle of the access order ``[0, 1, ..., N]``;
2. one draw for the Main context, one for its measurement order;
3. three draws per passerby for their picks;
4. one draw per measurement in :func:`run_round`.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .measurement import lueders_update, measure_sample
from .pm_scenario import CONTEXT_IDS, PMIndex, context, observable

MAIN = 0
#: The six orderings of a context, in ``itertools.permutations`` order.
ORDERINGS = tuple(itertools.permutations(range(3)))


class SamplingMode(str, enum.Enum):
    REPLACE = "replace"  # every passerby slot uniform over the nine observables
    DISTINCT = "distinct"  # each passerby picks three different observables

    @classmethod
    def parse(cls, value) -> SamplingMode:
        if isinstance(value, cls):
            return value
        aliases = {"withreplacement": "replace", "distincttriple": "distinct"}
        v = str(value).lower()
        return cls(aliases.get(v, v))


@dataclass(frozen=True)
class ObserverRole:
    kind: str  # "main" or "passerby"
    id: int

    @classmethod
    def of(cls, observer_id: int) -> ObserverRole:
        return cls("main" if observer_id == MAIN else "passerby", observer_id)


@dataclass(frozen=True)
class RoundPlan:
    access_order: tuple[int, ...]
    main_context: str
    main_order: tuple[PMIndex, PMIndex, PMIndex]
    passerby_picks: tuple[tuple[PMIndex, PMIndex, PMIndex], ...]
    sampling_mode: SamplingMode = SamplingMode.REPLACE

    def __post_init__(self):
        n = len(self.passerby_picks)
        if sorted(self.access_order) != list(range(n + 1)):
            raise ValueError(f"access order {self.access_order} is not a permutation of 0..{n}")
        if sorted(self.main_order) != sorted(context(self.main_context).members):
            raise ValueError(f"main order {self.main_order} does not cover {self.main_context}")
        if self.sampling_mode is SamplingMode.DISTINCT:
            for p, picks in enumerate(self.passerby_picks, start=1):
                if len(set(picks)) != 3:
                    raise ValueError(f"passerby {p} repeats an observable in distinct mode")

    @property
    def n_passersby(self) -> int:
        return len(self.passerby_picks)

    def schedule(self) -> list[tuple[int, PMIndex]]:
        """Time-ordered ``(observer, observable)`` pairs: three round-robin cycles."""
        out = []
        for cycle in range(3):
            for who in self.access_order:
                idx = self.main_order[cycle] if who == MAIN else self.passerby_picks[who - 1][cycle]
                out.append((who, idx))
        return out


@dataclass(frozen=True)
class TraceEvent:
    observer: int
    index: PMIndex
    outcome: int


@dataclass(frozen=True)
class RoundTrace:
    events: tuple[TraceEvent, ...]
    main_product: int
    context: str
    states: tuple[np.ndarray, ...] | None = field(default=None, repr=False)

    def main_outcomes(self) -> list[int]:
        return [e.outcome for e in self.events if e.observer == MAIN]


def _integer(rng, n: int) -> int:
    return min(int(rng.random() * n), n - 1)


def _distinct_triple(rng) -> tuple[PMIndex, ...]:
    remaining = list(range(9))
    picks = []
    for size in (9, 8, 7):
        picks.append(remaining.pop(_integer(rng, size)))
    return tuple(PMIndex.from_flat(k) for k in picks)


def plan_round(n_passersby: int, rng, mode: SamplingMode | str = SamplingMode.REPLACE) -> RoundPlan:
    if n_passersby < 0:
        raise ValueError("number of passersby must be nonnegative")
    mode = SamplingMode.parse(mode)
    order = list(range(n_passersby + 1))
    for k in range(n_passersby, 0, -1):
        j = _integer(rng, k + 1)
        order[k], order[j] = order[j], order[k]
    cid = CONTEXT_IDS[_integer(rng, 6)]
    perm = ORDERINGS[_integer(rng, 6)]
    members = context(cid).members
    picks = []
    for _ in range(n_passersby):
        if mode is SamplingMode.DISTINCT:
            picks.append(_distinct_triple(rng))
        else:
            picks.append(tuple(PMIndex.from_flat(_integer(rng, 9)) for _ in range(3)))
    return RoundPlan(tuple(order), cid, tuple(members[p] for p in perm), tuple(picks), mode)


def run_round(
    rho0: np.ndarray,
    plan: RoundPlan,
    rng=None,
    record_states: bool = False,
    forced_outcomes: Sequence[int] | None = None,
) -> RoundTrace:
    """Execute a plan. With ``forced_outcomes`` the outcomes are imposed instead of sampled."""
    schedule = plan.schedule()
    if forced_outcomes is not None and len(forced_outcomes) != len(schedule):
        raise ValueError(f"need {len(schedule)} forced outcomes, got {len(forced_outcomes)}")
    if forced_outcomes is None and rng is None:
        raise ValueError("run_round needs a random stream unless outcomes are forced")
    rho = np.asarray(rho0, dtype=complex)
    states = [rho]
    events = []
    product = 1
    for step, (who, idx) in enumerate(schedule):
        obs = observable(idx)
        if forced_outcomes is None:
            res = measure_sample(rho, obs, rng)
            value, rho = res.value, res.post_state
        else:
            value = forced_outcomes[step]
            rho = lueders_update(rho, obs, value)
        events.append(TraceEvent(who, idx, value))
        if who == MAIN:
            product *= value
        if record_states:
            states.append(rho)
    return RoundTrace(tuple(events), product, plan.main_context, tuple(states) if record_states else None)


def default_label(observer: int) -> str:
    return "main" if observer == MAIN else f"passerby{observer}"


def render_trace(trace: RoundTrace, labels: Mapping[int, str] | None = None) -> str:
    """One line per event: ``step<k> <observer> A<i><j> -> <+1|-1>``."""
    labels = labels or {}
    lines = []
    for k, e in enumerate(trace.events, start=1):
        name = labels.get(e.observer, default_label(e.observer))
        lines.append(f"step{k} {name} {e.index.label} -> {e.outcome:+d}")
    return "\n".join(lines)
