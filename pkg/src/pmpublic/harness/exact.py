"""Sampling-free values of the witness.

Three independent routes:

* ``channel``: each interval between Main measurements replaced by ``gamma_power(n)``;
  replace mode only.
* ``recursion``: the full round (access order, every passerby slot) pushed through linear
  maps, with passerby outcomes summed out and the Main outcomes folded in with their sign.
  In distinct mode the recursion tracks which observables each passerby has used.
* ``enumerate``: brute force over every pick tuple, access order, Main ordering and every
  outcome branch with normalized Lueders updates. Small ``n`` only.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from ..channels import gamma_power
from ..measurement import ZERO_PROB_CUTOFF, sequential_expectation
from ..pm_scenario import contexts, pm_square
from ..protocol import ORDERINGS, SamplingMode
from ..qalgebra import MAXIMALLY_MIXED

DEFAULT_BUDGET = 10_000_000

_A = np.array([o.matrix for o in pm_square()])
_PLUS = np.array([o.proj_plus for o in pm_square()])
_MINUS = np.array([o.proj_minus for o in pm_square()])
# (context, ordering, slot) -> flat observable
_MAIN_FLAT = np.array([[[c.members[p].flat for p in perm] for perm in ORDERINGS] for c in contexts()])
_SIGNS = np.array([c.sign for c in contexts()])


class EnumerationTooLarge(ValueError):
    def __init__(self, size: float, budget: float):
        super().__init__(f"exact computation needs ~{size:.3g} work units, budget is {budget:.3g}")
        self.size = size
        self.budget = budget


def _sigma(context_means: np.ndarray) -> float:
    return float(np.dot(_SIGNS, context_means))


def exact_sigma_channel(n: int, rho0: np.ndarray | None = None) -> float:
    rho0 = MAXIMALLY_MIXED if rho0 is None else rho0
    between = gamma_power(n)
    square = pm_square()
    means = []
    for c in contexts():
        vals = [
            sequential_expectation(rho0, [square[c.members[p].flat] for p in perm], between)
            for perm in ORDERINGS
        ]
        means.append(np.mean(vals))
    return _sigma(np.array(means))


# ---------------------------------------------------------------------------
# recursion over the round


def _recursion_cost(n: int, mode: SamplingMode) -> float:
    if mode is SamplingMode.REPLACE:
        return math.factorial(n + 1) * 3 * (n + 1) * 9
    return math.factorial(n + 1) * 3 * (n + 1) * 36**n * 9


def round_context_means(
    n: int,
    mode: SamplingMode | str,
    access_order: Sequence[int],
    rho0: np.ndarray | None = None,
) -> np.ndarray:
    """Exact mean Main product per context for one fixed access order (averaged over orderings)."""
    mode = SamplingMode.parse(mode)
    rho0 = MAXIMALLY_MIXED if rho0 is None else np.asarray(rho0, dtype=complex)
    # stacked over (context, ordering): shape (6, 6, 4, 4)
    start = np.broadcast_to(rho0, (6, 6, 4, 4)).astype(complex)
    frontier = {(0,) * n: start}
    for cycle in range(3):
        for who in access_order:
            if who == 0:
                plus, minus = _PLUS[_MAIN_FLAT[:, :, cycle]], _MINUS[_MAIN_FLAT[:, :, cycle]]
                frontier = {k: plus @ x @ plus - minus @ x @ minus for k, x in frontier.items()}
                continue
            p = who - 1
            nxt: dict[tuple[int, ...], np.ndarray] = {}
            for key, x in frontier.items():
                used = key[p]
                avail = [s for s in range(9) if not (used >> s) & 1]
                w = 1.0 / len(avail)
                for s in avail:
                    image = w * 0.5 * (x + _A[s] @ x @ _A[s])
                    nk = key
                    if mode is SamplingMode.DISTINCT:
                        nk = key[:p] + (used | (1 << s),) + key[p + 1 :]
                    if nk in nxt:
                        nxt[nk] = nxt[nk] + image
                    else:
                        nxt[nk] = image
            frontier = nxt
    total = sum(frontier.values())
    values = np.trace(total, axis1=2, axis2=3).real
    return values.mean(axis=1)


def exact_sigma_recursion(
    n: int,
    mode: SamplingMode | str = SamplingMode.REPLACE,
    rho0: np.ndarray | None = None,
    access_orders: Sequence[Sequence[int]] | None = None,
    budget: float = DEFAULT_BUDGET,
) -> float:
    mode = SamplingMode.parse(mode)
    cost = _recursion_cost(n, mode)
    if cost > budget:
        raise EnumerationTooLarge(cost, budget)
    orders = list(access_orders) if access_orders is not None else list(itertools.permutations(range(n + 1)))
    means = np.mean([round_context_means(n, mode, o, rho0) for o in orders], axis=0)
    return _sigma(means)


# ---------------------------------------------------------------------------
# brute force


def _pick_tuples(n: int, mode: SamplingMode) -> np.ndarray:
    """All joint passerby picks, shape (P, n, 3)."""
    if mode is SamplingMode.DISTINCT:
        one = list(itertools.permutations(range(9), 3))
    else:
        one = list(itertools.product(range(9), repeat=3))
    return np.array(list(itertools.product(one, repeat=n)), dtype=np.int64).reshape(-1, n, 3)


def enumeration_size(n: int, mode: SamplingMode | str) -> float:
    mode = SamplingMode.parse(mode)
    per = 504 if mode is SamplingMode.DISTINCT else 729
    return float(math.factorial(n + 1) * 36 * per**n * 2 ** (3 * (n + 1)))


def _branch_mean(rho0, schedule, main_steps) -> float:
    """Probability-weighted mean product of Main outcomes over all outcome branches.

    ``schedule`` is a list of per-step observable arrays of shape (P,) (one entry per pick tuple).
    """
    p_count = len(schedule[0])
    states = np.broadcast_to(rho0, (p_count, 4, 4)).astype(complex)
    weight = np.ones(p_count)
    product = np.ones(p_count)
    which = np.arange(p_count)  # pick tuple each branch descends from
    for step, obs_all in enumerate(schedule):
        obs = obs_all[which]
        new_states, new_w, new_prod, new_which = [], [], [], []
        for value, table in ((1, _PLUS), (-1, _MINUS)):
            proj = table[obs]
            unnorm = proj @ states @ proj
            prob = np.trace(unnorm, axis1=1, axis2=2).real
            alive = prob >= ZERO_PROB_CUTOFF
            safe = np.where(alive, prob, 1.0)
            post = np.where(alive[:, None, None], unnorm / safe[:, None, None], states)
            new_states.append(post)
            new_w.append(np.where(alive, weight * prob, 0.0))
            new_prod.append(product * (value if step in main_steps else 1))
            new_which.append(which)
        states = np.concatenate(new_states)
        weight = np.concatenate(new_w)
        product = np.concatenate(new_prod)
        which = np.concatenate(new_which)
    return float(np.sum(weight * product) / p_count)


def exact_sigma_enumerate(
    n: int,
    mode: SamplingMode | str = SamplingMode.REPLACE,
    rho0: np.ndarray | None = None,
    access_orders: Sequence[Sequence[int]] | None = None,
    budget: float = DEFAULT_BUDGET,
) -> float:
    mode = SamplingMode.parse(mode)
    size = enumeration_size(n, mode)
    if size > budget:
        raise EnumerationTooLarge(size, budget)
    rho0 = MAXIMALLY_MIXED if rho0 is None else np.asarray(rho0, dtype=complex)
    picks = _pick_tuples(n, mode) if n else np.zeros((1, 0, 3), dtype=np.int64)
    orders = list(access_orders) if access_orders is not None else list(itertools.permutations(range(n + 1)))
    means = np.zeros(6)
    for order in orders:
        for ci in range(6):
            acc = 0.0
            for oi in range(6):
                schedule, main_steps = [], set()
                for cycle in range(3):
                    for who in order:
                        if who == 0:
                            main_steps.add(len(schedule))
                            schedule.append(np.full(len(picks), _MAIN_FLAT[ci, oi, cycle]))
                        else:
                            schedule.append(picks[:, who - 1, cycle])
                acc += _branch_mean(rho0, schedule, main_steps)
            means[ci] += acc / 6
    return _sigma(means / len(orders))


def exact_sigma(
    n: int,
    mode: SamplingMode | str = SamplingMode.REPLACE,
    rho0: np.ndarray | None = None,
    method: str = "auto",
    budget: float = DEFAULT_BUDGET,
) -> float:
    """Exact expected witness for ``n`` passersby.

    ``method="auto"`` uses the channel route in replace mode and the round recursion in
    distinct mode.
    """
    mode = SamplingMode.parse(mode)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if method == "auto":
        method = "channel" if mode is SamplingMode.REPLACE else "recursion"
    if method == "channel":
        if mode is not SamplingMode.REPLACE:
            raise ValueError("the channel route only describes replace-mode passersby")
        return exact_sigma_channel(n, rho0)
    if method == "recursion":
        return exact_sigma_recursion(n, mode, rho0, budget=budget)
    if method == "enumerate":
        return exact_sigma_enumerate(n, mode, rho0, budget=budget)
    raise ValueError(f"unknown method {method!r}")
