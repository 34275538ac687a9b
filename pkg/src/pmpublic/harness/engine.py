"""Vectorized Monte Carlo over blocks of rounds.

Round ``i`` of a run with seed ``s`` draws from the keyed stream ``(s, i)`` in exactly the
order used by :func:`pmpublic.protocol.plan_round` followed by
:func:`pmpublic.protocol.run_round`, so a batched round and a scalar replay of the same
round see the same numbers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..measurement import ZERO_PROB_CUTOFF
from ..pm_scenario import contexts, pm_square
from ..protocol import ORDERINGS, SamplingMode
from ..streams import round_uniforms

CHUNK = 20_000

_PLUS = np.array([o.proj_plus for o in pm_square()])
_MINUS = np.array([o.proj_minus for o in pm_square()])
_CTX_FLAT = np.array([[m.flat for m in c.members] for c in contexts()])
_ORDERINGS = np.array(ORDERINGS)


def draws_per_round(n_passersby: int) -> int:
    return n_passersby + 2 + 3 * n_passersby + 3 * (n_passersby + 1)


def _integer(u: np.ndarray, n: int) -> np.ndarray:
    return np.minimum((u * n).astype(np.int64), n - 1)


def _kth_unused(used: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Index of the ``k``-th (0-based) False entry of each row of ``used``."""
    avail = ~used
    rank = np.cumsum(avail, axis=1) - 1
    return np.argmax(avail & (rank == k[:, None]), axis=1)


def plan_block(u: np.ndarray, n: int, mode: SamplingMode):
    """Decode plans from a draw table; returns (access order, context, main flat order, picks)."""
    b = len(u)
    rows = np.arange(b)
    col = 0
    order = np.tile(np.arange(n + 1), (b, 1))
    for k in range(n, 0, -1):
        j = _integer(u[:, col], k + 1)
        col += 1
        tmp = order[rows, j].copy()
        order[rows, j] = order[:, k]
        order[:, k] = tmp
    ctx = _integer(u[:, col], 6)
    perm = _integer(u[:, col + 1], 6)
    col += 2
    main_flat = _CTX_FLAT[ctx[:, None], _ORDERINGS[perm]]
    picks = np.zeros((b, n, 3), dtype=np.int64)
    for p in range(n):
        if mode is SamplingMode.DISTINCT:
            used = np.zeros((b, 9), dtype=bool)
            for slot, size in enumerate((9, 8, 7)):
                k = _kth_unused(used, _integer(u[:, col], size))
                used[rows, k] = True
                picks[:, p, slot] = k
                col += 1
        else:
            for slot in range(3):
                picks[:, p, slot] = _integer(u[:, col], 9)
                col += 1
    return order, ctx, main_flat, picks, col


def simulate_block(rho0: np.ndarray, n: int, mode: SamplingMode, seed: int, start: int, stop: int):
    """Simulate rounds ``start .. stop-1``; returns (context index, main product) arrays."""
    mode = SamplingMode.parse(mode)
    u = round_uniforms(seed, np.arange(start, stop), draws_per_round(n))
    order, ctx, main_flat, picks, col = plan_block(u, n, mode)
    b = stop - start
    rows = np.arange(b)
    rho = np.broadcast_to(np.asarray(rho0, dtype=complex), (b, 4, 4)).copy()
    product = np.ones(b, dtype=np.int64)
    for cycle in range(3):
        for pos in range(n + 1):
            who = order[:, pos]
            is_main = who == 0
            pass_idx = np.maximum(who - 1, 0)
            obs = np.where(is_main, main_flat[:, cycle], picks[rows, pass_idx, cycle] if n else 0)
            plus = _PLUS[obs]
            p_plus = np.clip(np.trace(plus @ rho, axis1=1, axis2=2).real, 0.0, 1.0)
            value = np.where(u[:, col] < p_plus, 1, -1)
            col += 1
            prob = np.where(value == 1, p_plus, 1.0 - p_plus)
            flip = prob < ZERO_PROB_CUTOFF
            value = np.where(flip, -value, value)
            proj = np.where((value == 1)[:, None, None], plus, _MINUS[obs])
            unnorm = proj @ rho @ proj
            rho = unnorm / np.trace(unnorm, axis1=1, axis2=2).real[:, None, None]
            rho = (rho + np.conj(np.swapaxes(rho, 1, 2))) / 2
            rho = rho / np.trace(rho, axis1=1, axis2=2).real[:, None, None]
            product *= np.where(is_main, value, 1)
    return ctx, product


def _block_sums(args):
    rho0, n, mode, seed, start, stop = args
    ctx, product = simulate_block(rho0, n, mode, seed, start, stop)
    return np.bincount(ctx, minlength=6), np.bincount(ctx, weights=product, minlength=6).astype(np.int64)


def context_sums(rho0, n: int, mode, seed: int, rounds: int, workers: int = 1, chunk: int = CHUNK):
    """Per-context round counts and sums of main products over ``rounds`` rounds.

    Integer aggregation makes the result independent of chunking and worker count.
    """
    tasks = [(rho0, n, mode, seed, a, min(a + chunk, rounds)) for a in range(0, rounds, chunk)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block_sums, tasks))
    else:
        parts = [_block_sums(t) for t in tasks]
    counts = sum(p[0] for p in parts)
    sums = sum(p[1] for p in parts)
    return counts.astype(np.int64), sums.astype(np.int64)
