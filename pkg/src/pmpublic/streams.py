"""Counter-based uniform draws keyed by ``(seed, round index, draw index)``.

Every round owns an independent stream, so a batch of rounds can be simulated
in any chunking or order and still reproduce the same numbers. The mixer is
the splitmix64 finalizer.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_ROUND_KEY = np.uint64(0xD1B54A32D192ED03)
_MASK64 = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def round_keys(seed: int, rounds) -> np.ndarray:
    """Per-round 64-bit keys for an array of round indices."""
    rounds = np.asarray(rounds, dtype=np.uint64)
    base = _mix(np.array([seed & _MASK64], dtype=np.uint64) + _GOLDEN)
    return _mix(base ^ _mix(rounds * _ROUND_KEY + _GOLDEN))


def uniforms(keys: np.ndarray, draws) -> np.ndarray:
    """Uniforms in [0, 1) with shape ``keys.shape + draws.shape``."""
    keys = np.asarray(keys, dtype=np.uint64)
    draws = np.asarray(draws, dtype=np.uint64)
    z = _mix(keys[..., None] + (draws + np.uint64(1)) * _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


def round_uniforms(seed: int, rounds, n_draws: int) -> np.ndarray:
    """``(len(rounds), n_draws)`` table of draws for a block of rounds."""
    return uniforms(round_keys(seed, rounds), np.arange(n_draws))


class RoundStream:
    """Sequential view of one round's draws, usable wherever a ``random()`` source is expected."""

    def __init__(self, seed: int, round_index: int):
        self.seed = seed
        self.round_index = round_index
        self._key = round_keys(seed, [round_index])
        self._next = 0

    def random(self) -> float:
        u = float(uniforms(self._key, [self._next])[0, 0])
        self._next += 1
        return u

    @property
    def consumed(self) -> int:
        return self._next
