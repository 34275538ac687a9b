"""Monte Carlo estimation of the witness and its closed-form prediction."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..pm_scenario import CONTEXT_IDS, sigma_from_context_means
from ..protocol import SamplingMode
from ..qalgebra import MAXIMALLY_MIXED, check_density_matrix, random_pure_state
from .engine import context_sums

DEFAULT_ROUNDS = 100_000
FULL_ROUNDS = 1_000_000


@dataclass(frozen=True)
class StateSpec:
    """Initial state of every round: ``mixed``, ``haar`` (with a sub-seed) or an explicit matrix."""

    kind: str = "mixed"
    seed: int = 0
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("mixed", "haar", "explicit"):
            raise ValueError(f"unknown state kind {self.kind!r}")
        if self.kind == "explicit":
            if self.matrix is None:
                raise ValueError("explicit state needs a matrix")
            check_density_matrix(self.matrix)

    def resolve(self) -> np.ndarray:
        if self.kind == "mixed":
            return MAXIMALLY_MIXED.copy()
        if self.kind == "haar":
            return random_pure_state(np.random.default_rng(self.seed))
        return np.asarray(self.matrix, dtype=complex)

    @classmethod
    def explicit(cls, matrix) -> StateSpec:
        return cls("explicit", matrix=np.asarray(matrix, dtype=complex))

    @classmethod
    def parse(cls, text: str, default_seed: int = 0) -> StateSpec:
        """``mixed``, ``haar``, ``haar:<seed>`` or ``file:<path>``."""
        if text == "mixed":
            return cls("mixed")
        if text == "haar":
            return cls("haar", default_seed)
        if text.startswith("haar:"):
            return cls("haar", int(text[5:]))
        if text.startswith("file:"):
            return cls.explicit(load_state_file(text[5:]))
        raise ValueError(f"cannot parse state {text!r}; use mixed, haar[:seed] or file:<path>")


def load_state_file(path) -> np.ndarray:
    """Read a JSON 4x4 array of ``[re, im]`` pairs and validate it as a density matrix."""
    data = json.loads(Path(path).read_text())
    arr = np.asarray(data, dtype=float)
    if arr.shape != (4, 4, 2):
        raise ValueError(f"state file must hold a 4x4 array of [re, im] pairs, got shape {arr.shape}")
    return check_density_matrix(arr[..., 0] + 1j * arr[..., 1])


@dataclass(frozen=True)
class RunConfig:
    n_passersby: int
    rounds: int = DEFAULT_ROUNDS
    seed: int = 0
    initial_state: StateSpec = StateSpec()
    sampling_mode: SamplingMode = SamplingMode.REPLACE
    workers: int = 1

    def __post_init__(self):
        if self.n_passersby < 0:
            raise ValueError("n_passersby must be nonnegative")
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        object.__setattr__(self, "sampling_mode", SamplingMode.parse(self.sampling_mode))


@dataclass(frozen=True)
class ContextStat:
    mean: float
    count: int
    stderr: float


@dataclass(frozen=True)
class SigmaEstimate:
    per_context: dict[str, ContextStat]
    sigma: float
    sigma_stderr: float
    rounds_used: int

    def as_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "sigma_stderr": self.sigma_stderr,
            "rounds_used": self.rounds_used,
            "per_context": {k: vars(v) for k, v in self.per_context.items()},
        }


def summarize(counts, sums) -> SigmaEstimate:
    """Assemble the estimate from per-context counts and sums of ``+-1`` products."""
    per = {}
    for cid, n, s in zip(CONTEXT_IDS, counts, sums):
        n, s = int(n), int(s)
        if n < 2:
            raise ValueError(
                f"context {cid} was drawn {n} time(s); increase rounds so every context gets at least 2"
            )
        mean = s / n
        # sum of squares equals n for +-1 data
        var = max(n - s * s / n, 0.0) / (n - 1)
        per[cid] = ContextStat(mean, n, math.sqrt(var / n))
    sigma = sigma_from_context_means({k: v.mean for k, v in per.items()})
    stderr = math.sqrt(sum(v.stderr**2 for v in per.values()))
    return SigmaEstimate(per, sigma, stderr, int(sum(counts)))


def estimate_sigma(cfg: RunConfig) -> SigmaEstimate:
    rho0 = cfg.initial_state.resolve()
    counts, sums = context_sums(rho0, cfg.n_passersby, cfg.sampling_mode, cfg.seed, cfg.rounds, cfg.workers)
    return summarize(counts, sums)


def closed_form_sigma(n: int) -> float:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return 6 * (5 / 9) ** (2 * n)
