"""The Peres-Mermin square: observables, contexts and the noncontextual bound."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from .qalgebra import IDENTITY, PM_LABELS, pauli_product

CONTEXT_IDS = ("R1", "R2", "R3", "C1", "C2", "C3")


@dataclass(frozen=True, order=True)
class PMIndex:
    """Grid position ``(row, col)`` of an observable, both 1-based."""

    row: int
    col: int

    def __post_init__(self):
        if self.row not in (1, 2, 3) or self.col not in (1, 2, 3):
            raise ValueError(f"PM index out of range: ({self.row}, {self.col})")

    @property
    def flat(self) -> int:
        """Row-major position 0..8."""
        return 3 * (self.row - 1) + (self.col - 1)

    @classmethod
    def from_flat(cls, k: int) -> PMIndex:
        return cls(k // 3 + 1, k % 3 + 1)

    @property
    def label(self) -> str:
        return f"A{self.row}{self.col}"

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class PMObservable:
    index: PMIndex
    matrix: np.ndarray = field(repr=False)
    proj_plus: np.ndarray = field(repr=False)
    proj_minus: np.ndarray = field(repr=False)

    @property
    def label(self) -> str:
        return self.index.label

    def projector(self, outcome: int) -> np.ndarray:
        if outcome == 1:
            return self.proj_plus
        if outcome == -1:
            return self.proj_minus
        raise ValueError(f"outcome must be +1 or -1, got {outcome!r}")


@dataclass(frozen=True)
class Context:
    id: str
    members: tuple[PMIndex, PMIndex, PMIndex]
    sign: int


def _make_observable(index: PMIndex) -> PMObservable:
    a = pauli_product(PM_LABELS[index.row - 1][index.col - 1])
    plus = (IDENTITY + a) / 2
    minus = (IDENTITY - a) / 2
    for arr in (a, plus, minus):
        arr.setflags(write=False)
    return PMObservable(index, a, plus, minus)


@lru_cache(maxsize=None)
def pm_square() -> tuple[PMObservable, ...]:
    """The nine observables in row-major order; ``pm_square()[k]`` has ``index.flat == k``."""
    return tuple(_make_observable(PMIndex.from_flat(k)) for k in range(9))


def observable(index: PMIndex | tuple[int, int] | str) -> PMObservable:
    """Look up by ``PMIndex``, ``(row, col)`` or label such as ``"A23"``."""
    if isinstance(index, str):
        s = index.upper().removeprefix("A")
        index = PMIndex(int(s[0]), int(s[1]))
    elif not isinstance(index, PMIndex):
        index = PMIndex(*index)
    return pm_square()[index.flat]


@lru_cache(maxsize=None)
def contexts() -> tuple[Context, ...]:
    out = []
    for i in (1, 2, 3):
        out.append(Context(f"R{i}", tuple(PMIndex(i, j) for j in (1, 2, 3)), +1))
    for j in (1, 2, 3):
        out.append(Context(f"C{j}", tuple(PMIndex(i, j) for i in (1, 2, 3)), -1))
    return tuple(out)


def context(cid: str) -> Context:
    try:
        return contexts()[CONTEXT_IDS.index(cid)]
    except ValueError:
        raise KeyError(f"unknown context {cid!r}; expected one of {CONTEXT_IDS}") from None


def commutation_sign(a: PMIndex, b: PMIndex) -> int:
    """+1 if ``A_a`` and ``A_b`` share a row or column (they commute), -1 if they anticommute."""
    return 1 if (a.row == b.row or a.col == b.col) else -1


def sigma_from_context_means(means: Mapping[str, float]) -> float:
    """Witness value: sum of row means minus sum of column means."""
    missing = [cid for cid in CONTEXT_IDS if cid not in means]
    if missing:
        raise ValueError(f"missing context mean(s): {', '.join(missing)}")
    for cid in CONTEXT_IDS:
        if not -1.0 <= means[cid] <= 1.0:
            raise ValueError(f"context mean for {cid} is {means[cid]}, outside [-1, 1]")
    return sum(c.sign * float(means[c.id]) for c in contexts())


def _assignment_sigmas() -> np.ndarray:
    values = np.array(list(itertools.product((-1, 1), repeat=9)))
    sigma = np.zeros(len(values), dtype=int)
    for c in contexts():
        cols = [m.flat for m in c.members]
        sigma += c.sign * values[:, cols].prod(axis=1)
    return sigma


def brute_force_nc_bound() -> int:
    """Maximum of the witness over all 512 deterministic value assignments."""
    return int(_assignment_sigmas().max())


def brute_force_nc_minimum() -> int:
    return int(_assignment_sigmas().min())
