"""Channels induced by passerby measurements, in operator-sum and Pauli-transfer form.

A :class:`Channel` holds both representations:

* ``kraus``: terms ``(w, M)`` acting as ``rho -> sum_k w M rho M^dagger``; used to apply the
  channel to states.
* ``pauli``: a real 16x16 matrix acting on the coefficient vector ``(c0, t, l, r)`` of
  :mod:`pmpublic.qalgebra`; used for composition, powers and the adjoint. For a trace
  preserving map the first row is ``e_0`` and the first column carries the affine offset.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .measurement import outcome_table
from .pm_scenario import PMIndex, observable, pm_square
from .qalgebra import (
    BASIS,
    IDENTITY,
    LR_LABELS,
    dagger,
    pauli_product,
    pauli_reconstruct,
    pauli_vector,
    random_pure_state,
)

SHRINK = 5 / 9
_T = slice(1, 10)
_LR = slice(10, 16)


def _canonical_key(op: np.ndarray) -> bytes:
    flat = op.ravel()
    k = int(np.argmax(np.abs(flat) > 1e-9))
    phase = flat[k] / abs(flat[k])
    return np.round(op / phase, 10).tobytes()


def _merge_terms(terms) -> tuple[tuple[float, np.ndarray], ...]:
    """Combine terms whose operators agree up to a global phase."""
    merged: dict[bytes, list] = {}
    for w, m in terms:
        if w == 0:
            continue
        key = _canonical_key(m)
        if key in merged:
            merged[key][0] += w
        else:
            merged[key] = [w, m]
    return tuple((w, m) for w, m in merged.values())


def _pauli_transfer(terms) -> np.ndarray:
    # M[a, b] = tr(B_a Phi(B_b)) / 4
    images = sum(w * (m @ BASIS @ dagger(m)) for w, m in terms)
    return pauli_vector(images).real.T / 4


@dataclass(frozen=True)
class Channel:
    kraus: tuple[tuple[float, np.ndarray], ...] = field(repr=False)
    pauli: np.ndarray = field(repr=False)
    name: str = "channel"

    @classmethod
    def from_kraus(cls, terms, name: str = "channel") -> Channel:
        terms = _merge_terms((float(w), np.asarray(m, dtype=complex)) for w, m in terms)
        return cls(terms, _pauli_transfer(terms), name)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        """Apply via the operator sum; accepts stacks of shape ``(..., 4, 4)``."""
        return sum(w * (m @ rho @ dagger(m)) for w, m in self.kraus)

    def apply_pauli(self, rho: np.ndarray) -> np.ndarray:
        """Apply via the Pauli-transfer matrix."""
        v = pauli_vector(rho)
        return pauli_reconstruct(v @ self.pauli.T)

    def then(self, other: Channel) -> Channel:
        """``other`` applied after ``self``."""
        terms = [(w1 * w2, m2 @ m1) for (w1, m1), (w2, m2) in itertools.product(self.kraus, other.kraus)]
        return Channel(_merge_terms(terms), other.pauli @ self.pauli, f"{other.name}*{self.name}")

    def transfer_distance(self, other: Channel) -> float:
        return float(np.max(np.abs(self.pauli - other.pauli)))


def identity_channel() -> Channel:
    return Channel(((1.0, IDENTITY.copy()),), np.eye(16), "id")


def gamma_measured(ij: PMIndex | tuple[int, int] | str) -> Channel:
    """Unread measurement of one PM observable: ``rho/2 + A rho A / 2``."""
    obs = observable(ij)
    return Channel.from_kraus([(0.5, IDENTITY), (0.5, obs.matrix)], name=f"G{obs.label[1:]}")


def gamma_avg() -> Channel:
    """Measurement of a uniformly random PM observable, outcome discarded."""
    terms = [(0.5, IDENTITY)] + [(1 / 18, obs.matrix) for obs in pm_square()]
    kraus = _merge_terms(terms)
    # 5/9 rho + 4/9 rho* - 2/9 P_LR(rho): t-sector scales by 5/9, l and r by 1/3
    pauli = np.diag([1.0] + [SHRINK] * 9 + [1 / 3] * 6)
    return Channel(kraus, pauli, "G")


def gamma_power(n: int) -> Channel:
    if n < 0:
        raise ValueError(f"power must be nonnegative, got {n}")
    ch = identity_channel()
    g = gamma_avg()
    for _ in range(n):
        ch = ch.then(g)
    return Channel(ch.kraus, ch.pauli, f"G^{n}")


def depolarizing(p: float) -> Channel:
    """``p rho + (1 - p) I/4``, realized in operator-sum form as a partial Pauli twirl."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing parameter must lie in [0, 1], got {p}")
    terms = [(p, IDENTITY)] + [((1 - p) / 16, b) for b in BASIS]
    kraus = _merge_terms(terms)
    pauli = np.diag([1.0] + [p] * 15)
    return Channel(kraus, pauli, f"depol({p:.6g})")


def adjoint(ch: Channel) -> Channel:
    """Heisenberg-picture dual: ``tr(adjoint(ch)(A) rho) == tr(A ch(rho))``."""
    kraus = tuple((w, dagger(m)) for w, m in ch.kraus)
    return Channel(kraus, ch.pauli.T.copy(), f"{ch.name}^*")


# ---------------------------------------------------------------------------
# checks


@dataclass
class EquivalenceReport:
    trials: int
    sequences_checked: int
    max_difference: float
    tolerance: float
    worst_sequence: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.max_difference <= self.tolerance


def _signed_projectors() -> np.ndarray:
    """Projectors for all (observable, outcome) pairs, shape (18, 4, 4); index ``2k`` is +1."""
    return np.array([o.projector(v) for o in pm_square() for v in (1, -1)])


def _prefix_tables(rho: np.ndarray, ch: Channel, max_len: int = 3) -> list[np.ndarray]:
    """Outcome-string probabilities of every PM sequence up to ``max_len``.

    Level ``k`` has shape ``(18,) * k``; axis ``m`` indexes the ``m``-th (observable, outcome).
    """
    proj = _signed_projectors()
    tables = []
    x = np.asarray(rho, dtype=complex)[None]
    for k in range(max_len):
        if k > 0:
            x = ch(x)
        x = (proj[None] @ x[:, None] @ proj[None]).reshape(-1, 4, 4)
        tables.append(np.trace(x, axis1=1, axis2=2).real.reshape((18,) * (k + 1)))
    return tables


def _worst_entry(tables_a, tables_b) -> tuple[float, tuple[str, ...]]:
    worst, seq = 0.0, ()
    for ta, tb in zip(tables_a, tables_b):
        diff = np.abs(ta - tb)
        d = float(diff.max())
        if d > worst:
            pos = np.unravel_index(int(diff.argmax()), diff.shape)
            worst, seq = d, tuple(pm_square()[p // 2].label for p in pos)
    return worst, seq


def pm_equivalence_check(
    ch1: Channel,
    ch2: Channel,
    trials: int,
    rng: np.random.Generator,
    exhaustive: bool = False,
    tol: float = 1e-10,
) -> EquivalenceReport:
    """Compare outcome statistics of PM measurement sequences interleaved with two channels.

    Each trial draws a Haar-random state. With ``exhaustive`` every sequence of length 1-3
    is tested on it, otherwise one sequence of random length is drawn per trial.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    square = pm_square()
    worst, worst_seq, count = 0.0, (), 0
    for _ in range(trials):
        rho = random_pure_state(rng)
        if exhaustive:
            d, seq = _worst_entry(_prefix_tables(rho, ch1), _prefix_tables(rho, ch2))
            count += 9 + 81 + 729
        else:
            k = int(rng.integers(1, 4))
            obs = [square[i] for i in rng.integers(0, 9, size=k)]
            d = float(np.max(np.abs(outcome_table(rho, obs, ch1) - outcome_table(rho, obs, ch2))))
            seq = tuple(o.label for o in obs)
            count += 1
        if d > worst:
            worst, worst_seq = d, seq
    return EquivalenceReport(trials, count, worst, tol, worst_seq)


@dataclass(frozen=True)
class ConfinementEntry:
    observable: str
    basis: str
    outcome: int
    commutes: bool
    leak: float  # largest |coefficient| on I and the nine t terms


@dataclass
class ConfinementReport:
    entries: list[ConfinementEntry]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(e.leak <= self.tolerance for e in self.entries)

    @property
    def failures(self) -> list[ConfinementEntry]:
        return [e for e in self.entries if e.leak > self.tolerance]


def lr_confinement_check(tol: float = 1e-12) -> ConfinementReport:
    """Check that ``P B P`` stays in span(L, R) for every PM projector ``P`` and local ``B``."""
    entries = []
    for obs in pm_square():
        for label in LR_LABELS:
            b = pauli_product(label[1].lower() + "i" if label[0] == "L" else "i" + label[1].lower())
            commutes = bool(np.allclose(obs.matrix @ b, b @ obs.matrix))
            for outcome in (1, -1):
                proj = obs.projector(outcome)
                v = pauli_vector(proj @ b @ proj)
                leak = float(np.max(np.abs(v[:10])))
                entries.append(ConfinementEntry(obs.label, label, outcome, commutes, leak))
    return ConfinementReport(entries, tol)
