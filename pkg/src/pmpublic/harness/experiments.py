"""Sweeps over the number of passersby and consistency checks of the round model."""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import asdict, dataclass

import numpy as np

from ..channels import adjoint, depolarizing, gamma_avg, lr_confinement_check, pm_equivalence_check
from ..pm_scenario import brute_force_nc_bound, pm_square
from ..protocol import SamplingMode
from ..qalgebra import random_pure_state
from .estimate import DEFAULT_ROUNDS, RunConfig, StateSpec, closed_form_sigma, estimate_sigma
from .exact import exact_sigma, exact_sigma_recursion

NC_BOUND = 4
SWEEP_FIELDS = ("n_passersby", "state_index", "sigma", "sigma_stderr", "closed_form", "nc_bound")


@dataclass(frozen=True)
class SweepRow:
    n_passersby: int
    state_index: int
    sigma: float
    sigma_stderr: float
    closed_form: float
    nc_bound: int = NC_BOUND


def _config_seeds(seed: int, n: int, index: int) -> tuple[int, int]:
    """(state sub-seed, simulation seed) for one sweep cell; states are redrawn per cell."""
    ss = np.random.SeedSequence([seed, n, index])
    state_seed, sim_seed = (int(x) for x in ss.generate_state(2, dtype=np.uint64))
    return state_seed, sim_seed


def sweep_passersby(
    n_values=(1, 2, 3),
    n_states: int = 10,
    rounds: int = DEFAULT_ROUNDS,
    seed: int = 0,
    mode: SamplingMode | str = SamplingMode.REPLACE,
    workers: int = 1,
) -> list[SweepRow]:
    rows = []
    for n in n_values:
        for k in range(n_states):
            state_seed, sim_seed = _config_seeds(seed, n, k)
            cfg = RunConfig(n, rounds, sim_seed, StateSpec("haar", state_seed), SamplingMode.parse(mode), workers)
            est = estimate_sigma(cfg)
            rows.append(SweepRow(n, k, est.sigma, est.sigma_stderr, closed_form_sigma(n)))
    return rows


def fmt(x) -> str:
    return f"{x:.9g}" if isinstance(x, float) else str(x)


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_FIELDS)
    for r in rows:
        w.writerow([fmt(getattr(r, f)) for f in SWEEP_FIELDS])
    return buf.getvalue()


def rows_to_json(rows: list[SweepRow]) -> str:
    return json.dumps([{k: float(fmt(v)) if isinstance(v, float) else v for k, v in asdict(r).items()} for r in rows], indent=2)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    expected: float
    tolerance: float
    passed: bool
    note: str = ""


@dataclass
class Report:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.tolerance >= 0)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "INFO" if c.tolerance < 0 else ("PASS" if c.passed else "FAIL")
            line = f"{status} {c.name}: value={fmt(float(c.value))} expected={fmt(float(c.expected))}"
            if c.note:
                line += f" ({c.note})"
            out.append(line)
        return out


def _check(name, value, expected, tol, note="") -> Check:
    return Check(name, value, expected, tol, abs(value - expected) <= tol, note)


def invariance_experiments(seed: int = 0, n_max: int = 3) -> Report:
    """Exact-value checks of the round model's interpretation choices.

    (a) the witness does not depend on the access order, for a Haar initial state;
    (b) distinct-triple versus with-replacement passersby at one passerby (reported);
    (c) the ratio of consecutive witness values is 25/81 with replacement.
    """
    rho0 = random_pure_state(np.random.default_rng(seed))
    checks = []
    for mode in SamplingMode:
        checks.append(_check(f"n=0 {mode.value}", exact_sigma_recursion(0, mode, rho0), 6.0, 1e-9))
    ref = closed_form_sigma(1)
    for mode in SamplingMode:
        vals = [exact_sigma_recursion(1, mode, rho0, access_orders=[o]) for o in itertools.permutations(range(2))]
        base = vals[0]
        for o, v in zip(itertools.permutations(range(2)), vals):
            checks.append(_check(f"order {o} {mode.value}", v, base, 1e-9, "access-order invariance"))
    replace1 = exact_sigma(1, SamplingMode.REPLACE, rho0)
    distinct1 = exact_sigma(1, SamplingMode.DISTINCT, rho0)
    checks.append(_check("replace n=1 vs closed form", replace1, ref, 1e-9))
    checks.append(Check("distinct - replace at n=1", distinct1 - replace1, 0.0, -1, False, f"distinct={fmt(distinct1)}"))
    for n in range(n_max):
        ratio = exact_sigma(n + 1, SamplingMode.REPLACE, rho0) / exact_sigma(n, SamplingMode.REPLACE, rho0)
        checks.append(_check(f"ratio n={n}->{n + 1}", ratio, 25 / 81, 1e-9, "geometric decay"))
    return Report(checks)


def channel_checks(seed: int = 0, trials: int = 100) -> Report:
    """Channel-level facts: bound, adjoint shrink, depolarizing indistinguishability, confinement."""
    rng = np.random.default_rng(seed)
    g = gamma_avg()
    g_star = adjoint(g)
    checks = [_check("noncontextual bound", brute_force_nc_bound(), 4, 0)]
    shrink = max(float(np.max(np.abs(g_star(o.matrix) - 5 / 9 * o.matrix))) for o in pm_square())
    checks.append(_check("adjoint shrink residual", shrink, 0.0, 1e-12))
    eq = pm_equivalence_check(g, depolarizing(5 / 9), trials, rng, exhaustive=True)
    checks.append(_check("PM equivalence G vs depol(5/9)", eq.max_difference, 0.0, 1e-10, f"{eq.sequences_checked} sequences"))
    conf = lr_confinement_check()
    worst = max(e.leak for e in conf.entries)
    checks.append(_check("L/R confinement leak", worst, 0.0, 1e-12, f"{len(conf.entries)} cases"))
    return Report(checks)
