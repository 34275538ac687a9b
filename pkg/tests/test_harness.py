import itertools
import json

import numpy as np
import pytest

from pmpublic.harness.cli import main
from pmpublic.harness.engine import context_sums, draws_per_round, simulate_block
from pmpublic.harness.estimate import (
    RunConfig,
    StateSpec,
    closed_form_sigma,
    estimate_sigma,
    load_state_file,
    summarize,
)
from pmpublic.harness.exact import (
    EnumerationTooLarge,
    exact_sigma,
    exact_sigma_enumerate,
    exact_sigma_recursion,
    round_context_means,
)
from pmpublic.harness.experiments import SWEEP_FIELDS, channel_checks, invariance_experiments, rows_to_csv, sweep_passersby
from pmpublic.pm_scenario import CONTEXT_IDS, commutation_sign, contexts, PMIndex
from pmpublic.protocol import SamplingMode, plan_round, run_round
from pmpublic.qalgebra import MAXIMALLY_MIXED, random_pure_state
from pmpublic.streams import RoundStream, round_uniforms


# -- streams ---------------------------------------------------------------


def test_round_uniforms_range_and_independence_of_block():
    u = round_uniforms(5, np.arange(1000), 12)
    assert u.shape == (1000, 12) and u.min() >= 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.01
    assert np.array_equal(u[400:410], round_uniforms(5, np.arange(400, 410), 12))
    assert not np.array_equal(u, round_uniforms(6, np.arange(1000), 12))


def test_round_stream_matches_table():
    table = round_uniforms(9, [17], 5)[0]
    s = RoundStream(9, 17)
    assert [s.random() for _ in range(5)] == list(table)
    assert s.consumed == 5


# -- engine ----------------------------------------------------------------


@pytest.mark.parametrize("n", [0, 1, 3])
@pytest.mark.parametrize("mode", list(SamplingMode))
def test_batched_rounds_match_scalar_replay(n, mode):
    rho0 = random_pure_state(np.random.default_rng(n))
    ctx, prod = simulate_block(rho0, n, mode, 77, 0, 150)
    for i in range(150):
        stream = RoundStream(77, i)
        plan = plan_round(n, stream, mode)
        trace = run_round(rho0, plan, stream)
        assert stream.consumed == draws_per_round(n)
        assert CONTEXT_IDS[ctx[i]] == plan.main_context
        assert prod[i] == trace.main_product


def test_chunking_does_not_change_sums():
    a = context_sums(MAXIMALLY_MIXED, 2, SamplingMode.REPLACE, 3, 3000, chunk=3000)
    b = context_sums(MAXIMALLY_MIXED, 2, SamplingMode.REPLACE, 3, 3000, chunk=7)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_worker_count_does_not_change_estimate():
    base = dict(n_passersby=1, rounds=60_000, seed=11, initial_state=StateSpec("haar", 2))
    assert estimate_sigma(RunConfig(**base, workers=1)) == estimate_sigma(RunConfig(**base, workers=3))


# -- estimate --------------------------------------------------------------


def test_no_passersby_exactly_six():
    est = estimate_sigma(RunConfig(0, 600, seed=1))
    assert est.sigma == 6 and est.sigma_stderr == 0
    assert all(s.stderr == 0 for s in est.per_context.values())
    assert sum(s.count for s in est.per_context.values()) == est.rounds_used == 600


def test_one_passerby_near_prediction():
    est = estimate_sigma(RunConfig(1, 100_000, seed=2))
    assert abs(est.sigma - 1.851852) < 0.1
    assert abs(est.sigma - closed_form_sigma(1)) <= 5 * est.sigma_stderr


def test_state_invariance():
    mixed = estimate_sigma(RunConfig(1, 50_000, seed=3))
    haar = estimate_sigma(RunConfig(1, 50_000, seed=4, initial_state=StateSpec("haar", 9)))
    se = np.hypot(mixed.sigma_stderr, haar.sigma_stderr)
    assert abs(mixed.sigma - haar.sigma) <= 5 * se


def test_summarize_stratified_stderr():
    counts = np.array([10, 10, 10, 10, 10, 10])
    sums = np.array([10, 4, -2, -10, 0, 6])
    est = summarize(counts, sums)
    # oracle: explicit +-1 samples with 10 observations per context
    manual = []
    for n, s in zip(counts, sums):
        data = np.array([1] * ((n + s) // 2) + [-1] * ((n - s) // 2))
        manual.append((data.mean(), data.std(ddof=1) / np.sqrt(n)))
    for (m, se), cid in zip(manual, CONTEXT_IDS):
        assert est.per_context[cid].mean == pytest.approx(m)
        assert est.per_context[cid].stderr == pytest.approx(se)
    assert est.sigma_stderr == pytest.approx(np.sqrt(sum(se**2 for _, se in manual)))
    assert est.sigma == pytest.approx(sum(c.sign * m for c, (m, _) in zip(contexts(), manual)))


def test_too_few_rounds_rejected():
    with pytest.raises(ValueError, match="context"):
        estimate_sigma(RunConfig(1, 5))


@pytest.mark.parametrize(
    "kwargs", [dict(n_passersby=-1), dict(n_passersby=1, rounds=0), dict(n_passersby=1, seed=-1), dict(n_passersby=1, workers=0)]
)
def test_run_config_validation(kwargs):
    with pytest.raises(ValueError):
        RunConfig(**kwargs)


def test_closed_form_values():
    assert closed_form_sigma(0) == 6
    assert closed_form_sigma(1) == pytest.approx(150 / 81, abs=1e-12)
    assert closed_form_sigma(2) == pytest.approx(6 * 625 / 6561, abs=1e-12)
    assert closed_form_sigma(2) == pytest.approx(0.571559, abs=1e-6)


def test_state_spec_parse(tmp_path):
    assert StateSpec.parse("mixed").kind == "mixed"
    assert StateSpec.parse("haar:5").seed == 5
    rho = random_pure_state(np.random.default_rng(0))
    path = tmp_path / "rho.json"
    path.write_text(json.dumps([[[z.real, z.imag] for z in row] for row in rho]))
    assert np.allclose(StateSpec.parse(f"file:{path}").resolve(), rho)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([[[1, 0]] * 4] * 4))
    with pytest.raises(ValueError):
        load_state_file(bad)
    with pytest.raises(ValueError):
        StateSpec.parse("pure")


# -- exact -----------------------------------------------------------------


@pytest.mark.parametrize("n", [0, 1, 2, 3, 6])
def test_exact_matches_closed_form(n):
    assert exact_sigma(n) == pytest.approx(closed_form_sigma(n), abs=1e-9)
    assert exact_sigma_recursion(n) == pytest.approx(closed_form_sigma(n), abs=1e-9)


def test_exact_is_state_independent(haar_states):
    for rho in haar_states[:3]:
        assert exact_sigma(1, rho0=rho) == pytest.approx(closed_form_sigma(1), abs=1e-9)
        assert exact_sigma_recursion(2, rho0=rho) == pytest.approx(closed_form_sigma(2), abs=1e-9)


def test_brute_force_enumeration_replace():
    assert exact_sigma_enumerate(1, SamplingMode.REPLACE) == pytest.approx(150 / 81, abs=1e-9)
    assert exact_sigma_enumerate(0, SamplingMode.REPLACE) == pytest.approx(6, abs=1e-12)


def _distinct_oracle() -> float:
    """Count distinct passerby pick pairs (s, t) that leave a context's correlation intact.

    Between the Main Observer's first and second measurement the passerby measures s, between
    second and third t. Heisenberg-picture bookkeeping gives a factor 1 when t commutes with the
    third Main observable and s with the first, 0 otherwise. Pure counting, no matrices.
    """
    grid = [PMIndex(i, j) for i in (1, 2, 3) for j in (1, 2, 3)]
    total = 0.0
    for c in contexts():
        for first, _, third in itertools.permutations(c.members):
            hits = sum(
                commutation_sign(s, first) == 1 and commutation_sign(t, third) == 1
                for s, t in itertools.permutations(grid, 2)
            )
            total += c.sign * c.sign * hits / 72 / 6
    return total


def test_distinct_mode_exact_value():
    oracle = _distinct_oracle()
    assert oracle == pytest.approx(11 / 6, abs=1e-12)
    assert exact_sigma(1, SamplingMode.DISTINCT) == pytest.approx(oracle, abs=1e-9)
    assert exact_sigma_enumerate(1, SamplingMode.DISTINCT) == pytest.approx(oracle, abs=1e-9)


def test_distinct_monte_carlo_agrees():
    est = estimate_sigma(RunConfig(1, 100_000, seed=8, sampling_mode="distinct"))
    assert abs(est.sigma - 11 / 6) <= 5 * est.sigma_stderr


def test_access_order_invariance_any_state(haar_states):
    rho = haar_states[5]
    for mode in SamplingMode:
        vals = [round_context_means(2 if mode is SamplingMode.REPLACE else 1, mode, o, rho)
                for o in itertools.permutations(range(3 if mode is SamplingMode.REPLACE else 2))]
        for v in vals[1:]:
            assert np.allclose(v, vals[0], atol=1e-9)


def test_budget_rejection():
    with pytest.raises(EnumerationTooLarge, match="budget"):
        exact_sigma(2, method="enumerate")
    with pytest.raises(EnumerationTooLarge):
        exact_sigma(3, SamplingMode.DISTINCT)
    with pytest.raises(ValueError):
        exact_sigma(1, SamplingMode.DISTINCT, method="channel")


# -- experiments -----------------------------------------------------------


def test_invariance_report_passes():
    rep = invariance_experiments(seed=1)
    assert rep.passed
    info = [c for c in rep.checks if c.tolerance < 0]
    assert info and info[0].value == pytest.approx(11 / 6 - 150 / 81, abs=1e-9)


def test_channel_checks_pass():
    assert channel_checks(seed=0, trials=10).passed


def test_sweep_small():
    rows = sweep_passersby([1, 2], n_states=2, rounds=20_000, seed=5)
    assert [(r.n_passersby, r.state_index) for r in rows] == [(1, 0), (1, 1), (2, 0), (2, 1)]
    for r in rows:
        assert r.sigma < 4 and abs(r.sigma - r.closed_form) <= 5 * r.sigma_stderr
    lines = rows_to_csv(rows).splitlines()
    assert lines[0] == ",".join(SWEEP_FIELDS) and len(lines) == 5
    assert rows == sweep_passersby([1, 2], n_states=2, rounds=20_000, seed=5)


# -- CLI -------------------------------------------------------------------


def test_cli_run_csv(tmp_path, capsys):
    assert main(["run", "--passersby", "0", "--rounds", "600", "--seed", "1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("n_passersby,rounds,sigma,sigma_stderr")
    assert out[1].split(",")[2] == "6"


def test_cli_sweep_json(tmp_path):
    out = tmp_path / "sweep.json"
    code = main(["sweep", "--passersby", "1", "--states", "2", "--rounds", "5000", "--format", "json", "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert len(data) == 2 and set(data[0]) == set(SWEEP_FIELDS)


def test_cli_exact(capsys):
    assert main(["exact", "--passersby", "0,1,2,3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [line.split(",")[2] for line in lines[1:]] == ["6", "1.85185185", "0.571559214", "0.176407165"]


def test_cli_check(capsys):
    assert main(["check", "--trials", "5"]) == 0
    assert "ALL PASS" in capsys.readouterr().out


def test_cli_trace(capsys):
    assert main(["trace", "--passersby", "2", "--seed", "4"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 9 and lines[0].startswith("step1 ")


def test_cli_invalid_config_exit_code(capsys, tmp_path):
    assert main(["run", "--passersby", "-2"]) == 2
    assert main(["run", "--state", f"file:{tmp_path / 'missing.json'}"]) == 2
    assert main(["exact", "--passersby", "3", "--mode", "distinct"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", "--mode", "sometimes"])
    assert exc.value.code == 2
