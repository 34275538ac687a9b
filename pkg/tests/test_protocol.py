import collections
import itertools

import numpy as np
import pytest

from pmpublic.pm_scenario import CONTEXT_IDS, PMIndex, context
from pmpublic.protocol import (
    MAIN,
    ObserverRole,
    RoundPlan,
    SamplingMode,
    plan_round,
    render_trace,
    run_round,
)
from pmpublic.qalgebra import MAXIMALLY_MIXED, ket, random_pure_state
from pmpublic.streams import RoundStream

P = lambda s: PMIndex(int(s[1]), int(s[2]))  # noqa: E731

EXAMPLE_PLAN = RoundPlan(
    access_order=(0, 1),
    main_context="R2",
    main_order=(P("A22"), P("A21"), P("A23")),
    passerby_picks=((P("A13"), P("A33"), P("A32")),),
    sampling_mode=SamplingMode.DISTINCT,
)
EXAMPLE_STATES = [
    ket(1, 0, 0, 0),
    ket(1, 0, 1, 0),
    ket(1, -1, 1, -1),
    ket(0, 0, 1, -1),
    ket(0, 0, 1, 0),
    ket(0, 1, 1, 0),
    ket(0, 1 + 1j, 1 - 1j, 0),
]
EXAMPLE_LABELLED = (1, -1, -1, -1, 1, -1)


def test_plan_without_passersby(rng):
    plan = plan_round(0, rng)
    assert plan.access_order == (MAIN,)
    assert plan.passerby_picks == ()
    assert sorted(plan.main_order) == sorted(context(plan.main_context).members)


def test_plan_frequencies(rng):
    ctx = collections.Counter()
    picks = collections.Counter()
    first = collections.Counter()
    n_plans = 10_000
    for _ in range(n_plans):
        plan = plan_round(1, rng)
        ctx[plan.main_context] += 1
        picks.update(plan.passerby_picks[0])
        first[plan.access_order[0]] += 1
    for cid in CONTEXT_IDS:
        assert abs(ctx[cid] / n_plans - 1 / 6) <= 0.02
    assert len(picks) == 9
    for count in picks.values():
        assert abs(count / (3 * n_plans) - 1 / 9) <= 0.02
    assert abs(first[0] / n_plans - 0.5) <= 0.02


def test_plan_orderings_uniform(rng):
    orders = collections.Counter(plan_round(0, rng).main_order for _ in range(12_000))
    # six contexts times six orderings
    assert len(orders) == 36
    for count in orders.values():
        assert abs(count / 12_000 - 1 / 36) <= 0.01


def test_access_order_uniform_over_permutations(rng):
    seen = collections.Counter(plan_round(2, rng).access_order for _ in range(6_000))
    assert set(seen) == set(itertools.permutations(range(3)))
    for count in seen.values():
        assert abs(count / 6_000 - 1 / 6) <= 0.02


def test_distinct_mode_picks(rng):
    triples = collections.Counter()
    for _ in range(5_000):
        plan = plan_round(2, rng, SamplingMode.DISTINCT)
        for trio in plan.passerby_picks:
            assert len(set(trio)) == 3
            triples[trio[0]] += 1
    for count in triples.values():
        assert abs(count / 10_000 - 1 / 9) <= 0.02


def test_plan_validation():
    with pytest.raises(ValueError):
        RoundPlan((0, 0), "R1", context("R1").members, ((P("A11"),) * 3,))
    with pytest.raises(ValueError):
        RoundPlan((0,), "R1", context("C1").members, ())
    with pytest.raises(ValueError):
        RoundPlan((0, 1), "R1", context("R1").members, ((P("A11"),) * 3,), SamplingMode.DISTINCT)
    with pytest.raises(ValueError):
        plan_round(-1, np.random.default_rng(0))


@pytest.mark.parametrize("cid", CONTEXT_IDS)
def test_no_passersby_product_is_sign(cid, rng):
    sign = context(cid).sign
    for _ in range(30):
        rho0 = random_pure_state(rng)
        plan = RoundPlan((0,), cid, tuple(rng.permutation(context(cid).members)), ())
        assert run_round(rho0, plan, rng).main_product == sign


def test_example_round_replay():
    # A21 -> +1 yields the listed states; with -1 the middle two differ (next test)
    outcomes = (1, -1, 1, -1, 1, -1)
    trace = run_round(EXAMPLE_STATES[0], EXAMPLE_PLAN, forced_outcomes=outcomes, record_states=True)
    for got, want in zip(trace.states, EXAMPLE_STATES):
        assert np.allclose(got, want, atol=1e-12)
    assert trace.main_product == 1


def test_example_round_alternative_outcome():
    trace = run_round(EXAMPLE_STATES[0], EXAMPLE_PLAN, forced_outcomes=EXAMPLE_LABELLED, record_states=True)
    for k in (0, 1, 2, 5, 6):
        assert np.allclose(trace.states[k], EXAMPLE_STATES[k], atol=1e-12)
    assert np.allclose(trace.states[3], ket(1, -1, 0, 0), atol=1e-12)
    assert np.allclose(trace.states[4], ket(0, 1, 0, 0), atol=1e-12)
    # final state is the -1 eigenstate of A32
    from pmpublic.pm_scenario import observable

    a32 = observable("A32").matrix
    assert np.trace(a32 @ trace.states[-1]).real == pytest.approx(-1, abs=1e-12)
    assert trace.main_product == -1


def test_example_round_render():
    trace = run_round(EXAMPLE_STATES[0], EXAMPLE_PLAN, forced_outcomes=EXAMPLE_LABELLED)
    text = render_trace(trace, {0: "Alice", 1: "Bob"})
    assert text.splitlines() == [
        "step1 Alice A22 -> +1",
        "step2 Bob A13 -> -1",
        "step3 Alice A21 -> -1",
        "step4 Bob A33 -> -1",
        "step5 Alice A23 -> +1",
        "step6 Bob A32 -> -1",
    ]


def test_render_no_passersby(rng):
    plan = plan_round(0, rng)
    lines = render_trace(run_round(MAXIMALLY_MIXED, plan, rng)).splitlines()
    assert len(lines) == 3 and all(" main " in line for line in lines)


@pytest.mark.parametrize("n", [0, 1, 2, 4])
@pytest.mark.parametrize("mode", list(SamplingMode))
def test_round_structure(n, mode, rng):
    for _ in range(20):
        plan = plan_round(n, rng, mode)
        trace = run_round(MAXIMALLY_MIXED, plan, rng)
        assert len(trace.events) == 3 * (n + 1)
        assert len(render_trace(trace).splitlines()) == len(trace.events)
        who = [e.observer for e in trace.events]
        assert who == list(plan.access_order) * 3
        assert collections.Counter(who) == {k: 3 for k in range(n + 1)}
        main_pos = [k for k, w in enumerate(who) if w == MAIN]
        assert all(b - a - 1 == n for a, b in zip(main_pos, main_pos[1:]))
        assert trace.main_product == np.prod(trace.main_outcomes())
        main_idx = [e.index for e in trace.events if e.observer == MAIN]
        assert tuple(main_idx) == plan.main_order


def test_round_determinism():
    def go():
        stream = RoundStream(123, 4)
        plan = plan_round(2, stream)
        return run_round(random_pure_state(np.random.default_rng(1)), plan, stream)

    assert go().events == go().events


def test_forced_outcomes_length_checked():
    with pytest.raises(ValueError):
        run_round(MAXIMALLY_MIXED, EXAMPLE_PLAN, forced_outcomes=(1, 1))
    with pytest.raises(ValueError):
        run_round(MAXIMALLY_MIXED, EXAMPLE_PLAN)


def test_observer_roles():
    assert ObserverRole.of(0).kind == "main"
    assert ObserverRole.of(3) == ObserverRole("passerby", 3)


def test_mode_parse():
    assert SamplingMode.parse("WithReplacement") is SamplingMode.REPLACE
    assert SamplingMode.parse("distinct") is SamplingMode.DISTINCT
    with pytest.raises(ValueError):
        SamplingMode.parse("other")
