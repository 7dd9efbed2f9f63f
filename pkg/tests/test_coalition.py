import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jurisdictions import (
    Coalition,
    Instance,
    InstanceTooLarge,
    ProjectCostSpec,
    egalitarian_cost,
    enumerate_coalitions,
    evaluate,
    project_cost,
    rank_coalitions,
)
from jurisdictions.location import transport_costs

from oracles import random_instance, subsets

S = Coalition.of


def test_project_cost_kinds(six):
    for c in enumerate_coalitions(six):
        assert project_cost(c, six) == 1.0
    by_size = Instance.from_peaks([0, 1, 2], project_cost=ProjectCostSpec.by_size([1, 2, 3]))
    assert project_cost(S([1, 3]), by_size) == 2.0
    table = Instance.from_peaks([0, 1, 2], project_cost=ProjectCostSpec.table({S([1, 2]): 5}, ProjectCostSpec.constant(1)))
    assert project_cost(S([1, 2]), table) == 5.0
    assert project_cost(S([1, 3]), table) == 1.0


def test_project_cost_rejects_foreign_agents(six):
    with pytest.raises(ValueError):
        project_cost(S([7]), six)


@pytest.mark.parametrize(
    "members, expected",
    [
        ([4, 5, 6], 1 / 3),
        ([1, 2, 3], 2.9 / 3),
        ([3, 4, 5, 6], 0.8),
        ([2, 3], 0.5),
        ([1], 1.0),
        ([5], 1.0),
    ],
)
def test_egalitarian_cost_six_agents(six, members, expected):
    assert egalitarian_cost(S(members), six) == pytest.approx(expected, abs=1e-12)


def test_evaluate_pair(six):
    ev = evaluate(S([2, 3]), six)
    assert ev.egalitarian_cost == pytest.approx(0.5)
    assert ev.tax_shares == pytest.approx({2: 0.5, 3: 0.5})
    assert sum(ev.tax_shares.values()) == pytest.approx(1.0, abs=1e-9)


def test_evaluate_subsidy(six):
    ev = evaluate(S([1, 2, 3]), six)
    assert ev.location == pytest.approx((1.9,))
    assert ev.transport_total == pytest.approx(1.9)
    assert ev.egalitarian_cost == pytest.approx(0.9666666666666667)
    assert ev.tax_shares[1] == pytest.approx(2.9 / 3 - 1.9)
    assert ev.tax_shares[1] < 0
    assert ev.tax_shares[2] == ev.tax_shares[3] == pytest.approx(2.9 / 3)
    assert sum(ev.tax_shares.values()) == pytest.approx(1.0, abs=1e-9)


def test_evaluate_singleton(six):
    ev = evaluate(S([1]), six)
    assert ev.tax_shares == {1: 1.0}
    assert ev.egalitarian_cost == 1.0


def test_enumerate_coalitions():
    assert [str(c) for c in enumerate_coalitions(Instance.from_peaks([0, 1]))] == ["1", "2", "1,2"]
    assert len(list(enumerate_coalitions(Instance.from_peaks(range(6))))) == 63
    with pytest.raises(InstanceTooLarge):
        enumerate_coalitions(Instance.from_peaks(range(21)))
    with pytest.raises(InstanceTooLarge):
        rank_coalitions(Instance.from_peaks(range(21)))


def test_rank_six_agents(six):
    ranking = rank_coalitions(six)
    assert len(ranking) == 63
    assert ranking[0][0] == S([4, 5, 6])
    assert ranking[0][1] == pytest.approx(1 / 3)
    pos = {c: k for k, (c, _) in enumerate(ranking)}
    assert pos[S([2, 3])] < pos[S([1])]
    costs = [v for _, v in ranking]
    assert costs == sorted(costs)
    # exhaustive re-evaluation of every subset agrees with the table
    for members in subsets(6):
        c = S(members)
        assert ranking[pos[c]][1] == pytest.approx(egalitarian_cost(c, six), abs=1e-12)


def test_rank_ties_by_bitmask(six):
    ranking = rank_coalitions(six)
    half = [c for c, v in ranking if abs(v - 0.5) < 1e-12]
    assert half == sorted(half, key=lambda c: c.mask)
    assert half[0] == S([2, 3])


def test_rank_single_agent():
    inst = Instance.from_peaks([3.0], project_cost=2.5)
    assert rank_coalitions(inst) == [(S([1]), 2.5)]


def _check_accounting(inst, c):
    ev = evaluate(c, inst)
    d = transport_costs(inst.coalition_points(c), np.array(ev.location), inst.alpha)
    assert sum(ev.tax_shares.values()) == pytest.approx(ev.project_cost, abs=1e-9)
    total = sum(ev.tax_shares[i] + di for i, di in zip(c.members, d))
    assert total == pytest.approx(ev.project_cost + ev.transport_total, abs=1e-9)
    for i, di in zip(c.members, d):
        assert abs(ev.tax_shares[i] + di - ev.egalitarian_cost) <= 1e-12
    assert ev.egalitarian_cost == (ev.project_cost + ev.transport_total) / len(c)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 10),
    st.integers(1, 3),
    st.sampled_from([1.0, 2.0]),
    st.sampled_from(["constant", "by_size", "table"]),
    st.integers(0, 2**32 - 1),
)
def test_budget_balance_and_equal_burden(n, k, alpha, g_kind, seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n, k, alpha, g_kind)
    for m in rng.integers(1, 2**n, size=5):
        _check_accounting(inst, Coalition(int(m)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_singleton_cost_is_project_cost(n, seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n, 2, 1.0, "by_size")
    for i in range(1, n + 1):
        assert egalitarian_cost(S([i]), inst) == project_cost(S([i]), inst)


def test_rank_monotone_random():
    rng = np.random.default_rng(3)
    inst = random_instance(rng, 7, 2, 1.0, "by_size")
    costs = [v for _, v in rank_coalitions(inst)]
    assert all(a <= b for a, b in zip(costs, costs[1:]))
