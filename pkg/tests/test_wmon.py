import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from conftest import grid
from truthsched.core import ContractViolation, CostMatrix
from truthsched.corpus import GENERATORS_2X2
from truthsched.mechanisms import MaxCost, VCG, WeightedVCG
from truthsched.wmon import (
    GENERATORS,
    WmonViolation,
    generate_triple,
    lemma_tool_check,
    random_restriction_probes,
    restriction_check,
    wmon_check_pair,
    wmon_scan,
    wmon_sum,
)

M = CostMatrix.of


def test_identity_deviation():
    m = M([[1, 2], [3, 1]])
    for mech in (VCG(), WeightedVCG(), MaxCost()):
        for i in range(2):
            total, _, _ = wmon_sum(mech, m, i, m.values[i])
            assert total == 0
            assert wmon_check_pair(mech, m, i, m.values[i]) is None


def test_vcg_single_task():
    total, a, b = wmon_sum(VCG(), M([[1], [2]]), 0, [3])
    assert (a.assignment, b.assignment) == ((0,), (1,))
    assert total == -2


def test_maxcost_violation():
    v = wmon_check_pair(MaxCost(), M([[1], [2]]), 1, [F(1, 2)])
    assert isinstance(v, WmonViolation)
    assert v.total == F(3, 2)
    assert v.to_json()["sum"] == "3/2"


def test_violation_needs_positive_sum():
    m = M([[1], [2]])
    a = VCG()(m)
    with pytest.raises(ContractViolation):
        WmonViolation(0, (F(1),), (F(1),), m, a, a, F(0))


def test_wrong_length_row():
    with pytest.raises(ContractViolation):
        wmon_sum(VCG(), M([[1, 1], [2, 2]]), 0, [1])


pairs = st.integers(2, 3).flatmap(
    lambda n: st.integers(1, 3).flatmap(
        lambda m: st.tuples(
            st.lists(st.lists(grid(1, 16, 4), min_size=m, max_size=m), min_size=n, max_size=n),
            st.lists(grid(1, 16, 4), min_size=m, max_size=m),
            st.integers(0, n - 1),
        )
    )
)


@given(pairs, st.sampled_from([VCG(), WeightedVCG(), MaxCost()]))
def test_sum_symmetric_under_swap(case, mech):
    rows, alt, i = case
    m = M(rows)
    fwd, _, _ = wmon_sum(mech, m, i, alt)
    back, _, _ = wmon_sum(mech, m.with_row(i, alt), i, m.values[i])
    assert fwd == back
    assert (wmon_check_pair(mech, m, i, alt) is None) == (wmon_check_pair(mech, m.with_row(i, alt), i, m.values[i]) is None)


@given(pairs)
def test_vcg_never_violates(case):
    rows, alt, i = case
    assert wmon_check_pair(VCG(), M(rows), i, alt) is None


def test_scan_vcg_clean():
    rep = wmon_scan(VCG(), trials=10_000, seed=5)
    assert rep.passed and rep.trials == 10_000
    assert "no violation found in 10000 trials" in rep.summary()


@pytest.mark.parametrize("gen", GENERATORS)
def test_scan_maxcost_finds_violation(gen):
    rep = wmon_scan(MaxCost(), generator=gen, trials=100, seed=1)
    assert rep.violations >= 1
    assert rep.first.total > 0


def test_scan_rejects_bad_args():
    with pytest.raises(ContractViolation):
        wmon_scan(VCG(), trials=0)
    with pytest.raises(ContractViolation):
        wmon_scan(VCG(), generator="nope")


def test_scan_is_seeded():
    a = wmon_scan(MaxCost(), trials=200, seed=3)
    b = wmon_scan(MaxCost(), trials=200, seed=3)
    assert a.to_json() == b.to_json()


def test_scan_workers_deterministic():
    a = wmon_scan(MaxCost(), trials=60, seed=2, workers=2)
    b = wmon_scan(MaxCost(), trials=60, seed=2, workers=2)
    assert a.to_json() == b.to_json() and a.seeds == [2, 3] and a.trials == 60


def test_generators_respect_shape():
    rng = random.Random(0)
    mech = GENERATORS_2X2["affmin2"](rng)
    for trial in range(30):
        m, i, alt = generate_triple("mixed", mech, rng, trial)
        assert (m.n, m.m) == (2, 2) and len(alt) == 2 and 0 <= i < 2


# --- structured checks ------------------------------------------------------


def test_tool_vcg_lower_winner():
    m = M([[1, 5], [2, 3]])
    assert lemma_tool_check(VCG(), m, 0, {0}, set(), {0: F(1, 2)}, {}) is None


def test_tool_wvcg_raise_t_player():
    m = M([[3], [2], [2]])  # task held by player 1
    assert WeightedVCG()(m).assignment == (1,)
    assert lemma_tool_check(WeightedVCG(), m, 0, set(), {0}, {}, {0: 4}) is None


def test_tool_preconditions():
    m = M([[1, 5], [2, 3]])
    with pytest.raises(ContractViolation):
        lemma_tool_check(VCG(), m, 0, {1}, set(), {1: 1}, {})
    with pytest.raises(ContractViolation):
        lemma_tool_check(VCG(), m, 0, set(), {0}, {}, {0: 1})
    with pytest.raises(ContractViolation):
        lemma_tool_check(VCG(), m, 0, {0}, set(), {0: 2}, {})


def test_tool_maxcost_counterexample_by_search():
    rng = random.Random(0)
    found = None
    for _ in range(200):
        m = M([[rng.randint(1, 9) for _ in range(2)] for _ in range(2)])
        i = rng.randrange(2)
        held = MaxCost()(m).tasks_of(i)
        if not held:
            continue
        j = min(held)
        found = lemma_tool_check(MaxCost(), m, i, {j}, set(), {j: F(m.values[i][j], 2)}, {})
        if found:
            break
    assert found is not None and found.kept_before != found.kept_after


def test_restriction_identity_and_vcg():
    m = M([[1, 2, 3], [3, 2, 1]])
    probes = [(0, m.values[0]), (1, m.values[1])]
    assert restriction_check(VCG(), m, {0}, probes) is None
    probes = random_restriction_probes(m, {1}, 1000, seed=4)
    assert all(p[1][1] == m.values[p[0]][1] for p in probes)
    assert restriction_check(VCG(), m, {1}, probes) is None


def test_restriction_maxcost_and_guard():
    m = M([[1, 2, 3], [3, 2, 1]])
    assert restriction_check(MaxCost(), m, {0}, random_restriction_probes(m, {0}, 200, seed=1)) is not None
    with pytest.raises(ContractViolation):
        restriction_check(VCG(), m, {0}, [(0, (5, 2, 3))])
