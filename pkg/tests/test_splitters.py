import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optcv.errors import DegenerateInput, DimensionError
from optcv.sampling import SeededStream
from optcv.splitters import (
    DependencyMetadata,
    SplitPlan,
    kfold,
    leave_one_group_out,
    network_neighborhood_split,
    non_dependent_cv,
    temporal_block,
)


def assert_valid_partition(plans, n):
    for plan in plans:
        parts = set(plan.train) | set(plan.test) | set(plan.discarded)
        assert len(plan.train) + len(plan.test) + len(plan.discarded) == len(parts)
        assert parts <= set(range(n))
        assert plan.train and plan.test


# --- SplitPlan invariants -------------------------------------------------


def test_split_plan_rejects_overlap_and_empties():
    with pytest.raises(DegenerateInput):
        SplitPlan(train=(0, 1), test=(1, 2), discarded=())
    with pytest.raises(DegenerateInput):
        SplitPlan(train=(), test=(0,), discarded=())
    with pytest.raises(DegenerateInput):
        SplitPlan(train=(0,), test=(), discarded=())
    with pytest.raises(DegenerateInput):
        SplitPlan(train=(0, 0), test=(1,), discarded=())


def test_split_plan_sorts_indices():
    plan = SplitPlan(train=(3, 1), test=(2,), discarded=(0,))
    assert plan.train == (1, 3)


def test_split_plan_csv(tmp_path):
    plan = SplitPlan(train=(0, 2), test=(3,), discarded=(1,), scheme="demo")
    path = tmp_path / "split.csv"
    plan.to_csv(path)
    assert path.read_text().splitlines() == [
        "index,assignment",
        "0,train",
        "1,discarded",
        "2,train",
        "3,test",
    ]


# --- kfold ------------------------------------------------------------------


def test_kfold_basic():
    plans = kfold(10, 5, SeededStream(1))
    assert len(plans) == 5
    assert all(len(p.test) == 2 for p in plans)
    covered = sorted(i for p in plans for i in p.test)
    assert covered == list(range(10))
    assert all(p.discarded == () for p in plans)
    assert_valid_partition(plans, 10)


def test_kfold_leave_one_out():
    plans = kfold(6, 6, SeededStream(2))
    assert len(plans) == 6
    assert all(len(p.test) == 1 for p in plans)


def test_kfold_deterministic_under_seed():
    a = kfold(12, 3, SeededStream(9))
    b = kfold(12, 3, SeededStream(9))
    assert [p.test for p in a] == [p.test for p in b]


def test_kfold_bounds():
    with pytest.raises(DimensionError):
        kfold(5, 1, SeededStream(0))
    with pytest.raises(DimensionError):
        kfold(5, 6, SeededStream(0))


# --- temporal block -----------------------------------------------------------


def test_temporal_block_no_gap():
    plan = temporal_block(100, 0.2, 0)
    assert plan.train == tuple(range(80))
    assert plan.test == tuple(range(80, 100))
    assert plan.discarded == ()


def test_temporal_block_with_gap():
    plan = temporal_block(100, 0.2, 5)
    assert plan.train == tuple(range(75))
    assert plan.discarded == tuple(range(75, 80))
    assert plan.test == tuple(range(80, 100))
    assert max(plan.train) + 5 < min(plan.test)


def test_temporal_block_gap_exhausts_training():
    with pytest.raises(DimensionError):
        temporal_block(100, 0.2, 80)
    with pytest.raises(DimensionError):
        temporal_block(10, 0.95, 0)


# --- non-dependent (gapped block) CV ---------------------------------------------


def test_non_dependent_cv_buffer():
    plans = non_dependent_cv(10, 2, 1)
    first = plans[0]
    assert first.test == tuple(range(5))
    assert first.train == (6, 7, 8, 9)
    assert first.discarded == (5,)
    second = plans[1]
    assert second.test == tuple(range(5, 10))
    assert second.train == (0, 1, 2, 3)
    assert second.discarded == (4,)


def test_non_dependent_cv_zero_gap_is_contiguous_kfold():
    plans = non_dependent_cv(12, 3, 0)
    for plan in plans:
        assert plan.discarded == ()
    tests = [p.test for p in plans]
    assert tests == [tuple(range(4)), tuple(range(4, 8)), tuple(range(8, 12))]


def test_non_dependent_cv_gap_too_wide():
    with pytest.raises(DimensionError):
        non_dependent_cv(10, 2, 6)


# --- leave-one-group-out ------------------------------------------------------


def test_leave_one_group_out_basic():
    plans = leave_one_group_out(["a", "a", "b", "b", "c"])
    assert len(plans) == 3
    assert sorted(len(p.test) for p in plans) == [1, 2, 2]
    for plan in plans:
        labels = np.asarray(["a", "a", "b", "b", "c"])
        assert set(labels[list(plan.train)]) & set(labels[list(plan.test)]) == set()


def test_leave_one_group_out_singletons():
    plans = leave_one_group_out(list(range(5)))
    assert len(plans) == 5
    assert all(len(p.test) == 1 for p in plans)


def test_leave_one_group_out_single_group():
    with pytest.raises(DegenerateInput):
        leave_one_group_out(["a", "a", "a"])


# --- network splits --------------------------------------------------------------


def test_network_split_empty_graph():
    adj = np.zeros((10, 10), dtype=bool)
    plan = network_neighborhood_split(adj, 0.3, buffer=True, stream=SeededStream(4))
    assert plan.discarded == ()
    assert len(plan.test) == 3
    assert len(plan.train) == 7


def test_network_split_complete_graph_exhausts_train():
    adj = ~np.eye(6, dtype=bool)
    with pytest.raises(DegenerateInput):
        network_neighborhood_split(adj, 0.5, buffer=True, stream=SeededStream(4))


def two_clique_adjacency():
    adj = np.zeros((4, 4), dtype=bool)
    adj[0, 1] = adj[1, 0] = True
    adj[2, 3] = adj[3, 2] = True
    return adj


def test_network_split_disconnected_cliques():
    # seed chosen so the sampled test set is exactly one clique; the other
    # clique must then be fully retained with nothing discarded
    adj = two_clique_adjacency()
    for seed in range(50):
        try:
            plan = network_neighborhood_split(adj, 0.5, buffer=True, stream=SeededStream(seed))
        except DegenerateInput:
            # test set straddled both cliques; buffering emptied training
            continue
        assert set(plan.test) in ({0, 1}, {2, 3})
        assert plan.discarded == ()
        assert set(plan.train) == {0, 1, 2, 3} - set(plan.test)
        return
    raise AssertionError("no seed in range produced a single-clique test set")


def test_network_split_buffer_removes_cross_edges():
    rng = np.random.default_rng(0)
    raw = rng.random((15, 15)) < 0.2
    adj = np.triu(raw, 1)
    adj = adj | adj.T
    plan = network_neighborhood_split(adj, 0.25, buffer=True, stream=SeededStream(5))
    assert not adj[np.ix_(plan.train, plan.test)].any()


def test_adjacency_validation():
    with pytest.raises(DegenerateInput):
        network_neighborhood_split(np.triu(np.ones((4, 4)), 1), 0.5, True, SeededStream(0))
    bad_diag = np.eye(4, dtype=bool)
    with pytest.raises(DegenerateInput):
        network_neighborhood_split(bad_diag, 0.5, True, SeededStream(0))


def test_dependency_metadata_validation():
    DependencyMetadata(ordering=(1, 0, 2), groups=("a", "b", "a"))
    with pytest.raises(DegenerateInput):
        DependencyMetadata(ordering=(0, 0, 2))
    with pytest.raises(DimensionError):
        DependencyMetadata(ordering=(0, 1), groups=("a", "b", "c"))


# --- property tests ---------------------------------------------------------------


@settings(max_examples=120)
@given(
    n=st.integers(min_value=4, max_value=60),
    k=st.integers(min_value=2, max_value=8),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_kfold_plans_partition(n, k, seed):
    k = min(k, n)
    plans = kfold(n, k, SeededStream(seed))
    assert_valid_partition(plans, n)
    covered = sorted(i for p in plans for i in p.test)
    assert covered == list(range(n))


@settings(max_examples=120)
@given(
    n=st.integers(min_value=6, max_value=80),
    k=st.integers(min_value=2, max_value=5),
    gap=st.integers(min_value=0, max_value=3),
)
def test_non_dependent_gap_property(n, k, gap):
    try:
        plans = non_dependent_cv(n, k, gap)
    except DimensionError:
        return
    assert_valid_partition(plans, n)
    for plan in plans:
        for t in plan.train:
            assert all(abs(t - s) > gap for s in plan.test)


@settings(max_examples=120)
@given(labels=st.lists(st.integers(min_value=0, max_value=6), min_size=2, max_size=40))
def test_group_plans_never_straddle(labels):
    if len(set(labels)) < 2:
        return
    plans = leave_one_group_out(labels)
    arr = np.asarray(labels)
    assert_valid_partition(plans, len(labels))
    for plan in plans:
        assert set(arr[list(plan.train)]) & set(arr[list(plan.test)]) == set()


@settings(max_examples=120)
@given(
    n=st.integers(min_value=4, max_value=30),
    p=st.floats(min_value=0.05, max_value=0.5),
    frac=st.floats(min_value=0.1, max_value=0.5),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_network_buffer_property(n, p, frac, seed):
    rng = np.random.default_rng(seed)
    adj = np.triu(rng.random((n, n)) < p, 1)
    adj = adj | adj.T
    try:
        plan = network_neighborhood_split(adj, frac, buffer=True, stream=SeededStream(seed))
    except DegenerateInput:
        return
    assert_valid_partition([plan], n)
    assert not adj[np.ix_(plan.train, plan.test)].any()
