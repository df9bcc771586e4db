import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import silhouette_samples

from conftest import E4, random_instance
from oracles import naive_silhouette
from silopt.core import Partition, ValidationError, partition_from_labels, validate_dissimilarity
from silopt.silhouette import MoveState, asw, build_move_state, silhouette_profile


def test_e4_two_pairs(e4):
    prof = silhouette_profile(e4, partition_from_labels([1, 1, 2, 2]))
    assert prof.a.tolist() == [1, 1, 1, 1]
    assert prof.b.tolist() == [10, 10, 10, 10]
    assert np.allclose(prof.s, 0.9)
    assert prof.asw == pytest.approx(0.9, abs=1e-15)


def test_e4_singleton_gets_zero(e4):
    labels = [1, 2, 2, 2]
    prof = silhouette_profile(e4, partition_from_labels(labels))
    assert prof.s[0] == 0.0
    assert prof.b[0] == 7.0
    assert np.allclose(prof.s, naive_silhouette(E4, labels))
    assert prof.asw == pytest.approx(np.mean(naive_silhouette(E4, labels)))


def test_richness_case_one_value():
    labels = np.array([1, 1, 2, 2, 2, 3, 3])
    D = np.where(labels[:, None] == labels[None, :], 1.0, 2.0)
    np.fill_diagonal(D, 0)
    prof = silhouette_profile(D, partition_from_labels(labels))
    assert np.allclose(prof.s, 0.5) and prof.asw == pytest.approx(0.5)


def test_k1_and_size_mismatch(e4):
    with pytest.raises(ValidationError):
        silhouette_profile(e4, partition_from_labels([1, 1, 1, 1]))
    with pytest.raises(ValidationError):
        silhouette_profile(e4, partition_from_labels([1, 2, 2]))


def test_zero_distances_give_zero_width():
    D = np.zeros((4, 4))
    prof = silhouette_profile(D, partition_from_labels([1, 1, 2, 2]))
    assert np.all(prof.s == 0)


def test_neighbor_ties_lowest_index():
    D = np.array([[0, 1, 3, 3], [1, 0, 3, 3], [3, 3, 0, 6], [3, 3, 6, 0]], dtype=float)
    prof = silhouette_profile(D, partition_from_labels([1, 1, 2, 3]))
    assert prof.neighbor[0] == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 25), st.integers(2, 6), st.integers(0, 10_000))
def test_matches_naive_loops(n, k, seed):
    k = min(k, n)
    D, codes = random_instance(np.random.default_rng(seed), n, k)
    prof = silhouette_profile(D, Partition.from_codes(codes))
    ref = naive_silhouette(D.values, codes)
    assert np.max(np.abs(prof.s - ref)) < 1e-12
    assert np.all(prof.s >= -1) and np.all(prof.s <= 1)
    assert abs(prof.asw - prof.s.mean()) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 30), st.integers(2, 5), st.integers(0, 10_000))
def test_matches_sklearn(n, k, seed):
    k = min(k, n - 1)
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    codes = rng.integers(0, k, size=n)
    codes[:k] = np.arange(k)
    D = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
    prof = silhouette_profile(D, Partition.from_codes(codes))
    assert np.allclose(prof.s, silhouette_samples(D, codes, metric="precomputed"), atol=1e-12)


@pytest.mark.parametrize("eta", [1e-3, 1, 7, 1e4])
def test_scale_invariance_profile(eta):
    D, codes = random_instance(np.random.default_rng(3), 20, 3)
    C = Partition.from_codes(codes)
    s0 = silhouette_profile(D, C).s
    s1 = silhouette_profile(eta * D.values, C).s
    assert np.max(np.abs(s0 - s1)) < 1e-12


# --------------------------------------------------------------- MoveState


def test_move_state_sums(e4):
    st_ = build_move_state(e4, partition_from_labels([1, 1, 2, 2]))
    assert st_.crosssum[0].tolist() == [1, 20]
    assert st_.asw == pytest.approx(0.9)
    st2 = build_move_state(e4, partition_from_labels([1, 2, 2, 2]))
    assert st2.crosssum[0].tolist() == [0, 21]


def test_evaluate_move_examples(e4):
    st_ = build_move_state(e4, partition_from_labels([1, 1, 1, 2]))
    assert st_.evaluate_move(2, 1) == pytest.approx(0.9)
    st2 = build_move_state(e4, partition_from_labels([1, 1, 2, 2]))
    assert st2.evaluate_move(0, 1) < 0.9
    with pytest.raises(ValidationError):
        st2.evaluate_move(0, 0)
    single = build_move_state(e4, partition_from_labels([1, 2, 2, 2]))
    with pytest.raises(ValidationError):
        single.evaluate_move(0, 1)


def test_evaluate_does_not_mutate(e4):
    st_ = build_move_state(e4, partition_from_labels([1, 1, 1, 2]))
    before = st_.crosssum.copy()
    st_.evaluate_move(2, 1)
    st_.candidate_matrix()
    assert np.array_equal(before, st_.crosssum) and st_.moves == 0


def test_e4_sequence_reaches_optimum(e4):
    st_ = build_move_state(e4, partition_from_labels([1, 2, 1, 2]))
    st_.apply_move(1, 0).apply_move(2, 1)
    assert st_.partition == partition_from_labels([1, 1, 2, 2])
    assert st_.asw == pytest.approx(0.9)


def _moved(codes, i, r):
    c = codes.copy()
    c[i] = r
    return c


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 30), st.integers(2, 5), st.integers(0, 10_000), st.booleans())
def test_candidates_match_recomputation(n, k, seed, nonempty):
    k = min(k, n - 1)
    D, codes = random_instance(np.random.default_rng(seed), n, k)
    state = MoveState(D, codes, k, enforce_nonempty=nonempty)
    cand = state.candidate_matrix()
    for i in range(n):
        for r in range(k):
            c = _moved(codes, i, r)
            sizes = np.bincount(c, minlength=k)
            if r == codes[i] or (nonempty and sizes.min() == 0) or np.count_nonzero(sizes) < 2:
                assert cand[i, r] == -np.inf
                continue
            ref = np.mean(naive_silhouette(D.values, c))
            assert abs(cand[i, r] - ref) < 1e-10
            assert abs(state.evaluate_move(i, r) - ref) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(4, 25), st.integers(2, 4), st.integers(0, 10_000))
def test_apply_matches_rebuild_and_involution(n, k, seed):
    rng = np.random.default_rng(seed)
    D, codes = random_instance(rng, n, k)
    state = MoveState(D, codes, k, enforce_nonempty=False)
    origin = state.copy()
    for _ in range(100):
        i = int(rng.integers(n))
        r = int(rng.integers(k))
        if r == state.codes[i] or np.count_nonzero(np.bincount(_moved(state.codes, i, r), minlength=k)) < 2:
            continue
        old = int(state.codes[i])
        state.apply_move(i, r)
        if rng.random() < 0.2:
            state.apply_move(i, old)
    fresh = MoveState(D, state.codes, k, enforce_nonempty=False)
    assert np.allclose(state.crosssum, fresh.crosssum, atol=1e-9)
    assert abs(state.asw - asw(D, state.partition)) < 1e-10
    # symmetry of block sums
    onehot = np.eye(k)[state.codes]
    block = onehot.T @ state.crosssum
    assert np.allclose(block, block.T)
    # a move followed by its reverse restores the state
    movable = np.flatnonzero(np.bincount(origin.codes, minlength=k)[origin.codes] > 1)
    if movable.size == 0:
        return
    i = int(movable[0])
    r = (int(origin.codes[i]) + 1) % k
    probe = origin.copy().apply_move(i, r).apply_move(i, int(origin.codes[i]))
    assert np.allclose(probe.crosssum, origin.crosssum) and np.array_equal(probe.codes, origin.codes)
    assert abs(probe.asw - origin.asw) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 20), st.integers(2, 4), st.integers(1, 5), st.integers(0, 10_000))
def test_insertion_scores_match_recomputation(n, k, h, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n + h, 2))
    full = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
    codes = rng.integers(0, k, size=n)
    codes[:k] = np.arange(k)
    state = MoveState(validate_dissimilarity(full[:n, :n]), codes, k)
    scores = state.insertion_scores(full[:n, n:])
    for x in range(h):
        idx = list(range(n)) + [n + x]
        sub = full[np.ix_(idx, idx)]
        for r in range(k):
            ref = np.mean(naive_silhouette(sub, list(codes) + [r]))
            assert abs(scores[x, r] - ref) < 1e-10
