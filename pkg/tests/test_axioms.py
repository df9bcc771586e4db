import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import E4, random_instance
from oracles import all_partitions, naive_silhouette
from silopt.axioms import (batch_asw, brute_force_optimum, c_transform, consistency_suite,
                           enumerate_partitions, is_c_transformation, isomorphism_suite,
                           random_c_transformation, richness_distance, richness_suite,
                           run_suites, scale_dissimilarity, scale_suite)
from silopt.core import Partition, ValidationError, partition_from_labels
from silopt.silhouette import asw, silhouette_profile

BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140]


@pytest.mark.parametrize("n", range(1, 9))
def test_enumeration_counts_and_order(n):
    rgs = enumerate_partitions(n)
    assert len(rgs) == BELL[n]
    assert [list(r) for r in rgs] == sorted(all_partitions(n))


@pytest.mark.parametrize("n, k", [(5, 2), (6, 3), (7, 7), (4, 1)])
def test_enumeration_fixed_k(n, k):
    rgs = enumerate_partitions(n, k)
    assert [list(r) for r in rgs] == sorted(all_partitions(n, k))


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 9), st.integers(0, 10_000))
def test_batch_asw_matches_naive(n, seed):
    D, _ = random_instance(np.random.default_rng(seed), n, 2)
    rgs = enumerate_partitions(n)[1:40].astype(np.int64)
    ours = batch_asw(D.values, rgs)
    for row, value in zip(rgs, ours):
        assert value == pytest.approx(np.mean(naive_silhouette(D.values, row)), abs=1e-12)
    assert np.isnan(batch_asw(D.values, np.zeros((1, n), dtype=np.int64))[0])


def test_brute_force_e4(e4):
    res = brute_force_optimum(e4)
    assert res.partition == partition_from_labels([1, 1, 2, 2])
    assert res.asw == pytest.approx(0.9) and res.unique
    assert res.evaluated == BELL[4] - 1


def test_brute_force_limits():
    with pytest.raises(ValidationError):
        brute_force_optimum(np.zeros((13, 13)))
    with pytest.raises(ValidationError):
        brute_force_optimum(E4, k=5)


def test_brute_force_reports_ties():
    D = np.ones((4, 4)) - np.eye(4)
    res = brute_force_optimum(D, k=2)
    assert not res.unique


def test_richness_examples():
    d = richness_distance(partition_from_labels([1, 2, 3, 3, 3]))
    assert d.values[0, 1] == pytest.approx(2 + 1 / 50)
    assert asw(d, partition_from_labels([1, 2, 3, 3, 3])) == pytest.approx(0.3)
    C = partition_from_labels([1, 1, 2, 2, 2, 3, 3])
    assert asw(richness_distance(C), C) == pytest.approx(0.5)
    for trivial in ([1, 1, 1], [1, 2, 3]):
        with pytest.raises(ValidationError):
            richness_distance(partition_from_labels(trivial))


@pytest.mark.parametrize("labels", [[1, 1, 2, 2, 3, 3, 3, 3], [1, 2, 3, 4, 4, 4, 4, 4],
                                    [1, 1, 1, 1, 1, 1, 1, 2]])
def test_richness_at_n8(labels):
    C = partition_from_labels(labels)
    res = brute_force_optimum(richness_distance(C))
    assert res.partition == C and res.unique


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 15), st.integers(2, 4), st.integers(0, 10_000), st.floats(1e-4, 1e4))
def test_scale_invariance(n, k, seed, eta):
    D, codes = random_instance(np.random.default_rng(seed), n, min(k, n - 1))
    C = Partition.from_codes(codes)
    assert np.allclose(silhouette_profile(D, C).s, silhouette_profile(scale_dissimilarity(D, eta), C).s,
                       atol=1e-12, rtol=0)


def test_scale_rejects_nonpositive(e4):
    with pytest.raises(ValidationError):
        scale_dissimilarity(e4, 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 15), st.integers(2, 4), st.integers(0, 10_000), st.floats(0.01, 1.0))
def test_consistency(n, k, seed, strength):
    rng = np.random.default_rng(seed)
    D, codes = random_instance(rng, n, min(k, n - 1))
    C = Partition.from_codes(codes)
    E = random_c_transformation(D, C, rng, strength)
    assert is_c_transformation(D, E, C)
    assert asw(E, C) >= asw(D, C) - 1e-12


def test_c_transform_symmetric(e4):
    C = partition_from_labels([1, 1, 2, 2])
    rng = np.random.default_rng(0)
    E = c_transform(e4, C, rng.random((4, 4)), 1 + rng.random((4, 4)))
    assert np.array_equal(E.values, E.values.T)
    with pytest.raises(ValidationError):
        random_c_transformation(e4, C, rng, strength=0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 15), st.integers(0, 10_000))
def test_isomorphism(n, seed):
    rng = np.random.default_rng(seed)
    D, codes = random_instance(rng, n, 2)
    perm = rng.permutation(n)
    p0 = silhouette_profile(D, Partition.from_codes(codes))
    p1 = silhouette_profile(D.values[np.ix_(perm, perm)], Partition.from_codes(codes[perm]))
    assert np.allclose(p0.s[perm], p1.s, atol=1e-12, rtol=0)


def test_small_suites_pass():
    for report in (scale_suite(10), consistency_suite(20), isomorphism_suite(10),
                   richness_suite(range(3, 5))):
        assert report.passed, report.failures
        assert report.line().startswith("PASS")


def test_unknown_suite():
    with pytest.raises(ValidationError):
        run_suites(["nope"])
