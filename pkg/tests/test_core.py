import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from silopt.core import (Dataset, DissimilarityMatrix, Partition, ValidationError,
                         partition_from_labels, validate_dissimilarity)


def test_relabel_by_first_appearance():
    p = partition_from_labels([2, 2, 1, 1])
    assert p.k == 2
    assert p.labels.tolist() == [1, 1, 2, 2]
    assert p.sizes.tolist() == [2, 2]


def test_single_cluster_allowed():
    p = partition_from_labels([1, 1, 1])
    assert p.k == 1 and p.sizes.tolist() == [3]


def test_gap_closed():
    p = partition_from_labels([1, 3, 3])
    assert p.k == 2 and p.labels.tolist() == [1, 2, 2]


@pytest.mark.parametrize("bad", [[], [0, 1], [-1, 2], [1.5, 2]])
def test_bad_labels(bad):
    with pytest.raises(ValidationError):
        partition_from_labels(bad)


label_vectors = st.lists(st.integers(1, 6), min_size=1, max_size=30)


@given(label_vectors)
def test_canonical_form_idempotent(labels):
    p = partition_from_labels(labels)
    assert partition_from_labels(p.labels) == p
    assert p.sizes.sum() == len(labels)
    assert p.labels.min() == 1 and p.labels.max() == p.k
    # first appearances are 1, 2, 3, ...
    _, first = np.unique(p.labels, return_index=True)
    assert np.all(np.diff(first) > 0)


@given(label_vectors, st.permutations(range(1, 7)))
def test_label_permutation_invariance(labels, perm):
    relabelled = [perm[x - 1] for x in labels]
    assert partition_from_labels(labels) == partition_from_labels(relabelled)


def test_partition_is_immutable_value():
    p = partition_from_labels([1, 2, 2])
    with pytest.raises(ValueError):
        p.labels[0] = 5
    assert hash(p) == hash(partition_from_labels([3, 1, 1]))


def test_from_codes_with_room_for_empty():
    p = Partition.from_codes([0, 0, 1], k=3)
    assert p.k == 3 and not p.nonempty
    with pytest.raises(ValidationError):
        Partition.from_codes([0, 1, 2], k=2)


def test_valid_minimal_matrix():
    d = validate_dissimilarity([[0, 1], [1, 0]])
    assert isinstance(d, DissimilarityMatrix) and d.n == 2
    assert not d.values.flags.writeable


@pytest.mark.parametrize("raw, word", [
    ([[0, 1], [2, 0]], "asymmetric"),
    ([[0, -1], [-1, 0]], "negative"),
    ([[1, 1], [1, 0]], "diagonal"),
    ([[0, np.nan], [np.nan, 0]], "non-finite"),
    ([[0, 1, 2], [1, 0, 3]], "square"),
])
def test_invalid_matrices(raw, word):
    with pytest.raises(ValidationError, match=word):
        validate_dissimilarity(raw)


def test_error_names_position():
    raw = np.zeros((3, 3))
    raw[1, 2], raw[2, 1] = 1.0, 2.0
    with pytest.raises(ValidationError, match="row 2, col 3|row 3, col 2"):
        validate_dissimilarity(raw)


def test_tiny_asymmetry_averaged():
    d = validate_dissimilarity([[0, 1.0], [1.0 + 5e-10, 0]])
    assert d.values[0, 1] == d.values[1, 0]


def test_triangle_inequality_not_required():
    validate_dissimilarity([[0, 1, 5], [1, 0, 1], [5, 1, 0]])


def test_subset():
    d = validate_dissimilarity([[0, 1, 2], [1, 0, 3], [2, 3, 0]])
    assert d.subset([0, 2]).values.tolist() == [[0, 2], [2, 0]]


def test_dataset_validation():
    ds = Dataset(np.ones((4, 2)))
    assert (ds.n, ds.p) == (4, 2)
    with pytest.raises(ValidationError):
        Dataset(np.array([[0.0, np.inf]]))
    with pytest.raises(ValidationError):
        Dataset(np.ones((3, 2)), labels=partition_from_labels([1, 2]))
    with pytest.raises(ValueError):
        ds.points[0, 0] = 3.0
