import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from interplay.core import (
    DomainViolation,
    NonFiniteError,
    Snapshot,
    Status,
    Termination,
    Trajectory,
    sign_matrix,
    sign_of,
    validate_opinion_matrix,
)


@pytest.mark.parametrize(
    "value, tol, expected",
    [(0.0, 1e-9, 0), (-3.2, 1e-9, -1), (5e-10, 1e-9, 0), (2.0, 0.0, 1), (-1e-9, 1e-9, 0)],
)
def test_sign_of(value, tol, expected):
    assert sign_of(value, tol) == expected


def test_sign_of_rejects_negative_tolerance():
    with pytest.raises(ValueError):
        sign_of(1.0, -1.0)


@given(
    st.floats(allow_nan=False, allow_infinity=False),
    st.floats(min_value=0, max_value=1e6, allow_nan=False),
)
def test_sign_of_is_odd(v, tol):
    assert sign_of(-v, tol) == -sign_of(v, tol)


def test_sign_matrix_matches_scalar():
    a = np.array([[0.0, -3.2, 5e-10], [1.0, -1e-12, 2e-9]])
    expected = [[sign_of(v, 1e-9) for v in row] for row in a]
    assert sign_matrix(a, 1e-9).tolist() == expected


def test_validate_accepts_four_agent(four_agent):
    Y = validate_opinion_matrix(four_agent)
    assert Y.shape == (4, 3)
    assert not Y.flags.writeable
    np.testing.assert_array_equal(Y, four_agent)


@pytest.mark.parametrize(
    "entries, row",
    [([[0, 0], [1, 1]], 0), ([[1e-15, 0], [1, 1]], 0), ([[1, 1], [0, 0], [0, 0]], 1)],
)
def test_validate_rejects_zero_rows(entries, row):
    with pytest.raises(DomainViolation) as info:
        validate_opinion_matrix(entries, row_tolerance=1e-12)
    assert info.value.row == row


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_validate_rejects_non_finite(bad):
    with pytest.raises(NonFiniteError):
        validate_opinion_matrix([[1.0, bad], [1.0, 1.0]])


@pytest.mark.parametrize("entries", [[], [[]], [1.0, 2.0]])
def test_validate_rejects_bad_shapes(entries):
    with pytest.raises(ValueError):
        validate_opinion_matrix(entries)


@given(
    st.lists(
        st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=3),
        min_size=1,
        max_size=6,
    )
)
def test_validated_rows_exceed_tolerance(rows):
    try:
        Y = validate_opinion_matrix(rows, row_tolerance=1e-12)
    except DomainViolation:
        assert np.min(np.abs(np.array(rows)).sum(axis=1)) <= 1e-12
    else:
        assert np.min(np.abs(Y).sum(axis=1)) > 1e-12


def test_trajectory_accessors():
    y = np.ones((2, 1))
    traj = Trajectory(
        [Snapshot(0, y), Snapshot(1, y, np.ones((2, 2)), np.full((2, 2), 0.5))],
        Termination(Status.CONVERGED, 0),
    )
    assert len(traj) == 2
    assert traj.steps == [0, 1]
    assert traj.final.t == 1
    assert traj.at(1).W[0, 0] == 0.5
    assert traj.opinions().shape == (2, 2, 1)
    assert traj.appraisals().shape == (1, 2, 2)
    with pytest.raises(KeyError):
        traj.at(5)
