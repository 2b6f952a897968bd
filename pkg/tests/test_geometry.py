import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from muckenhoupt import (
    Ball,
    DimensionMismatch,
    Hyperplane,
    InvalidParameter,
    PointSet,
    Shell,
    Sphere,
    distance_to_set,
    proof_inclusions,
)


def test_distance_examples():
    assert distance_to_set(Hyperplane(np.array([1.0, 0.0]), 0.0), [3.0, 4.0]) == 3.0
    assert distance_to_set(Sphere(np.zeros(3), 1.0), [2.0, 0.0, 0.0]) == 1.0
    assert distance_to_set(PointSet(np.array([[0.0, 0.0], [10.0, 0.0]])), [1.0, 0.0]) == 1.0


def test_distance_batch_shape():
    s = Sphere(np.zeros(2), 1.0)
    out = distance_to_set(s, np.array([[0.0, 0.0], [3.0, 0.0]]))
    np.testing.assert_allclose(out, [1.0, 2.0])


def test_distance_dim_mismatch():
    with pytest.raises(DimensionMismatch):
        distance_to_set(Sphere(np.zeros(3), 1.0), [1.0, 0.0])


def test_invalid_shapes():
    with pytest.raises(InvalidParameter):
        Ball(np.zeros(2), 0.0)
    with pytest.raises(InvalidParameter):
        Shell(np.zeros(2), 2.0, 1.0)
    with pytest.raises(InvalidParameter):
        Hyperplane(np.array([1.0, 1.0]), 0.0)
    with pytest.raises(InvalidParameter):
        Ball(np.array([np.nan, 0.0]), 1.0)


def test_ball_volume():
    assert Ball(np.zeros(2), 2.0).volume == pytest.approx(4 * np.pi)
    assert Ball(np.zeros(3), 1.0).volume == pytest.approx(4 * np.pi / 3)
    assert Shell(np.zeros(2), 1.0, 2.0).volume == pytest.approx(3 * np.pi)


_sets = st.sampled_from(
    [
        Hyperplane(np.array([0.6, 0.8]), 0.5),
        Sphere(np.array([1.0, -1.0]), 2.0),
        PointSet(np.array([[0.0, 0.0], [3.0, 1.0], [-2.0, 4.0]])),
    ]
)
_pt = st.tuples(st.floats(-50, 50), st.floats(-50, 50))


@settings(max_examples=100, deadline=None)
@given(s=_sets, x=_pt, y=_pt)
def test_distance_is_1_lipschitz(s, x, y):
    dx, dy = distance_to_set(s, x), distance_to_set(s, y)
    assert abs(dx - dy) <= np.linalg.norm(np.subtract(x, y)) * (1 + 1e-12) + 1e-12


def test_inclusions_identical_observers():
    rep = proof_inclusions([0.0, 0.0], [0.0, 0.0], 1.0)
    assert rep.all_hold


def test_inclusions_large_radius():
    rep = proof_inclusions([0.0, 0.0], [1.0, 0.0], 10.0)
    assert rep.inclusion_1 and rep.inclusion_2 and rep.inclusion_3 and rep.inclusion_4


def test_inclusion_3_fails_for_small_radius():
    rep = proof_inclusions([0.0, 0.0], [1.0, 0.0], 0.5)
    assert not rep.inclusion_3


@settings(max_examples=20, deadline=None)
@given(
    x2=st.tuples(st.floats(-3, 3), st.floats(-3, 3)).filter(lambda t: np.hypot(*t) > 0.1),
    scale=st.floats(2.0, 50.0),
)
def test_inclusions_hold_beyond_threshold(x2, scale):
    dist = float(np.hypot(*x2))
    rep = proof_inclusions([0.0, 0.0], list(x2), scale * dist, n_samples=2000)
    assert rep.threshold == pytest.approx(2 * dist)
    assert rep.all_hold
