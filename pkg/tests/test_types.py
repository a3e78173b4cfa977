import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pressfit.types import (
    ContactSide,
    Demonstration,
    DemoSample,
    Feedback,
    FeedbackSource,
    Pose,
    RunRecord,
    Wrench,
    mirror_y,
    pose_distance,
    wrench_log_from_csv,
    wrench_log_to_csv,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
vec3 = st.lists(finite, min_size=3, max_size=3)


def test_pose_defaults_to_identity_orientation():
    p = Pose(np.array([1.0, 2.0, 3.0]))
    assert np.array_equal(p.orientation, [1.0, 0.0, 0.0, 0.0])


def test_pose_normalizes_quaternion():
    p = Pose(np.zeros(3), np.array([2.0, 0.0, 0.0, 0.0]))
    assert np.allclose(np.linalg.norm(p.orientation), 1.0)


def test_pose_rejects_zero_quaternion():
    with pytest.raises(ValueError):
        Pose(np.zeros(3), np.zeros(4))


def test_wrench_rejects_non_finite():
    with pytest.raises(ValueError):
        Wrench(np.array([np.nan, 0, 0]), np.zeros(3))


def test_wrench_array_channel_order():
    w = Wrench([1, 2, 3], [4, 5, 6])
    assert np.array_equal(w.as_array(), [1, 2, 3, 4, 5, 6])


def test_demo_sample_rejects_negative_stiffness():
    with pytest.raises(ValueError):
        DemoSample(np.zeros(3), np.zeros(3), np.array([-1.0, 0, 0]))


def test_demonstration_requires_samples():
    with pytest.raises(ValueError):
        Demonstration(samples=(), dt=0.1)


def test_feedback_validate_cap():
    Feedback(np.array([1.0, 0, 0])).validate(1.0)
    with pytest.raises(ValueError):
        Feedback(np.array([1.5, 0, 0])).validate(1.0)


def test_contact_side_opposite():
    assert ContactSide.LEFT.opposite() is ContactSide.RIGHT
    assert ContactSide.RIGHT.opposite() is ContactSide.LEFT


def test_run_record_rejects_non_increasing_times():
    p = Pose(np.zeros(3))
    with pytest.raises(ValueError):
        RunRecord([(0.0, p), (0.0, p)], [], [], False, 2)


@given(a=vec3, b=vec3, c=vec3)
def test_pose_distance_is_a_metric(a, b, c):
    pa, pb, pc = Pose(np.array(a)), Pose(np.array(b)), Pose(np.array(c))
    dab = pose_distance(pa, pb)
    assert dab >= 0.0
    assert dab == pose_distance(pb, pa)
    assert pose_distance(pa, pa) == 0.0
    assert dab <= pose_distance(pa, pc) + pose_distance(pc, pb) + 1e-6


@given(f=vec3, t=vec3)
def test_mirror_y_is_an_involution(f, t):
    w = Wrench(np.array(f), np.array(t))
    back = mirror_y(mirror_y(w))
    assert np.array_equal(back.force, w.force)
    assert np.array_equal(back.torque, w.torque)


def test_mirror_y_flips_expected_channels():
    w = mirror_y(Wrench([1, 2, 3], [4, 5, 6]))
    assert np.array_equal(w.as_array(), [1, -2, 3, -4, 5, -6])


@given(f=vec3, t=vec3)
def test_wrench_json_round_trip_bit_exact(f, t):
    w = Wrench(np.array(f), np.array(t))
    back = Wrench.from_dict(json.loads(json.dumps(w.to_dict())))
    assert back == w


def test_wrench_csv_round_trip_bit_exact():
    rng = np.random.default_rng(3)
    log = [(0.1 * i + rng.uniform(0, 0.01), Wrench(rng.normal(size=3), rng.normal(size=3)))
           for i in range(10)]
    back = wrench_log_from_csv(wrench_log_to_csv(log))
    assert len(back) == len(log)
    for (t0, w0), (t1, w1) in zip(log, back):
        assert t0 == t1
        assert w0 == w1


def test_wrench_csv_rejects_bad_header():
    with pytest.raises(ValueError):
        wrench_log_from_csv("a,b\n1,2\n")


def test_run_record_json_round_trip():
    rng = np.random.default_rng(0)
    rec = RunRecord(
        trajectory=[(0.1 * (i + 1), Pose(rng.normal(size=3))) for i in range(5)],
        wrench_log=[(0.1 * (i + 1), Wrench(rng.normal(size=3), rng.normal(size=3))) for i in range(5)],
        collisions=[],
        success=True,
        ticks=5,
    )
    back = RunRecord.from_json(rec.to_json())
    assert back.success and back.ticks == 5
    assert back.trajectory[3][1] == rec.trajectory[3][1]
    assert back.wrench_log[2][1] == rec.wrench_log[2][1]


def test_feedback_round_trip_preserves_source():
    fb = Feedback(np.array([0.3, -0.3, 0.0]), source=FeedbackSource.RECOVERY)
    assert Feedback.from_dict(fb.to_dict()) == fb
    assert Feedback.from_dict(fb.to_dict()).source is FeedbackSource.RECOVERY
