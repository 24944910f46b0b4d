import math

import numpy as np
import pytest

from services.errors import FrameIndexError, InsufficientDataError
from services.keyframes import (
    KeyframeLabel,
    KeyframeParams,
    LandmarkFrame,
    LandmarkStream,
    describe_keyframes,
    extract_keyframes,
    frame_speed,
    load_landmarks,
    save_landmarks,
    stationarity_score,
    stationarity_scores,
)
from services.core.models import Point2D
from tests.conftest import ROOT


# ---------------------------------------------------------------------
# Brute-force reference
# ---------------------------------------------------------------------
def oracle_score(points, t, half_window):
    total, count = 0.0, 0
    for i in range(t - half_window, t + half_window + 1):
        if 1 <= i < len(points):
            du = points[i][0] - points[i - 1][0]
            dv = points[i][1] - points[i - 1][1]
            total += math.sqrt(du * du + dv * dv)
            count += 1
    return total / count


def oracle_keyframes(points, epsilon, half_window, min_interval):
    scores = [oracle_score(points, t, half_window) for t in range(len(points))]
    picks, t = [], 0
    while t < len(points):
        if scores[t] < epsilon:
            run_end = t
            while run_end + 1 < len(points) and scores[run_end + 1] < epsilon:
                run_end += 1
            best = min(range(t, run_end + 1), key=lambda k: (scores[k], k))
            picks.append(best)
            t = run_end + 1
        else:
            t += 1
    kept = []
    for p in picks:
        if not kept or p - kept[-1] >= min_interval:
            kept.append(p)
    return kept


def piecewise_stream(segments, start=(100.0, 100.0)):
    """segments: (frames, du, dv) per frame; returns a confident stream."""
    points = [start]
    for frames, du, dv in segments:
        for _ in range(frames):
            u, v = points[-1]
            points.append((u + du, v + dv))
    return LandmarkStream.from_positions(points), points


# ---------------------------------------------------------------------
# frame_speed / stationarity_score
# ---------------------------------------------------------------------
def test_frame_speed_examples():
    still = LandmarkStream.from_positions([[5, 5]] * 4)
    assert frame_speed(still, 2) == 0.0

    step = LandmarkStream.from_positions([[0, 0], [3, 4], [3, 4]])
    assert frame_speed(step, 1) == pytest.approx(5.0)


def test_frame_speed_matches_formula_on_sinusoid():
    t = np.arange(30)
    points = np.stack([100 + 20 * np.sin(t / 4.0), 80 + 10 * np.cos(t / 3.0)], axis=1)
    stream = LandmarkStream.from_positions(points)
    expected = math.hypot(points[10, 0] - points[9, 0], points[10, 1] - points[9, 1])
    assert frame_speed(stream, 10) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("i", [0, 3, -1])
def test_frame_speed_rejects_out_of_range(i):
    stream = LandmarkStream.from_positions([[0, 0], [1, 0], [2, 0]])
    with pytest.raises(FrameIndexError):
        frame_speed(stream, i)


def test_frame_index_error_is_an_index_error():
    assert issubclass(FrameIndexError, IndexError)


def test_stationarity_score_needs_two_frames():
    with pytest.raises(InsufficientDataError):
        stationarity_score(LandmarkStream.from_positions([[0, 0]]), 0, 3)


def test_stationarity_score_uniform_motion():
    stream = LandmarkStream.from_positions([[i, 0] for i in range(20)])
    assert stationarity_score(stream, 10, 3) == pytest.approx(1.0)
    # clipped at the start: speed positions 1..3 only
    assert stationarity_score(stream, 0, 3) == pytest.approx(1.0)


def test_stationarity_score_hold_centre_is_zero():
    stream, points = piecewise_stream([(20, 5, 0), (20, 0, 0)])
    assert stationarity_score(stream, 30, 3) == 0.0
    for t in range(len(points)):
        assert stationarity_score(stream, t, 3) == pytest.approx(oracle_score(points, t, 3), abs=1e-12)


# ---------------------------------------------------------------------
# extract_keyframes
# ---------------------------------------------------------------------
def test_fast_motion_has_no_keyframes():
    stream, _ = piecewise_stream([(60, 4, 3)])
    assert extract_keyframes(stream) == []


def test_two_stationary_runs():
    # still on frames 10-20 and 50-60
    stream, points = piecewise_stream([(10, 3, 0), (10, 0, 0), (30, 0, 3), (10, 0, 0), (20, -3, 0)])
    params = KeyframeParams(epsilon=0.5, half_window=2, min_interval=15)
    keyframes = extract_keyframes(stream, params)
    assert keyframes == oracle_keyframes(points, 0.5, 2, 15)
    assert len(keyframes) == 2
    assert 10 <= keyframes[0] <= 20 and 50 <= keyframes[1] <= 60


def test_short_run_gives_one_keyframe():
    stream, points = piecewise_stream([(30, 4, 0), (8, 0, 0), (30, 0, 4)])
    params = KeyframeParams(epsilon=1.0, half_window=1, min_interval=15)
    assert extract_keyframes(stream, params) == oracle_keyframes(points, 1.0, 1, 15)
    assert len(extract_keyframes(stream, params)) == 1


def test_matches_brute_force_on_random_streams():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        target = int(rng.integers(49, 500))
        segments = []
        while (used := sum(s[0] for s in segments)) < target:
            frames = min(int(rng.integers(3, 40)), target - used)
            if rng.random() < 0.4:
                segments.append((frames, 0.0, 0.0))
            else:
                segments.append((frames, int(rng.integers(-6, 7)), int(rng.integers(-6, 7))))
        stream, points = piecewise_stream(segments)
        epsilon = float(rng.uniform(0.2, 3.0))
        half_window = int(rng.integers(1, 5))
        min_interval = int(rng.integers(1, 30))
        params = KeyframeParams(epsilon=epsilon, half_window=half_window, min_interval=min_interval)

        keyframes = extract_keyframes(stream, params)
        assert keyframes == oracle_keyframes(points, epsilon, half_window, min_interval)
        scores = stationarity_scores(stream, params)
        assert all(scores[k] < epsilon for k in keyframes)
        assert all(b - a >= min_interval for a, b in zip(keyframes, keyframes[1:]))


def test_translation_invariance():
    stream, points = piecewise_stream([(15, 3, 1), (20, 0, 0), (15, -2, 2), (20, 0, 0)])
    shifted = LandmarkStream.from_positions(np.asarray(points) + np.array([123.0, -45.0]))
    params = KeyframeParams(epsilon=1.0, half_window=2, min_interval=10)
    assert extract_keyframes(shifted, params) == extract_keyframes(stream, params)


def test_candidate_set_grows_with_epsilon():
    rng = np.random.default_rng(3)
    stream = LandmarkStream.from_positions(np.cumsum(rng.normal(0, 2, size=(200, 2)), axis=0))
    scores = np.array(stationarity_scores(stream, KeyframeParams(half_window=2)))
    previous = set()
    for epsilon in (0.5, 1.0, 2.0, 4.0, 8.0):
        candidates = set(np.flatnonzero(scores < epsilon))
        assert previous <= candidates
        previous = candidates


def test_frame_indices_need_not_start_at_zero():
    stream = LandmarkStream.from_positions([[i * 5, 0] for i in range(10)] + [[45, 0]] * 20, start=100)
    keyframes = extract_keyframes(stream, KeyframeParams(epsilon=1.0, half_window=2, min_interval=5))
    assert keyframes and all(k >= 100 for k in keyframes)


# ---------------------------------------------------------------------
# Low-confidence bridging
# ---------------------------------------------------------------------
def test_low_confidence_frames_are_interpolated():
    frames = tuple(
        LandmarkFrame(i, Point2D(0.0, 0.0) if i == 5 else Point2D(float(i), 0.0), 0.1 if i == 5 else 0.9)
        for i in range(10)
    )
    stream = LandmarkStream(frames)
    np.testing.assert_allclose(stream.positions()[5], [5.0, 0.0])
    assert frame_speed(stream, 5) == pytest.approx(1.0)


def test_stream_rejects_bad_frames():
    with pytest.raises(ValueError):
        LandmarkStream((LandmarkFrame(1, Point2D(0, 0), 1.0), LandmarkFrame(1, Point2D(1, 0), 1.0)))
    with pytest.raises(ValueError):
        LandmarkStream((LandmarkFrame(0, Point2D(0, 0), 1.5),))


# ---------------------------------------------------------------------
# Descriptors and IO
# ---------------------------------------------------------------------
def test_describe_keyframes_uses_label_ranges():
    stream = LandmarkStream.from_positions([[0, 0]] * 40)
    labels = [KeyframeLabel(5, 10, "grasp apple"), KeyframeLabel(20, 25, "release plate")]
    descriptors = describe_keyframes(stream, [7, 15, 25], labels)
    assert [d.label for d in descriptors] == ["grasp apple", "moving", "release plate"]
    assert descriptors[0].to_dict() == {"frame_index": 7, "label": "grasp apple", "wrist": [0.0, 0.0]}


@pytest.mark.parametrize("suffix", ["csv", "json"])
def test_landmark_files_round_trip(tmp_path, suffix):
    frames = tuple(LandmarkFrame(i * 2, Point2D(10.5 + i, 20.25), 0.75) for i in range(5))
    stream = LandmarkStream(frames)
    path = save_landmarks(stream, str(tmp_path / f"demo.{suffix}"))
    assert load_landmarks(path) == stream


def test_bundled_demo_has_one_keyframe_per_hold():
    stream = load_landmarks(f"{ROOT}/data/demos/meal_prep.csv")
    keyframes = extract_keyframes(stream)
    assert len(keyframes) == 10
    holds = [30 + 54 * k for k in range(10)]
    for keyframe, hold in zip(keyframes, holds):
        assert hold <= keyframe < hold + 24
