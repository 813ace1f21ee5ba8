import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_stream
from rtkit.errors import EmptyStream, ParseError, SchemaError
from rtkit.pose import (
    parse_pose_stream,
    select_upper_body,
    validate_stream,
    write_pose_stream,
)
from rtkit.synth import NoiseSpec, gen_pose_stream


def write_csv(path, frames, header="frame,timestamp_ms,id,x,y,z,visibility"):
    lines = [header]
    for fno, ts, landmarks in frames:
        for lid, x, y, z, v in landmarks:
            lines.append(f"{fno},{ts},{lid},{x},{y},{z},{v}")
    path.write_text("\n".join(lines) + "\n")


def simple_frames(n_frames, n_landmarks=33):
    return [
        (i, i * 33.25, [(j, 0.1 * j, 0.2, 0.0, 1.0) for j in range(n_landmarks)])
        for i in range(n_frames)
    ]


def test_parse_minimal_csv(tmp_path):
    path = tmp_path / "p.csv"
    write_csv(path, simple_frames(3))
    stream = parse_pose_stream(path)
    assert stream.n_frames == 3
    assert stream.n_landmarks == 33
    assert stream.source_id == "p"
    assert not stream.timestamps_synthesized


def test_parse_wrong_landmark_count(tmp_path):
    path = tmp_path / "bad.csv"
    frames = simple_frames(2)
    frames[1] = (1, 33.25, frames[1][2][:32])
    write_csv(path, frames)
    with pytest.raises(SchemaError, match="frame 1"):
        parse_pose_stream(path)


def test_parse_bad_row_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    write_csv(path, simple_frames(1))
    with open(path, "a") as fh:
        fh.write("1,33.25,zero,0.1,0.2,0.0,1.0\n")
    with pytest.raises(ParseError, match="line 35"):
        parse_pose_stream(path)


def test_parse_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("frame,timestamp_ms,id,x,y,z,visibility\n")
    with pytest.raises(EmptyStream):
        parse_pose_stream(path)


def test_parse_missing_file():
    with pytest.raises(ParseError):
        parse_pose_stream("/nonexistent/nowhere.csv")


def test_parse_synthesizes_missing_timestamps(tmp_path):
    path = tmp_path / "nots.csv"
    lines = ["frame,id,x,y,z,visibility"]
    for i in range(4):
        lines += [f"{i},{j},0.0,0.0,0.0,1.0" for j in range(33)]
    path.write_text("\n".join(lines) + "\n")
    stream = parse_pose_stream(path, nominal_fps=30.0)
    assert stream.timestamps_synthesized
    assert np.allclose(stream.timestamps_ms, np.arange(4) * 1000.0 / 30.0)
    kinds = {f.kind for f in validate_stream(stream).findings}
    assert "synthesized_timestamps" in kinds


def test_parse_nonmonotonic_timestamps(tmp_path):
    path = tmp_path / "ts.csv"
    frames = simple_frames(3)
    frames[2] = (2, 10.0, frames[2][2])
    write_csv(path, frames)
    with pytest.raises(SchemaError, match="timestamps"):
        parse_pose_stream(path)


def test_sixty_second_recording_roundtrip(tmp_path):
    # 60 s at 30 fps: 1800 frames, last timestamp ~59966.7 ms
    stream, _ = gen_pose_stream(60000, 30.0, [], [], NoiseSpec(0.001), seed=11, source_id="s60")
    assert stream.n_frames == 1800
    assert stream.timestamps_ms[0] == 0.0
    assert abs(stream.timestamps_ms[-1] - 59966.7) < 0.05
    for fmt in ("csv", "jsonl"):
        path = tmp_path / f"s60.{fmt}"
        write_pose_stream(stream, path, format=fmt)
        back = parse_pose_stream(path, format=fmt, source_id="s60")
        assert back == stream


@settings(max_examples=20, deadline=None)
@given(
    n_frames=st.integers(min_value=1, max_value=5),
    seed=st.integers(min_value=0, max_value=2**31),
    fmt=st.sampled_from(["csv", "jsonl"]),
)
def test_roundtrip_property(tmp_path_factory, n_frames, seed, fmt):
    rng = np.random.default_rng(seed)
    stream = make_stream(rng.normal(size=(n_frames, 33, 3)))
    path = tmp_path_factory.mktemp("rt") / f"s.{fmt}"
    write_pose_stream(stream, path, format=fmt)
    assert parse_pose_stream(path, format=fmt, source_id="test") == stream


def test_select_upper_body_keeps_25():
    stream = make_stream(np.random.default_rng(0).normal(size=(5, 33, 3)))
    upper = select_upper_body(stream)
    assert upper.n_landmarks == 25
    assert list(upper.landmark_ids) == list(range(25))
    assert np.array_equal(upper.timestamps_ms, stream.timestamps_ms)
    assert np.array_equal(upper.coords, stream.coords[:, :25])


def test_select_upper_body_idempotent():
    stream = make_stream(np.random.default_rng(1).normal(size=(4, 33, 3)))
    once = select_upper_body(stream)
    assert select_upper_body(once) == once


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31))
def test_lower_body_perturbation_invariance(seed):
    rng = np.random.default_rng(seed)
    coords = rng.normal(size=(6, 33, 3))
    stream = make_stream(coords)
    fuzzed = coords.copy()
    fuzzed[:, 25:, :] = rng.normal(size=(6, 8, 3)) * 100.0
    assert select_upper_body(make_stream(fuzzed)) == select_upper_body(stream)


def test_validate_clean_stream(static_stream):
    assert validate_stream(static_stream).ok


def test_validate_reports_gap():
    ts = np.arange(10) * (1000.0 / 30.0)
    ts[5:] += 1000.0 / 30.0  # one dropped frame before index 5
    stream = make_stream(np.zeros((10, 33, 3)), timestamps=ts)
    findings = validate_stream(stream).of_kind("gap")
    assert len(findings) == 1
    assert findings[0].frame_index == 5


def test_validate_reports_visibility_range():
    vis = np.ones((3, 33))
    vis[1, 7] = 1.2
    stream = make_stream(np.zeros((3, 33, 3)), visibility=vis)
    findings = validate_stream(stream).of_kind("range")
    assert len(findings) == 1
    assert findings[0].frame_index == 1
    assert findings[0].landmark_id == 7
