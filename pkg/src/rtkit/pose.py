"""Pose-landmark stream ingestion: parsing, validation, upper-body filtering.

Streams are stored column-wise in numpy arrays; ``PoseFrame``/``Landmark``
views are materialized on demand so per-frame access stays cheap for
million-frame batches.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import EmptyStream, ParseError, SchemaError

FULL_BODY_IDS = tuple(range(33))
UPPER_BODY_IDS = tuple(range(25))

# a frame-to-frame delta further than 50% from nominal is a gap/anomaly
GAP_TOLERANCE = 0.5


@dataclass(frozen=True)
class Landmark:
    """One tracked skeletal keypoint."""

    id: int
    x: float
    y: float
    z: float = 0.0
    visibility: float = 1.0


@dataclass(frozen=True)
class PoseFrame:
    """Single-frame view over a stream; landmarks ordered by id."""

    frame_index: int
    timestamp_ms: float
    landmarks: tuple[Landmark, ...]

    @property
    def landmark_ids(self) -> tuple[int, ...]:
        return tuple(lm.id for lm in self.landmarks)

    def coords(self) -> np.ndarray:
        """(n_landmarks, 3) array of x/y/z."""
        return np.array([[lm.x, lm.y, lm.z] for lm in self.landmarks], dtype=float)


@dataclass
class PoseStream:
    """Ordered pose frames for one participant/session.

    ``coords`` has shape (n_frames, n_landmarks, 3); ``visibility``
    (n_frames, n_landmarks). ``landmark_ids`` gives the id of each column.
    """

    source_id: str
    nominal_fps: float
    landmark_ids: np.ndarray
    frame_index: np.ndarray
    timestamps_ms: np.ndarray
    coords: np.ndarray
    visibility: np.ndarray
    has_z: bool = True
    timestamps_synthesized: bool = False

    def __post_init__(self):
        if len(self.frame_index) == 0:
            raise EmptyStream(f"{self.source_id}: stream has no frames")
        n, L = self.coords.shape[:2]
        if self.visibility.shape != (n, L) or len(self.landmark_ids) != L:
            raise SchemaError(f"{self.source_id}: inconsistent array shapes")

    @property
    def n_frames(self) -> int:
        return len(self.frame_index)

    @property
    def n_landmarks(self) -> int:
        return len(self.landmark_ids)

    @property
    def frame_ms(self) -> float:
        return 1000.0 / self.nominal_fps

    def frame(self, i: int) -> PoseFrame:
        lms = tuple(
            Landmark(
                int(self.landmark_ids[j]),
                float(self.coords[i, j, 0]),
                float(self.coords[i, j, 1]),
                float(self.coords[i, j, 2]),
                float(self.visibility[i, j]),
            )
            for j in range(self.n_landmarks)
        )
        return PoseFrame(int(self.frame_index[i]), float(self.timestamps_ms[i]), lms)

    def frames(self) -> Iterator[PoseFrame]:
        for i in range(self.n_frames):
            yield self.frame(i)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PoseStream):
            return NotImplemented
        return (
            self.source_id == other.source_id
            and self.nominal_fps == other.nominal_fps
            and self.has_z == other.has_z
            and np.array_equal(self.landmark_ids, other.landmark_ids)
            and np.array_equal(self.frame_index, other.frame_index)
            and np.array_equal(self.timestamps_ms, other.timestamps_ms)
            and np.array_equal(self.coords, other.coords)
            and np.array_equal(self.visibility, other.visibility)
        )


def stream_from_frames(
    frames: Sequence[PoseFrame],
    source_id: str = "",
    nominal_fps: float = 30.0,
    has_z: bool = True,
) -> PoseStream:
    """Assemble a PoseStream from PoseFrame objects (all same landmark ids)."""
    if not frames:
        raise EmptyStream(f"{source_id}: no frames")
    ids = frames[0].landmark_ids
    for f in frames:
        if f.landmark_ids != ids:
            raise SchemaError(f"frame {f.frame_index}: landmark ids differ from frame {frames[0].frame_index}")
    coords = np.array([[[lm.x, lm.y, lm.z] for lm in f.landmarks] for f in frames], dtype=float)
    vis = np.array([[lm.visibility for lm in f.landmarks] for f in frames], dtype=float)
    return PoseStream(
        source_id=source_id,
        nominal_fps=nominal_fps,
        landmark_ids=np.array(ids, dtype=int),
        frame_index=np.array([f.frame_index for f in frames], dtype=int),
        timestamps_ms=np.array([f.timestamp_ms for f in frames], dtype=float),
        coords=coords,
        visibility=vis,
        has_z=has_z,
    )


# ---------------------------------------------------------------------------
# parsing / writing
# ---------------------------------------------------------------------------

_CSV_REQUIRED = ("frame", "id", "x", "y")


def _finish_frame(frame_no, ts, rows, line_no, expect_count=33):
    if len(rows) != expect_count:
        raise SchemaError(
            f"frame {frame_no}: expected {expect_count} landmarks, got {len(rows)} (near line {line_no})"
        )
    rows.sort(key=lambda r: r[0])
    ids = [r[0] for r in rows]
    if ids != sorted(set(ids)):
        raise SchemaError(f"frame {frame_no}: duplicate landmark ids")
    return frame_no, ts, rows


def parse_pose_stream(
    path: str | Path,
    format: str | None = None,
    nominal_fps: float = 30.0,
    source_id: str | None = None,
) -> PoseStream:
    """Parse a pose file into a validated PoseStream.

    ``format`` is "csv" or "jsonl"; inferred from the suffix when omitted.
    Raises ParseError (bad row, with line number), SchemaError (landmark
    count / ids), EmptyStream. Missing timestamps are synthesized from
    ``nominal_fps`` and flagged on the stream.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such file: {path}")
    if format is None:
        format = "jsonl" if path.suffix in (".jsonl", ".ndjson") else "csv"
    if format not in ("csv", "jsonl"):
        raise ValueError(f"unknown format {format!r}")
    sid = source_id if source_id is not None else path.stem

    if format == "csv":
        frames, has_z, has_ts = _parse_csv(path)
    else:
        frames, has_z, has_ts = _parse_jsonl(path)
    if not frames:
        raise EmptyStream(f"{path}: no frames")

    frame_no = np.array([f[0] for f in frames], dtype=int)
    if np.any(np.diff(frame_no) <= 0):
        bad = int(np.nonzero(np.diff(frame_no) <= 0)[0][0])
        raise SchemaError(f"frame index not strictly increasing at frame {frame_no[bad + 1]}")
    if has_ts:
        ts = np.array([f[1] for f in frames], dtype=float)
        if np.any(np.diff(ts) <= 0):
            bad = int(np.nonzero(np.diff(ts) <= 0)[0][0])
            raise SchemaError(f"timestamps not strictly increasing at frame {frame_no[bad + 1]}")
    else:
        ts = frame_no * (1000.0 / nominal_fps)

    ids = np.array([r[0] for r in frames[0][2]], dtype=int)
    coords = np.empty((len(frames), len(ids), 3), dtype=float)
    vis = np.empty((len(frames), len(ids)), dtype=float)
    for i, (_, _, rows) in enumerate(frames):
        row_ids = [r[0] for r in rows]
        if not np.array_equal(row_ids, ids):
            raise SchemaError(f"frame {frames[i][0]}: landmark ids differ from first frame")
        for j, (_, x, y, z, v) in enumerate(rows):
            coords[i, j] = (x, y, z)
            vis[i, j] = v

    return PoseStream(
        source_id=sid,
        nominal_fps=nominal_fps,
        landmark_ids=ids,
        frame_index=frame_no,
        timestamps_ms=ts,
        coords=coords,
        visibility=vis,
        has_z=has_z,
        timestamps_synthesized=not has_ts,
    )


def _parse_csv(path: Path):
    frames = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return [], False, False
        header = [h.strip() for h in header]
        for col in _CSV_REQUIRED:
            if col not in header:
                raise ParseError(f"missing column {col!r} in header", line=1)
        col = {name: header.index(name) for name in header}
        has_z = "z" in col
        has_ts = "timestamp_ms" in col
        has_vis = "visibility" in col

        cur_no, cur_ts, rows = None, None, []
        for line_no, raw in enumerate(reader, start=2):
            if not raw or all(not c.strip() for c in raw):
                continue
            try:
                fno = int(raw[col["frame"]])
                ts = float(raw[col["timestamp_ms"]]) if has_ts else 0.0
                lid = int(raw[col["id"]])
                x = float(raw[col["x"]])
                y = float(raw[col["y"]])
                z = float(raw[col["z"]]) if has_z else 0.0
                v = float(raw[col["visibility"]]) if has_vis else 1.0
            except (ValueError, IndexError) as exc:
                raise ParseError(f"bad row: {exc}", line=line_no) from exc
            if cur_no is None:
                cur_no, cur_ts = fno, ts
            elif fno != cur_no:
                frames.append(_finish_frame(cur_no, cur_ts, rows, line_no))
                cur_no, cur_ts, rows = fno, ts, []
            rows.append((lid, x, y, z, v))
        if cur_no is not None:
            frames.append(_finish_frame(cur_no, cur_ts, rows, line_no if frames or rows else 1))
    return frames, has_z, has_ts


def _parse_jsonl(path: Path):
    frames = []
    has_z = has_ts = True
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON: {exc.msg}", line=line_no) from exc
            try:
                fno = int(obj["frame"])
                if "timestamp_ms" in obj:
                    ts = float(obj["timestamp_ms"])
                else:
                    has_ts, ts = False, 0.0
                rows = []
                for lm in obj["landmarks"]:
                    if "z" not in lm:
                        has_z = False
                    rows.append(
                        (
                            int(lm["id"]),
                            float(lm["x"]),
                            float(lm["y"]),
                            float(lm.get("z", 0.0)),
                            float(lm.get("v", 1.0)),
                        )
                    )
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad frame object: {exc}", line=line_no) from exc
            frames.append(_finish_frame(fno, ts, rows, line_no))
    return frames, has_z, has_ts


def write_pose_stream(stream: PoseStream, path: str | Path, format: str | None = None) -> None:
    """Write a stream back out; round-trips exactly through parse_pose_stream."""
    path = Path(path)
    if format is None:
        format = "jsonl" if path.suffix in (".jsonl", ".ndjson") else "csv"
    if format == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["frame", "timestamp_ms", "id", "x", "y", "z", "visibility"])
            for i in range(stream.n_frames):
                for j in range(stream.n_landmarks):
                    w.writerow(
                        [
                            int(stream.frame_index[i]),
                            repr(float(stream.timestamps_ms[i])),
                            int(stream.landmark_ids[j]),
                            repr(float(stream.coords[i, j, 0])),
                            repr(float(stream.coords[i, j, 1])),
                            repr(float(stream.coords[i, j, 2])),
                            repr(float(stream.visibility[i, j])),
                        ]
                    )
    elif format == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for i in range(stream.n_frames):
                obj = {
                    "frame": int(stream.frame_index[i]),
                    "timestamp_ms": float(stream.timestamps_ms[i]),
                    "landmarks": [
                        {
                            "id": int(stream.landmark_ids[j]),
                            "x": float(stream.coords[i, j, 0]),
                            "y": float(stream.coords[i, j, 1]),
                            "z": float(stream.coords[i, j, 2]),
                            "v": float(stream.visibility[i, j]),
                        }
                        for j in range(stream.n_landmarks)
                    ],
                }
                fh.write(json.dumps(obj) + "\n")
    else:
        raise ValueError(f"unknown format {format!r}")


# ---------------------------------------------------------------------------
# filtering / validation
# ---------------------------------------------------------------------------


def select_upper_body(stream: PoseStream) -> PoseStream:
    """Keep only landmarks 0..24. Pure filter; idempotent; order preserved."""
    keep = np.isin(stream.landmark_ids, UPPER_BODY_IDS)
    return PoseStream(
        source_id=stream.source_id,
        nominal_fps=stream.nominal_fps,
        landmark_ids=stream.landmark_ids[keep].copy(),
        frame_index=stream.frame_index.copy(),
        timestamps_ms=stream.timestamps_ms.copy(),
        coords=stream.coords[:, keep].copy(),
        visibility=stream.visibility[:, keep].copy(),
        has_z=stream.has_z,
        timestamps_synthesized=stream.timestamps_synthesized,
    )


@dataclass(frozen=True)
class Finding:
    kind: str  # gap | timestamp | range | synthesized_timestamps
    frame_index: int
    detail: str
    landmark_id: int | None = None


@dataclass
class ValidationReport:
    source_id: str
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def of_kind(self, kind: str) -> list[Finding]:
        return [f for f in self.findings if f.kind == kind]


def validate_stream(stream: PoseStream) -> ValidationReport:
    """Report frame gaps, timestamp anomalies and out-of-range values.

    The stream is never modified; gaps are reported, not interpolated.
    """
    report = ValidationReport(stream.source_id)
    nominal = stream.frame_ms
    deltas = np.diff(stream.timestamps_ms)
    for i in np.nonzero(np.abs(deltas - nominal) > GAP_TOLERANCE * nominal)[0]:
        kind = "gap" if deltas[i] > nominal else "timestamp"
        report.findings.append(
            Finding(
                kind,
                int(stream.frame_index[i + 1]),
                f"delta {deltas[i]:.3f} ms vs nominal {nominal:.3f} ms before frame {int(stream.frame_index[i + 1])}",
            )
        )
    bad_vis = np.argwhere((stream.visibility < 0.0) | (stream.visibility > 1.0))
    for i, j in bad_vis:
        report.findings.append(
            Finding(
                "range",
                int(stream.frame_index[i]),
                f"visibility {stream.visibility[i, j]!r} outside [0, 1]",
                landmark_id=int(stream.landmark_ids[j]),
            )
        )
    bad_coord = np.argwhere(~np.isfinite(stream.coords).all(axis=2))
    for i, j in bad_coord:
        report.findings.append(
            Finding(
                "range",
                int(stream.frame_index[i]),
                "non-finite coordinate",
                landmark_id=int(stream.landmark_ids[j]),
            )
        )
    if stream.timestamps_synthesized:
        report.findings.append(
            Finding("synthesized_timestamps", int(stream.frame_index[0]), "timestamps synthesized from nominal fps")
        )
    return report
