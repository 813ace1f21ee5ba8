"""Cumulative upper-body movement velocity from pose streams.

The velocity series is the signal every detector in this package operates
on: per frame pair, the summed Euclidean landmark displacement divided by
the frame duration. Units are input-units per second (per-frame values are
``v / fps``). No smoothing is applied here; the matched filter does that.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GapError, MismatchedLandmarks
from .pose import GAP_TOLERANCE, PoseFrame, PoseStream


def _dim_count(dims: str) -> int:
    if dims == "xy":
        return 2
    if dims == "xyz":
        return 3
    raise ValueError(f"dims must be 'xy' or 'xyz', got {dims!r}")


@dataclass(frozen=True)
class VelocitySample:
    frame_index: int
    t_ms: float
    v: float


@dataclass
class VelocitySeries:
    """Movement speed per frame pair; sample i is stamped at the later frame.

    Length is one less than the source stream. ``fps`` is the effective
    rate implied by the timestamps.
    """

    source_id: str
    fps: float
    frame_index: np.ndarray
    t_ms: np.ndarray
    v: np.ndarray
    dims: str = "xyz"

    def __post_init__(self):
        if len(self.t_ms) != len(self.v) or len(self.frame_index) != len(self.v):
            raise ValueError("inconsistent series arrays")

    def __len__(self) -> int:
        return len(self.v)

    @property
    def frame_ms(self) -> float:
        return 1000.0 / self.fps

    def sample(self, i: int) -> VelocitySample:
        return VelocitySample(int(self.frame_index[i]), float(self.t_ms[i]), float(self.v[i]))


def frame_displacement(prev: PoseFrame, curr: PoseFrame, dims: str = "xyz") -> float:
    """Total pairwise landmark displacement between two frames (input units)."""
    if prev.landmark_ids != curr.landmark_ids:
        raise MismatchedLandmarks(
            f"frames {prev.frame_index} and {curr.frame_index} carry different landmark ids"
        )
    d = _dim_count(dims)
    diff = curr.coords()[:, :d] - prev.coords()[:, :d]
    return float(np.sqrt((diff**2).sum(axis=1)).sum())


def velocity_series(stream: PoseStream, dims: str = "xyz") -> VelocitySeries:
    """Per-frame-pair movement speed for the whole stream.

    Raises GapError when any timestamp delta is outside +/-50% of the
    nominal frame duration; callers may subdivide the stream and retry.
    """
    d = _dim_count(dims)
    if stream.n_frames < 2:
        raise ValueError("need at least 2 frames")
    deltas = np.diff(stream.timestamps_ms)
    nominal = stream.frame_ms
    bad = np.nonzero(np.abs(deltas - nominal) > GAP_TOLERANCE * nominal)[0]
    if bad.size:
        frames = [int(stream.frame_index[i + 1]) for i in bad]
        raise GapError(
            f"{stream.source_id}: {len(frames)} frame gap(s), first before frame {frames[0]}",
            frame_indices=frames,
        )
    step = np.diff(stream.coords[:, :, :d], axis=0)
    disp = np.sqrt((step**2).sum(axis=2)).sum(axis=1)
    v = disp / (deltas / 1000.0)
    fps = 1000.0 / float(np.median(deltas))
    return VelocitySeries(
        source_id=stream.source_id,
        fps=fps,
        frame_index=stream.frame_index[1:].copy(),
        t_ms=stream.timestamps_ms[1:].copy(),
        v=v,
        dims=dims,
    )


def write_velocity_csv(series: VelocitySeries, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "t_ms", "v"])
        for i in range(len(series)):
            w.writerow([int(series.frame_index[i]), repr(float(series.t_ms[i])), repr(float(series.v[i]))])
