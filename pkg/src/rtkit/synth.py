"""Seeded synthetic data: pose streams with known reaction onsets, and SRT
record sets drawn from cell parameters.

Pose streams are the ground-truth oracle for the detector: each burst moves
a few landmarks along fixed directions with an erf-shaped displacement
profile, so the induced velocity pulse is an exact Gaussian bump of chosen
onset, width and amplitude on top of baseline micro-motion (a per-landmark
random walk, the usual postural-sway stand-in).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import erf, i0e, i1e

from .errors import BadParams, SpecError
from .pose import PoseStream
from .stats import Method, ReactionRecord, Setting

# mean / std of the norm of a standard normal vector, by dimension
_NORM_MEAN = {2: math.sqrt(math.pi / 2.0), 3: 2.0 * math.sqrt(2.0 / math.pi)}
_NORM_STD = {2: math.sqrt(2.0 - math.pi / 2.0), 3: math.sqrt(3.0 - 8.0 / math.pi)}

SRT_FLOOR_MS = 50.0  # physiological floor for generated reaction times


@dataclass(frozen=True)
class BurstSpec:
    """One injected reaction: a Gaussian velocity pulse after a warning.

    ``onset_ms`` is the pattern start relative to the warning. By default
    the pulse peaks ``4 * burst_sigma_ms`` after the onset (the pulse spans
    eight sigmas, mirroring the detector's kernel family); pass
    ``center_offset_ms`` to pin the peak elsewhere, e.g. at half the
    kernel duration when testing width-mismatch robustness.
    """

    onset_ms: float
    burst_sigma_ms: float
    burst_amplitude: float  # peak velocity, input units / second
    affected_landmarks: tuple[int, ...] = (15, 16)
    center_offset_ms: float | None = None

    def __post_init__(self):
        if self.onset_ms < 0:
            raise SpecError("onset_ms must be >= 0")
        if self.burst_amplitude <= 0 or self.burst_sigma_ms <= 0:
            raise SpecError("burst amplitude and sigma must be positive")
        if not self.affected_landmarks or any(not 0 <= i <= 24 for i in self.affected_landmarks):
            raise SpecError("affected_landmarks must be a nonempty subset of 0..24")

    @property
    def center_ms(self) -> float:
        off = self.center_offset_ms if self.center_offset_ms is not None else 4.0 * self.burst_sigma_ms
        return self.onset_ms + off


@dataclass(frozen=True)
class NoiseSpec:
    """Baseline micro-motion of every landmark: a random walk with per-frame
    step sigma in input units (postural sway), giving a white velocity-noise
    floor. Optional private seed decouples the noise draw from the burst
    geometry draw."""

    sigma: float
    seed: int | None = None

    def __post_init__(self):
        if self.sigma < 0:
            raise SpecError("noise sigma must be >= 0")


@dataclass(frozen=True)
class BurstTruth:
    """Ground truth for one injected burst."""

    warning_t_ms: float
    onset_ms: float
    center_abs_ms: float
    sigma_ms: float
    amplitude: float
    affected_landmarks: tuple[int, ...]


def _base_pose(n_landmarks: int = 33) -> np.ndarray:
    # fixed resting layout: a 6-wide grid in normalized image coordinates
    ids = np.arange(n_landmarks)
    x = 0.3 + 0.4 * (ids % 6) / 5.0
    y = 0.2 + 0.6 * (ids // 6) / 5.0
    return np.stack([x, y, np.zeros(n_landmarks)], axis=1)


def velocity_noise_std(noise_sigma: float, n_landmarks: int, fps: float, dims: str = "xyz") -> float:
    """Analytic std of the noise-only velocity series.

    Each frame-pair displacement per landmark is the norm of one i.i.d.
    walk step with per-axis std ``noise_sigma``; the cumulative velocity is
    their sum over landmarks divided by the frame duration.
    """
    d = 3 if dims == "xyz" else 2
    return math.sqrt(n_landmarks) * noise_sigma * _NORM_STD[d] * fps


def velocity_noise_mean(noise_sigma: float, n_landmarks: int, fps: float, dims: str = "xyz") -> float:
    d = 3 if dims == "xyz" else 2
    return n_landmarks * noise_sigma * _NORM_MEAN[d] * fps


def _noncentral_norm_mean(u: np.ndarray, s: float, d: int) -> np.ndarray:
    """E||N(u*e, s^2*I_d)|| for d in {2, 3}."""
    u = np.asarray(u, dtype=float)
    if d == 3:
        safe = np.maximum(u, 1e-300)
        return s * math.sqrt(2.0 / math.pi) * np.exp(-(u**2) / (2 * s**2)) + (
            safe + s**2 / safe
        ) * erf(safe / (math.sqrt(2.0) * s))
    x = u**2 / (4.0 * s**2)
    return s * math.sqrt(math.pi / 2.0) * ((1.0 + 2.0 * x) * i0e(x) + 2.0 * x * i1e(x))


def _compensate_steps(steps: np.ndarray, step_sigma: float, d: int) -> np.ndarray:
    """Per-frame step sizes whose expected norm under jitter adds exactly
    ``steps`` on top of the jitter-only pedestal.

    Landmark speed is the norm of (intended step + jitter step): the norm
    folds part of the intended motion into the pedestal, so raw steps
    would under-deliver the pulse amplitude. Inverts the noncentral-norm
    mean on a dense monotone grid. ``step_sigma`` is the per-axis std of
    one jitter step.
    """
    if step_sigma == 0.0 or not steps.size or steps.max() <= 0:
        return steps
    pedestal = float(_noncentral_norm_mean(np.zeros(1), step_sigma, d)[0])
    hi = float(steps.max()) + 8.0 * step_sigma
    grid_u = np.linspace(0.0, hi, 4096)
    grid_gain = _noncentral_norm_mean(grid_u, step_sigma, d) - pedestal
    return np.interp(steps, grid_gain, grid_u)


def _normalize_bursts(warning_times, bursts) -> list[list[BurstSpec]]:
    if isinstance(bursts, BurstSpec):
        return [[bursts] for _ in warning_times]
    bursts = list(bursts)
    if len(bursts) != len(warning_times):
        raise SpecError(f"{len(bursts)} burst entries for {len(warning_times)} warnings")
    out = []
    for entry in bursts:
        if entry is None:
            out.append([])
        elif isinstance(entry, BurstSpec):
            out.append([entry])
        else:
            out.append(list(entry))
    return out


def gen_pose_stream(
    duration_ms: float,
    fps: float,
    warning_times: Sequence[float],
    bursts,
    noise: NoiseSpec,
    seed: int,
    source_id: str = "synth",
    dims: str = "xyz",
) -> tuple[PoseStream, list[BurstTruth]]:
    """Synthesize a pose stream with known injected reactions.

    ``bursts`` is a single BurstSpec (re-injected at every warning) or one
    entry per warning (BurstSpec, list of BurstSpec, or None). Returns the
    stream together with the ground-truth burst list. Deterministic for a
    given seed. Raises SpecError for bursts that overlap or spill outside
    the recording.
    """
    if duration_ms <= 0 or fps <= 0:
        raise SpecError("duration and fps must be positive")
    frame_ms = 1000.0 / fps
    n = int(round(duration_ms / frame_ms))
    if n < 2:
        raise SpecError("duration too short")
    d = 3 if dims == "xyz" else 2
    per_warning = _normalize_bursts(warning_times, bursts)

    rng = np.random.default_rng(seed)
    noise_rng = np.random.default_rng(noise.seed) if noise.seed is not None else rng

    t_ms = np.arange(n) * frame_ms
    coords = np.tile(_base_pose(), (n, 1, 1))

    truths: list[BurstTruth] = []
    spans: list[tuple[float, float]] = []
    for w_t, specs in zip(warning_times, per_warning):
        for spec in specs:
            center = w_t + spec.center_ms
            lo, hi = center - 4.0 * spec.burst_sigma_ms, center + 4.0 * spec.burst_sigma_ms
            if lo < 0 or hi > duration_ms:
                raise SpecError(
                    f"burst support [{lo:.1f}, {hi:.1f}] ms outside recording of {duration_ms} ms"
                )
            for plo, phi in spans:
                if lo < phi and plo < hi:
                    raise SpecError("overlapping bursts")
            spans.append((lo, hi))

            group = spec.affected_landmarks
            # unit directions, one per affected landmark, fixed for the burst
            dirs = rng.normal(size=(len(group), d))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            # displacement profile whose time derivative is the target
            # Gaussian speed (amplitude split evenly across the group)
            sigma_s = spec.burst_sigma_ms / 1000.0
            z = (t_ms - center) / (math.sqrt(2.0) * spec.burst_sigma_ms)
            profile = (spec.burst_amplitude / len(group)) * sigma_s * math.sqrt(math.pi / 2.0) * (1.0 + erf(z))
            steps = _compensate_steps(np.diff(profile), noise.sigma, d)
            walk = np.concatenate([[0.0], np.cumsum(steps)])
            for gi, lid in enumerate(group):
                coords[:, lid, :d] += walk[:, None] * dirs[gi]
            truths.append(
                BurstTruth(
                    warning_t_ms=float(w_t),
                    onset_ms=spec.onset_ms,
                    center_abs_ms=center,
                    sigma_ms=spec.burst_sigma_ms,
                    amplitude=spec.burst_amplitude,
                    affected_landmarks=group,
                )
            )

    if noise.sigma > 0:
        steps = noise_rng.normal(0.0, noise.sigma, size=(n - 1, coords.shape[1], d))
        coords[:, :, :d] += np.concatenate(
            [np.zeros((1, coords.shape[1], d)), np.cumsum(steps, axis=0)], axis=0
        )

    stream = PoseStream(
        source_id=source_id,
        nominal_fps=fps,
        landmark_ids=np.arange(33),
        frame_index=np.arange(n),
        timestamps_ms=t_ms,
        coords=coords,
        visibility=np.ones((n, 33)),
        has_z=(d == 3),
    )
    return stream, truths


def write_truth_sidecar(truths: Sequence[BurstTruth], seed: int, path: str | Path) -> None:
    payload = {
        "seed": seed,
        "bursts": [
            {
                "warning_t_ms": t.warning_t_ms,
                "onset_ms": t.onset_ms,
                "center_abs_ms": t.center_abs_ms,
                "sigma_ms": t.sigma_ms,
                "amplitude": t.amplitude,
                "affected_landmarks": list(t.affected_landmarks),
            }
            for t in truths
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# SRT record generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SrtCell:
    """One (setting, modality) cell of the generator.

    Cells sharing a nonempty ``group`` (and the same n) draw correlated
    per-participant effects and share participant labels, which is what
    makes paired tests between them meaningful.
    """

    setting: Setting
    modality: str
    mean_ms: float
    sd_ms: float
    n: int
    group: str = ""


def gen_srt_dataset(
    cells: Sequence[SrtCell],
    seed: int,
    rho: float = 0.5,
) -> list[ReactionRecord]:
    """Truncated-normal reaction-time draws for every cell.

    Values below the 50 ms floor are redrawn (idiosyncratic part only, so
    shared participant effects survive truncation). Deterministic per seed.
    """
    if not 0.0 <= rho < 1.0:
        raise BadParams(f"rho must be in [0, 1), got {rho}")
    for c in cells:
        if c.sd_ms < 0 or c.n < 1 or c.mean_ms <= 0:
            raise BadParams(f"bad cell parameters: {c}")
    rng = np.random.default_rng(seed)
    group_effects: dict[tuple[str, int], np.ndarray] = {}
    records: list[ReactionRecord] = []
    for c in cells:
        if c.group:
            key = (c.group, c.n)
            if key not in group_effects:
                group_effects[key] = rng.normal(size=c.n)
            z = group_effects[key]
            shared, idio = math.sqrt(rho), math.sqrt(1.0 - rho)
        else:
            z = np.zeros(c.n)
            shared, idio = 0.0, 1.0
        label = c.group if c.group else f"{c.setting.value}-{c.modality}"
        method = Method.VISION if c.setting is Setting.VISION_E else Method.SRT
        for j in range(c.n):
            rt = c.mean_ms + c.sd_ms * (shared * z[j] + idio * rng.normal())
            while rt < SRT_FLOOR_MS:
                rt = c.mean_ms + c.sd_ms * (shared * z[j] + idio * rng.normal())
            records.append(
                ReactionRecord(
                    participant=f"{label}-P{j + 1:03d}",
                    setting=c.setting,
                    modality=c.modality,
                    rt_ms=float(rt),
                    method=method,
                )
            )
    return records


def write_cells_sidecar(cells: Sequence[SrtCell], seed: int, rho: float, path: str | Path) -> None:
    payload = {
        "seed": seed,
        "rho": rho,
        "cells": [
            {
                "setting": c.setting.value,
                "modality": c.modality,
                "mean_ms": c.mean_ms,
                "sd_ms": c.sd_ms,
                "n": c.n,
                "group": c.group,
            }
            for c in cells
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_cells_json(path: str | Path) -> tuple[list[SrtCell], float | None]:
    """Read a cell parameter file: {"rho": ..., "cells": [{...}, ...]}."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    cells = [
        SrtCell(
            setting=Setting(c["setting"]),
            modality=c["modality"],
            mean_ms=float(c["mean_ms"]),
            sd_ms=float(c["sd_ms"]),
            n=int(c["n"]),
            group=c.get("group", ""),
        )
        for c in payload["cells"]
    ]
    return cells, payload.get("rho")


# ---------------------------------------------------------------------------
# reference parameterizations for the bundled reproduction harness
# ---------------------------------------------------------------------------

# benchmark SRT cells: (setting, modality) -> mean, sd; the three lab
# settings share one participant pool, the field setting has its own
REFERENCE_SRT_CELLS: tuple[SrtCell, ...] = (
    SrtCell(Setting.BASELINE, "V", 410, 105, 32, group="lab"),
    SrtCell(Setting.BASELINE, "AV", 422, 122, 32, group="lab"),
    SrtCell(Setting.BASELINE, "HV", 359, 145, 32, group="lab"),
    SrtCell(Setting.BASELINE, "HAV", 365, 149, 32, group="lab"),
    SrtCell(Setting.AR, "V", 597, 232, 34, group="field"),
    SrtCell(Setting.AR, "AV", 627, 249, 34, group="field"),
    SrtCell(Setting.AR, "HV", 530, 245, 34, group="field"),
    SrtCell(Setting.AR, "HAV", 574, 273, 34, group="field"),
    SrtCell(Setting.VR_WOT, "V", 489, 159, 32, group="lab"),
    SrtCell(Setting.VR_WOT, "AV", 483, 162, 32, group="lab"),
    SrtCell(Setting.VR_WOT, "HV", 410, 184, 32, group="lab"),
    SrtCell(Setting.VR_WOT, "HAV", 411, 127, 32, group="lab"),
    SrtCell(Setting.VR_WT, "V", 493, 177, 32, group="lab"),
    SrtCell(Setting.VR_WT, "AV", 477, 108, 32, group="lab"),
    SrtCell(Setting.VR_WT, "HV", 411, 149, 32, group="lab"),
    SrtCell(Setting.VR_WT, "HAV", 438, 154, 32, group="lab"),
)

# vision-metric warning cells (21 completers), paired against the HAV
# baseline recorded in the with-traffic VR setting
REFERENCE_VISION_CELLS: dict[int, tuple[SrtCell, SrtCell]] = {
    1: (
        SrtCell(Setting.VISION_E, "HAV", 490, 330, 21, group="vision1"),
        SrtCell(Setting.VR_WT, "HAV", 438, 154, 21, group="vision1"),
    ),
    2: (
        SrtCell(Setting.VISION_E, "HAV", 370, 220, 21, group="vision2"),
        SrtCell(Setting.VR_WT, "HAV", 438, 154, 21, group="vision2"),
    ),
}

# population stats backing the default search window (HAV, with-traffic VR)
DEFAULT_WINDOW_STATS = (438.0, 154.0)
