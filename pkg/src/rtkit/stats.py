"""Reaction-time summaries and hypothesis tests.

Cross-setting and cross-modality comparisons use Welch's unequal-variance
t-test (sample sizes differ between settings); the vision-vs-SRT check uses
the Student paired t-test on per-participant differences. Two-sided p
values come from the regularized incomplete beta function.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import betainc

from .errors import DegenerateSample, MissingCell, PairingError


class Setting(Enum):
    BASELINE = "Baseline"
    AR = "AR"
    VR_WOT = "VR-WOT"
    VR_WT = "VR-WT"
    VISION_E = "VisionE"


class Method(Enum):
    SRT = "SRT"
    VISION = "Vision"


SRT_SETTINGS = (Setting.BASELINE, Setting.AR, Setting.VR_WOT, Setting.VR_WT)
ALL_MODALITIES = ("V", "AV", "HV", "HAV")


@dataclass(frozen=True)
class ReactionRecord:
    participant: str
    setting: Setting
    modality: str
    rt_ms: float
    method: Method = Method.SRT

    def __post_init__(self):
        if self.rt_ms <= 0:
            raise ValueError(f"rt_ms must be positive, got {self.rt_ms}")
        if self.setting is Setting.VISION_E and (
            self.method is not Method.VISION or self.modality != "HAV"
        ):
            raise ValueError("VisionE records are vision-method HAV by definition")


@dataclass(frozen=True)
class SampleSummary:
    n: int
    mean_ms: float
    sd_ms: float | None  # sample SD (n-1); undefined for n < 2


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float
    paired: bool
    variant: str  # welch | student_paired | student_pooled


def two_sided_p(t: float, df: float) -> float:
    """P(|T_df| >= |t|) via the regularized incomplete beta function."""
    if df <= 0 or not math.isfinite(t):
        return 0.0 if not math.isfinite(t) else float("nan")
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def summarize(values: Iterable[float]) -> SampleSummary:
    """Mean and sample standard deviation of a cell."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size < 1:
        raise ValueError("empty sample")
    sd = float(arr.std(ddof=1)) if arr.size >= 2 else None
    return SampleSummary(n=int(arr.size), mean_ms=float(arr.mean()), sd_ms=sd)


def welch_ttest(a: Sequence[float], b: Sequence[float], equal_var: bool = False) -> TTestResult:
    """Two-sided unpaired t-test; Welch by default.

    ``equal_var=True`` switches to the pooled Student variant (sensitivity
    check only). Raises DegenerateSample when both samples have zero
    variance and equal means.
    """
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    n1, n2 = len(x), len(y)
    if n1 < 2 or n2 < 2:
        raise ValueError("both samples need n >= 2")
    m1, m2 = x.mean(), y.mean()
    v1, v2 = x.var(ddof=1), y.var(ddof=1)
    if equal_var:
        df = float(n1 + n2 - 2)
        sp2 = ((n1 - 1) * v1 + (n2 - 1) * v2) / df
        se2 = sp2 * (1.0 / n1 + 1.0 / n2)
        variant = "student_pooled"
    else:
        se2 = v1 / n1 + v2 / n2
        variant = "welch"
    if se2 == 0.0:
        if m1 == m2:
            raise DegenerateSample("zero variance in both samples with equal means")
        t = math.copysign(math.inf, m1 - m2)
        return TTestResult(t=t, df=float(n1 + n2 - 2), p=0.0, paired=False, variant=variant)
    if not equal_var:
        df = se2**2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1))
    t = float((m1 - m2) / math.sqrt(se2))
    return TTestResult(t=t, df=float(df), p=two_sided_p(t, df), paired=False, variant=variant)


def paired_ttest(
    a: Sequence[float],
    b: Sequence[float],
    participants_a: Sequence[str] | None = None,
    participants_b: Sequence[str] | None = None,
) -> TTestResult:
    """Two-sided Student paired t-test on per-pair differences.

    When participant labels are given, samples are aligned by label first;
    a mismatch raises PairingError.
    """
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if participants_a is not None or participants_b is not None:
        if participants_a is None or participants_b is None:
            raise PairingError("participant labels must be given for both samples")
        x, y = _align_pairs(x, y, participants_a, participants_b)
    if len(x) != len(y):
        raise PairingError(f"sample lengths differ: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise ValueError("need at least 2 pairs")
    d = x - y
    mean_d = d.mean()
    sd_d = d.std(ddof=1)
    df = float(n - 1)
    if sd_d == 0.0:
        if mean_d == 0.0:
            return TTestResult(t=0.0, df=df, p=1.0, paired=True, variant="student_paired")
        t = math.copysign(math.inf, mean_d)
        return TTestResult(t=t, df=df, p=0.0, paired=True, variant="student_paired")
    t = float(mean_d / (sd_d / math.sqrt(n)))
    return TTestResult(t=t, df=df, p=two_sided_p(t, df), paired=True, variant="student_paired")


def _align_pairs(x, y, pa, pb):
    if sorted(pa) != sorted(pb):
        only_a = sorted(set(pa) - set(pb))
        only_b = sorted(set(pb) - set(pa))
        raise PairingError(f"unpairable participants (a-only {only_a}, b-only {only_b})")
    if len(set(pa)) != len(pa):
        raise PairingError("duplicate participant labels")
    order_b = {p: i for i, p in enumerate(pb)}
    idx = [order_b[p] for p in pa]
    return x, y[idx]


# ---------------------------------------------------------------------------
# record-level helpers and grids
# ---------------------------------------------------------------------------


def cell_values(records: Iterable[ReactionRecord], setting: Setting, modality: str) -> list[float]:
    return [r.rt_ms for r in records if r.setting is setting and r.modality == modality]


def cell_records(records: Iterable[ReactionRecord], setting: Setting, modality: str) -> list[ReactionRecord]:
    return [r for r in records if r.setting is setting and r.modality == modality]


@dataclass
class SignificanceGrid:
    """Welch tests across settings (per modality) and across modalities
    (per setting), mirroring the two reference comparison tables."""

    settings_grid: dict[tuple[str, Setting, Setting], TTestResult]
    modalities_grid: dict[tuple[Setting, str, str], TTestResult]


def significance_grid(
    records: Sequence[ReactionRecord],
    settings: Sequence[Setting] = SRT_SETTINGS,
    modalities: Sequence[str] = ALL_MODALITIES,
) -> SignificanceGrid:
    """All pairwise Welch comparisons over the settings x modalities cells.

    Raises MissingCell (listing the absent combinations) when any required
    cell has fewer than two records.
    """
    cells: dict[tuple[Setting, str], list[float]] = {}
    missing = []
    for s in settings:
        for m in modalities:
            vals = cell_values(records, s, m)
            if len(vals) < 2:
                missing.append((s.value, m))
            cells[(s, m)] = vals
    if missing:
        raise MissingCell(f"missing cells: {missing}", cells=missing)

    sg: dict[tuple[str, Setting, Setting], TTestResult] = {}
    for m in modalities:
        for i, s1 in enumerate(settings):
            for s2 in settings[i + 1 :]:
                sg[(m, s1, s2)] = welch_ttest(cells[(s1, m)], cells[(s2, m)])
    mg: dict[tuple[Setting, str, str], TTestResult] = {}
    for s in settings:
        for i, m1 in enumerate(modalities):
            for m2 in modalities[i + 1 :]:
                mg[(s, m1, m2)] = welch_ttest(cells[(s, m1)], cells[(s, m2)])
    return SignificanceGrid(settings_grid=sg, modalities_grid=mg)


def summary_table(
    records: Sequence[ReactionRecord],
    settings: Sequence[Setting] = SRT_SETTINGS,
    modalities: Sequence[str] = ALL_MODALITIES,
) -> dict[tuple[str, Setting], SampleSummary]:
    out = {}
    for m in modalities:
        for s in settings:
            vals = cell_values(records, s, m)
            if vals:
                out[(m, s)] = summarize(vals)
    return out


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------


def write_records_csv(records: Sequence[ReactionRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["participant", "setting", "modality", "method", "rt_ms"])
        for r in records:
            w.writerow([r.participant, r.setting.value, r.modality, r.method.value, repr(float(r.rt_ms))])


def read_records_csv(path: str | Path) -> list[ReactionRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.DictReader(fh), start=2):
            try:
                records.append(
                    ReactionRecord(
                        participant=row["participant"],
                        setting=Setting(row["setting"]),
                        modality=row["modality"],
                        rt_ms=float(row["rt_ms"]),
                        method=Method(row["method"]),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{i}: bad record: {exc}") from exc
    return records


def write_summary_csv(summaries: dict[tuple[str, Setting], SampleSummary], path: str | Path) -> None:
    settings = [s for s in SRT_SETTINGS if any(k[1] is s for k in summaries)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["modality", "stat"] + [s.value for s in settings])
        for m in ALL_MODALITIES:
            if not any(k[0] == m for k in summaries):
                continue
            means, sds, ns = [], [], []
            for s in settings:
                cell = summaries.get((m, s))
                means.append("" if cell is None else f"{cell.mean_ms:.1f}")
                sds.append("" if cell is None or cell.sd_ms is None else f"{cell.sd_ms:.1f}")
                ns.append("" if cell is None else str(cell.n))
            w.writerow([m, "mean_ms"] + means)
            w.writerow([m, "sd_ms"] + sds)
            w.writerow([m, "n"] + ns)


def write_settings_grid_csv(grid: SignificanceGrid, path: str | Path) -> None:
    """Lower-triangle p-value grid of setting pairs, one block per modality."""
    present = {s for (_, s1, s2) in grid.settings_grid for s in (s1, s2)}
    settings = [s for s in SRT_SETTINGS if s in present]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["modality", "setting"] + [s.value for s in settings[:-1]])
        mods = [m for m in ALL_MODALITIES if any(k[0] == m for k in grid.settings_grid)]
        for m in mods:
            for ri, row_s in enumerate(settings[1:], start=1):
                cells = []
                for ci, col_s in enumerate(settings[:-1]):
                    if ci >= ri:
                        cells.append("")
                        continue
                    res = grid.settings_grid.get((m, col_s, row_s)) or grid.settings_grid.get(
                        (m, row_s, col_s)
                    )
                    cells.append("" if res is None else f"{res.p:.3f}")
                w.writerow([m, row_s.value] + cells)


def write_modalities_grid_csv(grid: SignificanceGrid, path: str | Path) -> None:
    """Lower-triangle p-value grid of modality pairs, one block per setting."""
    mods = [m for m in ALL_MODALITIES if any(m in (m1, m2) for (_, m1, m2) in grid.modalities_grid)]
    present = {s for (s, _, _) in grid.modalities_grid}
    settings = [s for s in Setting if s in present]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["setting", "modality"] + mods[:-1])
        for s in settings:
            for ri, row_m in enumerate(mods[1:], start=1):
                cells = []
                for ci, col_m in enumerate(mods[:-1]):
                    if ci >= ri:
                        cells.append("")
                        continue
                    res = grid.modalities_grid.get((s, col_m, row_m)) or grid.modalities_grid.get(
                        (s, row_m, col_m)
                    )
                    cells.append("" if res is None else f"{res.p:.3f}")
                w.writerow([s.value, row_m] + cells)
