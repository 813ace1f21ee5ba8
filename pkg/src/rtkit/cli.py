"""Command-line entry point wiring the toolkit into workflows.

Subcommands: ingest, detect, spectral, scenario, srt, stats, synth.
Flag precedence is flags > config file (JSON) > defaults, and the
effective configuration is echoed into the output directory. Every
randomized behavior requires an explicit seed. Output files are written
atomically (temp file + rename) and inputs are never modified.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import detector, kinematics, pose, spectral, stats, synth, woz
from .errors import ToolkitError


def _atomic_write(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_json(path: Path, payload) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _echo_config(out_dir: Path, args: argparse.Namespace) -> None:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func" and not k.startswith("_")}
    _atomic_json(out_dir / "run_config.json", cfg)


def _require_seed(args) -> int:
    if args.seed is None:
        raise SystemExit("error: --seed is required (no silent time-based default)")
    return args.seed


def _resolve_dims(args, stream) -> str:
    if args.dims != "auto":
        return args.dims
    return "xyz" if stream.has_z else "xy"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_ingest(args) -> int:
    out = Path(args.out)
    stream = pose.parse_pose_stream(args.input, format=args.format, nominal_fps=args.fps)
    report = pose.validate_stream(stream)
    out.mkdir(parents=True, exist_ok=True)
    _echo_config(out, args)
    payload = {
        "source_id": stream.source_id,
        "n_frames": stream.n_frames,
        "n_landmarks": stream.n_landmarks,
        "nominal_fps": stream.nominal_fps,
        "has_z": stream.has_z,
        "timestamps_synthesized": stream.timestamps_synthesized,
        "findings": [
            {"kind": f.kind, "frame_index": f.frame_index, "landmark_id": f.landmark_id, "detail": f.detail}
            for f in report.findings
        ],
    }
    _atomic_json(out / f"{stream.source_id}_validation.json", payload)
    if args.canonical:
        pose.write_pose_stream(stream, out / f"{stream.source_id}_canonical.jsonl", format="jsonl")
    print(f"{stream.source_id}: {stream.n_frames} frames, {len(report.findings)} finding(s)")
    return 0


def _read_baselines(path) -> dict[str, float]:
    table = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            table[row["participant"]] = float(row["baseline_rt_ms"])
    return table


def cmd_detect(args) -> int:
    out = Path(args.out)
    inputs = sorted(Path(args.input).glob("*.csv")) + sorted(Path(args.input).glob("*.jsonl")) if Path(args.input).is_dir() else [Path(args.input)]
    if not inputs:
        raise SystemExit(f"error: no pose files under {args.input}")
    baselines = _read_baselines(args.baselines)
    warnings = [float(w) for w in args.warnings.split(",")]
    out.mkdir(parents=True, exist_ok=True)
    _echo_config(out, args)

    rows = []
    for path in inputs:
        stream = pose.parse_pose_stream(path, nominal_fps=args.fps)
        if stream.source_id not in baselines:
            raise SystemExit(f"error: no baseline reaction time for participant {stream.source_id!r}")
        dims = _resolve_dims(args, stream)
        reports = []
        for w_t in warnings:
            est = detector.detect(
                stream,
                w_t,
                baselines[stream.source_id],
                (args.window_mean, args.window_sd),
                dims=dims,
            )
            reports.append(est.report(include_trace=args.emit_trace))
            rows.append((stream.source_id, w_t, est.rt_ms, est.t_max_ms, est.peak_value))
        _atomic_json(out / f"{stream.source_id}_detection.json", {"participant": stream.source_id, "estimates": reports})

    lines = ["participant,warning_t_ms,rt_ms,t_max_ms,peak_value"]
    lines += [f"{p},{w!r},{rt!r},{tm!r},{pv!r}" for p, w, rt, tm, pv in rows]
    _atomic_write(out / "detection_summary.csv", "\n".join(lines) + "\n")
    print(f"detected {len(rows)} reaction(s) across {len(inputs)} stream(s)")
    return 0


def cmd_spectral(args) -> int:
    out = Path(args.out)
    stream = pose.parse_pose_stream(args.input, nominal_fps=args.fps)
    dims = _resolve_dims(args, stream)
    series = kinematics.velocity_series(pose.select_upper_body(stream), dims=dims)
    out.mkdir(parents=True, exist_ok=True)
    _echo_config(out, args)

    spec = spectral.fft_magnitude(series, remove_mean=args.remove_mean)
    spectral.write_spectrum_csv(spec, out / f"{stream.source_id}_spectrum.csv")

    if args.scales:
        lo, hi, count = args.scales.split(":")
        scales = np.geomspace(float(lo), float(hi), int(count))
    else:
        scales = spectral.default_scales()
    cwt = spectral.cwt_gaus2(series, scales)
    spectral.write_cwt(cwt, out / f"{stream.source_id}_cwt.npy", out / f"{stream.source_id}_cwt.json")
    print(f"{stream.source_id}: spectrum ({spec.n} samples) and CWT ({len(scales)} scales) written")
    return 0


def cmd_scenario(args) -> int:
    out = Path(args.out)
    try:
        script = woz.script_by_name(args.script)
    except KeyError:
        path = Path(args.script)
        if not path.exists():
            raise SystemExit(f"error: unknown script {args.script!r}")
        script = _load_script(path)
    clock = woz.SimClock() if args.clock == "sim" else woz.WallClock()
    sink = woz.ListTransport()
    events = woz.run_scenario(script, clock, sink)
    _atomic_write(out, woz.format_event_log(events))
    print(f"{script.name}: {len(events)} trigger(s) -> {out}")
    return 0


def _load_script(path: Path) -> woz.ScenarioScript:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    return woz.ScenarioScript(
        name=obj["name"],
        duration_ms=int(obj["duration_ms"]),
        triggers=tuple((int(t), str(m)) for t, m in obj["triggers"]),
    )


def cmd_srt(args) -> int:
    out = Path(args.out)
    log = woz.parse_event_log(args.log, max_rt_ms=args.max_rt)
    out.mkdir(parents=True, exist_ok=True)
    _echo_config(out, args)

    lines = ["trigger_seq,trigger_ms,response_ms,rt_ms,is_miss"]
    lines += [
        f"{e.trigger_seq},{e.trigger_ms},{e.response_ms},{e.rt_ms},{int(e.is_miss)}"
        for e in log.srt_events
    ]
    _atomic_write(out / "srt_events.csv", "\n".join(lines) + "\n")

    report = {
        "n_triggers": len(log.triggers),
        "n_responses": len(log.responses),
        "n_paired": len(log.srt_events),
        "orphan_responses": [e.seq for e in log.orphan_responses],
        "missed_triggers": log.missed_triggers,
    }
    if log.acks:
        lat = woz.latency_budget_check(log.triggers, log.acks, budget_ms=args.latency_budget)
        report["latency"] = {
            "budget_ms": lat.budget_ms,
            "p99_ms": lat.p99_ms,
            "all_pass": lat.all_pass,
            "failures": lat.failures,
        }
    _atomic_json(out / "srt_report.json", report)
    if args.records:
        records = [
            stats.ReactionRecord(
                participant=args.participant,
                setting=stats.Setting(args.setting),
                modality=next(t.modality for t in log.triggers if t.seq == e.trigger_seq),
                rt_ms=float(e.rt_ms),
            )
            for e in log.srt_events
            if not e.is_miss
        ]
        stats.write_records_csv(records, out / "records.csv")
    print(f"paired {len(log.srt_events)} SRT event(s); {len(log.missed_triggers)} miss(es)")
    return 0


def cmd_stats(args) -> int:
    out = Path(args.out)
    records = stats.read_records_csv(args.records)
    if not records:
        raise SystemExit(f"error: no records in {args.records}")
    out.mkdir(parents=True, exist_ok=True)
    _echo_config(out, args)

    summaries = stats.summary_table(records)
    stats.write_summary_csv(summaries, out / "summary.csv")
    grid = stats.significance_grid(records)
    stats.write_settings_grid_csv(grid, out / "grid_settings.csv")
    stats.write_modalities_grid_csv(grid, out / "grid_modalities.csv")

    vision = stats.cell_records(records, stats.Setting.VISION_E, "HAV")
    paired_lines = ["comparison,n,t,df,p"]
    if vision:
        ref = stats.cell_records(records, stats.Setting.VR_WT, "HAV")
        shared = sorted({r.participant for r in vision} & {r.participant for r in ref})
        if shared:
            a = [next(r.rt_ms for r in vision if r.participant == p) for p in shared]
            b = [next(r.rt_ms for r in ref if r.participant == p) for p in shared]
            res = stats.paired_ttest(a, b)
            paired_lines.append(f"VisionE-vs-VR-WT-HAV,{len(shared)},{res.t!r},{res.df!r},{res.p!r}")
    _atomic_write(out / "paired.csv", "\n".join(paired_lines) + "\n")
    print(f"stats over {len(records)} record(s): summary, two grids, paired report")
    return 0


def cmd_synth_pose(args) -> int:
    out = Path(args.out)
    seed = _require_seed(args)
    warnings = [float(w) for w in args.warnings.split(",")]
    burst = synth.BurstSpec(
        onset_ms=args.onset,
        burst_sigma_ms=args.burst_sigma,
        burst_amplitude=args.amplitude,
    )
    stream, truths = synth.gen_pose_stream(
        duration_ms=args.duration,
        fps=args.fps,
        warning_times=warnings,
        bursts=burst,
        noise=synth.NoiseSpec(sigma=args.noise_sigma),
        seed=seed,
        source_id=args.source_id,
    )
    out.mkdir(parents=True, exist_ok=True)
    _echo_config(out, args)
    path = out / f"{args.source_id}.{args.format}"
    pose.write_pose_stream(stream, path, format=args.format)
    synth.write_truth_sidecar(truths, seed, out / f"{args.source_id}_truth.json")
    print(f"wrote {stream.n_frames}-frame stream with {len(truths)} burst(s) -> {path}")
    return 0


def cmd_synth_srt(args) -> int:
    out = Path(args.out)
    seed = _require_seed(args)
    if args.cells:
        cells, rho = synth.read_cells_json(args.cells)
        rho = args.rho if rho is None else rho
    else:
        cells = list(synth.REFERENCE_SRT_CELLS)
        rho = args.rho
    records = synth.gen_srt_dataset(cells, seed=seed, rho=rho)
    out.mkdir(parents=True, exist_ok=True)
    _echo_config(out, args)
    stats.write_records_csv(records, out / "records.csv")
    synth.write_cells_sidecar(cells, seed, rho, out / "cells.json")
    print(f"wrote {len(records)} record(s) across {len(cells)} cell(s)")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rtkit", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file with default option values")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", required=True)
        sp.add_argument("--fps", type=float, default=30.0)

    sp = sub.add_parser("ingest", help="parse and validate a pose file")
    common(sp)
    sp.add_argument("--input", required=True)
    sp.add_argument("--format", choices=["csv", "jsonl"], default=None)
    sp.add_argument("--canonical", action="store_true", help="also write a canonical JSONL copy")
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("detect", help="vision-based reaction times for pose streams")
    common(sp)
    sp.add_argument("--input", required=True, help="pose file or directory of pose files")
    sp.add_argument("--baselines", required=True, help="CSV: participant,baseline_rt_ms")
    sp.add_argument("--warnings", required=True, help="comma-separated warning times (ms)")
    sp.add_argument("--dims", choices=["auto", "xy", "xyz"], default="auto")
    sp.add_argument("--window-mean", type=float, default=438.0)
    sp.add_argument("--window-sd", type=float, default=154.0)
    sp.add_argument("--emit-trace", action="store_true")
    sp.set_defaults(func=cmd_detect)

    sp = sub.add_parser("spectral", help="FFT magnitude spectrum and CWT of the velocity series")
    common(sp)
    sp.add_argument("--input", required=True)
    sp.add_argument("--dims", choices=["auto", "xy", "xyz"], default="auto")
    sp.add_argument("--remove-mean", action="store_true")
    sp.add_argument("--scales", default=None, help="lo:hi:count (frames, log-spaced)")
    sp.set_defaults(func=cmd_spectral)

    sp = sub.add_parser("scenario", help="run a warning schedule and write the event log")
    sp.add_argument("--script", required=True, help="builtin name (V, HV, AV, HAV, ExpE) or JSON path")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--clock", choices=["sim", "wall"], default="sim")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_scenario)

    sp = sub.add_parser("srt", help="parse an event log into SRT measurements")
    common(sp)
    sp.add_argument("--log", required=True)
    sp.add_argument("--max-rt", type=int, default=woz.DEFAULT_MISS_MS)
    sp.add_argument("--latency-budget", type=float, default=10.0)
    sp.add_argument("--records", action="store_true", help="also write a records.csv for the stats command")
    sp.add_argument("--participant", default="P000")
    sp.add_argument("--setting", default="Baseline")
    sp.set_defaults(func=cmd_srt)

    sp = sub.add_parser("stats", help="summary, significance grids, paired report")
    common(sp)
    sp.add_argument("--records", required=True)
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("synth", help="generate synthetic data")
    synth_sub = sp.add_subparsers(dest="kind", required=True)

    sq = synth_sub.add_parser("pose", help="pose stream with injected reactions")
    common(sq)
    sq.add_argument("--duration", type=float, default=60000.0)
    sq.add_argument("--warnings", default="25000,45000")
    sq.add_argument("--onset", type=float, default=400.0)
    sq.add_argument("--burst-sigma", type=float, default=54.75)
    sq.add_argument("--amplitude", type=float, default=3.0)
    sq.add_argument("--noise-sigma", type=float, default=0.004)
    sq.add_argument("--source-id", default="synth")
    sq.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    sq.set_defaults(func=cmd_synth_pose)

    sq = synth_sub.add_parser("srt", help="reaction-time records from cell parameters")
    common(sq)
    sq.add_argument("--cells", default=None, help="JSON cell parameters; defaults to the reference cells")
    sq.add_argument("--rho", type=float, default=0.5)
    sq.set_defaults(func=cmd_synth_srt)

    return p


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    # flags > config file > defaults: inject config values as leading flags
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    cfg_path = argv[i + 1]
    with open(cfg_path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    injected: list[str] = []
    for key, value in cfg.items():
        flag = f"--{key.replace('_', '-')}"
        if flag in argv:
            continue
        if isinstance(value, bool):
            if value:
                injected.append(flag)
        else:
            injected.extend([flag, str(value)])
    # insert after the subcommand tokens so argparse scopes them correctly
    rest = [a for j, a in enumerate(argv) if j not in (i, i + 1)]
    return rest + injected


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except ToolkitError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
