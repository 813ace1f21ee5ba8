import json

import pytest

from rtkit.cli import main


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_scenario_builtin_exact_lines(tmp_path):
    out = tmp_path / "v.log"
    assert run_cli("scenario", "--script", "V", "--clock", "sim", "--out", out) == 0
    assert out.read_text() == (
        "# woz-log v1\n"
        "TRIG 1 V 10000 10000\n"
        "TRIG 2 V 20000 20000\n"
        "TRIG 3 V 28000 28000\n"
        "TRIG 4 V 33000 33000\n"
        "TRIG 5 V 36000 36000\n"
    )


def test_scenario_expe_two_triggers(tmp_path):
    out = tmp_path / "e.log"
    assert run_cli("scenario", "--script", "ExpE", "--clock", "sim", "--out", out) == 0
    lines = out.read_text().strip().splitlines()[1:]
    assert lines == ["TRIG 1 HAV 25000 25000", "TRIG 2 HAV 45000 45000"]


def test_scenario_unknown_script(tmp_path):
    with pytest.raises(SystemExit):
        run_cli("scenario", "--script", "Nope", "--out", tmp_path / "x.log")


def test_scenario_script_from_json(tmp_path):
    script = {"name": "custom", "duration_ms": 5000, "triggers": [[1000, "V"], [2000, "HAV"]]}
    path = tmp_path / "script.json"
    path.write_text(json.dumps(script))
    out = tmp_path / "c.log"
    assert run_cli("scenario", "--script", path, "--out", out) == 0
    assert "TRIG 2 HAV 2000 2000" in out.read_text()


def test_synth_srt_requires_seed(tmp_path):
    with pytest.raises(SystemExit, match="seed"):
        run_cli("synth", "srt", "--out", tmp_path / "d")


def test_synth_srt_then_stats(tmp_path):
    srt_dir = tmp_path / "srt"
    assert run_cli("synth", "srt", "--seed", 3, "--out", srt_dir) == 0
    assert (srt_dir / "records.csv").exists()
    assert (srt_dir / "cells.json").exists()
    assert (srt_dir / "run_config.json").exists()

    stats_dir = tmp_path / "stats"
    assert run_cli("stats", "--records", srt_dir / "records.csv", "--out", stats_dir) == 0
    summary = (stats_dir / "summary.csv").read_text().splitlines()
    assert summary[0] == "modality,stat,Baseline,AR,VR-WOT,VR-WT"
    assert len(summary) == 1 + 4 * 3
    grid = (stats_dir / "grid_settings.csv").read_text().splitlines()
    assert len(grid) == 1 + 4 * 3
    assert (stats_dir / "grid_modalities.csv").exists()
    assert (stats_dir / "paired.csv").exists()


def test_stats_empty_records(tmp_path):
    records = tmp_path / "records.csv"
    records.write_text("participant,setting,modality,method,rt_ms\n")
    with pytest.raises(SystemExit):
        run_cli("stats", "--records", records, "--out", tmp_path / "out")


def test_synth_pose_detect_chain(tmp_path):
    pose_dir = tmp_path / "pose"
    assert (
        run_cli(
            "synth", "pose",
            "--seed", 5,
            "--out", pose_dir,
            "--source-id", "P007",
            "--warnings", "25000,45000",
            "--onset", 400,
            "--amplitude", 4.0,
        )
        == 0
    )
    truth = json.loads((pose_dir / "P007_truth.json").read_text())
    assert len(truth["bursts"]) == 2

    baselines = tmp_path / "baselines.csv"
    baselines.write_text("participant,baseline_rt_ms\nP007,438\n")
    det_dir = tmp_path / "det"
    assert (
        run_cli(
            "detect",
            "--input", pose_dir / "P007.csv",
            "--baselines", baselines,
            "--warnings", "25000,45000",
            "--out", det_dir,
        )
        == 0
    )
    summary = (det_dir / "detection_summary.csv").read_text().splitlines()
    assert summary[0] == "participant,warning_t_ms,rt_ms,t_max_ms,peak_value"
    assert len(summary) == 3
    report = json.loads((det_dir / "P007_detection.json").read_text())
    assert len(report["estimates"]) == 2
    assert "convolution" not in report["estimates"][0]


def test_detect_missing_baseline_names_participant(tmp_path):
    pose_dir = tmp_path / "pose"
    run_cli("synth", "pose", "--seed", 6, "--out", pose_dir, "--source-id", "P009",
            "--warnings", "25000", "--amplitude", "4.0")
    baselines = tmp_path / "baselines.csv"
    baselines.write_text("participant,baseline_rt_ms\nOTHER,438\n")
    with pytest.raises(SystemExit, match="P009"):
        run_cli("detect", "--input", pose_dir / "P009.csv", "--baselines", baselines,
                "--warnings", "25000", "--out", tmp_path / "det")


def test_detect_emit_trace(tmp_path):
    pose_dir = tmp_path / "pose"
    run_cli("synth", "pose", "--seed", 7, "--out", pose_dir, "--source-id", "T1",
            "--warnings", "25000", "--amplitude", "4.0")
    baselines = tmp_path / "baselines.csv"
    baselines.write_text("participant,baseline_rt_ms\nT1,438\n")
    det_dir = tmp_path / "det"
    run_cli("detect", "--input", pose_dir / "T1.csv", "--baselines", baselines,
            "--warnings", "25000", "--out", det_dir, "--emit-trace")
    report = json.loads((det_dir / "T1_detection.json").read_text())
    assert "convolution" in report["estimates"][0]


def test_ingest_reports_findings(tmp_path):
    pose_dir = tmp_path / "pose"
    run_cli("synth", "pose", "--seed", 8, "--out", pose_dir, "--source-id", "V1",
            "--warnings", "25000", "--amplitude", "4.0")
    out = tmp_path / "ingest"
    assert run_cli("ingest", "--input", pose_dir / "V1.csv", "--out", out, "--canonical") == 0
    payload = json.loads((out / "V1_validation.json").read_text())
    assert payload["n_frames"] == 1800
    assert payload["findings"] == []
    assert (out / "V1_canonical.jsonl").exists()


def test_srt_command(tmp_path):
    log = tmp_path / "log.txt"
    log.write_text(
        "# woz-log v1\n"
        "TRIG 1 HAV 10000 10000\n"
        "ACK 1 10004\n"
        "RESP 1 10500\n"
        "TRIG 2 HAV 20000 20000\n"
        "ACK 2 20015\n"
    )
    out = tmp_path / "srt"
    assert run_cli("srt", "--log", log, "--out", out, "--records",
                   "--participant", "P001", "--setting", "VR-WT") == 0
    events = (out / "srt_events.csv").read_text().splitlines()
    assert events[1] == "1,10000,10500,500,0"
    report = json.loads((out / "srt_report.json").read_text())
    assert report["missed_triggers"] == [2]
    assert report["latency"]["failures"] == [2]
    records = (out / "records.csv").read_text().splitlines()
    assert records[1].startswith("P001,VR-WT,HAV,SRT,500")


def test_spectral_command(tmp_path):
    pose_dir = tmp_path / "pose"
    run_cli("synth", "pose", "--seed", 9, "--out", pose_dir, "--source-id", "S1",
            "--warnings", "8000", "--amplitude", "4.0", "--duration", "20000")
    out = tmp_path / "spec"
    assert run_cli("spectral", "--input", pose_dir / "S1.csv", "--out", out,
                   "--scales", "2:40:16") == 0
    side = json.loads((out / "S1_cwt.json").read_text())
    assert len(side["scales_frames"]) == 16
    assert (out / "S1_spectrum.csv").exists()


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 11, "rho": 0.25}))
    out1 = tmp_path / "a"
    assert run_cli("--config", cfg, "synth", "srt", "--out", out1) == 0
    echoed = json.loads((out1 / "run_config.json").read_text())
    assert echoed["seed"] == 11 and echoed["rho"] == 0.25
    out2 = tmp_path / "b"
    assert run_cli("--config", cfg, "synth", "srt", "--out", out2, "--rho", "0.75") == 0
    echoed2 = json.loads((out2 / "run_config.json").read_text())
    assert echoed2["seed"] == 11 and echoed2["rho"] == 0.75


def test_outputs_do_not_mutate_inputs(tmp_path):
    srt_dir = tmp_path / "srt"
    run_cli("synth", "srt", "--seed", 3, "--out", srt_dir)
    before = (srt_dir / "records.csv").read_bytes()
    run_cli("stats", "--records", srt_dir / "records.csv", "--out", tmp_path / "st")
    assert (srt_dir / "records.csv").read_bytes() == before
