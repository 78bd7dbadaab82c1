import json

import pytest

from psrkit import fileio
from psrkit.cli import main
from psrkit import (
    evaluate,
    fuse_streams,
    nominal_events,
    run_filter,
    simulate,
    toy_motorcycle,
)
from psrkit.state_inference import StateDetection, asd_stream_probs

from util import seq_of


def write_labels(path, seqs):
    fileio.serialize_labels(seqs, path)
    return str(path)


def sim_config_doc(seed=7, n_videos=1):
    return {
        "schema": fileio.SIM_CONFIG_SCHEMA,
        "version": 1,
        "procedure": "toy-motorcycle",
        "n_videos": n_videos,
        "seed": seed,
        "step_gap": 40,
        "tail_frames": 150,
        "occlusion": {"p_occlude": 0.1, "p_reveal": 0.05},
        "temporal": {"hit_prob": 0.9, "fp_rate": 0.0005},
    }


class TestEvaluateCommand:
    def test_perfect_fixture(self, tmp_path, capsys):
        gt = {"v": seq_of([(0, 100), (1, 200)], video_id="v")}
        labels = write_labels(tmp_path / "gt.jsonl", gt)
        preds = write_labels(tmp_path / "pred.jsonl", gt)
        out = tmp_path / "report.json"
        assert main(["evaluate", "--labels", labels, "--predictions", preds,
                     "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["aggregate"]["pos"] == 1.0
        assert doc["aggregate"]["f1"] == 1.0
        assert doc["aggregate"]["tau_s"] == 0.0
        assert (tmp_path / "report.csv").exists()
        assert "pos=1.0000" in capsys.readouterr().out

    def test_composition_fixture_csv(self, tmp_path):
        gt = {"v": seq_of([(0, 100), (1, 200)], video_id="v")}
        pred = {"v": seq_of([(0, 120), (2, 150)], video_id="v")}
        labels = write_labels(tmp_path / "gt.jsonl", gt)
        preds = write_labels(tmp_path / "pred.jsonl", pred)
        out = tmp_path / "report.json"
        csv_path = tmp_path / "metrics.csv"
        assert main(["evaluate", "--labels", labels, "--predictions", preds,
                     "--out", str(out), "--csv", str(csv_path)]) == 0
        row = csv_path.read_text().splitlines()[1].split(",")
        assert row[0] == "v"
        assert float(row[4]) == 0.5  # f1
        assert float(row[5]) == 2.0  # tau seconds

    def test_empty_ground_truth_exit_code(self, tmp_path):
        gt = {"v": seq_of([(0, 100, False)], video_id="v")}
        labels = write_labels(tmp_path / "gt.jsonl", gt)
        preds = write_labels(tmp_path / "pred.jsonl", {"v": seq_of([(0, 120)])})
        assert main(["evaluate", "--labels", labels, "--predictions", preds,
                     "--out", str(tmp_path / "r.json")]) == 4

    def test_missing_predictions_file(self, tmp_path):
        gt = {"v": seq_of([(0, 100)], video_id="v")}
        labels = write_labels(tmp_path / "gt.jsonl", gt)
        out = tmp_path / "report.json"
        assert main(["evaluate", "--labels", labels,
                     "--predictions", str(tmp_path / "missing.jsonl"),
                     "--out", str(out)]) == 3
        assert not out.exists()

    def test_usage_error(self):
        with pytest.raises(SystemExit) as err:
            main(["evaluate"])
        assert err.value.code == 2


class TestRecognizeCommand:
    def test_state_stream_golden(self, tmp_path):
        toy = toy_motorcycle()
        frames = [100 * (i + 1) for i in range(11)]
        dets = {
            "v": [
                StateDetection(frame=f, state=toy.states[i + 1], confidence=0.9)
                for i, f in enumerate(frames)
            ]
        }
        stream = tmp_path / "asd.jsonl"
        fileio.serialize_asd_stream(dets, stream)
        out = tmp_path / "pred.jsonl"
        assert main(["recognize", "--streams", str(stream),
                     "--procedure", "toy-motorcycle",
                     "--threshold", "0.5", "--out", str(out)]) == 0
        pred = fileio.parse_labels(out)["v"]
        gt = nominal_events(toy, frames, video_id="v")
        assert [e.action for e in pred.events] == [e.action for e in gt.events]
        report = evaluate(gt, pred)
        assert report.pos == 1.0 and report.f1 == 1.0

    def test_all_zero_streams_empty_predictions(self, tmp_path):
        from psrkit import ConfidenceFrame

        frames = {
            "v": [
                ConfidenceFrame(frame=f, probs=(0.0,) * 34, stream_id="temporal")
                for f in range(20)
            ]
        }
        stream = tmp_path / "temporal.jsonl"
        fileio.serialize_temporal_stream(frames, stream)
        out = tmp_path / "pred.jsonl"
        assert main(["recognize", "--streams", str(stream),
                     "--procedure", "toy-motorcycle", "--out", str(out)]) == 0
        assert fileio.parse_labels(out) == {}

    def test_fused_matches_library_pipeline(self, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(sim_config_doc(seed=21)))
        out_dir = tmp_path / "sim"
        assert main(["simulate", "--config", str(config_path),
                     "--out", str(out_dir)]) == 0

        pred_path = tmp_path / "pred.jsonl"
        assert main(["recognize",
                     "--streams", str(out_dir / "asd_stream.jsonl"),
                     str(out_dir / "temporal_stream.jsonl"),
                     "--procedure", "toy-motorcycle", "--fuse",
                     "--threshold", "0.4", "--out", str(pred_path)]) == 0
        cli_pred = fileio.parse_labels(pred_path)["sim000"]

        config, _ = fileio.load_sim_config(config_path)
        trace = simulate(config)[0]
        proc = toy_motorcycle()
        asd_probs = asd_stream_probs(trace.asd_detections, proc, trace.video_len)
        fused = fuse_streams(asd_probs, list(trace.temporal_frames))
        lib_pred = run_filter(fused, proc, threshold=0.4, video_id="sim000")
        assert cli_pred == lib_pred

    def test_fuse_needs_both_streams(self, tmp_path):
        toy = toy_motorcycle()
        dets = {"v": [StateDetection(frame=5, state=toy.states[1], confidence=0.9)]}
        stream = tmp_path / "asd.jsonl"
        fileio.serialize_asd_stream(dets, stream)
        assert main(["recognize", "--streams", str(stream),
                     "--procedure", "toy-motorcycle", "--fuse",
                     "--out", str(tmp_path / "p.jsonl")]) == 2

    def test_series_output(self, tmp_path):
        toy = toy_motorcycle()
        dets = {"v": [StateDetection(frame=5, state=toy.states[1], confidence=0.9)]}
        stream = tmp_path / "asd.jsonl"
        fileio.serialize_asd_stream(dets, stream)
        series = tmp_path / "series.csv"
        assert main(["recognize", "--streams", str(stream),
                     "--procedure", "toy-motorcycle", "--threshold", "0.5",
                     "--out", str(tmp_path / "p.jsonl"),
                     "--series-out", str(series)]) == 0
        lines = series.read_text().splitlines()
        assert lines[0] == "video_id,frame,step,action,prob,accumulator"
        assert len(lines) > 1


class TestSimulateCommand:
    def test_outputs_and_determinism(self, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(sim_config_doc(seed=31)))
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--config", str(config_path), "--out", str(out_a)]) == 0
        assert main(["simulate", "--config", str(config_path), "--out", str(out_b)]) == 0
        names = [
            "gt_labels.jsonl",
            "asd_stream.jsonl",
            "temporal_stream.jsonl",
            "occlusion.jsonl",
            "comparison.json",
        ]
        for name in names:
            assert (out_a / name).exists()
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
        doc = json.loads((out_a / "comparison.json").read_text())
        assert doc["schema"] == fileio.COMPARISON_SCHEMA
        assert set(doc["summary"]) == {"asd", "temporal", "fused"}
        assert doc["config"]["seed"] == 31

    def test_seed_override(self, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(sim_config_doc(seed=31)))
        out = tmp_path / "o"
        assert main(["simulate", "--config", str(config_path), "--out", str(out),
                     "--seed", "99"]) == 0
        doc = json.loads((out / "comparison.json").read_text())
        assert doc["config"]["seed"] == 99

    def test_malformed_config_names_field(self, tmp_path, capsys):
        doc = sim_config_doc()
        doc["occlusion"]["p_occlude"] = "often"
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(doc))
        assert main(["simulate", "--config", str(config_path),
                     "--out", str(tmp_path / "o")]) == 3
        assert "p_occlude" in capsys.readouterr().err


class TestSampleCommand:
    @pytest.fixture()
    def labels_path(self, tmp_path):
        toy = toy_motorcycle()
        seqs = {
            f"v{i}": nominal_events(
                toy, [60 * (j + 1) + i for j in range(11)], video_id=f"v{i}"
            )
            for i in range(2)
        }
        return write_labels(tmp_path / "labels.jsonl", seqs)

    def test_kcas(self, tmp_path, labels_path):
        out = tmp_path / "clips.jsonl"
        args = ["sample", "--labels", labels_path, "--mode", "kcas",
                "--video-len", "1200", "--n", "50", "--seed", "5",
                "--out", str(out)]
        assert main(args) == 0
        config, specs = fileio.parse_clip_samples(out)
        assert config["seed"] == 5
        assert set(specs) == {"v0", "v1"}
        assert all(len(v) == 50 for v in specs.values())
        out2 = tmp_path / "clips2.jsonl"
        assert main(args[:-1] + [str(out2)]) == 0
        assert out.read_bytes() == out2.read_bytes()

    def test_kcas_needs_video_len(self, labels_path, tmp_path):
        assert main(["sample", "--labels", labels_path, "--mode", "kcas",
                     "--out", str(tmp_path / "c.jsonl")]) == 2

    def test_kfs(self, tmp_path, labels_path):
        out = tmp_path / "batch.jsonl"
        assert main(["sample", "--labels", labels_path, "--mode", "kfs",
                     "--procedure", "toy-motorcycle", "--tf", "2.0",
                     "--n-sample", "16", "--seed", "9", "--out", str(out)]) == 0
        spec = fileio.parse_kfs_batch(out)
        assert len(spec.entries) == 176
        assert spec.n_state == 11

    def test_kfs_with_synthetic_pool(self, tmp_path, labels_path):
        pool_path = tmp_path / "pool.json"
        pool_path.write_text(
            json.dumps({str(s): [f"ref-{s}-{i}" for i in range(4)] for s in range(1, 12)})
        )
        out = tmp_path / "batch.jsonl"
        assert main(["sample", "--labels", labels_path, "--mode", "kfs",
                     "--procedure", "toy-motorcycle", "--n-sample", "8",
                     "--n-syn", "8", "--synthetic-pool", str(pool_path),
                     "--out", str(out)]) == 0
        spec = fileio.parse_kfs_batch(out)
        assert sum(1 for e in spec.entries if e.source == "synthetic") == 88


class TestValidateCommand:
    def test_ok(self, tmp_path, capsys):
        gt = {"v": seq_of([(0, 100)], video_id="v")}
        labels = write_labels(tmp_path / "gt.jsonl", gt)
        assert main(["validate", "--labels", labels]) == 0
        assert "OK" in capsys.readouterr().out

    def test_broken_file(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"schema":"psrkit/labels","version":1}\n{"nope":1}\n')
        assert main(["validate", "--labels", str(path)]) == 3

    def test_streams_with_procedure(self, tmp_path):
        toy = toy_motorcycle()
        dets = {"v": [StateDetection(frame=5, state=toy.states[1], confidence=0.9)]}
        stream = tmp_path / "asd.jsonl"
        fileio.serialize_asd_stream(dets, stream)
        assert main(["validate", "--streams", str(stream),
                     "--procedure", "toy-motorcycle"]) == 0
        assert main(["validate", "--streams", str(stream)]) == 3
