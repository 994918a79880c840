import json

import numpy as np
import pytest

from app.cli import main
from app.cli.commands import EXIT_DOMAIN_ERROR, EXIT_OK, EXIT_USAGE_ERROR
from app.schemas.room import Placement, RoomConfig
from app.services.augment.augment_service import AugmentOptions, AugmentService
from app.services.room.image_source import synthesize_rir
from app.services.room.truncation import cutoff_index, power_threshold
from app.utils.file_utils import load_simulation_config
from app.utils.wav_io import read_wav
from conftest import write_mono_wav


def _last_json(capsys) -> dict:
    out = capsys.readouterr().out.strip().splitlines()
    return json.loads(out[-1])


def _write_config(path, **sections):
    path.write_text(json.dumps(sections), encoding="utf-8")
    return path


class TestCmdRir:
    def test_single_tap_config(self, tmp_path, capsys):
        config = _write_config(
            tmp_path / "k0.json",
            room={"dimensions": [4, 4, 4], "reflection_coefficient": 0.5, "image_order": 0},
            source={"position": [1, 1, 1]},
            mics=[{"position": [2, 1, 1]}],
        )
        output = tmp_path / "rir.json"
        assert main(["rir", "--config", str(config), "--output", str(output)]) == EXIT_OK
        taps = np.array(json.loads(output.read_text()))
        assert np.flatnonzero(taps).tolist() == [47]
        assert "48 samples" in capsys.readouterr().out

    def test_cutoff_matches_library(self, tmp_path, capsys):
        room = {"dimensions": [6.5, 5.5, 3.5], "reflection_coefficient": 0.7, "image_order": 4}
        config = _write_config(tmp_path / "room.json", room=room)
        output = tmp_path / "rir.wav"
        code = main([
            "rir", "--config", str(config), "--source", "2", "3", "1.5", "--mic", "4.5", "2.5", "1.2",
            "--eta-db", "20", "--output", str(output), "--json",
        ])
        assert code == EXIT_OK
        payload = _last_json(capsys)

        rir = synthesize_rir(
            RoomConfig(**room), Placement(position=(2, 3, 1.5)), Placement(position=(4.5, 2.5, 1.2))
        )
        assert payload["cutoff_index"] == cutoff_index(rir, power_threshold(rir, 20))
        assert payload["original_length_samples"] == rir.length
        assert read_wav(output).length == payload["length_samples"]

    def test_sampled_room_when_config_has_no_placement(self, tmp_path, small_config):
        output = tmp_path / "rir.json"
        assert main(["rir", "--config", str(small_config), "--output", str(output)]) == EXIT_OK
        assert len(json.loads(output.read_text())) > 1

    def test_malformed_config_writes_nothing(self, tmp_path, capsys):
        config = tmp_path / "bad.json"
        config.write_text("{\"room\": ")
        output = tmp_path / "rir.json"
        assert main(["rir", "--config", str(config), "--output", str(output)]) == EXIT_DOMAIN_ERROR
        assert not output.exists()
        assert "error" in capsys.readouterr().out

    def test_placement_outside_room(self, tmp_path):
        config = _write_config(
            tmp_path / "c.json",
            room={"dimensions": [3, 3, 3], "reflection_coefficient": 0.5, "image_order": 1},
        )
        output = tmp_path / "rir.json"
        code = main([
            "rir", "--config", str(config), "--source", "1", "1", "1", "--mic", "1", "1", "4",
            "--output", str(output),
        ])
        assert code == EXIT_DOMAIN_ERROR
        assert not output.exists()


class TestCmdAugment:
    def _run(self, utterance, config, output, *extra):
        return main(["augment", str(utterance), "--config", str(config), "--output", str(output), *extra])

    def test_byte_identical_reruns(self, tmp_path, utterance, small_config):
        assert self._run(utterance, small_config, tmp_path / "a", "--epoch", "1") == EXIT_OK
        assert self._run(utterance, small_config, tmp_path / "b", "--epoch", "1") == EXIT_OK
        assert (tmp_path / "a.wav").read_bytes() == (tmp_path / "b.wav").read_bytes()

    def test_epochs_differ(self, tmp_path, utterance, small_config):
        self._run(utterance, small_config, tmp_path / "e1", "--epoch", "1")
        self._run(utterance, small_config, tmp_path / "e2", "--epoch", "2")
        assert (tmp_path / "e1.wav").read_bytes() != (tmp_path / "e2.wav").read_bytes()

    def test_seed_flag_overrides_config(self, tmp_path, utterance, small_config, monkeypatch):
        monkeypatch.setenv("ROOMSIM_SEED", "99")
        self._run(utterance, small_config, tmp_path / "env", "--epoch", "1")
        self._run(utterance, small_config, tmp_path / "flag", "--epoch", "1", "--seed", "99")
        self._run(utterance, small_config, tmp_path / "file", "--epoch", "1", "--seed", "1234")
        assert (tmp_path / "env.wav").read_bytes() == (tmp_path / "flag.wav").read_bytes()
        assert (tmp_path / "env.wav").read_bytes() != (tmp_path / "file.wav").read_bytes()

    def test_out_of_range_seed(self, tmp_path, utterance, small_config, monkeypatch):
        assert self._run(utterance, small_config, tmp_path / "neg", "--seed=-5") == EXIT_DOMAIN_ERROR
        monkeypatch.setenv("ROOMSIM_SEED", str(2 ** 64))
        assert self._run(utterance, small_config, tmp_path / "big") == EXIT_DOMAIN_ERROR
        assert not (tmp_path / "neg.wav").exists()
        assert not (tmp_path / "big.wav").exists()

    def test_fft_size_needs_forcing_strategy(self, tmp_path, utterance, small_config):
        assert self._run(utterance, small_config, tmp_path / "auto", "--fft-size", "256") == EXIT_USAGE_ERROR
        assert self._run(utterance, small_config, tmp_path / "direct", "--strategy", "direct", "--fft-size", "256") == EXIT_USAGE_ERROR
        assert self._run(utterance, small_config, tmp_path / "ola", "--strategy", "ola", "--fft-size", "4096") == EXIT_OK

    def test_writes_mic_count_channels(self, tmp_path, utterance, small_config):
        assert self._run(utterance, small_config, tmp_path / "multi", "--format", "float32") == EXIT_OK
        assert read_wav(tmp_path / "multi.wav").channel_count == 2

        assert self._run(utterance, small_config, tmp_path / "split", "--per-channel") == EXIT_OK
        for j in range(2):
            assert read_wav(tmp_path / f"split_ch{j}.wav").is_mono

    def test_direct_and_ola_agree(self, utterance, small_config):
        config = load_simulation_config(small_config)
        signal = read_wav(utterance)
        outputs = []
        for strategy, fft_size in (("direct", None), ("overlap_add", 256)):
            plan = {"strategy": strategy} if fft_size is None else {"strategy": strategy, "fft_size": fft_size}
            options = AugmentOptions(spec=config.sampler, epoch=1, plan_hint=plan)
            outputs.append(AugmentService(options).augment(signal, "utt").mix.channels.samples)
        scale = 1.0 + np.max(np.abs(outputs[0]))
        assert np.max(np.abs(outputs[0] - outputs[1])) <= 1e-9 * scale

    def test_rejects_wrong_sample_rate(self, tmp_path, small_config):
        path = write_mono_wav(tmp_path / "8k.wav", np.ones(800) * 0.1, sample_rate=8000)
        assert self._run(path, small_config, tmp_path / "out") == EXIT_DOMAIN_ERROR
        assert not (tmp_path / "out.wav").exists()

    def test_rejects_multichannel_input(self, tmp_path, small_config):
        path = tmp_path / "stereo.wav"
        write_mono_wav(path, np.full((100, 2), 0.1))
        assert self._run(path, small_config, tmp_path / "out") == EXIT_DOMAIN_ERROR

    def test_noise_pool(self, tmp_path, utterance, small_config):
        rng = np.random.default_rng(3)
        noise = write_mono_wav(tmp_path / "babble.wav", 0.05 * rng.standard_normal(1000))
        code = self._run(utterance, small_config, tmp_path / "noisy", "--noise", str(noise), "--json")
        assert code == EXIT_OK


class TestCmdBatch:
    def _manifest(self, tmp_path, utterance, count, missing=()):
        lines = []
        for i in range(count):
            source = tmp_path / "missing.wav" if i in missing else utterance
            lines.append(json.dumps({
                "utterance_id": f"utt-{i}",
                "input_path": str(source),
                "output_path": str(tmp_path / f"out_{{}}" / f"utt-{i}"),
            }))
        return lines

    def _write(self, tmp_path, name, lines):
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_output_independent_of_parallelism(self, tmp_path, utterance, small_config, monkeypatch):
        monkeypatch.setenv("BATCH_EXECUTOR", "thread")
        lines = self._manifest(tmp_path, utterance, 6)
        for parallelism in ("1", "4"):
            manifest = self._write(tmp_path, f"m{parallelism}.jsonl", [l.replace("out_{}", f"out_{parallelism}") for l in lines])
            code = main(["batch", str(manifest), "--config", str(small_config), "--epoch", "3", "--parallelism", parallelism])
            assert code == EXIT_OK
        for i in range(6):
            assert (tmp_path / "out_1" / f"utt-{i}.wav").read_bytes() == (tmp_path / "out_4" / f"utt-{i}.wav").read_bytes()

    def test_process_pool_output_independent_of_parallelism(self, tmp_path, utterance, small_config):
        # 기본 실행기 (프로세스 풀)
        lines = self._manifest(tmp_path, utterance, 4)
        for parallelism in ("1", "3"):
            manifest = self._write(tmp_path, f"p{parallelism}.jsonl", [l.replace("out_{}", f"proc_{parallelism}") for l in lines])
            code = main(["batch", str(manifest), "--config", str(small_config), "--epoch", "3", "--parallelism", parallelism])
            assert code == EXIT_OK
        for i in range(4):
            assert (tmp_path / "proc_1" / f"utt-{i}.wav").read_bytes() == (tmp_path / "proc_3" / f"utt-{i}.wav").read_bytes()

    def test_process_pool_reports_failed_record(self, tmp_path, utterance, small_config, capsys):
        broken = tmp_path / "broken.wav"
        broken.write_bytes(b"RIFF but not really a wave file")
        lines = [l.replace("out_{}", "proc_out") for l in self._manifest(tmp_path, utterance, 3)]
        lines[1] = lines[1].replace(json.dumps(str(utterance))[1:-1], json.dumps(str(broken))[1:-1])
        manifest = self._write(tmp_path, "p.jsonl", lines)
        assert main(["batch", str(manifest), "--config", str(small_config), "--parallelism", "2"]) == EXIT_DOMAIN_ERROR
        out = capsys.readouterr().out
        assert "FAILED utt-1" in out
        assert "succeeded=2" in out
        assert sorted(p.name for p in (tmp_path / "proc_out").glob("*.wav")) == ["utt-0.wav", "utt-2.wav"]

    def test_matches_single_augment(self, tmp_path, utterance, small_config, monkeypatch):
        monkeypatch.setenv("BATCH_EXECUTOR", "thread")
        lines = [l.replace("out_{}", "batch") for l in self._manifest(tmp_path, utterance, 1)]
        main(["batch", str(self._write(tmp_path, "m.jsonl", lines)), "--config", str(small_config), "--epoch", "2"])
        main([
            "augment", str(utterance), "--config", str(small_config), "--epoch", "2",
            "--utterance-id", "utt-0", "--output", str(tmp_path / "single"),
        ])
        assert (tmp_path / "batch" / "utt-0.wav").read_bytes() == (tmp_path / "single.wav").read_bytes()

    def test_empty_manifest(self, tmp_path, small_config, capsys):
        manifest = self._write(tmp_path, "empty.jsonl", [])
        assert main(["batch", str(manifest), "--config", str(small_config)]) == EXIT_OK
        assert "processed=0" in capsys.readouterr().out

    def test_one_unreadable_input(self, tmp_path, utterance, small_config, monkeypatch, capsys):
        monkeypatch.setenv("BATCH_EXECUTOR", "thread")
        lines = [l.replace("out_{}", "out") for l in self._manifest(tmp_path, utterance, 5, missing={2})]
        manifest = self._write(tmp_path, "m.jsonl", lines)
        assert main(["batch", str(manifest), "--config", str(small_config), "--parallelism", "2"]) == EXIT_DOMAIN_ERROR
        out = capsys.readouterr().out
        assert "FAILED utt-2" in out
        assert "succeeded=4" in out
        assert len(list((tmp_path / "out").glob("*.wav"))) == 4

    def test_manifest_header_config(self, tmp_path, utterance, small_config, monkeypatch):
        monkeypatch.setenv("BATCH_EXECUTOR", "thread")
        header = json.dumps({"config": str(small_config), "epoch": 1})
        lines = [header, *[l.replace("out_{}", "hdr") for l in self._manifest(tmp_path, utterance, 1)]]
        assert main(["batch", str(self._write(tmp_path, "h.jsonl", lines))]) == EXIT_OK
        assert (tmp_path / "hdr" / "utt-0.wav").exists()


class TestCmdCost:
    def test_average_utterance_inputs(self, capsys):
        assert main(["cost", "2.55", "2", "116991", "3893"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "best: overlap_add N=16384" in out
        assert "2,322,774,411.3" in out
        assert "69,520,588.8" in out
        assert "50,803,507.2" in out

    def test_json_table(self, capsys):
        assert main(["cost", "1", "1", "1", "1", "--json"]) == EXIT_OK
        table = _last_json(capsys)
        assert table["best"]["strategy"] == "full_fft"
        assert [row["cost"] for row in table["rows"]] == [1.0, 2.0, 2.0]
        assert sum(row["is_best"] for row in table["rows"]) == 1

    def test_usage_error(self):
        assert main(["cost", "1", "1"]) == EXIT_USAGE_ERROR
        assert main(["nonsense"]) == EXIT_USAGE_ERROR

    def test_non_positive_argument(self):
        assert main(["cost", "0", "1", "10", "10"]) == EXIT_DOMAIN_ERROR


class TestCmdBench:
    def test_small_run(self, tmp_path, capsys):
        report_path = tmp_path / "bench.json"
        code = main([
            "bench", "--trials", "5", "--signal-len", "4000", "--rir-len", "300",
            "--include-direct", "--output-json", str(report_path), "--json",
        ])
        assert code == EXIT_OK
        report = json.loads(report_path.read_text())
        labels = [(e["strategy"], e["eta_db"]) for e in report["entries"]]
        assert labels == [
            ("direct", None),
            ("full_fft", None), ("overlap_add", None),
            ("full_fft", 20.0), ("overlap_add", 20.0),
            ("full_fft", 10.0), ("overlap_add", 10.0),
        ]
        assert min(e["speedup"] for e in report["entries"]) == pytest.approx(1.0)
        assert _last_json(capsys) == report

    def test_too_few_trials(self):
        assert main(["bench", "--trials", "3", "--signal-len", "1000", "--rir-len", "100"]) == EXIT_DOMAIN_ERROR
