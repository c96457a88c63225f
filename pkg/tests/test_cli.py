import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from smru.cli import main
from smru.frontend import read_wav


def schema(name):
    return json.loads(resources.files("smru").joinpath("schemas", f"{name}.schema.json").read_text())


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def scenes(tmp_path_factory):
    d = tmp_path_factory.mktemp("scenes")
    assert main(["simulate", "--out-dir", str(d), "--seed", "2", "--count", "2", "--duration", "1"]) == 0
    return d


def test_simulate_manifest(scenes):
    manifest = json.loads((scenes / "manifest.json").read_text())
    jsonschema.validate(manifest, schema("manifest"))
    assert len(manifest["scenes"]) == 2
    for entry in manifest["scenes"]:
        for path in entry["files"].values():
            assert len(read_wav(scenes / path if not path.startswith("/") else path)) == 16000


def test_simulate_is_deterministic(tmp_path, capsys):
    for sub in ("a", "b"):
        assert run(["simulate", "--out-dir", tmp_path / sub, "--seed", 5, "--duration", 0.5], capsys)[0] == 0
    for f in (tmp_path / "a").glob("*.wav"):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def _scene_files(scenes):
    return {k: scenes / f"scene_00002_DT_{k}.wav" for k in ("mic", "farend", "nearend")}


def test_process_offline_and_streaming_agree(scenes, tmp_path, capsys):
    f = _scene_files(scenes)
    outs = []
    for extra in ([], ["--streaming"]):
        out = tmp_path / f"o{len(extra)}.wav"
        metrics = tmp_path / f"m{len(extra)}.json"
        code, _, _ = run(["process", "--mic", f["mic"], "--farend", f["farend"], "--out", out,
                          "--target", f["nearend"], "--metrics", metrics, "--preset", "T"] + extra, capsys)
        assert code == 0
        rec = json.loads(metrics.read_text())
        jsonschema.validate(rec, schema("metrics"))
        outs.append(read_wav(out).samples)
    assert len(outs[0]) == 16000
    assert np.abs(outs[0] - outs[1]).max() <= 2 / 32768


def test_process_with_saved_weights(scenes, tmp_path, capsys):
    f = _scene_files(scenes)
    assert run(["init-weights", "--preset", "T", "--seed", 3, "--out", tmp_path / "w.bin"], capsys)[0] == 0
    a, b = tmp_path / "a.wav", tmp_path / "b.wav"
    assert run(["process", "--mic", f["mic"], "--farend", f["farend"], "--out", a, "--weights", tmp_path / "w.bin"], capsys)[0] == 0
    assert run(["process", "--mic", f["mic"], "--farend", f["farend"], "--out", b, "--seed", 3], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_macs_json(capsys):
    code, out, _ = run(["macs", "--preset", "H", "--json", "--no-postnet"], capsys)
    assert code == 0
    rec = json.loads(out)
    jsonschema.validate(rec, schema("complexity"))
    assert 5.5e9 <= rec["total_macs_per_second"] <= 8.0e9


def test_macs_table(capsys):
    code, out, _ = run(["macs", "--preset", "T"], capsys)
    assert code == 0 and "parameters" in out


def test_bench(capsys):
    code, out, _ = run(["bench", "--preset", "T", "--seconds", 0.5, "--warmup", 5], capsys)
    assert code == 0
    jsonschema.validate(json.loads(out), schema("bench"))


@pytest.mark.parametrize("argv,code,kind", [
    (["bogus"], 2, "usage"),
    (["macs", "--preset", "Z"], 2, "usage"),
    (["process", "--mic", "/nonexistent.wav", "--farend", "/nonexistent.wav", "--out", "/tmp/x.wav"], 3, "format"),
])
def test_errors_are_json(argv, code, kind, capsys):
    got, _, err = run(argv, capsys)
    assert got == code
    rec = json.loads(err.strip().splitlines()[-1])
    jsonschema.validate(rec, schema("error"))
    assert rec["error"] == kind


def test_mismatched_lengths_rejected(scenes, tmp_path, capsys):
    from smru.frontend import write_wav
    write_wav(tmp_path / "short.wav", np.zeros(800))
    f = _scene_files(scenes)
    code, _, err = run(["process", "--mic", f["mic"], "--farend", tmp_path / "short.wav", "--out", tmp_path / "o.wav"], capsys)
    assert code in (2, 3) and json.loads(err.strip().splitlines()[-1])["error"] in ("usage", "format")
