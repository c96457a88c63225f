"""Command-line entry point: ``smru {process,simulate,bench,macs,init-weights}``.

Exit codes: 0 ok, 2 usage, 3 format, 4 numeric failure.  Errors are written to
stderr as a single JSON object ``{"error": ..., "message": ...}``.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .complexity import count_macs
from .config import PRESETS, ModelConfig
from .errors import ConfigError, ContractError, FormatError, NumericError, ShapeError
from .frontend import read_wav, stft, write_wav
from .losses import LossWeights, echo_loss, erle, mae_loss, si_snr, total_loss, vad_from_signal, vad_loss
from .pipeline import enhance_offline
from .scenes import SceneSpec, active_power, mix_scene
from .streaming import Stream
from .weights import init_weights, load_weights, save_weights

EXIT_USAGE, EXIT_FORMAT, EXIT_NUMERIC = 2, 3, 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _emit(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def _config(args) -> ModelConfig:
    if getattr(args, "embedding", None) is not None:
        cfg = replace(ModelConfig.preset("T"), E=args.embedding, name=f"E{args.embedding}")
    else:
        cfg = ModelConfig.preset(args.preset)
    return cfg


def _weights(args, cfg):
    if args.weights:
        return load_weights(args.weights, cfg)
    return init_weights(cfg, args.seed)


def _json_float(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def enhance_streaming(mic, farend, cfg, w) -> np.ndarray:
    """Streaming output re-aligned to the input (one-hop latency removed, flush appended)."""
    hop = 160
    n = len(mic)
    pad = -(-max(n, 2 * hop) // hop) * hop - n
    stream = Stream(cfg, w)
    out = stream.process(np.pad(mic, (0, pad)), np.pad(farend, (0, pad)))
    out = np.concatenate([out, stream.flush()])
    return out[hop : hop + n]


def cmd_process(args):
    cfg = _config(args)
    w = _weights(args, cfg)
    if args.no_postnet:
        cfg = cfg.with_postnet(False)
    mic = read_wav(args.mic).samples
    far = read_wav(args.farend).samples
    if len(mic) != len(far):
        raise ShapeError(f"mic has {len(mic)} samples, far-end {len(far)}")
    if args.streaming:
        out = enhance_streaming(mic, far, cfg, w)
    else:
        out = enhance_offline(mic, far, cfg, w)
    if not np.all(np.isfinite(out)):
        raise NumericError("enhanced output contains non-finite samples")
    write_wav(args.out, out)
    record = {
        "kind": "process",
        "preset": cfg.name,
        "mode": "streaming" if args.streaming else "offline",
        "postnet": cfg.postnet.enabled,
        "samples": int(len(out)),
        "duration_s": len(out) / 16000,
        "erle_db": _json_float(erle(mic, out)) if np.any(out) else "inf",
        "output": str(args.out),
    }
    if args.scenario:
        record["scenario"] = args.scenario
    if args.target:
        target = read_wav(args.target).samples
        if len(target) != len(out):
            raise ShapeError("target length differs from mic length")
        est_spec, ref_spec = stft(out), stft(target)
        labels = vad_from_signal(target)
        echo_active = vad_from_signal(far)
        record["si_snr_db"] = si_snr(out, target)
        record["losses"] = {
            "mae": mae_loss(est_spec, ref_spec),
            "vad": vad_loss(est_spec, labels),
            "echo": echo_loss(est_spec, ref_spec, echo_active),
            "total": total_loss(est_spec, ref_spec, labels, echo_active, LossWeights()),
        }
    _emit(record, args.metrics)


def _scene_specs(args):
    if args.spec_json:
        try:
            data = json.loads(Path(args.spec_json).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise FormatError(f"cannot read scene spec {args.spec_json}: {exc}") from exc
        items = data if isinstance(data, list) else [data]
        return [SceneSpec.from_json(d) for d in items]
    ser = float(args.ser)
    scenario = args.scenario or ("ST-NE" if ser == math.inf else "ST-FE" if ser == -math.inf else "DT")
    return [
        SceneSpec(seed=args.seed + i, duration=args.duration, scenario=scenario, ser_db=ser,
                  snr_db=float(args.snr), rir_ms=args.rir_ms, t60=args.t60)
        for i in range(args.count)
    ]


def _measured_db(num, den):
    pn, pd = active_power(num), active_power(den)
    if pd == 0:
        return "inf"
    if pn == 0:
        return "-inf"
    return 10 * math.log10(pn / pd)


def cmd_simulate(args):
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scenes = []
    for spec in _scene_specs(args):
        scene = mix_scene(spec)
        sid = f"scene_{spec.seed:05d}_{spec.scenario}"
        files = {}
        for role, sig in (("mic", scene.mic), ("farend", scene.farend), ("nearend", scene.nearend), ("echo", scene.echo)):
            name = f"{sid}_{role}.wav"
            write_wav(out_dir / name, sig)
            files[role] = name
        scenes.append({
            "id": sid,
            "spec": spec.to_json(),
            "files": files,
            "measured": {
                "ser_db": _measured_db(scene.nearend, scene.echo),
                "snr_db": _measured_db(scene.nearend if spec.scenario != "ST-FE" else scene.echo, scene.noise),
            },
        })
    manifest = {"sample_rate": 16000, "scenes": scenes}
    _emit(manifest, out_dir / "manifest.json")
    _emit({"manifest": str(out_dir / "manifest.json"), "count": len(scenes)})


def cmd_bench(args):
    cfg = _config(args)
    w = init_weights(cfg, args.seed)
    if args.no_postnet:
        cfg = cfg.with_postnet(False)
    scene = mix_scene(SceneSpec(seed=args.seed, duration=args.seconds + args.warmup * 0.01, scenario="DT", ser_db=5.0, snr_db=15.0))
    stream = Stream(cfg, w)
    hop = 160
    times = []
    for i in range(len(scene.mic) // hop):
        sl = slice(i * hop, (i + 1) * hop)
        t0 = time.perf_counter()
        stream.push(scene.mic[sl], scene.farend[sl])
        if i >= args.warmup:
            times.append(time.perf_counter() - t0)
    times = np.array(times)
    rep = count_macs(cfg)
    _emit({
        "kind": "bench",
        "preset": cfg.name,
        "postnet": cfg.postnet.enabled,
        "pushes": int(len(times)),
        "audio_seconds": len(times) * 0.01,
        "rtf": float(times.sum() / (len(times) * 0.01)),
        "mean_push_ms": float(times.mean() * 1e3),
        "p95_push_ms": float(np.percentile(times, 95) * 1e3),
        "max_push_ms": float(times.max() * 1e3),
        "macs_per_second": rep.total_macs_per_second,
    })


def cmd_macs(args):
    cfg = _config(args)
    if args.no_postnet:
        cfg = cfg.with_postnet(False)
    rep = count_macs(cfg)
    if args.json:
        _emit(rep.to_json())
    else:
        print(rep.table())


def cmd_init_weights(args):
    cfg = _config(args)
    store = init_weights(cfg, args.seed)
    save_weights(store, args.out)
    _emit({"weights": str(args.out), "preset": cfg.name, "seed": args.seed, "params": store.n_params(),
           "config_hash": cfg.config_hash().hex()})


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="smru", description="Hybrid AEC + noise suppression engine")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model_args(p, weights=True):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--preset", choices=PRESETS, default="T")
        g.add_argument("--embedding", type=int, help="custom embedding dim E (T preset otherwise)")
        p.add_argument("--seed", type=int, default=0)
        if weights:
            p.add_argument("--weights", help="weight file; seeded init when omitted")

    p = sub.add_parser("process", help="enhance a mic/far-end WAV pair")
    p.add_argument("--mic", required=True)
    p.add_argument("--farend", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--target", help="clean near-end WAV for SI-SNR and losses")
    p.add_argument("--metrics", help="write the metrics JSON here instead of stdout")
    p.add_argument("--scenario", choices=("ST-NE", "ST-FE", "DT"))
    p.add_argument("--no-postnet", action="store_true")
    p.add_argument("--streaming", action="store_true")
    model_args(p)
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("simulate", help="write synthetic scenes and a manifest")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--spec-json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--duration", type=float, default=4.0)
    p.add_argument("--scenario", choices=("ST-NE", "ST-FE", "DT"))
    p.add_argument("--ser", default="5", help="dB, or inf / -inf")
    p.add_argument("--snr", default="15", help="dB, or inf for no noise")
    p.add_argument("--rir-ms", type=float, default=64.0)
    p.add_argument("--t60", type=float, default=0.25)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="streaming real-time factor on synthetic input")
    model_args(p, weights=False)
    p.add_argument("--seconds", type=float, default=5.0)
    p.add_argument("--warmup", type=int, default=20, help="untimed warm-up pushes")
    p.add_argument("--no-postnet", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("macs", help="analytic complexity report")
    model_args(p, weights=False)
    p.add_argument("--no-postnet", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_macs)

    p = sub.add_parser("init-weights", help="write a seeded weight file")
    model_args(p, weights=False)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_init_weights)
    return ap


def _fail(code, kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except _UsageError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc))
    except (ConfigError, ContractError, ValueError) as exc:
        if isinstance(exc, (FormatError, ShapeError)):
            return _fail(EXIT_FORMAT, "format", str(exc))
        return _fail(EXIT_USAGE, "usage", str(exc))
    except (FormatError, OSError) as exc:
        return _fail(EXIT_FORMAT, "format", str(exc))
    except (NumericError, FloatingPointError) as exc:
        return _fail(EXIT_NUMERIC, "numeric", str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
