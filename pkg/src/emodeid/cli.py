"""Command-line entry point binding the toolkit into batch workflows.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 remote-client error,
4 validation error. Option precedence: flags > environment variables
(EMODEID_*) > config file (--config) > defaults. Every command echoes its
effective configuration, and outputs are written atomically.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from pathlib import Path

import click

from . import annotations as ann
from . import metrics as met
from .anonymize import AnonymizationParams, anonymize_mcadams
from .clients import MockLlmClient, MockMllmClient, RemoteLlmClient, RemoteMllmClient
from .dsp import FrameParams
from .errors import (
    ClientUnavailableError,
    DetectorUnavailableError,
    EmodeidError,
    InvalidParamError,
    ParseError,
    ResponseEmptyError,
)
from .pipeline import (
    MODES,
    DirectoryMediaSource,
    SamplingConfig,
    read_results,
    run_batch,
    write_results,
)
from .video import RemoteDetector, SidecarDetector, mask_frames, read_ppm, write_ppm
from .wavio import read_wav, write_wav

EXIT_USAGE = 1
EXIT_IO = 2
EXIT_REMOTE = 3
EXIT_VALIDATION = 4


def _load_config_file(path):
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad config file: {exc.msg}", context=str(path))


def _resolve(ctx, config, **defaults):
    """Fill in options the user did not set from config file, then defaults."""
    out = {}
    for name, default in defaults.items():
        value = ctx.params.get(name)
        source = ctx.get_parameter_source(name)
        if value is not None and source is not None and source.name in (
            "COMMANDLINE",
            "ENVIRONMENT",
        ):
            out[name] = value
        elif name in config:
            out[name] = config[name]
        elif value is not None:
            out[name] = value
        else:
            out[name] = default
    return out


def _echo_config(name, cfg):
    click.echo(f"config {name}: " + json.dumps(cfg, sort_keys=True))


def _atomic_write_bytes(path: Path, data: bytes):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_text(path: Path, text: str):
    _atomic_write_bytes(path, text.encode("utf-8"))


@click.group()
def cli():
    """Privacy-preserving multimodal emotion analysis toolkit."""


@cli.command("anonymize-audio")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("output_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--mcadams-lambda", "--lambda", "mcadams_lambda", type=float, default=None)
@click.option("--win-ms", type=float, default=None)
@click.option("--shift-ms", type=float, default=None)
@click.option("--lpc-order", type=int, default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.pass_context
def cmd_anonymize_audio(ctx, input_path, output_path, mcadams_lambda, win_ms, shift_ms, lpc_order, config_path):
    """Speaker-anonymize a waveform file via pole-angle warping."""
    cfg = _resolve(
        ctx,
        _load_config_file(config_path),
        mcadams_lambda=0.8,
        win_ms=20.0,
        shift_ms=10.0,
        lpc_order=20,
    )
    _echo_config("anonymize-audio", cfg)
    audio, encoding = read_wav(input_path)
    params = AnonymizationParams(
        frame=FrameParams(cfg["win_ms"], cfg["shift_ms"], cfg["lpc_order"]),
        mcadams_lambda=cfg["mcadams_lambda"],
    )
    out = anonymize_mcadams(audio, params)
    fd, tmp = tempfile.mkstemp(dir=output_path.parent or Path("."), prefix=f".{output_path.name}.")
    os.close(fd)
    try:
        write_wav(tmp, out, encoding)
        os.replace(tmp, output_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    click.echo(f"wrote {output_path} ({out.duration_s:.2f} s at {out.sample_rate_hz} Hz)")


@cli.command("mask-frames")
@click.argument("frames_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.argument("output_dir", type=click.Path(file_okay=False, path_type=Path))
@click.option("--boxes", "boxes_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--detector-url", default=None)
@click.option("--sigma", type=float, default=None, help="Fixed blur sigma for every box.")
@click.option("--sigma-scale", type=float, default=0.25, show_default=True,
              help="Box-proportional sigma: scale * max(w, h).")
def cmd_mask_frames(frames_dir, output_dir, boxes_path, detector_url, sigma, sigma_scale):
    """Blur face regions in a directory of PPM frames (sorted, index order)."""
    if (boxes_path is None) == (detector_url is None):
        raise click.UsageError("provide exactly one of --boxes or --detector-url")
    detector = (
        SidecarDetector(boxes_path) if boxes_path else RemoteDetector(detector_url)
    )
    policy = (lambda b: sigma) if sigma else (lambda b: sigma_scale * max(b.w, b.h))
    _echo_config(
        "mask-frames",
        {"boxes": str(boxes_path) if boxes_path else None, "detector_url": detector_url,
         "sigma": sigma, "sigma_scale": sigma_scale},
    )
    paths = sorted(frames_dir.glob("*.ppm"))
    output_dir.mkdir(parents=True, exist_ok=True)
    failed = []
    known = set()
    for index, path in enumerate(paths):
        frame = read_ppm(path)
        known.add(index)
        try:
            boxes = detector.detect(frame, index)
        except DetectorUnavailableError as exc:
            failed.append(path.name)
            click.echo(f"detector failed on {path.name}: {exc}", err=True)
            continue
        masked = mask_frames([frame], boxes)[0]
        out_path = output_dir / path.name
        fd, tmp = tempfile.mkstemp(dir=output_dir, prefix=f".{path.name}.")
        os.close(fd)
        try:
            write_ppm(tmp, masked)
            os.replace(tmp, out_path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    if isinstance(detector, SidecarDetector):
        for idx in sorted(set(detector.boxes) - known):
            click.echo(f"warning: boxes reference missing frame index {idx}; skipped", err=True)
    if failed:
        raise DetectorUnavailableError(f"detection failed for frames: {', '.join(failed)}")
    click.echo(f"masked {len(paths)} frames into {output_dir}")


def _build_clients(mock_fixtures, mllm_endpoint, judge_endpoint, auth_token, timeout_s, max_attempts):
    if mock_fixtures is not None:
        doc = json.loads(Path(mock_fixtures).read_text())
        return MockMllmClient(doc.get("mllm", {})), MockLlmClient(doc.get("judge", {}))
    if not (mllm_endpoint and judge_endpoint):
        raise click.UsageError(
            "provide --mock-fixtures or both --mllm-endpoint and --judge-endpoint"
        )
    return (
        RemoteMllmClient(mllm_endpoint, auth_token, timeout_s, max_attempts),
        RemoteLlmClient(judge_endpoint, auth_token, timeout_s, max_attempts),
    )


@cli.command("run-pipeline")
@click.argument("annotations_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("media_root", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.argument("output_dir", type=click.Path(file_okay=False, path_type=Path))
@click.option("--mode", type=click.Choice(list(MODES) + ["all"]), default="van", show_default=True)
@click.option("--mock-fixtures", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--mllm-endpoint", default=None)
@click.option("--judge-endpoint", default=None)
@click.option("--auth-token", default=None)
@click.option("--timeout-s", type=float, default=None)
@click.option("--max-attempts", type=int, default=None)
@click.option("--frame-count", type=int, default=None)
@click.option("--audio-segment-s", type=float, default=None)
@click.option("--mel-bins", type=int, default=None)
@click.option("--max-segments", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.pass_context
def cmd_run_pipeline(ctx, annotations_path, media_root, output_dir, mode, mock_fixtures,
                     mllm_endpoint, judge_endpoint, auth_token, timeout_s, max_attempts,
                     frame_count, audio_segment_s, mel_bins, max_segments, workers, seed,
                     config_path):
    """Run the two-stage inference over every annotated video."""
    cfg = _resolve(
        ctx,
        _load_config_file(config_path),
        mode=mode,
        mllm_endpoint=None,
        judge_endpoint=None,
        auth_token=None,
        timeout_s=120.0,
        max_attempts=3,
        frame_count=32,
        audio_segment_s=2.0,
        mel_bins=128,
        max_segments=None,
        workers=os.cpu_count() or 4,
        seed=0,
    )
    records = ann.load_annotations(annotations_path)
    media = DirectoryMediaSource(media_root)
    sampling = SamplingConfig(
        frame_count=cfg["frame_count"],
        audio_segment_s=cfg["audio_segment_s"],
        mel_bins=cfg["mel_bins"],
        max_segments=cfg["max_segments"],
    )
    echo_cfg = dict(cfg, mock_fixtures=str(mock_fixtures) if mock_fixtures else None)
    _echo_config("run-pipeline", echo_cfg)
    output_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write_text(output_dir / "config.json", json.dumps(echo_cfg, sort_keys=True, indent=2) + "\n")

    modes = list(MODES) if cfg["mode"] == "all" else [cfg["mode"]]
    labels = {r.video_id: r.emotion for r in records}
    per_mode = {}
    for m in modes:
        mllm, judge = _build_clients(
            mock_fixtures, cfg["mllm_endpoint"], cfg["judge_endpoint"],
            cfg["auth_token"], cfg["timeout_s"], cfg["max_attempts"],
        )
        outcome = run_batch(records, media, sampling, mllm, judge, mode=m,
                            workers=cfg["workers"])
        mode_dir = output_dir / m
        write_results(mode_dir, outcome)
        triples = [
            (r.response.emotion, labels[r.video_id], r.response.confidence)
            for r in outcome.results
        ]
        per_mode[m] = triples
        if triples:
            report = met.evaluate(
                [t[0] for t in triples], [t[1] for t in triples], [t[2] for t in triples]
            )
            _atomic_write_text(mode_dir / "summary.txt", report.format() + "\n")
        click.echo(f"mode {m}: {len(outcome.results)} results, {len(outcome.failures)} failures")
    populated = {m: t for m, t in per_mode.items() if t}
    if populated:
        table = met.ablation_report(populated)
        _atomic_write_text(output_dir / "ablation.txt", table + "\n")
        _atomic_write_text(output_dir / "ablation.csv", met.ablation_csv(populated) + "\n")
        click.echo(table)


def _collect_result_files(results_path: Path) -> list[Path]:
    if results_path.is_file():
        return [results_path]
    return sorted(results_path.glob("**/results.jsonl"))


@cli.command("evaluate")
@click.argument("results_path", type=click.Path(exists=True, path_type=Path))
@click.argument("annotations_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def cmd_evaluate(results_path, annotations_path):
    """Score prediction records against annotation labels."""
    labels = {r.video_id: r.emotion for r in ann.load_annotations(annotations_path)}
    files = _collect_result_files(results_path)
    if not files:
        raise ParseError(f"no results.jsonl found under {results_path}")
    by_mode = {}
    for path in files:
        for rec in read_results(path):
            if rec["video_id"] not in labels:
                raise ParseError(f"no label for video {rec['video_id']}", context=str(path))
            by_mode.setdefault(rec["mode"], []).append(
                (ann.Emotion(rec["emotion"]), labels[rec["video_id"]], rec["confidence"])
            )
    if len(by_mode) > 1:
        click.echo(met.ablation_report(by_mode))
    else:
        ((_, triples),) = by_mode.items()
        report = met.evaluate(
            [t[0] for t in triples], [t[1] for t in triples], [t[2] for t in triples]
        )
        click.echo(report.format())


@cli.command("stats")
@click.argument("annotations_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--histogram-csv", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Also write the class histogram as CSV.")
def cmd_stats(annotations_path, histogram_csv):
    """Print dataset summary and the body-language class histogram."""
    records = ann.load_annotations(annotations_path)
    summary = ann.dataset_summary(records)
    click.echo(summary.format())
    hist = ann.nfbl_histogram(records)
    click.echo("\nClass histogram:")
    for cid in sorted(hist, key=lambda c: int(c[1:])):
        cls = ann.NFBL_REGISTRY[cid]
        click.echo(f"  {cid:<4} {cls.name:<52} {hist[cid]}")
    if histogram_csv is not None:
        lines = ["class_id,name,category,count"] + [
            f"{cid},{ann.NFBL_REGISTRY[cid].name!r},{ann.NFBL_REGISTRY[cid].category.value},{hist[cid]}"
            for cid in sorted(hist, key=lambda c: int(c[1:]))
        ]
        _atomic_write_text(histogram_csv, "\n".join(lines) + "\n")
        click.echo(f"wrote {histogram_csv}")


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False, auto_envvar_prefix="EMODEID")
        return 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    except (ClientUnavailableError, DetectorUnavailableError, ResponseEmptyError) as exc:
        click.echo(f"remote-client error: {exc}", err=True)
        return EXIT_REMOTE
    except ParseError as exc:
        click.echo(f"validation error: {exc}", err=True)
        return EXIT_VALIDATION
    except EmodeidError as exc:
        click.echo(f"validation error: {exc}", err=True)
        return EXIT_VALIDATION
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
