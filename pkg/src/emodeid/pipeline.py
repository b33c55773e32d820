"""Two-stage inference orchestration: multimodal description, then judgment.

Stage 2 feeds uniformly sampled frames, 2-second mel spectrogram clips, and
rendered body-language text to a multimodal model client; stage 3 asks a
text-only judge to turn the descriptive response into a binary emotion plus
a 0-10 confidence score.
"""

from __future__ import annotations

import json
import math
import re
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .annotations import NFBL_REGISTRY, Emotion, NfblClip, VideoRecord
from .clients import LlmClient, MllmClient
from .dsp import AudioSignal, mel_spectrogram
from .errors import (
    EmodeidError,
    EmptyInputError,
    InvalidParamError,
    JudgeParseError,
    UnknownClassError,
)
from .video import FrameImage, read_ppm
from .wavio import read_wav

MODES = ("v", "va", "van")

NO_NFBL_LINE = "No notable body language was observed."

_EMOTION_RE = re.compile(r"^\s*EMOTION:\s*(positive|negative)\s*$", re.IGNORECASE | re.MULTILINE)
_CONFIDENCE_RE = re.compile(r"^\s*CONFIDENCE:\s*([-+]?\d+(?:\.\d+)?)\s*$", re.IGNORECASE | re.MULTILINE)

REFORMAT_INSTRUCTION = (
    "\n\nYour previous answer could not be parsed. Answer again using exactly "
    "two lines and nothing else:\nEMOTION: <positive|negative>\n"
    "CONFIDENCE: <number between 0 and 10>"
)


@dataclass(frozen=True)
class SamplingConfig:
    """How many frames and audio segments feed the multimodal model."""

    frame_count: int = 32
    audio_segment_s: float = 2.0
    mel_bins: int = 128
    max_segments: int | None = None

    def __post_init__(self):
        if self.frame_count < 1:
            raise InvalidParamError("frame_count must be at least 1")
        if self.audio_segment_s <= 0:
            raise InvalidParamError("audio_segment_s must be positive")


def default_prompts() -> "PromptBundle":
    base = resources.files("emodeid").joinpath("prompts")
    return PromptBundle(
        mllm_template=base.joinpath("mllm_prompt.txt").read_text(),
        judge_template=base.joinpath("judge_prompt.txt").read_text(),
    )


@dataclass
class PromptBundle:
    """Instruction templates; the judge template has a {response} slot."""

    mllm_template: str
    judge_template: str

    def __post_init__(self):
        if "{nfbl_section}" not in self.mllm_template:
            raise InvalidParamError("mllm template needs an {nfbl_section} slot")
        if "{response}" not in self.judge_template:
            raise InvalidParamError("judge template needs a {response} slot")


@dataclass
class PipelineResponse:
    """Final judged outcome plus the descriptive text it was based on."""

    mllm_text: str
    emotion: Emotion
    confidence: float
    confidence_clamped: bool = False


@dataclass
class PipelineResult:
    video_id: str
    mode: str
    response: PipelineResponse
    timing_s: float = 0.0

    def to_record(self) -> dict:
        return {
            "video_id": self.video_id,
            "mode": self.mode,
            "emotion": self.response.emotion.value,
            "confidence": self.response.confidence,
            "confidence_clamped": self.response.confidence_clamped,
            "mllm_text": self.response.mllm_text,
            "timing_s": self.timing_s,
        }


def sample_frames_uniform(total_frames: int, m: int) -> list[int]:
    """Segment-center sampling: index_i = floor((i + 0.5) * total / m)."""
    if total_frames < 1 or m < 1:
        raise InvalidParamError("total_frames and m must be at least 1")
    return [int(math.floor((i + 0.5) * total_frames / m)) for i in range(m)]


def segment_audio(audio: AudioSignal, seg_s: float) -> list[AudioSignal]:
    """Consecutive non-overlapping clips of seg_s seconds; remainder dropped."""
    if audio.samples.size == 0:
        raise EmptyInputError("cannot segment an empty signal")
    if seg_s <= 0:
        raise InvalidParamError("segment length must be positive")
    seg = int(round(seg_s * audio.sample_rate_hz))
    count = audio.samples.size // seg
    return [
        AudioSignal(audio.samples[i * seg : (i + 1) * seg], audio.sample_rate_hz)
        for i in range(count)
    ]


def render_nfbl_section(clips: list[NfblClip], registry=NFBL_REGISTRY) -> str:
    """Deterministic text rendering of clips, sorted by start time."""
    if not clips:
        return NO_NFBL_LINE
    lines = ["Observed body language:"]
    for clip in sorted(clips, key=lambda c: (c.start_s, c.end_s, c.class_id)):
        if clip.class_id not in registry:
            raise UnknownClassError(f"unknown body-language class: {clip.class_id}")
        name = registry[clip.class_id].name
        lines.append(f"- {name} from {clip.start_s:.1f}s to {clip.end_s:.1f}s")
    return "\n".join(lines)


def build_mllm_prompt(
    clips: list[NfblClip], registry=NFBL_REGISTRY, template: str | None = None
) -> str:
    if template is None:
        template = default_prompts().mllm_template
    return template.format(nfbl_section=render_nfbl_section(clips, registry))


def mllm_infer(client: MllmClient, frames, spectrograms, prompt: str) -> str:
    """Descriptive text from the multimodal model, verbatim."""
    return client.generate(prompt, frames, spectrograms)


def parse_judge_reply(reply: str) -> tuple[Emotion, float, bool]:
    """Parse the two-line answer grammar; confidence clamped into [0, 10]."""
    emotion_m = _EMOTION_RE.search(reply)
    confidence_m = _CONFIDENCE_RE.search(reply)
    if emotion_m is None or confidence_m is None:
        raise JudgeParseError(f"reply does not match the answer grammar: {reply!r}")
    emotion = Emotion(emotion_m.group(1).lower())
    raw = float(confidence_m.group(1))
    clamped = not 0.0 <= raw <= 10.0
    return emotion, min(max(raw, 0.0), 10.0), clamped


def judge_emotion(
    client: LlmClient, mllm_text: str, template: str | None = None
) -> tuple[Emotion, float, bool]:
    """Judge the descriptive text; one reformat retry before giving up."""
    if not mllm_text.strip():
        raise EmptyInputError("descriptive text is empty")
    if template is None:
        template = default_prompts().judge_template
    prompt = template.format(response=mllm_text)
    try:
        return parse_judge_reply(client.complete(prompt))
    except JudgeParseError:
        return parse_judge_reply(client.complete(prompt + REFORMAT_INSTRUCTION))


class MediaSource(ABC):
    """De-identified media for a video id (stage 1 already applied)."""

    @abstractmethod
    def frame_count(self, video_id: str) -> int: ...

    @abstractmethod
    def load_frame(self, video_id: str, index: int) -> FrameImage: ...

    @abstractmethod
    def load_audio(self, video_id: str) -> AudioSignal: ...


class DirectoryMediaSource(MediaSource):
    """Media layout: <root>/<video_id>/frames/*.ppm (sorted) and audio.wav."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _frame_paths(self, video_id: str) -> list[Path]:
        return sorted((self.root / video_id / "frames").glob("*.ppm"))

    def frame_count(self, video_id: str) -> int:
        return len(self._frame_paths(video_id))

    def load_frame(self, video_id: str, index: int) -> FrameImage:
        return read_ppm(self._frame_paths(video_id)[index])

    def load_audio(self, video_id: str) -> AudioSignal:
        audio, _ = read_wav(self.root / video_id / "audio.wav")
        return audio


def run_pipeline(
    record: VideoRecord,
    media: MediaSource,
    config: SamplingConfig,
    mllm: MllmClient,
    judge: LlmClient,
    mode: str = "van",
    prompts: PromptBundle | None = None,
) -> PipelineResult:
    """End-to-end inference for one video in the selected ablation mode."""
    if mode not in MODES:
        raise InvalidParamError(f"mode must be one of {MODES}")
    if prompts is None:
        prompts = default_prompts()
    started = time.monotonic()

    total = media.frame_count(record.video_id)
    if total < 1:
        raise EmptyInputError(f"no frames for video {record.video_id}")
    indices = sample_frames_uniform(total, config.frame_count)
    frames = [media.load_frame(record.video_id, i).to_array() for i in indices]

    spectrograms: list[np.ndarray] = []
    if mode in ("va", "van"):
        segments = segment_audio(media.load_audio(record.video_id), config.audio_segment_s)
        if config.max_segments is not None:
            segments = segments[: config.max_segments]
        spectrograms = [
            mel_spectrogram(seg, bins=config.mel_bins).values for seg in segments
        ]

    clips = record.clips if mode == "van" else []
    prompt = build_mllm_prompt(clips, template=prompts.mllm_template)
    text = mllm_infer(mllm, frames, spectrograms, prompt)
    emotion, confidence, clamped = judge_emotion(judge, text, prompts.judge_template)

    deterministic = getattr(mllm, "deterministic", False) and getattr(
        judge, "deterministic", False
    )
    # Deterministic (mock) runs report zero timing so result files are
    # byte-identical across reruns.
    timing = 0.0 if deterministic else time.monotonic() - started
    return PipelineResult(
        video_id=record.video_id,
        mode=mode,
        response=PipelineResponse(text, emotion, confidence, clamped),
        timing_s=timing,
    )


@dataclass
class BatchOutcome:
    results: list[PipelineResult] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)


def run_batch(
    records: list[VideoRecord],
    media: MediaSource,
    config: SamplingConfig,
    mllm: MllmClient,
    judge: LlmClient,
    mode: str = "van",
    prompts: PromptBundle | None = None,
    workers: int = 4,
) -> BatchOutcome:
    """Run every video; each item yields exactly one result or one failure.

    Videos are processed by a bounded worker pool; outputs are sorted by
    video id so aggregation does not depend on completion order.
    """
    outcome = BatchOutcome()

    def one(record: VideoRecord):
        try:
            return run_pipeline(record, media, config, mllm, judge, mode, prompts)
        except EmodeidError as exc:
            return {"video_id": record.video_id, "mode": mode, "error": str(exc)}

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for item in pool.map(one, records):
            if isinstance(item, PipelineResult):
                outcome.results.append(item)
            else:
                outcome.failures.append(item)
    outcome.results.sort(key=lambda r: r.video_id)
    outcome.failures.sort(key=lambda f: f["video_id"])
    return outcome


def write_results(out_dir: str | Path, outcome: BatchOutcome) -> None:
    """One JSON record per line; failures land in a separate file."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps(r.to_record(), sort_keys=True) for r in outcome.results]
    (out_dir / "results.jsonl").write_text("\n".join(lines) + ("\n" if lines else ""))
    flines = [json.dumps(f, sort_keys=True) for f in outcome.failures]
    (out_dir / "failures.jsonl").write_text("\n".join(flines) + ("\n" if flines else ""))


def read_results(path: str | Path) -> list[dict]:
    records = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            records.append(json.loads(line))
    return records
