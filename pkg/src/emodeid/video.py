"""Face-region de-identification: Gaussian blur over detector-supplied boxes.

Face detection itself is pluggable: boxes come either from a sidecar file
(one JSON object per line: ``{"frame_index", "x", "y", "w", "h"}``) or from a
remote detection service. Frames travel as binary PPM (P6) images so test
fixtures stay lossless.
"""

from __future__ import annotations

import base64
import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests
from scipy import ndimage

from .errors import DetectorUnavailableError, InvalidParamError, ParseError


@dataclass
class FrameImage:
    """Row-major interleaved byte image (8 bits per channel)."""

    width: int
    height: int
    channels: int
    pixels: bytes

    def __post_init__(self):
        if len(self.pixels) != self.width * self.height * self.channels:
            raise InvalidParamError("pixel buffer does not match image dimensions")

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(
            self.height, self.width, self.channels
        )

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "FrameImage":
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        h, w, c = arr.shape
        return cls(w, h, c, arr.tobytes())


@dataclass(frozen=True)
class FaceBox:
    frame_index: int
    x: int
    y: int
    w: int
    h: int


def clip_box(box: FaceBox, width: int, height: int) -> FaceBox | None:
    """Intersect a box with the frame rectangle; None when the result is empty."""
    x0, y0 = max(box.x, 0), max(box.y, 0)
    x1, y1 = min(box.x + box.w, width), min(box.y + box.h, height)
    if x1 <= x0 or y1 <= y0:
        return None
    return FaceBox(box.frame_index, x0, y0, x1 - x0, y1 - y0)


class FaceDetector(ABC):
    """Source of face bounding boxes for individual frames."""

    @abstractmethod
    def detect(self, frame: FrameImage, frame_index: int) -> list[FaceBox]: ...


class SidecarDetector(FaceDetector):
    """Boxes read from a sidecar file, keyed by frame index."""

    def __init__(self, path: str | Path):
        self.boxes: dict[int, list[FaceBox]] = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                box = FaceBox(
                    int(rec["frame_index"]),
                    int(rec["x"]),
                    int(rec["y"]),
                    int(rec["w"]),
                    int(rec["h"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad box record: {exc}", context=f"line {lineno}")
            if box.w <= 0 or box.h <= 0:
                raise ParseError("box width/height must be positive", context=f"line {lineno}")
            self.boxes.setdefault(box.frame_index, []).append(box)

    def detect(self, frame: FrameImage, frame_index: int) -> list[FaceBox]:
        return list(self.boxes.get(frame_index, []))


class RemoteDetector(FaceDetector):
    """Boxes fetched from an external detection service.

    The request carries one base64-encoded frame plus shape metadata; the
    response is ``{"boxes": [{"x", "y", "w", "h"}, ...]}``. A single session
    is shared across workers.
    """

    def __init__(self, endpoint: str, timeout_s: float = 30.0):
        self.endpoint = endpoint
        self.timeout_s = timeout_s
        self._session = requests.Session()

    def detect(self, frame: FrameImage, frame_index: int) -> list[FaceBox]:
        payload = {
            "frame_index": frame_index,
            "width": frame.width,
            "height": frame.height,
            "channels": frame.channels,
            "pixels_b64": base64.b64encode(frame.pixels).decode("ascii"),
        }
        try:
            resp = self._session.post(self.endpoint, json=payload, timeout=self.timeout_s)
            resp.raise_for_status()
            body = resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise DetectorUnavailableError(f"face detector at {self.endpoint}: {exc}")
        return [
            FaceBox(frame_index, int(b["x"]), int(b["y"]), int(b["w"]), int(b["h"]))
            for b in body.get("boxes", [])
        ]


def detect_faces(frame: FrameImage, detector: FaceDetector, frame_index: int = 0) -> list[FaceBox]:
    """Boxes for one frame, clipped to the frame bounds; may be empty."""
    out = []
    for box in detector.detect(frame, frame_index):
        clipped = clip_box(box, frame.width, frame.height)
        if clipped is not None:
            out.append(clipped)
    return out


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian kernel of radius ceil(3*sigma)."""
    if sigma <= 0:
        raise InvalidParamError("sigma must be positive")
    radius = math.ceil(3.0 * sigma)
    n = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(n**2) / (2.0 * sigma**2))
    return k / k.sum()


def blur_region(frame: FrameImage, box: FaceBox, sigma: float) -> FrameImage:
    """Separable Gaussian blur inside one box; pixels outside are untouched.

    Sampling is edge-clamped and confined to the box so no un-blurred face
    pixels leak back in from the surroundings.
    """
    clipped = clip_box(box, frame.width, frame.height)
    if clipped is None:
        return frame
    kernel = gaussian_kernel(sigma)
    arr = frame.to_array().copy()
    region = arr[
        clipped.y : clipped.y + clipped.h, clipped.x : clipped.x + clipped.w
    ].astype(np.float64)
    region = ndimage.convolve1d(region, kernel, axis=1, mode="nearest")
    region = ndimage.convolve1d(region, kernel, axis=0, mode="nearest")
    arr[clipped.y : clipped.y + clipped.h, clipped.x : clipped.x + clipped.w] = (
        np.clip(np.rint(region), 0, 255).astype(np.uint8)
    )
    return FrameImage.from_array(arr)


def default_sigma_policy(box: FaceBox) -> float:
    return max(box.w, box.h) / 4.0


def mask_frames(frames, boxes, sigma_policy=default_sigma_policy):
    """Blur every box of every frame; boxes apply sequentially in listed order."""
    by_frame: dict[int, list[FaceBox]] = {}
    for box in boxes:
        by_frame.setdefault(box.frame_index, []).append(box)
    out = []
    for idx, frame in enumerate(frames):
        for box in by_frame.get(idx, []):
            frame = blur_region(frame, box, sigma_policy(box))
        out.append(frame)
    return out


def read_ppm(path: str | Path) -> FrameImage:
    """Read a binary (P6) portable pixel map with maxval 255."""
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError("truncated PPM header", context=str(path))
        fields.append(data[start:pos])
    if fields[0] != b"P6":
        raise ParseError("only binary P6 PPM is supported", context=str(path))
    width, height, maxval = (int(f) for f in fields[1:])
    if maxval != 255:
        raise ParseError("only maxval 255 is supported", context=str(path))
    pos += 1
    pixels = data[pos : pos + width * height * 3]
    if len(pixels) != width * height * 3:
        raise ParseError("PPM pixel data truncated", context=str(path))
    return FrameImage(width, height, 3, pixels)


def write_ppm(path: str | Path, frame: FrameImage) -> None:
    if frame.channels != 3:
        raise InvalidParamError("PPM frames must have 3 channels")
    with open(path, "wb") as fh:
        fh.write(f"P6\n{frame.width} {frame.height}\n255\n".encode("ascii"))
        fh.write(frame.pixels)
