"""Signal-processing primitives: framing, LPC, pole algebra, resampling, mel features.

All functions are pure and operate on immutable inputs; they are safe to call
from concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import signal as sps

from .errors import EmptyInputError, InvalidParamError, UnstableFilterError

MEL_LOG_FLOOR = 1e-6
STFT_WIN_S = 0.025
STFT_HOP_S = 0.010
STFT_NFFT = 512
RESAMPLE_KAISER_BETA = 8.6
RESAMPLE_TAPS_PER_PHASE = 64


@dataclass
class AudioSignal:
    """Mono sample sequence with its sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise InvalidParamError("audio samples must be one-dimensional")
        if self.sample_rate_hz <= 0:
            raise InvalidParamError("sample_rate_hz must be positive")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise InvalidParamError("audio samples must be finite")

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True)
class FrameParams:
    """Analysis framing parameters (window/shift in milliseconds, LPC order)."""

    win_ms: float = 20.0
    shift_ms: float = 10.0
    lpc_order: int = 20

    def __post_init__(self):
        if self.win_ms <= 0 or self.shift_ms <= 0:
            raise InvalidParamError("win_ms and shift_ms must be positive")
        if self.shift_ms > self.win_ms:
            raise InvalidParamError("shift_ms must not exceed win_ms")
        if self.lpc_order < 1:
            raise InvalidParamError("lpc_order must be a positive integer")

    def win_samples(self, sample_rate_hz: int) -> int:
        return int(round(self.win_ms * sample_rate_hz / 1000.0))

    def shift_samples(self, sample_rate_hz: int) -> int:
        return int(round(self.shift_ms * sample_rate_hz / 1000.0))

    def validate_for_rate(self, sample_rate_hz: int) -> None:
        if self.lpc_order >= self.win_samples(sample_rate_hz):
            raise InvalidParamError(
                "lpc_order must be strictly less than the frame length in samples"
            )


@dataclass
class LpcFrame:
    """All-pole model of one windowed frame: A(z) coefficients plus excitation."""

    coefficients: np.ndarray
    residual: np.ndarray
    prediction_error_power: float


@dataclass
class PoleSet:
    """Poles of an all-pole synthesis filter, closed under conjugation."""

    poles: np.ndarray
    gain: float = 1.0

    def __post_init__(self):
        self.poles = np.asarray(self.poles, dtype=np.complex128)


@dataclass
class MelSpectrogram:
    """Log-mel feature matrix, rows = mel bins, columns = time frames."""

    values: np.ndarray
    bin_count: int = field(init=False)
    frame_count: int = field(init=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.bin_count, self.frame_count = self.values.shape


def frame_count(n_samples: int, win: int, shift: int) -> int:
    """Number of frames at the given window/shift, last partial frame included."""
    return int(math.ceil(max(1, n_samples - win + shift) / shift))


def frame_signal(audio: AudioSignal, params: FrameParams) -> np.ndarray:
    """Slice a signal into overlapping frames; the last frame is zero-padded.

    Returns an array of shape (n_frames, win_samples); frame i starts at
    sample i * shift_samples.
    """
    if audio.samples.size == 0:
        raise EmptyInputError("cannot frame an empty signal")
    win = params.win_samples(audio.sample_rate_hz)
    shift = params.shift_samples(audio.sample_rate_hz)
    n = frame_count(audio.samples.size, win, shift)
    padded = np.zeros((n - 1) * shift + win, dtype=np.float64)
    padded[: audio.samples.size] = audio.samples
    strides = (padded.strides[0] * shift, padded.strides[0])
    view = np.lib.stride_tricks.as_strided(padded, shape=(n, win), strides=strides)
    return view.copy()


def hann_window(length: int) -> np.ndarray:
    """Periodic Hann window; 50%-overlapped copies sum to a constant."""
    if length < 2:
        raise InvalidParamError("window length must be at least 2")
    n = np.arange(length)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * n / length))


def lpc_levinson(frame: np.ndarray, order: int) -> tuple[np.ndarray, float]:
    """Autocorrelation-method LPC via the Levinson-Durbin recursion.

    Returns (coefficients a_0..a_p with a_0 = 1, prediction error power).
    An all-zero frame yields the identity filter with zero error power.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if order >= frame.size:
        raise InvalidParamError("LPC order must be less than the frame length")
    if not np.any(frame):
        return np.r_[1.0, np.zeros(order)], 0.0
    r = np.correlate(frame, frame, mode="full")[frame.size - 1 : frame.size + order]
    r = r.copy()
    # Keeps the Toeplitz system positive definite on near-silent frames.
    r[0] = r[0] * (1.0 + 1e-9) + 1e-12
    a = np.zeros(order)
    err = r[0]
    for i in range(1, order + 1):
        acc = r[i] - np.dot(a[: i - 1], r[i - 1 : 0 : -1])
        k = acc / err
        a_new = a.copy()
        a_new[i - 1] = k
        a_new[: i - 1] = a[: i - 1] - k * a[i - 2 :: -1][: i - 1]
        a = a_new
        err = (1.0 - k * k) * err
    return np.r_[1.0, -a], float(err)


def lpc_residual(frame: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    """FIR analysis filtering: residual[n] = sum_k a_k * frame[n-k], zero state."""
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if coefficients[0] != 1.0:
        raise InvalidParamError("analysis polynomial must be monic (a_0 == 1)")
    return sps.lfilter(coefficients, [1.0], np.asarray(frame, dtype=np.float64))


def analyze_frame(frame: np.ndarray, order: int) -> LpcFrame:
    """LPC coefficients, residual, and error power for one windowed frame."""
    coeffs, err = lpc_levinson(frame, order)
    return LpcFrame(coeffs, lpc_residual(frame, coeffs), err)


def poly_roots(coefficients: np.ndarray) -> np.ndarray:
    """Roots of sum_k a_k z^(p-k) via companion-matrix eigenvalues.

    Near-real roots are snapped to the real axis and complex roots are
    re-paired into exact conjugate pairs so downstream reconstruction
    produces real coefficients.
    """
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if coefficients.size == 0 or coefficients[0] == 0.0:
        raise InvalidParamError("leading coefficient must be nonzero")
    if coefficients.size == 1:
        return np.zeros(0, dtype=np.complex128)
    roots = np.roots(coefficients)
    roots = np.where(np.abs(roots.imag) < 1e-10, roots.real + 0j, roots)
    real = [z for z in roots if z.imag == 0.0]
    upper = sorted((z for z in roots if z.imag > 0.0), key=lambda z: (z.real, z.imag))
    lower = sorted((z for z in roots if z.imag < 0.0), key=lambda z: (z.real, -z.imag))
    # Companion eigenvalues of a real polynomial can drift slightly off
    # conjugacy; average each pair back onto it. Unbalanced leftovers are
    # forced real (smallest imaginary part first).
    while len(upper) != len(lower):
        bucket = upper if len(upper) > len(lower) else lower
        idx = min(range(len(bucket)), key=lambda i: abs(bucket[i].imag))
        real.append(bucket.pop(idx).real + 0j)
    paired = []
    for zu, zl in zip(upper, lower):
        z = 0.5 * (zu + np.conj(zl))
        paired.extend([z, np.conj(z)])
    return np.array(real + paired, dtype=np.complex128)


def _check_conjugate_closed(poles: np.ndarray, tol: float = 1e-8) -> None:
    remaining = [z for z in poles if z.imag != 0.0]
    while remaining:
        z = remaining.pop()
        match = min(
            range(len(remaining)),
            key=lambda i: abs(remaining[i] - np.conj(z)),
            default=None,
        )
        if match is None or abs(remaining[match] - np.conj(z)) > tol * max(1.0, abs(z)):
            raise InvalidParamError("pole set is not closed under conjugation")
        remaining.pop(match)


def poles_to_coeffs(poles: PoleSet) -> np.ndarray:
    """Expand prod(z - p_i) into monic real coefficients."""
    p = poles.poles
    if p.size == 0:
        return np.array([1.0])
    _check_conjugate_closed(p)
    coeffs = np.poly(p)
    if np.max(np.abs(coeffs.imag)) >= 1e-8:
        raise InvalidParamError("pole expansion left a non-negligible imaginary part")
    return coeffs.real


def synthesize(residual: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    """All-pole IIR filtering, zero initial state; inverse of lpc_residual."""
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if coefficients[0] != 1.0:
        raise InvalidParamError("synthesis polynomial must be monic (a_0 == 1)")
    if coefficients.size > 1:
        roots = poly_roots(coefficients)
        if roots.size and np.max(np.abs(roots)) >= 1.0:
            raise UnstableFilterError("synthesis filter has poles outside the unit circle")
    return sps.lfilter([1.0], coefficients, np.asarray(residual, dtype=np.float64))


def overlap_add(
    frames: np.ndarray,
    params: FrameParams,
    sample_rate_hz: int,
    total_length: int,
) -> np.ndarray:
    """Sum windowed frames at their offsets and normalize by the window overlap.

    Expects each frame to carry one application of the analysis window; the
    divisor is the pointwise sum of shifted windows, floored at 1e-6.
    """
    win = params.win_samples(sample_rate_hz)
    shift = params.shift_samples(sample_rate_hz)
    frames = np.asarray(frames, dtype=np.float64)
    out = np.zeros(total_length, dtype=np.float64)
    den = np.zeros(total_length, dtype=np.float64)
    if frames.size == 0:
        return out
    window = hann_window(win)
    for i, frame in enumerate(frames):
        start = i * shift
        stop = min(start + win, total_length)
        if stop <= start:
            break
        out[start:stop] += frame[: stop - start]
        den[start:stop] += window[: stop - start]
    return out / np.maximum(den, 1e-6)


def _design_resample_filter(up: int, down: int) -> np.ndarray:
    phases = max(up, down)
    half = (RESAMPLE_TAPS_PER_PHASE * phases) // 2
    n = np.arange(-half, half + 1)
    # Cutoff at min(f_in, f_out)/2, expressed as a fraction of the
    # intermediate-rate Nyquist frequency.
    cutoff = min(1.0, up / down) / up
    h = cutoff * np.sinc(cutoff * n) * np.kaiser(2 * half + 1, RESAMPLE_KAISER_BETA)
    # Unit DC gain; resample_poly applies the interpolation gain itself.
    return h / np.sum(h)


def resample(audio: AudioSignal, target_rate_hz: int) -> AudioSignal:
    """Rational resampling with a Kaiser windowed-sinc anti-aliasing filter."""
    if target_rate_hz <= 0:
        raise InvalidParamError("target rate must be positive")
    if target_rate_hz == audio.sample_rate_hz:
        return AudioSignal(audio.samples.copy(), audio.sample_rate_hz)
    ratio = Fraction(target_rate_hz, audio.sample_rate_hz)
    up, down = ratio.numerator, ratio.denominator
    h = _design_resample_filter(up, down)
    out = sps.resample_poly(audio.samples, up, down, window=h)
    want = int(round(audio.samples.size * target_rate_hz / audio.sample_rate_hz))
    if out.size > want:
        out = out[:want]
    elif out.size < want:
        out = np.pad(out, (0, want - out.size))
    return AudioSignal(out, target_rate_hz)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filter_centers(bins: int, sample_rate_hz: int) -> np.ndarray:
    """Center frequencies (Hz) of the triangular mel filters, 0 to f_s/2."""
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate_hz / 2.0), bins + 2))
    return edges[1:-1]


def mel_filterbank(bins: int, nfft: int, sample_rate_hz: int) -> np.ndarray:
    """Triangular mel filterbank of shape (bins, nfft//2 + 1)."""
    if bins < 1:
        raise InvalidParamError("mel bin count must be at least 1")
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate_hz / 2.0), bins + 2))
    fft_freqs = np.fft.rfftfreq(nfft, d=1.0 / sample_rate_hz)
    fb = np.zeros((bins, fft_freqs.size))
    for j in range(bins):
        left, center, right = edges[j], edges[j + 1], edges[j + 2]
        rising = (fft_freqs - left) / max(center - left, 1e-12)
        falling = (right - fft_freqs) / max(right - center, 1e-12)
        fb[j] = np.maximum(0.0, np.minimum(rising, falling))
    return fb


def mel_spectrogram(audio: AudioSignal, bins: int = 128) -> MelSpectrogram:
    """Log-compressed mel power spectrogram (25 ms window, 10 ms hop, FFT 512)."""
    if bins < 1:
        raise InvalidParamError("mel bin count must be at least 1")
    win = int(round(STFT_WIN_S * audio.sample_rate_hz))
    hop = int(round(STFT_HOP_S * audio.sample_rate_hz))
    if audio.samples.size < win:
        raise EmptyInputError("signal is shorter than one analysis window")
    n_frames = 1 + (audio.samples.size - win) // hop
    window = hann_window(win)
    idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = audio.samples[idx] * window
    spectrum = np.abs(np.fft.rfft(frames, n=STFT_NFFT, axis=1)) ** 2
    fb = mel_filterbank(bins, STFT_NFFT, audio.sample_rate_hz)
    return MelSpectrogram(np.log(fb @ spectrum.T + MEL_LOG_FLOOR))
