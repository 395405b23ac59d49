"""F0 and voicing by subharmonic summation, and cycle-level perturbation measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import FrameSpec, Waveform, next_pow2, window_values
from .errors import ParameterError

VOICING_THRESHOLD = 0.45
STEPS_PER_OCTAVE = 96
N_HARMONICS = 15
HARMONIC_DECAY = 0.84
SPECTRUM_CEILING_HZ = 5000.0


@dataclass
class PitchTrack:
    """Per-frame F0 (0.0 where unvoiced) and voicing probability."""

    f0: np.ndarray
    voicing_prob: np.ndarray
    spec: FrameSpec
    sample_rate: int
    fmin: float = 60.0
    fmax: float = 500.0
    threshold: float = VOICING_THRESHOLD

    @property
    def voiced(self) -> np.ndarray:
        return self.f0 > 0

    @property
    def n_frames(self) -> int:
        return self.f0.size

    def frame_centers(self) -> np.ndarray:
        """Centre of each frame in seconds."""
        return (np.arange(self.n_frames) * self.spec.hop + self.spec.frame_len / 2) / self.sample_rate

    def median_f0(self) -> float:
        v = self.f0[self.voiced]
        return float(np.median(v)) if v.size else 0.0


def default_pitch_spec(fs: int) -> FrameSpec:
    return FrameSpec.from_ms(fs, 60.0, 10.0, "hann")


def _candidate_grid(fmin: float, fmax: float) -> np.ndarray:
    n = int(np.floor(np.log2(fmax / fmin) * STEPS_PER_OCTAVE)) + 1
    return fmin * 2.0 ** (np.arange(n) / STEPS_PER_OCTAVE)


def shs_scores(magnitude: np.ndarray, bin_hz: float, candidates: np.ndarray, fs: int) -> np.ndarray:
    """Weighted sum of spectral magnitudes at the harmonics of each candidate."""
    ceiling = min(SPECTRUM_CEILING_HZ, fs / 2.0)
    h = np.arange(1, N_HARMONICS + 1)
    freqs = candidates[:, None] * h[None, :]
    weights = np.where(freqs < ceiling, HARMONIC_DECAY ** (h - 1)[None, :], 0.0)
    bins = np.arange(magnitude.size) * bin_hz
    vals = np.interp(freqs.ravel(), bins, magnitude).reshape(freqs.shape)
    return np.sum(weights * vals, axis=1)


def _window_autocorr(w: np.ndarray, lag: float) -> float:
    k = int(np.floor(lag))
    frac = lag - k
    def r(m):
        return np.dot(w[: w.size - m], w[m:]) if m < w.size else 0.0
    return (1 - frac) * r(k) + frac * r(k + 1)


def _periodicity(frame_w: np.ndarray, w: np.ndarray, period: float) -> tuple[float, float]:
    """Window-corrected normalised autocorrelation peak near ``period`` samples.

    Returns ``(strength, refined_period)``.
    """
    r0 = np.dot(frame_w, frame_w)
    if r0 <= 0:
        return 0.0, period
    n = frame_w.size
    lo = max(2, int(np.floor(period * 0.97)) - 1)
    hi = min(n - 2, int(np.ceil(period * 1.03)) + 1)
    if hi <= lo:
        return 0.0, period
    lags = np.arange(lo - 1, hi + 2)
    r = np.array([np.dot(frame_w[: n - m], frame_w[m:]) for m in lags]) / r0
    i = int(np.argmax(r[1:-1])) + 1
    y0, y1, y2 = r[i - 1], r[i], r[i + 1]
    denom = y0 - 2 * y1 + y2
    shift = 0.5 * (y0 - y2) / denom if denom < 0 else 0.0
    shift = float(np.clip(shift, -0.5, 0.5))
    peak = y1 - 0.25 * (y0 - y2) * shift
    lag = lags[i] + shift
    wr = _window_autocorr(w, lag) / np.dot(w, w)
    if wr <= 1e-3:
        return 0.0, period
    return float(np.clip(peak / wr, 0.0, 1.0)), float(lag)


def estimate_pitch(signal: Waveform, spec: FrameSpec | None = None, fmin: float = 60.0,
                   fmax: float = 500.0, threshold: float = VOICING_THRESHOLD) -> PitchTrack:
    """Frame-wise SHS pitch tracking.

    The F0 candidate maximising the subharmonic sum is refined on the
    autocorrelation; its window-corrected normalised autocorrelation serves
    as the voicing probability. Both are invariant to amplitude scaling.
    """
    fs = signal.sample_rate
    spec = spec or default_pitch_spec(fs)
    if not (0 < fmin < fmax < fs / 2):
        raise ParameterError(f"pitch range needs 0 < fmin < fmax < fs/2, got fmin={fmin}, fmax={fmax}")
    x = signal.samples
    if x.size < spec.frame_len:
        x = np.concatenate((x, np.zeros(spec.frame_len - x.size)))
    n_frames = spec.n_frames(x.size)
    w = window_values(spec.window, spec.frame_len)
    n_fft = 4 * next_pow2(spec.frame_len)
    bin_hz = fs / n_fft
    cands = _candidate_grid(fmin, fmax)
    f0 = np.zeros(n_frames)
    prob = np.zeros(n_frames)
    peak_abs = np.max(np.abs(x)) if x.size else 0.0
    for k in range(n_frames):
        seg = x[k * spec.hop:k * spec.hop + spec.frame_len]
        fw = seg * w
        if peak_abs == 0 or not np.any(fw):
            continue
        mag = np.abs(np.fft.rfft(fw, n_fft))
        scores = shs_scores(mag, bin_hz, cands, fs)
        best = cands[int(np.argmax(scores))]
        strength, lag = _periodicity(fw, w, fs / best)
        prob[k] = strength
        if strength >= threshold:
            f = fs / lag
            f0[k] = float(np.clip(f, fmin, fmax))
    return PitchTrack(f0, prob, spec, fs, fmin, fmax, threshold)


def f0_envelope(track: PitchTrack) -> np.ndarray:
    """F0 with unvoiced gaps held at the last voiced value (leading gap back-filled)."""
    f0 = track.f0 if isinstance(track, PitchTrack) else np.asarray(track, dtype=float)
    out = np.zeros_like(f0, dtype=float)
    voiced = np.flatnonzero(f0 > 0)
    if voiced.size == 0:
        return out
    last = f0[voiced[0]]
    for i, v in enumerate(f0):
        if v > 0:
            last = v
        out[i] = last
    return out


def _parabolic(y: np.ndarray, i: int) -> tuple[float, float]:
    if 0 < i < y.size - 1:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        denom = y0 - 2 * y1 + y2
        if denom < 0:
            d = float(np.clip(0.5 * (y0 - y2) / denom, -0.5, 0.5))
            return i + d, y1 - 0.25 * (y0 - y2) * d
    return float(i), float(y[i])


def cycle_peaks(segment: np.ndarray, period: float) -> tuple[np.ndarray, np.ndarray]:
    """Positions and heights of successive cycle maxima, one per period.

    Uses the polarity with the larger excursion; the search window for each
    next peak is 0.8-1.2 periods after the previous one.
    """
    y = np.asarray(segment, dtype=float)
    if y.size == 0 or period <= 1:
        return np.zeros(0), np.zeros(0)
    if -y.min() > y.max():
        y = -y
    first_end = int(min(y.size, np.ceil(period)))
    i = int(np.argmax(y[:first_end]))
    pos, amp = [], []
    while True:
        p, a = _parabolic(y, i)
        pos.append(p)
        amp.append(a)
        lo = int(np.ceil(i + 0.8 * period))
        hi = int(np.floor(i + 1.2 * period)) + 1
        if hi > y.size:
            break
        i = lo + int(np.argmax(y[lo:hi]))
    return np.array(pos), np.array(amp)


def perturbation(positions: np.ndarray, amplitudes: np.ndarray) -> tuple[float, float, float]:
    """``(jitter_local, jitter_ddp, shimmer_local)`` from cycle peaks."""
    periods = np.diff(positions)
    jl = jd = sh = 0.0
    if periods.size >= 2 and periods.mean() > 0:
        jl = float(np.mean(np.abs(np.diff(periods))) / periods.mean())
    if periods.size >= 3 and periods.mean() > 0:
        jd = float(np.mean(np.abs(np.diff(periods, 2))) / periods.mean())
    if amplitudes.size >= 2 and np.mean(np.abs(amplitudes)) > 0:
        sh = float(np.mean(np.abs(np.diff(amplitudes))) / np.mean(np.abs(amplitudes)))
    return jl, jd, sh


def jitter_shimmer(signal: Waveform, track: PitchTrack) -> dict[str, np.ndarray]:
    """Per-frame local jitter, DDP jitter and local shimmer; zero when unvoiced."""
    x = signal.samples
    spec = track.spec
    fs = signal.sample_rate
    out = {k: np.zeros(track.n_frames) for k in ("jitter_local", "jitter_ddp", "shimmer_local")}
    for k in range(track.n_frames):
        f = track.f0[k]
        if f <= 0:
            continue
        seg = x[k * spec.hop:k * spec.hop + spec.frame_len]
        pos, amp = cycle_peaks(seg, fs / f)
        jl, jd, sh = perturbation(pos, amp)
        out["jitter_local"][k] = jl
        out["jitter_ddp"][k] = jd
        out["shimmer_local"][k] = sh
    return out
