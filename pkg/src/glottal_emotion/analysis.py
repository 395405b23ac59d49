"""Descriptive glottal analyses: period-normalised cycle overlays and harmonic markers."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, asdict

import numpy as np

from .dsp import Waveform, next_pow2, window_values
from .errors import DegenerateInputError, EmptyResultError, ParameterError
from .pitch import PitchTrack


@dataclass
class CycleOverlay:
    resampled_cycles: np.ndarray  # (n_cycles, n_points) in [0, 1]
    boundaries: np.ndarray  # sample index of each cycle start, plus the final end

    @property
    def n_cycles(self) -> int:
        return self.resampled_cycles.shape[0]

    @property
    def n_points(self) -> int:
        return self.resampled_cycles.shape[1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cycle", "point", "phase", "amplitude"])
        for c, row in enumerate(self.resampled_cycles):
            for j, v in enumerate(row):
                w.writerow([c, j, repr(j / self.n_points), repr(float(v))])
        return buf.getvalue()


@dataclass
class SpectralMarkers:
    f0_hz: float
    f0_amp: float  # dB
    f0_bw: float  # Hz, -3 dB width
    h2_hz: float
    h2_amp: float
    h2_bw: float

    CSV_FIELDS = ("f0_hz", "f0_amp", "f0_bw", "h2_hz", "h2_amp", "h2_bw")


def markers_to_csv(rows) -> str:
    """``rows`` is an iterable of ``(label, SpectralMarkers)``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["utterance_id", *SpectralMarkers.CSV_FIELDS])
    for label, m in rows:
        d = asdict(m)
        w.writerow([label] + [repr(float(d[k])) for k in SpectralMarkers.CSV_FIELDS])
    return buf.getvalue()


def longest_voiced_span(track: PitchTrack, n_samples: int) -> tuple[int, int, float]:
    """``(start, stop, median_f0)`` of the longest run of voiced frames, in samples."""
    v = track.voiced
    best = (0, -1)
    i = 0
    while i < v.size:
        if v[i]:
            j = i
            while j + 1 < v.size and v[j + 1]:
                j += 1
            if j - i > best[1] - best[0]:
                best = (i, j)
            i = j + 1
        else:
            i += 1
    if best[1] < best[0]:
        raise EmptyResultError("pitch track has no voiced frames", code="no_voiced_content")
    spec = track.spec
    start = best[0] * spec.hop
    stop = min(n_samples, best[1] * spec.hop + spec.frame_len)
    f0 = float(np.median(track.f0[best[0]:best[1] + 1]))
    return start, stop, f0


def closure_instants(glottal: np.ndarray, period: float, count: int) -> np.ndarray:
    """Indices of the steepest flow decrease in ``count`` successive periods."""
    d = np.diff(glottal)
    first = int(np.ceil(period))
    if d.size < first:
        return np.zeros(0, dtype=int)
    anchors = [int(np.argmin(d[:first]))]
    while len(anchors) < count:
        lo = int(np.ceil(anchors[-1] + 0.8 * period))
        hi = int(np.floor(anchors[-1] + 1.2 * period)) + 1
        if hi > d.size:
            break
        anchors.append(lo + int(np.argmin(d[lo:hi])))
    return np.array(anchors, dtype=int)


def extract_cycles(glottal: Waveform, track: PitchTrack, n_cycles: int = 4, n_points: int = 100) -> CycleOverlay:
    """Consecutive glottal cycles, each resampled to ``n_points``, jointly scaled to [0, 1].

    Cycles start at the closure instant (steepest descent of the flow) so
    that rows of a periodic signal line up exactly.
    """
    if n_cycles < 1 or n_points < 2:
        raise ParameterError("extract_cycles needs n_cycles >= 1 and n_points >= 2")
    x = glottal.samples
    start, stop, f0 = longest_voiced_span(track, x.size)
    period = glottal.sample_rate / f0
    seg = x[start:stop]
    b = closure_instants(seg, period, n_cycles + 1)
    if b.size < n_cycles + 1:
        raise EmptyResultError(
            f"voiced span holds {max(b.size - 1, 0)} complete cycles, {n_cycles} requested",
            code="insufficient_voiced_span",
        )
    rows = np.empty((n_cycles, n_points))
    for c in range(n_cycles):
        a, e = b[c], b[c + 1]
        pos = a + (e - a) * np.arange(n_points) / n_points
        rows[c] = np.interp(pos, np.arange(seg.size), seg)
    lo, hi = rows.min(), rows.max()
    if hi - lo <= 0:
        raise DegenerateInputError("selected cycles are constant", code="zero_span")
    return CycleOverlay((rows - lo) / (hi - lo), b + start)


def _minus3db_width(mag_db: np.ndarray, peak: int, bin_hz: float) -> float:
    target = mag_db[peak] - 3.0
    i = peak
    while i > 0 and mag_db[i] > target:
        i -= 1
    left = i + (target - mag_db[i]) / (mag_db[i + 1] - mag_db[i]) if mag_db[i] <= target else float(i)
    j = peak
    while j < mag_db.size - 1 and mag_db[j] > target:
        j += 1
    right = j - (target - mag_db[j]) / (mag_db[j - 1] - mag_db[j]) if mag_db[j] <= target else float(j)
    return float((right - left) * bin_hz)


def _peak_near(mag_db: np.ndarray, bin_hz: float, freq: float, tol: float) -> tuple[float, float, float]:
    lo = max(1, int(np.floor(freq * (1 - tol) / bin_hz)))
    hi = min(mag_db.size - 2, int(np.ceil(freq * (1 + tol) / bin_hz)))
    if hi < lo:
        raise EmptyResultError(f"no spectral bins near {freq:.1f} Hz", code="out_of_band")
    k = lo + int(np.argmax(mag_db[lo:hi + 1]))
    y0, y1, y2 = mag_db[k - 1], mag_db[k], mag_db[k + 1]
    denom = y0 - 2 * y1 + y2
    d = float(np.clip(0.5 * (y0 - y2) / denom, -0.5, 0.5)) if denom < 0 else 0.0
    return (k + d) * bin_hz, y1 - 0.25 * (y0 - y2) * d, _minus3db_width(mag_db, k, bin_hz)


def voiced_spectrum(glottal: Waveform, track: PitchTrack, pad_factor: int = 8) -> tuple[np.ndarray, float, float]:
    """Hann-windowed magnitude spectrum of the longest voiced span.

    Returns ``(magnitude, bin_hz, median_f0)``.
    """
    start, stop, f0 = longest_voiced_span(track, len(glottal))
    seg = glottal.samples[start:stop]
    if not np.any(seg):
        raise EmptyResultError("voiced span is all zeros", code="no_voiced_content")
    seg = (seg - seg.mean()) * window_values("hann", seg.size)
    n_fft = next_pow2(pad_factor * seg.size)
    return np.abs(np.fft.rfft(seg, n_fft)), glottal.sample_rate / n_fft, f0


def spectral_markers(glottal: Waveform, fs: int | None, track: PitchTrack, search_tol: float = 0.15) -> SpectralMarkers:
    """Level (dB) and -3 dB bandwidth of the fundamental and second harmonic."""
    mag, bin_hz, f0 = voiced_spectrum(glottal, track)
    mag_db = 20 * np.log10(np.maximum(mag, 1e-300))
    f1, a1, bw1 = _peak_near(mag_db, bin_hz, f0, search_tol)
    f2, a2, bw2 = _peak_near(mag_db, bin_hz, 2 * f1, search_tol / 2)
    return SpectralMarkers(f1, float(a1), bw1, f2, float(a2), bw2)


def normalize_spectrum(spectrum, bin_hz: float, f0: float) -> tuple[np.ndarray, np.ndarray]:
    """Frequency axis in multiples of F0; amplitude scaled to a maximum of 1."""
    y = np.asarray(spectrum, dtype=float)
    if f0 <= 0:
        raise ParameterError(f"f0 must be > 0, got {f0}")
    if y.size == 0 or not np.any(y):
        raise DegenerateInputError("cannot normalise an empty or all-zero spectrum", code="zero_spectrum")
    peak = np.max(np.abs(y))
    return np.arange(y.size) * bin_hz / f0, y / peak
