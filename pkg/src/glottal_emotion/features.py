"""Utterance-level acoustic features: 38 LLD contours, their deltas, 21 functionals.

The descriptor and functional inventory mirrors the common 38-LLD
paralinguistic baseline set. Values are not bit-compatible with openSMILE;
the layout (names and order) is stable and identical for every source signal.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.fft import dct

from .dsp import FrameSpec, Waveform, autocorrelation, frame, levinson_durbin, next_pow2
from .pitch import estimate_pitch, f0_envelope, jitter_shimmer

LLD_NAMES: tuple[str, ...] = (
    ("pcm_loudness_sma",)
    + tuple(f"mfcc_sma[{i}]" for i in range(15))
    + tuple(f"logMelFreqBand_sma[{i}]" for i in range(8))
    + tuple(f"lspFreq_sma[{i}]" for i in range(8))
    + (
        "F0final_sma",
        "F0finEnv_sma",
        "voicingFinalUnclipped_sma",
        "jitterLocal_sma",
        "jitterDDP_sma",
        "shimmerLocal_sma",
    )
)
DELTA_NAMES = tuple(n + "_de" for n in LLD_NAMES)
ROW_NAMES = LLD_NAMES + DELTA_NAMES

FUNCTIONAL_NAMES: tuple[str, ...] = (
    "maxPos", "minPos", "amean", "stddev", "skewness", "kurtosis",
    "linregc1", "linregc2", "linregerrQ", "linregerrA",
    "quartile1", "quartile2", "quartile3", "iqr1-2", "iqr2-3", "iqr1-3",
    "percentile1.0", "percentile99.0", "pctlrange0-1",
    "upleveltime75", "upleveltime90",
)

FEATURE_NAMES: tuple[str, ...] = tuple(f"{r}_{f}" for r in ROW_NAMES for f in FUNCTIONAL_NAMES)
N_FEATURES = len(FEATURE_NAMES)  # 1596

META_COLUMNS = ("utterance_id", "speaker_id", "state", "source")

LOUDNESS_EXPONENT = 0.3
ENERGY_FLOOR = 1e-10
N_MFCC_FILTERS = 26
N_MFCC = 15
N_MEL_BANDS = 8
MEL_BAND_RANGE = (20.0, 6500.0)
LSP_ORDER = 8
DELTA_WINDOW = 2


# --------------------------------------------------------------- descriptors

def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


def mel_filterbank(n_filters: int, n_fft: int, fs: int, fmin: float = 0.0, fmax: float | None = None) -> np.ndarray:
    """Triangular filters on the mel scale, shape ``(n_filters, n_fft//2 + 1)``."""
    fmax = fs / 2.0 if fmax is None else min(fmax, fs / 2.0)
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_filters + 2))
    freqs = np.arange(n_fft // 2 + 1) * fs / n_fft
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    up = (freqs[None, :] - lo) / (mid - lo)
    down = (hi - freqs[None, :]) / (hi - mid)
    return np.maximum(0.0, np.minimum(up, down))


def lpc_to_lsp(coeffs) -> np.ndarray:
    """Line spectral frequencies (radians, ascending, in (0, pi)) of ``A(z)``."""
    a = np.concatenate(([1.0], np.asarray(coeffs, dtype=float), [0.0]))
    p_poly = a + a[::-1]
    q_poly = a - a[::-1]
    order = a.size - 2
    out = []
    for poly in (p_poly, q_poly):
        ang = np.angle(np.roots(poly))
        out.append(ang[(ang > 1e-7) & (ang < np.pi - 1e-7)])
    lsp = np.sort(np.concatenate(out))
    if lsp.size != order:
        # numerically degenerate; fall back to the flat-spectrum pattern
        return lpc_to_lsp(np.zeros(order))
    return lsp


def _lsp_rows(frames: np.ndarray) -> np.ndarray:
    flat = lpc_to_lsp(np.zeros(LSP_ORDER))
    out = np.empty((LSP_ORDER, frames.shape[0]))
    for k, fr in enumerate(frames):
        r = autocorrelation(fr, LSP_ORDER)
        if r[0] <= ENERGY_FLOOR * fr.size:
            out[:, k] = flat
            continue
        a, _, _ = levinson_durbin(r, LSP_ORDER)
        out[:, k] = lpc_to_lsp(a)
    return out


def _smooth3(rows: np.ndarray) -> np.ndarray:
    """Three-frame moving average along time; edges average available frames."""
    if rows.shape[1] < 2:
        return rows.copy()
    s = rows.copy()
    s[:, 1:-1] = (rows[:, :-2] + rows[:, 1:-1] + rows[:, 2:]) / 3.0
    s[:, 0] = (rows[:, 0] + rows[:, 1]) / 2.0
    s[:, -1] = (rows[:, -1] + rows[:, -2]) / 2.0
    return s


@dataclass
class LldMatrix:
    values: np.ndarray  # (76, n_frames)
    names: tuple[str, ...] = ROW_NAMES

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]

    def row(self, name: str) -> np.ndarray:
        return self.values[self.names.index(name)]


def extract_llds(signal: Waveform, fs: int | None = None) -> LldMatrix:
    """76 contours on a 25 ms / 10 ms grid: 38 descriptors followed by their deltas."""
    fs = fs or signal.sample_rate
    spec = FrameSpec.from_ms(fs, 25.0, 10.0, "hamming")
    x = signal.samples
    if x.size == 0:
        raise ValueError("cannot extract features from an empty signal")
    if x.size < spec.frame_len:
        x = np.concatenate((x, np.zeros(spec.frame_len - x.size)))
    frames = frame(x, spec)
    n_frames = frames.shape[0]
    n_fft = next_pow2(spec.frame_len)
    power = np.abs(np.fft.rfft(frames, n_fft, axis=1)) ** 2 / spec.frame_len

    energy = np.mean(frames ** 2, axis=1)
    loudness = np.maximum(energy, ENERGY_FLOOR) ** LOUDNESS_EXPONENT

    fb = mel_filterbank(N_MFCC_FILTERS, n_fft, fs)
    log_mel = np.log(np.maximum(power @ fb.T, ENERGY_FLOOR))
    mfcc = dct(log_mel, type=2, norm="ortho", axis=1)[:, :N_MFCC]

    bands = mel_filterbank(N_MEL_BANDS, n_fft, fs, *MEL_BAND_RANGE)
    log_bands = np.log(np.maximum(power @ bands.T, ENERGY_FLOOR))

    lsp = _lsp_rows(frames)

    track = estimate_pitch(Waveform(x, fs))
    pert = jitter_shimmer(Waveform(x, fs), track)
    centers = (np.arange(n_frames) * spec.hop + spec.frame_len / 2) / fs
    pc = track.frame_centers()
    nearest = np.clip(np.searchsorted(pc, centers), 0, pc.size - 1)
    prev = np.clip(nearest - 1, 0, pc.size - 1)
    nearest = np.where(np.abs(pc[prev] - centers) <= np.abs(pc[nearest] - centers), prev, nearest)
    pitch_rows = np.vstack([
        track.f0[nearest],
        f0_envelope(track)[nearest],
        track.voicing_prob[nearest],
        pert["jitter_local"][nearest],
        pert["jitter_ddp"][nearest],
        pert["shimmer_local"][nearest],
    ])

    base = np.vstack([loudness[None, :], mfcc.T, log_bands.T, lsp, pitch_rows])
    base = _smooth3(base)
    deltas = np.vstack([delta(r, DELTA_WINDOW) for r in base])
    values = np.vstack([base, deltas])
    if not np.all(np.isfinite(values)):
        values = np.nan_to_num(values, nan=0.0, posinf=0.0, neginf=0.0)
    return LldMatrix(values)


def delta(contour, window: int = DELTA_WINDOW) -> np.ndarray:
    """Least-squares slope over a centred window of ``2*window+1`` frames.

    Near the edges the fit uses only the frames that exist.
    """
    if window < 1:
        raise ValueError(f"delta window must be >= 1, got {window}")
    y = np.asarray(contour, dtype=float)
    n = y.size
    if n == 0:
        return y.copy()
    offs = np.arange(-window, window + 1)
    idx = np.arange(n)[:, None] + offs[None, :]
    valid = (idx >= 0) & (idx < n)
    t = np.where(valid, offs[None, :], 0).astype(float)
    v = np.where(valid, y[np.clip(idx, 0, n - 1)], 0.0)
    cnt = valid.sum(axis=1)
    st = t.sum(axis=1)
    sv = v.sum(axis=1)
    stt = (t * t).sum(axis=1)
    stv = (t * v).sum(axis=1)
    den = cnt * stt - st * st
    out = np.zeros(n)
    ok = den > 0
    out[ok] = (cnt[ok] * stv[ok] - st[ok] * sv[ok]) / den[ok]
    return out


# --------------------------------------------------------------- functionals

def _percentile_sorted(s: np.ndarray, q: float) -> np.ndarray:
    """Linear-interpolation percentile along the last axis of pre-sorted rows."""
    n = s.shape[-1]
    pos = q / 100.0 * (n - 1)
    lo = int(np.floor(pos))
    hi = min(lo + 1, n - 1)
    frac = pos - lo
    return s[..., lo] + (s[..., hi] - s[..., lo]) * frac


def functionals(contours) -> np.ndarray:
    """The 21 functionals of each row; a 1-D input yields a vector of 21."""
    y = np.asarray(contours, dtype=float)
    single = y.ndim == 1
    y = np.atleast_2d(y)
    r, n = y.shape
    if n == 0:
        raise ValueError("functionals need a non-empty contour")
    out = np.zeros((r, len(FUNCTIONAL_NAMES)))
    span = n - 1 if n > 1 else 1
    out[:, 0] = np.argmax(y, axis=1) / span if n > 1 else 0.0
    out[:, 1] = np.argmin(y, axis=1) / span if n > 1 else 0.0
    mean = y.mean(axis=1)
    c = y - mean[:, None]
    m2 = np.mean(c ** 2, axis=1)
    m3 = np.mean(c ** 3, axis=1)
    m4 = np.mean(c ** 4, axis=1)
    flat = np.ptp(y, axis=1) == 0
    safe = np.where(flat | (m2 <= 0), 1.0, m2)
    out[:, 2] = mean
    out[:, 3] = np.sqrt(m2)
    out[:, 4] = np.where(flat, 0.0, m3 / safe ** 1.5)
    out[:, 5] = np.where(flat, 0.0, m4 / safe ** 2)
    t = np.arange(n, dtype=float)
    if n > 1:
        tc = t - t.mean()
        slope = (c @ tc) / np.dot(tc, tc)
    else:
        slope = np.zeros(r)
    offset = mean - slope * t.mean()
    resid = y - (offset[:, None] + slope[:, None] * t[None, :])
    out[:, 6] = slope
    out[:, 7] = offset
    out[:, 8] = np.mean(resid ** 2, axis=1)
    out[:, 9] = np.mean(np.abs(resid), axis=1)
    s = np.sort(y, axis=1)
    q1, q2, q3 = (_percentile_sorted(s, q) for q in (25, 50, 75))
    p1, p99 = _percentile_sorted(s, 1), _percentile_sorted(s, 99)
    out[:, 10:13] = np.column_stack([q1, q2, q3])
    out[:, 13] = q2 - q1
    out[:, 14] = q3 - q2
    out[:, 15] = q3 - q1
    out[:, 16] = p1
    out[:, 17] = p99
    out[:, 18] = p99 - p1
    lo, hi = s[:, 0], s[:, -1]
    for col, level in ((19, 0.75), (20, 0.90)):
        thr = lo + level * (hi - lo)
        out[:, col] = np.where(flat, 0.0, np.mean(y > thr[:, None], axis=1))
    return out[0] if single else out


# --------------------------------------------------------------- vectors / matrices

def extract_feature_vector(signal: Waveform, fs: int | None = None) -> np.ndarray:
    """1596 features in :data:`FEATURE_NAMES` order."""
    llds = extract_llds(signal, fs)
    return functionals(llds.values).reshape(-1)


@dataclass(frozen=True)
class NormStats:
    minimum: np.ndarray
    maximum: np.ndarray


@dataclass
class FeatureMatrix:
    """Rows of feature vectors with per-row metadata.

    ``meta`` maps each of :data:`META_COLUMNS` to a list with one entry per row.
    """

    values: np.ndarray
    meta: dict = field(default_factory=dict)
    layout: tuple[str, ...] = FEATURE_NAMES
    normalized: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            self.values = self.values.reshape(len(self.values), -1)
        if self.values.shape[1] != len(self.layout):
            raise ValueError(f"matrix has {self.values.shape[1]} columns, layout has {len(self.layout)}")
        n = self.values.shape[0]
        for k in META_COLUMNS:
            self.meta.setdefault(k, [""] * n)
            if len(self.meta[k]) != n:
                raise ValueError(f"metadata column {k!r} has {len(self.meta[k])} entries for {n} rows")

    def __len__(self):
        return self.values.shape[0]

    @property
    def speakers(self) -> np.ndarray:
        return np.asarray(self.meta["speaker_id"])

    @property
    def states(self) -> np.ndarray:
        return np.asarray(self.meta["state"], dtype=object)

    def subset(self, rows) -> "FeatureMatrix":
        rows = np.asarray(rows)
        if rows.dtype == bool:
            rows = np.flatnonzero(rows)
        meta = {k: [v[i] for i in rows] for k, v in self.meta.items()}
        return FeatureMatrix(self.values[rows], meta, self.layout, self.normalized)

    def select_columns(self, cols) -> "FeatureMatrix":
        cols = np.asarray(cols)
        return FeatureMatrix(self.values[:, cols], dict(self.meta), tuple(self.layout[c] for c in cols),
                             self.normalized)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(META_COLUMNS) + list(self.layout))
        for i in range(len(self)):
            w.writerow([self.meta[k][i] for k in META_COLUMNS] + [repr(float(v)) for v in self.values[i]])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "FeatureMatrix":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header = rows[0]
        n_meta = len(META_COLUMNS)
        if tuple(header[:n_meta]) != META_COLUMNS:
            raise ValueError(f"{path}: header must start with {', '.join(META_COLUMNS)}")
        body = rows[1:]
        meta = {k: [r[i] for r in body] for i, k in enumerate(META_COLUMNS)}
        meta["speaker_id"] = [int(s) if s.lstrip("-").isdigit() else s for s in meta["speaker_id"]]
        values = np.array([[float(v) for v in r[n_meta:]] for r in body]).reshape(len(body), -1)
        return cls(values, meta, tuple(header[n_meta:]))


def fit_norm(values: np.ndarray) -> NormStats:
    return NormStats(values.min(axis=0), values.max(axis=0))


def apply_norm(values: np.ndarray, stats: NormStats) -> np.ndarray:
    span = stats.maximum - stats.minimum
    const = span <= 0
    out = (values - stats.minimum) / np.where(const, 1.0, span)
    out = np.clip(out, 0.0, 1.0)
    out[:, const] = 0.5
    return out


def normalize_features(m: FeatureMatrix, stats: NormStats | None = None) -> tuple[FeatureMatrix, NormStats]:
    """Per-column min-max to [0, 1].

    Stats are fitted on ``m`` when not supplied; constant columns map to
    0.5 and values outside the fitted range are clipped.
    """
    if stats is None:
        stats = fit_norm(m.values)
    return replace(m, values=apply_norm(m.values, stats), normalized=True), stats
