"""Two-stage iterative adaptive inverse filtering (IAIF).

Stage 1 removes lip radiation with a fixed first-order filter, fits a rough
vocal tract and integrates the residual into a coarse glottal flow. Stage 2
models that coarse flow, cancels it from the speech, refits the vocal tract
and integrates the final residual into the glottal flow estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .dsp import FrameSpec, LpcModel, Waveform, lpc, window_values
from .errors import DegenerateInputError, ParameterError


@dataclass(frozen=True)
class IaifConfig:
    alpha: float = 0.99
    t1: int | None = None
    g2: int = 4
    t2: int | None = None
    frame_len_ms: float = 32.0
    hop_ms: float = 16.0
    rho: float = 0.99
    # samples of preceding signal run through the filters before each frame
    warmup_ms: float = 32.0

    def __post_init__(self):
        if not 0.96 <= self.alpha < 1.0:
            raise ParameterError(f"IAIF alpha must lie in [0.96, 1), got {self.alpha}")
        for name in ("t1", "g2", "t2"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ParameterError(f"IAIF order {name} must be >= 1, got {v}")
        if not 0 < self.rho <= 1:
            raise ParameterError(f"IAIF rho must lie in (0, 1], got {self.rho}")
        if self.hop_ms <= 0 or self.frame_len_ms < self.hop_ms:
            raise ParameterError("IAIF frame_len_ms must be >= hop_ms > 0")

    def tract_orders(self, fs: int) -> tuple[int, int]:
        default = 2 + int(round(fs / 1000))
        return (self.t1 or default, self.t2 or default)

    def frame_spec(self, fs: int) -> FrameSpec:
        return FrameSpec.from_ms(fs, self.frame_len_ms, self.hop_ms, "hann")


@dataclass
class IaifFrame:
    glottal_frame: np.ndarray
    hvt2: LpcModel
    hg2: LpcModel
    hvt1: LpcModel | None = None
    g1: np.ndarray | None = None


@dataclass
class GlottalResult:
    glottal: Waveform
    voicing_mask: np.ndarray
    per_frame: list = field(default_factory=list)
    frame_spec: FrameSpec | None = None

    def voiced_sample_mask(self) -> np.ndarray:
        """True for samples inside the support of at least one voiced frame."""
        mask = np.zeros(len(self.glottal), dtype=bool)
        spec = self.frame_spec
        if spec is None:
            return mask
        for k, v in enumerate(self.voicing_mask):
            if v:
                mask[k * spec.hop:k * spec.hop + spec.frame_len] = True
        return mask


def _fir(poly, x):
    return lfilter(poly, [1.0], x)


def _integrate(x, rho):
    return lfilter([1.0], [1.0, -rho], x)


def iaif_frame(speech_frame, fs: int, cfg: IaifConfig | None = None, context=None) -> IaifFrame:
    """Glottal flow estimate for one analysis frame.

    ``context`` holds the samples immediately preceding the frame; they run
    through the inverse filters and integrator to settle their state but are
    not part of the LPC fits or of the returned frame.
    """
    cfg = cfg or IaifConfig()
    x = np.asarray(speech_frame, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise DegenerateInputError("speech frame contains NaN or Inf", code="non_finite")
    if not np.any(x):
        raise DegenerateInputError("cannot inverse filter a zero-energy frame", code="zero_energy")
    pre = np.zeros(0) if context is None else np.asarray(context, dtype=np.float64).reshape(-1)
    full = np.concatenate((pre, x))
    n0 = pre.size
    t1, t2 = cfg.tract_orders(fs)
    w = window_values("hann", x.size)

    # stage 1
    hg1 = np.array([1.0, -cfg.alpha])
    y1 = _fir(hg1, full)[n0:]
    hvt1 = lpc(w * y1, t1)
    g1_full = _integrate(_fir(hvt1.polynomial, full), cfg.rho)
    g1 = g1_full[n0:]

    # stage 2
    hg2 = lpc(w * g1, cfg.g2)
    y2 = _integrate(_fir(hg2.polynomial, full), cfg.rho)[n0:]
    hvt2 = lpc(w * y2, t2)
    g = _integrate(_fir(hvt2.polynomial, full), cfg.rho)[n0:]
    return IaifFrame(g, hvt2, hg2, hvt1, g1)


def iaif_utterance(speech: Waveform, cfg: IaifConfig | None = None, voicing=None) -> GlottalResult:
    """Frame-wise IAIF with windowed overlap-add over voiced frames.

    Samples covered only by unvoiced frames are exactly zero. A voiced frame
    whose fit is degenerate (e.g. digital silence) is demoted to unvoiced and
    the returned mask reflects that.
    """
    cfg = cfg or IaifConfig()
    fs = speech.sample_rate
    spec = cfg.frame_spec(fs)
    x = speech.samples
    n_frames = spec.n_frames(x.size)
    if voicing is None:
        voicing = np.ones(n_frames, dtype=bool)
    mask = np.array(voicing, dtype=bool).reshape(-1)
    if mask.size != n_frames:
        raise ParameterError(f"voicing mask has {mask.size} entries but the signal has {n_frames} frames")
    warm = int(round(cfg.warmup_ms * fs / 1000.0))
    w = spec.window_values()
    num = np.zeros(x.size)
    den = np.zeros(x.size)
    per_frame: list = [None] * n_frames
    for k in range(n_frames):
        s = k * spec.hop
        e = s + spec.frame_len
        den[s:e] += w
        if not mask[k]:
            continue
        try:
            res = iaif_frame(x[s:e], fs, cfg, context=x[max(0, s - warm):s])
        except DegenerateInputError:
            mask[k] = False
            continue
        num[s:e] += w * res.glottal_frame
        per_frame[k] = {"hvt2": res.hvt2, "hg2": res.hg2}
    out = np.zeros(x.size)
    ok = den > 1e-12
    out[ok] = num[ok] / den[ok]
    return GlottalResult(speech.with_samples(out), mask, per_frame, spec)


def _voiced_values(g: GlottalResult) -> tuple[np.ndarray, np.ndarray]:
    sel = g.voiced_sample_mask()
    if not sel.any():
        raise DegenerateInputError("glottal result has no voiced samples", code="all_unvoiced")
    return sel, g.glottal.samples[sel]


def prep_for_analysis(g: GlottalResult) -> Waveform:
    """Min-max scale voiced samples to [0, 1]; unvoiced samples stay 0."""
    sel, v = _voiced_values(g)
    lo, hi = v.min(), v.max()
    if hi - lo <= 0:
        raise DegenerateInputError("voiced glottal samples have zero span", code="zero_span")
    out = np.zeros(len(g.glottal))
    out[sel] = (v - lo) / (hi - lo)
    return g.glottal.with_samples(out)


def prep_for_features(g: GlottalResult) -> Waveform:
    """Subtract the voiced-region mean; unvoiced samples stay 0."""
    sel, v = _voiced_values(g)
    out = np.zeros(len(g.glottal))
    out[sel] = v - v.mean()
    return g.glottal.with_samples(out)


def best_lag_correlation(estimate, reference, max_lag: int = 0) -> tuple[float, int]:
    """Largest Pearson correlation of ``estimate`` against ``reference`` over lags.

    A positive lag shifts the estimate later, i.e. compares
    ``estimate[n + lag]`` with ``reference[n]``. Returns ``(corr, lag)``.
    """
    a = np.asarray(estimate, dtype=np.float64)
    b = np.asarray(reference, dtype=np.float64)
    if a.size != b.size:
        raise ParameterError("estimate and reference must have equal length")
    best, best_lag = -np.inf, 0
    for lag in range(-max_lag, max_lag + 1):
        if lag >= 0:
            u, v = a[lag:], b[:b.size - lag]
        else:
            u, v = a[:lag], b[-lag:]
        u = u - u.mean()
        v = v - v.mean()
        d = np.sqrt(np.dot(u, u) * np.dot(v, v))
        c = np.dot(u, v) / d if d > 0 else 0.0
        if c > best:
            best, best_lag = c, lag
    return float(best), best_lag
