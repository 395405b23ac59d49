"""Liljencrants-Fant glottal source, pulse trains and source-filter synthesis.

Timing parameters of :class:`LfParams` are fractions of the period ``t0``.
The pulse is the glottal flow *derivative*; with the lip radiation folded
into it, it serves directly as the excitation of the vocal-tract filter.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .dsp import LpcModel, Waveform, all_pole_filter
from .emotions import EmotionState
from .errors import ParameterError


@dataclass(frozen=True)
class LfParams:
    t0: float
    ee: float = 1.0
    tp: float = 0.40
    te: float = 0.55
    ta: float = 0.02
    tc: float = 1.0

    def validate(self):
        if not self.t0 > 0:
            raise ParameterError(f"LF: t0 > 0 violated (t0={self.t0})")
        if not self.ee > 0:
            raise ParameterError(f"LF: ee > 0 violated (ee={self.ee})")
        if not 0 < self.tp:
            raise ParameterError(f"LF: 0 < tp violated (tp={self.tp})")
        if not self.tp < self.te:
            raise ParameterError(f"LF: tp < te violated (tp={self.tp}, te={self.te})")
        if not self.te < self.tc:
            raise ParameterError(f"LF: te < tc violated (te={self.te}, tc={self.tc})")
        if not self.tc <= 1:
            raise ParameterError(f"LF: tc <= 1 violated (tc={self.tc})")
        if not self.te < 2 * self.tp:
            # the opening sinusoid must already be negative at closure
            raise ParameterError(f"LF: te < 2*tp violated (tp={self.tp}, te={self.te})")
        if not 0 < self.ta < self.tc - self.te:
            raise ParameterError(
                f"LF: 0 < ta < tc - te violated (ta={self.ta}, tc - te={self.tc - self.te})"
            )
        return self


def _return_rate(ta: float, span: float) -> float:
    """epsilon with ``epsilon*ta = 1 - exp(-epsilon*span)`` (span = tc - te)."""
    ratio = span / ta
    u = brentq(lambda u: u - 1.0 + np.exp(-u * ratio), 1e-12, 1.0, xtol=1e-15, rtol=1e-15)
    return u / ta


def lf_pulse(params: LfParams, fs: int) -> np.ndarray:
    """One period of the LF flow derivative, ``round(t0*fs)`` samples.

    The closure instant is snapped to the sample grid so that the pulse
    minimum is exactly ``-ee``; the opening growth rate is then solved so
    the sampled pulse has zero net area (the flow closes).
    """
    params.validate()
    n = int(round(params.t0 * fs))
    if n < 16:
        raise ParameterError(f"LF: t0*fs >= 16 samples violated ({params.t0 * fs:.2f})")
    i_e = int(round(params.te * params.t0 * fs))
    Te = i_e / fs
    Tp = params.tp * params.t0
    if not (Tp < Te < 2 * Tp) or i_e >= n:
        raise ParameterError("LF: te snapped to the sample grid leaves (tp, 2*tp)")
    Ta = params.ta * params.t0
    Tc = params.tc * params.t0
    eps = _return_rate(Ta, Tc - Te)

    t = np.arange(n) / fs
    t_open = t[:i_e]
    t_ret = t[i_e:]
    ret = -params.ee / (eps * Ta) * (np.exp(-eps * (t_ret - Te)) - np.exp(-eps * (Tc - Te)))
    ret[t_ret >= Tc] = 0.0
    wg = np.pi / Tp
    shape = np.sin(wg * t_open) / np.sin(wg * Te)
    ret_area = ret.sum()

    def area(scaled_alpha):
        return -params.ee * np.sum(np.exp(scaled_alpha / params.t0 * (t_open - Te)) * shape) + ret_area

    lo, hi = -20.0, 20.0
    while area(lo) < 0:
        lo *= 2
        if lo < -1e4:
            raise ParameterError("LF: area balance has no solution for these parameters")
    while area(hi) > 0:
        hi *= 2
        if hi > 1e4:
            raise ParameterError("LF: area balance has no solution for these parameters")
    alpha = brentq(area, lo, hi, xtol=1e-13, rtol=1e-15) / params.t0
    opening = -params.ee * np.exp(alpha * (t_open - Te)) * shape
    if opening.size and opening.min() < -params.ee * (1 + 1e-9):
        raise ParameterError(
            "LF: opening phase undershoots -ee before closure; te is too late relative to tp"
        )
    return np.concatenate((opening, ret))


def lf_flow(params: LfParams, fs: int) -> np.ndarray:
    """Running sum of :func:`lf_pulse` scaled by ``1/fs``: the glottal flow."""
    return np.cumsum(lf_pulse(params, fs)) / fs


@dataclass(frozen=True)
class LfDistribution:
    """Mean LF shape plus a relative standard deviation applied per utterance."""

    tp: float
    te: float
    ta: float
    ee: float = 1.0
    tc: float = 1.0
    spread: float = 0.0

    def draw(self, t0: float, rng: np.random.Generator | None) -> LfParams:
        if rng is None or self.spread == 0:
            return LfParams(t0=t0, ee=self.ee, tp=self.tp, te=self.te, ta=self.ta, tc=self.tc)
        z = rng.standard_normal(4)
        tp = self.tp * (1 + self.spread * z[0])
        te = self.te * (1 + self.spread * z[1])
        ta = self.ta * (1 + self.spread * z[2])
        ee = self.ee * (1 + self.spread * z[3])
        tp = float(np.clip(tp, 0.15, 0.7))
        te = float(np.clip(te, tp * 1.08, min(tp * 1.45, 0.9)))
        ta = float(np.clip(ta, 0.003, 0.5 * (self.tc - te)))
        return LfParams(t0=t0, ee=max(ee, 0.05), tp=tp, te=te, ta=ta, tc=self.tc)


@dataclass(frozen=True)
class EmotionPreset:
    state: EmotionState
    f0_mean: float
    f0_span: float
    lf: LfDistribution
    jitter: float = 0.0
    shimmer: float = 0.0

    def f0_contour(self, t: np.ndarray, duration: float) -> np.ndarray:
        """Declining contour from ``f0_mean + span/2`` to ``f0_mean - span/2``."""
        if duration <= 0:
            return np.full_like(t, self.f0_mean)
        return self.f0_mean + 0.5 * self.f0_span * np.cos(np.pi * np.clip(t / duration, 0, 1))

    def scaled(self, f0_factor: float) -> "EmotionPreset":
        return replace(self, f0_mean=self.f0_mean * f0_factor, f0_span=self.f0_span * f0_factor)


# Implementation constants, not measured data. Only the relative orderings
# (F0 per state, earlier/later opening and closing per family) follow the
# qualitative descriptions of emotional glottal waveforms.
NEUTRAL_F0 = 170.0

PRESETS: dict[EmotionState, EmotionPreset] = {
    p.state: p
    for p in (
        EmotionPreset(EmotionState.NEUTRAL, NEUTRAL_F0, 20.0,
                      LfDistribution(tp=0.42, te=0.56, ta=0.025, ee=1.0, spread=0.02),
                      jitter=0.004, shimmer=0.02),
        EmotionPreset(EmotionState.MODERATE_JOY, NEUTRAL_F0 * 1.18, 40.0,
                      LfDistribution(tp=0.36, te=0.52, ta=0.020, ee=1.1, spread=0.02),
                      jitter=0.005, shimmer=0.025),
        EmotionPreset(EmotionState.INTENSE_JOY, NEUTRAL_F0 * 1.40, 70.0,
                      LfDistribution(tp=0.42, te=0.52, ta=0.012, ee=1.5, spread=0.02),
                      jitter=0.006, shimmer=0.03),
        EmotionPreset(EmotionState.MODERATE_ANGER, NEUTRAL_F0 * 0.85, 25.0,
                      LfDistribution(tp=0.44, te=0.63, ta=0.035, ee=1.2, spread=0.02),
                      jitter=0.006, shimmer=0.035),
        EmotionPreset(EmotionState.INTENSE_ANGER, NEUTRAL_F0 * 0.97, 60.0,
                      LfDistribution(tp=0.44, te=0.57, ta=0.008, ee=1.8, spread=0.02),
                      jitter=0.012, shimmer=0.05),
        EmotionPreset(EmotionState.MODERATE_SADNESS, NEUTRAL_F0 * 0.86, 12.0,
                      LfDistribution(tp=0.39, te=0.56, ta=0.045, ee=0.7, spread=0.02),
                      jitter=0.008, shimmer=0.04),
        EmotionPreset(EmotionState.INTENSE_SADNESS, NEUTRAL_F0 * 1.16, 30.0,
                      LfDistribution(tp=0.30, te=0.46, ta=0.030, ee=0.9, spread=0.02),
                      jitter=0.015, shimmer=0.06),
    )
}


def constant_preset(f0: float, lf: LfDistribution | None = None,
                    state: EmotionState = EmotionState.NEUTRAL) -> EmotionPreset:
    """Steady preset without contour, jitter or shimmer; handy for tests."""
    lf = lf or LfDistribution(tp=0.40, te=0.56, ta=0.02)
    return EmotionPreset(state, f0, 0.0, replace(lf, spread=0.0), 0.0, 0.0)


@dataclass
class PulseTrain:
    """Flow-derivative excitation plus the per-period ground truth."""

    derivative: Waveform
    onsets: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    params: list = field(default_factory=list)

    @property
    def flow(self) -> Waveform:
        fs = self.derivative.sample_rate
        return self.derivative.with_samples(np.cumsum(self.derivative.samples) / fs)


def lf_pulse_train(preset: EmotionPreset, duration_s: float, fs: int, rng_seed: int = 0) -> PulseTrain:
    if not duration_s > 0:
        raise ParameterError(f"duration_s must be > 0, got {duration_s}")
    rng = np.random.default_rng(rng_seed)
    n_total = int(round(duration_s * fs))
    shape_rng = rng if preset.lf.spread > 0 else None
    base = preset.lf.draw(1.0 / preset.f0_mean, shape_rng)
    out = np.zeros(n_total)
    onsets, params = [], []
    pos = 0
    while pos < n_total:
        f0 = float(preset.f0_contour(np.array(pos / fs), duration_s))
        t0 = 1.0 / f0
        if preset.jitter:
            t0 *= 1.0 + preset.jitter * rng.standard_normal()
        ee = base.ee
        if preset.shimmer:
            ee *= max(0.05, 1.0 + preset.shimmer * rng.standard_normal())
        p = replace(base, t0=round(t0 * fs) / fs, ee=ee)
        pulse = lf_pulse(p, fs)
        m = min(pulse.size, n_total - pos)
        out[pos:pos + m] = pulse[:m]
        onsets.append(pos)
        params.append(p)
        pos += pulse.size
    return PulseTrain(Waveform(out, fs), np.array(onsets, dtype=int), params)


def lf_train(preset: EmotionPreset, duration_s: float, fs: int, rng_seed: int = 0) -> Waveform:
    """Concatenated LF flow-derivative pulses following the preset's F0 contour."""
    return lf_pulse_train(preset, duration_s, fs, rng_seed).derivative


def make_vocal_tract(formants, fs: int) -> LpcModel:
    """All-pole tract with one conjugate pole pair per ``(freq, bandwidth)``."""
    poly = np.array([1.0])
    for item in formants:
        if isinstance(item, dict):
            f, bw = item["freq"], item["bandwidth"]
        else:
            f, bw = item
        if not 0 < f < fs / 2:
            raise ParameterError(f"formant frequency {f} Hz must lie in (0, fs/2 = {fs / 2})")
        if not bw > 0:
            raise ParameterError(f"formant bandwidth must be > 0, got {bw}")
        r = np.exp(-np.pi * bw / fs)
        theta = 2 * np.pi * f / fs
        poly = np.convolve(poly, [1.0, -2 * r * np.cos(theta), r * r])
    return LpcModel(poly[1:], 1.0)


def synth_speech(glottal_derivative: Waveform, tract: LpcModel, peak: float = 0.9) -> Waveform:
    """Filter the excitation through the tract and peak-normalise."""
    y = all_pole_filter(glottal_derivative, tract).samples
    m = np.max(np.abs(y)) if y.size else 0.0
    if m > 0:
        y = y * (peak / m)
    return glottal_derivative.with_samples(y)
