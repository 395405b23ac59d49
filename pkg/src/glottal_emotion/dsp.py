"""Numeric signal primitives: framing, LPC, inverse/all-pole filtering, spectra.

All functions are pure; arrays handed out are fresh copies so callers may
mutate them freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.signal import get_window, lfilter

from .errors import DegenerateInputError, EmptyResultError, ParameterError, StabilityError


@dataclass(frozen=True)
class Waveform:
    """Mono sample sequence with its sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64, copy=True).reshape(-1)
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ParameterError(f"sample_rate must be a positive integer, got {self.sample_rate!r}")
        if not np.all(np.isfinite(x)):
            raise DegenerateInputError("waveform contains NaN or Inf samples", code="non_finite")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def with_samples(self, samples) -> "Waveform":
        return Waveform(samples, self.sample_rate)


@dataclass(frozen=True)
class LpcModel:
    """All-pole model ``1/A(z)`` with ``A(z) = 1 + sum_k coeffs[k-1] z^-k``."""

    coeffs: np.ndarray
    gain: float = 1.0

    def __post_init__(self):
        a = np.array(self.coeffs, dtype=np.float64, copy=True).reshape(-1)
        if not np.all(np.isfinite(a)):
            raise ParameterError("LPC coefficients must be finite")
        if not np.isfinite(self.gain) or self.gain < 0:
            raise ParameterError(f"LPC gain must be finite and >= 0, got {self.gain!r}")
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", a)
        object.__setattr__(self, "gain", float(self.gain))

    @property
    def order(self) -> int:
        return self.coeffs.size

    @property
    def polynomial(self) -> np.ndarray:
        """``[1, a1, ..., ap]``."""
        return np.concatenate(([1.0], self.coeffs))

    @classmethod
    def identity(cls) -> "LpcModel":
        return cls(np.zeros(0), 1.0)

    def reflection_coefficients(self) -> np.ndarray:
        return poly_to_reflection(self.coeffs)

    def is_stable(self) -> bool:
        k = self.reflection_coefficients()
        return bool(np.all(np.abs(k) < 1.0))

    def poles(self) -> np.ndarray:
        if self.order == 0:
            return np.zeros(0, dtype=complex)
        return np.roots(self.polynomial)


class WindowKind(str, Enum):
    RECT = "rect"
    HANN = "hann"
    HAMMING = "hamming"


@dataclass(frozen=True)
class FrameSpec:
    frame_len: int
    hop: int
    window: WindowKind = WindowKind.HANN

    def __post_init__(self):
        if not (int(self.frame_len) >= int(self.hop) >= 1):
            raise ParameterError(
                f"FrameSpec requires frame_len >= hop >= 1, got frame_len={self.frame_len}, hop={self.hop}"
            )
        object.__setattr__(self, "window", WindowKind(self.window))

    @classmethod
    def from_ms(cls, fs: int, frame_ms: float, hop_ms: float, window="hann") -> "FrameSpec":
        return cls(int(round(fs * frame_ms / 1000.0)), max(1, int(round(fs * hop_ms / 1000.0))), window)

    def n_frames(self, n_samples: int) -> int:
        if n_samples < self.frame_len:
            return 0
        return (n_samples - self.frame_len) // self.hop + 1

    def window_values(self) -> np.ndarray:
        return window_values(self.window, self.frame_len)


def window_values(kind, n: int) -> np.ndarray:
    """Periodic (DFT-even) window of length ``n``; Hann overlaps sum to 1 at 50% hop."""
    kind = WindowKind(kind)
    if kind is WindowKind.RECT:
        return np.ones(n)
    return get_window(kind.value, n, fftbins=True).astype(np.float64)


def _as_vector(x) -> np.ndarray:
    if isinstance(x, Waveform):
        return x.samples
    return np.asarray(x, dtype=np.float64).reshape(-1)


def frame(signal, spec: FrameSpec) -> np.ndarray:
    """Split into overlapping windowed frames, shape ``(n_frames, frame_len)``."""
    x = _as_vector(signal)
    n = spec.n_frames(x.size)
    if n == 0:
        raise EmptyResultError(
            f"signal of {x.size} samples is shorter than one frame ({spec.frame_len})",
            code="signal_shorter_than_frame",
        )
    idx = np.arange(spec.frame_len)[None, :] + spec.hop * np.arange(n)[:, None]
    return x[idx] * spec.window_values()[None, :]


def autocorrelation(frame_values, max_lag: int) -> np.ndarray:
    """``r[k] = sum_n x[n] x[n+k]`` for ``k = 0..max_lag``."""
    x = _as_vector(frame_values)
    if max_lag < 0 or max_lag >= x.size:
        raise ParameterError(f"max_lag must lie in [0, {x.size - 1}], got {max_lag}")
    return np.array([np.dot(x[: x.size - k], x[k:]) for k in range(max_lag + 1)])


def levinson_durbin(r: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Solve the Toeplitz normal equations for ``A(z)``.

    Returns ``(coeffs, reflection, error)`` where ``error`` is the final
    prediction error power. The recursion stops early (remaining
    coefficients zero) once the error vanishes, which keeps perfectly
    predictable inputs from producing |k| >= 1.
    """
    r = np.asarray(r, dtype=np.float64)
    if r[0] <= 0.0:
        raise DegenerateInputError("zero-energy autocorrelation", code="zero_energy")
    a = np.zeros(order)
    k = np.zeros(order)
    err = r[0]
    floor = r[0] * 1e-14
    for i in range(order):
        acc = r[i + 1] + np.dot(a[:i], r[i:0:-1])
        ki = -acc / err
        if not np.isfinite(ki) or abs(ki) >= 1.0:
            break
        prev = a[:i].copy()
        a[:i] = prev + ki * prev[::-1]
        a[i] = ki
        k[i] = ki
        err *= 1.0 - ki * ki
        if err <= floor:
            break
    return a, k, float(err)


def lpc(frame_values, order: int) -> LpcModel:
    """Autocorrelation-method LPC of ``frame_values``.

    The caller applies any analysis window beforehand.
    """
    x = _as_vector(frame_values)
    if order < 1:
        raise ParameterError(f"LPC order must be >= 1, got {order}")
    if order >= x.size:
        raise ParameterError(f"LPC order {order} must be smaller than the frame length {x.size}")
    if not np.all(np.isfinite(x)):
        raise DegenerateInputError("frame contains NaN or Inf", code="non_finite")
    r = autocorrelation(x, order)
    if r[0] <= 0.0:
        raise DegenerateInputError("cannot fit LPC to a zero-energy frame", code="zero_energy")
    a, _, err = levinson_durbin(r, order)
    return LpcModel(a, np.sqrt(max(err, 0.0) / x.size))


def poly_to_reflection(coeffs) -> np.ndarray:
    """Step-down recursion; returns reflection coefficients k_1..k_p."""
    a = np.array(coeffs, dtype=np.float64)
    p = a.size
    k = np.zeros(p)
    for i in range(p - 1, -1, -1):
        ki = a[i]
        k[i] = ki
        if i == 0:
            break
        denom = 1.0 - ki * ki
        if denom <= 0.0:
            # |k| >= 1: already unstable, remaining values are meaningless
            k[:i] = np.inf
            break
        a = (a[:i] - ki * a[:i][::-1]) / denom
    return k


def reflection_to_poly(k) -> np.ndarray:
    """Step-up recursion from reflection coefficients to ``a(1..p)``."""
    a = np.zeros(0)
    for ki in np.asarray(k, dtype=np.float64):
        a = np.concatenate((a + ki * a[::-1], [ki]))
    return a


def inverse_filter(signal: Waveform, model: LpcModel) -> Waveform:
    """FIR filtering by ``A(z)`` from zero initial state."""
    x = signal.samples
    if model.order == 0:
        return signal.with_samples(x)
    return signal.with_samples(lfilter(model.polynomial, [1.0], x))


def all_pole_filter(excitation: Waveform, model: LpcModel) -> Waveform:
    """IIR filtering by ``1/A(z)`` from zero initial state."""
    if model.order == 0:
        return excitation.with_samples(excitation.samples)
    if not model.is_stable():
        raise StabilityError("all-pole model has a reflection coefficient with |k| >= 1")
    return excitation.with_samples(lfilter([1.0], model.polynomial, excitation.samples))


def leaky_integrate(signal: Waveform, rho: float = 0.99) -> Waveform:
    """``y[n] = rho*y[n-1] + x[n]``."""
    if not (0.0 < rho <= 1.0):
        raise ParameterError(f"integrator leak rho must lie in (0, 1], got {rho}")
    return signal.with_samples(lfilter([1.0], [1.0, -rho], signal.samples))


def dft_magnitude(frame_values, n_fft: int) -> np.ndarray:
    """Zero-padded DFT magnitude, ``n_fft // 2 + 1`` bins; bin k is ``k*fs/n_fft`` Hz."""
    x = _as_vector(frame_values)
    if n_fft < 1 or n_fft & (n_fft - 1):
        raise ParameterError(f"n_fft must be a power of two, got {n_fft}")
    if n_fft < x.size:
        raise ParameterError(f"n_fft={n_fft} is smaller than the frame length {x.size}")
    return np.abs(np.fft.rfft(x, n_fft))


def next_pow2(n: int) -> int:
    return 1 << max(0, int(np.ceil(np.log2(max(n, 1)))))
