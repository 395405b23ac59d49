"""Synthetic emotional-speech corpus: LF sources through speaker-specific vowel tracts."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .dsp import Waveform
from .emotions import STATES, EmotionState
from .errors import ConfigError, DegenerateInputError
from .lf import PRESETS, EmotionPreset, lf_pulse_train, make_vocal_tract, synth_speech

# Open vowels only: inverse filtering degrades once F1 approaches F0.
VOWELS: dict[str, tuple[tuple[float, float], ...]] = {
    "a": ((730.0, 80.0), (1090.0, 90.0), (2440.0, 120.0), (3400.0, 170.0)),
    "ae": ((660.0, 80.0), (1720.0, 100.0), (2410.0, 130.0), (3300.0, 180.0)),
    "uh": ((640.0, 80.0), (1190.0, 90.0), (2390.0, 120.0), (3300.0, 170.0)),
}

SILENCE_S = 0.06
RAMP_S = 0.02
DITHER = 2e-4
PEAK = 0.9


@dataclass(frozen=True)
class SpeakerProfile:
    speaker_id: int
    f0_factor: float
    formant_scale: tuple[float, ...]

    def tract_formants(self, vowel: str, rng: np.random.Generator | None = None):
        jitter = rng.uniform(0.97, 1.03, size=len(self.formant_scale)) if rng is not None else 1.0
        scale = np.asarray(self.formant_scale) * jitter
        return [(f * s, bw) for (f, bw), s in zip(VOWELS[vowel], scale)]


def speaker_profile(speaker_id: int) -> SpeakerProfile:
    """Speaker identity from ``speaker_id`` alone: an F0 factor and formant scaling."""
    rng = np.random.default_rng(np.random.SeedSequence([0x5EED, int(speaker_id)]))
    f0_factor = float(rng.uniform(0.93, 1.07))
    scale = tuple(float(v) for v in rng.uniform(0.9, 1.1, size=4))
    return SpeakerProfile(int(speaker_id), f0_factor, scale)


@dataclass(frozen=True)
class CorpusConfig:
    n_speakers: int = 16
    n_per_state: int = 48
    fs: int = 16000
    duration_s: float = 1.0
    seed: int = 0
    out_dir: str = "corpus"
    # state -> preset; states missing here fall back to the shipped table
    presets: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.n_speakers < 1 or self.n_per_state < 1:
            raise ConfigError("n_speakers and n_per_state must be >= 1")
        if self.fs < 8000:
            raise ConfigError(f"fs must be >= 8000 Hz, got {self.fs}")
        if not self.duration_s > 0.1:
            raise ConfigError(f"duration_s must exceed 0.1 s, got {self.duration_s}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")

    def preset(self, state: EmotionState) -> EmotionPreset:
        return self.presets.get(state, PRESETS[state])

    def describe(self) -> dict:
        d = asdict(self)
        d["presets"] = {s.short: _preset_dict(p) for s, p in sorted(self.presets.items(), key=lambda kv: kv[0].index)}
        return d


def _preset_dict(p: EmotionPreset) -> dict:
    d = asdict(p)
    d["state"] = p.state.short
    return d


@dataclass(frozen=True)
class ManifestEntry:
    utterance_id: str
    speaker_id: int
    state: EmotionState
    file_path: str
    duration_s: float
    seed: int

    def to_json(self) -> str:
        d = asdict(self)
        d["state"] = self.state.short
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ManifestEntry":
        return cls(str(d["utterance_id"]), int(d["speaker_id"]), EmotionState.parse(d["state"]),
                   str(d["file_path"]), float(d["duration_s"]), int(d["seed"]))


@dataclass
class CorpusManifest:
    entries: list
    root: Path = Path(".")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def resolve(self, entry: ManifestEntry) -> Path:
        p = Path(entry.file_path)
        return p if p.is_absolute() else self.root / p

    def counts(self) -> dict:
        out: dict = {}
        for e in self.entries:
            out[(e.speaker_id, e.state)] = out.get((e.speaker_id, e.state), 0) + 1
        return out

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text("".join(e.to_json() + "\n" for e in self.entries))
        return path

    @classmethod
    def load(cls, path) -> "CorpusManifest":
        path = Path(path)
        try:
            lines = path.read_text().splitlines()
        except OSError as exc:
            raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
        entries = []
        for n, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                entries.append(ManifestEntry.from_dict(json.loads(line)))
            except (ValueError, KeyError) as exc:
                raise ConfigError(f"{path}:{n}: bad manifest entry: {exc}") from exc
        return cls(entries, path.parent)


def entry_seed(seed: int, speaker_id: int, state: EmotionState, k: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(speaker_id), state.index, int(k)]).generate_state(1)[0])


def synth_utterance(preset: EmotionPreset, speaker: SpeakerProfile, duration_s: float, fs: int,
                    seed: int) -> Waveform:
    """One sustained vowel: silence, ramped voicing, silence, light dither."""
    rng = np.random.default_rng(seed)
    vowel = sorted(VOWELS)[int(rng.integers(len(VOWELS)))]
    tract = make_vocal_tract(speaker.tract_formants(vowel, rng), fs)
    voiced_s = duration_s - 2 * SILENCE_S
    train = lf_pulse_train(preset.scaled(speaker.f0_factor), voiced_s, fs, int(rng.integers(2**32)))
    voiced = synth_speech(train.derivative, tract, PEAK).samples
    ramp = int(round(RAMP_S * fs))
    env = np.ones(voiced.size)
    edge = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp) / ramp)
    env[:ramp] = edge
    env[voiced.size - ramp:] = edge[::-1]
    pad = np.zeros(int(round(SILENCE_S * fs)))
    x = np.concatenate((pad, voiced * env, pad))
    x = x + DITHER * rng.standard_normal(x.size)
    x *= PEAK / np.max(np.abs(x))
    return Waveform(x, fs)


def to_pcm16(x: np.ndarray) -> np.ndarray:
    return np.round(np.clip(x, -1.0, 1.0) * 32767).astype(np.int16)


def write_wav(path, signal: Waveform) -> None:
    try:
        wavfile.write(str(path), signal.sample_rate, to_pcm16(signal.samples))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_wav(path) -> Waveform:
    """Mono PCM-16 (or float) WAV as a float waveform in [-1, 1]."""
    try:
        fs, data = wavfile.read(str(path))
    except (OSError, ValueError) as exc:
        raise DegenerateInputError(f"cannot read {path}: {exc}", code="unreadable_audio") from exc
    if data.ndim != 1:
        raise DegenerateInputError(f"{path}: expected mono audio, got {data.shape[1]} channels", code="not_mono")
    if data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif np.issubdtype(data.dtype, np.floating):
        x = data.astype(np.float64)
    else:
        raise DegenerateInputError(f"{path}: unsupported sample type {data.dtype}", code="bad_format")
    return Waveform(x, int(fs))


def generate_corpus(config: CorpusConfig) -> CorpusManifest:
    """Write one WAV per (speaker, state, repetition) plus ``manifest.jsonl``.

    Emotion is carried only by the glottal source. Vowel choice, formant
    jitter and source randomness come from a per-entry seed derived from
    ``config.seed``; speaker traits come from the speaker id alone.
    """
    out = Path(config.out_dir)
    wav_dir = out / "wav"
    try:
        wav_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {wav_dir}: {exc}") from exc
    entries = []
    for spk in range(1, config.n_speakers + 1):
        profile = speaker_profile(spk)
        for state in STATES:
            preset = config.preset(state)
            for k in range(config.n_per_state):
                seed = entry_seed(config.seed, spk, state, k)
                uid = f"s{spk:02d}_{state.short.replace('-', '')}_{k:03d}"
                rel = os.path.join("wav", uid + ".wav")
                w = synth_utterance(preset, profile, config.duration_s, config.fs, seed)
                write_wav(out / rel, w)
                entries.append(ManifestEntry(uid, spk, state, rel, w.duration, seed))
    manifest = CorpusManifest(entries, out)
    manifest.write(out / "manifest.jsonl")
    return manifest


def with_identical_presets(config: CorpusConfig, a: EmotionState, b: EmotionState) -> CorpusConfig:
    """Copy of ``config`` in which state ``b`` is synthesised exactly like ``a``."""
    presets = dict(config.presets)
    presets[b] = replace(config.preset(a), state=b)
    return replace(config, presets=presets)
