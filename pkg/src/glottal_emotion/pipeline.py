"""Dual-source feature extraction: the same extractor applied to speech and to its glottal flow."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .corpus import CorpusManifest, ManifestEntry, read_wav
from .dsp import Waveform
from .errors import GlottalEmotionError
from .features import FEATURE_NAMES, FeatureMatrix, extract_feature_vector
from .iaif import GlottalResult, IaifConfig, iaif_utterance, prep_for_features
from .pitch import PitchTrack, estimate_pitch

SOURCES = ("speech", "glottal")


@dataclass(frozen=True)
class PipelineConfig:
    iaif: IaifConfig = field(default_factory=IaifConfig)
    fmin: float = 60.0
    fmax: float = 500.0
    voicing_threshold: float = 0.45

    def describe(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.describe(), sort_keys=True).encode()).hexdigest()


@dataclass
class PipelineResult:
    speech: FeatureMatrix
    glottal: FeatureMatrix
    failures: list = field(default_factory=list)  # (utterance_id, message)

    def matrix(self, source: str) -> FeatureMatrix:
        if source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}, got {source!r}")
        return self.speech if source == "speech" else self.glottal


def iaif_voicing(track: PitchTrack, cfg: IaifConfig, n_samples: int) -> np.ndarray:
    """IAIF frame is voiced when the pitch frame nearest its centre is voiced."""
    spec = cfg.frame_spec(track.sample_rate)
    n = spec.n_frames(n_samples)
    centers = (np.arange(n) * spec.hop + spec.frame_len / 2) / track.sample_rate
    pc = track.frame_centers()
    idx = np.clip(np.round((centers - pc[0]) / (track.spec.hop / track.sample_rate)).astype(int),
                  0, track.n_frames - 1)
    return track.voiced[idx]


def glottal_waveform(speech: Waveform, cfg: PipelineConfig | None = None) -> tuple[GlottalResult, PitchTrack]:
    cfg = cfg or PipelineConfig()
    track = estimate_pitch(speech, fmin=cfg.fmin, fmax=cfg.fmax, threshold=cfg.voicing_threshold)
    mask = iaif_voicing(track, cfg.iaif, len(speech))
    return iaif_utterance(speech, cfg.iaif, mask), track


def process_utterance(speech: Waveform, cfg: PipelineConfig | None = None) -> dict[str, np.ndarray]:
    """Feature vectors for both sources of one utterance."""
    g, _ = glottal_waveform(speech, cfg)
    glottal = prep_for_features(g)
    return {"speech": extract_feature_vector(speech), "glottal": extract_feature_vector(glottal)}


def _matrix(rows: list, entries: list, source: str) -> FeatureMatrix:
    values = np.vstack(rows) if rows else np.zeros((0, len(FEATURE_NAMES)))
    meta = {
        "utterance_id": [e.utterance_id for e in entries],
        "speaker_id": [e.speaker_id for e in entries],
        "state": [e.state.short for e in entries],
        "source": [source] * len(entries),
    }
    return FeatureMatrix(values, meta)


def run_pipeline(manifest: CorpusManifest, cfg: PipelineConfig | None = None, out_dir=None,
                 seed: int | None = None) -> PipelineResult:
    """Extract both feature matrices; bad files are recorded and skipped.

    With ``out_dir`` the matrices are written as ``features_speech.csv`` and
    ``features_glottal.csv`` next to a ``provenance.json`` sidecar.
    """
    cfg = cfg or PipelineConfig()
    rows: dict[str, list] = {s: [] for s in SOURCES}
    ok: list[ManifestEntry] = []
    failures = []
    for entry in manifest:
        try:
            vecs = process_utterance(read_wav(manifest.resolve(entry)), cfg)
        except (GlottalEmotionError, ValueError, OSError) as exc:
            failures.append((entry.utterance_id, f"{type(exc).__name__}: {exc}"))
            continue
        ok.append(entry)
        for s in SOURCES:
            rows[s].append(vecs[s])
    result = PipelineResult(_matrix(rows["speech"], ok, "speech"), _matrix(rows["glottal"], ok, "glottal"), failures)
    if out_dir is not None:
        write_outputs(result, manifest, cfg, Path(out_dir), seed)
    return result


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def write_outputs(result: PipelineResult, manifest: CorpusManifest, cfg: PipelineConfig, out: Path,
                  seed: int | None) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    hashes = {}
    for s in SOURCES:
        text = result.matrix(s).to_csv()
        name = f"features_{s}.csv"
        (out / name).write_text(text)
        hashes[name] = _sha256(text)
    manifest_text = "".join(e.to_json() + "\n" for e in manifest)
    prov = {
        "config": cfg.describe(),
        "config_sha256": cfg.digest(),
        "seed": seed,
        "manifest_sha256": _sha256(manifest_text),
        "n_entries": len(manifest),
        "n_failures": len(result.failures),
        "failures": [{"utterance_id": u, "error": m} for u, m in result.failures],
        "outputs": hashes,
    }
    (out / "provenance.json").write_text(json.dumps(prov, indent=2, sort_keys=True) + "\n")
    return prov


def load_matrices(directory) -> PipelineResult:
    d = Path(directory)
    return PipelineResult(FeatureMatrix.from_csv(d / "features_speech.csv"),
                          FeatureMatrix.from_csv(d / "features_glottal.csv"))
