"""Glottal inverse filtering and speech-vs-glottal emotion classification on synthetic LF corpora."""

from .dsp import LpcModel, Waveform, all_pole_filter, inverse_filter, levinson_durbin, lpc
from .emotions import STATES, EmotionState
from .errors import (
    ConfigError,
    DegenerateInputError,
    EmptyResultError,
    GlottalEmotionError,
    ParameterError,
    StabilityError,
)
from .iaif import IaifConfig, iaif_frame, iaif_utterance
from .lf import LfParams, lf_pulse, lf_train, make_vocal_tract, synth_speech
from .pitch import estimate_pitch

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DegenerateInputError", "EmotionState", "EmptyResultError", "GlottalEmotionError",
    "IaifConfig", "LfParams", "LpcModel", "ParameterError", "STATES", "StabilityError", "Waveform",
    "all_pole_filter", "estimate_pitch", "iaif_frame", "iaif_utterance", "inverse_filter",
    "levinson_durbin", "lf_pulse", "lf_train", "lpc", "make_vocal_tract", "synth_speech",
]
