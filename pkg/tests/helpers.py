"""Shared builders for synthetic feature matrices."""

import numpy as np

from glottal_emotion.emotions import STATES
from glottal_emotion.features import FeatureMatrix


def make_matrix(values, states, speakers, source="glottal"):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    n = values.shape[0]
    meta = {
        "utterance_id": [f"u{i}" for i in range(n)],
        "speaker_id": list(speakers),
        "state": [getattr(s, "short", s) for s in states],
        "source": [source] * n,
    }
    return FeatureMatrix(values, meta, tuple(f"f{j}" for j in range(values.shape[1])))


def balanced_design(n_speakers, n_per_state, states=STATES):
    """State and speaker columns for every (speaker, state, repetition)."""
    st, sp = [], []
    for s in range(1, n_speakers + 1):
        for state in states:
            st += [state] * n_per_state
            sp += [s] * n_per_state
    return st, sp
