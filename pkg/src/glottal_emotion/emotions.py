"""The seven emotional states and their ordinal positions in valence-arousal space."""

from __future__ import annotations

from enum import Enum


class EmotionState(str, Enum):
    NEUTRAL = "N"
    MODERATE_JOY = "M-J"
    INTENSE_JOY = "I-J"
    MODERATE_ANGER = "M-A"
    INTENSE_ANGER = "I-A"
    MODERATE_SADNESS = "M-S"
    INTENSE_SADNESS = "I-S"

    @property
    def short(self) -> str:
        return self.value

    @property
    def index(self) -> int:
        return STATES.index(self)

    @property
    def arousal_rank(self) -> int:
        return AROUSAL_RANK[self]

    @property
    def valence_rank(self) -> int:
        return VALENCE_RANK[self]

    @classmethod
    def parse(cls, text: str) -> "EmotionState":
        """Accept the short code (``"M-J"``) or the member name (``"MODERATE_JOY"``)."""
        if isinstance(text, cls):
            return text
        t = str(text).strip()
        for s in cls:
            if t == s.value or t.upper() == s.name or t.replace(" ", "_").upper() == s.name:
                return s
        raise ValueError(f"unknown emotional state {text!r}")


# Canonical order: the row/column order used throughout the pairwise tables.
STATES: tuple[EmotionState, ...] = tuple(EmotionState)

# Ordinal ranks, 1 = lowest. Ties are allowed where the states sit at
# comparable heights on that axis.
AROUSAL_RANK = {
    EmotionState.MODERATE_SADNESS: 1,
    EmotionState.NEUTRAL: 2,
    EmotionState.MODERATE_ANGER: 3,
    EmotionState.INTENSE_SADNESS: 3,
    EmotionState.MODERATE_JOY: 4,
    EmotionState.INTENSE_JOY: 5,
    EmotionState.INTENSE_ANGER: 6,
}

VALENCE_RANK = {
    EmotionState.INTENSE_ANGER: 1,
    EmotionState.INTENSE_SADNESS: 2,
    EmotionState.MODERATE_SADNESS: 3,
    EmotionState.MODERATE_ANGER: 4,
    EmotionState.NEUTRAL: 5,
    EmotionState.MODERATE_JOY: 6,
    EmotionState.INTENSE_JOY: 7,
}


def canonical_pair(a: EmotionState, b: EmotionState) -> tuple[EmotionState, EmotionState]:
    if a == b:
        raise ValueError(f"a pair needs two distinct states, got {a.short} twice")
    return (a, b) if a.index < b.index else (b, a)


def all_pairs() -> list[tuple[EmotionState, EmotionState]]:
    return [(a, b) for i, a in enumerate(STATES) for b in STATES[i + 1:]]


def label_states(states) -> str:
    return ", ".join(s.short for s in sorted(states, key=lambda s: s.index))
