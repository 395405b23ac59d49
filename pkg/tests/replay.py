"""Evaluators and reports built from the published accuracies."""

from glottal_emotion.emotions import STATES, EmotionState
from glottal_emotion.experiments import PairRow, PairwiseReport, Split, TableEvaluator

import reference_values as ref


def _split(left, right=None):
    left = tuple(EmotionState.parse(s) for s in left)
    if right is None:
        right = tuple(s for s in STATES if s not in left)
    return Split(left, tuple(EmotionState.parse(s) for s in right))


def replay_evaluator() -> TableEvaluator:
    table = {}
    for group in ref.TOP_LEVEL.values():
        for source, (left, acc) in group.items():
            table[(_split(left), source)] = acc / 100
    for level in (ref.SECOND_LEVEL, ref.BOTTOM_LEVEL):
        for (left, right), (g, s) in level.items():
            table[(_split(left, right), "glottal")] = g / 100
            table[(_split(left, right), "speech")] = s / 100
    default = {k: v / 100 for k, v in ref.TOP_LEVEL_MEAN.items()}
    return TableEvaluator(table, default)


def replay_pairwise() -> PairwiseReport:
    rows = []
    for (a, b), (g, s, _) in ref.PAIRWISE.items():
        rows.append(PairRow(EmotionState.parse(a), EmotionState.parse(b), s / 100, g / 100))
    return PairwiseReport(rows)


def expected_split(pair) -> Split:
    return _split(*pair)
