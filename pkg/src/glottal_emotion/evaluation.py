"""Leave-one-speaker-out evaluation of grouped-state SVM classifiers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .emotions import EmotionState
from .errors import DegenerateInputError, ParameterError
from .features import FeatureMatrix, apply_norm, fit_norm
from .svm import SvmConfig, svm_train


@dataclass
class ConfusionMatrix:
    """Counts with rows = true label and columns = predicted label."""

    labels: tuple
    counts: np.ndarray

    @classmethod
    def from_predictions(cls, labels: Sequence, truth: Sequence, pred: Sequence) -> "ConfusionMatrix":
        labels = tuple(labels)
        idx = {lab: i for i, lab in enumerate(labels)}
        counts = np.zeros((len(labels), len(labels)), dtype=int)
        for t, p in zip(truth, pred):
            counts[idx[t], idx[p]] += 1
        return cls(labels, counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.total) if self.total else 0.0

    def row_percent(self) -> np.ndarray:
        rows = self.counts.sum(axis=1, keepdims=True)
        return np.divide(100.0 * self.counts, rows, out=np.zeros(self.counts.shape), where=rows > 0)

    def relabel(self, mapping: Mapping) -> "ConfusionMatrix":
        return ConfusionMatrix(tuple(mapping[lab] for lab in self.labels), self.counts.copy())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.labels != other.labels:
            raise ParameterError("cannot add confusion matrices with different labels")
        return ConfusionMatrix(self.labels, self.counts + other.counts)


@dataclass
class LosoResult:
    accuracy: float
    confusion: ConfusionMatrix
    n_folds: int
    fold_speakers: list = field(default_factory=list)
    predictions: list = field(default_factory=list)  # (row index, truth, prediction)


# A node trainer maps (train rows, train labels) to a predictor over test rows.
NodeTrainer = Callable[[np.ndarray, Sequence], Callable[[np.ndarray], list]]


def svm_node_trainer(cfg: SvmConfig | None = None) -> NodeTrainer:
    """Trainer that min-max scales on the training rows, then fits an SVM."""
    cfg = cfg or SvmConfig()

    def train(x_train: np.ndarray, y_train: Sequence):
        stats = fit_norm(x_train)
        model = svm_train(apply_norm(x_train, stats), list(y_train), cfg)
        return lambda x_test: model.predict(apply_norm(np.atleast_2d(x_test), stats))

    return train


def _parse_grouping(grouping: Mapping) -> dict:
    return {EmotionState.parse(k): v for k, v in grouping.items()}


def side_labels(grouping: Mapping) -> tuple:
    """Distinct side labels in first-appearance order."""
    return tuple(dict.fromkeys(grouping.values()))


def speaker_folds(speakers: Sequence) -> list:
    return sorted(dict.fromkeys(speakers), key=str)


def loso_evaluate(matrix: FeatureMatrix, grouping: Mapping, cfg: SvmConfig | None = None,
                  trainer: NodeTrainer | None = None) -> LosoResult:
    """Pooled leave-one-speaker-out accuracy for a grouping of states into classes.

    ``grouping`` maps each participating state to a class label (e.g. "L"
    and "R", or the state itself). Rows whose state is absent are ignored.
    Normalisation statistics and the classifier are fitted per fold on the
    training speakers only.
    """
    groups = _parse_grouping(grouping)
    labels = side_labels(groups)
    if len(labels) < 2:
        raise ParameterError("grouping must define at least two classes")
    states = [EmotionState.parse(s) for s in matrix.states]
    rows = np.array([i for i, s in enumerate(states) if s in groups], dtype=int)
    if rows.size == 0:
        raise DegenerateInputError("no rows match the grouping", code="missing_state")
    y = np.array([groups[states[i]] for i in rows], dtype=object)
    spk = np.asarray(matrix.speakers)[rows]
    folds = speaker_folds(spk.tolist())
    if len(folds) < 2:
        raise ParameterError("leave-one-speaker-out needs at least two speakers")
    trainer = trainer or svm_node_trainer(cfg)
    x = matrix.values[rows]
    truth, pred, record = [], [], []
    for sp in folds:
        test = spk == sp
        train = ~test
        present = set(y[train].tolist())
        if len(present) < len(labels):
            raise DegenerateInputError(
                f"fold leaving out speaker {sp} lacks training rows for class(es) "
                f"{sorted(set(labels) - present, key=str)}", code="missing_state",
            )
        predict = trainer(x[train], y[train].tolist())
        p = predict(x[test])
        for r, t, q in zip(rows[test], y[test], p):
            record.append((int(r), t, q))
        truth.extend(y[test].tolist())
        pred.extend(p)
    cm = ConfusionMatrix.from_predictions(labels, truth, pred)
    record.sort(key=lambda item: item[0])
    return LosoResult(cm.accuracy, cm, len(folds), folds, record)
