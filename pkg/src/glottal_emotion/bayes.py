"""Single-feature pairwise classification with smoothed histograms, ranked by LOSO accuracy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .emotions import EmotionState, canonical_pair
from .errors import DegenerateInputError, ParameterError
from .features import FeatureMatrix, apply_norm, fit_norm

N_BINS = 40


@dataclass(frozen=True)
class DensityEstimate:
    bin_edges: np.ndarray
    probs: np.ndarray

    @property
    def n_bins(self) -> int:
        return self.probs.size

    def prob(self, value: float) -> float:
        return float(self.probs[bin_index(value, self.n_bins)])


@dataclass(frozen=True)
class PairTask:
    state_a: EmotionState
    state_b: EmotionState
    source: str = "glottal"

    def __post_init__(self):
        a, b = canonical_pair(EmotionState.parse(self.state_a), EmotionState.parse(self.state_b))
        object.__setattr__(self, "state_a", a)
        object.__setattr__(self, "state_b", b)
        if self.source not in ("speech", "glottal"):
            raise ParameterError(f"source must be 'speech' or 'glottal', got {self.source!r}")

    @property
    def name(self) -> str:
        return f"{self.state_a.short} vs {self.state_b.short}"


def bin_index(values, n_bins: int = N_BINS):
    """Histogram bin of values in [0, 1]; 1.0 falls in the last bin."""
    v = np.asarray(values, dtype=float)
    return np.clip(np.floor(v * n_bins), 0, n_bins - 1).astype(int)


def estimate_density(values, n_bins: int = N_BINS) -> DensityEstimate:
    """Add-one smoothed histogram over [0, 1]."""
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size == 0:
        raise DegenerateInputError("cannot estimate a density from no values", code="empty_input")
    if np.any((v < 0) | (v > 1)) or not np.all(np.isfinite(v)):
        raise ParameterError("density values must lie in [0, 1]")
    counts = np.bincount(bin_index(v, n_bins), minlength=n_bins).astype(float)
    return DensityEstimate(np.linspace(0.0, 1.0, n_bins + 1), (counts + 1.0) / (v.size + n_bins))


def bayes_predict(f_ij: float, pdf_a: DensityEstimate, pdf_b: DensityEstimate) -> str:
    """``"A"`` when ``P_A(f) >= P_B(f)``, else ``"B"``."""
    return "A" if pdf_a.prob(f_ij) >= pdf_b.prob(f_ij) else "B"


def _pair_rows(matrix: FeatureMatrix, pair: PairTask):
    states = [EmotionState.parse(s) for s in matrix.states]
    is_a = np.array([s == pair.state_a for s in states])
    is_b = np.array([s == pair.state_b for s in states])
    rows = np.flatnonzero(is_a | is_b)
    return rows, is_a[rows]


def _histograms(binned: np.ndarray, n_bins: int) -> np.ndarray:
    """Counts per (feature, bin) for an ``(n_rows, n_features)`` array of bin indices."""
    d = binned.shape[1]
    flat = (np.arange(d)[None, :] * n_bins + binned).ravel()
    return np.bincount(flat, minlength=d * n_bins).reshape(d, n_bins).astype(float)


def loso_correct_counts(values: np.ndarray, is_a: np.ndarray, speakers: np.ndarray,
                        n_bins: int = N_BINS) -> tuple[np.ndarray, int]:
    """Correct leave-one-speaker-out predictions per feature column.

    For every held-out speaker the columns are min-max scaled on the
    remaining speakers only, both states' densities are fitted on those
    rows, and each held-out row is classified by its own column value.
    """
    values = np.asarray(values, dtype=float)
    speakers = np.asarray(speakers)
    folds = sorted(set(speakers.tolist()), key=str)
    if len(folds) < 2:
        raise ParameterError("leave-one-speaker-out needs at least two speakers")
    correct = np.zeros(values.shape[1])
    total = 0
    for spk in folds:
        test = speakers == spk
        train = ~test
        a_tr, b_tr = train & is_a, train & ~is_a
        if not a_tr.any() or not b_tr.any():
            raise DegenerateInputError(
                f"fold leaving out speaker {spk} lacks training rows for one state", code="missing_state"
            )
        stats = fit_norm(values[train])
        hist_a = _histograms(bin_index(apply_norm(values[a_tr], stats), n_bins), n_bins)
        hist_b = _histograms(bin_index(apply_norm(values[b_tr], stats), n_bins), n_bins)
        p_a = (hist_a + 1.0) / (a_tr.sum() + n_bins)
        p_b = (hist_b + 1.0) / (b_tr.sum() + n_bins)
        tb = bin_index(apply_norm(values[test], stats), n_bins)
        cols = np.arange(values.shape[1])[None, :]
        pred_a = p_a[cols, tb] >= p_b[cols, tb]
        correct += np.sum(pred_a == is_a[test][:, None], axis=0)
        total += int(test.sum())
    return correct, total


def single_feature_accuracy(matrix: FeatureMatrix, pair: PairTask, feature_index: int,
                            n_bins: int = N_BINS) -> float:
    rows, is_a = _pair_rows(matrix, pair)
    if not is_a.any() or is_a.all():
        raise DegenerateInputError(f"matrix lacks rows for one state of {pair.name}", code="missing_state")
    col = matrix.values[rows][:, [feature_index]]
    correct, total = loso_correct_counts(col, is_a, matrix.speakers[rows], n_bins)
    return float(correct[0] / total)


def rank_features(matrix: FeatureMatrix, pair: PairTask, n_bins: int = N_BINS) -> list[tuple[int, float]]:
    """All columns as ``(index, accuracy)``, best first; ties keep ascending index."""
    rows, is_a = _pair_rows(matrix, pair)
    if not is_a.any() or is_a.all():
        raise DegenerateInputError(f"matrix lacks rows for one state of {pair.name}", code="missing_state")
    correct, total = loso_correct_counts(matrix.values[rows], is_a, matrix.speakers[rows], n_bins)
    acc = correct / total
    order = sorted(range(acc.size), key=lambda i: (-acc[i], i))
    return [(i, float(acc[i])) for i in order]
