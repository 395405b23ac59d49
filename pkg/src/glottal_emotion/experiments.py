"""Comparative experiments: performance-driven hierarchy, cascade evaluation and the pairwise matrix."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Mapping, Sequence

import numpy as np

from .emotions import STATES, EmotionState, all_pairs, label_states
from .errors import ParameterError
from .evaluation import ConfusionMatrix, LosoResult, NodeTrainer, loso_evaluate, speaker_folds, svm_node_trainer
from .features import FeatureMatrix
from .svm import SvmConfig

CRITERIA = ("speech", "glottal", "mean")


def _sorted_states(states) -> tuple[EmotionState, ...]:
    return tuple(sorted((EmotionState.parse(s) for s in states), key=lambda s: s.index))


@dataclass(frozen=True)
class Split:
    left: tuple[EmotionState, ...]
    right: tuple[EmotionState, ...]

    def __post_init__(self):
        object.__setattr__(self, "left", _sorted_states(self.left))
        object.__setattr__(self, "right", _sorted_states(self.right))
        if not self.left or not self.right or set(self.left) & set(self.right):
            raise ParameterError("a split needs two non-empty, disjoint sides")

    @property
    def states(self) -> tuple[EmotionState, ...]:
        return _sorted_states(self.left + self.right)

    def grouping(self) -> dict[EmotionState, str]:
        g = {s: "L" for s in self.left}
        g.update({s: "R" for s in self.right})
        return g

    def side(self, state: EmotionState) -> str:
        return "L" if state in self.left else "R"

    @property
    def name(self) -> str:
        return f"{label_states(self.left)} | {label_states(self.right)}"

    def key(self) -> tuple[frozenset, frozenset]:
        return frozenset(self.left), frozenset(self.right)


def enumerate_top_splits(states: Sequence = STATES) -> list[Split]:
    """All 3-vs-4 partitions of the seven states, in lexicographic order of the left side."""
    st = _sorted_states(states)
    if len(st) != 7 or len(set(st)) != 7:
        raise ParameterError(f"top-level splits need exactly 7 distinct states, got {len(set(st))}")
    return [Split(left, tuple(s for s in st if s not in left)) for left in combinations(st, 3)]


def enumerate_subsplits(branch: Sequence) -> list[Split]:
    """The three ways to divide a 3-state branch (1 vs 2) or a 4-state branch (2 vs 2)."""
    st = _sorted_states(branch)
    if len(set(st)) != len(st) or len(st) not in (3, 4):
        raise ParameterError(f"sub-splits need a branch of 3 or 4 distinct states, got {len(st)}")
    if len(st) == 3:
        return [Split((s,), tuple(o for o in st if o != s)) for s in st]
    first, rest = st[0], st[1:]
    return [Split((first, p), tuple(o for o in rest if o != p)) for p in rest]


# ----------------------------------------------------------------- evaluation hooks

# An evaluator scores a split on one source; it may return a LosoResult to
# keep the confusion matrix, or a bare accuracy.
SplitEvaluator = Callable[[Split, str], "LosoResult | float"]


class LosoSplitEvaluator:
    """Scores splits by leave-one-speaker-out SVM accuracy on each source's matrix."""

    def __init__(self, matrices: Mapping[str, FeatureMatrix], cfg: SvmConfig | None = None,
                 trainer: NodeTrainer | None = None):
        self.matrices = dict(matrices)
        self.cfg = cfg or SvmConfig()
        self.trainer = trainer
        self._cache: dict = {}

    def __call__(self, split: Split, source: str) -> LosoResult:
        key = (split.key(), source)
        if key not in self._cache:
            self._cache[key] = loso_evaluate(self.matrices[source], split.grouping(), self.cfg, self.trainer)
        return self._cache[key]


class TableEvaluator:
    """Evaluator replaying fixed accuracies; unknown splits get a per-source default."""

    def __init__(self, table: Mapping, default: Mapping[str, float] | None = None):
        self.table = {}
        for (split, source), acc in table.items():
            self.table[(split.key(), source)] = float(acc)
        self.default = dict(default or {})

    def __call__(self, split: Split, source: str) -> float:
        key = (split.key(), source)
        if key in self.table:
            return self.table[key]
        if source in self.default:
            return self.default[source]
        raise KeyError(f"no accuracy for {split.name} on {source}")


@dataclass
class Candidate:
    split: Split
    accuracy_speech: float
    accuracy_glottal: float
    confusion_speech: ConfusionMatrix | None = None
    confusion_glottal: ConfusionMatrix | None = None

    @property
    def difference(self) -> float:
        return self.accuracy_speech - self.accuracy_glottal

    def score(self, criterion: str) -> float:
        if criterion == "speech":
            return self.accuracy_speech
        if criterion == "glottal":
            return self.accuracy_glottal
        return 0.5 * (self.accuracy_speech + self.accuracy_glottal)


def _score(evaluator: SplitEvaluator, split: Split) -> Candidate:
    out = {}
    for source in ("speech", "glottal"):
        r = evaluator(split, source)
        out[source] = (r.accuracy, r.confusion) if isinstance(r, LosoResult) else (float(r), None)
    return Candidate(split, out["speech"][0], out["glottal"][0], out["speech"][1], out["glottal"][1])


def select(candidates: list[Candidate], criterion: str) -> Candidate:
    """Highest score; exact ties keep the earliest candidate."""
    best = candidates[0]
    for c in candidates[1:]:
        if c.score(criterion) > best.score(criterion):
            best = c
    return best


# ----------------------------------------------------------------- hierarchy

@dataclass
class TreeNode:
    states: tuple[EmotionState, ...]
    chosen: Candidate | None = None
    candidates: list = field(default_factory=list)
    children: tuple = ()

    @property
    def is_leaf(self) -> bool:
        return len(self.states) == 1

    @property
    def split(self) -> Split | None:
        return self.chosen.split if self.chosen else None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf": self.states[0].short}
        c = self.chosen
        return {
            "states": [s.short for s in self.states],
            "left": [s.short for s in c.split.left],
            "right": [s.short for s in c.split.right],
            "accuracy_speech": c.accuracy_speech,
            "accuracy_glottal": c.accuracy_glottal,
            "candidates": [
                {"left": [s.short for s in k.split.left], "right": [s.short for s in k.split.right],
                 "accuracy_speech": k.accuracy_speech, "accuracy_glottal": k.accuracy_glottal}
                for k in self.candidates
            ],
            "children": [ch.to_dict() for ch in self.children],
        }


@dataclass
class HierarchyTree:
    root: TreeNode
    criterion: str = "speech"

    @property
    def top(self) -> Split:
        return self.root.split

    @property
    def second(self) -> tuple[Split, Split]:
        return tuple(ch.split for ch in self.root.children)

    def internal_nodes(self) -> list[TreeNode]:
        out, stack = [], [self.root]
        while stack:
            n = stack.pop(0)
            if not n.is_leaf:
                out.append(n)
                stack.extend(n.children)
        return out

    def bottom(self) -> list[Split]:
        """Pairwise classifiers at the bottom level, left to right."""
        return [n.split for n in self.internal_nodes() if len(n.states) == 2]

    def leaves(self) -> list[EmotionState]:
        out = []

        def walk(n):
            if n.is_leaf:
                out.append(n.states[0])
            for ch in n.children:
                walk(ch)

        walk(self.root)
        return out

    def depth(self, state: EmotionState) -> int:
        n, d = self.root, 0
        while not n.is_leaf:
            n = n.children[0] if state in n.split.left else n.children[1]
            d += 1
        return d

    def to_dict(self) -> dict:
        return {"criterion": self.criterion, "root": self.root.to_dict()}


@dataclass(frozen=True)
class HierarchyConfig:
    criterion: str = "speech"
    svm: SvmConfig = field(default_factory=SvmConfig)

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ParameterError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")


def _grow(states: tuple, evaluator: SplitEvaluator, criterion: str) -> TreeNode:
    if len(states) == 1:
        return TreeNode(states)
    if len(states) == 7:
        splits = enumerate_top_splits(states)
    elif len(states) in (3, 4):
        splits = enumerate_subsplits(states)
    else:
        splits = [Split(states[:1], states[1:])]
    cands = [_score(evaluator, s) for s in splits]
    best = select(cands, criterion)
    kids = (_grow(best.split.left, evaluator, criterion), _grow(best.split.right, evaluator, criterion))
    return TreeNode(states, best, cands, kids)


def build_hierarchy(matrix_speech: FeatureMatrix | None, matrix_glottal: FeatureMatrix | None,
                    cfg: HierarchyConfig | None = None, evaluator: SplitEvaluator | None = None) -> HierarchyTree:
    """Grow the 3/4 top split, then 3-way sub-splits, then pairwise leaves.

    Every candidate is scored on both sources; the configured criterion
    picks the winner at each node. ``evaluator`` replaces the default
    leave-one-speaker-out SVM scoring.
    """
    cfg = cfg or HierarchyConfig()
    if evaluator is None:
        if matrix_speech is None or matrix_glottal is None:
            raise ParameterError("build_hierarchy needs both matrices or an evaluator")
        if list(matrix_speech.meta["utterance_id"]) != list(matrix_glottal.meta["utterance_id"]):
            raise ParameterError("speech and glottal matrices must hold the same utterances in the same order")
        evaluator = LosoSplitEvaluator({"speech": matrix_speech, "glottal": matrix_glottal}, cfg.svm)
    return HierarchyTree(_grow(STATES, evaluator, cfg.criterion), cfg.criterion)


@dataclass
class CascadeResult:
    accuracy: float
    confusion: ConfusionMatrix
    predictions: list  # (row index, truth, prediction)


def cascade_evaluate(tree: HierarchyTree, matrix: FeatureMatrix, cfg: SvmConfig | None = None,
                     trainer: NodeTrainer | None = None) -> CascadeResult:
    """Seven-class accuracy of routing each held-out utterance through the tree.

    For every speaker fold, each internal node gets its own classifier
    trained on the remaining speakers' rows of that node's states.
    """
    trainer = trainer or svm_node_trainer(cfg)
    states = np.array([EmotionState.parse(s) for s in matrix.states], dtype=object)
    spk = np.asarray(matrix.speakers)
    x = matrix.values
    labels = tuple(STATES)
    truth, pred, record = [], [], []
    nodes = tree.internal_nodes()
    for sp in speaker_folds(spk.tolist()):
        test = np.flatnonzero(spk == sp)
        train = spk != sp
        models = {}
        for node in nodes:
            member = np.array([st in node.states for st in states], dtype=bool)
            rows = np.flatnonzero(train & member)
            models[id(node)] = trainer(x[rows], [node.split.side(s) for s in states[rows]])
        # route all test rows level by level
        current = {int(r): tree.root for r in test}
        while any(not n.is_leaf for n in current.values()):
            by_node: dict = {}
            for r, n in current.items():
                if not n.is_leaf:
                    by_node.setdefault(id(n), (n, []))[1].append(r)
            for n, rows in by_node.values():
                sides = models[id(n)](x[rows])
                for r, sd in zip(rows, sides):
                    current[r] = n.children[0] if sd == "L" else n.children[1]
        for r in test:
            p = current[int(r)].states[0]
            truth.append(states[r])
            pred.append(p)
            record.append((int(r), states[r], p))
    cm = ConfusionMatrix.from_predictions(labels, truth, pred)
    record.sort(key=lambda t: t[0])
    return CascadeResult(cm.accuracy, cm, record)


# ----------------------------------------------------------------- pairwise matrix

@dataclass(frozen=True)
class PairRow:
    state_a: EmotionState
    state_b: EmotionState
    accuracy_speech: float
    accuracy_glottal: float

    @property
    def difference(self) -> float:
        return self.accuracy_speech - self.accuracy_glottal

    @property
    def name(self) -> str:
        return f"{self.state_a.short} vs {self.state_b.short}"


@dataclass
class PairwiseReport:
    rows: list

    def __post_init__(self):
        if len(self.rows) != 21:
            raise ParameterError(f"a pairwise report has 21 rows, got {len(self.rows)}")

    def row(self, a, b) -> PairRow:
        a, b = EmotionState.parse(a), EmotionState.parse(b)
        for r in self.rows:
            if {r.state_a, r.state_b} == {a, b}:
                return r
        raise KeyError(f"no row for {a.short} vs {b.short}")

    @property
    def differences(self) -> np.ndarray:
        return np.array([r.difference for r in self.rows])

    def summary(self) -> dict:
        d = self.differences
        i_max, i_min = int(np.argmax(d)), int(np.argmin(d))
        ranking = sorted(range(len(self.rows)), key=lambda i: (-self.rows[i].accuracy_glottal, i))
        return {
            "mean_difference": float(d.mean()),
            "max_difference": (self.rows[i_max].name, float(d[i_max])),
            "min_difference": (self.rows[i_min].name, float(d[i_min])),
            "mean_accuracy_speech": float(np.mean([r.accuracy_speech for r in self.rows])),
            "mean_accuracy_glottal": float(np.mean([r.accuracy_glottal for r in self.rows])),
            "ranking_glottal": [self.rows[i].name for i in ranking],
        }


def pairwise_matrix(matrix_speech: FeatureMatrix | None, matrix_glottal: FeatureMatrix | None,
                    cfg: SvmConfig | None = None, evaluator: SplitEvaluator | None = None) -> PairwiseReport:
    """Leave-one-speaker-out accuracy on every state pair for both sources."""
    if evaluator is None:
        evaluator = LosoSplitEvaluator({"speech": matrix_speech, "glottal": matrix_glottal}, cfg)
    rows = []
    for a, b in all_pairs():
        c = _score(evaluator, Split((a,), (b,)))
        rows.append(PairRow(a, b, c.accuracy_speech, c.accuracy_glottal))
    return PairwiseReport(rows)


@dataclass
class SourceComparison:
    by_arousal_gap: dict  # gap -> {"mean_difference", "pairs"}
    by_valence_gap: dict
    max_pair: tuple
    min_pair: tuple
    mean_difference: float


def _group(rows, key) -> dict:
    groups: dict = {}
    for r in rows:
        groups.setdefault(key(r), []).append(r)
    return {
        gap: {"mean_difference": float(np.mean([r.difference for r in rs])), "pairs": [r.name for r in rs]}
        for gap, rs in sorted(groups.items())
    }


def compare_sources(report: PairwiseReport) -> SourceComparison:
    """Speech-minus-glottal differences grouped by rank distance on each affect axis."""
    rows = report.rows
    s = report.summary()
    return SourceComparison(
        _group(rows, lambda r: abs(r.state_a.arousal_rank - r.state_b.arousal_rank)),
        _group(rows, lambda r: abs(r.state_a.valence_rank - r.state_b.valence_rank)),
        s["max_difference"],
        s["min_difference"],
        s["mean_difference"],
    )
