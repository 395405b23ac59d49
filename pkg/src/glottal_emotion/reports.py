"""Plain-text report emission: CSV tables, tree JSON and a markdown summary."""

from __future__ import annotations

import csv
import io
import json

from .emotions import EmotionState
from .evaluation import ConfusionMatrix
from .experiments import HierarchyTree, PairRow, PairwiseReport, SourceComparison, TreeNode


def _fmt(v: float) -> str:
    return repr(float(v))


def pairwise_csv(report: PairwiseReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pair", "accuracy_speech", "accuracy_glottal", "difference"])
    for r in report.rows:
        w.writerow([r.name, _fmt(r.accuracy_speech), _fmt(r.accuracy_glottal), _fmt(r.difference)])
    return buf.getvalue()


def candidates_csv(node: TreeNode) -> str:
    """Every candidate split of one node with both accuracies."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["left", "right", "accuracy_speech", "accuracy_glottal", "difference", "selected"])
    for c in node.candidates:
        w.writerow([" ".join(s.short for s in c.split.left), " ".join(s.short for s in c.split.right),
                    _fmt(c.accuracy_speech), _fmt(c.accuracy_glottal), _fmt(c.difference),
                    int(c.split == node.split)])
    return buf.getvalue()


def hierarchy_levels_csv(tree: HierarchyTree) -> str:
    """Candidates of all internal nodes, tagged by level (top, second, bottom)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "branch", "left", "right", "accuracy_speech", "accuracy_glottal", "difference",
                "selected"])
    for node in tree.internal_nodes():
        level = {7: "top", 3: "second", 4: "second", 2: "bottom"}.get(len(node.states), "other")
        branch = " ".join(s.short for s in node.states)
        for c in node.candidates:
            w.writerow([level, branch, " ".join(s.short for s in c.split.left),
                        " ".join(s.short for s in c.split.right), _fmt(c.accuracy_speech),
                        _fmt(c.accuracy_glottal), _fmt(c.difference), int(c.split == node.split)])
    return buf.getvalue()


def tree_json(tree: HierarchyTree, seed: int | None = None) -> str:
    d = tree.to_dict()
    d["seed"] = seed
    return json.dumps(d, indent=2, sort_keys=True) + "\n"


def confusion_csv(cm: ConfusionMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = [getattr(lab, "short", str(lab)) for lab in cm.labels]
    w.writerow(["true\\predicted", *names])
    for name, row in zip(names, cm.counts):
        w.writerow([name, *(int(v) for v in row)])
    return buf.getvalue()


def comparison_json(cmp: SourceComparison, seed: int | None = None) -> str:
    d = {
        "seed": seed,
        "mean_difference": cmp.mean_difference,
        "max_pair": list(cmp.max_pair),
        "min_pair": list(cmp.min_pair),
        "by_arousal_gap": {str(k): v for k, v in cmp.by_arousal_gap.items()},
        "by_valence_gap": {str(k): v for k, v in cmp.by_valence_gap.items()},
    }
    return json.dumps(d, indent=2, sort_keys=True) + "\n"


def _pct(v: float) -> str:
    return f"{100 * v:.2f}"


def markdown_summary(report: PairwiseReport | None = None, cmp: SourceComparison | None = None,
                     tree: HierarchyTree | None = None, cascade: dict | None = None,
                     seed: int | None = None) -> str:
    """Human-readable summary; accuracies in percent."""
    out = ["# Speech vs glottal source comparison", "", f"Seed: {seed}", ""]
    if tree is not None:
        out += ["## Hierarchy", "", f"Selection criterion: {tree.criterion}", "",
                "| level | left | right | speech | glottal | difference |", "|---|---|---|---|---|---|"]
        for node in tree.internal_nodes():
            level = {7: "top", 3: "second", 4: "second", 2: "bottom"}.get(len(node.states), "other")
            c = node.chosen
            out.append(f"| {level} | {', '.join(s.short for s in c.split.left)} | "
                       f"{', '.join(s.short for s in c.split.right)} | {_pct(c.accuracy_speech)} | "
                       f"{_pct(c.accuracy_glottal)} | {_pct(c.difference)} |")
        out.append("")
    if cascade:
        out += ["## Seven-class cascade", ""]
        for source, res in cascade.items():
            out.append(f"- {source}: {_pct(res.accuracy)} %")
        out.append("")
    if report is not None:
        out += ["## Pairwise accuracies", "", "| pair | speech | glottal | difference |", "|---|---|---|---|"]
        for r in report.rows:
            out.append(f"| {r.name} | {_pct(r.accuracy_speech)} | {_pct(r.accuracy_glottal)} | {_pct(r.difference)} |")
        s = report.summary()
        out += ["", f"Mean difference: {_pct(s['mean_difference'])} pp", ""]
    if cmp is not None:
        out += ["## Differences by affect distance", "",
                f"Largest difference: {cmp.max_pair[0]} ({_pct(cmp.max_pair[1])} pp)",
                f"Smallest difference: {cmp.min_pair[0]} ({_pct(cmp.min_pair[1])} pp)", "",
                "| axis | rank gap | pairs | mean difference |", "|---|---|---|---|"]
        for axis, groups in (("arousal", cmp.by_arousal_gap), ("valence", cmp.by_valence_gap)):
            for gap, g in groups.items():
                out.append(f"| {axis} | {gap} | {len(g['pairs'])} | {_pct(g['mean_difference'])} |")
        out.append("")
    return "\n".join(out)


def pairwise_from_csv(text: str) -> PairwiseReport:
    """Inverse of :func:`pairwise_csv`."""
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        a, b = rec["pair"].split(" vs ")
        rows.append(PairRow(EmotionState.parse(a), EmotionState.parse(b),
                            float(rec["accuracy_speech"]), float(rec["accuracy_glottal"])))
    return PairwiseReport(rows)

