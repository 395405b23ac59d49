"""Command-line entry point: ``glottal-emotion <command> [options]``.

Exit status is 0 on success, 1 when some input files failed, 2 on
configuration or usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .analysis import extract_cycles, markers_to_csv, spectral_markers
from .bayes import PairTask, rank_features
from .corpus import CorpusConfig, CorpusManifest, generate_corpus, read_wav
from .emotions import EmotionState
from .errors import ConfigError, GlottalEmotionError
from .experiments import HierarchyConfig, build_hierarchy, cascade_evaluate, compare_sources, pairwise_matrix
from .iaif import IaifConfig, prep_for_analysis
from .pipeline import PipelineConfig, glottal_waveform, load_matrices, run_pipeline
from . import reports
from .svm import SvmConfig

log = logging.getLogger("glottal_emotion")

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2


def _section(cls, data: dict, name: str):
    data = data or {}
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad [{name}] section: {exc}") from exc


def load_config(path: str | None) -> dict:
    """JSON config with optional sections corpus, iaif, pitch, svm, hierarchy."""
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    extra = set(data) - {"corpus", "iaif", "pitch", "svm", "hierarchy"}
    if extra:
        raise ConfigError(f"unknown config section(s): {', '.join(sorted(extra))}")
    return data


def _pipeline_cfg(conf: dict) -> PipelineConfig:
    pitch = dict(conf.get("pitch") or {})
    unknown = set(pitch) - {"fmin", "fmax", "voicing_threshold"}
    if unknown:
        raise ConfigError(f"unknown key(s) in [pitch]: {', '.join(sorted(unknown))}")
    return PipelineConfig(_section(IaifConfig, conf.get("iaif"), "iaif"), **pitch)


def _sources(arg: str) -> tuple[str, ...]:
    return ("speech", "glottal") if arg == "both" else (arg,)


def _out(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    log.info("wrote %s", path)


# ----------------------------------------------------------------- commands

def cmd_synth(args, conf) -> int:
    corpus = dict(conf.get("corpus") or {})
    for key in ("n_speakers", "n_per_state", "fs", "duration_s"):
        v = getattr(args, key)
        if v is not None:
            corpus[key] = v
    corpus["seed"] = args.seed
    corpus["out_dir"] = str(_out(args))
    cfg = _section(CorpusConfig, corpus, "corpus")
    m = generate_corpus(cfg)
    print(f"{len(m)} utterances written to {cfg.out_dir}")
    return EXIT_OK


def cmd_extract(args, conf) -> int:
    manifest = CorpusManifest.load(args.manifest)
    res = run_pipeline(manifest, _pipeline_cfg(conf), _out(args), args.seed)
    print(f"{len(res.speech)} of {len(manifest)} utterances extracted into {args.out}")
    for uid, msg in res.failures:
        print(f"failed: {uid}: {msg}", file=sys.stderr)
    return EXIT_PARTIAL if res.failures else EXIT_OK


def cmd_analyze(args, conf) -> int:
    cfg = _pipeline_cfg(conf)
    out = _out(args)
    paths = [Path(p) for p in args.wav]
    if args.manifest:
        m = CorpusManifest.load(args.manifest)
        paths += [m.resolve(e) for e in m]
    if not paths:
        raise ConfigError("analyze needs WAV paths or --manifest")
    markers, failed = [], 0
    for p in paths:
        try:
            speech = read_wav(p)
            g, track = glottal_waveform(speech, cfg)
            flow = prep_for_analysis(g)
            ov = extract_cycles(flow, track, args.cycles)
            _write(out / f"{p.stem}_cycles.csv", ov.to_csv())
            markers.append((p.stem, spectral_markers(flow, None, track)))
        except (GlottalEmotionError, ValueError, OSError) as exc:
            failed += 1
            print(f"failed: {p}: {exc}", file=sys.stderr)
    _write(out / "spectral_markers.csv", markers_to_csv(markers))
    return EXIT_PARTIAL if failed else EXIT_OK


def _parse_pair(text: str) -> tuple[EmotionState, EmotionState]:
    parts = [t for t in text.replace(" vs ", ",").split(",") if t.strip()]
    if len(parts) != 2:
        raise ConfigError(f"--pair needs two states such as 'M-J,I-A', got {text!r}")
    try:
        return EmotionState.parse(parts[0]), EmotionState.parse(parts[1])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_rank(args, conf) -> int:
    mats = load_matrices(args.features)
    a, b = _parse_pair(args.pair)
    out = _out(args)
    for source in _sources(args.source):
        m = mats.matrix(source)
        ranking = rank_features(m, PairTask(a, b, source))
        lines = ["rank,feature_index,feature,accuracy"]
        for r, (i, acc) in enumerate(ranking[: args.top or None], 1):
            lines.append(f"{r},{i},{m.layout[i]},{acc!r}")
        name = f"rank_{a.short}_{b.short}_{source}.csv".replace("-", "")
        _write(out / name, "\n".join(lines) + "\n")
        best = ranking[0]
        print(f"{source}: best single feature {m.layout[best[0]]} ({100 * best[1]:.2f} %)")
    return EXIT_OK


def cmd_pairwise(args, conf) -> int:
    mats = load_matrices(args.features)
    svm = _section(SvmConfig, conf.get("svm"), "svm")
    rep = pairwise_matrix(mats.speech, mats.glottal, svm)
    out = _out(args)
    _write(out / "pairwise.csv", reports.pairwise_csv(rep))
    cmp = compare_sources(rep)
    _write(out / "comparison.json", reports.comparison_json(cmp, args.seed))
    _write(out / "pairwise_summary.md", reports.markdown_summary(rep, cmp, seed=args.seed))
    print(f"mean speech - glottal difference: {100 * cmp.mean_difference:.2f} pp")
    return EXIT_OK


def cmd_hierarchy(args, conf) -> int:
    mats = load_matrices(args.features)
    svm = _section(SvmConfig, conf.get("svm"), "svm")
    hier = dict(conf.get("hierarchy") or {})
    hcfg = _section(HierarchyConfig, {**hier, "svm": svm}, "hierarchy")
    tree = build_hierarchy(mats.speech, mats.glottal, hcfg)
    out = _out(args)
    _write(out / "tree.json", reports.tree_json(tree, args.seed))
    _write(out / "hierarchy_levels.csv", reports.hierarchy_levels_csv(tree))
    cascade = {}
    for source in _sources(args.source):
        cascade[source] = cascade_evaluate(tree, mats.matrix(source), svm)
        _write(out / f"cascade_confusion_{source}.csv", reports.confusion_csv(cascade[source].confusion))
    _write(out / "hierarchy_summary.md", reports.markdown_summary(tree=tree, cascade=cascade, seed=args.seed))
    print(f"top split: {tree.top.name}")
    return EXIT_OK


def cmd_report(args, conf) -> int:
    try:
        text = Path(args.pairwise).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.pairwise}: {exc}") from exc
    rep = reports.pairwise_from_csv(text)
    cmp = compare_sources(rep)
    out = _out(args)
    _write(out / "comparison.json", reports.comparison_json(cmp, args.seed))
    _write(out / "summary.md", reports.markdown_summary(rep, cmp, seed=args.seed))
    print(f"largest difference {cmp.max_pair[0]}, smallest {cmp.min_pair[0]}")
    return EXIT_OK


# ----------------------------------------------------------------- parser

def _globals(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", default=d(None), help="JSON configuration file")
    parser.add_argument("--seed", type=int, default=d(0), help="master seed (recorded in every output)")
    parser.add_argument("--out", default=d("out"), help="output directory")
    parser.add_argument("--source", choices=("speech", "glottal", "both"), default=d("both"))
    parser.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="glottal-emotion",
                                description="Glottal inverse filtering and speech-vs-glottal emotion experiments.")
    _globals(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        _globals(sp, suppress=True)
        sp.set_defaults(func=func)
        return sp

    sp = add("synth", cmd_synth, "generate a synthetic emotional corpus")
    sp.add_argument("--n-speakers", dest="n_speakers", type=int)
    sp.add_argument("--n-per-state", dest="n_per_state", type=int)
    sp.add_argument("--fs", type=int)
    sp.add_argument("--duration", dest="duration_s", type=float)

    sp = add("extract", cmd_extract, "extract speech and glottal feature matrices")
    sp.add_argument("manifest", help="manifest.jsonl of the corpus")

    sp = add("analyze", cmd_analyze, "cycle overlays and harmonic markers of glottal flow")
    sp.add_argument("wav", nargs="*", help="WAV files")
    sp.add_argument("--manifest")
    sp.add_argument("--cycles", type=int, default=4)

    sp = add("rank", cmd_rank, "single-feature Bayes ranking for one pair")
    sp.add_argument("--features", required=True, help="directory written by extract")
    sp.add_argument("--pair", required=True, help="two states, e.g. 'M-J,I-A'")
    sp.add_argument("--top", type=int, default=0, help="keep only the best N rows (0 = all)")

    sp = add("pairwise", cmd_pairwise, "SVM accuracy on all 21 pairs for both sources")
    sp.add_argument("--features", required=True)

    sp = add("hierarchy", cmd_hierarchy, "grow and evaluate the hierarchical classifier")
    sp.add_argument("--features", required=True)

    sp = add("report", cmd_report, "group pairwise differences by affect distance")
    sp.add_argument("--pairwise", required=True, help="pairwise.csv from the pairwise command")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.seed < 0 or args.seed >= 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        conf = load_config(args.config)
        return args.func(args, conf)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GlottalEmotionError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
