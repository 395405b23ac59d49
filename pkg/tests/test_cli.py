import json
import shutil
import subprocess
import sys

import pytest

from glottal_emotion.cli import EXIT_CONFIG, EXIT_OK, EXIT_PARTIAL, build_parser, main

import reference_values as ref
from replay import replay_pairwise
from glottal_emotion import reports


@pytest.fixture(scope="module")
def features(mini_corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_features")
    code = main(["extract", str(mini_corpus.root / "manifest.jsonl"), "--out", str(out), "--seed", "3"])
    assert code == EXIT_OK
    return out


class TestCommands:
    def test_synth(self, tmp_path):
        code = main(["--seed", "5", "synth", "--n-speakers", "1", "--n-per-state", "1", "--duration", "0.3",
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        assert len((tmp_path / "manifest.jsonl").read_text().splitlines()) == 7

    def test_extract_outputs(self, features):
        for name in ("features_speech.csv", "features_glottal.csv", "provenance.json"):
            assert (features / name).exists()
        assert json.loads((features / "provenance.json").read_text())["seed"] == 3

    def test_extract_partial_failure(self, mini_corpus, tmp_path):
        root = tmp_path / "c"
        shutil.copytree(mini_corpus.root, root)
        next((root / "wav").iterdir()).write_bytes(b"junk")
        assert main(["extract", str(root / "manifest.jsonl"), "--out", str(tmp_path / "o")]) == EXIT_PARTIAL

    def test_rank(self, features, tmp_path):
        code = main(["rank", "--features", str(features), "--pair", "N,I-A", "--top", "5", "--out", str(tmp_path),
                     "--source", "glottal"])
        assert code == EXIT_OK
        lines = (tmp_path / "rank_N_IA_glottal.csv").read_text().splitlines()
        assert lines[0] == "rank,feature_index,feature,accuracy" and len(lines) == 6

    def test_pairwise_and_report(self, features, tmp_path):
        assert main(["pairwise", "--features", str(features), "--out", str(tmp_path), "--seed", "3"]) == EXIT_OK
        rows = (tmp_path / "pairwise.csv").read_text().splitlines()
        assert rows[0] == "pair,accuracy_speech,accuracy_glottal,difference" and len(rows) == 22
        out2 = tmp_path / "r"
        assert main(["report", "--pairwise", str(tmp_path / "pairwise.csv"), "--out", str(out2)]) == EXIT_OK
        assert (out2 / "summary.md").exists()

    def test_report_on_replayed_values(self, tmp_path):
        p = tmp_path / "p.csv"
        p.write_text(reports.pairwise_csv(replay_pairwise()))
        assert main(["report", "--pairwise", str(p), "--out", str(tmp_path)]) == EXIT_OK
        cmp = json.loads((tmp_path / "comparison.json").read_text())
        assert cmp["max_pair"][0] == ref.EXPECTED_MAX_DIFFERENCE[0]
        assert cmp["min_pair"][0] == ref.EXPECTED_MIN_DIFFERENCE[0]

    def test_hierarchy(self, features, tmp_path):
        assert main(["hierarchy", "--features", str(features), "--out", str(tmp_path), "--source", "glottal"]) == 0
        tree = json.loads((tmp_path / "tree.json").read_text())
        assert tree["criterion"] == "speech" and len(tree["root"]["candidates"]) == 35
        assert (tmp_path / "cascade_confusion_glottal.csv").exists()

    def test_analyze(self, mini_corpus, tmp_path):
        wav = str(mini_corpus.resolve(mini_corpus.entries[0]))
        assert main(["analyze", wav, "--out", str(tmp_path)]) == EXIT_OK
        assert len((tmp_path / "spectral_markers.csv").read_text().splitlines()) == 2


class TestErrors:
    def test_bad_config_file(self, tmp_path, features):
        bad = tmp_path / "c.json"
        bad.write_text("{not json")
        assert main(["--config", str(bad), "pairwise", "--features", str(features), "--out", str(tmp_path)]) == 2

    def test_unknown_section(self, tmp_path, features):
        c = tmp_path / "c.json"
        c.write_text(json.dumps({"classifier": {}}))
        assert main(["pairwise", "--config", str(c), "--features", str(features), "--out", str(tmp_path)]) == 2

    def test_bad_svm_value(self, tmp_path, features):
        c = tmp_path / "c.json"
        c.write_text(json.dumps({"svm": {"c": -1}}))
        assert main(["pairwise", "--config", str(c), "--features", str(features), "--out", str(tmp_path)]) == 2

    def test_missing_manifest(self, tmp_path):
        assert main(["extract", str(tmp_path / "none.jsonl"), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_bad_pair(self, features, tmp_path):
        assert main(["rank", "--features", str(features), "--pair", "N", "--out", str(tmp_path)]) == 2

    def test_negative_seed(self, tmp_path):
        assert main(["--seed", "-1", "synth", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_usage_error(self):
        with pytest.raises(SystemExit) as e:
            build_parser().parse_args(["nonsense"])
        assert e.value.code == 2

    def test_console_entry(self):
        r = subprocess.run([sys.executable, "-m", "glottal_emotion.cli", "--help"], capture_output=True, text=True)
        assert r.returncode == 0 and "pairwise" in r.stdout
