import json
import shutil

import numpy as np
import pytest

from glottal_emotion.corpus import CorpusManifest, read_wav
from glottal_emotion.features import FEATURE_NAMES, FeatureMatrix
from glottal_emotion.iaif import IaifConfig
from glottal_emotion.pipeline import (
    PipelineConfig, glottal_waveform, iaif_voicing, load_matrices, process_utterance, run_pipeline,
)


@pytest.fixture(scope="module")
def extracted(mini_corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("features")
    return run_pipeline(mini_corpus, PipelineConfig(), out, seed=3), out


class TestRun:
    def test_matrices(self, extracted):
        res, _ = extracted
        assert len(res.speech) == len(res.glottal) == 14
        assert res.speech.layout == res.glottal.layout == FEATURE_NAMES
        assert res.speech.meta["utterance_id"] == res.glottal.meta["utterance_id"]
        assert set(res.glottal.meta["source"]) == {"glottal"}
        assert np.all(np.isfinite(res.speech.values)) and np.all(np.isfinite(res.glottal.values))
        assert not res.failures

    def test_sources_differ(self, extracted):
        res, _ = extracted
        assert not np.allclose(res.speech.values, res.glottal.values)

    def test_rerun_byte_identical(self, extracted, mini_corpus, tmp_path):
        _, out = extracted
        run_pipeline(mini_corpus, PipelineConfig(), tmp_path, seed=3)
        for name in ("features_speech.csv", "features_glottal.csv", "provenance.json"):
            assert (tmp_path / name).read_bytes() == (out / name).read_bytes()

    def test_provenance(self, extracted):
        _, out = extracted
        prov = json.loads((out / "provenance.json").read_text())
        assert prov["seed"] == 3 and prov["n_entries"] == 14 and prov["n_failures"] == 0
        assert prov["config_sha256"] == PipelineConfig().digest()
        assert set(prov["outputs"]) == {"features_speech.csv", "features_glottal.csv"}

    def test_load_round_trip(self, extracted):
        res, out = extracted
        back = load_matrices(out)
        np.testing.assert_array_equal(back.glottal.values, res.glottal.values)
        assert back.speech.meta == res.speech.meta

    def test_corrupt_file(self, mini_corpus, tmp_path):
        root = tmp_path / "c"
        shutil.copytree(mini_corpus.root, root)
        m = CorpusManifest.load(root / "manifest.jsonl")
        m.resolve(m.entries[5]).write_bytes(b"garbage")
        res = run_pipeline(m, PipelineConfig(), tmp_path / "out")
        assert len(res.failures) == 1 and res.failures[0][0] == m.entries[5].utterance_id
        assert len(res.speech) == len(res.glottal) == 13
        prov = json.loads((tmp_path / "out" / "provenance.json").read_text())
        assert prov["n_failures"] == 1

    def test_bad_source(self, extracted):
        with pytest.raises(ValueError):
            extracted[0].matrix("both")


class TestSymmetry:
    def test_same_extractor_both_sources(self, mini_corpus):
        # the glottal vector is exactly the extractor applied to the prepared flow
        from glottal_emotion.features import extract_feature_vector
        from glottal_emotion.iaif import prep_for_features

        speech = read_wav(mini_corpus.resolve(mini_corpus.entries[0]))
        vec = process_utterance(speech)
        g, _ = glottal_waveform(speech)
        np.testing.assert_array_equal(vec["glottal"], extract_feature_vector(prep_for_features(g)))
        np.testing.assert_array_equal(vec["speech"], extract_feature_vector(speech))

    def test_voicing_mask_length(self, mini_corpus):
        from glottal_emotion.pitch import estimate_pitch

        speech = read_wav(mini_corpus.resolve(mini_corpus.entries[0]))
        cfg = IaifConfig()
        mask = iaif_voicing(estimate_pitch(speech), cfg, len(speech))
        assert mask.size == cfg.frame_spec(speech.sample_rate).n_frames(len(speech))
        assert mask.any() and not mask.all()  # leading and trailing silence

    def test_config_digest_changes(self):
        assert PipelineConfig().digest() != PipelineConfig(fmax=400.0).digest()
