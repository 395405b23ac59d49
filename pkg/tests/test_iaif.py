import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glottal_emotion.dsp import Waveform, leaky_integrate
from glottal_emotion.errors import DegenerateInputError, ParameterError
from glottal_emotion.iaif import (
    GlottalResult, IaifConfig, best_lag_correlation, iaif_frame, iaif_utterance,
    prep_for_analysis, prep_for_features,
)
from glottal_emotion.lf import constant_preset, lf_pulse_train, make_vocal_tract, synth_speech

FS = 16000
# open vowels (F1 >= 640 Hz); close vowels put F1 too near high F0 harmonics for LPC
OPEN_VOWELS = {
    "a": [(730, 80), (1090, 90), (2440, 120), (3400, 170)],
    "ae": [(660, 80), (1720, 100), (2410, 130), (3300, 180)],
    "uh": [(640, 80), (1190, 90), (2390, 120), (3300, 170)],
    "a3": [(750, 90), (1200, 100), (2600, 140)],
    "a5": [(700, 80), (1200, 90), (2500, 120), (3500, 150), (4500, 200)],
}


def vowel(f0, formants, dur=0.5, seed=0):
    train = lf_pulse_train(constant_preset(f0), dur, FS, seed)
    return train, synth_speech(train.derivative, make_vocal_tract(formants, FS))


class TestConfig:
    @pytest.mark.parametrize("alpha", [0.95, 1.0])
    def test_alpha_range(self, alpha):
        with pytest.raises(ParameterError):
            IaifConfig(alpha=alpha)

    def test_orders_positive(self):
        with pytest.raises(ParameterError):
            IaifConfig(g2=0)

    def test_default_orders(self):
        assert IaifConfig().tract_orders(16000) == (18, 18)
        assert IaifConfig(t1=10).tract_orders(8000) == (10, 10)


class TestFrame:
    def test_vowel_frame_matches_flow(self):
        train, s = vowel(120, OPEN_VOWELS["a"])
        st_, n = 3000, 512
        r = iaif_frame(s.samples[st_:st_ + n], FS, context=s.samples[st_ - 512:st_])
        corr, _ = best_lag_correlation(r.glottal_frame, train.flow.samples[st_:st_ + n], 40)
        assert corr >= 0.90

    def test_order_zero_tract_reduces_to_integration(self):
        train, _ = vowel(120, [])
        d = train.derivative.samples
        st_, n = 3000, 512
        r = iaif_frame(d[st_:st_ + n], FS, context=d[st_ - 512:st_])
        integ = leaky_integrate(train.derivative, 0.99).samples[st_:st_ + n]
        corr, _ = best_lag_correlation(r.glottal_frame, integ, 40)
        assert corr >= 0.99

    def test_hvt2_recovers_formants(self):
        formants = OPEN_VOWELS["a"]
        _, s = vowel(100, formants)
        r = iaif_frame(s.samples[3000:3512], FS, context=s.samples[2488:3000])
        poles = r.hvt2.poles()
        freqs = np.angle(poles[poles.imag > 0]) * FS / (2 * np.pi)
        for f, _ in formants:
            assert np.min(np.abs(freqs - f)) <= 50

    def test_zero_energy(self):
        with pytest.raises(DegenerateInputError):
            iaif_frame(np.zeros(512), FS)

    def test_stage_models_returned(self):
        _, s = vowel(150, OPEN_VOWELS["ae"])
        r = iaif_frame(s.samples[2000:2512], FS)
        assert r.hvt2.order == 18 and r.hg2.order == 4 and r.hvt1.order == 18
        assert r.glottal_frame.size == 512


class TestUtterance:
    def test_all_unvoiced(self):
        _, s = vowel(150, OPEN_VOWELS["a"])
        n = IaifConfig().frame_spec(FS).n_frames(len(s))
        g = iaif_utterance(s, voicing=np.zeros(n, bool))
        assert len(g.glottal) == len(s)
        assert not np.any(g.glottal.samples)

    def test_alternating_mask_zeros(self):
        _, s = vowel(150, OPEN_VOWELS["a"], dur=0.6)
        spec = IaifConfig().frame_spec(FS)
        n = spec.n_frames(len(s))
        mask = np.arange(n) % 4 < 2
        g = iaif_utterance(s, voicing=mask)
        covered = g.voiced_sample_mask()
        assert covered.any() and not covered.all()
        assert not np.any(g.glottal.samples[~covered])

    def test_mask_length_mismatch(self):
        _, s = vowel(150, OPEN_VOWELS["a"])
        with pytest.raises(ParameterError):
            iaif_utterance(s, voicing=[True, False])

    def test_silent_frames_demoted(self):
        _, s = vowel(150, OPEN_VOWELS["a"])
        x = s.samples.copy()
        x[:2000] = 0.0
        g = iaif_utterance(Waveform(x, FS))
        assert not g.voicing_mask[0]
        assert g.voicing_mask[-1]

    def test_deterministic(self):
        _, s = vowel(180, OPEN_VOWELS["uh"])
        a, b = iaif_utterance(s), iaif_utterance(s)
        assert np.array_equal(a.glottal.samples, b.glottal.samples)

    @settings(max_examples=12)
    @given(st.floats(90, 300), st.sampled_from(sorted(OPEN_VOWELS)), st.floats(0.97, 1.03))
    def test_flow_recovery_property(self, f0, name, scale):
        formants = [(f * scale, bw) for f, bw in OPEN_VOWELS[name]]
        train, s = vowel(f0, formants, dur=0.4)
        g = iaif_utterance(s)
        corr, _ = best_lag_correlation(g.glottal.samples, train.flow.samples, 40)
        assert corr >= 0.90


def _result(values, voiced_frames):
    spec = IaifConfig().frame_spec(FS)
    return GlottalResult(Waveform(values, FS), np.asarray(voiced_frames, bool), [], spec)


class TestPrep:
    def test_analysis_span(self):
        rng = np.random.default_rng(0)
        v = rng.uniform(-2, 2, 1024)
        out = prep_for_analysis(_result(v, [True] * 3)).samples
        assert out.min() == 0.0 and out.max() == 1.0
        assert int(np.argmax(out)) == int(np.argmax(v))

    def test_analysis_constant(self):
        with pytest.raises(DegenerateInputError):
            prep_for_analysis(_result(np.full(1024, 0.3), [True] * 3))

    def test_all_unvoiced(self):
        with pytest.raises(DegenerateInputError):
            prep_for_features(_result(np.zeros(1024), [False] * 3))

    def test_features_centering(self):
        v = 0.5 + np.sin(np.arange(1024) / 7.0)
        out = prep_for_features(_result(v, [True] * 3)).samples
        assert abs(out.mean()) < 1e-12

    def test_features_idempotent_on_centred(self):
        v = np.sin(2 * np.pi * np.arange(1024) / 64)
        out = prep_for_features(_result(v - v.mean(), [True] * 3)).samples
        np.testing.assert_allclose(out, v - v.mean(), atol=1e-15)

    def test_features_mixed_mask(self):
        v = np.zeros(2048)
        v[:1024] = 1.0 + np.sin(np.arange(1024) / 5.0)
        g = _result(v, [True, True, True, False, False, False, False])
        sel = g.voiced_sample_mask()
        out = prep_for_features(g).samples
        assert not np.any(out[~sel])
        assert abs(out[sel].mean()) < 1e-12


class TestBestLag:
    def test_recovers_shift(self):
        rng = np.random.default_rng(1)
        ref = np.convolve(rng.standard_normal(600), np.ones(8), "same")
        est = np.roll(ref, 5)
        corr, lag = best_lag_correlation(est, ref, 10)
        assert lag == 5 and corr > 0.99
