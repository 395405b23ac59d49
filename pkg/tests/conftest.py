import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from glottal_emotion.dsp import LpcModel, reflection_to_poly

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_stable_model(rng: np.random.Generator, order: int, kmax: float = 0.95) -> LpcModel:
    """Stable all-pole model drawn through its reflection coefficients."""
    return LpcModel(reflection_to_poly(rng.uniform(-kmax, kmax, order)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def mini_corpus(tmp_path_factory):
    """Two speakers, one 0.5 s utterance per state."""
    from glottal_emotion.corpus import CorpusConfig, generate_corpus

    out = tmp_path_factory.mktemp("mini_corpus")
    return generate_corpus(CorpusConfig(n_speakers=2, n_per_state=1, duration_s=0.5, seed=3, out_dir=str(out)))


_CRITERIA: dict = {}


class _Criterion:
    def __init__(self, number: int, title: str):
        self.number, self.title, self.details = number, title, []

    def note(self, text: str) -> None:
        self.details.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        detail = "; ".join(self.details)
        if exc_type is not None and not self.details:
            detail = str(exc).splitlines()[0] if str(exc) else exc_type.__name__
        line = f"[{status}] criterion {self.number:2d}: {self.title}" + (f" ({detail})" if detail else "")
        _CRITERIA[self.number] = line
        print(line)
        return False


@pytest.fixture
def criterion():
    """``with criterion(n, title) as c:`` records one pass/fail line for the summary."""
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
