import numpy as np
import pytest

from drugwatch.annotate import AnnotatorConfig
from drugwatch.corpus import LabeledPost, Post
from drugwatch.labels import default_vocabulary
from drugwatch.lexicon import seed_lexicon


@pytest.fixture(scope="session")
def vocab():
    return default_vocabulary()


@pytest.fixture(scope="session")
def lexicon():
    return seed_lexicon()


@pytest.fixture
def annotator_config():
    return AnnotatorConfig(endpoint="mock://local", model="suggest-small",
                           backoff_base=0.0)


@pytest.fixture
def tiny_labeled(vocab):
    rows = [
        ("p1", "took some smack and passed out cold", "Heroin",
         ("fainting",), ()),
        ("p2", "a few beers then shots, room spinning, threw up", "Alcohol",
         ("dizziness", "nausea"), ()),
        ("p3", "molly hit hard, heart racing and sweating buckets", "Ecstasy",
         ("tachycardia", "sweating"), ()),
        ("p4", "blow all night, heart pounding, totally paranoid", "Cocaine",
         ("tachycardia", "paranoia"), ()),
        ("p5", "k hole again, everything feels unreal", "Ketamine",
         ("dissociation",), ()),
        ("p6", "acid trip went dark, seeing things", "LSD",
         ("hallucinations",), ()),
        ("p7", "china white is no joke, could not breathe", "Fentanyl",
         ("respiratory depression",), ()),
        ("p8", "tweaking for days, shaking and wired", "Methamphetamine",
         ("tremors", "restlessness"), ()),
    ]
    return [
        LabeledPost(post=Post(id=i, text=t, source="test"), drug=d,
                    symptoms=s, flags=f)
        for i, t, d, s, f in rows
    ]


def random_features(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    X = rng.random((n, d))
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    return X / np.where(norms == 0, 1.0, norms)
