import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from xlingeval.corpusio import tokenize
from xlingeval.mining import char_overlap, levenshtein
from xlingeval.scorer import z_normalize
from xlingeval.transport import wcd, wmd

words = st.text(alphabet="abcdefgh", min_size=1, max_size=6)
short_text = st.text(alphabet="abc xy.,!", min_size=0, max_size=30)


@given(short_text)
def test_tokenize_is_idempotent(text):
    tokens = tokenize(text).tokens
    assert tokenize(" ".join(tokens)).tokens == tokens


@given(words, words)
def test_levenshtein_is_a_metric(a, b):
    assert levenshtein(a, b) == levenshtein(b, a)
    assert levenshtein(a, a) == 0
    assert (levenshtein(a, b) == 0) == (a == b)
    assert levenshtein(a, b) <= max(len(a), len(b))


@given(words, words)
def test_char_overlap_bounded(a, b):
    assert 0.0 <= char_overlap(a, b) <= 1.0


vectors = st.integers(min_value=0, max_value=2 ** 32 - 1).map(
    lambda seed: np.random.default_rng(seed))


@settings(max_examples=30, deadline=None)
@given(vectors)
def test_wmd_metric_properties(rng):
    n, m = int(rng.integers(1, 6)), int(rng.integers(1, 6))
    X = rng.normal(size=(n, 4))
    Y = rng.normal(size=(m, 4))
    d_xy, _ = wmd(X, Y)
    d_yx, _ = wmd(Y, X)
    assert d_xy >= 0
    assert abs(d_xy - d_yx) <= 1e-9
    assert wcd(X, Y) <= d_xy + 1e-9
    d_xx, _ = wmd(X, X)
    assert abs(d_xx) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(vectors)
def test_z_normalize_moments(rng):
    scores = rng.normal(size=int(rng.integers(2, 40)))
    if scores.std() == 0:
        return
    z = z_normalize(scores)
    assert abs(z.mean()) <= 1e-9
    assert abs(z.std() - 1.0) <= 1e-9
