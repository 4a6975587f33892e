import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from onehotcnn.baselines import (BowScheme, bow_vectorize, linear_train, nb_lm_train, nb_weights,
                                 presence_matrix, vectorize)
from onehotcnn.text import Vocabulary, build_ngram_vocabulary

AB = Vocabulary(("a", "b"))


def test_bow_vectorize_examples():
    v = bow_vectorize(["a", "a", "b"], BowScheme("log_count_unit", AB))
    want = np.array([math.log(3), math.log(2)])
    assert_allclose(v.to_dense(), want / np.linalg.norm(want))
    assert bow_vectorize(["a"], BowScheme("binary_unit", AB)).to_dense().tolist() == [1.0, 0.0]
    for kind in ("log_count_unit", "binary_unit"):
        assert len(bow_vectorize([], BowScheme(kind, AB))) == 0
    assert len(bow_vectorize(["zzz"], BowScheme("binary_unit", AB))) == 0


def test_nb_binary_scheme():
    s = BowScheme("nb_binary", AB, (1,), np.array([0.5, -2.0]))
    assert bow_vectorize(["b", "b", "a"], s).to_dense().tolist() == [0.5, -2.0]
    with pytest.raises(ValueError):
        BowScheme("nb_binary", AB)


tokens = st.lists(st.sampled_from(["a", "b", "c", "d"]), min_size=1, max_size=12)
NG = build_ngram_vocabulary([["a", "b", "c", "d", "a", "c", "b", "d"]], (1, 2))


@given(tokens, st.sampled_from(["log_count_unit", "binary_unit"]), st.randoms())
def test_unit_norm_and_order_invariance(toks, kind, rnd):
    s = BowScheme(kind, NG, (1,))
    v = bow_vectorize(toks, s)
    assert np.linalg.norm(v.values) == pytest.approx(1.0)
    shuffled = list(toks)
    rnd.shuffle(shuffled)
    assert bow_vectorize(shuffled, s) == v


def test_nb_weights_examples():
    # feature 0 in both positive docs, in no negative doc; feature 1 everywhere
    X = sp.csr_matrix(np.array([[1, 1], [1, 1], [0, 1], [0, 1]]))
    y = [1, 1, 0, 0]
    w = nb_weights(X, y)
    assert w[0] == pytest.approx(math.log((3 / 4) / (1 / 4)))
    assert w[0] == pytest.approx(math.log(3))
    assert w[1] == 0.0
    assert_allclose(nb_weights(X, [1 - t for t in y]), -w)


def test_nb_weights_single_class_rejected():
    with pytest.raises(ValueError):
        nb_weights(sp.csr_matrix(np.ones((3, 2))), [1, 1, 1])


@given(st.lists(st.tuples(st.lists(st.booleans(), min_size=4, max_size=4), st.booleans()),
                min_size=2, max_size=12))
def test_nb_antisymmetry(rows):
    X = sp.csr_matrix(np.array([r for r, _ in rows], dtype=float))
    y = np.array([int(c) for _, c in rows])
    if len(set(y)) < 2:
        return
    assert np.array_equal(nb_weights(X, 1 - y), -nb_weights(X, y))


SEP_CORPUS = [["good", "fun"], ["good", "great"], ["bad", "dull"], ["bad", "boring"]]
SEP_LABELS = [1, 1, 0, 0]


def test_nb_lm_separable():
    v = build_ngram_vocabulary(SEP_CORPUS, (1, 2, 3))
    model, scheme = nb_lm_train(SEP_CORPUS, SEP_LABELS, v, epochs=50, learning_rate=0.5,
                                minibatch=2, seed=3)
    assert list(model.predict(vectorize(SEP_CORPUS, scheme))) == SEP_LABELS
    again, _ = nb_lm_train(SEP_CORPUS, SEP_LABELS, v, epochs=50, learning_rate=0.5,
                           minibatch=2, seed=3)
    assert np.array_equal(model.coef, again.coef) and np.array_equal(model.intercept, again.intercept)


def test_large_l2_shrinks_to_bias():
    v = build_ngram_vocabulary(SEP_CORPUS, (1,))
    X = vectorize(SEP_CORPUS + [["good"]], BowScheme("binary_unit", v))
    y = SEP_LABELS + [1]
    norms = []
    for lam in (0.01, 1.0, 100.0):
        m = linear_train(X, y, l2=lam, epochs=400, learning_rate=0.4 / (1 + lam), minibatch=5)
        norms.append(np.linalg.norm(m.coef))
    assert norms[0] > norms[1] > norms[2]
    # stationary point: |w| is bounded by the data gradient over 2*lambda
    assert norms[2] < 0.01
    assert set(m.predict(X)) == {1}


def test_zero_epochs_is_init():
    X = sp.csr_matrix(np.eye(3))
    m = linear_train(X, [0, 1, 1], epochs=0)
    assert not m.coef.any() and not m.intercept.any()


def test_square_loss_matches_ridge():
    X = np.array([[1.0, 0.0, 2.0], [0.0, 1.0, 1.0], [1.0, 1.0, 0.0], [0.5, 0.0, 0.0]])
    y = np.array([1.0, -1.0, 1.0, -1.0])
    lam, n = 0.1, len(y)
    A = np.hstack([X, np.ones((n, 1))])
    D = np.diag([lam, lam, lam, 0.0])
    theta = np.linalg.solve(A.T @ A / n + D, A.T @ y / n)
    m = linear_train(sp.csr_matrix(X), [1, 0, 1, 0], l2=lam, loss="square", epochs=20000,
                     learning_rate=0.2, minibatch=n)
    assert_allclose(m.coef[0], theta[:3], atol=1e-6)
    assert m.intercept[0] == pytest.approx(theta[3], abs=1e-6)


def test_multiclass_one_vs_rest():
    v = Vocabulary(("x", "y", "z"))
    corpus = [["x"], ["y"], ["z"], ["x"], ["y"], ["z"]]
    X = vectorize(corpus, BowScheme("binary_unit", v))
    m = linear_train(X, [0, 1, 2, 0, 1, 2], 3, epochs=100, learning_rate=1.0, minibatch=6)
    assert m.coef.shape == (3, 3)
    assert list(m.predict(X)) == [0, 1, 2, 0, 1, 2]


def test_presence_matrix_binary():
    v = build_ngram_vocabulary([["a", "a", "b"]], (1, 2))
    X = presence_matrix([["a", "a", "b"]], v, (1, 2))
    assert set(X.data.tolist()) == {1.0}
    assert X.nnz == len(v)
