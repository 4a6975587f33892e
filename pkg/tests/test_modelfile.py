import struct

import numpy as np
import pytest

from onehotcnn.baselines import BowScheme, linear_train, nb_lm_train, vectorize
from onehotcnn.modelfile import load_model, round_to_float32, save_linear, save_network
from onehotcnn.nn import predict_scores
from onehotcnn.text import DataError, Vocabulary, build_ngram_vocabulary
from helpers import VOCAB, random_docs, tiny_net


@pytest.fixture
def two_branch(rng, tmp_path):
    docs = random_docs(rng, 20)
    net = tiny_net(rng, "bow", "average", True, True, docs)
    net.meta["tokenizer.lowercase"] = "true"
    VOCAB.save(tmp_path / "v.txt")
    net.branches[1].vocab.save(tmp_path / "ng.txt")
    return net, docs


def test_roundtrip_exact_for_float32(two_branch, tmp_path):
    net, docs = two_branch
    save_network(net, tmp_path / "m.tcnn", [tmp_path / "v.txt", tmp_path / "ng.txt"])
    back = load_model(tmp_path / "m.tcnn")
    ref = round_to_float32(net)
    for a, b in zip(back.parameters(), ref.parameters()):
        assert np.array_equal(a, b)
    assert np.array_equal(back.branches[1].nb, ref.branches[1].nb)
    assert back.meta == net.meta
    assert [b.spec for b in back.branches] == [b.spec for b in net.branches]
    assert np.array_equal(predict_scores(back, docs), predict_scores(ref, docs))


def test_layout(two_branch, tmp_path):
    net, _ = two_branch
    save_network(net, tmp_path / "m.tcnn", [tmp_path / "v.txt", tmp_path / "ng.txt"])
    raw = (tmp_path / "m.tcnn").read_bytes()
    head, _, blobs = raw.partition(b"\nend\n")
    lines = head.decode().splitlines()
    assert lines[0] == "tcnn1"
    assert "branch.0.vocab=v.txt" in lines
    br = net.branches[0]
    ndim, m, d = struct.unpack("<3I", blobs[:12])
    assert (ndim, m, d) == (2, br.spec.neurons, br.dim)
    first = np.frombuffer(blobs[12:12 + 4 * d], dtype="<f4")
    assert np.array_equal(first, br.W[:, 0].astype(np.float32))


def test_same_params_same_bytes(two_branch, tmp_path):
    net, _ = two_branch
    paths = [tmp_path / "v.txt", tmp_path / "ng.txt"]
    save_network(net, tmp_path / "a.tcnn", paths)
    save_network(net, tmp_path / "b.tcnn", paths)
    assert (tmp_path / "a.tcnn").read_bytes() == (tmp_path / "b.tcnn").read_bytes()


def test_vocab_mismatch_detected(two_branch, tmp_path):
    net, _ = two_branch
    save_network(net, tmp_path / "m.tcnn", [tmp_path / "v.txt", tmp_path / "ng.txt"])
    Vocabulary(tuple(sorted(VOCAB.entries + ("extra",)))).save(tmp_path / "v.txt")
    with pytest.raises(DataError):
        load_model(tmp_path / "m.tcnn")


def test_truncated_file(two_branch, tmp_path):
    net, _ = two_branch
    save_network(net, tmp_path / "m.tcnn", [tmp_path / "v.txt", tmp_path / "ng.txt"])
    raw = (tmp_path / "m.tcnn").read_bytes()
    (tmp_path / "m.tcnn").write_bytes(raw[:-5])
    with pytest.raises(DataError):
        load_model(tmp_path / "m.tcnn")


def test_linear_roundtrip(tmp_path):
    corpus = [["good", "fun"], ["bad", "dull"], ["good"], ["bad"]]
    v = build_ngram_vocabulary(corpus, (1, 2))
    v.save(tmp_path / "ng.txt")
    model, scheme = nb_lm_train(corpus, [1, 0, 1, 0], v, ngrams=(1, 2), epochs=5)
    save_linear(model, scheme, tmp_path / "m.lin", tmp_path / "ng.txt")
    assert (tmp_path / "m.lin").read_bytes().startswith(b"lin1\n")
    back, bscheme = load_model(tmp_path / "m.lin")
    assert bscheme.kind == "nb_binary" and bscheme.ngrams == (1, 2)
    X = vectorize(corpus, bscheme)
    assert np.array_equal(back.coef, model.coef.astype(np.float32).astype(float))
    assert list(back.predict(X)) == list(model.predict(vectorize(corpus, scheme)))

    s2 = BowScheme("log_count_unit", v, (1, 2))
    m2 = linear_train(vectorize(corpus, s2), [1, 0, 1, 0], loss="square", epochs=3)
    save_linear(m2, s2, tmp_path / "m2.lin", tmp_path / "ng.txt")
    back2, bs2 = load_model(tmp_path / "m2.lin")
    assert bs2.kind == "log_count_unit" and back2.loss == "square"
