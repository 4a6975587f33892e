"""Reference implementations used only by the tests.

Dense, loop-based, and written without touching the sparse code paths they
check.
"""

import numpy as np

SENTINEL = -1


def padded(ids, p, pad=True):
    ids = list(ids)
    if pad:
        ids = [SENTINEL] * (p - 1) + ids + [SENTINEL] * (p - 1)
    while len(ids) < p:
        ids.append(SENTINEL)
    return ids


def dense_seq_regions(ids, p, V, stride=1, pad=True):
    a = padded(ids, p, pad)
    out = []
    start = 0
    while start + p <= len(a):
        x = np.zeros(p * V)
        for t in range(p):
            w = a[start + t]
            if w != SENTINEL:
                x[t * V + w] = 1.0
        out.append(x)
        start += stride
    return out


def dense_bow_regions(ids, p, V, stride=1, pad=True, variable=False):
    a = padded(ids, p, pad)
    out = []
    start = 0
    while start + p <= len(a):
        x = np.zeros(V)
        for t in range(p):
            w = a[start + t]
            if w != SENTINEL:
                x[w] += 1.0
        if not (variable and out and np.array_equal(out[-1], x)):
            out.append(x)
        start += stride
    return out


def dense_conv(W_md, b, xs):
    """W given neuron-major (m x d)."""
    return np.array([[max(0.0, float(W_md[j] @ x + b[j])) for j in range(len(b))] for x in xs])


def dense_pool(H, k, kind):
    L, m = H.shape
    out = np.zeros((k, m))
    # brute-force partition: first L mod k segments get one extra row
    sizes = [L // k + (1 if s < L % k else 0) for s in range(k)]
    row = 0
    for s, size in enumerate(sizes):
        if size:
            seg = H[row:row + size]
            out[s] = seg.max(axis=0) if kind == "max" else seg.mean(axis=0)
        row += size
    return out


def dense_bag(tokens, ngram_entries, ngrams, nb=None, sep="▸"):
    index = {e: i for i, e in enumerate(ngram_entries)}
    x = np.zeros(len(ngram_entries))
    for n in ngrams:
        for i in range(len(tokens) - n + 1):
            g = sep.join(tokens[i:i + n])
            if g in index:
                x[index[g]] = 1.0
    if nb is not None:
        x = x * nb
    return x


def dense_forward(net, doc):
    """Scores of one document through ``net`` using only dense loops."""
    feats = []
    for br in net.branches:
        s = br.spec
        if s.kind == "bag":
            xs = [dense_bag(list(doc.tokens), br.vocab.entries, s.ngrams, br.nb)]
        elif s.kind == "seq":
            r = s.region
            xs = dense_seq_regions(doc.token_ids, r.size, len(br.vocab), r.stride, r.pad)
        else:
            r = s.region
            xs = dense_bow_regions(doc.token_ids, r.size, len(br.vocab), r.stride, r.pad,
                                   r.variable_stride)
        H = dense_conv(br.W.T, br.b, xs)
        P = dense_pool(H, s.pooling.units, s.pooling.kind)
        if s.response_norm:
            P = np.array([z / np.sqrt(1.0 + z @ z) for z in P])
        feats.append(P.ravel())
    f = np.concatenate(feats)
    return net.top_W @ f + net.top_b


def finite_difference(fun, params, h=1e-4):
    """Central differences of scalar ``fun()`` w.r.t. every entry of each array in
    ``params`` (arrays are perturbed in place and restored)."""
    grads = []
    for P in params:
        G = np.zeros_like(P)
        it = np.nditer(P, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            old = P[i]
            P[i] = old + h
            fp = fun()
            P[i] = old - h
            fm = fun()
            P[i] = old
            G[i] = (fp - fm) / (2 * h)
        grads.append(G)
    return grads
