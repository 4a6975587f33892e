"""Synthetic word-order corpus.

Every document holds two sentiment phrases among random filler words:

* label 1:  ``X pos``   and  ``not X neg``
* label 0:  ``not X pos``  and  ``X neg``

``X`` is any filler word. Both classes have the same unigram and bigram
distributions, so only the trigram ``not _ adj`` identifies the label: a
bag-of-words model sits at chance while a width-3 region model can separate
the classes exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NOT = "not"


@dataclass(frozen=True)
class NegationCorpus:
    vocab_size: int = 200
    n_adjectives: int = 10
    min_fillers: int = 6
    max_fillers: int = 16
    held_out: str | None = None     # filler never used as X in phrases

    @property
    def positives(self) -> list[str]:
        return [f"good{i}" for i in range(self.n_adjectives)]

    @property
    def negatives(self) -> list[str]:
        return [f"bad{i}" for i in range(self.n_adjectives)]

    @property
    def fillers(self) -> list[str]:
        n = self.vocab_size - 1 - 2 * self.n_adjectives
        if n < 2:
            raise ValueError("vocab_size too small for the adjective sets")
        return [f"w{i}" for i in range(n)]

    def words(self) -> list[str]:
        return [NOT] + self.positives + self.negatives + self.fillers

    def generate(self, n: int, seed: int, *, middle: str | None = None) -> list[tuple[int, list[str]]]:
        """``n`` labelled documents, half of each class.

        ``middle`` forces every phrase to use that X word; otherwise X is drawn
        from the fillers minus ``held_out``.
        """
        rng = np.random.default_rng(seed)
        fillers = self.fillers
        xs = [w for w in fillers if w != self.held_out]
        pos, neg = self.positives, self.negatives
        out = []
        for i in range(n):
            label = i % 2
            x1 = middle or xs[rng.integers(len(xs))]
            x2 = middle or xs[rng.integers(len(xs))]
            g = pos[rng.integers(len(pos))]
            b = neg[rng.integers(len(neg))]
            if label == 1:
                phrases = [[x1, g], [NOT, x2, b]]
            else:
                phrases = [[NOT, x1, g], [x2, b]]
            if rng.random() < 0.5:
                phrases.reverse()
            k = int(rng.integers(self.min_fillers, self.max_fillers + 1))
            filler = [fillers[j] for j in rng.integers(len(fillers), size=k)]
            cuts = np.sort(rng.integers(0, k + 1, size=2))
            toks = (filler[:cuts[0]] + phrases[0] + filler[cuts[0]:cuts[1]]
                    + phrases[1] + filler[cuts[1]:])
            out.append((label, toks))
        perm = rng.permutation(n)
        return [out[j] for j in perm]


def oracle_label(tokens: list[str], negatives: list[str] | None = None) -> int:
    """1 iff some ``not _ neg`` trigram occurs, i.e. a negated negative."""
    neg = set(negatives) if negatives is not None else None
    for i in range(len(tokens) - 2):
        if tokens[i] == NOT:
            w = tokens[i + 2]
            if (w in neg) if neg is not None else w.startswith("bad"):
                return 1
    return 0
