"""Character error rate and bilingual lexicon induction (p@1)."""

from dataclasses import dataclass

import numpy as np

from .clustering import DistanceMetric, distance_matrix


def levenshtein(a, b):
    """Edit distance with unit insert/delete/substitute costs."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
        prev = cur
    return prev[-1]


def cer(reference, hypothesis):
    if not reference:
        raise ValueError("empty reference")
    return levenshtein(reference, hypothesis) / len(reference)


def corpus_cer(references, hypotheses):
    """Total edits over total reference characters."""
    if len(references) != len(hypotheses):
        raise ValueError("reference and hypothesis counts differ")
    chars = sum(len(r) for r in references)
    if chars == 0:
        raise ValueError("empty reference")
    return sum(levenshtein(r, h) for r, h in zip(references, hypotheses)) / chars


class OOVError(KeyError):
    def __init__(self, char, word):
        self.char = char
        super().__init__("character %r of word %r is not in the vocabulary" % (char, word))

    def __str__(self):
        return self.args[0]


def word_embed(word, E, vocab):
    """Mean of the character embedding rows of ``word`` (with multiplicity)."""
    if not word:
        raise ValueError("empty word")
    rows = []
    for ch in word:
        if ch not in vocab:
            raise OOVError(ch, word)
        rows.append(vocab.id_of(ch))
    return np.asarray(E, dtype=float)[rows].mean(axis=0)


@dataclass
class Lexicon:
    pairs: list

    def __post_init__(self):
        self.pairs = [(str(s), str(t)) for s, t in self.pairs]
        if not self.pairs:
            raise ValueError("lexicon is empty")
        if any(not s or not t for s, t in self.pairs):
            raise ValueError("lexicon words must be non-empty")

    @classmethod
    def load_tsv(cls, path):
        pairs = []
        with open(path, encoding="utf-8", newline="") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\r\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError("%s:%d: expected source<TAB>target" % (path, lineno))
                pairs.append((parts[0], parts[1]))
        return cls(pairs)

    def targets(self):
        """Distinct gold targets in first-appearance order."""
        return list(dict.fromkeys(t for _, t in self.pairs))


@dataclass
class BLIReport:
    p_at_1: float
    evaluated: int
    skipped: int

    def to_dict(self):
        return {"p_at_1": self.p_at_1, "evaluated": self.evaluated, "skipped": self.skipped}


def bli_report(lexicon, src_E, src_vocab, tgt_E=None, tgt_vocab=None,
               target_words=None, metric="cosine"):
    """Precision at rank 1 of nearest-neighbour translation.

    Words are embedded by averaging character rows.  The candidate pool is
    ``target_words`` (default: the lexicon's targets); candidates that cannot
    be embedded are dropped.  A pair is skipped if its source or gold target
    cannot be embedded.  Ties go to the candidate listed first.  For
    s-euclidean the scales are fitted on the pooled query and candidate
    vectors.
    """
    if tgt_E is None:
        tgt_E, tgt_vocab = src_E, src_vocab
    if not isinstance(lexicon, Lexicon):
        lexicon = Lexicon(lexicon)
    pool = list(dict.fromkeys(target_words if target_words is not None else lexicon.targets()))
    cand_words, cand_vecs = [], []
    for w in pool:
        try:
            cand_vecs.append(word_embed(w, tgt_E, tgt_vocab))
            cand_words.append(w)
        except (OOVError, ValueError):
            pass
    if not cand_words:
        raise ValueError("no embeddable target candidates")
    cand_index = {w: i for i, w in enumerate(cand_words)}
    queries, golds, skipped = [], [], 0
    for s, t in lexicon.pairs:
        if t not in cand_index:
            skipped += 1
            continue
        try:
            queries.append(word_embed(s, src_E, src_vocab))
        except (OOVError, ValueError):
            skipped += 1
            continue
        golds.append(cand_index[t])
    if not queries:
        raise ValueError("all lexicon pairs were skipped")
    Q = np.asarray(queries)
    C = np.asarray(cand_vecs)
    if isinstance(metric, str):
        metric = DistanceMetric(metric)
    # distances between queries (first block) and candidates (second block)
    D = distance_matrix(np.vstack([Q, C]), metric)[:len(Q), len(Q):]
    nearest = np.argmin(D, axis=1)
    hits = int(np.sum(nearest == np.asarray(golds)))
    return BLIReport(hits / len(Q), len(Q), skipped)


def bli_p_at_1(lexicon, src_E, src_vocab, tgt_E=None, tgt_vocab=None,
               target_words=None, metric="cosine"):
    return bli_report(lexicon, src_E, src_vocab, tgt_E, tgt_vocab, target_words, metric).p_at_1
