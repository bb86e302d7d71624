"""Character error rate, word vectors from character embeddings, bilingual
lexicon induction and the Mono-Map transform."""
import warnings

import numpy as np

from vocabtree import Lexicon, Vocabulary, bli_report, cer, mono_map, word_embed

print(cer("kitten", "sitting"))
print(cer("abc", "abc"), cer("abc", ""))

vocab = Vocabulary(list("abcdefgh"), [1] * 8)
rng = np.random.default_rng(0)
E = rng.normal(size=(8, 5))

# a word is the mean of its character rows
print(word_embed("bad", E, vocab))
print(np.allclose(word_embed("bad", E, vocab), E[[1, 0, 3]].mean(axis=0)))

# "fig" has an "i", which is not in the vocabulary, so that pair is skipped
lex = Lexicon([("bad", "bad"), ("cafe", "cafe"), ("head", "head"), ("fig", "fig")])
print(bli_report(lex, E, vocab).to_dict())

# a noisy second space with the same characters
E2 = E + rng.normal(0, 0.3, size=E.shape)
for metric in ("cosine", "euclidean", "s-euclidean"):
    print(metric, bli_report(lex, E, vocab, E2, vocab, metric=metric).to_dict())

# Mono-Map takes square roots of dot products; negative ones are clamped
# to zero with a warning, so use non-negative vectors here
P = np.abs(E)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    M, clamped = mono_map(E, return_clamped=True)
print("clamped on raw vectors:", clamped)

# rotation invariant: a rotated copy maps to the same thing
Q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
M1, M2 = mono_map(P), mono_map(P @ Q)
print(M1.shape, np.max(np.abs(M1 - M2)))
print("rows sorted:", np.all(np.diff(M1, axis=1) >= 0))
print(mono_map(P, width=10).shape)
