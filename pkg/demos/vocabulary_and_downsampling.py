"""Character vocabulary from a small mixed-language corpus, then per-language
downsampling ratios."""
import numpy as np

from vocabtree import LanguageProportions, build_vocabulary, downsampling_ratios

lines = [
    ("en", "the cat sat on the mat"),
    ("en", "a dog barked"),
    ("fr", "le chat est là"),
    ("de", "die Katze schläft"),
]
vocab = build_vocabulary(lines)
print("tokens:", len(vocab))
print(vocab.to_tsv())

# relative frequencies sum to one
p = vocab.probabilities()
print("sum of probabilities:", p.sum())

# pretend we have 900h of English, 90h of French and 10h of German
props = LanguageProportions.from_sizes([900, 90, 10], alpha=0.5, ratio=0.082)
lam = downsampling_ratios(props)
for lang, share, r in zip(["en", "fr", "de"], props.shares, lam):
    print("%s  share %.3f  ratio %.4f" % (lang, share, r))

# the share-weighted mean gives back the global ratio
print("weighted mean:", np.dot(props.shares, lam))

# alpha = 1 means no rebalancing at all
flat = downsampling_ratios(LanguageProportions(props.shares, alpha=1.0))
print("alpha=1:", flat)
