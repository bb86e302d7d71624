"""Character vocabularies over multilingual text and per-language downsampling."""

from dataclasses import dataclass, field

import numpy as np

from ._io import escape_token, unescape_token


class Vocabulary:
    """Ordered character inventory with merged cross-language counts.

    Token ids are positions in ``tokens``.  A character that occurs in several
    languages is stored once, with the counts summed.
    """

    def __init__(self, tokens, counts):
        tokens = list(tokens)
        counts = [int(c) for c in counts]
        if len(tokens) != len(counts):
            raise ValueError("tokens and counts differ in length")
        if len(set(tokens)) != len(tokens):
            raise ValueError("duplicate tokens in vocabulary")
        if any(c <= 0 for c in counts):
            raise ValueError("all token counts must be positive")
        self.tokens = tokens
        self.counts = counts
        self._index = {t: i for i, t in enumerate(tokens)}

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self._index

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.tokens == other.tokens and self.counts == other.counts

    def __repr__(self):
        return "Vocabulary(N=%d)" % len(self)

    def id_of(self, token):
        try:
            return self._index[token]
        except KeyError:
            raise KeyError("token %r not in vocabulary" % token) from None

    def freq(self):
        """Mapping token -> count."""
        return dict(zip(self.tokens, self.counts))

    def probabilities(self):
        c = np.asarray(self.counts, dtype=float)
        return c / c.sum()

    # TSV ``token<TAB>count`` ------------------------------------------------

    def to_tsv(self):
        return "".join("%s\t%d\n" % (escape_token(t), c) for t, c in zip(self.tokens, self.counts))

    def save_tsv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_tsv())

    @classmethod
    def load_tsv(cls, path):
        tokens, counts = [], []
        with open(path, encoding="utf-8", newline="") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\r\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError("%s:%d: expected token<TAB>count" % (path, lineno))
                try:
                    count = int(parts[1])
                except ValueError:
                    raise ValueError("%s:%d: bad count %r" % (path, lineno, parts[1])) from None
                tokens.append(unescape_token(parts[0]))
                counts.append(count)
        return cls(tokens, counts)


def build_vocabulary(lines):
    """Count characters over ``(language, text)`` pairs.

    Identical characters from different languages collapse to one token.  No
    Unicode normalisation is applied; newline characters are separators and
    are never counted.  Tokens are ordered by first appearance.
    """
    counts = {}
    for _lang, text in lines:
        for ch in text:
            if ch == "\n":
                continue
            counts[ch] = counts.get(ch, 0) + 1
    if not counts:
        raise ValueError("empty corpus")
    return Vocabulary(counts.keys(), counts.values())


def read_corpus(path):
    """Read ``lang<TAB>text`` lines; returns a list of ``(lang, text)``."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            lang, sep, text = line.partition("\t")
            if not sep:
                raise ValueError("%s:%d: expected lang<TAB>text" % (path, lineno))
            out.append((lang, text))
    return out


@dataclass
class LanguageProportions:
    """Per-language data shares plus the smoothing and global ratio."""

    shares: list = field(default_factory=list)
    alpha: float = 0.5
    ratio: float = 0.082

    def __post_init__(self):
        p = np.asarray(self.shares, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("invalid proportion: need a non-empty 1-D sequence")
        if np.any(~np.isfinite(p)) or np.any(p <= 0) or np.any(p > 1):
            raise ValueError("invalid proportion: shares must lie in (0, 1]")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("invalid proportion: shares sum to %r, not 1" % p.sum())
        if not self.alpha > 0 or not self.ratio > 0:
            raise ValueError("alpha and ratio must be positive")

    @classmethod
    def from_sizes(cls, sizes, alpha=0.5, ratio=0.082):
        """Shares from raw per-language sizes (hours, utterances, ...)."""
        s = np.asarray(sizes, dtype=float)
        if np.any(s <= 0):
            raise ValueError("invalid proportion: sizes must be positive")
        return cls(list(s / s.sum()), alpha, ratio)


def downsampling_ratios(props):
    """Per-language ratios ``p_i**(alpha-1) / sum_j p_j**alpha * ratio``.

    Smaller languages get larger ratios; the share-weighted mean of the
    ratios equals the global ``ratio``.
    """
    p = np.asarray(props.shares, dtype=float)
    if np.any(p <= 0):
        raise ValueError("invalid proportion")
    a = props.alpha
    return p ** (a - 1.0) / np.sum(p ** a) * props.ratio
