"""Frequency-based vocabulary tree (Huffman merging)."""

import heapq

from .tree import VocabTree


def build_huffman(vocab):
    """Merge the two lowest-frequency nodes until one root remains.

    Queue entries are keyed by ``(frequency, smallest token id in subtree)``;
    the smaller key is popped first and becomes the left child, which makes
    the tree (and every code string) reproducible.
    """
    counts = list(vocab.counts) if hasattr(vocab, "counts") else list(vocab)
    n = len(counts)
    if n < 2:
        raise ValueError("vocabulary too small")
    if any(c <= 0 for c in counts):
        raise ValueError("all frequencies must be positive")
    heap = [(c, i, i) for i, c in enumerate(counts)]  # (freq, min token id, node id)
    heapq.heapify(heap)
    merges = []
    while len(heap) > 1:
        f1, m1, a = heapq.heappop(heap)
        f2, m2, b = heapq.heappop(heap)
        merges.append((a, b))
        heapq.heappush(heap, (f1 + f2, min(m1, m2), n + len(merges) - 1))
    tokens = getattr(vocab, "tokens", None)
    return VocabTree.from_merges(n, merges, tokens)


def weighted_depth(tree, counts):
    """Sum over tokens of ``count * depth``."""
    return sum(c * d for c, d in zip(counts, tree.depths()))
