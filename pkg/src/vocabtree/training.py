"""Desk-scale training harness for the hierarchical softmax head.

Hidden states are fixed feature vectors; only the node vectors (or, for the
flat baseline, the class weight matrix) are learned, with plain minibatch SGD.
"""

from dataclasses import dataclass

import numpy as np

from .hsoftmax import NodeParams, batch_nll_grad, build_sign_bias, predict


@dataclass
class TrainConfig:
    lr: float = 0.5
    epochs: int = 30
    seed: int = 0
    batch_size: int = 32
    init_scale: float = 0.01


def make_blobs(n_classes=64, dim=16, n_samples=5000, seed=0, spread=4.0, noise=2.0, weights=None):
    """Gaussian blobs: class centres ~ N(0, spread^2), samples ~ N(centre, noise^2).

    ``weights`` gives relative class frequencies (uniform by default).
    Returns ``(X, y, centres)``.
    """
    rng = np.random.default_rng(seed)
    centres = rng.normal(0.0, spread, size=(n_classes, dim))
    if weights is None:
        y = np.arange(n_samples) % n_classes
    else:
        w = np.asarray(weights, dtype=float)
        y = rng.choice(n_classes, size=n_samples, p=w / w.sum())
    y = rng.permutation(y)
    X = centres[y] + rng.normal(0.0, noise, size=(n_samples, dim))
    return X, y, centres


def random_features(X, width=256, seed=0):
    """Fixed random tanh layer plus a constant 1 column: ``[tanh(XW + b), 1]``.

    Stands in for a frozen encoder; inputs are standardised first.
    """
    X = np.asarray(X, dtype=float)
    rng = np.random.default_rng(seed)
    mu, sd = X.mean(axis=0), X.std(axis=0)
    sd[sd == 0] = 1.0
    Z = (X - mu) / sd
    W = rng.normal(0.0, 1.0 / np.sqrt(X.shape[1]), size=(X.shape[1], width))
    b = rng.uniform(-1.0, 1.0, size=width)
    return np.hstack([np.tanh(Z @ W + b), np.ones((len(X), 1))])


def class_means(X, y, n_classes):
    """Per-class mean of ``X``; the embedding used to cluster classes into a tree."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    counts = np.bincount(y, minlength=n_classes)
    if np.any(counts == 0):
        raise ValueError("class %d has no samples" % int(np.argmin(counts)))
    sums = np.zeros((n_classes, X.shape[1]))
    np.add.at(sums, y, X)
    return sums / counts[:, None]


def _check_labels(y, n_leaves):
    y = np.asarray(y)
    bad = (y < 0) | (y >= n_leaves)
    if np.any(bad):
        raise ValueError("label %r is not a leaf of the tree" % (y[bad][0],))
    return y


def accuracy(H, y, params, tree_or_sb):
    sb = tree_or_sb if hasattr(tree_or_sb, "sign") else build_sign_bias(tree_or_sb)
    return float(np.mean(predict(H, params, sb) == np.asarray(y)))


def train_toy(H, y, tree, config=None, params=None):
    """Fit node vectors by SGD on the mean NLL of the labels.

    Returns ``(params, train accuracy)`` where accuracy uses argmax decoding of
    the vectorised log-probabilities.  Deterministic given ``config.seed``.
    """
    config = config or TrainConfig()
    H = np.asarray(H, dtype=float)
    y = _check_labels(y, tree.n_leaves)
    rng = np.random.default_rng(config.seed)
    if params is None:
        params = NodeParams(rng.normal(0.0, config.init_scale, size=(tree.n_leaves - 1, H.shape[1])))
    else:
        params = params.copy()
    sb = build_sign_bias(tree)
    n = len(H)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            _, grad = batch_nll_grad(H[idx], params, sb, y[idx])
            params.R -= config.lr * grad
    return params, accuracy(H, y, params, sb)


def train_flat_softmax(H, y, n_classes, config=None):
    """Flat softmax baseline in the same harness; returns ``(W, accuracy)``."""
    config = config or TrainConfig()
    H = np.asarray(H, dtype=float)
    y = _check_labels(y, n_classes)
    rng = np.random.default_rng(config.seed)
    W = rng.normal(0.0, config.init_scale, size=(n_classes, H.shape[1]))
    n = len(H)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            logits = H[idx] @ W.T
            logits -= logits.max(axis=1, keepdims=True)
            P = np.exp(logits)
            P /= P.sum(axis=1, keepdims=True)
            P[np.arange(len(idx)), y[idx]] -= 1.0
            W -= config.lr * (P.T @ H[idx]) / len(idx)
    acc = float(np.mean(np.argmax(H @ W.T, axis=1) == y))
    return W, acc
