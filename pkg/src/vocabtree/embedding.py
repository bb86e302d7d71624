"""Per-token embedding matrices: text I/O, Mono-Map and shared-token averaging.

Text format: a header line ``N m``, then ``N`` lines ``token v_1 ... v_m``;
whitespace/control tokens are written as ``U+XXXX``.
"""

import warnings

import numpy as np

from ._io import escape_token, unescape_token


class MissingTokensError(KeyError):
    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__("tokens missing from embedding file: %s"
                         % ", ".join(repr(t) for t in self.missing))

    def __str__(self):
        return self.args[0]


def read_embedding_file(path):
    """Return ``(tokens, matrix)`` in file order."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise ValueError("%s: empty embedding file" % path)
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError("%s: header must be 'N m'" % path)
    n, m = int(head[0]), int(head[1])
    if m < 1:
        raise ValueError("%s: dimension must be >= 1" % path)
    rows = lines[1:]
    if len(rows) != n:
        raise ValueError("%s: header announces %d rows, found %d" % (path, n, len(rows)))
    tokens, vecs = [], []
    for lineno, line in enumerate(rows, 2):
        parts = line.split(" ")
        if len(parts) != m + 1:
            raise ValueError("%s:%d: expected %d values, found %d" % (path, lineno, m, len(parts) - 1))
        tokens.append(unescape_token(parts[0]))
        vecs.append([float(x) for x in parts[1:]])
    X = np.array(vecs, dtype=float).reshape(n, m)
    if not np.all(np.isfinite(X)):
        raise ValueError("%s: non-finite embedding values" % path)
    if len(set(tokens)) != len(tokens):
        raise ValueError("%s: duplicate tokens" % path)
    return tokens, X


def load_embeddings(path, vocab):
    """Rows for every vocabulary token, in vocabulary id order.

    Extra tokens in the file are ignored; missing tokens raise
    ``MissingTokensError`` listing all of them.
    """
    tokens, X = read_embedding_file(path)
    index = {t: i for i, t in enumerate(tokens)}
    vocab_tokens = vocab.tokens if hasattr(vocab, "tokens") else list(vocab)
    missing = [t for t in vocab_tokens if t not in index]
    if missing:
        raise MissingTokensError(missing)
    return X[[index[t] for t in vocab_tokens]]


def format_embeddings(tokens, X):
    X = np.asarray(X, dtype=float)
    out = ["%d %d\n" % X.shape]
    for t, row in zip(tokens, X):
        out.append(escape_token(t) + " " + " ".join(format(float(v), ".17g") for v in row) + "\n")
    return "".join(out)


def save_embeddings(path, tokens, X):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_embeddings(tokens, X))


def _gram(X):
    # each entry is a pairwise sum over the dimension axis, so the value of
    # M[i, j] does not depend on row positions and M is exactly symmetric
    n = X.shape[0]
    chunk = max(1, (1 << 22) // max(1, n * X.shape[1]))
    M = np.empty((n, n))
    for start in range(0, n, chunk):
        block = X[start:start + chunk]
        M[start:start + chunk] = (block[:, None, :] * X[None, :, :]).sum(axis=2)
    return M


def mono_map(X, width=None, return_clamped=False):
    """Rows of the element-wise square root of ``X X^T``, each sorted ascending.

    Similarities below -1e-9 are clamped to 0 and counted (a warning is
    issued); smaller negative round-off is zeroed silently.  ``width`` fixes
    the output dimension so maps of differently sized vocabularies can be
    averaged: longer rows keep their ``width`` largest values, shorter rows
    are left-padded with zeros (which keeps them sorted).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("mono_map needs a non-empty 2-D matrix")
    M = _gram(X)
    clamped = int(np.count_nonzero(M < -1e-9))
    if clamped:
        warnings.warn("mono_map: clamped %d negative similarities to 0" % clamped, stacklevel=2)
    out = np.sort(np.sqrt(np.maximum(M, 0.0)), axis=1)
    if width is not None:
        n = out.shape[1]
        if width < 1:
            raise ValueError("width must be >= 1")
        if n >= width:
            out = out[:, n - width:]
        else:
            out = np.hstack([np.zeros((out.shape[0], width - n)), out])
    return (out, clamped) if return_clamped else out


def average_shared(per_language, vocab):
    """Average each token's vector over the languages that contain it.

    ``per_language`` is a sequence of ``(language, {token: vector})``.
    Languages are summed in sorted-name order so the result does not depend on
    the order they are listed in.
    """
    vocab_tokens = vocab.tokens if hasattr(vocab, "tokens") else list(vocab)
    ordered = sorted(per_language, key=lambda item: item[0])
    dim = None
    for lang, table in ordered:
        for tok, vec in table.items():
            d = np.asarray(vec).shape
            if dim is None:
                dim = d
            elif d != dim:
                raise ValueError("language %r: vector for %r has shape %s, expected %s" % (lang, tok, d, dim))
    if dim is None or len(dim) != 1:
        raise ValueError("no embedding vectors given")
    out = np.zeros((len(vocab_tokens), dim[0]))
    missing = []
    for i, tok in enumerate(vocab_tokens):
        vecs = [np.asarray(table[tok], dtype=float) for _, table in ordered if tok in table]
        if not vecs:
            missing.append(tok)
            continue
        total = np.zeros(dim[0])
        for v in vecs:
            total += v
        out[i] = total / len(vecs)
    if missing:
        raise MissingTokensError(missing)
    return out
