"""Hierarchical softmax over a vocabulary tree.

Bit convention: at each internal node, bit 0 is the left branch and carries
probability ``sigmoid(r . h)``; bit 1 is the right branch with
``1 - sigmoid(r . h)``.  Internal nodes are numbered breadth-first from the
root, and that number is the row of the node vector in ``NodeParams.R``.
"""

import json
from dataclasses import dataclass

import numpy as np

from ._io import dumps_json, escape_token

PAD = -1  # column_node sentinel for virtual-child padding


def softplus(x):
    return np.logaddexp(0.0, x)


def log_sigmoid(x):
    return -softplus(-x)


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    return np.exp(log_sigmoid(x))


@dataclass
class PathCodeTable:
    """Root-to-leaf paths, one entry per token id.

    ``codes[t]`` is the bit string, ``nodes[t]`` the breadth-first internal
    indices visited, ``tokens`` the optional token texts.
    """

    codes: list
    nodes: list
    tokens: list = None

    def __len__(self):
        return len(self.codes)

    def depth(self, token):
        return len(self.codes[token])

    def branches(self, token):
        return ["left" if b == "0" else "right" for b in self.codes[token]]

    def to_tsv(self):
        rows = []
        for t, code in enumerate(self.codes):
            text = self.tokens[t] if self.tokens is not None else str(t)
            rows.append("%s\t%s\n" % (escape_token(text), code))
        return "".join(rows)


@dataclass
class SignBias:
    """Padded ``N x D`` matrices for vectorised path log-probabilities."""

    sign: np.ndarray
    bias: np.ndarray
    column_node: np.ndarray

    @property
    def depth(self):
        return self.sign.shape[1]

    def to_dict(self):
        return {"sign": self.sign.tolist(), "bias": self.bias.tolist(),
                "column_node": self.column_node.tolist()}

    def to_json(self):
        return dumps_json(self.to_dict(), indent=1) + "\n"

    def padded(self, extra):
        """Copy with ``extra`` additional virtual-child columns."""
        n = self.sign.shape[0]
        return SignBias(np.hstack([self.sign, np.zeros((n, extra), dtype=self.sign.dtype)]),
                        np.hstack([self.bias, np.ones((n, extra), dtype=self.bias.dtype)]),
                        np.hstack([self.column_node, np.full((n, extra), PAD, dtype=self.column_node.dtype)]))


@dataclass
class NodeParams:
    """Node vectors, one row per internal node (breadth-first order)."""

    R: np.ndarray

    def __post_init__(self):
        self.R = np.asarray(self.R, dtype=float)
        if self.R.ndim != 2:
            raise ValueError("R must be a 2-D array")
        if not np.all(np.isfinite(self.R)):
            raise ValueError("node parameters must be finite")

    @property
    def hidden_dim(self):
        return self.R.shape[1]

    @classmethod
    def zeros(cls, tree, hidden_dim):
        return cls(np.zeros((tree.n_leaves - 1, hidden_dim)))

    @classmethod
    def random(cls, tree, hidden_dim, seed=0, scale=0.1):
        rng = np.random.default_rng(seed)
        return cls(rng.normal(0.0, scale, size=(tree.n_leaves - 1, hidden_dim)))

    def copy(self):
        return NodeParams(self.R.copy())

    def to_bytes(self, tree):
        """JSON header line, then little-endian float64 rows."""
        header = dumps_json({"N": tree.n_leaves, "H": self.hidden_dim,
                             "tree_hash": tree.structure_hash()})
        return header.encode() + b"\n" + self.R.astype("<f8").tobytes()

    def save(self, path, tree):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes(tree))

    @classmethod
    def from_bytes(cls, data, tree=None):
        head, sep, body = data.partition(b"\n")
        if not sep:
            raise ValueError("parameter file has no header line")
        meta = json.loads(head.decode())
        n, h = int(meta["N"]), int(meta["H"])
        if tree is not None:
            if n != tree.n_leaves or meta["tree_hash"] != tree.structure_hash():
                raise ValueError("parameter file was written for a different tree")
        expected = (n - 1) * h * 8
        if len(body) != expected:
            raise ValueError("parameter body has %d bytes, expected %d" % (len(body), expected))
        R = np.frombuffer(body, dtype="<f8").reshape(n - 1, h).astype(float)
        return cls(R)

    @classmethod
    def load(cls, path, tree=None):
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read(), tree)


def derive_codes(tree):
    """Bit strings and breadth-first node indices along every root-to-leaf path."""
    codes, nodes = [], []
    for path in tree.paths():
        codes.append("".join(str(bit) for _, bit in path))
        nodes.append([tree.internal_index(nid) for nid, _ in path])
    return PathCodeTable(codes, nodes, tree.tokens)


def build_sign_bias(tree):
    """Sign/Bias/column-node matrices, padded to the maximum depth.

    A left step contributes ``(+1, 0)`` (term ``sigmoid(p)``), a right step
    ``(-1, 1)`` (term ``1 - sigmoid(p)``) and a virtual child ``(0, 1)``
    (term 1).
    """
    table = derive_codes(tree)
    n = len(table)
    depth = max(len(c) for c in table.codes)
    sign = np.zeros((n, depth), dtype=np.int64)
    bias = np.ones((n, depth), dtype=np.int64)
    col = np.full((n, depth), PAD, dtype=np.int64)
    for t, (code, path) in enumerate(zip(table.codes, table.nodes)):
        for k, (bit, node) in enumerate(zip(code, path)):
            col[t, k] = node
            if bit == "0":
                sign[t, k], bias[t, k] = 1, 0
            else:
                sign[t, k], bias[t, k] = -1, 1
    return SignBias(sign, bias, col)


def _node_logit(r, h):
    return float(np.dot(r, h))


def _check_token(codes, token):
    if not isinstance(token, (int, np.integer)) or not 0 <= token < len(codes):
        raise KeyError("unknown token %r" % (token,))


def leaf_prob(h, params, codes, token):
    """Probability of one leaf as the product of its branch probabilities.

    Evaluates exactly ``depth(token)`` inner products.
    """
    _check_token(codes, token)
    h = np.asarray(h, dtype=float)
    if h.shape != (params.hidden_dim,):
        raise ValueError("hidden state has shape %s, expected (%d,)" % (h.shape, params.hidden_dim))
    prob = 1.0
    for bit, node in zip(codes.codes[token], codes.nodes[token]):
        s = float(sigmoid(_node_logit(params.R[node], h)))
        prob *= s if bit == "0" else 1.0 - s
    return prob


def path_log_prob(h, params, codes, token):
    """Stable ``log leaf_prob`` computed along the path."""
    _check_token(codes, token)
    h = np.asarray(h, dtype=float)
    total = 0.0
    for bit, node in zip(codes.codes[token], codes.nodes[token]):
        x = _node_logit(params.R[node], h)
        total += float(log_sigmoid(x) if bit == "0" else log_sigmoid(-x))
    return total


def _gather_logits(h, params, sb):
    # h: (H,) or (B, H) -> logits per (row, column), shape (N, D) or (B, N, D)
    node_logits = h @ params.R.T
    idx = np.where(sb.column_node == PAD, 0, sb.column_node)
    p = node_logits[..., idx]
    return np.where(sb.column_node == PAD, 0.0, p)


def log_probs_vectorized(h, params, sb, stable=True):
    """Log-probabilities of all leaves: ``sum_columns log(Sign*sigmoid(p) + Bias)``.

    ``h`` may be a single hidden state ``(H,)`` or a batch ``(B, H)``.  With
    ``stable=True`` each cell is evaluated through the equivalent log-space
    forms ``log sigmoid(p)`` and ``log(1 - sigmoid(p)) = log sigmoid(-p)``;
    ``stable=False`` evaluates the matrix expression literally.
    """
    h = np.asarray(h, dtype=float)
    if h.shape[-1] != params.hidden_dim:
        raise ValueError("hidden dimension mismatch")
    p = _gather_logits(h, params, sb)
    if not stable:
        cells = np.log(sb.sign * sigmoid(p) + sb.bias)
    else:
        cells = np.where(sb.sign == 1, log_sigmoid(p),
                         np.where(sb.sign == -1, log_sigmoid(-p), 0.0))
    return _sum_columns(cells)


def _sum_columns(cells):
    # left-to-right accumulation, so trailing virtual-child zeros are exact no-ops
    out = cells[..., 0].copy()
    for k in range(1, cells.shape[-1]):
        out += cells[..., k]
    return out


def nll_grad(h, params, codes, target):
    """Negative log-likelihood of ``target`` and its exact gradients.

    Returns ``(grad_h, grad_R, loss)``.  Per path node with logit ``x`` the
    derivative of the loss w.r.t. ``x`` is ``sigmoid(x) - 1`` on a left step
    and ``sigmoid(x)`` on a right step.
    """
    _check_token(codes, target)
    h = np.asarray(h, dtype=float)
    grad_h = np.zeros_like(h)
    grad_R = np.zeros_like(params.R)
    loss = 0.0
    for bit, node in zip(codes.codes[target], codes.nodes[target]):
        r = params.R[node]
        x = _node_logit(r, h)
        left = bit == "0"
        loss -= float(log_sigmoid(x) if left else log_sigmoid(-x))
        g = float(sigmoid(x)) - (1.0 if left else 0.0)
        grad_h += g * r
        grad_R[node] += g * h
    return grad_h, grad_R, loss


def batch_nll_grad(H, params, sb, targets):
    """Mean NLL and ``grad_R`` over a batch, using the Sign/Bias rows of the targets."""
    H = np.asarray(H, dtype=float)
    targets = np.asarray(targets)
    sign = sb.sign[targets]
    col = sb.column_node[targets]
    valid = sign != 0
    idx = np.where(valid, col, 0)
    x = np.einsum("bh,bdh->bd", H, params.R[idx])
    x = np.where(valid, x, 0.0)
    loss_cells = np.where(sign == 1, -log_sigmoid(x), np.where(sign == -1, -log_sigmoid(-x), 0.0))
    g = np.where(valid, sigmoid(x) - (sign == 1), 0.0)
    grad_R = np.zeros_like(params.R)
    n_batch = H.shape[0]
    contrib = g[:, :, None] * H[:, None, :]
    np.add.at(grad_R, idx[valid], contrib[valid])
    return loss_cells.sum() / n_batch, grad_R / n_batch


def predict(H, params, sb):
    """Argmax decoding over all leaves; ties go to the smaller token id."""
    return np.argmax(log_probs_vectorized(H, params, sb), axis=-1)
