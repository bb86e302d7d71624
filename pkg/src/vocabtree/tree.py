"""Strict binary vocabulary trees and their JSON form.

Leaves carry token ids ``0..N-1``.  Node ids are arbitrary integers; the
builders in this package use ``0..N-1`` for leaves and ``N..2N-2`` for
internal nodes in creation order, but parsed trees may use anything.
"""

import hashlib
import json
from collections import deque

from ._io import dumps_json


class TreeError(ValueError):
    """Raised for malformed trees (cycles, missing children, bad leaves)."""


class VocabTree:
    """Immutable strict binary tree whose leaves are token ids.

    Parameters
    ----------
    root : int
        Id of the root node.
    children : dict[int, tuple[int, int]]
        ``internal id -> (left id, right id)``.
    leaves : dict[int, int]
        ``leaf node id -> token id``.
    tokens : sequence of str, optional
        Token texts indexed by token id, carried along for export.
    """

    def __init__(self, root, children, leaves, tokens=None):
        self.root = int(root)
        self.children = {int(k): (int(v[0]), int(v[1])) for k, v in children.items()}
        self.leaves = {int(k): int(v) for k, v in leaves.items()}
        self.tokens = list(tokens) if tokens is not None else None
        self._validate()
        self._internal_order = self._bfs_internal()
        self._internal_index = {nid: i for i, nid in enumerate(self._internal_order)}
        self._leaf_of_token = {tok: nid for nid, tok in self.leaves.items()}

    # construction -----------------------------------------------------------

    @classmethod
    def from_merges(cls, n_leaves, merges, tokens=None):
        """Build from a merge list; merge ``k`` creates node ``n_leaves + k``."""
        children = {n_leaves + k: (a, b) for k, (a, b) in enumerate(merges)}
        root = n_leaves + len(merges) - 1 if merges else 0
        return cls(root, children, {i: i for i in range(n_leaves)}, tokens)

    @classmethod
    def from_nested(cls, nested, tokens=None):
        """Build from nested 2-tuples of token ids, e.g. ``((0, 1), 2)``."""
        n = _count_leaves(nested)
        merges = []

        def walk(t):
            if isinstance(t, int):
                return t
            a, b = t
            left, right = walk(a), walk(b)
            merges.append((left, right))
            return n + len(merges) - 1

        walk(nested)
        return cls.from_merges(n, merges, tokens)

    def _validate(self):
        if not self.leaves:
            raise TreeError("tree has no leaves")
        overlap = set(self.children) & set(self.leaves)
        if overlap:
            raise TreeError("nodes are both leaf and internal: %s" % sorted(overlap))
        n = len(self.leaves)
        if sorted(self.leaves.values()) != list(range(n)):
            raise TreeError("leaf tokens must be exactly 0..%d once each" % (n - 1))
        if len(self.children) != n - 1:
            raise TreeError("expected %d internal nodes, found %d" % (n - 1, len(self.children)))
        if self.root not in self.children and self.root not in self.leaves:
            raise TreeError("root %d is not a node" % self.root)
        seen = set()
        stack = [self.root]
        while stack:
            nid = stack.pop()
            if nid in seen:
                raise TreeError("node %d reached twice (cycle or shared child)" % nid)
            seen.add(nid)
            if nid in self.children:
                for c in self.children[nid]:
                    if c not in self.children and c not in self.leaves:
                        raise TreeError("node %d has missing child %d" % (nid, c))
                    stack.append(c)
        if len(seen) != 2 * n - 1:
            raise TreeError("%d nodes unreachable from root" % (2 * n - 1 - len(seen)))
        if self.tokens is not None and len(self.tokens) != n:
            raise TreeError("token list has %d entries for %d leaves" % (len(self.tokens), n))

    def _bfs_internal(self):
        order = []
        queue = deque([self.root])
        while queue:
            nid = queue.popleft()
            if nid in self.children:
                order.append(nid)
                queue.extend(self.children[nid])
        return order

    # queries ----------------------------------------------------------------

    @property
    def n_leaves(self):
        return len(self.leaves)

    @property
    def internal_order(self):
        """Internal node ids in breadth-first order (left child first)."""
        return list(self._internal_order)

    def internal_index(self, node_id):
        return self._internal_index[node_id]

    def leaf_node(self, token_id):
        return self._leaf_of_token[token_id]

    def is_leaf(self, node_id):
        return node_id in self.leaves

    def subtree_tokens(self, node_id):
        """Token ids under ``node_id`` in left-to-right order."""
        out = []
        stack = [node_id]
        while stack:
            nid = stack.pop()
            if nid in self.leaves:
                out.append(self.leaves[nid])
            else:
                left, right = self.children[nid]
                stack.append(right)
                stack.append(left)
        return out

    def paths(self):
        """Per token id: list of ``(internal node id, bit)`` from the root down."""
        out = [None] * self.n_leaves
        stack = [(self.root, [])]
        while stack:
            nid, path = stack.pop()
            if nid in self.leaves:
                out[self.leaves[nid]] = path
            else:
                left, right = self.children[nid]
                stack.append((right, path + [(nid, 1)]))
                stack.append((left, path + [(nid, 0)]))
        return out

    def depths(self):
        return [len(p) for p in self.paths()]

    def merges(self):
        """Merge list in post-order, each as a pair of (min token id) keys.

        Two trees built by the same merge sequence give equal lists; used to
        compare constructions merge-for-merge.
        """
        out = []
        for nid in self._creation_order():
            left, right = self.children[nid]
            out.append((min(self.subtree_tokens(left)), min(self.subtree_tokens(right))))
        return out

    def _creation_order(self):
        return sorted(self.children)

    def to_nested(self, node_id=None):
        nid = self.root if node_id is None else node_id
        if nid in self.leaves:
            return self.leaves[nid]
        left, right = self.children[nid]
        return (self.to_nested(left), self.to_nested(right))

    def token_text(self, token_id):
        return self.tokens[token_id] if self.tokens is not None else str(token_id)

    # serialisation ----------------------------------------------------------

    def to_dict(self):
        nodes = []
        for nid in sorted(set(self.leaves) | set(self.children)):
            if nid in self.leaves:
                nodes.append({"id": nid, "token": self.leaves[nid]})
            else:
                left, right = self.children[nid]
                nodes.append({"id": nid, "left": left, "right": right})
        d = {"root": self.root, "nodes": nodes}
        if self.tokens is not None:
            d["tokens"] = list(self.tokens)
        return d

    def to_json(self):
        return dumps_json(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, d):
        try:
            root = d["root"]
            children, leaves = {}, {}
            for node in d["nodes"]:
                nid = node["id"]
                if nid in children or nid in leaves:
                    raise TreeError("duplicate node id %d" % nid)
                if "token" in node:
                    leaves[nid] = node["token"]
                else:
                    children[nid] = (node["left"], node["right"])
        except (KeyError, TypeError) as exc:
            raise TreeError("malformed tree JSON: %s" % exc) from None
        return cls(root, children, leaves, d.get("tokens"))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def structure_hash(self):
        """SHA-256 over the shape and leaf labelling (token texts excluded)."""
        d = self.to_dict()
        d.pop("tokens", None)
        return hashlib.sha256(dumps_json(d).encode()).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, VocabTree):
            return NotImplemented
        return (self.root == other.root and self.children == other.children
                and self.leaves == other.leaves and self.tokens == other.tokens)

    def __repr__(self):
        return "VocabTree(n_leaves=%d)" % self.n_leaves


def _count_leaves(t):
    if isinstance(t, int):
        return 1
    return _count_leaves(t[0]) + _count_leaves(t[1])
