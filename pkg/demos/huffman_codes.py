"""Huffman trees over token counts and the path codes they induce."""
import numpy as np

from vocabtree import build_huffman, derive_codes

counts = [45, 13, 12, 16, 9, 5]
tree = build_huffman(counts)
print(tree)
print(tree.to_nested())

codes = derive_codes(tree)
for t, code in enumerate(codes.codes):
    print("token %d  count %2d  code %s" % (t, counts[t], code))

# frequent tokens get short codes
depths = np.array([codes.depth(t) for t in range(len(counts))])
print("weighted depth:", np.dot(depths, counts) / sum(counts))

# prefix-free: no code starts another
cs = codes.codes
print("prefix free:", not any(a != b and b.startswith(a) for a in cs for b in cs))

# Kraft equality holds for any full binary tree
print("sum 2^-depth:", np.sum(2.0 ** -depths))

# ties are broken by token id, so the tree is reproducible
print(build_huffman([1, 1, 1, 1]).to_nested())

# JSON round trip
text = tree.to_json()
print(text[:80], "...")
