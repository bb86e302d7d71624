"""Building vocabulary trees by clustering token embeddings."""
import numpy as np

from vocabtree import VALID_SPECS, build_cluster_tree, distance_matrix

rng = np.random.default_rng(0)

# three well separated groups of four "characters" each
centres = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
E = np.repeat(centres, 4, axis=0) + rng.normal(0, 0.5, size=(12, 2))
tokens = list("abcdefghijkl")

print(len(VALID_SPECS), "linkage/metric combinations")
for spec in VALID_SPECS[:3]:
    print("  ", spec)

D = distance_matrix(E, "euclidean")
print("distance matrix", D.shape, "symmetric:", np.allclose(D, D.T))

# bottom-up
tree = build_cluster_tree(E, "agglomerative.ward.euclidean", tokens=tokens)
print(tree.to_nested())
print("first merges:", tree.merges()[:3])

# top-down
tree = build_cluster_tree(E, "divisive.2-means.euclidean", tokens=tokens)
print(tree.to_nested())

# the two root subtrees should not mix groups
root = tree.root
left, right = tree.children[root]
print(sorted(tree.subtree_tokens(left)), sorted(tree.subtree_tokens(right)))

# medoids only need distances, so any metric works
tree = build_cluster_tree(E, "divisive.2-medoids.cityblock", tokens=tokens)
print(tree.depths())
