"""Training an H-softmax output layer on synthetic blobs and comparing tree
construction methods with a flat softmax."""
import numpy as np

from vocabtree import (TrainConfig, build_cluster_tree, build_huffman, class_means,
                       make_blobs, random_features, train_flat_softmax, train_toy)

n_classes = 32
X, y, _ = make_blobs(n_classes, dim=16, n_samples=3000, seed=0)
H = random_features(X, 256, seed=0)
print("features", H.shape)

config = TrainConfig(epochs=10)

W, acc = train_flat_softmax(H, y, n_classes, config)
print("flat softmax      %.3f" % acc)

# balanced tree from uniform counts
tree = build_huffman([1] * n_classes)
_, acc = train_toy(H, y, tree, config)
print("balanced tree     %.3f" % acc)

# similar classes share subtrees
tree = build_cluster_tree(class_means(X, y, n_classes), "agglomerative.ward.euclidean")
_, acc = train_toy(H, y, tree, config)
print("cluster tree      %.3f" % acc)

# skewed classes: Huffman puts frequent ones near the root
weights = 1.0 / np.arange(1, n_classes + 1)
X, y, _ = make_blobs(n_classes, 16, 3000, seed=1, weights=weights)
H = random_features(X, 256, seed=1)
tree = build_huffman(list(np.bincount(y, minlength=n_classes)))
params, acc = train_toy(H, y, tree, config)
print("skewed, huffman   %.3f" % acc)
print("depth of class 0:", tree.depths()[0], " of class 31:", tree.depths()[31])
