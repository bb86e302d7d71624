"""The hierarchical softmax layer: path products versus the Sign/Bias
matrix form, and the gradient."""
import numpy as np

from vocabtree import (NodeParams, VocabTree, build_sign_bias, derive_codes,
                       leaf_prob, log_probs_vectorized, nll_grad)

# ((w1, w2), w3)
tree = VocabTree.from_nested(((0, 1), 2), tokens=["w1", "w2", "w3"])
codes = derive_codes(tree)
print(codes.to_tsv())

sb = build_sign_bias(tree)
print("sign\n", sb.sign)
print("bias\n", sb.bias)
print("column_node\n", sb.column_node)   # -1 marks padding

rng = np.random.default_rng(1)
params = NodeParams.random(tree, hidden_dim=4, seed=1, scale=1.0)
h = rng.normal(size=4)

p_path = np.array([leaf_prob(h, params, codes, t) for t in range(3)])
p_vec = np.exp(log_probs_vectorized(h, params, sb))
print("path:      ", p_path)
print("vectorised:", p_vec)
print("sums to", p_path.sum())

# a batch of hidden states goes through in one call
H = rng.normal(size=(5, 4))
print(np.exp(log_probs_vectorized(H, params, sb)).sum(axis=1))

# large logits stay finite with the stable form
big = NodeParams(params.R * 1e3)
print(log_probs_vectorized(h, big, sb))

# analytic gradient against central differences
g_h, g_R, loss = nll_grad(h, params, codes, 1)
eps = 1e-6
num = np.zeros_like(h)
for i in range(len(h)):
    d = np.zeros_like(h)
    d[i] = eps
    num[i] = (-np.log(leaf_prob(h + d, params, codes, 1))
              + np.log(leaf_prob(h - d, params, codes, 1))) / (2 * eps)
print("loss", loss)
print("max grad error", np.max(np.abs(num - g_h)))
