"""Vocabulary trees for hierarchical softmax: Huffman or embedding-clustering
construction, the H-Softmax layer itself, and evaluation helpers."""

from .clustering import (DistanceMetric, LinkageSpec, VALID_SPECS, agglomerate,
                         build_cluster_tree, distance_matrix, divide, pairwise_distance)
from .corpus import LanguageProportions, Vocabulary, build_vocabulary, downsampling_ratios, read_corpus
from .embedding import average_shared, load_embeddings, mono_map, read_embedding_file, save_embeddings
from .evaluation import Lexicon, bli_p_at_1, bli_report, cer, word_embed
from .hsoftmax import (NodeParams, PathCodeTable, SignBias, build_sign_bias, derive_codes,
                       leaf_prob, log_probs_vectorized, nll_grad)
from .huffman import build_huffman
from .training import TrainConfig, class_means, make_blobs, random_features, train_flat_softmax, train_toy
from .tree import TreeError, VocabTree

__version__ = "0.1.0"
