"""Warm-start rule mining from shallow trees and small random forests.

Greedy CART-style trees with Gini splits over the already-binarized features.
Every root-to-positive-leaf path becomes a candidate clause: a "feature = 1"
edge contributes the feature itself, a "feature = 0" edge contributes the
paired complement feature.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .master import Clause

log = logging.getLogger(__name__)


@dataclass
class TreeNode:
    feature: int = None  # split feature; None for leaves
    left: "TreeNode" = None  # feature == 0 branch
    right: "TreeNode" = None  # feature == 1 branch
    label: int = None  # leaf prediction in {-1, +1}
    counts: tuple = None  # (negatives, positives) reaching the node

    @property
    def is_leaf(self):
        return self.feature is None


@dataclass
class MineGrid:
    tree_depths: tuple = tuple(range(1, 30, 2))
    forest_sizes: tuple = tuple(range(1, 11))
    forest_depth: int = 5

    def __post_init__(self):
        if any(d < 1 for d in self.tree_depths):
            raise ValueError("tree depths must be >= 1")


def _gini_split_gain(y01, left_mask):
    nl = left_mask.sum()
    nr = len(y01) - nl
    if nl == 0 or nr == 0:
        return -1.0
    pl = y01[left_mask].mean()
    pr = y01[~left_mask].mean()
    p = y01.mean()
    parent = 2 * p * (1 - p)
    child = (nl * 2 * pl * (1 - pl) + nr * 2 * pr * (1 - pr)) / len(y01)
    return parent - child


def _leaf(y01):
    pos = int(y01.sum())
    neg = len(y01) - pos
    return TreeNode(label=1 if pos >= neg else -1, counts=(neg, pos))


def _grow(X, y01, depth, feature_pool, rng, feats_per_split):
    if depth == 0 or len(y01) < 2 or y01.min() == y01.max():
        return _leaf(y01)
    if feats_per_split is not None and feats_per_split < len(feature_pool):
        candidates = np.sort(rng.choice(feature_pool, size=feats_per_split, replace=False))
    else:
        candidates = feature_pool
    # zero-gain splits are allowed (XOR-like targets need them); only splits
    # with an empty child (gain -1) are rejected
    best_j, best_gain = None, -0.5
    for j in candidates:
        gain = _gini_split_gain(y01, X[:, j] == 0)
        if gain > best_gain + 1e-15:
            best_j, best_gain = int(j), gain
    if best_j is None:
        return _leaf(y01)
    left = X[:, best_j] == 0
    node = TreeNode(feature=best_j, counts=(int(len(y01) - y01.sum()), int(y01.sum())))
    node.left = _grow(X[left], y01[left], depth - 1, feature_pool, rng, feats_per_split)
    node.right = _grow(X[~left], y01[~left], depth - 1, feature_pool, rng, feats_per_split)
    return node


def fit_tree(ds, max_depth, seed=0):
    """Greedy Gini tree on the binary features; deterministic given the seed."""
    rng = np.random.default_rng(seed)
    y01 = (ds.y == 1).astype(float)
    return _grow(ds.X, y01, max_depth, np.arange(ds.p), rng, None)


def fit_forest(ds, n_trees, max_depth, seed=0):
    """Bootstrap forest with sqrt(p) feature subsampling per split."""
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    rng = np.random.default_rng(seed)
    feats_per_split = max(1, int(np.sqrt(ds.p)))
    trees = []
    for _ in range(n_trees):
        rows = rng.integers(0, ds.n, size=ds.n)
        y01 = (ds.y[rows] == 1).astype(float)
        trees.append(_grow(ds.X[rows], y01, max_depth, np.arange(ds.p), rng, feats_per_split))
    return trees


def route(tree, x):
    """Leaf reached by a single binary row."""
    node = tree
    while not node.is_leaf:
        node = node.right if x[node.feature] == 1 else node.left
    return node


def predict_tree(tree, ds):
    return np.array([route(tree, ds.X[i]).label for i in range(ds.n)])


def extract_rules(trees, feature_map):
    """One clause per positive leaf across all trees, deduplicated.

    Paths taking a "feature = 0" edge need that feature's complement; paths
    whose complement was deduplicated away during binarization are skipped
    with a warning.
    """
    comp = feature_map.complement
    out = {}
    skipped = 0

    def walk(node, lits):
        nonlocal skipped
        if node.is_leaf:
            if node.label == 1 and lits:
                key = tuple(sorted(set(lits)))
                out.setdefault(key, Clause(key))
            return
        walk_right = lits + [node.feature]
        walk(node.right, walk_right)
        if comp[node.feature] >= 0:
            walk(node.left, lits + [int(comp[node.feature])])
        else:
            skipped += _count_positive_leaves(node.left)

    for tree in trees:
        walk(tree, [])
    if skipped:
        log.warning("skipped %d positive-leaf paths lacking a complement feature", skipped)
    return list(out.values())


def _count_positive_leaves(node):
    if node.is_leaf:
        return 1 if node.label == 1 else 0
    return _count_positive_leaves(node.left) + _count_positive_leaves(node.right)


def mine_warm_start(ds, grid=None, seed=0, max_rules=2000):
    """Union of rules from the tree/forest grid, capped for tractability."""
    grid = grid or MineGrid()
    trees = []
    for depth in grid.tree_depths:
        trees.append(fit_tree(ds, depth, seed=seed))
    for size in grid.forest_sizes:
        trees.extend(fit_forest(ds, size, grid.forest_depth, seed=seed + size))
    rules = extract_rules(trees, ds.feature_map)
    if len(rules) > max_rules:
        # Prefer short rules; ties resolved lexicographically for determinism.
        rules = sorted(rules, key=lambda c: (len(c.literals), c.literals))[:max_rules]
    return rules
