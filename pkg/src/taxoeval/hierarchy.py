"""Hierarchy-level structural metrics over category trees.

Two complementary measures:

* Unordered semantic tree edit distance: a recursive node-to-node distance
  where a node pair costs its label renaming (1 - sim) plus the minimum
  assignment over their children. The child cost matrix is padded square
  with dummies, and matching a real child to a dummy charges the whole
  subtree at one unit per node (delete/insert). Sibling order never
  matters: permuting siblings permutes rows/columns of the assignment
  matrix without changing its optimum. The normalized variant divides by
  the combined node count of both hierarchies, giving a value in [0, 1].

* Path consistency: for each aligned paper, its root-to-paper ancestor
  label chains in both trees are aligned order-preservingly (the shorter
  chain matched to an ordered subsequence of the longer one); extra nodes
  in the longer chain are charged a flat penalty each. Per-paper cost J
  maps to a score 1/(1+J), averaged over aligned papers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .alignment import AlignmentSet
from .embedding import as_similarity
from .tree import CategoryNode, ancestor_paths, subtree_size

__all__ = [
    "TreeDistanceResult",
    "PathConsistencyResult",
    "assignment_cost",
    "children_match_cost",
    "unordered_tree_distance",
    "normalized_distance",
    "chain_alignment_cost",
    "path_consistency",
]

DEFAULT_EXTRA_NODE_PENALTY = 1.0


@dataclass(frozen=True)
class TreeDistanceResult:
    distance: float  # total edit cost, >= 0
    normalized: float  # distance / (nodes in a + nodes in b), in [0, 1]
    node_counts: tuple[int, int]


@dataclass(frozen=True)
class PathConsistencyResult:
    per_paper_costs: Mapping[str, float]  # expert paper id -> alignment cost J
    score: float | None  # mean of 1/(1+J); None when nothing aligned
    aligned_count: int


def assignment_cost(matrix: np.ndarray) -> float:
    """Minimum-cost perfect assignment on a square cost matrix."""
    rows, cols = linear_sum_assignment(matrix)
    return float(matrix[rows, cols].sum())


def children_match_cost(
    children_a: Sequence[CategoryNode],
    children_b: Sequence[CategoryNode],
    pairwise: np.ndarray,
) -> float:
    """Minimum-cost matching of two child lists given their pairwise
    subtree distances.

    The matrix is padded to k = max(m, n): a real child matched to a dummy
    is deleted/inserted wholesale at its subtree size, dummy-dummy pairs
    are free.
    """
    m, n = len(children_a), len(children_b)
    k = max(m, n)
    if k == 0:
        return 0.0
    matrix = np.zeros((k, k), dtype=np.float64)
    matrix[:m, :n] = pairwise
    for i in range(m):
        matrix[i, n:] = subtree_size(children_a[i])
    for j in range(n):
        matrix[m:, j] = subtree_size(children_b[j])
    return assignment_cost(matrix)


def unordered_tree_distance(t_star, t_hat, provider) -> TreeDistanceResult:
    """Edit distance between two category hierarchies, sibling order ignored.

    Node pairs are memoized, so shared subproblems across sibling
    assignments are solved once.
    """
    simprov = as_similarity(provider)
    root_a = t_star if isinstance(t_star, CategoryNode) else t_star.root
    root_b = t_hat if isinstance(t_hat, CategoryNode) else t_hat.root

    sizes: dict[int, int] = {}

    def size(node: CategoryNode) -> int:
        cached = sizes.get(id(node))
        if cached is None:
            cached = 1 + sum(size(c) for c in node.children)
            sizes[id(node)] = cached
        return cached

    memo: dict[tuple[int, int], float] = {}

    def dist(u: CategoryNode, v: CategoryNode) -> float:
        key = (id(u), id(v))
        cached = memo.get(key)
        if cached is not None:
            return cached
        cost = simprov.cost(u.label, v.label)
        m, n = len(u.children), len(v.children)
        k = max(m, n)
        if k > 0:
            matrix = np.zeros((k, k), dtype=np.float64)
            for i, cu in enumerate(u.children):
                matrix[i, n:] = size(cu)
                for j, cv in enumerate(v.children):
                    matrix[i, j] = dist(cu, cv)
            for j, cv in enumerate(v.children):
                matrix[m:, j] = size(cv)
            cost += assignment_cost(matrix)
        memo[key] = cost
        return cost

    total = dist(root_a, root_b)
    count_a, count_b = size(root_a), size(root_b)
    return TreeDistanceResult(
        distance=total,
        normalized=normalized_distance(total, count_a, count_b),
        node_counts=(count_a, count_b),
    )


def normalized_distance(distance: float, nodes_a: int, nodes_b: int) -> float:
    """Distance divided by the combined hierarchy size; reports display it
    as a percentage."""
    if nodes_a + nodes_b <= 0:
        raise ValueError("combined node count must be positive")
    return distance / (nodes_a + nodes_b)


def chain_alignment_cost(
    chain_a: Sequence[str],
    chain_b: Sequence[str],
    penalty: float = DEFAULT_EXTRA_NODE_PENALTY,
    provider=None,
) -> float:
    """Order-preserving minimum-cost alignment of two ancestor label chains.

    The shorter chain (length p) is matched to an ordered subsequence of
    the longer one (length q) by the recurrence

        dp[0][j] = 0
        dp[i][j] = min(dp[i-1][j-1] + (1 - sim(a_i, b_j)), dp[i][j-1])

    and each of the q - p unmatched extra labels adds ``penalty``. The two
    arguments are interchangeable.
    """
    simprov = as_similarity(provider)
    a, b = list(chain_a), list(chain_b)
    if len(a) > len(b):
        a, b = b, a
    p, q = len(a), len(b)
    if p == 0:
        raise ValueError("ancestor chains must be non-empty")
    dp = np.full((p + 1, q + 1), np.inf)
    dp[0, :] = 0.0
    for i in range(1, p + 1):
        for j in range(i, q + 1):
            match = dp[i - 1, j - 1] + simprov.cost(a[i - 1], b[j - 1])
            dp[i, j] = min(match, dp[i, j - 1])
    return float(dp[p, q]) + penalty * (q - p)


def path_consistency(
    expert,
    model,
    alignment: AlignmentSet,
    penalty: float = DEFAULT_EXTRA_NODE_PENALTY,
    provider=None,
) -> PathConsistencyResult:
    """Per-paper ancestor-chain agreement, averaged over aligned papers.

    For every aligned pair the root-to-paper chains (paper node excluded)
    are extracted from both taxonomies; when a title occupies several
    leaves, the best-matching pair of chains is scored.
    """
    per_paper: dict[str, float] = {}
    for pair in alignment.pairs:
        chains_star = ancestor_paths(expert, pair.expert)
        chains_hat = ancestor_paths(model, pair.model)
        if not chains_star or not chains_hat:
            continue
        per_paper[pair.expert] = min(
            chain_alignment_cost(s, h, penalty, provider)
            for s in chains_star
            for h in chains_hat
        )
    if not per_paper:
        return PathConsistencyResult(per_paper_costs={}, score=None, aligned_count=0)
    score = sum(1.0 / (1.0 + j) for j in per_paper.values()) / len(per_paper)
    return PathConsistencyResult(
        per_paper_costs=dict(sorted(per_paper.items())),
        score=score,
        aligned_count=len(per_paper),
    )
